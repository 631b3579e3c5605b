// Copyright 2026 The vqaeval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reference computations used to check the library. Each one takes a
// different route from the code under test: O(n^2) ranking, pair
// enumeration, unstabilized exponentials, finite differences.

#ifndef VQAEVAL_TESTS_ORACLES_HPP_
#define VQAEVAL_TESTS_ORACLES_HPP_

#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "vqaeval/contrastive.hpp"
#include "vqaeval/encoder.hpp"
#include "vqaeval/stats.hpp"

namespace oracle {

// rank_i = 1 + #{x_j < x_i} + (#{x_j == x_i, j != i}) / 2
inline std::vector<double> ranks_by_counting(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] < x[i]) less += 1;
      else if (x[j] == x[i] && j != i) equal += 1;
    }
    r[i] = 1 + less + equal / 2;
  }
  return r;
}

// Single-pass sums formula, not the centered two-pass form.
inline double pearson_sums(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson_sums(ranks_by_counting(x), ranks_by_counting(y));
}

// Krippendorff's alpha by enumerating ordered value pairs: observed
// disagreement within items, expected disagreement across all pairable
// values.
inline double krippendorff_alpha(const std::vector<std::vector<std::optional<int>>>& rows,
                                 bool ordinal = false) {
  std::vector<std::vector<int>> units;
  const std::size_t items = rows.empty() ? 0 : rows[0].size();
  for (std::size_t i = 0; i < items; ++i) {
    std::vector<int> u;
    for (const auto& r : rows)
      if (r[i]) u.push_back(*r[i]);
    if (u.size() >= 2) units.push_back(u);
  }
  std::vector<int> all;
  for (const auto& u : units) all.insert(all.end(), u.begin(), u.end());
  std::map<int, double> freq;
  for (int v : all) freq[v] += 1;
  auto d2 = [&](int c, int k) {
    if (!ordinal) return double((c - k) * (c - k));
    double s = 0;
    for (int g = std::min(c, k); g <= std::max(c, k); ++g) s += freq.count(g) ? freq[g] : 0;
    s -= (freq[c] + freq[k]) / 2;
    return s * s;
  };
  const double n = static_cast<double>(all.size());
  double d_o = 0;
  for (const auto& u : units)
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j) d_o += d2(u[i], u[j]) / static_cast<double>(u.size() - 1);
  d_o /= n;
  double d_e = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j) d_e += d2(all[i], all[j]);
  d_e /= n * (n - 1);
  return 1 - d_o / d_e;
}

inline double cosine_plain(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += a[k] * b[k];
    aa += a[k] * a[k];
    bb += b[k] * b[k];
  }
  return ab / std::sqrt(aa * bb);
}

// The loss written out literally: -log(e^{s+} / sum(e^{..})) without any
// shifting.
inline double naive_loss(const std::vector<std::vector<double>>& h,
                         const std::vector<std::vector<double>>& hp,
                         const std::vector<std::vector<double>>& hn, double tau,
                         bool own_negative = false) {
  const std::size_t n = h.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double denom = 0;
    for (std::size_t j = 0; j < n; ++j) {
      denom += std::exp(cosine_plain(h[i], hp[j]) / tau);
      denom += std::exp(cosine_plain(h[i], own_negative ? hn[i] : hn[j]) / tau);
    }
    total += -std::log(std::exp(cosine_plain(h[i], hp[i]) / tau) / denom);
  }
  return total / static_cast<double>(n);
}

// Same loss through the encoder, recomputing pooled vectors directly from
// the matrices.
inline std::vector<double> encode_raw(const vqaeval::EncoderModel& m, const std::string& text) {
  const auto ids = vqaeval::token_ids(m, text);
  std::vector<double> u(m.dim(), 0.0);
  for (auto id : ids)
    for (std::size_t c = 0; c < m.dim(); ++c) u[c] += m.embedding(id, c) / double(ids.size());
  std::vector<double> h(m.out_dim(), 0.0);
  for (std::size_t r = 0; r < m.out_dim(); ++r)
    for (std::size_t c = 0; c < m.dim(); ++c) h[r] += m.projection(r, c) * u[c];
  return h;
}

inline double naive_model_loss(const vqaeval::EncoderModel& m, const vqaeval::TrainBatch& b,
                               double tau, bool own_negative = false) {
  std::vector<std::vector<double>> h, hp, hn;
  for (std::size_t i = 0; i < b.size(); ++i) {
    h.push_back(encode_raw(m, b.anchors[i]));
    hp.push_back(encode_raw(m, b.positives[i]));
    hn.push_back(encode_raw(m, b.hard_negatives[i]));
  }
  return naive_loss(h, hp, hn, tau, own_negative);
}

// Central difference of the naive loss with respect to one parameter.
inline double finite_difference(vqaeval::EncoderModel m, const vqaeval::TrainBatch& b, double tau,
                                bool projection, std::size_t row, std::size_t col,
                                double step = 1e-5, bool own_negative = false) {
  double& x = projection ? m.projection(row, col) : m.embedding(row, col);
  const double saved = x;
  x = saved + step;
  const double plus = naive_model_loss(m, b, tau, own_negative);
  x = saved - step;
  const double minus = naive_model_loss(m, b, tau, own_negative);
  x = saved;
  return (plus - minus) / (2 * step);
}

}  // namespace oracle

#endif  // VQAEVAL_TESTS_ORACLES_HPP_
