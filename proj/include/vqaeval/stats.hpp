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

// Rank correlation, variance and Krippendorff's alpha.

#ifndef VQAEVAL_STATS_HPP_
#define VQAEVAL_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqaeval/error.hpp"

namespace vqaeval {

// 1-based ranks; tied values share the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error("correlation: length mismatch (" + std::to_string(xs.size()) + " vs " +
                std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw UndefinedStatistic("correlation: need at least 2 points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0)
    throw UndefinedStatistic("correlation: undefined for a constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Spearman's rho: Pearson correlation of average ranks.
inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size())
    throw Error("spearman: length mismatch (" + std::to_string(xs.size()) + " vs " +
                std::to_string(ys.size()) + ")");
  if (xs.size() < 2) throw UndefinedStatistic("spearman: need at least 2 points");
  const auto is_constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  if (is_constant(xs) || is_constant(ys))
    throw UndefinedStatistic("spearman: undefined for a constant input");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

enum class VarianceConvention { kPopulation, kSample };

inline std::string_view to_string(VarianceConvention c) {
  return c == VarianceConvention::kPopulation ? "population" : "sample";
}

inline double variance(std::span<const double> values,
                       VarianceConvention convention = VarianceConvention::kPopulation) {
  if (values.size() < 2) throw Error("variance: need at least 2 values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (convention == VarianceConvention::kPopulation ? n : n - 1);
}

// Annotators x items; empty cells are missing values.
class AnnotationMatrix {
 public:
  AnnotationMatrix(std::size_t annotators, std::size_t items)
      : items_(items), cells_(annotators * items) {}

  std::size_t annotators() const { return items_ ? cells_.size() / items_ : 0; }
  std::size_t items() const { return items_; }

  void set(std::size_t annotator, std::size_t item, std::optional<int> score) {
    if (score && (*score < 0 || *score > 10))
      throw Error("annotation matrix: score must be an integer in 0..10");
    cells_.at(annotator * items_ + item) = score;
  }
  std::optional<int> at(std::size_t annotator, std::size_t item) const {
    return cells_.at(annotator * items_ + item);
  }

  // Values recorded for one item, in annotator order.
  std::vector<int> item_values(std::size_t item) const {
    std::vector<int> v;
    for (std::size_t a = 0; a < annotators(); ++a)
      if (auto s = at(a, item)) v.push_back(*s);
    return v;
  }

 private:
  std::size_t items_;
  std::vector<std::optional<int>> cells_;
};

enum class AlphaMetric { kInterval, kOrdinal };

// Krippendorff's alpha from the coincidence matrix. Items with fewer than two
// values are not pairable and drop out.
inline double krippendorff_alpha(const AnnotationMatrix& m,
                                 AlphaMetric metric = AlphaMetric::kInterval) {
  constexpr int kValues = 11;
  double o[kValues][kValues] = {};
  std::size_t pairable_items = 0;
  for (std::size_t item = 0; item < m.items(); ++item) {
    const auto values = m.item_values(item);
    if (values.size() < 2) continue;
    ++pairable_items;
    int counts[kValues] = {};
    for (int v : values) ++counts[v];
    const double denom = static_cast<double>(values.size() - 1);
    for (int c = 0; c < kValues; ++c) {
      if (!counts[c]) continue;
      for (int k = 0; k < kValues; ++k)
        o[c][k] += counts[c] * (counts[k] - (c == k ? 1 : 0)) / denom;
    }
  }
  if (pairable_items < 2)
    throw UndefinedStatistic("krippendorff alpha: need at least 2 items with 2 or more values");

  double n_c[kValues] = {};
  double n = 0;
  for (int c = 0; c < kValues; ++c) {
    for (int k = 0; k < kValues; ++k) n_c[c] += o[c][k];
    n += n_c[c];
  }
  auto delta2 = [&](int c, int k) {
    if (metric == AlphaMetric::kInterval) return static_cast<double>((c - k) * (c - k));
    const int lo = std::min(c, k), hi = std::max(c, k);
    double s = 0;
    for (int g = lo; g <= hi; ++g) s += n_c[g];
    s -= (n_c[c] + n_c[k]) / 2.0;
    return s * s;
  };
  double observed = 0, expected = 0;
  for (int c = 0; c < kValues; ++c) {
    for (int k = 0; k < kValues; ++k) {
      const double d = delta2(c, k);
      observed += o[c][k] * d;
      expected += n_c[c] * n_c[k] * d;
    }
  }
  if (expected == 0)
    throw UndefinedStatistic("krippendorff alpha: all pairable values are identical");
  return 1.0 - (n - 1) * observed / expected;
}

}  // namespace vqaeval

#endif  // VQAEVAL_STATS_HPP_
