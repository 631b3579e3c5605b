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

// In-batch hard-negative contrastive loss over cosine similarities, with its
// exact gradient through the encoder.

#ifndef VQAEVAL_CONTRASTIVE_HPP_
#define VQAEVAL_CONTRASTIVE_HPP_

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "vqaeval/cosine.hpp"
#include "vqaeval/encoder.hpp"
#include "vqaeval/error.hpp"

namespace vqaeval {

inline constexpr double kMinTemperature = 1e-6;

// Which hard negatives enter anchor i's denominator.
enum class NegativeTerm {
  // sum_j exp(sim(h_i, h_j^+)/t) + exp(sim(h_i, h_j^-)/t): every negative in the batch.
  kInBatch,
  // sum_j exp(sim(h_i, h_j^+)/t) + exp(sim(h_i, h_i^-)/t): the anchor's own
  // negative, counted once per j.
  kOwnNegativeRepeated,
};

struct LossOptions {
  double temperature = 0.05;
  NegativeTerm negatives = NegativeTerm::kInBatch;
};

struct TrainBatch {
  std::vector<std::string> anchors;
  std::vector<std::string> positives;
  std::vector<std::string> hard_negatives;

  std::size_t size() const { return anchors.size(); }

  void validate() const {
    if (anchors.size() != positives.size() || anchors.size() != hard_negatives.size())
      throw Error("batch: anchors, positives and hard negatives must have equal length");
    if (anchors.size() < 2) throw Error("batch: need at least 2 triples");
  }
};

// Loss over precomputed embeddings, and optionally its gradient with respect
// to each embedding.
struct EmbeddingLoss {
  double loss = 0;
  std::vector<Embedding> d_anchor, d_positive, d_negative;
};

namespace contrastive_detail {

struct CosineTerm {
  double value;
  double norm_a, norm_b;
};

inline CosineTerm cos_term(const Embedding& a, const Embedding& b, std::size_t index) {
  const double na = l2_norm(a), nb = l2_norm(b);
  if (na == 0 || nb == 0)
    throw Error("contrastive loss: zero-norm embedding at batch index " + std::to_string(index));
  return {dot(a, b) / (na * nb), na, nb};
}

// Adds weight * d cos(a, b) / da to `grad_a` and weight * d cos / db to `grad_b`.
inline void add_cos_grad(const Embedding& a, const Embedding& b, const CosineTerm& t,
                         double weight, Embedding& grad_a, Embedding& grad_b) {
  const double inv_ab = 1.0 / (t.norm_a * t.norm_b);
  const double ca = t.value / (t.norm_a * t.norm_a);
  const double cb = t.value / (t.norm_b * t.norm_b);
  for (std::size_t k = 0; k < a.size(); ++k) {
    grad_a[k] += weight * (b[k] * inv_ab - ca * a[k]);
    grad_b[k] += weight * (a[k] * inv_ab - cb * b[k]);
  }
}

}  // namespace contrastive_detail

inline EmbeddingLoss contrastive_loss(const std::vector<Embedding>& anchors,
                                      const std::vector<Embedding>& positives,
                                      const std::vector<Embedding>& negatives,
                                      const LossOptions& opts, bool with_gradient = false) {
  using namespace contrastive_detail;
  const std::size_t n = anchors.size();
  if (positives.size() != n || negatives.size() != n)
    throw Error("contrastive loss: anchors, positives and negatives must have equal length");
  if (n < 2) throw Error("contrastive loss: need at least 2 triples");
  if (!(opts.temperature >= kMinTemperature))
    throw Error("contrastive loss: temperature must be >= 1e-6");

  EmbeddingLoss out;
  if (with_gradient) {
    const std::size_t d = anchors.front().size();
    out.d_anchor.assign(n, Embedding(d, 0.0));
    out.d_positive.assign(n, Embedding(d, 0.0));
    out.d_negative.assign(n, Embedding(d, 0.0));
  }
  const double inv_t = 1.0 / opts.temperature;
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool own = opts.negatives == NegativeTerm::kOwnNegativeRepeated;

  std::vector<CosineTerm> pos(n), neg(n);
  std::vector<double> w_pos(n), w_neg(n);
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      pos[j] = cos_term(anchors[i], positives[j], i);
      if (!own || j == i) neg[j] = cos_term(anchors[i], negatives[j], i);
    }
    // Logits; in the repeated form the own negative appears n times, which is
    // a log(n) shift on a single logit.
    double max_logit = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) max_logit = std::max(max_logit, pos[j].value * inv_t);
    const double own_neg_logit = own ? neg[i].value * inv_t : 0.0;
    if (own) {
      max_logit = std::max(max_logit, own_neg_logit);
    } else {
      for (std::size_t j = 0; j < n; ++j) max_logit = std::max(max_logit, neg[j].value * inv_t);
    }
    double z = 0;
    for (std::size_t j = 0; j < n; ++j) {
      w_pos[j] = std::exp(pos[j].value * inv_t - max_logit);
      z += w_pos[j];
    }
    if (own) {
      w_neg[i] = static_cast<double>(n) * std::exp(own_neg_logit - max_logit);
      z += w_neg[i];
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        w_neg[j] = std::exp(neg[j].value * inv_t - max_logit);
        z += w_neg[j];
      }
    }
    const double loss_i = max_logit + std::log(z) - pos[i].value * inv_t;
    if (!std::isfinite(loss_i))
      throw Error("contrastive loss: non-finite value at batch index " + std::to_string(i));
    total += loss_i;

    if (!with_gradient) continue;
    // d loss_i / d sim = (softmax weight - indicator) / t, averaged over i.
    for (std::size_t j = 0; j < n; ++j) {
      const double g = (w_pos[j] / z - (j == i ? 1.0 : 0.0)) * inv_t * inv_n;
      add_cos_grad(anchors[i], positives[j], pos[j], g, out.d_anchor[i], out.d_positive[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (own && j != i) continue;
      const double g = w_neg[j] / z * inv_t * inv_n;
      add_cos_grad(anchors[i], negatives[j], neg[j], g, out.d_anchor[i], out.d_negative[j]);
    }
  }
  out.loss = total * inv_n;
  return out;
}

struct ModelGradient {
  Matrix embedding;
  Matrix projection;
};

struct LossAndGradient {
  double loss = 0;
  ModelGradient gradient;
};

namespace contrastive_detail {

struct ForwardText {
  std::vector<std::size_t> ids;
  std::vector<double> pooled;
  Embedding h;
};

inline ForwardText forward(const EncoderModel& model, const std::string& text) {
  ForwardText f;
  f.ids = token_ids(model, text);
  f.pooled = mean_pool(model, f.ids);
  f.h = project(model.projection, f.pooled);
  return f;
}

// Pushes dL/dh back through h = P u, u = mean of embedding rows.
inline void backward(const EncoderModel& model, const ForwardText& f, const Embedding& dh,
                     ModelGradient& grad) {
  const std::size_t d = model.dim();
  std::vector<double> du(d, 0.0);
  for (std::size_t r = 0; r < model.out_dim(); ++r) {
    const auto p_row = model.projection.row(r);
    auto g_row = grad.projection.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      g_row[c] += dh[r] * f.pooled[c];
      du[c] += p_row[c] * dh[r];
    }
  }
  const double inv_len = 1.0 / static_cast<double>(f.ids.size());
  for (std::size_t id : f.ids) {
    auto g_row = grad.embedding.row(id);
    for (std::size_t c = 0; c < d; ++c) g_row[c] += du[c] * inv_len;
  }
}

}  // namespace contrastive_detail

// Output normalization does not change cosines, so the loss is computed on
// the unnormalized projections.
inline double loss_ibn(const EncoderModel& model, const TrainBatch& batch,
                       const LossOptions& opts = {}) {
  batch.validate();
  std::vector<Embedding> a, p, n;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    a.push_back(contrastive_detail::forward(model, batch.anchors[i]).h);
    p.push_back(contrastive_detail::forward(model, batch.positives[i]).h);
    n.push_back(contrastive_detail::forward(model, batch.hard_negatives[i]).h);
  }
  return contrastive_loss(a, p, n, opts).loss;
}

inline LossAndGradient gradients(const EncoderModel& model, const TrainBatch& batch,
                                 const LossOptions& opts = {}) {
  using contrastive_detail::ForwardText;
  batch.validate();
  std::vector<ForwardText> fa, fp, fn;
  std::vector<Embedding> a, p, n;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    fa.push_back(contrastive_detail::forward(model, batch.anchors[i]));
    fp.push_back(contrastive_detail::forward(model, batch.positives[i]));
    fn.push_back(contrastive_detail::forward(model, batch.hard_negatives[i]));
    a.push_back(fa.back().h);
    p.push_back(fp.back().h);
    n.push_back(fn.back().h);
  }
  const auto el = contrastive_loss(a, p, n, opts, /*with_gradient=*/true);
  LossAndGradient out;
  out.loss = el.loss;
  out.gradient.embedding = Matrix(model.embedding.rows(), model.embedding.cols());
  out.gradient.projection = Matrix(model.projection.rows(), model.projection.cols());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    contrastive_detail::backward(model, fa[i], el.d_anchor[i], out.gradient);
    contrastive_detail::backward(model, fp[i], el.d_positive[i], out.gradient);
    contrastive_detail::backward(model, fn[i], el.d_negative[i], out.gradient);
  }
  return out;
}

}  // namespace vqaeval

#endif  // VQAEVAL_CONTRASTIVE_HPP_
