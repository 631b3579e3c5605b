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

// Central-difference check of the contrastive-loss gradient.

#ifndef VQAEVAL_GRADCHECK_HPP_
#define VQAEVAL_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "vqaeval/contrastive.hpp"
#include "vqaeval/random.hpp"

namespace vqaeval {

struct GradCheckOptions {
  std::size_t coordinates = 100;
  double step = 1e-5;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error, for coordinates whose gradient
  // is essentially zero.
  double abs_floor = 1e-8;
};

struct GradCheckEntry {
  bool projection;  // false: embedding table
  std::size_t row, col;
  double analytic, numeric, rel_error;
};

struct GradCheckResult {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0;
};

inline double relative_error(double a, double b, double floor) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

// Compares `gradients` with (L(p + h) - L(p - h)) / 2h on randomly drawn
// parameters. Embedding rows are drawn only among tokens the batch uses.
inline GradCheckResult gradient_check(EncoderModel model, const TrainBatch& batch,
                                      const LossOptions& loss_opts,
                                      const GradCheckOptions& opts = {}) {
  const auto analytic = gradients(model, batch, loss_opts).gradient;
  std::vector<std::size_t> used_rows;
  for (const auto* texts : {&batch.anchors, &batch.positives, &batch.hard_negatives})
    for (const auto& t : *texts)
      for (std::size_t id : token_ids(model, t)) used_rows.push_back(id);
  std::sort(used_rows.begin(), used_rows.end());
  used_rows.erase(std::unique(used_rows.begin(), used_rows.end()), used_rows.end());

  Rng rng(opts.seed);
  GradCheckResult out;
  for (std::size_t k = 0; k < opts.coordinates; ++k) {
    GradCheckEntry e{};
    e.projection = rng.index(2) == 1;
    Matrix& target = e.projection ? model.projection : model.embedding;
    e.row = e.projection ? rng.index(target.rows()) : used_rows[rng.index(used_rows.size())];
    e.col = rng.index(target.cols());
    double& x = target(e.row, e.col);
    const double saved = x;
    x = saved + opts.step;
    const double plus = loss_ibn(model, batch, loss_opts);
    x = saved - opts.step;
    const double minus = loss_ibn(model, batch, loss_opts);
    x = saved;
    e.numeric = (plus - minus) / (2 * opts.step);
    e.analytic = e.projection ? analytic.projection(e.row, e.col) : analytic.embedding(e.row, e.col);
    e.rel_error = relative_error(e.analytic, e.numeric, opts.abs_floor);
    out.max_rel_error = std::max(out.max_rel_error, e.rel_error);
    out.entries.push_back(e);
  }
  return out;
}

}  // namespace vqaeval

#endif  // VQAEVAL_GRADCHECK_HPP_
