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

// Evaluator-quality properties (alignment, consistency, generalization) and
// the classical exact-match / VQA-score metrics.

#ifndef VQAEVAL_PROPERTIES_HPP_
#define VQAEVAL_PROPERTIES_HPP_

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "vqaeval/core.hpp"
#include "vqaeval/lexicon.hpp"
#include "vqaeval/stats.hpp"

namespace vqaeval {

struct PropertyConfig {
  // Mean variances below this are clamped, so a perfect evaluator scores
  // ln(1 / floor) instead of infinity.
  double variance_floor = 1e-12;
  VarianceConvention variance = VarianceConvention::kPopulation;
};

struct AlignmentResult {
  std::map<Part, double> per_part;
  double avg = 0;
};

// Spearman between predicted and human scores in each part, then the
// unweighted mean over the parts present.
inline AlignmentResult alignment(const PredictionSet& preds) {
  std::map<Part, std::pair<std::vector<double>, std::vector<double>>> by_part;
  for (const auto& e : preds.entries()) {
    by_part[e.part].first.push_back(e.predicted);
    by_part[e.part].second.push_back(e.human);
  }
  if (by_part.empty()) throw Error("alignment: empty prediction set");
  AlignmentResult out;
  double sum = 0;
  for (const auto& [part, xy] : by_part) {
    try {
      out.per_part[part] = spearman(xy.first, xy.second);
    } catch (const Error& e) {
      throw UndefinedStatistic("alignment: part " + std::string(to_string(part)) + ": " +
                               e.what());
    }
    sum += out.per_part[part];
  }
  out.avg = sum / static_cast<double>(out.per_part.size());
  return out;
}

// ln(1 / max(v, floor)).
inline double log_inverse(double v, double floor) { return -std::log(std::max(v, floor)); }

struct ConsistencyResult {
  double value = 0;
  double mean_variance = 0;
  bool clamped = false;
  int complete_groups = 0;
  int skipped_groups = 0;
};

// Mean over complete groups of the variance of a group's three part scores,
// reported as ln(1 / mean). Groups lacking a part are skipped and counted.
inline ConsistencyResult consistency(const PredictionSet& preds, const PropertyConfig& cfg = {}) {
  std::map<std::string, std::map<Part, double>> groups;
  for (const auto& e : preds.entries()) {
    auto [it, inserted] = groups[e.group_id].emplace(e.part, e.predicted);
    if (!inserted)
      throw Error("consistency: group '" + e.group_id + "' has more than one " +
                  std::string(to_string(e.part)) + " entry");
  }
  ConsistencyResult out;
  double sum = 0;
  for (const auto& [gid, parts] : groups) {
    if (parts.size() != 3) {
      ++out.skipped_groups;
      continue;
    }
    const double scores[] = {parts.at(Part::P1), parts.at(Part::P2), parts.at(Part::P3)};
    sum += variance(scores, cfg.variance);
    ++out.complete_groups;
  }
  if (out.complete_groups == 0) throw Error("consistency: no group covers all three parts");
  out.mean_variance = sum / out.complete_groups;
  out.clamped = out.mean_variance < cfg.variance_floor;
  out.value = log_inverse(out.mean_variance, cfg.variance_floor);
  return out;
}

struct GeneralizationResult {
  std::map<std::string, double> per_dataset;
  double variance = 0;
  double value = 0;
  bool clamped = false;
};

// Variance of the per-dataset alignments reported as ln(1 / variance).
inline GeneralizationResult generalization_from_alignments(
    const std::map<std::string, double>& per_dataset, const PropertyConfig& cfg = {}) {
  if (per_dataset.size() < 2)
    throw Error("generalization: need at least 2 source datasets (got " +
                std::to_string(per_dataset.size()) + ")");
  std::vector<double> values;
  for (const auto& [name, v] : per_dataset) values.push_back(v);
  GeneralizationResult out;
  out.per_dataset = per_dataset;
  out.variance = variance(values, cfg.variance);
  out.clamped = out.variance < cfg.variance_floor;
  out.value = log_inverse(out.variance, cfg.variance_floor);
  return out;
}

inline GeneralizationResult generalization(const PredictionSet& preds,
                                           const PropertyConfig& cfg = {}) {
  std::set<std::string> datasets;
  for (const auto& e : preds.entries()) datasets.insert(e.source_dataset);
  if (datasets.size() < 2)
    throw Error("generalization: need at least 2 source datasets (got " +
                std::to_string(datasets.size()) + ")");
  std::map<std::string, double> per_dataset;
  for (const auto& d : datasets) {
    const auto subset = preds.filter([&](const PredictionEntry& e) { return e.source_dataset == d; });
    try {
      per_dataset[d] = alignment(subset).avg;
    } catch (const Error& e) {
      throw UndefinedStatistic("generalization: dataset '" + d + "': " + e.what());
    }
  }
  return generalization_from_alignments(per_dataset, cfg);
}

// Lowercased, trimmed, whitespace-collapsed.
inline std::string normalize_answer(std::string_view s) {
  return collapse_whitespace(ascii_lower(s));
}

inline int exact_match(std::string_view response, std::string_view answer) {
  return normalize_answer(response) == normalize_answer(answer) ? 1 : 0;
}

// min(hits / 3, 1) where hits counts candidates equal to the response after
// normalization.
inline double vqa_score(std::string_view response, const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw Error("vqa_score: empty candidate list");
  const auto r = normalize_answer(response);
  int hits = 0;
  for (const auto& c : candidates)
    if (normalize_answer(c) == r) ++hits;
  return std::min(hits / 3.0, 1.0);
}

// Runs every property that the data supports. Properties whose
// preconditions fail are listed in `missing` with the reason.
inline AssessmentReport assess(const PredictionSet& preds, const PropertyConfig& cfg = {}) {
  AssessmentReport r;
  r.metadata = json{{"variance_convention", std::string(to_string(cfg.variance))},
                    {"variance_floor", cfg.variance_floor},
                    {"clamp_value", log_inverse(0.0, cfg.variance_floor)},
                    {"log_base", "e"},
                    {"n_entries", preds.size()}};
  std::set<Part> parts;
  for (const auto& e : preds.entries()) parts.insert(e.part);
  r.n_parts = static_cast<int>(parts.size());

  try {
    auto a = alignment(preds);
    r.alignment_per_part = a.per_part;
    r.alignment_avg = a.avg;
  } catch (const Error& e) {
    r.missing["alignment"] = e.what();
  }

  if (parts.size() < 3) {
    r.missing["consistency"] = "needs all three parts (found " + std::to_string(parts.size()) + ")";
  } else {
    try {
      auto c = consistency(preds, cfg);
      r.consistency = c.value;
      r.n_samples = c.complete_groups;
      if (c.skipped_groups > 0)
        r.warnings.push_back("consistency: skipped " + std::to_string(c.skipped_groups) +
                             " group(s) missing a part");
      if (c.clamped) r.warnings.push_back("consistency: mean variance clamped to the floor");
    } catch (const Error& e) {
      r.missing["consistency"] = e.what();
    }
  }

  try {
    auto g = generalization(preds, cfg);
    r.generalization = g.value;
    r.alignment_per_dataset = g.per_dataset;
    if (g.clamped) r.warnings.push_back("generalization: variance clamped to the floor");
  } catch (const Error& e) {
    r.missing["generalization"] = e.what();
  }
  return r;
}

}  // namespace vqaeval

#endif  // VQAEVAL_PROPERTIES_HPP_
