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

// String-overlap baselines: BLEU, ROUGE-N, ROUGE-L and METEOR over a shared
// tokenizer.

#ifndef VQAEVAL_TEXTMETRICS_HPP_
#define VQAEVAL_TEXTMETRICS_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vqaeval/error.hpp"
#include "vqaeval/lexicon.hpp"
#include "vqaeval/porter.hpp"

namespace vqaeval {

using TokenSequence = std::vector<std::string>;

// Lowercases ASCII and splits into maximal runs of letters and digits.
// Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
// Punctuation and whitespace separate tokens and are dropped.
inline TokenSequence tokenize(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

// A metric value plus a flag set when either side was empty.
struct MetricScore {
  double value = 0.0;
  bool empty_input = false;

  operator double() const { return value; }  // NOLINT(google-explicit-constructor)
};

enum class RougeMode { kRecall, kPrecision, kF1 };

inline std::string_view to_string(RougeMode m) {
  switch (m) {
    case RougeMode::kRecall: return "recall";
    case RougeMode::kPrecision: return "precision";
    case RougeMode::kF1: return "f1";
  }
  return "f1";
}

struct MeteorParams {
  double alpha = 0.9;  // F_mean = P R / (alpha P + (1 - alpha) R)
  double gamma = 0.5;  // fragmentation penalty weight
  double beta = 3.0;   // fragmentation penalty exponent
};

struct BleuOptions {
  // Added to zero n-gram match counts; 0 disables smoothing.
  double epsilon = 0.0;
};

namespace metrics_detail {

using NgramCounts = std::map<std::vector<std::string>, int>;

inline NgramCounts ngrams(const TokenSequence& t, std::size_t n) {
  NgramCounts counts;
  if (n == 0 || t.size() < n) return counts;
  for (std::size_t i = 0; i + n <= t.size(); ++i)
    ++counts[std::vector<std::string>(t.begin() + static_cast<long>(i),
                                      t.begin() + static_cast<long>(i + n))];
  return counts;
}

// Sum over candidate n-grams of min(count in candidate, count in reference).
inline int clipped_overlap(const NgramCounts& cand, const NgramCounts& ref) {
  int overlap = 0;
  for (const auto& [g, c] : cand) {
    auto it = ref.find(g);
    if (it != ref.end()) overlap += std::min(c, it->second);
  }
  return overlap;
}

inline double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

inline double pick(RougeMode mode, double precision, double recall) {
  switch (mode) {
    case RougeMode::kRecall: return recall;
    case RougeMode::kPrecision: return precision;
    case RougeMode::kF1: return harmonic(precision, recall);
  }
  return 0.0;
}

}  // namespace metrics_detail

// Sentence BLEU against a single reference: geometric mean of clipped n-gram
// precisions for n = 1..max_n times the brevity penalty.
inline MetricScore bleu(const TokenSequence& cand, const TokenSequence& ref, int max_n,
                        BleuOptions opts = {}) {
  if (max_n < 1 || max_n > 8) throw Error("bleu: max_n must be in 1..8");
  if (cand.empty() || ref.empty()) return {0.0, true};
  double log_sum = 0.0;
  for (int n = 1; n <= max_n; ++n) {
    const auto c = metrics_detail::ngrams(cand, static_cast<std::size_t>(n));
    const auto r = metrics_detail::ngrams(ref, static_cast<std::size_t>(n));
    const double total = cand.size() >= static_cast<std::size_t>(n)
                             ? static_cast<double>(cand.size() - static_cast<std::size_t>(n) + 1)
                             : 0.0;
    double matched = metrics_detail::clipped_overlap(c, r);
    if (matched == 0.0) matched = opts.epsilon;
    if (matched == 0.0 || total == 0.0) return {0.0, false};
    log_sum += std::log(matched / total);
  }
  const double c_len = static_cast<double>(cand.size());
  const double r_len = static_cast<double>(ref.size());
  const double bp = c_len < r_len ? std::exp(1.0 - r_len / c_len) : 1.0;
  return {bp * std::exp(log_sum / max_n), false};
}

inline MetricScore rouge_n(const TokenSequence& cand, const TokenSequence& ref, int n,
                           RougeMode mode = RougeMode::kF1) {
  if (n < 1 || n > 8) throw Error("rouge_n: n must be in 1..8");
  if (cand.empty() || ref.empty()) return {0.0, true};
  const auto c = metrics_detail::ngrams(cand, static_cast<std::size_t>(n));
  const auto r = metrics_detail::ngrams(ref, static_cast<std::size_t>(n));
  if (r.empty()) return {0.0, false};
  const double overlap = metrics_detail::clipped_overlap(c, r);
  const double ref_total = static_cast<double>(ref.size() - static_cast<std::size_t>(n) + 1);
  const double cand_total =
      cand.size() >= static_cast<std::size_t>(n)
          ? static_cast<double>(cand.size() - static_cast<std::size_t>(n) + 1)
          : 0.0;
  const double recall = overlap / ref_total;
  const double precision = cand_total > 0 ? overlap / cand_total : 0.0;
  return {metrics_detail::pick(mode, precision, recall), false};
}

inline std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline MetricScore rouge_l(const TokenSequence& cand, const TokenSequence& ref,
                           RougeMode mode = RougeMode::kF1) {
  if (cand.empty() || ref.empty()) return {0.0, true};
  const double l = static_cast<double>(lcs_length(cand, ref));
  return {metrics_detail::pick(mode, l / static_cast<double>(cand.size()),
                               l / static_cast<double>(ref.size())),
          false};
}

// Unigram alignment used by METEOR: pairs of (candidate index, reference index).
struct MeteorAlignment {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // sorted by candidate index
  std::size_t chunks = 0;
};

// Three matching stages in order: exact surface form, Porter stem, synonym.
// Within a stage each unmatched candidate token, left to right, takes the
// reference position right after the previous match when that position is
// eligible, and otherwise the leftmost eligible unmatched reference token.
inline MeteorAlignment meteor_align(const TokenSequence& cand, const TokenSequence& ref,
                                    const SynonymLookup& synonyms) {
  std::vector<int> cand_to_ref(cand.size(), -1);
  std::vector<bool> ref_used(ref.size(), false);
  std::vector<std::string> cand_stem, ref_stem;
  for (const auto& t : cand) cand_stem.push_back(porter_stem(t));
  for (const auto& t : ref) ref_stem.push_back(porter_stem(t));

  auto run_stage = [&](auto&& eligible) {
    int last_ref = -1;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cand_to_ref[i] >= 0) {
        last_ref = cand_to_ref[i];
        continue;
      }
      int chosen = -1;
      const auto next = static_cast<std::size_t>(last_ref + 1);
      if (last_ref >= 0 && next < ref.size() && !ref_used[next] && eligible(i, next)) {
        chosen = static_cast<int>(next);
      } else {
        for (std::size_t j = 0; j < ref.size(); ++j) {
          if (!ref_used[j] && eligible(i, j)) {
            chosen = static_cast<int>(j);
            break;
          }
        }
      }
      if (chosen >= 0) {
        cand_to_ref[i] = chosen;
        ref_used[static_cast<std::size_t>(chosen)] = true;
        last_ref = chosen;
      }
    }
  };
  run_stage([&](std::size_t i, std::size_t j) { return cand[i] == ref[j]; });
  run_stage([&](std::size_t i, std::size_t j) { return cand_stem[i] == ref_stem[j]; });
  run_stage([&](std::size_t i, std::size_t j) { return synonyms.are_synonyms(cand[i], ref[j]); });

  MeteorAlignment a;
  for (std::size_t i = 0; i < cand.size(); ++i)
    if (cand_to_ref[i] >= 0) a.matches.emplace_back(i, static_cast<std::size_t>(cand_to_ref[i]));
  for (std::size_t k = 0; k < a.matches.size(); ++k) {
    const bool continues = k > 0 && a.matches[k].first == a.matches[k - 1].first + 1 &&
                           a.matches[k].second == a.matches[k - 1].second + 1;
    if (!continues) ++a.chunks;
  }
  return a;
}

inline MetricScore meteor(const TokenSequence& cand, const TokenSequence& ref,
                          const SynonymLookup& synonyms, MeteorParams params = {}) {
  if (cand.empty() || ref.empty()) return {0.0, true};
  const auto a = meteor_align(cand, ref, synonyms);
  if (a.matches.empty()) return {0.0, false};
  const double m = static_cast<double>(a.matches.size());
  const double p = m / static_cast<double>(cand.size());
  const double r = m / static_cast<double>(ref.size());
  const double f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return {f_mean * (1.0 - penalty), false};
}

enum class Metric { kBleu2, kBleu4, kRouge2, kRougeL, kMeteor };

inline Metric parse_metric(std::string_view name) {
  if (name == "bleu2") return Metric::kBleu2;
  if (name == "bleu4") return Metric::kBleu4;
  if (name == "rouge2") return Metric::kRouge2;
  if (name == "rougeL") return Metric::kRougeL;
  if (name == "meteor") return Metric::kMeteor;
  throw Error("unknown metric '" + std::string(name) +
              "' (expected bleu2, bleu4, rouge2, rougeL or meteor)");
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kBleu2: return "bleu2";
    case Metric::kBleu4: return "bleu4";
    case Metric::kRouge2: return "rouge2";
    case Metric::kRougeL: return "rougeL";
    case Metric::kMeteor: return "meteor";
  }
  return "bleu2";
}

struct MetricConfig {
  RougeMode rouge_mode = RougeMode::kF1;
  MeteorParams meteor;
  BleuOptions bleu;
  bool concat_question = true;
};

// Scores response `r` against answer `a` for question `q`. With
// concat_question both sides are wrapped as "Question: q Answer: x" first.
inline MetricScore formulaic_score(std::string_view q, std::string_view a, std::string_view r,
                                   Metric metric, const MetricConfig& config = {},
                                   const SynonymLookup& synonyms = {}) {
  auto wrap = [&](std::string_view x) {
    return config.concat_question
               ? "Question: " + std::string(q) + " Answer: " + std::string(x)
               : std::string(x);
  };
  const auto cand = tokenize(wrap(r));
  const auto ref = tokenize(wrap(a));
  switch (metric) {
    case Metric::kBleu2: return bleu(cand, ref, 2, config.bleu);
    case Metric::kBleu4: return bleu(cand, ref, 4, config.bleu);
    case Metric::kRouge2: return rouge_n(cand, ref, 2, config.rouge_mode);
    case Metric::kRougeL: return rouge_l(cand, ref, config.rouge_mode);
    case Metric::kMeteor: return meteor(cand, ref, synonyms, config.meteor);
  }
  return {};
}

}  // namespace vqaeval

#endif  // VQAEVAL_TEXTMETRICS_HPP_
