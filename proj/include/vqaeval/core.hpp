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

// Shared data model: evaluation samples, prediction sets and assessment
// reports, with their JSON-lines encodings.

#ifndef VQAEVAL_CORE_HPP_
#define VQAEVAL_CORE_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vqaeval/error.hpp"
#include "vqaeval/random.hpp"

namespace vqaeval {

using json = nlohmann::json;

enum class Part { P1, P2, P3 };

inline constexpr Part kAllParts[] = {Part::P1, Part::P2, Part::P3};

inline std::string_view to_string(Part p) {
  switch (p) {
    case Part::P1: return "P1";
    case Part::P2: return "P2";
    case Part::P3: return "P3";
  }
  return "P1";
}

inline std::optional<Part> parse_part(std::string_view s) {
  if (s == "P1") return Part::P1;
  if (s == "P2") return Part::P2;
  if (s == "P3") return Part::P3;
  return std::nullopt;
}

// Source VQA collection of a sample. The four named collections get their own
// kind; anything else is carried by name.
class SourceDataset {
 public:
  enum class Kind { kOkvqa, kAokvqa, kVqav2, kGqa, kOther };

  SourceDataset() = default;

  static SourceDataset parse(std::string_view name) {
    SourceDataset d;
    d.name_ = std::string(name);
    if (name == "okvqa") d.kind_ = Kind::kOkvqa;
    else if (name == "aokvqa") d.kind_ = Kind::kAokvqa;
    else if (name == "vqav2") d.kind_ = Kind::kVqav2;
    else if (name == "gqa") d.kind_ = Kind::kGqa;
    else d.kind_ = Kind::kOther;
    return d;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  friend bool operator==(const SourceDataset& a, const SourceDataset& b) {
    return a.name_ == b.name_;
  }
  friend auto operator<=>(const SourceDataset& a, const SourceDataset& b) {
    return a.name_ <=> b.name_;
  }

 private:
  Kind kind_ = Kind::kOther;
  std::string name_;
};

inline constexpr double kMaxScore = 10.0;

struct Sample {
  std::string id;
  std::string question;
  std::string answer;
  std::string response;
  SourceDataset source_dataset;
  Part part = Part::P1;
  std::optional<double> human_score;
  std::string group_id;
  std::optional<std::vector<std::string>> candidates;
  // annotator id -> integer score in 0..10
  std::optional<std::map<std::string, int>> raw_annotations;

  friend bool operator==(const Sample&, const Sample&) = default;
};

inline json to_json(const Sample& s) {
  json j = json::object();
  j["id"] = s.id;
  j["question"] = s.question;
  j["answer"] = s.answer;
  j["response"] = s.response;
  j["source_dataset"] = s.source_dataset.name();
  j["part"] = std::string(to_string(s.part));
  j["group_id"] = s.group_id;
  if (s.human_score) j["human_score"] = *s.human_score;
  if (s.candidates) j["candidates"] = *s.candidates;
  if (s.raw_annotations) {
    json a = json::object();
    for (const auto& [who, v] : *s.raw_annotations) a[who] = v;
    j["raw_annotations"] = std::move(a);
  }
  return j;
}

// Parses one record. Problems are appended to `problems` (one entry per
// field) and std::nullopt is returned when any were found.
inline std::optional<Sample> sample_from_json(const json& j,
                                              std::vector<std::string>& problems) {
  const std::size_t before = problems.size();
  if (!j.is_object()) {
    problems.push_back("record is not a JSON object");
    return std::nullopt;
  }
  Sample s;
  auto text_field = [&](const char* key, std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      problems.push_back(std::string("missing required field '") + key + "'");
    } else if (!it->is_string()) {
      problems.push_back(std::string("field '") + key + "' must be a string");
    } else {
      out = it->get<std::string>();
    }
  };
  std::string dataset, part;
  text_field("id", s.id);
  text_field("question", s.question);
  text_field("answer", s.answer);
  text_field("response", s.response);
  text_field("source_dataset", dataset);
  text_field("part", part);
  text_field("group_id", s.group_id);
  s.source_dataset = SourceDataset::parse(dataset);
  if (!part.empty()) {
    if (auto p = parse_part(part)) {
      s.part = *p;
    } else {
      problems.push_back("field 'part' must be one of P1, P2, P3 (got '" + part + "')");
    }
  }

  if (auto it = j.find("human_score"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) {
      problems.push_back("field 'human_score' must be a number");
    } else {
      const double v = it->get<double>();
      if (!(v >= 0.0 && v <= kMaxScore)) {
        std::ostringstream msg;
        msg << "field 'human_score' = " << v << " outside [0,10]";
        problems.push_back(msg.str());
      } else {
        s.human_score = v;
      }
    }
  }

  if (auto it = j.find("candidates"); it != j.end() && !it->is_null()) {
    if (!it->is_array() || it->size() > 10 ||
        !std::all_of(it->begin(), it->end(), [](const json& c) { return c.is_string(); })) {
      problems.push_back("field 'candidates' must be a list of at most 10 strings");
    } else {
      s.candidates = it->get<std::vector<std::string>>();
    }
  }

  if (auto it = j.find("raw_annotations"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) {
      problems.push_back("field 'raw_annotations' must be an object keyed by annotator id");
    } else {
      std::map<std::string, int> raw;
      bool ok = true;
      for (const auto& [who, v] : it->items()) {
        if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 10) {
          problems.push_back("field 'raw_annotations' entry '" + who +
                             "' must be an integer in 0..10");
          ok = false;
        } else {
          raw[who] = static_cast<int>(v.get<long long>());
        }
      }
      if (ok) s.raw_annotations = std::move(raw);
    }
  }

  if (s.human_score && s.raw_annotations && !s.raw_annotations->empty()) {
    double sum = 0;
    for (const auto& [who, v] : *s.raw_annotations) sum += v;
    const double mean = sum / static_cast<double>(s.raw_annotations->size());
    if (std::abs(mean - *s.human_score) > 1e-9) {
      std::ostringstream msg;
      msg << "field 'human_score' = " << *s.human_score
          << " differs from the mean of raw_annotations (" << mean << ")";
      problems.push_back(msg.str());
    }
  }

  if (problems.size() != before) return std::nullopt;
  return s;
}

// Raised when a sample file fails validation; lists every offending line.
class LoadError : public Error {
 public:
  explicit LoadError(std::vector<std::string> problems)
      : Error(join(problems)), problems_(std::move(problems)) {}
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  static std::string join(const std::vector<std::string>& p) {
    std::string out = "invalid sample file:";
    for (const auto& s : p) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> problems_;
};

inline std::vector<Sample> read_samples(std::istream& in) {
  std::vector<Sample> samples;
  std::vector<std::string> problems;
  std::unordered_map<std::string, std::size_t> id_line;
  struct GroupKey {
    std::string question, answer, dataset;
    std::size_t line;
  };
  std::unordered_map<std::string, GroupKey> groups;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      problems.push_back(where + "malformed JSON");
      continue;
    }
    std::vector<std::string> record_problems;
    auto s = sample_from_json(j, record_problems);
    for (const auto& p : record_problems) problems.push_back(where + p);
    if (!s) continue;

    if (auto [it, inserted] = id_line.emplace(s->id, line_no); !inserted) {
      problems.push_back(where + "duplicate id '" + s->id + "' (first seen on line " +
                         std::to_string(it->second) + ")");
      continue;
    }
    auto [g, fresh] = groups.emplace(
        s->group_id, GroupKey{s->question, s->answer, s->source_dataset.name(), line_no});
    if (!fresh && (g->second.question != s->question || g->second.answer != s->answer ||
                   g->second.dataset != s->source_dataset.name())) {
      problems.push_back(where + "group '" + s->group_id +
                         "' disagrees with line " + std::to_string(g->second.line) +
                         " on question, answer or source_dataset");
      continue;
    }
    samples.push_back(std::move(*s));
  }
  if (!problems.empty()) throw LoadError(std::move(problems));
  return samples;
}

inline std::vector<Sample> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sample file: " + path);
  return read_samples(in);
}

// One canonical record per line: keys in alphabetical order, compact form.
inline void write_samples(std::ostream& out, const std::vector<Sample>& samples) {
  for (const auto& s : samples) out << to_json(s).dump() << '\n';
}

inline void save_samples(const std::string& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write sample file: " + path);
  write_samples(out, samples);
  if (!out) throw Error("write failed: " + path);
}

struct SplitRatio {
  int validation = 3;
  int test = 7;
};

inline SplitRatio parse_ratio(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw Error("ratio must look like 3:7");
  try {
    SplitRatio r{std::stoi(std::string(s.substr(0, colon))),
                 std::stoi(std::string(s.substr(colon + 1)))};
    return r;
  } catch (const std::exception&) {
    throw Error("ratio must look like 3:7");
  }
}

struct Split {
  std::vector<Sample> validation;
  std::vector<Sample> test;
  std::vector<std::string> warnings;
};

// Partitions by group_id; a group never straddles the two sides. The
// number of validation groups is round(G * v / (v + t)); with a single group
// everything goes to test.
inline Split split_validation_test(const std::vector<Sample>& samples, SplitRatio ratio,
                                   std::uint64_t seed) {
  if (samples.empty()) throw Error("split: empty input");
  if (ratio.validation <= 0 || ratio.test <= 0)
    throw Error("split: ratio components must be positive");

  std::vector<std::string> groups;
  std::unordered_set<std::string> seen;
  for (const auto& s : samples)
    if (seen.insert(s.group_id).second) groups.push_back(s.group_id);

  Split out;
  std::unordered_set<std::string> validation_groups;
  if (groups.size() == 1) {
    out.warnings.push_back("split: only one group present; all samples assigned to test");
  } else {
    Rng rng(seed);
    rng.shuffle(groups);
    const double share = static_cast<double>(ratio.validation) /
                         static_cast<double>(ratio.validation + ratio.test);
    const auto n_val = static_cast<std::size_t>(
        std::floor(static_cast<double>(groups.size()) * share + 0.5));
    validation_groups.insert(groups.begin(), groups.begin() + static_cast<long>(n_val));
  }
  for (const auto& s : samples)
    (validation_groups.count(s.group_id) ? out.validation : out.test).push_back(s);
  return out;
}

// ---------------------------------------------------------------------------
// Predictions

struct PredictionEntry {
  std::string sample_id;
  double predicted = 0;
  double human = 0;
  Part part = Part::P1;
  std::string source_dataset;
  std::string group_id;

  friend bool operator==(const PredictionEntry&, const PredictionEntry&) = default;
};

// An evaluator's scores aligned with the human scores.
class PredictionSet {
 public:
  PredictionSet() = default;
  explicit PredictionSet(std::vector<PredictionEntry> entries) {
    for (auto& e : entries) add(std::move(e));
  }

  void add(PredictionEntry e) {
    if (!ids_.insert(e.sample_id).second)
      throw Error("prediction set: duplicate sample id '" + e.sample_id + "'");
    entries_.push_back(std::move(e));
  }

  const std::vector<PredictionEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  template <typename Pred>
  PredictionSet filter(Pred keep) const {
    PredictionSet out;
    for (const auto& e : entries_)
      if (keep(e)) out.add(e);
    return out;
  }

  friend bool operator==(const PredictionSet& a, const PredictionSet& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<PredictionEntry> entries_;
  std::unordered_set<std::string> ids_;
};

inline json to_json(const PredictionEntry& e) {
  return json{{"sample_id", e.sample_id}, {"predicted", e.predicted},
              {"human", e.human},         {"part", std::string(to_string(e.part))},
              {"source_dataset", e.source_dataset}, {"group_id", e.group_id}};
}

inline void write_predictions(std::ostream& out, const PredictionSet& preds) {
  for (const auto& e : preds.entries()) out << to_json(e).dump() << '\n';
}

inline PredictionSet read_predictions(std::istream& in) {
  PredictionSet preds;
  std::vector<std::string> problems;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      problems.push_back(where + "malformed JSON record");
      continue;
    }
    try {
      PredictionEntry e;
      e.sample_id = j.at("sample_id").get<std::string>();
      e.predicted = j.at("predicted").get<double>();
      e.human = j.at("human").get<double>();
      auto part = parse_part(j.at("part").get<std::string>());
      if (!part) throw Error("bad part");
      e.part = *part;
      e.source_dataset = j.at("source_dataset").get<std::string>();
      e.group_id = j.at("group_id").get<std::string>();
      if (!(e.human >= 0 && e.human <= kMaxScore)) throw Error("human outside [0,10]");
      preds.add(std::move(e));
    } catch (const std::exception& ex) {
      problems.push_back(where + ex.what());
    }
  }
  if (!problems.empty()) throw LoadError(std::move(problems));
  return preds;
}

inline PredictionSet load_predictions(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open prediction file: " + path);
  return read_predictions(in);
}

// ---------------------------------------------------------------------------
// Assessment report

struct AssessmentReport {
  std::map<Part, double> alignment_per_part;
  std::optional<double> alignment_avg;
  std::optional<double> consistency;
  std::optional<double> generalization;
  std::map<std::string, double> alignment_per_dataset;
  int n_parts = 0;
  // Number of complete three-part groups averaged for consistency.
  int n_samples = 0;
  // Names of fields that could not be computed, with the reason.
  std::map<std::string, std::string> missing;
  std::vector<std::string> warnings;
  // How the numbers were produced (variance convention, floor, ROUGE mode...).
  json metadata = json::object();
};

inline json to_json(const AssessmentReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  auto opt100 = [](const std::optional<double>& v) {
    return v ? json(*v * 100.0) : json(nullptr);
  };
  json per_part = json::object(), per_part100 = json::object();
  for (const auto& [p, v] : r.alignment_per_part) {
    per_part[std::string(to_string(p))] = v;
    per_part100[std::string(to_string(p))] = v * 100.0;
  }
  json per_ds = json::object(), per_ds100 = json::object();
  for (const auto& [d, v] : r.alignment_per_dataset) {
    per_ds[d] = v;
    per_ds100[d] = v * 100.0;
  }
  json missing = json::object();
  for (const auto& [k, why] : r.missing) missing[k] = why;
  return json{
      {"alignment_per_part", per_part},
      {"alignment_avg", opt(r.alignment_avg)},
      {"consistency", opt(r.consistency)},
      {"generalization", opt(r.generalization)},
      {"alignment_per_dataset", per_ds},
      {"n_parts", r.n_parts},
      {"n_samples", r.n_samples},
      {"x100",
       {{"alignment_per_part", per_part100},
        {"alignment_avg", opt100(r.alignment_avg)},
        {"alignment_per_dataset", per_ds100}}},
      {"missing", missing},
      {"warnings", r.warnings},
      {"metadata", r.metadata},
  };
}

}  // namespace vqaeval

#endif  // VQAEVAL_CORE_HPP_
