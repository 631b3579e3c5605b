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

#ifndef VQAEVAL_PAIRS_HPP_
#define VQAEVAL_PAIRS_HPP_

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vqaeval/error.hpp"

namespace vqaeval {

enum class TaskTag { kNli, kCandidates, kSynonymAntonym, kDescription };

inline std::string_view to_string(TaskTag t) {
  switch (t) {
    case TaskTag::kNli: return "nli";
    case TaskTag::kCandidates: return "candidates";
    case TaskTag::kSynonymAntonym: return "synonym_antonym";
    case TaskTag::kDescription: return "description";
  }
  return "nli";
}

inline std::optional<TaskTag> parse_task_tag(std::string_view s) {
  if (s == "nli") return TaskTag::kNli;
  if (s == "candidates") return TaskTag::kCandidates;
  if (s == "synonym_antonym") return TaskTag::kSynonymAntonym;
  if (s == "description") return TaskTag::kDescription;
  return std::nullopt;
}

// (anchor, positive, hard negative) text triple for contrastive training.
struct TrainingPair {
  std::string anchor;
  std::string positive;
  std::string hard_negative;
  TaskTag task = TaskTag::kNli;

  // All texts non-empty, anchor != positive, positive != hard negative.
  bool well_formed() const {
    return !anchor.empty() && !positive.empty() && !hard_negative.empty() &&
           anchor != positive && positive != hard_negative;
  }

  friend bool operator==(const TrainingPair&, const TrainingPair&) = default;
};

inline nlohmann::json to_json(const TrainingPair& p) {
  return {{"anchor", p.anchor},
          {"positive", p.positive},
          {"hard_negative", p.hard_negative},
          {"task_tag", std::string(to_string(p.task))}};
}

inline void write_pairs(std::ostream& out, const std::vector<TrainingPair>& pairs) {
  for (const auto& p : pairs) out << to_json(p).dump() << '\n';
}

inline std::vector<TrainingPair> read_pairs(std::istream& in) {
  std::vector<TrainingPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    try {
      if (j.is_discarded()) throw Error("malformed JSON");
      TrainingPair p;
      p.anchor = j.at("anchor").get<std::string>();
      p.positive = j.at("positive").get<std::string>();
      p.hard_negative = j.at("hard_negative").get<std::string>();
      auto tag = parse_task_tag(j.at("task_tag").get<std::string>());
      if (!tag) throw Error("unknown task_tag");
      p.task = *tag;
      pairs.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw Error("pair file line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

inline std::vector<TrainingPair> load_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open pair file: " + path);
  return read_pairs(in);
}

}  // namespace vqaeval

#endif  // VQAEVAL_PAIRS_HPP_
