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

// Training-pair generators for the four augmentation tasks (NLI triples,
// candidate answers, synonym/antonym swaps, answer descriptions) and the
// rule-based morphology shift.

#ifndef VQAEVAL_AUGMENT_HPP_
#define VQAEVAL_AUGMENT_HPP_

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vqaeval/core.hpp"
#include "vqaeval/embedder.hpp"
#include "vqaeval/lexicon.hpp"
#include "vqaeval/pairs.hpp"
#include "vqaeval/random.hpp"

namespace vqaeval {

// ---------------------------------------------------------------------------
// Answer templates

inline constexpr std::string_view kResponseSlot = "{response}";

inline constexpr std::array<std::string_view, 6> kAnswerTemplates = {
    "Answer: {response}.",
    "The answer to this question is {response}.",
    "As shown in the image and question, the answer is {response}.",
    "The answer you are asking for is {response}.",
    "As can be deduced from the image, the answer to this question is {response}.",
    "The answer to your question appears to be {response}, as shown in the image.",
};

// Replaces the {response} slot of a template.
inline std::string fill_template(std::string_view tmpl, std::string_view response) {
  const auto at = tmpl.find(kResponseSlot);
  if (at == std::string_view::npos) throw Error("template has no {response} slot");
  std::string out(tmpl.substr(0, at));
  out += response;
  out += tmpl.substr(at + kResponseSlot.size());
  return out;
}

// Reads one template per line and checks each has a {response} slot.
inline std::vector<std::string> load_templates(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open template file: " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.find(kResponseSlot) == std::string::npos)
      throw Error("template without {response} slot: " + line);
    out.push_back(line);
  }
  return out;
}

inline std::vector<std::string> default_templates() {
  return {kAnswerTemplates.begin(), kAnswerTemplates.end()};
}

// ---------------------------------------------------------------------------
// Bookkeeping

// Per-task tally. Every opportunity is either emitted or skipped with a reason.
struct TaskCounts {
  std::size_t opportunities = 0;
  std::size_t emitted = 0;
  std::map<std::string, std::size_t> skipped;

  std::size_t skipped_total() const {
    std::size_t n = 0;
    for (const auto& [why, k] : skipped) n += k;
    return n;
  }
  bool reconciles() const { return emitted + skipped_total() == opportunities; }
};

inline nlohmann::json to_json(const TaskCounts& c) {
  return {{"opportunities", c.opportunities},
          {"emitted", c.emitted},
          {"skipped", c.skipped},
          {"skipped_total", c.skipped_total()}};
}

// A generator's outcome for one opportunity.
struct Generated {
  std::optional<TrainingPair> pair;
  std::string skip_reason;  // set when pair is empty
};

inline Generated skipped(std::string why) { return {std::nullopt, std::move(why)}; }

inline Generated checked(TrainingPair p) {
  if (p.anchor.empty() || p.positive.empty() || p.hard_negative.empty())
    return skipped("empty_field");
  if (p.anchor == p.positive) return skipped("anchor_equals_positive");
  if (p.positive == p.hard_negative) return skipped("positive_equals_negative");
  return {std::move(p), {}};
}

// Sorted, de-duplicated, normalized answers and candidates of `samples`.
inline std::vector<std::string> build_answer_space(const std::vector<Sample>& samples) {
  std::set<std::string> space;
  for (const auto& s : samples) {
    if (auto a = collapse_whitespace(ascii_lower(s.answer)); !a.empty()) space.insert(a);
    if (s.candidates)
      for (const auto& c : *s.candidates)
        if (auto n = collapse_whitespace(ascii_lower(c)); !n.empty()) space.insert(n);
  }
  return {space.begin(), space.end()};
}

// Uniform draw from the answer space, excluding anything in `exclude`
// (compared after normalization). Empty when nothing is eligible.
inline std::optional<std::string> draw_negative(const std::vector<std::string>& answer_space,
                                                const std::set<std::string>& exclude, Rng& rng) {
  std::vector<const std::string*> eligible;
  for (const auto& a : answer_space)
    if (!exclude.count(collapse_whitespace(ascii_lower(a)))) eligible.push_back(&a);
  if (eligible.empty()) return std::nullopt;
  return *eligible[rng.index(eligible.size())];
}

inline std::set<std::string> normalized_set(const std::vector<std::string>& words) {
  std::set<std::string> out;
  for (const auto& w : words) out.insert(collapse_whitespace(ascii_lower(w)));
  return out;
}

// ---------------------------------------------------------------------------
// Task: NLI triples

inline Generated nli_pair(std::string premise, std::string entailment, std::string contradiction) {
  return checked({std::move(premise), std::move(entailment), std::move(contradiction),
                  TaskTag::kNli});
}

struct NliRecord {
  std::string premise, entailment, contradiction;
};

// JSONL with "premise", "entailment" and "contradiction" keys.
inline std::vector<NliRecord> read_nli(std::istream& in) {
  std::vector<NliRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw Error("nli file line " + std::to_string(line_no) + ": malformed JSON");
    auto field = [&](const char* k) {
      return j.contains(k) && j[k].is_string() ? j[k].get<std::string>() : std::string();
    };
    out.push_back({field("premise"), field("entailment"), field("contradiction")});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Task: candidate answers

// anchor: the modal candidate; positive: the most frequent strictly less
// common candidate; negative: a seeded draw from the answer space outside the
// candidate set. Ties are broken lexicographically. All three are wrapped
// with the sample's question.
inline Generated candidate_pair(const Sample& s, const std::vector<std::string>& answer_space,
                                std::uint64_t seed) {
  if (!s.candidates || s.candidates->empty()) return skipped("no_candidates");
  std::map<std::string, int> counts;
  for (const auto& c : *s.candidates) ++counts[c];
  if (counts.size() < 2) return skipped("single_distinct_candidate");
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const auto& modal = ranked[0];
  const auto less = std::find_if(ranked.begin(), ranked.end(),
                                 [&](const auto& r) { return r.second < modal.second; });
  if (less == ranked.end()) return skipped("no_less_common_candidate");

  Rng rng(mix_seed(seed, "candidates:" + s.id));
  auto negative = draw_negative(answer_space, normalized_set(*s.candidates), rng);
  if (!negative) return skipped("empty_answer_space");
  return checked({format_pair(s.question, modal.first), format_pair(s.question, less->first),
                  format_pair(s.question, *negative), TaskTag::kCandidates});
}

// ---------------------------------------------------------------------------
// Task: synonyms and antonyms

// The answer's most frequent synonym replaces the answer (whole phrase
// first, then the last word of a multiword answer). The antonym of the
// replaced unit is the negative when the lexicon has one; otherwise a seeded
// draw from the answer space.
inline Generated synonym_antonym_pair(const Sample& s, const SynonymLookup& lookup,
                                      const std::vector<std::string>& answer_space,
                                      std::uint64_t seed) {
  const std::string answer = collapse_whitespace(ascii_lower(s.answer));
  if (answer.empty()) return skipped("empty_answer");

  std::string unit = answer, prefix;
  auto synonym = lookup.most_common_synonym(unit);
  if (!synonym) {
    const auto space = answer.rfind(' ');
    if (space == std::string::npos) return skipped("no_synonym");
    prefix = answer.substr(0, space + 1);
    unit = answer.substr(space + 1);
    synonym = lookup.most_common_synonym(unit);
    if (!synonym) return skipped("no_synonym");
  }
  const std::string positive = prefix + *synonym;
  if (positive == answer) return skipped("no_synonym");

  std::string negative;
  if (auto ant = lookup.antonym(unit)) {
    negative = prefix + *ant;
  } else {
    auto exclude = normalized_set(lookup.synonyms(unit));
    exclude.insert(answer);
    exclude.insert(positive);
    exclude.insert(unit);
    Rng rng(mix_seed(seed, "synonym_antonym:" + s.id));
    auto drawn = draw_negative(answer_space, exclude, rng);
    if (!drawn) return skipped("empty_answer_space");
    negative = *drawn;
  }
  return checked({format_pair(s.question, s.answer), format_pair(s.question, positive),
                  format_pair(s.question, negative), TaskTag::kSynonymAntonym});
}

// ---------------------------------------------------------------------------
// Task: descriptions

inline std::size_t word_count(std::string_view s) { return tokenize(s).size(); }

inline constexpr std::size_t kShortResponseWords = 3;

namespace augment_detail {

inline bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u >= 0x80 || std::isalnum(u);
}

// Replaces every occurrence of `what` that is not glued to neighbouring
// letters or digits. Returns the number of replacements.
inline std::size_t replace_whole(std::string& text, std::string_view what, std::string_view with) {
  std::size_t count = 0, pos = 0;
  while ((pos = text.find(what, pos)) != std::string::npos) {
    const bool left_ok = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t after = pos + what.size();
    const bool right_ok = after >= text.size() || !is_word_char(text[after]);
    if (left_ok && right_ok) {
      text.replace(pos, what.size(), with);
      pos += with.size();
      ++count;
    } else {
      pos += 1;
    }
  }
  return count;
}

}  // namespace augment_detail

// One pair per description text. Texts are the templates filled with the
// answer followed by the externally generated descriptions. anchor is the
// wrapped (question, answer); the positive is the description; the negative
// is the description with the answer swapped for a seeded random answer.
// Answers of three or more words are not augmented.
inline std::vector<Generated> description_pairs(const Sample& s,
                                                const std::vector<std::string>& templates,
                                                const std::vector<std::string>& descriptions,
                                                const std::vector<std::string>& answer_space,
                                                std::uint64_t seed) {
  std::vector<std::string> texts;
  for (const auto& t : templates) texts.push_back(fill_template(t, s.answer));
  texts.insert(texts.end(), descriptions.begin(), descriptions.end());

  std::vector<Generated> out;
  if (word_count(s.answer) >= kShortResponseWords || word_count(s.answer) == 0) {
    for (std::size_t i = 0; i < texts.size(); ++i) out.push_back(skipped("long_response"));
    return out;
  }
  Rng rng(mix_seed(seed, "description:" + s.id));
  const std::set<std::string> exclude{collapse_whitespace(ascii_lower(s.answer))};
  const auto anchor = format_pair(s.question, s.answer);
  for (const auto& text : texts) {
    std::string probe = text;
    if (augment_detail::replace_whole(probe, s.answer, s.answer) == 0) {
      out.push_back(skipped("answer_not_in_description"));
      continue;
    }
    auto drawn = draw_negative(answer_space, exclude, rng);
    if (!drawn) {
      out.push_back(skipped("empty_answer_space"));
      continue;
    }
    std::string negative = text;
    augment_detail::replace_whole(negative, s.answer, *drawn);
    out.push_back(checked({anchor, text, negative, TaskTag::kDescription}));
  }
  return out;
}

// ---------------------------------------------------------------------------
// External description generation

inline std::string description_prompt(std::string_view question, std::string_view answer) {
  return "Concatenate the question with the answer and form assertions. For example, "
         "Question:What kind of dog is in the photo?  Answer:golden retriever.  Assertion: "
         "The dog in the photo is a golden retriever. Infer for the following: Question: " +
         std::string(question) + " Answer: " + std::string(answer) +
         ". Please think of three different forms of naturally-sounded assertions for this "
         "question-answer pair with small disturbance but do not output them. Choose the two "
         "assertions that are closest in meaning to the original question-answer for output. "
         "Output shall be in .json style so that I can directly save them in a .txt and open "
         "by json. Do not output anything else including explanation, reasoning or "
         "instructions.";
}

// Text-generation endpoint. complete() throws Error on transport failure.
class TextGenerator {
 public:
  virtual ~TextGenerator() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

// Accepts a JSON array of strings or an object whose values are strings (or
// arrays of strings), optionally inside a ``` fence. Returns at most two
// non-empty strings; empty when nothing usable was found.
inline std::vector<std::string> parse_descriptions(std::string_view reply) {
  std::string body(reply);
  if (auto open = body.find("```"); open != std::string::npos) {
    auto start = body.find('\n', open);
    auto close = body.find("```", start == std::string::npos ? open + 3 : start);
    if (start != std::string::npos && close != std::string::npos)
      body = body.substr(start + 1, close - start - 1);
  }
  auto j = nlohmann::json::parse(body, nullptr, false);
  std::vector<std::string> out;
  auto take = [&](const nlohmann::json& v) {
    if (out.size() < 2 && v.is_string()) {
      auto text = collapse_whitespace(v.get<std::string>());
      if (!text.empty()) out.push_back(std::move(text));
    }
  };
  if (j.is_discarded()) return out;
  if (j.is_array()) {
    for (const auto& v : j) take(v);
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_array())
        for (const auto& x : v) take(x);
      else
        take(v);
    }
  }
  return out;
}

struct DescriptionResult {
  std::vector<std::string> descriptions;
  int attempts = 0;
  std::vector<std::string> errors;  // one per failed attempt
  bool ok() const { return !descriptions.empty(); }
};

inline DescriptionResult generate_descriptions(std::string_view question, std::string_view answer,
                                               TextGenerator& llm, int max_attempts = 3) {
  DescriptionResult r;
  const auto prompt = description_prompt(question, answer);
  while (r.attempts < max_attempts) {
    ++r.attempts;
    try {
      r.descriptions = parse_descriptions(llm.complete(prompt));
      if (r.ok()) return r;
      r.errors.push_back("unparseable reply");
    } catch (const std::exception& e) {
      r.errors.push_back(e.what());
    }
  }
  return r;
}

// Generated descriptions keyed by (question, answer), persisted as JSONL
// {"question", "answer", "descriptions"} so later runs replay them.
class DescriptionCache {
 public:
  static DescriptionCache read(std::istream& in) {
    DescriptionCache c;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      try {
        if (j.is_discarded()) throw Error("malformed JSON");
        c.put(j.at("question").get<std::string>(), j.at("answer").get<std::string>(),
              j.at("descriptions").get<std::vector<std::string>>());
      } catch (const std::exception& e) {
        throw Error("description cache line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return c;
  }

  static DescriptionCache load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open description cache: " + path);
    return read(in);
  }

  void put(const std::string& q, const std::string& a, std::vector<std::string> d) {
    entries_[{q, a}] = std::move(d);
  }

  const std::vector<std::string>* find(const std::string& q, const std::string& a) const {
    auto it = entries_.find({q, a});
    return it == entries_.end() ? nullptr : &it->second;
  }

  void write(std::ostream& out) const {
    for (const auto& [key, d] : entries_)
      out << nlohmann::json{{"question", key.first}, {"answer", key.second}, {"descriptions", d}}
                 .dump()
          << '\n';
  }

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, std::string>, std::vector<std::string>> entries_;
};

struct DescriptionBatchReport {
  std::size_t requested = 0;
  std::size_t augmented = 0;
  std::size_t skipped = 0;
  std::size_t from_cache = 0;
  std::vector<std::string> log;  // "sample <id>: <error>" per failed item
};

// Fills `cache` for every short-answer sample not already present. Failures
// are logged and counted, never thrown.
inline DescriptionBatchReport generate_descriptions_batch(const std::vector<Sample>& samples,
                                                          TextGenerator& llm,
                                                          DescriptionCache& cache,
                                                          int max_attempts = 3) {
  DescriptionBatchReport rep;
  for (const auto& s : samples) {
    if (word_count(s.answer) >= kShortResponseWords || word_count(s.answer) == 0) continue;
    ++rep.requested;
    if (cache.find(s.question, s.answer)) {
      ++rep.from_cache;
      ++rep.augmented;
      continue;
    }
    auto r = generate_descriptions(s.question, s.answer, llm, max_attempts);
    if (r.ok()) {
      cache.put(s.question, s.answer, r.descriptions);
      ++rep.augmented;
    } else {
      ++rep.skipped;
      rep.log.push_back("sample " + s.id + ": " +
                        (r.errors.empty() ? std::string("no reply") : r.errors.back()));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Pipeline

struct AugmentInputs {
  std::vector<Sample> samples;
  std::vector<NliRecord> nli;
  const SynonymLookup* lookup = nullptr;
  std::vector<std::string> templates = default_templates();
  const DescriptionCache* descriptions = nullptr;
};

struct AugmentTasks {
  bool nli = true;
  bool candidates = true;
  bool synonym_antonym = true;
  bool descriptions = true;
};

struct AugmentRun {
  std::vector<TrainingPair> pairs;
  std::map<std::string, TaskCounts> counts;  // keyed by task tag
};

inline nlohmann::json to_json(const AugmentRun& r) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [task, c] : r.counts) counts[task] = to_json(c);
  return {{"pairs", r.pairs.size()}, {"counts", counts}};
}

// Runs the selected generators in a fixed order (nli, candidates,
// synonym_antonym, description) and tallies every opportunity.
inline AugmentRun run_augmentation(const AugmentInputs& in, const AugmentTasks& tasks,
                                   std::uint64_t seed) {
  AugmentRun run;
  auto record = [&](TaskTag tag, Generated g) {
    auto& c = run.counts[std::string(to_string(tag))];
    ++c.opportunities;
    if (g.pair) {
      ++c.emitted;
      run.pairs.push_back(std::move(*g.pair));
    } else {
      ++c.skipped[g.skip_reason];
    }
  };
  const auto space = build_answer_space(in.samples);
  if (tasks.nli) {
    run.counts[std::string(to_string(TaskTag::kNli))];
    for (const auto& r : in.nli) record(TaskTag::kNli, nli_pair(r.premise, r.entailment, r.contradiction));
  }
  if (tasks.candidates) {
    run.counts[std::string(to_string(TaskTag::kCandidates))];
    for (const auto& s : in.samples)
      if (s.candidates) record(TaskTag::kCandidates, candidate_pair(s, space, seed));
  }
  if (tasks.synonym_antonym) {
    if (!in.lookup) throw Error("augment: synonym_antonym needs a lexicon");
    run.counts[std::string(to_string(TaskTag::kSynonymAntonym))];
    for (const auto& s : in.samples)
      record(TaskTag::kSynonymAntonym, synonym_antonym_pair(s, *in.lookup, space, seed));
  }
  if (tasks.descriptions) {
    run.counts[std::string(to_string(TaskTag::kDescription))];
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& s : in.samples) {
      if (!seen.insert({s.question, s.answer}).second) continue;
      std::vector<std::string> generated;
      if (in.descriptions)
        if (const auto* d = in.descriptions->find(s.question, s.answer)) generated = *d;
      for (auto& g : description_pairs(s, in.templates, generated, space, seed))
        record(TaskTag::kDescription, std::move(g));
    }
  }
  return run;
}

// ---------------------------------------------------------------------------
// Morphology shift

struct MorphologyShift {
  std::string text;
  bool changed = false;
  std::string rule;  // "verb_tense", "irregular_plural", "plural", "singular", "invariant", "none"
};

namespace augment_detail {

inline const std::map<std::string, std::string>& irregular_plurals() {
  static const std::map<std::string, std::string> table = {
      {"man", "men"},       {"woman", "women"},   {"child", "children"}, {"person", "people"},
      {"mouse", "mice"},    {"goose", "geese"},   {"tooth", "teeth"},    {"foot", "feet"},
      {"ox", "oxen"},       {"louse", "lice"},    {"leaf", "leaves"},    {"knife", "knives"},
      {"wife", "wives"},    {"life", "lives"},    {"wolf", "wolves"},    {"half", "halves"},
      {"shelf", "shelves"}, {"loaf", "loaves"},   {"cactus", "cacti"},   {"tomato", "tomatoes"},
      {"potato", "potatoes"}, {"hero", "heroes"}, {"calf", "calves"},    {"die", "dice"},
  };
  return table;
}

inline const std::set<std::string>& invariant_nouns() {
  static const std::set<std::string> words = {
      "scissors", "sheep",   "fish",   "deer",    "series", "species", "aircraft",
      "glasses",  "pants",   "jeans",  "shorts",  "news",   "trousers", "moose",
      "salmon",   "trout",   "bison",  "offspring", "police", "cattle", "clothes",
  };
  return words;
}

inline bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Consonant-vowel-consonant ending on a short word: the final consonant
// doubles before -ing/-ed (run -> running).
inline bool doubles_final(std::string_view w) {
  if (w.size() < 3 || w.size() > 4) return false;
  const char a = w[w.size() - 3], b = w[w.size() - 2], c = w[w.size() - 1];
  return !is_vowel(a) && is_vowel(b) && !is_vowel(c) && c != 'w' && c != 'x' && c != 'y';
}

inline std::string add_suffix(const std::string& w, std::string_view suffix) {
  if (ends_with(w, "e") && !ends_with(w, "ee") && w.size() > 2) return w.substr(0, w.size() - 1) + std::string(suffix);
  if (doubles_final(w)) return w + w.back() + std::string(suffix);
  return w + std::string(suffix);
}

// base -> -ing, -ing -> -ed, -ed -> -ing.
inline std::string toggle_tense(const std::string& w) {
  if (ends_with(w, "ing") && w.size() > 4) return w.substr(0, w.size() - 3) + "ed";
  if (ends_with(w, "ed") && w.size() > 3) return w.substr(0, w.size() - 2) + "ing";
  return add_suffix(w, "ing");
}

inline std::string pluralize(const std::string& w) {
  if (ends_with(w, "s") || ends_with(w, "x") || ends_with(w, "z") || ends_with(w, "ch") ||
      ends_with(w, "sh"))
    return w + "es";
  if (ends_with(w, "y") && w.size() > 1 && !is_vowel(w[w.size() - 2]))
    return w.substr(0, w.size() - 1) + "ies";
  return w + "s";
}

inline bool looks_plural(const std::string& w) {
  return ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is") &&
         w.size() > 2;
}

inline std::string singularize(const std::string& w) {
  if (ends_with(w, "ies") && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  for (std::string_view es : {"sses", "xes", "zes", "ches", "shes"})
    if (ends_with(w, es)) return w.substr(0, w.size() - 2);
  return w.substr(0, w.size() - 1);
}

}  // namespace augment_detail

// Shifts the last word of the answer: known verbs toggle tense; nouns flip
// number using the irregular table, then the -s/-es/-ies rules. Words that
// are the same in singular and plural come back unchanged.
inline MorphologyShift morphology_shift(std::string_view answer, const SynonymLookup& lookup) {
  using namespace augment_detail;
  const std::string norm = collapse_whitespace(ascii_lower(answer));
  MorphologyShift out{norm, false, "none"};
  if (norm.empty()) return out;
  const auto space = norm.rfind(' ');
  const std::string prefix = space == std::string::npos ? "" : norm.substr(0, space + 1);
  const std::string word = space == std::string::npos ? norm : norm.substr(space + 1);
  if (!std::all_of(word.begin(), word.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }))
    return out;

  std::string shifted;
  if (invariant_nouns().count(word)) {
    out.rule = "invariant";
    return out;
  }
  if (lookup.is_verb(word) || (ends_with(word, "ing") && lookup.is_verb(word.substr(0, word.size() - 3)))) {
    shifted = toggle_tense(word);
    out.rule = "verb_tense";
  } else if (auto it = irregular_plurals().find(word); it != irregular_plurals().end()) {
    shifted = it->second;
    out.rule = "irregular_plural";
  } else if (auto rev = std::find_if(irregular_plurals().begin(), irregular_plurals().end(),
                                     [&](const auto& kv) { return kv.second == word; });
             rev != irregular_plurals().end()) {
    shifted = rev->first;
    out.rule = "irregular_plural";
  } else if (looks_plural(word)) {
    shifted = singularize(word);
    out.rule = "singular";
  } else {
    shifted = pluralize(word);
    out.rule = "plural";
  }
  out.text = prefix + shifted;
  out.changed = shifted != word;
  return out;
}

}  // namespace vqaeval

#endif  // VQAEVAL_AUGMENT_HPP_
