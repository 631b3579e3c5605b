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

// Lexicon lookups backed by WordNet's published data files and a word
// frequency table.

#ifndef VQAEVAL_LEXICON_HPP_
#define VQAEVAL_LEXICON_HPP_

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "vqaeval/error.hpp"

namespace vqaeval {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Trim and collapse internal whitespace runs to a single space.
inline std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
    }
  }
  return out;
}

class SynonymLookup {
 public:
  // Records that every pair of words in `words` are synonyms.
  void add_synset(const std::vector<std::string>& words) {
    std::vector<std::string> norm;
    for (const auto& w : words) norm.push_back(key(w));
    for (const auto& w : norm)
      for (const auto& other : norm)
        if (other != w) synonyms_[w].insert(other);
  }

  void add_antonym(std::string_view word, std::string_view antonym) {
    auto& slot = antonyms_[key(word)];
    if (!slot) slot = key(antonym);
  }

  void add_verb(std::string_view word) { verbs_.insert(key(word)); }

  void set_frequency(std::string_view word, long long count) { frequency_[key(word)] = count; }

  // Sorted, without the word itself.
  std::vector<std::string> synonyms(std::string_view word) const {
    auto it = synonyms_.find(key(word));
    if (it == synonyms_.end()) return {};
    return {it->second.begin(), it->second.end()};
  }

  bool are_synonyms(std::string_view a, std::string_view b) const {
    auto it = synonyms_.find(key(a));
    return it != synonyms_.end() && it->second.count(key(b)) > 0;
  }

  std::optional<std::string> antonym(std::string_view word) const {
    auto it = antonyms_.find(key(word));
    if (it == antonyms_.end()) return std::nullopt;
    return it->second;
  }

  long long frequency(std::string_view word) const {
    auto it = frequency_.find(key(word));
    return it == frequency_.end() ? 0 : it->second;
  }

  bool is_verb(std::string_view word) const { return verbs_.count(key(word)) > 0; }

  // Highest-frequency synonym; ties go to the lexicographically smallest.
  std::optional<std::string> most_common_synonym(std::string_view word) const {
    std::optional<std::string> best;
    long long best_freq = -1;
    for (const auto& s : synonyms(word)) {
      const long long f = frequency(s);
      if (f > best_freq) {  // synonyms() is sorted, so '>' keeps the smallest on ties
        best = s;
        best_freq = f;
      }
    }
    return best;
  }

  bool empty() const { return synonyms_.empty() && antonyms_.empty(); }

 private:
  static std::string key(std::string_view w) { return collapse_whitespace(ascii_lower(w)); }

  std::unordered_map<std::string, std::set<std::string>> synonyms_;
  std::unordered_map<std::string, std::optional<std::string>> antonyms_;
  std::unordered_map<std::string, long long> frequency_;
  std::unordered_set<std::string> verbs_;
};

namespace wordnet {

// One parsed synset line of a data.<pos> file.
struct Synset {
  std::string offset;
  char pos = 'n';
  std::vector<std::string> words;
  struct Pointer {
    std::string symbol;
    std::string offset;
    char pos;
    int source;  // 1-based word number in this synset, 0 for the whole synset
    int target;
  };
  std::vector<Pointer> pointers;
};

// WordNet lemmas use '_' for spaces and may carry an adjective marker such
// as "(a)" or "(ip)".
inline std::string clean_lemma(std::string_view raw) {
  std::string w(raw);
  if (auto paren = w.find('('); paren != std::string::npos && w.back() == ')') w.erase(paren);
  std::replace(w.begin(), w.end(), '_', ' ');
  return ascii_lower(w);
}

inline std::optional<Synset> parse_data_line(const std::string& line) {
  if (line.empty() || line[0] == ' ') return std::nullopt;  // license preamble
  const auto bar = line.find(" | ");
  std::istringstream in(line.substr(0, bar));
  Synset s;
  std::string lex_filenum, ss_type, hex_count;
  if (!(in >> s.offset >> lex_filenum >> ss_type >> hex_count)) return std::nullopt;
  s.pos = ss_type[0] == 's' ? 'a' : ss_type[0];
  const int w_cnt = std::stoi(hex_count, nullptr, 16);
  for (int i = 0; i < w_cnt; ++i) {
    std::string word, lex_id;
    if (!(in >> word >> lex_id)) throw Error("wordnet: truncated word list at " + s.offset);
    s.words.push_back(clean_lemma(word));
  }
  int p_cnt = 0;
  if (!(in >> p_cnt)) throw Error("wordnet: missing pointer count at " + s.offset);
  for (int i = 0; i < p_cnt; ++i) {
    Synset::Pointer p;
    std::string pos, st;
    if (!(in >> p.symbol >> p.offset >> pos >> st) || st.size() != 4)
      throw Error("wordnet: malformed pointer at " + s.offset);
    p.pos = pos[0] == 's' ? 'a' : pos[0];
    p.source = std::stoi(st.substr(0, 2), nullptr, 16);
    p.target = std::stoi(st.substr(2, 2), nullptr, 16);
    s.pointers.push_back(std::move(p));
  }
  return s;
}

// Reads whichever of data.noun, data.verb, data.adj and data.adv exist in
// `dir` into `lookup`. Antonyms come from '!' pointers.
inline void load_directory(const std::filesystem::path& dir, SynonymLookup& lookup) {
  static constexpr std::pair<const char*, char> kFiles[] = {
      {"data.noun", 'n'}, {"data.verb", 'v'}, {"data.adj", 'a'}, {"data.adv", 'r'}};
  std::map<std::pair<char, std::string>, Synset> by_offset;
  bool any = false;
  for (const auto& [name, pos] : kFiles) {
    std::ifstream in(dir / name);
    if (!in) continue;
    any = true;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      auto s = parse_data_line(line);
      if (!s) continue;
      s->pos = pos;
      by_offset[{pos, s->offset}] = std::move(*s);
    }
  }
  if (!any) throw Error("wordnet: no data.* files in " + dir.string());

  for (const auto& [key, s] : by_offset) {
    lookup.add_synset(s.words);
    if (s.pos == 'v')
      for (const auto& w : s.words) lookup.add_verb(w);
    for (const auto& p : s.pointers) {
      if (p.symbol != "!") continue;
      auto target = by_offset.find({p.pos, p.offset});
      if (target == by_offset.end()) continue;
      const auto& tw = target->second.words;
      if (p.source == 0 || p.target == 0) {
        for (const auto& w : s.words)
          if (!tw.empty()) lookup.add_antonym(w, tw.front());
      } else if (p.source <= static_cast<int>(s.words.size()) &&
                 p.target <= static_cast<int>(tw.size())) {
        lookup.add_antonym(s.words[p.source - 1], tw[p.target - 1]);
      }
    }
  }
}

}  // namespace wordnet

// Two whitespace-separated columns, word then count. '#' starts a comment.
inline void load_frequencies(std::istream& in, SynonymLookup& lookup) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string word;
    long long count;
    if (!(fields >> word)) continue;
    if (!(fields >> count))
      throw Error("frequency table line " + std::to_string(line_no) + ": missing count");
    std::replace(word.begin(), word.end(), '_', ' ');
    lookup.set_frequency(word, count);
  }
}

inline void load_frequencies(const std::filesystem::path& path, SynonymLookup& lookup) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open frequency table: " + path.string());
  load_frequencies(in, lookup);
}

}  // namespace vqaeval

#endif  // VQAEVAL_LEXICON_HPP_
