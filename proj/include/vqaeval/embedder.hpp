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

// Embedding-based evaluation: format (question, text) pairs, embed them
// through a pluggable backend and score a response by its cosine similarity
// to the answer.

#ifndef VQAEVAL_EMBEDDER_HPP_
#define VQAEVAL_EMBEDDER_HPP_

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "vqaeval/core.hpp"
#include "vqaeval/cosine.hpp"
#include "vqaeval/encoder.hpp"
#include "vqaeval/error.hpp"

namespace vqaeval {

enum class PromptStyle {
  kQuestionAnswer,      // "Question: {q} Answer: {text}"
  kSummarizeOneWord,    // the above wrapped in a one-word summarization prompt
};

inline std::string format_pair(std::string_view question, std::string_view text) {
  std::string out;
  out.reserve(question.size() + text.size() + 19);
  out += "Question: ";
  out += question;
  out += " Answer: ";
  out += text;
  return out;
}

// Prompt for embedding services derived from decoder-only language models,
// which embed through the first generated token.
inline std::string format_summarize_prompt(std::string_view text) {
  return "Summarize the text " + std::string(text) + " in a single word:";
}

inline std::string format_for(PromptStyle style, std::string_view question,
                              std::string_view text) {
  auto qa = format_pair(question, text);
  return style == PromptStyle::kSummarizeOneWord ? format_summarize_prompt(qa) : qa;
}

// Maps text to a fixed-dimension vector. Implementations are deterministic
// within a session and safe to call from several threads.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;

  virtual Embedding embed(const std::string& text) = 0;

  virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
  }

  virtual std::string_view kind() const = 0;
};

// In-memory text -> vector table, read from and appended to JSONL lines of
// {"text": ..., "vector": [...]}.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  static EmbeddingStore read(std::istream& in) {
    EmbeddingStore store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto j = json::parse(line, nullptr, false);
      try {
        if (j.is_discarded()) throw Error("malformed JSON");
        store.insert(j.at("text").get<std::string>(), j.at("vector").get<Embedding>());
      } catch (const std::exception& e) {
        throw Error("embedding store line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return store;
  }

  static EmbeddingStore load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open embedding store: " + path);
    return read(in);
  }

  void insert(std::string text, Embedding v) {
    if (v.empty()) throw Error("embedding store: empty vector for \"" + text + "\"");
    for (double x : v)
      if (!std::isfinite(x)) throw Error("embedding store: non-finite entry for \"" + text + "\"");
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_)
      throw Error("embedding store: dimension " + std::to_string(v.size()) + " for \"" + text +
                  "\" differs from " + std::to_string(dim_));
    table_.insert_or_assign(std::move(text), std::move(v));
  }

  const Embedding* find(const std::string& text) const {
    auto it = table_.find(text);
    return it == table_.end() ? nullptr : &it->second;
  }

  std::size_t size() const { return table_.size(); }
  std::size_t dim() const { return dim_; }

  static std::string record(const std::string& text, const Embedding& v) {
    return json{{"text", text}, {"vector", v}}.dump();
  }

 private:
  std::unordered_map<std::string, Embedding> table_;
  std::size_t dim_ = 0;
};

class FileStoreBackend : public EmbeddingBackend {
 public:
  explicit FileStoreBackend(EmbeddingStore store) : store_(std::move(store)) {}
  explicit FileStoreBackend(const std::string& path) : store_(EmbeddingStore::load(path)) {}

  Embedding embed(const std::string& text) override {
    if (const auto* v = store_.find(text)) return *v;
    throw Error("file store: no embedding for key \"" + text + "\"");
  }

  std::string_view kind() const override { return "file_store"; }

 private:
  EmbeddingStore store_;
};

class ToyEncoderBackend : public EmbeddingBackend {
 public:
  explicit ToyEncoderBackend(std::shared_ptr<const EncoderModel> model)
      : model_(std::move(model)) {}

  Embedding embed(const std::string& text) override { return encode(*model_, text).vector; }

  std::string_view kind() const override { return "toy_encoder"; }

 private:
  std::shared_ptr<const EncoderModel> model_;
};

// cos(f(q, response), f(q, answer)).
inline double score_sample(EmbeddingBackend& backend, const Sample& s,
                           PromptStyle style = PromptStyle::kQuestionAnswer) {
  try {
    const auto r = backend.embed(format_for(style, s.question, s.response));
    const auto a = backend.embed(format_for(style, s.question, s.answer));
    return cosine(r, a);
  } catch (const std::exception& e) {
    throw Error("sample '" + s.id + "': " + e.what());
  }
}

// Raised when scoring stops part-way; `completed` samples were scored.
class ScoringError : public Error {
 public:
  ScoringError(const std::string& what, std::size_t completed)
      : Error(what), completed_(completed) {}
  std::size_t completed() const { return completed_; }

 private:
  std::size_t completed_;
};

struct ScoreOptions {
  PromptStyle style = PromptStyle::kQuestionAnswer;
  std::size_t batch_size = 64;  // samples per prefetch round
};

// One prediction per sample, in input order. Each distinct formatted text is
// embedded once.
inline PredictionSet score_dataset(EmbeddingBackend& backend, const std::vector<Sample>& samples,
                                   const ScoreOptions& opts = {}) {
  for (const auto& s : samples)
    if (!s.human_score)
      throw ScoringError("sample '" + s.id + "' has no human_score", 0);
  std::unordered_map<std::string, Embedding> cache;
  PredictionSet preds;
  const std::size_t chunk = std::max<std::size_t>(opts.batch_size, 1);
  for (std::size_t begin = 0; begin < samples.size(); begin += chunk) {
    const std::size_t end = std::min(begin + chunk, samples.size());
    std::vector<std::string> pending;
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto* t : {&samples[i].response, &samples[i].answer}) {
        auto text = format_for(opts.style, samples[i].question, *t);
        if (!cache.count(text) &&
            std::find(pending.begin(), pending.end(), text) == pending.end())
          pending.push_back(std::move(text));
      }
    }
    try {
      auto vectors = backend.embed_batch(pending);
      for (std::size_t k = 0; k < pending.size(); ++k)
        cache.emplace(std::move(pending[k]), std::move(vectors[k]));
    } catch (const Error&) {
      // retried one sample at a time below
    }
    for (std::size_t i = begin; i < end; ++i) {
      const auto& s = samples[i];
      auto lookup = [&](const std::string& text) -> const Embedding& {
        auto it = cache.find(text);
        if (it == cache.end()) it = cache.emplace(text, backend.embed(text)).first;
        return it->second;
      };
      double score;
      try {
        score = cosine(lookup(format_for(opts.style, s.question, s.response)),
                       lookup(format_for(opts.style, s.question, s.answer)));
      } catch (const std::exception& e) {
        throw ScoringError("scored " + std::to_string(i) + " of " +
                               std::to_string(samples.size()) + " samples; sample '" + s.id +
                               "' failed: " + e.what(),
                           i);
      }
      preds.add({s.id, score, *s.human_score, s.part, s.source_dataset.name(), s.group_id});
    }
  }
  return preds;
}

}  // namespace vqaeval

#endif  // VQAEVAL_EMBEDDER_HPP_
