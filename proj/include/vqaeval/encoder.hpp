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

// A small bag-of-words text encoder: mean-pooled token embeddings followed by
// a linear projection. Small enough to train on a laptop CPU, and exactly
// differentiable by hand.

#ifndef VQAEVAL_ENCODER_HPP_
#define VQAEVAL_ENCODER_HPP_

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vqaeval/error.hpp"
#include "vqaeval/random.hpp"
#include "vqaeval/textmetrics.hpp"

namespace vqaeval {

using Embedding = std::vector<double>;

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

class Vocabulary {
 public:
  static constexpr std::size_t kUnk = 0;
  static constexpr std::string_view kUnkToken = "<unk>";

  Vocabulary() { add(std::string(kUnkToken)); }

  std::size_t add(const std::string& token) {
    auto [it, inserted] = ids_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::size_t id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
  }

  bool contains(const std::string& token) const { return ids_.count(token) > 0; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::unordered_map<std::string, std::size_t> ids_;
  std::vector<std::string> tokens_;
};

// Tokens seen at least `min_count` times, in first-seen order.
inline Vocabulary build_vocabulary(const std::vector<std::string>& texts, int min_count = 1) {
  std::map<std::string, int> counts;
  std::vector<std::string> order;
  for (const auto& t : texts)
    for (auto& tok : tokenize(t))
      if (counts[tok]++ == 0) order.push_back(tok);
  Vocabulary v;
  for (const auto& tok : order)
    if (counts[tok] >= min_count) v.add(tok);
  return v;
}

struct EncoderModel {
  Vocabulary vocab;
  Matrix embedding;   // vocab.size() x dim
  Matrix projection;  // out_dim x dim
  bool normalize_output = true;

  std::size_t dim() const { return embedding.cols(); }
  std::size_t out_dim() const { return projection.rows(); }

  friend bool operator==(const EncoderModel&, const EncoderModel&) = default;
};

struct EncoderInit {
  std::size_t dim = 64;
  std::size_t out_dim = 64;
  double embedding_range = 0.1;    // uniform(-range, range)
  double projection_noise = 0.01;  // identity + uniform(-noise, noise)
  std::uint64_t seed = 0;
  bool normalize_output = true;
};

inline EncoderModel make_encoder(Vocabulary vocab, const EncoderInit& init = {}) {
  if (init.dim == 0 || init.out_dim == 0) throw Error("encoder: dimensions must be >= 1");
  EncoderModel m;
  m.vocab = std::move(vocab);
  m.normalize_output = init.normalize_output;
  Rng rng(init.seed);
  m.embedding = Matrix(m.vocab.size(), init.dim);
  for (auto& x : m.embedding.data()) x = rng.uniform(-init.embedding_range, init.embedding_range);
  m.projection = Matrix(init.out_dim, init.dim);
  for (std::size_t r = 0; r < init.out_dim; ++r)
    for (std::size_t c = 0; c < init.dim; ++c)
      m.projection(r, c) =
          (r == c ? 1.0 : 0.0) + rng.uniform(-init.projection_noise, init.projection_noise);
  return m;
}

// Token ids of `text`; a text without tokens becomes the single UNK id.
inline std::vector<std::size_t> token_ids(const EncoderModel& model, std::string_view text) {
  std::vector<std::size_t> ids;
  for (const auto& tok : tokenize(text)) ids.push_back(model.vocab.id(tok));
  if (ids.empty()) ids.push_back(Vocabulary::kUnk);
  return ids;
}

inline std::vector<double> mean_pool(const EncoderModel& model, std::span<const std::size_t> ids) {
  std::vector<double> u(model.dim(), 0.0);
  for (std::size_t id : ids) {
    const auto row = model.embedding.row(id);
    for (std::size_t k = 0; k < u.size(); ++k) u[k] += row[k];
  }
  const double inv = 1.0 / static_cast<double>(ids.size());
  for (auto& x : u) x *= inv;
  return u;
}

inline Embedding project(const Matrix& p, std::span<const double> u) {
  Embedding h(p.rows(), 0.0);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    const auto row = p.row(r);
    double s = 0;
    for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * u[c];
    h[r] = s;
  }
  return h;
}

struct EncodedText {
  Embedding vector;
  bool empty_input = false;  // text had no tokens; vector is the UNK encoding
};

// projection * mean(token rows), L2-normalized when the model asks for it.
inline EncodedText encode(const EncoderModel& model, std::string_view text) {
  EncodedText out;
  out.empty_input = tokenize(text).empty();
  const auto ids = token_ids(model, text);
  out.vector = project(model.projection, mean_pool(model, ids));
  if (model.normalize_output) {
    double norm = 0;
    for (double x : out.vector) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0)
      for (auto& x : out.vector) x /= norm;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
//   vqaeval-encoder 1\n
//   <vocab_size> <dim> <out_dim> <normalize 0|1>\n
//   <token>\n                         (vocab_size lines)
//   embedding, then projection: row-major little-endian IEEE-754 doubles

namespace checkpoint_detail {

inline void put_f64(std::ostream& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline double get_f64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("checkpoint: truncated weights");
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | bytes[i];
  return std::bit_cast<double>(bits);
}

}  // namespace checkpoint_detail

inline void save_encoder(const EncoderModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint: " + path);
  out << "vqaeval-encoder 1\n"
      << m.vocab.size() << ' ' << m.dim() << ' ' << m.out_dim() << ' '
      << (m.normalize_output ? 1 : 0) << '\n';
  for (const auto& tok : m.vocab.tokens()) out << tok << '\n';
  for (double v : m.embedding.data()) checkpoint_detail::put_f64(out, v);
  for (double v : m.projection.data()) checkpoint_detail::put_f64(out, v);
  if (!out) throw Error("checkpoint write failed: " + path);
}

inline EncoderModel load_encoder(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::string magic;
  int version = 0;
  std::size_t vocab_size = 0, dim = 0, out_dim = 0;
  int normalize = 0;
  if (!(in >> magic >> version) || magic != "vqaeval-encoder" || version != 1)
    throw Error("checkpoint: bad header in " + path);
  if (!(in >> vocab_size >> dim >> out_dim >> normalize) || vocab_size == 0 || dim == 0 ||
      out_dim == 0)
    throw Error("checkpoint: bad dimensions in " + path);
  in.get();  // newline
  EncoderModel m;
  std::vector<std::string> tokens(vocab_size);
  for (auto& tok : tokens)
    if (!std::getline(in, tok)) throw Error("checkpoint: truncated vocabulary");
  if (tokens[0] != Vocabulary::kUnkToken) throw Error("checkpoint: first token must be <unk>");
  for (std::size_t i = 1; i < tokens.size(); ++i) m.vocab.add(tokens[i]);
  if (m.vocab.size() != vocab_size) throw Error("checkpoint: duplicate vocabulary entries");
  m.normalize_output = normalize != 0;
  m.embedding = Matrix(vocab_size, dim);
  m.projection = Matrix(out_dim, dim);
  for (auto& v : m.embedding.data()) v = checkpoint_detail::get_f64(in);
  for (auto& v : m.projection.data()) v = checkpoint_detail::get_f64(in);
  return m;
}

}  // namespace vqaeval

#endif  // VQAEVAL_ENCODER_HPP_
