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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "vqaeval/contrastive.hpp"
#include "vqaeval/gradcheck.hpp"
#include "vqaeval/trainer.hpp"

namespace vqaeval {
namespace {

EncoderModel hand_model() {
  EncoderModel m;
  m.vocab.add("a");
  m.vocab.add("b");
  m.embedding = Matrix(3, 2);
  m.embedding(1, 0) = 1;
  m.embedding(1, 1) = 2;
  m.embedding(2, 0) = 3;
  m.projection = Matrix(2, 2);
  m.projection(0, 0) = 1;
  m.projection(0, 1) = 1;
  m.projection(1, 1) = 2;
  m.normalize_output = false;
  return m;
}

TEST(Encoder, HandComputedVector) {
  auto m = hand_model();
  // mean of (1,2) and (3,0) is (2,1); P (2,1) = (3,2)
  EXPECT_EQ(encode(m, "a b").vector, (Embedding{3, 2}));
  EXPECT_EQ(encode(m, "a").vector, (Embedding{3, 4}));
  m.normalize_output = true;
  const auto h = encode(m, "b, a!").vector;
  EXPECT_NEAR(h[0], 3 / std::sqrt(13.0), 1e-15);
  EXPECT_NEAR(h[1], 2 / std::sqrt(13.0), 1e-15);
}

TEST(Encoder, OrderFreeAndUnknownTokens) {
  const auto m = make_encoder(build_vocabulary({"red bus on a road"}), {8, 4, 0.1, 0.01, 7, true});
  EXPECT_EQ(encode(m, "red bus road").vector, encode(m, "road red bus").vector);
  EXPECT_EQ(encode(m, "zebra").vector, encode(m, "giraffe").vector);
  const auto empty = encode(m, "  ");
  EXPECT_TRUE(empty.empty_input);
  EXPECT_EQ(empty.vector, encode(m, "zebra").vector);
  EXPECT_FALSE(encode(m, "red").empty_input);
}

TEST(Encoder, InitializationDefaults) {
  const auto m = make_encoder(build_vocabulary({"x y z"}));
  EXPECT_EQ(m.dim(), 64u);
  EXPECT_EQ(m.out_dim(), 64u);
  for (double v : m.embedding.data()) {
    EXPECT_GE(v, -0.1);
    EXPECT_LT(v, 0.1);
  }
  EXPECT_NEAR(m.projection(3, 3), 1.0, 0.01);
  EXPECT_NEAR(m.projection(3, 4), 0.0, 0.01);
  EXPECT_EQ(make_encoder(build_vocabulary({"x y z"})), m);
  EXPECT_THROW(make_encoder(Vocabulary{}, {0, 4}), Error);
}

TEST(Encoder, CheckpointRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "vqaeval_encoder_test.bin";
  const auto m = make_encoder(build_vocabulary({"alpha beta gamma delta"}), {5, 3, 0.1, 0.01, 3, false});
  save_encoder(m, path.string());
  EXPECT_EQ(load_encoder(path.string()), m);
  EXPECT_EQ(std::filesystem::file_size(path),
            std::string("vqaeval-encoder 1\n5 5 3 0\n<unk>\nalpha\nbeta\ngamma\ndelta\n").size() +
                8 * (5 * 5 + 3 * 5));
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 4);
  EXPECT_THROW(load_encoder(path.string()), Error);
  std::filesystem::remove(path);
}

std::vector<Embedding> random_vectors(Rng& rng, std::size_t n, std::size_t d) {
  std::vector<Embedding> out(n, Embedding(d));
  for (auto& v : out)
    for (auto& x : v) x = rng.uniform(-1, 1);
  return out;
}

TEST(Loss, UniformSimilarityIsLogTwoN) {
  for (std::size_t n : {2u, 4u, 7u}) {
    const std::vector<Embedding> same(n, Embedding{0.3, -0.2, 0.9});
    EXPECT_NEAR(contrastive_loss(same, same, same, {}).loss, std::log(2.0 * n), 1e-12);
    EXPECT_NEAR(contrastive_loss(same, same, same, {0.05, NegativeTerm::kOwnNegativeRepeated}).loss,
                std::log(2.0 * n), 1e-12);
  }
}

TEST(Loss, HandSetBatchMatchesNaiveFormula) {
  const std::vector<Embedding> a{{1, 0}, {0, 1}}, p{{0.8, 0.6}, {0.6, 0.8}}, n{{0, 1}, {1, 0}};
  EXPECT_NEAR(contrastive_loss(a, p, n, {0.5}).loss, oracle::naive_loss(a, p, n, 0.5), 1e-12);
  EXPECT_NEAR(contrastive_loss(a, p, n, {0.5, NegativeTerm::kOwnNegativeRepeated}).loss,
              oracle::naive_loss(a, p, n, 0.5, true), 1e-12);
}

TEST(Loss, StabilizedAgreesWithNaive) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(5), d = 2 + rng.index(6);
    const auto a = random_vectors(rng, n, d), p = random_vectors(rng, n, d),
               g = random_vectors(rng, n, d);
    EXPECT_NEAR(contrastive_loss(a, p, g, {}).loss, oracle::naive_loss(a, p, g, 0.05), 1e-9);
  }
}

TEST(Loss, StrictlyPositiveAndShrinksWithSeparation) {
  double previous = std::numeric_limits<double>::infinity();
  for (double s : {0.0, 0.3, 0.6, 0.9, 0.99}) {
    // own positive approaches the anchor, negatives stay orthogonal
    const double c = std::sqrt(1 - s * s);
    const std::vector<Embedding> a{{1, 0}, {-1, 0}}, p{{s, c}, {-s, -c}}, n{{0.01, -1}, {-0.01, -1}};
    const double loss = contrastive_loss(a, p, n, {0.05}).loss;
    EXPECT_GT(loss, 0.0);
    EXPECT_LT(loss, previous);
    previous = loss;
  }
  EXPECT_LT(previous, 1e-3);
}

TEST(Loss, TemperatureGuardAndShapes) {
  const std::vector<Embedding> v{{1, 0}, {0, 1}};
  EXPECT_THROW(contrastive_loss(v, v, v, {1e-7}), Error);
  EXPECT_THROW(contrastive_loss(v, v, v, {0.0}), Error);
  EXPECT_NO_THROW(contrastive_loss(v, v, v, {1e-6}));
  EXPECT_THROW(contrastive_loss({{1, 0}}, {{1, 0}}, {{1, 0}}, {}), Error);
  EXPECT_THROW(contrastive_loss(v, v, {{1, 0}}, {}), Error);
  const std::vector<Embedding> zero{{0, 0}, {0, 1}};
  try {
    contrastive_loss(v, zero, v, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("index 0"), std::string::npos);
  }
}

TrainBatch toy_batch() {
  return {{"red bus", "a cat sleeping", "green tree", "two dogs"},
          {"crimson bus", "a kitten asleep", "leafy tree", "pair of dogs"},
          {"blue car", "a dog running", "red tree", "one cat"}};
}

EncoderModel toy_model(std::uint64_t seed, std::size_t d = 6, std::size_t out = 5) {
  const auto b = toy_batch();
  std::vector<std::string> texts = b.anchors;
  texts.insert(texts.end(), b.positives.begin(), b.positives.end());
  texts.insert(texts.end(), b.hard_negatives.begin(), b.hard_negatives.end());
  return make_encoder(build_vocabulary(texts), {d, out, 0.5, 0.3, seed, true});
}

TEST(Gradients, MatchFiniteDifferenceOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto m = toy_model(seed);
    const auto batch = toy_batch();
    for (auto term : {NegativeTerm::kInBatch, NegativeTerm::kOwnNegativeRepeated}) {
      const LossOptions opts{0.1, term};
      const auto g = gradients(m, batch, opts);
      EXPECT_NEAR(g.loss, oracle::naive_model_loss(m, batch, 0.1, term != NegativeTerm::kInBatch), 1e-9);
      Rng rng(seed * 101);
      for (int k = 0; k < 40; ++k) {
        const bool proj = rng.index(2) == 1;
        const std::size_t row = proj ? rng.index(m.out_dim()) : 1 + rng.index(m.vocab.size() - 1);
        const std::size_t col = rng.index(m.dim());
        const double analytic = proj ? g.gradient.projection(row, col) : g.gradient.embedding(row, col);
        const double numeric = oracle::finite_difference(m, batch, 0.1, proj, row, col, 1e-5,
                                                         term != NegativeTerm::kInBatch);
        EXPECT_LT(relative_error(analytic, numeric, 1e-8), 1e-4)
            << (proj ? "projection" : "embedding") << " (" << row << "," << col << ")";
      }
    }
  }
}

TEST(Gradients, GradientCheckHelper) {
  const auto r = gradient_check(toy_model(9), toy_batch(), {0.05}, {120, 1e-5, 4});
  EXPECT_EQ(r.entries.size(), 120u);
  EXPECT_LT(r.max_rel_error, 1e-4);
}

TEST(Gradients, UnusedRowsGetNoGradient) {
  auto m = toy_model(5);
  const auto extra = m.vocab.add("unused");
  m.embedding = Matrix(m.vocab.size(), m.dim(), 0.2);
  Rng rng(1);
  for (auto& x : m.embedding.data()) x = rng.uniform(-1, 1);
  const auto g = gradients(m, toy_batch());
  for (std::size_t c = 0; c < m.dim(); ++c) EXPECT_EQ(g.gradient.embedding(extra, c), 0.0);
}

TEST(Gradients, RespectMirrorSymmetry) {
  // p/q and p2/q2 swap roles under exchanging the two triples
  EncoderModel m;
  for (const char* t : {"p", "q", "pp", "qq", "n"}) m.vocab.add(t);
  m.embedding = Matrix(m.vocab.size(), 3);
  const double rows[][3] = {{0, 0, 0}, {1, 0.2, 0.1}, {1, 0.2, 0.1}, {0.3, 1, 0}, {0.3, 1, 0}, {0, 0.1, 1}};
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 3; ++c) m.embedding(r, c) = rows[r][c];
  m.projection = Matrix(3, 3);
  for (int k = 0; k < 3; ++k) m.projection(k, k) = 1;
  const TrainBatch batch{{"p", "q"}, {"pp", "qq"}, {"n", "n"}};
  const auto g = gradients(m, batch).gradient;
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_NEAR(g.embedding(1, c), g.embedding(2, c), 1e-14);
    EXPECT_NEAR(g.embedding(3, c), g.embedding(4, c), 1e-14);
  }
}

TEST(Gradients, SmallStepDownhillReducesLoss) {
  auto m = toy_model(11);
  const auto batch = toy_batch();
  const auto g = gradients(m, batch);
  for (std::size_t k = 0; k < m.embedding.data().size(); ++k)
    m.embedding.data()[k] -= 1e-4 * g.gradient.embedding.data()[k];
  for (std::size_t k = 0; k < m.projection.data().size(); ++k)
    m.projection.data()[k] -= 1e-4 * g.gradient.projection.data()[k];
  EXPECT_LT(loss_ibn(m, batch), g.loss);
}

TEST(Schedule, Endpoints) {
  const CosineSchedule s(1e-3, 100, 10, 1e-5);
  EXPECT_EQ(s.at(0), 1e-5);
  EXPECT_DOUBLE_EQ(s.at(10), 1e-3);
  EXPECT_NEAR(s.at(100), 0.0, 1e-9 * 1e-3);
  EXPECT_NEAR(s.at(55), 0.5e-3, 1e-15);
  for (std::size_t k = 11; k < 100; ++k) EXPECT_LT(s.at(k), s.at(k - 1));
  EXPECT_THROW(CosineSchedule(1e-3, 5, 10), Error);
}

TEST(AdamW, ZeroLearningRateLeavesParametersBitIdentical) {
  auto m = toy_model(3);
  const auto before = m;
  TrainerConfig cfg;
  AdamW opt(m, cfg);
  opt.step(m, gradients(m, toy_batch()).gradient, 0.0);
  EXPECT_EQ(m, before);
}

TEST(AdamW, FirstStepMovesEachParameterByLearningRate) {
  auto m = toy_model(3);
  const auto before = m;
  TrainerConfig cfg;
  cfg.weight_decay = 0;
  AdamW opt(m, cfg);
  const auto g = gradients(m, toy_batch()).gradient;
  opt.step(m, g, 1e-3);
  for (std::size_t k = 0; k < m.projection.data().size(); ++k) {
    const double gk = g.projection.data()[k];
    const double expect = before.projection.data()[k] - 1e-3 * gk / (std::abs(gk) + 1e-8);
    EXPECT_NEAR(m.projection.data()[k], expect, 1e-15);
  }
}

std::vector<TrainingPair> toy_pairs() {
  const auto b = toy_batch();
  std::vector<TrainingPair> pairs;
  for (int rep = 0; rep < 3; ++rep)
    for (std::size_t i = 0; i < b.size(); ++i)
      pairs.push_back({b.anchors[i] + (rep ? " x" : ""), b.positives[i], b.hard_negatives[i], TaskTag::kNli});
  return pairs;
}

TEST(Train, LearningRateZeroKeepsModel) {
  const auto m = toy_model(1);
  TrainerConfig cfg;
  cfg.peak_lr = 0;
  cfg.batch_size = 4;
  const auto r = train(m, toy_pairs(), cfg);
  EXPECT_EQ(r.model, m);
  EXPECT_EQ(r.steps, 3u);
  EXPECT_EQ(r.loss_trace.size(), 3u);
}

TEST(Train, SameSeedSameTrace) {
  TrainerConfig cfg;
  cfg.batch_size = 4;
  cfg.epochs = 3;
  cfg.seed = 77;
  cfg.peak_lr = 1e-2;
  const auto a = train(toy_model(1), toy_pairs(), cfg);
  const auto b = train(toy_model(1), toy_pairs(), cfg);
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.model, b.model);
  cfg.seed = 78;
  EXPECT_NE(train(toy_model(1), toy_pairs(), cfg).loss_trace, a.loss_trace);
}

TEST(Train, ReducesLossOnFixedPairs) {
  TrainerConfig cfg;
  cfg.batch_size = 12;
  cfg.epochs = 40;
  cfg.peak_lr = 2e-2;
  const auto pairs = toy_pairs();
  const auto r = train(toy_model(2), pairs, cfg);
  EXPECT_LT(r.loss_trace.back(), r.loss_trace.front());
}

TEST(Train, ConfigValidationAndDivergence) {
  TrainerConfig cfg;
  cfg.temperature = 1e-9;
  EXPECT_THROW(train(toy_model(1), toy_pairs(), cfg), Error);
  cfg = {};
  cfg.batch_size = 1;
  EXPECT_THROW(train(toy_model(1), toy_pairs(), cfg), Error);
  cfg = {};
  EXPECT_THROW(train(toy_model(1), {toy_pairs()[0]}, cfg), Error);

  auto dead = toy_model(1);
  dead.embedding.set_zero();
  cfg.batch_size = 4;
  try {
    train(dead, toy_pairs(), cfg);
    FAIL();
  } catch (const TrainingDiverged& e) {
    EXPECT_TRUE(e.loss_trace().empty());
  }
  EXPECT_EQ(steps_per_epoch(9, 4), 2u);
  EXPECT_EQ(steps_per_epoch(10, 4), 3u);
}

}  // namespace
}  // namespace vqaeval
