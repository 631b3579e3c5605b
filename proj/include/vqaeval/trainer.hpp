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

// AdamW with a warmup + cosine learning-rate schedule, and the training loop
// for the bag-of-words encoder.

#ifndef VQAEVAL_TRAINER_HPP_
#define VQAEVAL_TRAINER_HPP_

#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "vqaeval/contrastive.hpp"
#include "vqaeval/encoder.hpp"
#include "vqaeval/pairs.hpp"
#include "vqaeval/random.hpp"

namespace vqaeval {

struct TrainerConfig {
  double temperature = 0.05;
  NegativeTerm negatives = NegativeTerm::kInBatch;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  double peak_lr = 1e-3;
  double warmup_fraction = 0.1;
  double warmup_start_lr = 0.0;
  std::size_t batch_size = 32;
  int epochs = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(temperature >= kMinTemperature)) throw Error("trainer: temperature must be >= 1e-6");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1))
      throw Error("trainer: betas must be in [0, 1)");
    if (!(eps > 0)) throw Error("trainer: eps must be positive");
    if (!(weight_decay >= 0)) throw Error("trainer: weight_decay must be >= 0");
    if (!(peak_lr >= 0)) throw Error("trainer: peak_lr must be >= 0");
    if (!(warmup_fraction >= 0 && warmup_fraction < 1))
      throw Error("trainer: warmup_fraction must be in [0, 1)");
    if (batch_size < 2) throw Error("trainer: batch_size must be >= 2");
    if (epochs < 1) throw Error("trainer: epochs must be >= 1");
  }
};

// Linear warmup from `start_lr` to `peak_lr` over the first `warmup_steps`,
// then cosine decay to zero at `total_steps`.
class CosineSchedule {
 public:
  CosineSchedule(double peak_lr, std::size_t total_steps, std::size_t warmup_steps,
                 double start_lr = 0.0)
      : peak_(peak_lr), start_(start_lr), total_(total_steps), warmup_(warmup_steps) {
    if (warmup_ > total_) throw Error("schedule: warmup longer than training");
  }

  double at(std::size_t step) const {
    if (step < warmup_)
      return start_ + (peak_ - start_) * static_cast<double>(step) / static_cast<double>(warmup_);
    if (step >= total_) return 0.0;
    const double progress =
        static_cast<double>(step - warmup_) / static_cast<double>(total_ - warmup_);
    return peak_ * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
  }

  std::size_t total_steps() const { return total_; }
  std::size_t warmup_steps() const { return warmup_; }

 private:
  double peak_, start_;
  std::size_t total_, warmup_;
};

// Adam with decoupled weight decay: p <- p (1 - lr wd), then the Adam step.
class AdamW {
 public:
  AdamW(const EncoderModel& model, const TrainerConfig& cfg)
      : cfg_(cfg),
        m_emb_(model.embedding.data().size(), 0.0),
        v_emb_(model.embedding.data().size(), 0.0),
        m_proj_(model.projection.data().size(), 0.0),
        v_proj_(model.projection.data().size(), 0.0) {}

  void step(EncoderModel& model, const ModelGradient& grad, double lr) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    update(model.embedding.data(), grad.embedding.data(), m_emb_, v_emb_, lr, c1, c2);
    update(model.projection.data(), grad.projection.data(), m_proj_, v_proj_, lr, c1, c2);
  }

  std::size_t steps_taken() const { return t_; }

 private:
  void update(std::vector<double>& p, const std::vector<double>& g, std::vector<double>& m,
              std::vector<double>& v, double lr, double c1, double c2) const {
    const double decay = 1.0 - lr * cfg_.weight_decay;
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = cfg_.beta1 * m[k] + (1.0 - cfg_.beta1) * g[k];
      v[k] = cfg_.beta2 * v[k] + (1.0 - cfg_.beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] = p[k] * decay - lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }

  TrainerConfig cfg_;
  std::size_t t_ = 0;
  std::vector<double> m_emb_, v_emb_, m_proj_, v_proj_;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& what, std::vector<double> trace)
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& loss_trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

struct TrainResult {
  EncoderModel model;
  std::vector<double> loss_trace;  // one entry per optimizer step
  std::size_t steps = 0;
};

inline std::size_t steps_per_epoch(std::size_t n_pairs, std::size_t batch_size) {
  std::size_t full = n_pairs / batch_size;
  // A trailing batch of one triple has no in-batch negatives; it is dropped.
  return full + (n_pairs % batch_size >= 2 ? 1 : 0);
}

// Shuffles the pairs each epoch with a seeded generator and takes one AdamW
// step per batch.
inline TrainResult train(EncoderModel model, const std::vector<TrainingPair>& pairs,
                         const TrainerConfig& cfg) {
  cfg.validate();
  if (pairs.size() < 2) throw Error("train: need at least 2 training pairs");
  const std::size_t per_epoch = steps_per_epoch(pairs.size(), cfg.batch_size);
  const std::size_t total = per_epoch * static_cast<std::size_t>(cfg.epochs);
  const auto warmup = static_cast<std::size_t>(
      std::floor(cfg.warmup_fraction * static_cast<double>(total) + 0.5));
  const CosineSchedule schedule(cfg.peak_lr, total, warmup, cfg.warmup_start_lr);
  AdamW optimizer(model, cfg);
  const LossOptions loss_opts{cfg.temperature, cfg.negatives};

  TrainResult out;
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t b = 0; b < per_epoch; ++b) {
      TrainBatch batch;
      const std::size_t begin = b * cfg.batch_size;
      const std::size_t end = std::min(begin + cfg.batch_size, pairs.size());
      for (std::size_t k = begin; k < end; ++k) {
        const auto& p = pairs[order[k]];
        batch.anchors.push_back(p.anchor);
        batch.positives.push_back(p.positive);
        batch.hard_negatives.push_back(p.hard_negative);
      }
      LossAndGradient lg;
      try {
        lg = gradients(model, batch, loss_opts);
      } catch (const Error& e) {
        throw TrainingDiverged("train: step " + std::to_string(step) + ": " + e.what(),
                               out.loss_trace);
      }
      out.loss_trace.push_back(lg.loss);
      if (std::isnan(lg.loss))
        throw TrainingDiverged("train: loss is NaN at step " + std::to_string(step),
                               out.loss_trace);
      optimizer.step(model, lg.gradient, schedule.at(step));
      ++step;
    }
  }
  out.steps = step;
  out.model = std::move(model);
  return out;
}

}  // namespace vqaeval

#endif  // VQAEVAL_TRAINER_HPP_
