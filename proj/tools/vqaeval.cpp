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

// vqaeval command-line tool.

#include <signal.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "vqaeval/annotation_server.hpp"
#include "vqaeval/http_backend.hpp"
#include "vqaeval/http_text_generator.hpp"
#include "vqaeval/vqaeval.hpp"

namespace {

using namespace vqaeval;

// Options of one subcommand. Every registered value is echoed into the
// report's "config" block after parsing, so the report records what ran.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--report", report_path, "Write the JSON report to this file");
    app_->add_flag("--json", json_stdout, "Print the JSON report instead of the table");
  }

  template <class T>
  CLI::Option* add(const std::string& flag, T& var, const std::string& help) {
    auto* o = app_->add_option(flag, var, help)->capture_default_str();
    echo_.emplace_back(o->get_lnames().front(), [&var] { return json(var); });
    return o;
  }

  CLI::Option* flag(const std::string& flag, bool& var, const std::string& help) {
    auto* o = app_->add_flag(flag, var, help);
    echo_.emplace_back(o->get_lnames().front(), [&var] { return json(var); });
    return o;
  }

  json resolved() const {
    json j = json::object();
    for (const auto& [name, get] : echo_) j[name] = get();
    return j;
  }

  CLI::App* app() const { return app_; }

  std::string report_path;
  bool json_stdout = false;

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<json()>>> echo_;
};

struct Outcome {
  json results = json::object();
  std::vector<std::string> warnings;
  std::string table;
  int exit_code = 0;
};

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }

  std::string str() const {
    std::vector<std::size_t> width;
    for (const auto& r : rows_)
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (width.size() <= i) width.push_back(0);
        width[i] = std::max(width[i], r[i].size());
      }
    std::ostringstream out;
    for (std::size_t k = 0; k < rows_.size(); ++k) {
      for (std::size_t i = 0; i < rows_[k].size(); ++i) {
        const bool last = i + 1 == rows_[k].size();
        out << (i ? "  " : "") << std::left
            << std::setw(last ? 0 : static_cast<int>(width[i])) << rows_[k][i];
      }
      out << '\n';
      if (k == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w;
        out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
      }
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double v, int precision = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

std::string num(const std::optional<double>& v, int precision = 6) {
  return v ? num(*v, precision) : "n/a";
}

template <class Map>
auto lookup_choice(const Map& choices, const std::string& value, const std::string& what) {
  auto it = choices.find(value);
  if (it == choices.end()) throw Error("unknown " + what + " '" + value + "'");
  return it->second;
}

void require_human_scores(const std::vector<Sample>& samples) {
  for (const auto& s : samples)
    if (!s.human_score) throw Error("sample '" + s.id + "' has no human_score");
}

SynonymLookup load_lexicon(const std::string& wordnet_dir, const std::string& frequencies) {
  SynonymLookup lookup;
  if (!wordnet_dir.empty()) wordnet::load_directory(wordnet_dir, lookup);
  if (!frequencies.empty()) load_frequencies(frequencies, lookup);
  return lookup;
}

std::string bearer_from_env() {
  const char* token = std::getenv("VQAEVAL_API_TOKEN");
  return token ? token : "";
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs {
  std::string in, out, backend = "toy", metric, store, model, url = "http://127.0.0.1:8080",
              endpoint = "/v1/embeddings", api_model, cache, style = "qa", rouge_mode = "f1",
              wordnet, frequencies;
  std::size_t batch_size = 64;
  double bleu_epsilon = 0;
  bool no_question = false;
};

Outcome run_score(const ScoreArgs& a) {
  const auto samples = load_samples(a.in);
  require_human_scores(samples);
  Outcome o;
  PredictionSet preds;
  if (!a.metric.empty()) {
    MetricConfig mc;
    mc.rouge_mode = lookup_choice(
        std::map<std::string, RougeMode>{{"recall", RougeMode::kRecall},
                                         {"precision", RougeMode::kPrecision},
                                         {"f1", RougeMode::kF1}},
        a.rouge_mode, "rouge mode");
    mc.bleu.epsilon = a.bleu_epsilon;
    mc.concat_question = !a.no_question;
    const auto metric = parse_metric(a.metric);
    const auto lexicon = load_lexicon(a.wordnet, a.frequencies);
    if (metric == Metric::kMeteor && lexicon.empty())
      o.warnings.push_back("meteor: no lexicon given, synonym stage disabled");
    std::size_t empty = 0;
    for (const auto& s : samples) {
      const auto m = formulaic_score(s.question, s.answer, s.response, metric, mc, lexicon);
      empty += m.empty_input ? 1 : 0;
      preds.add({s.id, m.value, *s.human_score, s.part, s.source_dataset.name(), s.group_id});
    }
    if (empty) o.warnings.push_back(std::to_string(empty) + " samples had empty input; scored 0");
    o.results["scorer"] = std::string(to_string(metric));
  } else {
    std::unique_ptr<EmbeddingBackend> backend;
    if (a.backend == "file") {
      if (a.store.empty()) throw Error("--backend file needs --store");
      backend = std::make_unique<FileStoreBackend>(a.store);
    } else if (a.backend == "toy") {
      if (a.model.empty()) throw Error("--backend toy needs --model (see `vqaeval train`)");
      backend = std::make_unique<ToyEncoderBackend>(
          std::make_shared<const EncoderModel>(load_encoder(a.model)));
    } else if (a.backend == "http") {
      HttpBackendConfig hc;
      hc.base_url = a.url;
      hc.path = a.endpoint;
      hc.model = a.api_model;
      hc.bearer_token = bearer_from_env();
      hc.batch_size = a.batch_size;
      hc.cache_path = a.cache;
      backend = std::make_unique<HttpEmbeddingBackend>(hc);
    } else {
      throw Error("unknown backend '" + a.backend + "' (file, http or toy)");
    }
    ScoreOptions so;
    so.style = lookup_choice(std::map<std::string, PromptStyle>{{"qa", PromptStyle::kQuestionAnswer},
                                                                {"summarize", PromptStyle::kSummarizeOneWord}},
                             a.style, "prompt style");
    so.batch_size = a.batch_size;
    preds = score_dataset(*backend, samples, so);
    o.results["scorer"] = std::string(backend->kind());
  }
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw Error("cannot write " + a.out);
    write_predictions(f, preds);
  }
  Table t({"id", "part", "predicted", "human"});
  double sum = 0;
  for (const auto& e : preds.entries()) {
    t.row({e.sample_id, std::string(to_string(e.part)), num(e.predicted), num(e.human, 2)});
    sum += e.predicted;
  }
  o.results["n_samples"] = preds.size();
  o.results["mean_predicted"] = preds.empty() ? 0.0 : sum / static_cast<double>(preds.size());
  o.table = t.str();
  return o;
}

// ---------------------------------------------------------------------------
// assess

struct AssessArgs {
  std::string in, variance = "population";
  double floor = 1e-12;
};

Outcome run_assess(const AssessArgs& a) {
  PropertyConfig cfg;
  cfg.variance_floor = a.floor;
  cfg.variance = lookup_choice(
      std::map<std::string, VarianceConvention>{{"population", VarianceConvention::kPopulation},
                                                {"sample", VarianceConvention::kSample}},
      a.variance, "variance convention");
  const auto report = assess(load_predictions(a.in), cfg);
  Outcome o;
  o.results = to_json(report);
  o.warnings = report.warnings;
  Table t({"property", "value", "x100"});
  for (const auto& [part, v] : report.alignment_per_part)
    t.row({"alignment " + std::string(to_string(part)), num(v), num(v * 100, 2)});
  t.row({"alignment avg", num(report.alignment_avg),
         report.alignment_avg ? num(*report.alignment_avg * 100, 2) : "n/a"});
  t.row({"consistency", num(report.consistency), ""});
  t.row({"generalization", num(report.generalization), ""});
  o.table = t.str();
  for (const auto& [field, why] : report.missing)
    o.table += (why.rfind(field, 0) == 0 ? why : field + ": " + why) + "\n";
  return o;
}

// ---------------------------------------------------------------------------
// augment

struct AugmentArgs {
  std::string in, out, task = "all", nli, wordnet, frequencies, templates, descriptions, llm_url,
              llm_endpoint = "/v1/generate", llm_model;
  std::uint64_t seed = 0;
  int max_attempts = 3;
};

Outcome run_augment(const AugmentArgs& a) {
  AugmentTasks tasks{false, false, false, false};
  if (a.task == "all") {
    tasks = {true, true, true, true};
  } else if (a.task == "nli") {
    tasks.nli = true;
  } else if (a.task == "candidates") {
    tasks.candidates = true;
  } else if (a.task == "synant") {
    tasks.synonym_antonym = true;
  } else if (a.task == "descriptions") {
    tasks.descriptions = true;
  } else {
    throw Error("unknown task '" + a.task + "' (nli, candidates, synant, descriptions or all)");
  }
  Outcome o;
  AugmentInputs in;
  if (!a.in.empty()) in.samples = load_samples(a.in);
  if (tasks.nli) {
    if (!a.nli.empty()) {
      std::ifstream f(a.nli);
      if (!f) throw Error("cannot open " + a.nli);
      in.nli = read_nli(f);
    } else if (a.task == "nli") {
      throw Error("--task nli needs --nli");
    } else {
      tasks.nli = false;
      o.warnings.push_back("nli: no --nli file given, task skipped");
    }
  }
  if ((tasks.candidates || tasks.synonym_antonym || tasks.descriptions) && a.in.empty())
    throw Error("--in is required for sample-based tasks");
  SynonymLookup lexicon;
  if (tasks.synonym_antonym) {
    if (a.wordnet.empty()) {
      if (a.task == "synant") throw Error("--task synant needs --wordnet");
      tasks.synonym_antonym = false;
      o.warnings.push_back("synonym_antonym: no --wordnet directory given, task skipped");
    } else {
      lexicon = load_lexicon(a.wordnet, a.frequencies);
      in.lookup = &lexicon;
    }
  }
  if (!a.templates.empty()) in.templates = load_templates(a.templates);
  DescriptionCache cache;
  if (tasks.descriptions) {
    if (!a.descriptions.empty() && std::filesystem::exists(a.descriptions))
      cache = DescriptionCache::load(a.descriptions);
    if (!a.llm_url.empty()) {
      if (a.descriptions.empty()) throw Error("--llm-url needs --descriptions to cache replies");
      HttpTextGenerator llm({a.llm_url, a.llm_endpoint, a.llm_model, bearer_from_env()});
      const auto rep = generate_descriptions_batch(in.samples, llm, cache, a.max_attempts);
      std::ofstream f(a.descriptions, std::ios::binary);
      cache.write(f);
      o.results["description_generation"] = {{"requested", rep.requested},
                                              {"augmented", rep.augmented},
                                              {"skipped", rep.skipped},
                                              {"from_cache", rep.from_cache}};
      o.warnings.insert(o.warnings.end(), rep.log.begin(), rep.log.end());
    }
    in.descriptions = &cache;
  }
  const auto run = run_augmentation(in, tasks, a.seed);
  if (!a.out.empty()) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) throw Error("cannot write " + a.out);
    write_pairs(f, run.pairs);
  }
  o.results.update(to_json(run));
  Table t({"task", "opportunities", "emitted", "skipped"});
  for (const auto& [task, c] : run.counts)
    t.row({task, std::to_string(c.opportunities), std::to_string(c.emitted),
           std::to_string(c.skipped_total())});
  o.table = t.str() + "pairs: " + std::to_string(run.pairs.size()) + "\n";
  return o;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string pairs, out, init, negatives = "in_batch";
  std::size_t dim = 64, out_dim = 64, batch_size = 32;
  int min_count = 1, epochs = 1;
  double lr = 1e-3, warmup = 0.1, weight_decay = 0.01, temperature = 0.05;
  std::uint64_t seed = 0;
};

NegativeTerm parse_negatives(const std::string& s) {
  return lookup_choice(std::map<std::string, NegativeTerm>{
                           {"in_batch", NegativeTerm::kInBatch},
                           {"own_negative_repeated", NegativeTerm::kOwnNegativeRepeated}},
                       s, "negative term");
}

Outcome run_train(const TrainArgs& a) {
  const auto pairs = load_pairs(a.pairs);
  EncoderModel model;
  if (!a.init.empty()) {
    model = load_encoder(a.init);
  } else {
    std::vector<std::string> texts;
    for (const auto& p : pairs) texts.insert(texts.end(), {p.anchor, p.positive, p.hard_negative});
    EncoderInit init;
    init.dim = a.dim;
    init.out_dim = a.out_dim;
    init.seed = a.seed;
    model = make_encoder(build_vocabulary(texts, a.min_count), init);
  }
  TrainerConfig cfg;
  cfg.temperature = a.temperature;
  cfg.negatives = parse_negatives(a.negatives);
  cfg.weight_decay = a.weight_decay;
  cfg.peak_lr = a.lr;
  cfg.warmup_fraction = a.warmup;
  cfg.batch_size = a.batch_size;
  cfg.epochs = a.epochs;
  cfg.seed = a.seed;
  const auto result = train(std::move(model), pairs, cfg);
  save_encoder(result.model, a.out);

  Outcome o;
  const std::size_t per_epoch = steps_per_epoch(pairs.size(), a.batch_size);
  json epochs = json::array();
  Table t({"epoch", "mean loss"});
  for (int e = 0; e < a.epochs; ++e) {
    double sum = 0;
    for (std::size_t k = 0; k < per_epoch; ++k) sum += result.loss_trace[e * per_epoch + k];
    const double mean = sum / static_cast<double>(per_epoch);
    epochs.push_back(mean);
    t.row({std::to_string(e + 1), num(mean)});
  }
  o.results = {{"steps", result.steps},
               {"vocab_size", result.model.vocab.size()},
               {"dim", result.model.dim()},
               {"out_dim", result.model.out_dim()},
               {"loss_first", result.loss_trace.front()},
               {"loss_last", result.loss_trace.back()},
               {"epoch_mean_loss", epochs},
               {"checkpoint", a.out}};
  if (pairs.size() % a.batch_size == 1)
    o.warnings.push_back("last pair of each epoch dropped: a batch of one has no negatives");
  o.table = t.str();
  return o;
}

// ---------------------------------------------------------------------------
// gradcheck

struct GradcheckArgs {
  std::string model, pairs, negatives = "in_batch";
  std::size_t coordinates = 100, batch_size = 4;
  double step = 1e-5, temperature = 0.05, tolerance = 1e-4;
  std::uint64_t seed = 0;
};

TrainBatch builtin_batch() {
  const char* rows[][3] = {
      {"Question: what animal is this Answer: dog", "Question: what animal is this Answer: puppy",
       "Question: what animal is this Answer: car"},
      {"Question: what color is the bus Answer: red", "Question: what color is the bus Answer: crimson",
       "Question: what color is the bus Answer: blue"},
      {"Question: how many people Answer: two", "Question: how many people Answer: 2",
       "Question: how many people Answer: five"},
      {"Question: what sport is shown Answer: tennis", "The answer to this question is tennis.",
       "The answer to this question is soccer."},
  };
  TrainBatch b;
  for (const auto& r : rows) {
    b.anchors.push_back(r[0]);
    b.positives.push_back(r[1]);
    b.hard_negatives.push_back(r[2]);
  }
  return b;
}

Outcome run_gradcheck(const GradcheckArgs& a) {
  TrainBatch batch;
  if (!a.pairs.empty()) {
    const auto pairs = load_pairs(a.pairs);
    for (std::size_t i = 0; i < std::min(a.batch_size, pairs.size()); ++i) {
      batch.anchors.push_back(pairs[i].anchor);
      batch.positives.push_back(pairs[i].positive);
      batch.hard_negatives.push_back(pairs[i].hard_negative);
    }
  } else {
    batch = builtin_batch();
  }
  EncoderModel model;
  if (!a.model.empty()) {
    model = load_encoder(a.model);
  } else {
    std::vector<std::string> texts = batch.anchors;
    texts.insert(texts.end(), batch.positives.begin(), batch.positives.end());
    texts.insert(texts.end(), batch.hard_negatives.begin(), batch.hard_negatives.end());
    EncoderInit init;
    init.seed = a.seed;
    model = make_encoder(build_vocabulary(texts), init);
  }
  const LossOptions lo{a.temperature, parse_negatives(a.negatives)};
  GradCheckOptions go;
  go.coordinates = a.coordinates;
  go.step = a.step;
  go.seed = a.seed;
  const auto r = gradient_check(std::move(model), batch, lo, go);

  Outcome o;
  const bool pass = r.max_rel_error < a.tolerance;
  std::size_t in_projection = 0;
  for (const auto& e : r.entries) in_projection += e.projection ? 1 : 0;
  o.results = {{"coordinates", r.entries.size()},
               {"projection_coordinates", in_projection},
               {"embedding_coordinates", r.entries.size() - in_projection},
               {"max_relative_error", r.max_rel_error},
               {"tolerance", a.tolerance},
               {"pass", pass}};
  std::ostringstream s;
  s << "checked " << r.entries.size() << " coordinates\n"
    << "max relative error: " << std::scientific << std::setprecision(3) << r.max_rel_error << '\n'
    << (pass ? "PASS" : "FAIL") << '\n';
  o.table = s.str();
  o.exit_code = pass ? 0 : 1;
  return o;
}

// ---------------------------------------------------------------------------
// stats

struct StatsArgs {
  std::string predictions, annotations, alpha_metric = "interval";
};

Outcome run_stats(const StatsArgs& a) {
  if (a.predictions.empty() && a.annotations.empty())
    throw Error("stats needs --predictions and/or --annotations");
  Outcome o;
  Table t({"statistic", "value"});
  if (!a.predictions.empty()) {
    const auto preds = load_predictions(a.predictions);
    std::vector<double> x, y;
    for (const auto& e : preds.entries()) {
      x.push_back(e.predicted);
      y.push_back(e.human);
    }
    const double rho = spearman(x, y);
    o.results["spearman"] = rho;
    t.row({"spearman (all)", num(rho)});
    json per_part = json::object();
    for (auto part : kAllParts) {
      const auto slice = preds.filter([&](const PredictionEntry& e) { return e.part == part; });
      if (slice.size() < 2) continue;
      std::vector<double> px, py;
      for (const auto& e : slice.entries()) {
        px.push_back(e.predicted);
        py.push_back(e.human);
      }
      try {
        const double v = spearman(px, py);
        per_part[std::string(to_string(part))] = v;
        t.row({"spearman " + std::string(to_string(part)), num(v)});
      } catch (const Error& e) {
        o.warnings.push_back(std::string(to_string(part)) + ": " + e.what());
      }
    }
    o.results["spearman_per_part"] = per_part;
  }
  if (!a.annotations.empty()) {
    const auto samples = load_samples(a.annotations);
    std::set<std::string> annotators;
    for (const auto& s : samples)
      if (s.raw_annotations)
        for (const auto& [who, v] : *s.raw_annotations) annotators.insert(who);
    const std::vector<std::string> order(annotators.begin(), annotators.end());
    AnnotationMatrix m(order.size(), samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].raw_annotations)
        for (std::size_t k = 0; k < order.size(); ++k)
          if (auto it = samples[i].raw_annotations->find(order[k]); it != samples[i].raw_annotations->end())
            m.set(k, i, it->second);
    const auto metric = lookup_choice(
        std::map<std::string, AlphaMetric>{{"interval", AlphaMetric::kInterval},
                                           {"ordinal", AlphaMetric::kOrdinal}},
        a.alpha_metric, "alpha metric");
    const double alpha = krippendorff_alpha(m, metric);
    o.results["krippendorff_alpha"] = {{"metric", a.alpha_metric}, {"value", alpha},
                                       {"annotators", order.size()}, {"items", samples.size()}};
    t.row({"krippendorff alpha (" + a.alpha_metric + ")", num(alpha)});
  }
  o.table = t.str();
  return o;
}

// ---------------------------------------------------------------------------
// split

struct SplitArgs {
  std::string in, ratio = "3:7", validation_out, test_out;
  std::uint64_t seed = 0;
};

Outcome run_split(const SplitArgs& a) {
  const auto split = split_validation_test(load_samples(a.in), parse_ratio(a.ratio), a.seed);
  if (!a.validation_out.empty()) save_samples(a.validation_out, split.validation);
  if (!a.test_out.empty()) save_samples(a.test_out, split.test);
  auto ids = [](const std::vector<Sample>& v) {
    std::set<std::string> g;
    for (const auto& s : v) g.insert(s.group_id);
    return g.size();
  };
  Outcome o;
  o.warnings = split.warnings;
  o.results = {{"validation", {{"samples", split.validation.size()}, {"groups", ids(split.validation)}}},
               {"test", {{"samples", split.test.size()}, {"groups", ids(split.test)}}}};
  Table t({"side", "samples", "groups"});
  t.row({"validation", std::to_string(split.validation.size()), std::to_string(ids(split.validation))});
  t.row({"test", std::to_string(split.test.size()), std::to_string(ids(split.test))});
  o.table = t.str();
  return o;
}

// ---------------------------------------------------------------------------
// annotate-serve and export

struct AnnotationArgs {
  std::string in, log = "annotations.log.jsonl", out = "annotated.jsonl", host = "127.0.0.1",
              ui_dir, filter_rule = "majority";
  std::vector<std::string> annotators;
  std::size_t required = 3;
  int port = 8765;
  bool filter = false;
};

AnnotationConfig annotation_config(const AnnotationArgs& a) {
  AnnotationConfig cfg;
  cfg.annotators = a.annotators;
  cfg.required = a.required;
  cfg.filter_rule = lookup_choice(std::map<std::string, FilterRule>{{"majority", FilterRule::kMajorityYes},
                                                                    {"unanimous", FilterRule::kUnanimousYes}},
                                  a.filter_rule, "filter rule");
  return cfg;
}

int run_serve(const AnnotationArgs& a) {
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  AnnotationStore store(load_samples(a.in), annotation_config(a), a.log);
  AnnotationServer server(store, {a.host, a.port, a.ui_dir, a.out});
  const int port = server.start();
  std::cout << "annotation API listening on http://" << a.host << ":" << port << std::endl;
  int sig = 0;
  sigwait(&stop_signals, &sig);
  server.stop();
  std::cout << "stopped" << std::endl;
  return 0;
}

Outcome run_export(const AnnotationArgs& a) {
  AnnotationStore store(load_samples(a.in), annotation_config(a), a.log);
  Outcome o;
  const auto agreement = store.agreement();
  o.results["agreement"] = {{"alpha", agreement.alpha ? json(*agreement.alpha) : json(nullptr)},
                            {"tasks_complete", agreement.tasks_complete},
                            {"tasks_total", agreement.tasks_total}};
  if (!agreement.alpha) o.warnings.push_back("agreement unavailable: " + agreement.unavailable_reason);
  Table t({"item", "count"});
  if (a.filter) {
    const auto outcome = store.apply_filter_outcomes();
    save_samples(a.out, outcome.kept);
    o.results["kept"] = outcome.kept.size();
    o.results["removed"] = outcome.removed.size();
    o.results["removal_log"] = outcome.log;
    t.row({"kept", std::to_string(outcome.kept.size())});
    t.row({"removed", std::to_string(outcome.removed.size())});
  } else {
    const auto samples = store.annotated_samples();
    save_samples(a.out, samples);
    std::size_t scored = 0;
    for (const auto& s : samples) scored += s.human_score ? 1 : 0;
    o.results["samples"] = samples.size();
    o.results["with_human_score"] = scored;
    t.row({"samples", std::to_string(samples.size())});
    t.row({"with human score", std::to_string(scored)});
  }
  o.results["out"] = a.out;
  o.table = t.str();
  return o;
}

// ---------------------------------------------------------------------------

void emit(const Options& opts, const std::string& command, const Outcome& o) {
  json config = opts.resolved();
  config["subcommand"] = command;
  const json report{{"config", config},
                    {"results", o.results},
                    {"warnings", o.warnings},
                    {"version", kVersion}};
  const auto text = report.dump(2) + "\n";
  if (!opts.report_path.empty()) {
    std::ofstream f(opts.report_path, std::ios::binary);
    if (!f) throw Error("cannot write report " + opts.report_path);
    f << text;
  }
  if (opts.json_stdout) {
    std::cout << text;
  } else {
    std::cout << o.table;
    for (const auto& w : o.warnings) std::cerr << "warning: " << w << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate free-form VQA answers and the evaluators that score them"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");
  app.require_subcommand(1);

  std::string command;
  std::vector<std::unique_ptr<Options>> all_options;
  Options* active = nullptr;
  auto subcommand = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    all_options.push_back(std::make_unique<Options>(sub));
    Options* opts = all_options.back().get();
    sub->callback([&, name, opts] {
      command = name;
      active = opts;
    });
    return opts;
  };

  ScoreArgs score;
  {
    auto* o = subcommand("score", "Score samples with an embedding backend or a text metric");
    o->add("--in", score.in, "Samples JSONL")->required()->check(CLI::ExistingFile);
    o->add("--out", score.out, "Write predictions JSONL");
    o->add("--backend", score.backend, "file, http or toy");
    o->add("--metric", score.metric, "Use a text metric instead: bleu2, bleu4, rouge2, rougeL, meteor");
    o->add("--store", score.store, "Embedding store JSONL for --backend file");
    o->add("--model", score.model, "Encoder checkpoint for --backend toy");
    o->add("--url", score.url, "Embedding endpoint base URL for --backend http");
    o->add("--endpoint", score.endpoint, "Embedding endpoint path");
    o->add("--api-model", score.api_model, "Model name sent to the endpoint");
    o->add("--cache", score.cache, "Cache file for endpoint replies");
    o->add("--batch-size", score.batch_size, "Texts per embedding request");
    o->add("--style", score.style, "Prompt style: qa or summarize");
    o->add("--rouge-mode", score.rouge_mode, "recall, precision or f1");
    o->add("--bleu-epsilon", score.bleu_epsilon, "Smoothing added to zero n-gram precisions");
    o->flag("--no-question", score.no_question, "Compare bare answers instead of question+answer");
    o->add("--wordnet", score.wordnet, "WordNet dict directory for meteor synonyms");
    o->add("--frequencies", score.frequencies, "Word frequency file");
  }

  AssessArgs assess_args;
  {
    auto* o = subcommand("assess", "Compute alignment, consistency and generalization");
    o->add("--in", assess_args.in, "Predictions JSONL")->required()->check(CLI::ExistingFile);
    o->add("--variance", assess_args.variance, "population or sample");
    o->add("--floor", assess_args.floor, "Variance floor before the logarithm");
  }

  AugmentArgs augment_args;
  {
    auto* o = subcommand("augment", "Build contrastive training pairs");
    o->add("--in", augment_args.in, "Samples JSONL");
    o->add("--out", augment_args.out, "Write pairs JSONL");
    o->add("--task", augment_args.task, "nli, candidates, synant, descriptions or all");
    o->add("--nli", augment_args.nli, "NLI triples JSONL");
    o->add("--wordnet", augment_args.wordnet, "WordNet dict directory");
    o->add("--frequencies", augment_args.frequencies, "Word frequency file");
    o->add("--templates", augment_args.templates, "Answer template file");
    o->add("--descriptions", augment_args.descriptions, "Description cache JSONL");
    o->add("--llm-url", augment_args.llm_url, "Text-generation endpoint for missing descriptions");
    o->add("--llm-endpoint", augment_args.llm_endpoint, "Text-generation endpoint path");
    o->add("--llm-model", augment_args.llm_model, "Model name sent to the text-generation endpoint");
    o->add("--max-attempts", augment_args.max_attempts, "Attempts per description request");
    o->add("--seed", augment_args.seed, "Seed for negative sampling");
  }

  TrainArgs train_args;
  {
    auto* o = subcommand("train", "Train the toy encoder contrastively");
    o->add("--pairs", train_args.pairs, "Training pairs JSONL")->required()->check(CLI::ExistingFile);
    o->add("--out", train_args.out, "Checkpoint to write")->required();
    o->add("--init", train_args.init, "Start from this checkpoint");
    o->add("--dim", train_args.dim, "Embedding width");
    o->add("--out-dim", train_args.out_dim, "Projection width");
    o->add("--min-count", train_args.min_count, "Vocabulary minimum count");
    o->add("--epochs", train_args.epochs, "Epochs");
    o->add("--batch-size", train_args.batch_size, "Triples per batch");
    o->add("--lr", train_args.lr, "Peak learning rate");
    o->add("--warmup", train_args.warmup, "Warmup fraction of total steps");
    o->add("--weight-decay", train_args.weight_decay, "Decoupled weight decay");
    o->add("--temperature", train_args.temperature, "Softmax temperature");
    o->add("--negatives", train_args.negatives, "in_batch or own_negative_repeated");
    o->add("--seed", train_args.seed, "Initialization and shuffling seed");
  }

  GradcheckArgs grad_args;
  {
    auto* o = subcommand("gradcheck", "Compare analytic gradients with finite differences");
    o->add("--model", grad_args.model, "Checkpoint (default: seeded toy model)");
    o->add("--pairs", grad_args.pairs, "Pairs JSONL (default: built-in batch)");
    o->add("--batch-size", grad_args.batch_size, "Triples taken from --pairs");
    o->add("--coordinates", grad_args.coordinates, "Parameters to check");
    o->add("--step", grad_args.step, "Central difference step");
    o->add("--temperature", grad_args.temperature, "Softmax temperature");
    o->add("--negatives", grad_args.negatives, "in_batch or own_negative_repeated");
    o->add("--tolerance", grad_args.tolerance, "Maximum relative error");
    o->add("--seed", grad_args.seed, "Model and coordinate seed");
  }

  StatsArgs stats_args;
  {
    auto* o = subcommand("stats", "Spearman correlation and Krippendorff's alpha");
    o->add("--predictions", stats_args.predictions, "Predictions JSONL")->check(CLI::ExistingFile);
    o->add("--annotations", stats_args.annotations, "Samples JSONL with raw_annotations")
        ->check(CLI::ExistingFile);
    o->add("--alpha-metric", stats_args.alpha_metric, "interval or ordinal");
  }

  SplitArgs split_args;
  {
    auto* o = subcommand("split", "Group-aware validation/test split");
    o->add("--in", split_args.in, "Samples JSONL")->required()->check(CLI::ExistingFile);
    o->add("--ratio", split_args.ratio, "validation:test");
    o->add("--seed", split_args.seed, "Shuffle seed");
    o->add("--validation-out", split_args.validation_out, "Validation JSONL");
    o->add("--test-out", split_args.test_out, "Test JSONL");
  }

  AnnotationArgs serve_args, export_args;
  auto annotation_options = [](Options* o, AnnotationArgs& a) {
    o->add("--in", a.in, "Samples JSONL")->required()->check(CLI::ExistingFile);
    o->add("--annotators", a.annotators, "Registered annotator ids")->required()->delimiter(',');
    o->add("--required", a.required, "Submissions that complete a task");
    o->add("--log", a.log, "Append-only event log");
    o->add("--filter-rule", a.filter_rule, "majority or unanimous");
  };
  {
    auto* serve_opts = subcommand("annotate-serve", "Serve the annotation HTTP API");
    annotation_options(serve_opts, serve_args);
    serve_opts->add("--host", serve_args.host, "Bind address");
    serve_opts->add("--port", serve_args.port, "Port (0 picks one)");
    serve_opts->add("--ui-dir", serve_args.ui_dir, "Static UI directory served at /");
    serve_opts->add("--export", serve_args.out, "Export path for POST /api/export");
  }
  {
    auto* o = subcommand("export", "Export annotated samples from the event log");
    annotation_options(o, export_args);
    o->add("--out", export_args.out, "Output JSONL");
    o->flag("--filter", export_args.filter, "Apply the filter outcome and keep passing samples only");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (command == "annotate-serve") return run_serve(serve_args);
    Outcome out;
    if (command == "score") out = run_score(score);
    else if (command == "assess") out = run_assess(assess_args);
    else if (command == "augment") out = run_augment(augment_args);
    else if (command == "train") out = run_train(train_args);
    else if (command == "gradcheck") out = run_gradcheck(grad_args);
    else if (command == "stats") out = run_stats(stats_args);
    else if (command == "split") out = run_split(split_args);
    else if (command == "export") out = run_export(export_args);
    emit(*active, command, out);
    return out.exit_code;
  } catch (const LoadError& e) {
    std::cerr << "error: " << e.what() << '\n';
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
