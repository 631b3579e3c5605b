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

#include <filesystem>
#include <fstream>
#include <random>

#include "httplib.h"
#include "vqaeval/annotation_server.hpp"

namespace vqaeval {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("vqaeval-annot-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

std::vector<Sample> make_samples(int n) {
  std::vector<Sample> out;
  for (int i = 1; i <= n; ++i) {
    Sample s;
    s.id = "t" + std::to_string(i);
    s.question = "question " + std::to_string(i);
    s.answer = "answer";
    s.response = "response " + std::to_string(i);
    s.source_dataset = SourceDataset::parse("okvqa");
    s.group_id = s.id;
    out.push_back(std::move(s));
  }
  return out;
}

AnnotationConfig three_annotators() {
  AnnotationConfig cfg;
  cfg.annotators = {"ann1", "ann2", "ann3"};
  return cfg;
}

std::string fixed_clock() { return "2026-01-01T00:00:00Z"; }

AnnotationEvent score(const std::string& who, int task, int value) {
  return {{}, who, task, AnnotationMode::kScore, Payload{value}};
}

AnnotationEvent label(const std::string& who, int task, FilterLabel l) {
  return {{}, who, task, AnnotationMode::kFilter, Payload{l}};
}

TEST(AnnotationStore, QueueServesLowestOpenTask) {
  AnnotationStore store(make_samples(3), three_annotators(), {}, fixed_clock);
  auto t = store.next_task("ann1", AnnotationMode::kScore);
  ASSERT_TRUE(t);
  EXPECT_EQ(t->task_id, 1);
  EXPECT_EQ(t->total, 3);
  EXPECT_EQ(t->response, "response 1");
  store.submit(score("ann1", 1, 5));
  EXPECT_EQ(store.next_task("ann1", AnnotationMode::kScore)->task_id, 2);
  // another annotator still sees task 1
  EXPECT_EQ(store.next_task("ann2", AnnotationMode::kScore)->task_id, 1);
  store.submit(score("ann1", 2, 5));
  store.submit(score("ann1", 3, 5));
  EXPECT_FALSE(store.next_task("ann1", AnnotationMode::kScore));
  // filter mode has its own queue
  EXPECT_EQ(store.next_task("ann1", AnnotationMode::kFilter)->task_id, 1);
  EXPECT_THROW(store.next_task("mallory", AnnotationMode::kScore), Error);
}

TEST(AnnotationStore, CompletionAndMeanScore) {
  AnnotationStore store(make_samples(2), three_annotators(), {}, fixed_clock);
  EXPECT_FALSE(store.submit(score("ann1", 1, 6)).complete);
  EXPECT_FALSE(store.submit(score("ann2", 1, 7)).complete);
  const auto ack = store.submit(score("ann3", 1, 8));
  EXPECT_TRUE(ack.complete);
  ASSERT_TRUE(ack.human_score);
  EXPECT_DOUBLE_EQ(*ack.human_score, 7.0);
  // a completed task leaves every queue
  EXPECT_EQ(store.next_task("ann1", AnnotationMode::kScore)->task_id, 2);
}

TEST(AnnotationStore, RejectsInvalidSubmissions) {
  AnnotationStore store(make_samples(2), three_annotators(), {}, fixed_clock);
  EXPECT_THROW(store.submit(score("ann1", 1, 11)), Error);
  EXPECT_THROW(store.submit(score("ann1", 1, -1)), Error);
  EXPECT_THROW(store.submit(score("mallory", 1, 5)), Error);
  EXPECT_THROW(store.submit(score("ann1", 3, 5)), Error);
  EXPECT_THROW(store.submit({{}, "ann1", 1, AnnotationMode::kScore, Payload{FilterLabel::kYes}}), Error);
  EXPECT_THROW(parse_payload(json(11), AnnotationMode::kScore), Error);
  EXPECT_THROW(parse_payload(json("maybe"), AnnotationMode::kFilter), Error);
  EXPECT_TRUE(store.snapshot()->audit.empty());
}

TEST(AnnotationStore, ResubmissionReplacesAndAudits) {
  AnnotationStore store(make_samples(1), three_annotators(), {}, fixed_clock);
  store.submit(score("ann1", 1, 6));
  store.submit(score("ann2", 1, 7));
  store.submit(score("ann3", 1, 8));
  store.reopen("ann1", 1, AnnotationMode::kScore);
  EXPECT_EQ(store.next_task("ann1", AnnotationMode::kScore)->task_id, 1);
  const auto ack = store.submit(score("ann1", 1, 9));
  EXPECT_DOUBLE_EQ(*ack.human_score, 8.0);
  const auto state = store.snapshot();
  ASSERT_EQ(state->audit.size(), 5u);
  EXPECT_EQ(std::get<int>(*state->audit[0].payload), 6);
  EXPECT_FALSE(state->audit[3].payload);
  EXPECT_EQ(state->audit[4].ts, "2026-01-01T00:00:00Z");
}

TEST(AnnotationStore, LogReplayAndTornTail) {
  TempDir dir;
  const auto log = dir.file("events.jsonl");
  std::shared_ptr<const AnnotationState> live;
  {
    AnnotationStore store(make_samples(3), three_annotators(), log, fixed_clock);
    store.submit(score("ann1", 1, 6));
    store.submit(score("ann2", 1, 7));
    store.submit(label("ann1", 2, FilterLabel::kNo));
    live = store.snapshot();
  }
  {
    std::ofstream f(log, std::ios::app | std::ios::binary);
    f << R"({"ts":"x","annotator_id":"ann3","task_id":1,"mo)";  // crash mid-write
  }
  AnnotationStore reloaded(make_samples(3), three_annotators(), log, fixed_clock);
  EXPECT_EQ(*reloaded.snapshot(), *live);
  EXPECT_EQ(reloaded.replay(live->audit), *live);
  // the torn record was trimmed, so appending continues cleanly
  reloaded.submit(score("ann3", 1, 8));
  const auto events = read_event_log(log);
  ASSERT_EQ(events.size(), 4u);
  EXPECT_EQ(events.back().annotator_id, "ann3");
  AnnotationStore again(make_samples(3), three_annotators(), log, fixed_clock);
  EXPECT_EQ(*again.snapshot(), *reloaded.snapshot());
}

TEST(AnnotationStore, CorruptLineBeforeTailIsAnError) {
  TempDir dir;
  const auto log = dir.file("events.jsonl");
  std::ofstream(log) << "not json\n"
                     << to_json(AnnotationEvent{"t", "ann1", 1, AnnotationMode::kScore, Payload{3}}).dump()
                     << "\n";
  EXPECT_THROW(read_event_log(log), Error);
}

TEST(AnnotationStore, FilterRules) {
  AnnotationStore store(make_samples(3), three_annotators(), {}, fixed_clock);
  const FilterLabel rows[3][3] = {{FilterLabel::kYes, FilterLabel::kYes, FilterLabel::kNo},
                                  {FilterLabel::kNo, FilterLabel::kNo, FilterLabel::kUnsure},
                                  {FilterLabel::kYes, FilterLabel::kUnsure, FilterLabel::kNo}};
  for (int t = 0; t < 3; ++t) {
    for (int a = 0; a < 3; ++a) {
      if (t == 2 && a == 2) {
        EXPECT_THROW(store.apply_filter_outcomes(), Error);
      }
      store.submit(label(store.config().annotators[static_cast<std::size_t>(a)], t + 1, rows[t][a]));
    }
  }
  const auto out = store.apply_filter_outcomes();
  ASSERT_EQ(out.kept.size(), 1u);
  EXPECT_EQ(out.kept[0].id, "t1");
  ASSERT_EQ(out.removed.size(), 2u);
  EXPECT_EQ(out.kept.size() + out.removed.size(), store.samples().size());
  EXPECT_EQ(out.log.size(), out.removed.size());
  EXPECT_EQ(out.log[0], "removed t2 (no,no,unsure)");

  auto strict = three_annotators();
  strict.filter_rule = FilterRule::kUnanimousYes;
  AnnotationStore unanimous(make_samples(1), strict, {}, fixed_clock);
  for (int a = 0; a < 3; ++a)
    unanimous.submit(label(strict.annotators[static_cast<std::size_t>(a)], 1, rows[0][a]));
  EXPECT_TRUE(unanimous.apply_filter_outcomes().kept.empty());
}

TEST(AnnotationStore, ExportRoundTripIncludingPartial) {
  TempDir dir;
  AnnotationStore store(make_samples(2), three_annotators(), {}, fixed_clock);
  store.submit(score("ann1", 1, 6));
  store.submit(score("ann2", 1, 7));
  store.submit(score("ann3", 1, 8));
  store.submit(score("ann2", 2, 4));
  const auto path = dir.file("annotated.jsonl");
  store.export_to(path);
  const auto back = load_samples(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back, store.annotated_samples());
  EXPECT_DOUBLE_EQ(*back[0].human_score, 7.0);
  EXPECT_EQ(back[0].raw_annotations->at("ann3"), 8);
  EXPECT_FALSE(back[1].human_score);
  EXPECT_EQ(back[1].raw_annotations->size(), 1u);
}

TEST(AnnotationStore, AgreementMatchesStatistic) {
  AnnotationConfig cfg;
  cfg.annotators = {"a", "b"};
  cfg.required = 2;
  AnnotationStore store(make_samples(4), cfg, {}, fixed_clock);
  EXPECT_FALSE(store.agreement().alpha);
  const int a[] = {1, 2, 3, 4}, b[] = {1, 2, 3, 5};
  for (int t = 0; t < 4; ++t) {
    store.submit(score("a", t + 1, a[t]));
    store.submit(score("b", t + 1, b[t]));
  }
  const auto rep = store.agreement();
  ASSERT_TRUE(rep.alpha);
  EXPECT_NEAR(*rep.alpha, 0.9369369369369369, 1e-12);
  EXPECT_EQ(rep.tasks_complete, 4u);
  EXPECT_EQ(rep.submissions, 8u);
  EXPECT_EQ(rep.per_annotator.at("b"), 4u);
}

TEST(AnnotationStore, ConfigValidation) {
  AnnotationConfig cfg;
  cfg.annotators = {"only"};
  EXPECT_THROW(AnnotationStore(make_samples(1), cfg), Error);
  cfg.required = 0;
  EXPECT_THROW(AnnotationStore(make_samples(1), cfg), Error);
}

TEST(AnnotationServer, HttpRoundTrip) {
  TempDir dir;
  AnnotationStore store(make_samples(2), three_annotators(), dir.file("events.jsonl"), fixed_clock);
  AnnotationServerConfig cfg;
  cfg.port = 0;
  cfg.export_path = dir.file("export.jsonl");
  AnnotationServer server(store, cfg);
  const int port = server.start();
  httplib::Client cli("127.0.0.1", port);

  auto next = cli.Get("/api/tasks/next?annotator=ann1&mode=score");
  ASSERT_TRUE(next);
  EXPECT_EQ(next->status, 200);
  EXPECT_EQ(json::parse(next->body)["task"]["task_id"], 1);
  EXPECT_EQ(cli.Get("/api/tasks/next?annotator=ann1&mode=rate")->status, 400);
  EXPECT_EQ(cli.Get("/api/tasks/next?annotator=nobody")->status, 404);

  auto post = [&](const json& body) { return cli.Post("/api/submit", body.dump(), "application/json"); };
  auto bad = post({{"annotator_id", "ann1"}, {"task_id", 1}, {"mode", "score"}, {"payload", 11}});
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  EXPECT_FALSE(json::parse(bad->body)["ok"].get<bool>());
  EXPECT_EQ(cli.Post("/api/submit", "{", "application/json")->status, 400);

  for (auto [who, v] : {std::pair{"ann1", 6}, {"ann2", 7}, {"ann3", 8}}) {
    auto r = post({{"annotator_id", who}, {"task_id", 1}, {"mode", "score"}, {"payload", v}});
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
  }
  const auto done = json::parse(post({{"annotator_id", "ann1"}, {"task_id", 2}, {"mode", "score"}, {"payload", 3}})->body);
  EXPECT_FALSE(done["complete"].get<bool>());
  EXPECT_TRUE(done["human_score"].is_null());

  const auto agreement = json::parse(cli.Get("/api/agreement")->body);
  EXPECT_EQ(agreement["progress"]["tasks_complete"], 1);
  EXPECT_EQ(agreement["progress"]["submissions"], 4);

  const auto exported = cli.Post("/api/export", "", "application/json");
  ASSERT_TRUE(exported);
  EXPECT_EQ(exported->status, 200);
  const auto back = load_samples(cfg.export_path);
  EXPECT_DOUBLE_EQ(*back[0].human_score, 7.0);
  server.stop();
}

TEST(AnnotationServer, ThreeAnnotatorsTenTasks) {
  TempDir dir;
  const auto log = dir.file("events.jsonl");
  AnnotationStore store(make_samples(10), three_annotators(), log, fixed_clock);
  AnnotationServerConfig cfg;
  cfg.port = 0;
  cfg.export_path = dir.file("export.jsonl");
  AnnotationServer server(store, cfg);
  httplib::Client cli("127.0.0.1", server.start());

  const std::map<std::string, int> pattern{{"ann1", 6}, {"ann2", 7}, {"ann3", 8}};
  for (const auto& [who, value] : pattern) {
    for (;;) {
      const auto next = json::parse(cli.Get("/api/tasks/next?annotator=" + who + "&mode=score")->body);
      if (next["task"].is_null()) break;
      const json body{{"annotator_id", who}, {"task_id", next["task"]["task_id"]}, {"mode", "score"},
                      {"payload", value}};
      ASSERT_EQ(cli.Post("/api/submit", body.dump(), "application/json")->status, 200);
    }
  }
  ASSERT_EQ(cli.Post("/api/export", "", "application/json")->status, 200);
  const auto exported = load_samples(cfg.export_path);
  ASSERT_EQ(exported.size(), 10u);
  for (const auto& s : exported) EXPECT_DOUBLE_EQ(*s.human_score, 7.0) << s.id;

  AnnotationMatrix direct(3, 10);
  for (std::size_t item = 0; item < 10; ++item)
    for (std::size_t a = 0; a < 3; ++a) direct.set(a, item, 6 + static_cast<int>(a));
  const auto agreement = json::parse(cli.Get("/api/agreement")->body);
  EXPECT_DOUBLE_EQ(agreement["alpha"].get<double>(), krippendorff_alpha(direct));
  server.stop();

  const auto live = store.snapshot();
  EXPECT_EQ(store.replay(read_event_log(log)), *live);
}

}  // namespace
}  // namespace vqaeval
