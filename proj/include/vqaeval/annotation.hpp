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

// Annotation bookkeeping for score annotation and the manual filter: a task
// queue per annotator whose state is a fold over an append-only JSONL event
// log.

#ifndef VQAEVAL_ANNOTATION_HPP_
#define VQAEVAL_ANNOTATION_HPP_

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "vqaeval/core.hpp"
#include "vqaeval/stats.hpp"

namespace vqaeval {

enum class AnnotationMode { kScore, kFilter };

inline std::string_view to_string(AnnotationMode m) {
  return m == AnnotationMode::kScore ? "score" : "filter";
}

inline std::optional<AnnotationMode> parse_mode(std::string_view s) {
  if (s == "score") return AnnotationMode::kScore;
  if (s == "filter") return AnnotationMode::kFilter;
  return std::nullopt;
}

enum class FilterLabel { kYes, kNo, kUnsure };

inline std::string_view to_string(FilterLabel l) {
  switch (l) {
    case FilterLabel::kYes: return "yes";
    case FilterLabel::kNo: return "no";
    case FilterLabel::kUnsure: return "unsure";
  }
  return "unsure";
}

inline std::optional<FilterLabel> parse_label(std::string_view s) {
  if (s == "yes") return FilterLabel::kYes;
  if (s == "no") return FilterLabel::kNo;
  if (s == "unsure") return FilterLabel::kUnsure;
  return std::nullopt;
}

// Integer score 0..10 in score mode, a label in filter mode.
using Payload = std::variant<int, FilterLabel>;

struct AnnotationEvent {
  std::string ts;
  std::string annotator_id;
  int task_id = 0;
  AnnotationMode mode = AnnotationMode::kScore;
  std::optional<Payload> payload;  // empty: reopen the task for this annotator

  friend bool operator==(const AnnotationEvent&, const AnnotationEvent&) = default;
};

inline json to_json(const AnnotationEvent& e) {
  json payload = nullptr;
  if (e.payload) {
    if (const int* s = std::get_if<int>(&*e.payload)) payload = *s;
    else payload = std::string(to_string(std::get<FilterLabel>(*e.payload)));
  }
  return json{{"ts", e.ts},
              {"annotator_id", e.annotator_id},
              {"task_id", e.task_id},
              {"mode", std::string(to_string(e.mode))},
              {"payload", payload}};
}

// Parses and validates a payload for `mode`; throws Error with the reason.
inline Payload parse_payload(const json& p, AnnotationMode mode) {
  if (mode == AnnotationMode::kScore) {
    if (!p.is_number_integer()) throw Error("score payload must be an integer 0..10");
    const auto v = p.get<long long>();
    if (v < 0 || v > 10)
      throw Error("score " + std::to_string(v) + " outside 0..10");
    return static_cast<int>(v);
  }
  if (!p.is_string()) throw Error("filter payload must be one of yes, no, unsure");
  auto label = parse_label(p.get<std::string>());
  if (!label) throw Error("filter label '" + p.get<std::string>() + "' not in yes, no, unsure");
  return *label;
}

inline AnnotationEvent event_from_json(const json& j) {
  AnnotationEvent e;
  e.ts = j.value("ts", std::string());
  e.annotator_id = j.at("annotator_id").get<std::string>();
  e.task_id = j.at("task_id").get<int>();
  auto mode = parse_mode(j.at("mode").get<std::string>());
  if (!mode) throw Error("mode must be score or filter");
  e.mode = *mode;
  if (j.contains("payload") && !j["payload"].is_null()) e.payload = parse_payload(j["payload"], e.mode);
  return e;
}

enum class FilterRule {
  kMajorityYes,  // keep when more than half of the labels are "yes"
  kUnanimousYes,
};

struct AnnotationConfig {
  std::vector<std::string> annotators;
  std::size_t required = 3;  // submissions that complete a task
  FilterRule filter_rule = FilterRule::kMajorityYes;
};

struct TaskState {
  std::map<std::string, Payload> answers;
  std::set<std::string> reopened;

  friend bool operator==(const TaskState&, const TaskState&) = default;
};

struct AnnotationState {
  std::map<std::pair<AnnotationMode, int>, TaskState> tasks;
  std::vector<AnnotationEvent> audit;

  friend bool operator==(const AnnotationState&, const AnnotationState&) = default;
};

struct TaskView {
  int task_id = 0;
  AnnotationMode mode = AnnotationMode::kScore;
  std::string question, answer, response;
  std::vector<std::string> augmentations;
  int index = 0;  // 1-based position in the queue
  int total = 0;
};

struct SubmitAck {
  int task_id = 0;
  bool complete = false;
  std::optional<double> human_score;
};

struct AgreementReport {
  std::optional<double> alpha;
  std::string unavailable_reason;
  std::size_t tasks_total = 0;
  std::size_t tasks_complete = 0;
  std::size_t submissions = 0;
  std::map<std::string, std::size_t> per_annotator;
};

struct FilterOutcome {
  std::vector<Sample> kept;
  struct Removal {
    Sample sample;
    std::vector<FilterLabel> labels;
  };
  std::vector<Removal> removed;
  std::vector<std::string> log;
};

namespace annotation_detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto secs = std::chrono::system_clock::to_time_t(now);
  const auto ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<int>(ms));
  return buf;
}

// Append-only file; every record is written and fsync'd before append() returns.
class AppendLog {
 public:
  explicit AppendLog(const std::string& path) {
    fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open event log for append: " + path);
  }
  ~AppendLog() {
    if (fd_ >= 0) ::close(fd_);
  }
  AppendLog(const AppendLog&) = delete;
  AppendLog& operator=(const AppendLog&) = delete;

  void append(const std::string& record) {
    std::string line = record + '\n';
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      const auto n = ::write(fd_, p, left);
      if (n < 0) throw Error("event log write failed");
      p += n;
      left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw Error("event log fsync failed");
  }

 private:
  int fd_ = -1;
};

}  // namespace annotation_detail

// Reads the events in `path`. A final line that is incomplete or does not
// parse is a write interrupted by a crash; it is dropped and, when
// `repair` is set, cut from the file. Damage anywhere else is an error.
inline std::vector<AnnotationEvent> read_event_log(const std::string& path, bool repair = false) {
  std::vector<AnnotationEvent> events;
  if (!std::filesystem::exists(path)) return events;
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0, good_end = 0, line_no = 0;
  while (pos < content.size()) {
    ++line_no;
    const auto nl = content.find('\n', pos);
    const bool last = nl == std::string::npos || nl + 1 == content.size();
    const std::string line = content.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    std::optional<AnnotationEvent> ev;
    if (nl != std::string::npos) {
      auto j = json::parse(line, nullptr, false);
      if (!j.is_discarded()) {
        try {
          ev = event_from_json(j);
        } catch (const std::exception&) {
        }
      }
    }
    if (!ev) {
      if (!last) throw Error("event log " + path + ": corrupt line " + std::to_string(line_no));
      break;  // torn tail
    }
    events.push_back(std::move(*ev));
    pos = nl + 1;
    good_end = pos;
  }
  if (repair && good_end < content.size()) std::filesystem::resize_file(path, good_end);
  return events;
}

class AnnotationStore {
 public:
  using Clock = std::function<std::string()>;

  // Replays `log_path` when it exists. An empty path keeps events in memory.
  AnnotationStore(std::vector<Sample> samples, AnnotationConfig cfg, std::string log_path = {},
                  Clock clock = annotation_detail::utc_now)
      : samples_(std::move(samples)), cfg_(std::move(cfg)), clock_(std::move(clock)) {
    if (cfg_.required == 0) throw Error("annotation: required annotators must be >= 1");
    if (cfg_.annotators.size() < cfg_.required)
      throw Error("annotation: fewer registered annotators than required per task");
    auto state = std::make_shared<AnnotationState>();
    if (!log_path.empty()) {
      for (const auto& e : read_event_log(log_path, /*repair=*/true)) apply(*state, e);
      log_ = std::make_unique<annotation_detail::AppendLog>(log_path);
    }
    std::atomic_store(&state_, std::shared_ptr<const AnnotationState>(std::move(state)));
  }

  // Immutable view of the current state; safe to read without locking.
  std::shared_ptr<const AnnotationState> snapshot() const { return std::atomic_load(&state_); }

  const std::vector<Sample>& samples() const { return samples_; }
  const AnnotationConfig& config() const { return cfg_; }
  int task_count() const { return static_cast<int>(samples_.size()); }

  bool is_registered(const std::string& annotator) const {
    return std::find(cfg_.annotators.begin(), cfg_.annotators.end(), annotator) !=
           cfg_.annotators.end();
  }

  // Lowest-id task in `mode` that is still open to this annotator.
  std::optional<TaskView> next_task(const std::string& annotator, AnnotationMode mode) const {
    if (!is_registered(annotator)) throw Error("unknown annotator '" + annotator + "'");
    const auto state = snapshot();
    for (int id = 1; id <= task_count(); ++id) {
      const TaskState* t = find(*state, mode, id);
      const bool reopened = t && t->reopened.count(annotator);
      const bool answered = t && t->answers.count(annotator);
      const bool complete = t && t->answers.size() >= cfg_.required;
      if (reopened || (!answered && !complete)) return view(id, mode);
    }
    return std::nullopt;
  }

  // Validates, appends durably, then publishes the new state.
  SubmitAck submit(AnnotationEvent e) {
    std::lock_guard lock(write_mu_);
    if (e.ts.empty()) e.ts = clock_();
    validate(*snapshot(), e);
    if (log_) log_->append(to_json(e).dump());
    auto next = std::make_shared<AnnotationState>(*snapshot());
    apply(*next, e);
    SubmitAck ack{e.task_id, false, std::nullopt};
    if (const TaskState* t = find(*next, e.mode, e.task_id)) {
      ack.complete = t->answers.size() >= cfg_.required;
      if (ack.complete && e.mode == AnnotationMode::kScore) ack.human_score = mean_score(*t);
    }
    std::atomic_store(&state_, std::shared_ptr<const AnnotationState>(std::move(next)));
    return ack;
  }

  void reopen(const std::string& annotator, int task_id, AnnotationMode mode) {
    submit(AnnotationEvent{{}, annotator, task_id, mode, std::nullopt});
  }

  AgreementReport agreement(AlphaMetric metric = AlphaMetric::kInterval) const {
    const auto state = snapshot();
    AgreementReport r;
    r.tasks_total = samples_.size();
    AnnotationMatrix m(cfg_.annotators.size(), samples_.size());
    for (int id = 1; id <= task_count(); ++id) {
      const TaskState* t = find(*state, AnnotationMode::kScore, id);
      if (!t) continue;
      if (t->answers.size() >= cfg_.required) ++r.tasks_complete;
      for (std::size_t a = 0; a < cfg_.annotators.size(); ++a) {
        auto it = t->answers.find(cfg_.annotators[a]);
        if (it == t->answers.end()) continue;
        m.set(a, static_cast<std::size_t>(id - 1), std::get<int>(it->second));
        ++r.submissions;
        ++r.per_annotator[cfg_.annotators[a]];
      }
    }
    try {
      r.alpha = krippendorff_alpha(m, metric);
    } catch (const Error& e) {
      r.unavailable_reason = e.what();
    }
    return r;
  }

  // Samples with annotations folded in: raw_annotations holds every score
  // submitted so far and human_score their mean once the task is complete.
  // Incomplete tasks carry raw_annotations without human_score.
  std::vector<Sample> annotated_samples() const {
    const auto state = snapshot();
    std::vector<Sample> out = samples_;
    for (int id = 1; id <= task_count(); ++id) {
      const TaskState* t = find(*state, AnnotationMode::kScore, id);
      if (!t || t->answers.empty()) continue;
      auto& s = out[static_cast<std::size_t>(id - 1)];
      std::map<std::string, int> raw;
      for (const auto& [who, p] : t->answers) raw[who] = std::get<int>(p);
      s.raw_annotations = std::move(raw);
      s.human_score = t->answers.size() >= cfg_.required ? std::optional(mean_score(*t)) : std::nullopt;
    }
    return out;
  }

  void export_to(const std::string& path) const { save_samples(path, annotated_samples()); }

  // Applies the keep/drop rule to every sample; every filter task must be
  // complete.
  FilterOutcome apply_filter_outcomes() const {
    const auto state = snapshot();
    std::vector<int> incomplete;
    for (int id = 1; id <= task_count(); ++id) {
      const TaskState* t = find(*state, AnnotationMode::kFilter, id);
      if (!t || t->answers.size() < cfg_.required) incomplete.push_back(id);
    }
    if (!incomplete.empty()) {
      std::string ids;
      for (int id : incomplete) ids += (ids.empty() ? "" : ", ") + std::to_string(id);
      throw Error("filter tasks incomplete: " + ids);
    }
    FilterOutcome out;
    const auto annotated = annotated_samples();
    for (int id = 1; id <= task_count(); ++id) {
      const TaskState& t = *find(*state, AnnotationMode::kFilter, id);
      std::vector<FilterLabel> labels;
      std::size_t yes = 0;
      for (const auto& [who, p] : t.answers) {
        labels.push_back(std::get<FilterLabel>(p));
        if (labels.back() == FilterLabel::kYes) ++yes;
      }
      const bool keep = cfg_.filter_rule == FilterRule::kMajorityYes ? 2 * yes > labels.size()
                                                                     : yes == labels.size();
      const auto& s = annotated[static_cast<std::size_t>(id - 1)];
      if (keep) {
        out.kept.push_back(s);
      } else {
        std::string text;
        for (auto l : labels) text += (text.empty() ? "" : ",") + std::string(to_string(l));
        out.log.push_back("removed " + s.id + " (" + text + ")");
        out.removed.push_back({s, std::move(labels)});
      }
    }
    return out;
  }

  // State rebuilt from scratch out of the audit trail.
  AnnotationState replay(const std::vector<AnnotationEvent>& events) const {
    AnnotationState s;
    for (const auto& e : events) apply(s, e);
    return s;
  }

 private:
  static const TaskState* find(const AnnotationState& s, AnnotationMode mode, int id) {
    auto it = s.tasks.find({mode, id});
    return it == s.tasks.end() ? nullptr : &it->second;
  }

  static double mean_score(const TaskState& t) {
    double sum = 0;
    for (const auto& [who, p] : t.answers) sum += std::get<int>(p);
    return sum / static_cast<double>(t.answers.size());
  }

  TaskView view(int id, AnnotationMode mode) const {
    const auto& s = samples_[static_cast<std::size_t>(id - 1)];
    return {id, mode, s.question, s.answer, s.response, {}, id, task_count()};
  }

  void validate(const AnnotationState& s, const AnnotationEvent& e) const {
    if (!is_registered(e.annotator_id)) throw Error("unknown annotator '" + e.annotator_id + "'");
    if (e.task_id < 1 || e.task_id > task_count())
      throw Error("unknown task " + std::to_string(e.task_id));
    if (e.payload) {
      const bool is_score = std::holds_alternative<int>(*e.payload);
      if (is_score != (e.mode == AnnotationMode::kScore))
        throw Error("payload does not match mode " + std::string(to_string(e.mode)));
      if (is_score && (std::get<int>(*e.payload) < 0 || std::get<int>(*e.payload) > 10))
        throw Error("score outside 0..10");
      const TaskState* t = find(s, e.mode, e.task_id);
      if (t && t->answers.size() >= cfg_.required && !t->answers.count(e.annotator_id))
        throw Error("task " + std::to_string(e.task_id) + " already has " +
                    std::to_string(cfg_.required) + " submissions");
    }
  }

  static void apply(AnnotationState& s, const AnnotationEvent& e) {
    auto& t = s.tasks[{e.mode, e.task_id}];
    if (e.payload) {
      t.answers[e.annotator_id] = *e.payload;
      t.reopened.erase(e.annotator_id);
    } else {
      t.reopened.insert(e.annotator_id);
    }
    s.audit.push_back(e);
  }

  std::vector<Sample> samples_;
  AnnotationConfig cfg_;
  Clock clock_;
  std::unique_ptr<annotation_detail::AppendLog> log_;
  std::mutex write_mu_;
  std::shared_ptr<const AnnotationState> state_;
};

}  // namespace vqaeval

#endif  // VQAEVAL_ANNOTATION_HPP_
