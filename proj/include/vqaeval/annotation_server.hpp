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

// JSON-over-HTTP front end for AnnotationStore.
//
//   GET  /api/tasks/next?annotator=<id>&mode=score|filter
//   POST /api/submit      {"annotator_id", "task_id", "mode", "payload"}
//   GET  /api/agreement
//   POST /api/export      writes the configured export file
//   GET  /                static UI assets, when a directory is configured

#ifndef VQAEVAL_ANNOTATION_SERVER_HPP_
#define VQAEVAL_ANNOTATION_SERVER_HPP_

#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "vqaeval/annotation.hpp"

namespace vqaeval {

struct AnnotationServerConfig {
  std::string host = "127.0.0.1";
  int port = 8765;  // 0 picks a free port
  std::string ui_dir;
  std::string export_path = "annotated.jsonl";
};

inline json to_json(const TaskView& v) {
  return json{{"task_id", v.task_id},
              {"mode", std::string(to_string(v.mode))},
              {"question", v.question},
              {"answer", v.answer},
              {"response", v.response},
              {"augmentations", v.augmentations},
              {"index", v.index},
              {"total", v.total}};
}

inline json to_json(const AgreementReport& r) {
  return json{{"available", r.alpha.has_value()},
              {"alpha", r.alpha ? json(*r.alpha) : json(nullptr)},
              {"reason", r.unavailable_reason},
              {"progress",
               {{"tasks_total", r.tasks_total},
                {"tasks_complete", r.tasks_complete},
                {"submissions", r.submissions},
                {"per_annotator", r.per_annotator}}}};
}

class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, AnnotationServerConfig cfg)
      : store_(store), cfg_(std::move(cfg)) {
    routes();
  }

  ~AnnotationServer() { stop(); }

  // Binds and serves on a background thread; returns the bound port.
  int start() {
    if (cfg_.port == 0) {
      port_ = server_.bind_to_any_port(cfg_.host);
    } else {
      port_ = server_.bind_to_port(cfg_.host, cfg_.port) ? cfg_.port : -1;
    }
    if (port_ < 0) throw Error("annotation server: cannot bind " + cfg_.host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port_;
  }

  // Serves on the calling thread until stop() is called elsewhere.
  void run() {
    if (!server_.listen(cfg_.host, cfg_.port))
      throw Error("annotation server: cannot listen on " + cfg_.host + ":" +
                  std::to_string(cfg_.port));
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  int port() const { return port_; }

 private:
  static void reply(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  void routes() {
    server_.Get("/api/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
      const auto annotator = req.get_param_value("annotator");
      const auto mode = parse_mode(req.has_param("mode") ? req.get_param_value("mode") : "score");
      if (!mode) return reply(res, 400, {{"error", "mode must be score or filter"}});
      if (!store_.is_registered(annotator))
        return reply(res, 404, {{"error", "unknown annotator '" + annotator + "'"}});
      const auto task = store_.next_task(annotator, *mode);
      reply(res, 200, {{"task", task ? to_json(*task) : json(nullptr)}});
    });

    server_.Post("/api/submit", [this](const httplib::Request& req, httplib::Response& res) {
      auto body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object())
        return reply(res, 400, {{"error", "body must be a JSON object"}});
      try {
        if (!body.contains("payload") || body["payload"].is_null())
          throw Error("payload is required");
        auto event = event_from_json(body);
        event.ts.clear();
        const auto ack = store_.submit(std::move(event));
        reply(res, 200,
              {{"ok", true},
               {"task_id", ack.task_id},
               {"complete", ack.complete},
               {"human_score", ack.human_score ? json(*ack.human_score) : json(nullptr)}});
      } catch (const std::exception& e) {
        reply(res, 400, {{"ok", false}, {"error", e.what()}});
      }
    });

    server_.Get("/api/agreement", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, to_json(store_.agreement()));
    });

    server_.Post("/api/export", [this](const httplib::Request&, httplib::Response& res) {
      try {
        store_.export_to(cfg_.export_path);
        reply(res, 200, {{"path", cfg_.export_path}, {"samples", store_.samples().size()}});
      } catch (const std::exception& e) {
        reply(res, 500, {{"error", e.what()}});
      }
    });

    if (!cfg_.ui_dir.empty() && !server_.set_mount_point("/", cfg_.ui_dir))
      throw Error("annotation server: UI directory not found: " + cfg_.ui_dir);
  }

  AnnotationStore& store_;
  AnnotationServerConfig cfg_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = -1;
};

}  // namespace vqaeval

#endif  // VQAEVAL_ANNOTATION_SERVER_HPP_
