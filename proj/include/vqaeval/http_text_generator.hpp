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

// TextGenerator over HTTP:
//
//   POST <path>  {"prompt": "...", "model": "..."}   ("model" only when set)
//   200          {"text": "..."}

#ifndef VQAEVAL_HTTP_TEXT_GENERATOR_HPP_
#define VQAEVAL_HTTP_TEXT_GENERATOR_HPP_

#include <chrono>
#include <string>

#include "httplib.h"
#include "json.hpp"
#include "vqaeval/augment.hpp"

namespace vqaeval {

struct HttpTextGeneratorConfig {
  std::string base_url = "http://127.0.0.1:8081";
  std::string path = "/v1/generate";
  std::string model;
  std::string bearer_token;
  std::chrono::seconds timeout{60};
};

class HttpTextGenerator : public TextGenerator {
 public:
  explicit HttpTextGenerator(HttpTextGeneratorConfig cfg) : cfg_(std::move(cfg)) {}

  std::string complete(const std::string& prompt) override {
    nlohmann::json body{{"prompt", prompt}};
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    httplib::Headers headers;
    if (!cfg_.bearer_token.empty())
      headers.emplace("Authorization", "Bearer " + cfg_.bearer_token);
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(cfg_.timeout);
    client.set_read_timeout(cfg_.timeout);
    auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
    if (!res) throw Error("text generator: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error("text generator: status " + std::to_string(res->status));
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("text") || !reply["text"].is_string())
      throw Error("text generator: reply without a \"text\" string");
    return reply["text"].get<std::string>();
  }

 private:
  HttpTextGeneratorConfig cfg_;
};

}  // namespace vqaeval

#endif  // VQAEVAL_HTTP_TEXT_GENERATOR_HPP_
