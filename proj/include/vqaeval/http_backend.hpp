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

// Embedding backend for a remote JSON-over-HTTP service:
//
//   POST <path>  {"input": [text, ...]}            (+ "model" when configured)
//   200          {"data": [{"embedding": [...]}, ...]}  in input order
//
// Responses are cached to an embedding-store file so reruns do not hit the
// network.

#ifndef VQAEVAL_HTTP_BACKEND_HPP_
#define VQAEVAL_HTTP_BACKEND_HPP_

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "vqaeval/embedder.hpp"

namespace vqaeval {

struct HttpBackendConfig {
  std::string base_url = "http://127.0.0.1:8080";  // scheme://host[:port]
  std::string path = "/v1/embeddings";
  std::string model;           // sent as "model" when non-empty
  std::string bearer_token;    // sent as Authorization when non-empty
  std::size_t batch_size = 32;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double backoff_multiplier = 2.0;
  std::size_t max_in_flight = 4;
  std::chrono::seconds timeout{30};
  std::string cache_path;      // empty: no cache file
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  explicit HttpEmbeddingBackend(HttpBackendConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.batch_size == 0) throw Error("http backend: batch_size must be >= 1");
    if (cfg_.max_in_flight == 0) throw Error("http backend: max_in_flight must be >= 1");
    if (!cfg_.cache_path.empty() && std::filesystem::exists(cfg_.cache_path))
      cache_ = EmbeddingStore::load(cfg_.cache_path);
  }

  Embedding embed(const std::string& text) override { return embed_batch({text}).front(); }

  std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out(texts.size());
    std::vector<std::size_t> missing;
    {
      std::lock_guard lock(cache_mu_);
      for (std::size_t i = 0; i < texts.size(); ++i) {
        if (const auto* v = cache_.find(texts[i])) out[i] = *v;
        else missing.push_back(i);
      }
    }
    for (std::size_t begin = 0; begin < missing.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(begin + cfg_.batch_size, missing.size());
      std::vector<std::string> chunk;
      for (std::size_t k = begin; k < end; ++k) chunk.push_back(texts[missing[k]]);
      auto vectors = request_with_retries(chunk);
      remember(chunk, vectors);
      for (std::size_t k = begin; k < end; ++k) out[missing[k]] = std::move(vectors[k - begin]);
    }
    return out;
  }

  std::string_view kind() const override { return "http_endpoint"; }

  std::size_t requests_sent() const {
    std::lock_guard lock(slot_mu_);
    return requests_;
  }

 private:
  // Counts against max_in_flight for the lifetime of one request.
  class Slot {
   public:
    explicit Slot(HttpEmbeddingBackend& b) : b_(b) {
      std::unique_lock lock(b_.slot_mu_);
      b_.slot_cv_.wait(lock, [&] { return b_.in_flight_ < b_.cfg_.max_in_flight; });
      ++b_.in_flight_;
      ++b_.requests_;
    }
    ~Slot() {
      {
        std::lock_guard lock(b_.slot_mu_);
        --b_.in_flight_;
      }
      b_.slot_cv_.notify_one();
    }
    Slot(const Slot&) = delete;
    Slot& operator=(const Slot&) = delete;

   private:
    HttpEmbeddingBackend& b_;
  };

  std::vector<Embedding> request_with_retries(const std::vector<std::string>& texts) {
    auto backoff = cfg_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(static_cast<double>(backoff.count()) * cfg_.backoff_multiplier));
      }
      bool retryable = true;
      try {
        return request_once(texts, retryable);
      } catch (const Error& e) {
        last_error = e.what();
        if (!retryable) break;
      }
    }
    throw Error("http backend: " + last_error);
  }

  std::vector<Embedding> request_once(const std::vector<std::string>& texts, bool& retryable) {
    json body{{"input", texts}};
    if (!cfg_.model.empty()) body["model"] = cfg_.model;
    httplib::Headers headers;
    if (!cfg_.bearer_token.empty())
      headers.emplace("Authorization", "Bearer " + cfg_.bearer_token);

    httplib::Result res;
    {
      Slot slot(*this);
      httplib::Client client(cfg_.base_url);
      client.set_connection_timeout(cfg_.timeout);
      client.set_read_timeout(cfg_.timeout);
      res = client.Post(cfg_.path, headers, body.dump(), "application/json");
    }
    if (!res) throw Error("request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) {
      retryable = res->status == 429 || res->status >= 500;
      throw Error("status " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    auto reply = json::parse(res->body, nullptr, false);
    retryable = false;
    if (reply.is_discarded() || !reply.contains("data") || !reply["data"].is_array())
      throw Error("malformed response: missing data array");
    const auto& data = reply["data"];
    if (data.size() != texts.size())
      throw Error("response has " + std::to_string(data.size()) + " embeddings for " +
                  std::to_string(texts.size()) + " inputs");
    std::vector<Embedding> out;
    for (const auto& item : data) {
      if (!item.contains("embedding") || !item["embedding"].is_array())
        throw Error("malformed response: item without embedding");
      out.push_back(item["embedding"].get<Embedding>());
    }
    return out;
  }

  void remember(const std::vector<std::string>& texts, const std::vector<Embedding>& vectors) {
    std::lock_guard lock(cache_mu_);
    std::ofstream file;
    if (!cfg_.cache_path.empty()) file.open(cfg_.cache_path, std::ios::app);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      cache_.insert(texts[i], vectors[i]);
      if (file) file << EmbeddingStore::record(texts[i], vectors[i]) << '\n';
    }
  }

  HttpBackendConfig cfg_;
  mutable std::mutex cache_mu_;
  EmbeddingStore cache_;
  mutable std::mutex slot_mu_;
  std::condition_variable slot_cv_;
  std::size_t in_flight_ = 0;
  std::size_t requests_ = 0;
};

}  // namespace vqaeval

#endif  // VQAEVAL_HTTP_BACKEND_HPP_
