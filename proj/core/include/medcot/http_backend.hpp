#pragma once

#include <memory>
#include <string>

#include "medcot/backend.hpp"

namespace medcot {

/// Chat-completions endpoint configuration. The bearer token is read from
/// the environment variable named by api_key_env; leave it empty for
/// unauthenticated local servers.
struct HttpBackendConfig {
  std::string base_url;  // e.g. "https://api.example.com" or "http://127.0.0.1:8000"
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key_env;
  double rate_per_minute = 60.0;
  int timeout_sec = 120;
};

/// POSTs the de-facto chat-completions wire format: model id, message list
/// with role/content, images as base64 data URLs inside user messages.
/// The response text is the first choice's message content. Requests are
/// paced by a per-backend token bucket.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  ChatResponse chat(const ChatRequest& request) override;
  std::string model_id() const override;
  std::string kind() const override { return "http"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace medcot
