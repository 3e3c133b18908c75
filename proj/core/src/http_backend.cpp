#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "medcot/http_backend.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "medcot/digest.hpp"
#include "medcot/rate_limiter.hpp"

namespace medcot {

namespace {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorClass::Image, "cannot read image: " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string mime_for(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "png") return "image/png";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  if (ext == "bmp") return "image/bmp";
  return "image/jpeg";
}

nlohmann::json message_to_wire(const Message& msg) {
  nlohmann::json m;
  m["role"] = to_string(msg.role);
  if (msg.images.empty()) {
    m["content"] = msg.text;
    return m;
  }
  nlohmann::json parts = nlohmann::json::array();
  if (!msg.text.empty()) {
    parts.push_back({{"type", "text"}, {"text", msg.text}});
  }
  for (const auto& img : msg.images) {
    std::string bytes = read_file_bytes(img.path);
    std::string url =
        "data:" + mime_for(img.path) + ";base64," + base64_encode(bytes);
    parts.push_back(
        {{"type", "image_url"}, {"image_url", {{"url", std::move(url)}}}});
  }
  m["content"] = std::move(parts);
  return m;
}

}  // namespace

struct HttpBackend::Impl {
  HttpBackendConfig config;
  std::string api_key;
  TokenBucket bucket;

  explicit Impl(HttpBackendConfig cfg)
      : config(std::move(cfg)), bucket(config.rate_per_minute) {
    if (config.base_url.empty()) {
      throw Error(ErrorClass::Config, "http backend requires base_url");
    }
    if (!config.api_key_env.empty()) {
      const char* value = std::getenv(config.api_key_env.c_str());
      if (!value || !*value) {
        throw Error(ErrorClass::Config,
                    "environment variable " + config.api_key_env +
                        " is not set (it must hold the API key)");
      }
      api_key = value;
    }
  }

  ChatResponse post(const ChatRequest& request) {
    nlohmann::json body;
    body["model"] = request.model_id.empty() ? config.model : request.model_id;
    body["temperature"] = request.temperature;
    body["max_tokens"] = request.max_tokens;
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& msg : request.messages) msgs.push_back(message_to_wire(msg));
    body["messages"] = std::move(msgs);

    bucket.acquire();

    httplib::Client client(config.base_url);
    client.set_connection_timeout(config.timeout_sec, 0);
    client.set_read_timeout(config.timeout_sec, 0);
    client.set_write_timeout(config.timeout_sec, 0);
    httplib::Headers headers;
    if (!api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key);
    }

    auto started = std::chrono::steady_clock::now();
    auto res = client.Post(config.path, headers, body.dump(), "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();

    if (!res) {
      throw Error(ErrorClass::Transport,
                  "request to " + config.base_url + " failed: " +
                      httplib::to_string(res.error()));
    }
    if (res->status == 408 || res->status == 429 || res->status >= 500) {
      throw Error(ErrorClass::HttpRetryable,
                  "http " + std::to_string(res->status) + " from " +
                      config.base_url);
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorClass::HttpFatal,
                  "http " + std::to_string(res->status) + " from " +
                      config.base_url + ": " + res->body.substr(0, 300));
    }

    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      throw Error(ErrorClass::MalformedResponse, "response body is not JSON");
    }
    if (!j.contains("choices") || !j["choices"].is_array() ||
        j["choices"].empty()) {
      throw Error(ErrorClass::MalformedResponse, "response has no choices");
    }
    const auto& first = j["choices"][0];
    if (!first.contains("message") || !first["message"].contains("content") ||
        !first["message"]["content"].is_string()) {
      throw Error(ErrorClass::MalformedResponse,
                  "choice carries no message content");
    }

    ChatResponse resp;
    resp.text = first["message"]["content"].get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      resp.usage.prompt_tokens =
          j["usage"].value("prompt_tokens", std::int64_t{0});
      resp.usage.completion_tokens =
          j["usage"].value("completion_tokens", std::int64_t{0});
    }
    resp.latency_ms = elapsed;
    resp.from_cache = false;
    return resp;
  }
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

HttpBackend::~HttpBackend() = default;

ChatResponse HttpBackend::chat(const ChatRequest& request) {
  validate_request(request);
  return impl_->post(request);
}

std::string HttpBackend::model_id() const { return impl_->config.model; }

}  // namespace medcot
