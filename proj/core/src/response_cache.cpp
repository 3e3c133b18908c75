#include "medcot/response_cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medcot/errors.hpp"

namespace fs = std::filesystem;

namespace medcot {

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw Error(ErrorClass::Storage,
                "cannot create cache directory: " + dir_.string());
  }
}

fs::path ResponseCache::entry_path(const std::string& digest) const {
  return dir_ / (digest + ".json");
}

std::optional<ChatResponse> ResponseCache::get(const std::string& digest) const {
  std::ifstream in(entry_path(digest));
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j = nlohmann::json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) return std::nullopt;  // torn write; treat as miss
  ChatResponse resp;
  resp.text = j.value("text", "");
  resp.usage.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  resp.usage.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  resp.latency_ms = 0;
  resp.from_cache = true;
  return resp;
}

void ResponseCache::put(const std::string& digest, const ChatResponse& response) {
  nlohmann::json j;
  j["text"] = response.text;
  j["prompt_tokens"] = response.usage.prompt_tokens;
  j["completion_tokens"] = response.usage.completion_tokens;

  static std::atomic<unsigned> counter{0};
  fs::path tmp = dir_ / (digest + ".tmp" + std::to_string(counter.fetch_add(1)));
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) {
      throw Error(ErrorClass::Storage,
                  "cannot write cache entry: " + tmp.string());
    }
    out << j.dump();
  }
  std::error_code ec;
  fs::rename(tmp, entry_path(digest), ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorClass::Storage,
                "cannot finalize cache entry for " + digest);
  }
}

CachingBackend::CachingBackend(std::shared_ptr<Backend> inner,
                               std::shared_ptr<ResponseCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

ChatResponse CachingBackend::chat(const ChatRequest& request) {
  validate_request(request);
  const std::string digest = cache_key(request);
  if (auto hit = cache_->get(digest)) return *hit;
  ChatResponse resp = inner_->chat(request);
  cache_->put(digest, resp);
  return resp;
}

}  // namespace medcot
