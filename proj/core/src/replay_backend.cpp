#include "medcot/replay_backend.hpp"

namespace medcot {

ReplayBackend::ReplayBackend(
    std::shared_ptr<const std::map<std::string, ReplayEntry>> entries,
    std::string model_id)
    : entries_(std::move(entries)), model_id_(std::move(model_id)) {}

ChatResponse ReplayBackend::chat(const ChatRequest& request) {
  validate_request(request);
  const std::string digest = cache_key(request);
  auto it = entries_->find(digest);
  if (it == entries_->end()) {
    throw Error(ErrorClass::ReplayMiss,
                "no recorded call for digest " + digest + " (tag '" +
                    request.request_tag + "')");
  }
  ChatResponse resp;
  resp.text = it->second.text;
  resp.usage = it->second.usage;
  resp.latency_ms = 0;
  resp.from_cache = true;
  return resp;
}

}  // namespace medcot
