#include "medcot/mock_backend.hpp"

#include <chrono>
#include <thread>

namespace medcot {

MockBackend::MockBackend(std::vector<MockRule> rules, std::string model_id)
    : rules_(std::move(rules)), model_id_(std::move(model_id)) {
  failures_left_.reserve(rules_.size());
  for (const auto& rule : rules_) failures_left_.push_back(rule.fail_times);
}

ChatResponse MockBackend::chat(const ChatRequest& request) {
  validate_request(request);
  calls_.fetch_add(1);

  const std::string prompt = joined_text(request);
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const MockRule& rule = rules_[i];
    if (rule.tag != request.request_tag) continue;
    if (!rule.contains.empty() && prompt.find(rule.contains) == std::string::npos) {
      continue;
    }
    if (rule.delay_ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(rule.delay_ms));
    }
    {
      std::lock_guard<std::mutex> lock(mutex_);
      if (failures_left_[i] > 0) {
        --failures_left_[i];
        throw Error(rule.fail_class,
                    "scripted failure for tag '" + rule.tag + "'");
      }
    }
    ChatResponse resp;
    resp.text = rule.response;
    // Deterministic usage derived from text lengths (~4 chars per token).
    resp.usage.prompt_tokens = static_cast<std::int64_t>(prompt.size() / 4);
    resp.usage.completion_tokens =
        static_cast<std::int64_t>(rule.response.size() / 4);
    resp.latency_ms = 0;
    resp.from_cache = false;
    return resp;
  }
  throw Error(ErrorClass::Contract,
              "no mock rule matches tag '" + request.request_tag + "'");
}

}  // namespace medcot
