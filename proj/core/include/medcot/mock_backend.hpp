#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "medcot/backend.hpp"

namespace medcot {

/// One scripted response. A rule matches when its tag equals the request
/// tag and, if `contains` is non-empty, the joined prompt text contains
/// that substring. Rules are tried in order; the first match wins.
struct MockRule {
  std::string tag;
  std::string contains;
  std::string response;
  int fail_times = 0;  // first N matches throw fail_class instead
  ErrorClass fail_class = ErrorClass::Transport;
  int delay_ms = 0;  // scripted latency
};

/// Deterministic scripted backend: a pure function of the request content
/// given a fixed rule table. Usage counts are derived from text lengths so
/// identical requests always produce identical responses.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::vector<MockRule> rules,
                       std::string model_id = "mock");

  ChatResponse chat(const ChatRequest& request) override;
  std::string model_id() const override { return model_id_; }
  std::string kind() const override { return "mock"; }

  /// Total chat() invocations that passed request validation.
  int call_count() const { return calls_.load(); }

 private:
  std::vector<MockRule> rules_;
  std::vector<int> failures_left_;
  std::string model_id_;
  std::atomic<int> calls_{0};
  std::mutex mutex_;
};

}  // namespace medcot
