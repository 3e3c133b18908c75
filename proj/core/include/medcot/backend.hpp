#pragma once

#include <functional>
#include <string>

#include "medcot/chat.hpp"
#include "medcot/errors.hpp"

namespace medcot {

/// Uniform chat-completion interface. Implementations must be safe for
/// concurrent use by multiple in-flight items.
class Backend {
 public:
  virtual ~Backend() = default;

  /// Returns the model text verbatim. Throws Error on failure; the error
  /// class decides retryability.
  virtual ChatResponse chat(const ChatRequest& request) = 0;

  virtual std::string model_id() const = 0;
  virtual std::string kind() const = 0;  // "mock", "http", "replay"
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_delay_ms = 500;
  double backoff_factor = 2.0;  // >= 1
  /// Predicate over the error class; defaults to default_retryable when unset.
  std::function<bool(ErrorClass)> retryable;
};

bool default_retryable(ErrorClass cls);

struct RetryOutcome {
  ChatResponse response;
  int attempts = 1;
};

/// Attempt n waits base_delay_ms * backoff_factor^(n-1), jittered +/-25%.
/// Non-retryable errors pass through immediately; after max_attempts
/// failures the last error surfaces as Error{ExhaustedRetries} annotated
/// with the attempt count.
RetryOutcome with_retry(Backend& backend, const ChatRequest& request,
                        const RetryPolicy& policy);

}  // namespace medcot
