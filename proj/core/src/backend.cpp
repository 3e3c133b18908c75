#include "medcot/backend.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

namespace medcot {

bool default_retryable(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Transport:
    case ErrorClass::HttpRetryable:
    case ErrorClass::MalformedResponse:
      return true;
    default:
      return false;
  }
}

RetryOutcome with_retry(Backend& backend, const ChatRequest& request,
                        const RetryPolicy& policy) {
  const int max_attempts = std::max(1, policy.max_attempts);
  const auto retryable =
      policy.retryable ? policy.retryable : std::function<bool(ErrorClass)>(default_retryable);

  // Jitter keeps concurrent workers from thundering in lockstep; it never
  // affects response content, so a thread-local generator is fine.
  thread_local std::mt19937 rng{std::random_device{}()};
  std::uniform_real_distribution<double> jitter(0.75, 1.25);

  for (int attempt = 1;; ++attempt) {
    try {
      RetryOutcome out;
      out.response = backend.chat(request);
      out.attempts = attempt;
      return out;
    } catch (const Error& err) {
      if (!retryable(err.cls())) throw;
      if (attempt >= max_attempts) {
        throw Error(ErrorClass::ExhaustedRetries,
                    std::string("gave up after ") + std::to_string(attempt) +
                        " attempts; last error (" + to_string(err.cls()) +
                        "): " + err.what(),
                    attempt);
      }
      double delay = policy.base_delay_ms *
                     std::pow(std::max(1.0, policy.backoff_factor), attempt - 1) *
                     jitter(rng);
      if (delay > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(static_cast<long>(delay)));
      }
    }
  }
}

}  // namespace medcot
