#pragma once

#include <chrono>
#include <condition_variable>
#include <mutex>

namespace medcot {

/// Token bucket. Refills continuously at `per_minute / 60` tokens per
/// second up to `burst`; acquire() blocks until a token is available.
class TokenBucket {
 public:
  /// burst <= 0 defaults to one second's allowance (at least 1 token).
  explicit TokenBucket(double per_minute, double burst = 0.0);

  void acquire();
  bool try_acquire();

  double rate_per_minute() const { return rate_per_sec_ * 60.0; }

 private:
  void refill_locked();

  double rate_per_sec_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
  std::mutex mutex_;
};

}  // namespace medcot
