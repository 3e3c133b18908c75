#include "medcot/rate_limiter.hpp"

#include <algorithm>
#include <thread>

namespace medcot {

TokenBucket::TokenBucket(double per_minute, double burst)
    : rate_per_sec_(std::max(per_minute, 0.001) / 60.0),
      burst_(burst > 0 ? burst : std::max(1.0, rate_per_sec_)),
      tokens_(burst_),
      last_(std::chrono::steady_clock::now()) {}

void TokenBucket::refill_locked() {
  auto now = std::chrono::steady_clock::now();
  double elapsed = std::chrono::duration<double>(now - last_).count();
  last_ = now;
  tokens_ = std::min(burst_, tokens_ + elapsed * rate_per_sec_);
}

bool TokenBucket::try_acquire() {
  std::lock_guard<std::mutex> lock(mutex_);
  refill_locked();
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void TokenBucket::acquire() {
  for (;;) {
    double wait_sec = 0.0;
    {
      std::lock_guard<std::mutex> lock(mutex_);
      refill_locked();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait_sec = (1.0 - tokens_) / rate_per_sec_;
    }
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_sec));
  }
}

}  // namespace medcot
