#pragma once

#include <stdexcept>
#include <string>

namespace medcot {

/// Error classes drive retry decisions and CLI exit codes.
enum class ErrorClass {
  Contract,           // caller violated an interface precondition; never retried
  Transport,          // connection-level failure before an HTTP status was seen
  HttpRetryable,      // 408, 429 or 5xx
  HttpFatal,          // any other non-success HTTP status
  MalformedResponse,  // response body did not parse into a chat completion
  ReplayMiss,         // no recorded call matches the request digest
  ExhaustedRetries,
  Parse,        // model output unusable where a parse is mandatory
  Storage,      // run store I/O failure
  Dataset,      // annotation files missing or malformed
  Image,        // image missing, empty or unreadable
  Config,       // invalid configuration or missing credentials
  Unmeasurable, // ground truth normalizes to no tokens
  NotFound,     // unknown run, item or template
};

const char* to_string(ErrorClass cls);

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& message, int attempts = 0)
      : std::runtime_error(message), cls_(cls), attempts_(attempts) {}

  ErrorClass cls() const noexcept { return cls_; }

  /// Number of attempts made before the error surfaced (0 when not applicable).
  int attempts() const noexcept { return attempts_; }

 private:
  ErrorClass cls_;
  int attempts_;
};

}  // namespace medcot
