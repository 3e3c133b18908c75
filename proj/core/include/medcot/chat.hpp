#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace medcot {

enum class BackendRole { LLM, MLLM };
enum class ChatRole { System, User, Assistant };

const char* to_string(BackendRole role);
const char* to_string(ChatRole role);
BackendRole backend_role_from_string(const std::string& s);
ChatRole chat_role_from_string(const std::string& s);

/// A resolved reference to an image file. `digest` is the sha256 of the
/// file bytes and doubles as the image's identity in cache keys, so the
/// bytes themselves never need to be stored.
struct ImageRef {
  std::string path;
  std::string digest;
  std::uintmax_t size_bytes = 0;

  /// Reads and digests the file. Throws Error{Image} when the file is
  /// missing or empty.
  static ImageRef from_file(const std::string& path);

  bool resolved() const { return !digest.empty(); }
};

struct Message {
  ChatRole role = ChatRole::User;
  std::string text;
  std::vector<ImageRef> images;  // at most one per message
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
};

struct ChatRequest {
  BackendRole backend_role = BackendRole::LLM;
  std::string model_id;
  std::vector<Message> messages;
  double temperature = 0.2;  // in [0, 2]
  int max_tokens = 1024;
  std::string request_tag;  // pipeline stage label, closed vocabulary
};

struct ChatResponse {
  std::string text;  // raw model output, unmodified
  TokenUsage usage;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
};

/// Every stage label a request may carry.
const std::vector<std::string>& stage_tag_vocabulary();
bool is_known_stage_tag(const std::string& tag);

/// Throws Error{Contract} when the request breaks a type invariant:
/// empty message list, image attached to an LLM-role request, more than
/// one image per message, temperature outside [0,2], non-positive
/// max_tokens, unknown request_tag, or message with neither text nor image.
void validate_request(const ChatRequest& request);

/// Stable content digest over (backend_role, model_id, messages including
/// image digests, temperature, max_tokens). request_tag and timing are
/// excluded. 64 lowercase hex characters.
std::string cache_key(const ChatRequest& request);

/// All message texts joined with newlines; what mock substring predicates
/// match against.
std::string joined_text(const ChatRequest& request);

}  // namespace medcot
