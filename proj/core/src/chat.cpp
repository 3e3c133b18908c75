#include "medcot/chat.hpp"

#include <algorithm>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "medcot/digest.hpp"
#include "medcot/errors.hpp"

namespace medcot {

const char* to_string(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::Contract: return "contract";
    case ErrorClass::Transport: return "transport";
    case ErrorClass::HttpRetryable: return "http_retryable";
    case ErrorClass::HttpFatal: return "http_fatal";
    case ErrorClass::MalformedResponse: return "malformed_response";
    case ErrorClass::ReplayMiss: return "replay_miss";
    case ErrorClass::ExhaustedRetries: return "exhausted_retries";
    case ErrorClass::Parse: return "parse";
    case ErrorClass::Storage: return "storage";
    case ErrorClass::Dataset: return "dataset";
    case ErrorClass::Image: return "image";
    case ErrorClass::Config: return "config";
    case ErrorClass::Unmeasurable: return "unmeasurable";
    case ErrorClass::NotFound: return "not_found";
  }
  return "unknown";
}

const char* to_string(BackendRole role) {
  return role == BackendRole::LLM ? "llm" : "mllm";
}

const char* to_string(ChatRole role) {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

BackendRole backend_role_from_string(const std::string& s) {
  if (s == "llm") return BackendRole::LLM;
  if (s == "mllm") return BackendRole::MLLM;
  throw Error(ErrorClass::Config, "unknown backend role: " + s);
}

ChatRole chat_role_from_string(const std::string& s) {
  if (s == "system") return ChatRole::System;
  if (s == "user") return ChatRole::User;
  if (s == "assistant") return ChatRole::Assistant;
  throw Error(ErrorClass::Config, "unknown chat role: " + s);
}

ImageRef ImageRef::from_file(const std::string& path) {
  std::error_code ec;
  auto size = std::filesystem::file_size(path, ec);
  if (ec) {
    throw Error(ErrorClass::Image, "image not readable: " + path);
  }
  if (size == 0) {
    throw Error(ErrorClass::Image, "image file is empty: " + path);
  }
  ImageRef ref;
  ref.path = path;
  ref.size_bytes = size;
  ref.digest = sha256_file(path);
  return ref;
}

const std::vector<std::string>& stage_tag_vocabulary() {
  static const std::vector<std::string> tags = {
      "caption",
      "assign_tasks",
      "guide:radiology",
      "guide:anatomy",
      "guide:pathology",
      "extract:radiology",
      "extract:anatomy",
      "extract:pathology",
      "synthesize",
      "direct",
      "iicot_guide",
      "iicot_rationale",
      "iicot_answer",
      "fccot_analyze",
      "fccot_fact_check",
      "fccot_logic_check",
      "fccot_revise",
      "qdcap_answer",
      "judge",
  };
  return tags;
}

bool is_known_stage_tag(const std::string& tag) {
  const auto& tags = stage_tag_vocabulary();
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

void validate_request(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw Error(ErrorClass::Contract, "chat request has no messages");
  }
  if (!is_known_stage_tag(request.request_tag)) {
    throw Error(ErrorClass::Contract,
                "unknown request tag: '" + request.request_tag + "'");
  }
  if (request.temperature < 0.0 || request.temperature > 2.0) {
    throw Error(ErrorClass::Contract,
                "temperature out of range [0,2]: " +
                    std::to_string(request.temperature));
  }
  if (request.max_tokens <= 0) {
    throw Error(ErrorClass::Contract, "max_tokens must be positive");
  }
  for (const auto& msg : request.messages) {
    if (msg.images.size() > 1) {
      throw Error(ErrorClass::Contract, "at most one image per message");
    }
    if (msg.text.empty() && msg.images.empty()) {
      throw Error(ErrorClass::Contract,
                  "message must carry text or an image");
    }
    if (!msg.images.empty() && request.backend_role == BackendRole::LLM) {
      throw Error(ErrorClass::Contract,
                  "image attached to a text-only (llm) request");
    }
    for (const auto& img : msg.images) {
      if (!img.resolved()) {
        throw Error(ErrorClass::Contract,
                    "image reference not resolved: " + img.path);
      }
    }
  }
}

std::string cache_key(const ChatRequest& request) {
  nlohmann::json j;
  j["backend_role"] = to_string(request.backend_role);
  j["model_id"] = request.model_id;
  j["temperature"] = request.temperature;
  j["max_tokens"] = request.max_tokens;
  nlohmann::json msgs = nlohmann::json::array();
  for (const auto& msg : request.messages) {
    nlohmann::json m;
    m["role"] = to_string(msg.role);
    m["text"] = msg.text;
    nlohmann::json imgs = nlohmann::json::array();
    for (const auto& img : msg.images) imgs.push_back(img.digest);
    m["images"] = imgs;
    msgs.push_back(std::move(m));
  }
  j["messages"] = std::move(msgs);
  // nlohmann objects iterate in key order, so dump() is canonical.
  return sha256_hex(j.dump());
}

std::string joined_text(const ChatRequest& request) {
  std::string out;
  for (const auto& msg : request.messages) {
    if (!out.empty()) out.push_back('\n');
    out += msg.text;
  }
  return out;
}

}  // namespace medcot
