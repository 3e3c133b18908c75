#pragma once

#include <map>
#include <memory>
#include <string>

#include "medcot/backend.hpp"

namespace medcot {

struct ReplayEntry {
  std::string text;
  TokenUsage usage;
};

/// Answers each request from a table of recorded calls keyed by request
/// digest. Makes zero network operations; an unknown digest is a
/// replay-miss error. Built from a completed run via make_replay_backend
/// (see runstore.hpp).
class ReplayBackend : public Backend {
 public:
  ReplayBackend(std::shared_ptr<const std::map<std::string, ReplayEntry>> entries,
                std::string model_id);

  ChatResponse chat(const ChatRequest& request) override;
  std::string model_id() const override { return model_id_; }
  std::string kind() const override { return "replay"; }

 private:
  std::shared_ptr<const std::map<std::string, ReplayEntry>> entries_;
  std::string model_id_;
};

}  // namespace medcot
