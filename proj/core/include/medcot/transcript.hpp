#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "medcot/pipeline_types.hpp"

namespace medcot {

enum class RunStatus { Succeeded, Failed };

struct CallRecord {
  std::string digest;  // cache_key of the request
  std::string tag;
  BackendRole role = BackendRole::LLM;
  std::string response_text;
  TokenUsage usage;
  std::int64_t latency_ms = 0;
  bool from_cache = false;
  int attempts = 1;
};

/// Complete record of every backend call and intermediate artifact for one
/// item: the caption, the task assignment, per-module guides and responses,
/// and the final answer.
struct Transcript {
  static constexpr int kSchemaVersion = 1;

  std::string run_id;
  std::string item_id;
  RunStatus status = RunStatus::Failed;
  std::string failed_stage;  // set when status == Failed
  std::string error;

  std::vector<CallRecord> calls;  // in execution order

  std::optional<std::string> caption;
  std::optional<TaskAssignment> assignment;
  std::map<ModuleKind, std::string> guides;
  std::map<ModuleKind, std::string> responses;
  std::optional<FinalAnswer> final_answer;

  std::vector<std::string> warnings;
  std::map<std::string, std::int64_t> stage_ms;
  std::int64_t total_ms = 0;

  bool succeeded() const { return status == RunStatus::Succeeded; }
};

std::string to_json_line(const Transcript& transcript);
Transcript transcript_from_json_line(const std::string& line);

/// Receives call records as stages execute. Implementations are
/// internally synchronized.
class CallSink {
 public:
  virtual ~CallSink() = default;
  virtual void record(CallRecord record) = 0;
};

class VectorSink : public CallSink {
 public:
  void record(CallRecord record) override;
  std::vector<CallRecord> take();
  void append_to(std::vector<CallRecord>& out);

 private:
  std::mutex mutex_;
  std::vector<CallRecord> records_;
};

}  // namespace medcot
