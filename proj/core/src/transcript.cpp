#include "medcot/transcript.hpp"

#include <nlohmann/json.hpp>

#include "medcot/errors.hpp"

namespace medcot {

namespace {

using nlohmann::json;

json call_to_json(const CallRecord& call) {
  return json{
      {"digest", call.digest},
      {"tag", call.tag},
      {"role", to_string(call.role)},
      {"response_text", call.response_text},
      {"prompt_tokens", call.usage.prompt_tokens},
      {"completion_tokens", call.usage.completion_tokens},
      {"latency_ms", call.latency_ms},
      {"from_cache", call.from_cache},
      {"attempts", call.attempts},
  };
}

CallRecord call_from_json(const json& j) {
  CallRecord call;
  call.digest = j.value("digest", "");
  call.tag = j.value("tag", "");
  call.role = backend_role_from_string(j.value("role", "llm"));
  call.response_text = j.value("response_text", "");
  call.usage.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  call.usage.completion_tokens = j.value("completion_tokens", std::int64_t{0});
  call.latency_ms = j.value("latency_ms", std::int64_t{0});
  call.from_cache = j.value("from_cache", false);
  call.attempts = j.value("attempts", 1);
  return call;
}

json assignment_to_json(const TaskAssignment& assignment) {
  json tasks = json::object();
  for (const auto& [module, task] : assignment.tasks) {
    tasks[to_string(module)] = task;
  }
  json activated = json::array();
  for (ModuleKind module : assignment.activated) {
    activated.push_back(to_string(module));
  }
  return json{
      {"rationale", assignment.rationale},
      {"activated", std::move(activated)},
      {"tasks", std::move(tasks)},
      {"fallback_used", assignment.fallback_used},
  };
}

TaskAssignment assignment_from_json(const json& j) {
  TaskAssignment assignment;
  assignment.rationale = j.value("rationale", "");
  for (const auto& name : j.value("activated", json::array())) {
    assignment.activated.push_back(module_from_string(name.get<std::string>()));
  }
  if (j.contains("tasks")) {
    for (const auto& [name, task] : j["tasks"].items()) {
      assignment.tasks[module_from_string(name)] = task.get<std::string>();
    }
  }
  assignment.fallback_used = j.value("fallback_used", false);
  return assignment;
}

json module_map_to_json(const std::map<ModuleKind, std::string>& values) {
  json out = json::object();
  for (const auto& [module, text] : values) out[to_string(module)] = text;
  return out;
}

std::map<ModuleKind, std::string> module_map_from_json(const json& j) {
  std::map<ModuleKind, std::string> out;
  for (const auto& [name, text] : j.items()) {
    out[module_from_string(name)] = text.get<std::string>();
  }
  return out;
}

}  // namespace

std::string to_json_line(const Transcript& transcript) {
  json j;
  j["schema_version"] = Transcript::kSchemaVersion;
  j["run_id"] = transcript.run_id;
  j["item_id"] = transcript.item_id;
  j["status"] = transcript.succeeded() ? "succeeded" : "failed";
  j["failed_stage"] = transcript.failed_stage;
  j["error"] = transcript.error;

  json calls = json::array();
  for (const auto& call : transcript.calls) calls.push_back(call_to_json(call));
  j["calls"] = std::move(calls);

  if (transcript.caption) j["caption"] = *transcript.caption;
  if (transcript.assignment) {
    j["assignment"] = assignment_to_json(*transcript.assignment);
  }
  j["guides"] = module_map_to_json(transcript.guides);
  j["responses"] = module_map_to_json(transcript.responses);
  if (transcript.final_answer) {
    j["final_answer"] = json{
        {"rationale", transcript.final_answer->rationale},
        {"answer", transcript.final_answer->answer},
        {"parse_fallback_used", transcript.final_answer->parse_fallback_used},
    };
  }
  j["warnings"] = transcript.warnings;
  j["stage_ms"] = transcript.stage_ms;
  j["total_ms"] = transcript.total_ms;
  return j.dump();
}

Transcript transcript_from_json_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorClass::Storage, "transcript line is not valid JSON");
  }
  Transcript t;
  t.run_id = j.value("run_id", "");
  t.item_id = j.value("item_id", "");
  t.status = j.value("status", "failed") == "succeeded" ? RunStatus::Succeeded
                                                        : RunStatus::Failed;
  t.failed_stage = j.value("failed_stage", "");
  t.error = j.value("error", "");
  for (const auto& call : j.value("calls", json::array())) {
    t.calls.push_back(call_from_json(call));
  }
  if (j.contains("caption")) t.caption = j["caption"].get<std::string>();
  if (j.contains("assignment")) {
    t.assignment = assignment_from_json(j["assignment"]);
  }
  if (j.contains("guides")) t.guides = module_map_from_json(j["guides"]);
  if (j.contains("responses")) t.responses = module_map_from_json(j["responses"]);
  if (j.contains("final_answer")) {
    FinalAnswer fa;
    fa.rationale = j["final_answer"].value("rationale", "");
    fa.answer = j["final_answer"].value("answer", "");
    fa.parse_fallback_used = j["final_answer"].value("parse_fallback_used", false);
    t.final_answer = std::move(fa);
  }
  for (const auto& w : j.value("warnings", json::array())) {
    t.warnings.push_back(w.get<std::string>());
  }
  if (j.contains("stage_ms")) {
    for (const auto& [stage, ms] : j["stage_ms"].items()) {
      t.stage_ms[stage] = ms.get<std::int64_t>();
    }
  }
  t.total_ms = j.value("total_ms", std::int64_t{0});
  return t;
}

void VectorSink::record(CallRecord record) {
  std::lock_guard<std::mutex> lock(mutex_);
  records_.push_back(std::move(record));
}

std::vector<CallRecord> VectorSink::take() {
  std::lock_guard<std::mutex> lock(mutex_);
  return std::move(records_);
}

void VectorSink::append_to(std::vector<CallRecord>& out) {
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto& record : records_) out.push_back(std::move(record));
  records_.clear();
}

}  // namespace medcot
