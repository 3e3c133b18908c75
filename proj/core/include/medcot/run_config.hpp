#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medcot/backend.hpp"
#include "medcot/dataset.hpp"
#include "medcot/evaluation.hpp"
#include "medcot/frameworks.hpp"
#include "medcot/http_backend.hpp"
#include "medcot/mock_backend.hpp"
#include "medcot/pipeline_types.hpp"

namespace medcot {

struct BackendConfig {
  std::string kind = "mock";  // mock | http | replay
  std::string model = "mock";
  // mock
  std::vector<MockRule> rules;
  // http
  HttpBackendConfig http;
  // replay
  std::string replay_run_id;
};

struct MetricsConfig {
  RecallMode recall_mode = RecallMode::TokenFraction;
  AccuracyScaling scaling = AccuracyScaling::MeanOver4;
};

struct PromptsConfig {
  std::string dir;  // optional override directory
  std::string version;  // empty -> builtin version
};

struct DatasetConfig {
  DatasetKind kind = DatasetKind::Slake;
  std::string root;
  DatasetFilter filter;
  std::optional<FieldMap> field_map;
};

/// Everything a run needs, parsed from a single JSON file. Parsing is
/// strict: an unknown key anywhere fails with the offending key named, so
/// typos surface before any model call is made.
struct RunConfig {
  std::string run_id;  // empty -> derived from time + config digest
  FrameworkKind framework = FrameworkKind::McCot;
  DatasetConfig dataset;
  BackendConfig llm;
  BackendConfig mllm;
  std::optional<BackendConfig> judge;
  McCotConfig mccot;
  std::map<std::string, double> temperatures;
  int max_tokens = 1024;
  RetryPolicy retry;
  int workers = 1;
  bool cache = true;
  MetricsConfig metrics;
  PromptsConfig prompts;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Canonical JSON for the manifest's config digest; secrets never appear
/// (the config only ever names the env var that holds the key).
std::string run_config_digest(const RunConfig& config);

}  // namespace medcot
