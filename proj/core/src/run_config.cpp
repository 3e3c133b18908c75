#include "medcot/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medcot/digest.hpp"

namespace medcot {

namespace {

using nlohmann::json;

/// Strict-parsing helper: any key outside `allowed` fails, naming the key
/// and where it sits, so config typos surface before the first model call.
void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) {
          return key == a;
        }) == allowed.end()) {
      throw Error(ErrorClass::Config,
                  where + ": unknown key '" + key + "'");
    }
  }
}

const json& require(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) {
    throw Error(ErrorClass::Config,
                where + ": missing required key '" + key + "'");
  }
  return obj[key];
}

std::string get_string(const json& obj, const std::string& where, const char* key) {
  const json& value = require(obj, where, key);
  if (!value.is_string()) {
    throw Error(ErrorClass::Config, where + ": '" + std::string(key) +
                                        "' must be a string");
  }
  return value.get<std::string>();
}

ErrorClass error_class_from_string(const std::string& s) {
  static const std::map<std::string, ErrorClass> names = {
      {"contract", ErrorClass::Contract},
      {"transport", ErrorClass::Transport},
      {"http_retryable", ErrorClass::HttpRetryable},
      {"http_fatal", ErrorClass::HttpFatal},
      {"malformed_response", ErrorClass::MalformedResponse},
      {"replay_miss", ErrorClass::ReplayMiss},
      {"parse", ErrorClass::Parse},
      {"storage", ErrorClass::Storage},
  };
  auto it = names.find(s);
  if (it == names.end()) {
    throw Error(ErrorClass::Config, "unknown error class: '" + s + "'");
  }
  return it->second;
}

std::vector<MockRule> parse_mock_rules(const json& rules, const std::string& where) {
  if (!rules.is_array()) {
    throw Error(ErrorClass::Config, where + ": 'rules' must be an array");
  }
  std::vector<MockRule> out;
  int index = 0;
  for (const auto& entry : rules) {
    std::string rule_where = where + ".rules[" + std::to_string(index++) + "]";
    expect_keys(entry, rule_where,
                {"tag", "contains", "response", "fail_times", "fail_class",
                 "delay_ms"});
    MockRule rule;
    rule.tag = get_string(entry, rule_where, "tag");
    rule.contains = entry.value("contains", "");
    rule.response = entry.value("response", "");
    rule.fail_times = entry.value("fail_times", 0);
    if (entry.contains("fail_class")) {
      rule.fail_class =
          error_class_from_string(entry["fail_class"].get<std::string>());
    }
    rule.delay_ms = entry.value("delay_ms", 0);
    out.push_back(std::move(rule));
  }
  return out;
}

BackendConfig parse_backend(const json& obj, const std::string& where) {
  expect_keys(obj, where,
              {"kind", "model", "rules", "base_url", "path", "api_key_env",
               "rate_per_minute", "timeout_sec", "run_id"});
  BackendConfig bc;
  bc.kind = get_string(obj, where, "kind");
  if (bc.kind != "mock" && bc.kind != "http" && bc.kind != "replay") {
    throw Error(ErrorClass::Config,
                where + ": kind must be mock, http or replay, got '" +
                    bc.kind + "'");
  }
  bc.model = obj.value("model", bc.kind == "mock" ? "mock" : "");

  if (bc.kind == "mock") {
    if (obj.contains("rules")) bc.rules = parse_mock_rules(obj["rules"], where);
  } else if (obj.contains("rules")) {
    throw Error(ErrorClass::Config, where + ": 'rules' is mock-only");
  }

  if (bc.kind == "http") {
    bc.http.base_url = get_string(obj, where, "base_url");
    bc.http.path = obj.value("path", bc.http.path);
    bc.http.model = bc.model;
    bc.http.api_key_env = obj.value("api_key_env", "");
    bc.http.rate_per_minute = obj.value("rate_per_minute", bc.http.rate_per_minute);
    bc.http.timeout_sec = obj.value("timeout_sec", bc.http.timeout_sec);
    if (bc.model.empty()) {
      throw Error(ErrorClass::Config, where + ": http backend needs 'model'");
    }
  }

  if (bc.kind == "replay") {
    bc.replay_run_id = get_string(obj, where, "run_id");
  }
  return bc;
}

/// Temperature overrides accept exact stage tags plus the two tag families.
bool is_temperature_key(const std::string& key) {
  return is_known_stage_tag(key) || key == "guide" || key == "extract";
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json j = json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorClass::Config, "config is not a JSON object");
  }
  expect_keys(j, "config",
              {"run_id", "framework", "dataset", "backends", "mccot",
               "temperatures", "max_tokens", "retry", "workers", "cache",
               "metrics", "prompts"});

  RunConfig cfg;
  cfg.run_id = j.value("run_id", "");
  cfg.framework = framework_from_string(get_string(j, "config", "framework"));

  {
    const json& dataset = require(j, "config", "dataset");
    expect_keys(dataset, "dataset",
                {"kind", "root", "split", "answer_types", "language", "limit",
                 "field_map"});
    cfg.dataset.kind =
        dataset_kind_from_string(get_string(dataset, "dataset", "kind"));
    cfg.dataset.root = get_string(dataset, "dataset", "root");
    cfg.dataset.filter.split =
        split_from_string(dataset.value("split", "test"));
    if (dataset.contains("answer_types")) {
      cfg.dataset.filter.answer_types.clear();
      for (const auto& type : dataset["answer_types"]) {
        cfg.dataset.filter.answer_types.insert(
            answer_type_from_string(type.get<std::string>()));
      }
    }
    cfg.dataset.filter.language = dataset.value("language", "en");
    if (dataset.contains("limit")) {
      cfg.dataset.filter.limit = dataset["limit"].get<std::size_t>();
    }
    if (dataset.contains("field_map")) {
      const json& fm_json = dataset["field_map"];
      expect_keys(fm_json, "dataset.field_map",
                  {"question", "answer", "image", "answer_type", "id",
                   "language", "split", "annotation_file", "images_dir"});
      FieldMap fm = default_field_map(cfg.dataset.kind);
      fm.question = fm_json.value("question", fm.question);
      fm.answer = fm_json.value("answer", fm.answer);
      fm.image = fm_json.value("image", fm.image);
      fm.answer_type = fm_json.value("answer_type", fm.answer_type);
      fm.id = fm_json.value("id", fm.id);
      fm.language = fm_json.value("language", fm.language);
      fm.split = fm_json.value("split", fm.split);
      fm.annotation_file = fm_json.value("annotation_file", fm.annotation_file);
      fm.images_dir = fm_json.value("images_dir", fm.images_dir);
      cfg.dataset.field_map = std::move(fm);
    }
  }

  {
    const json& backends = require(j, "config", "backends");
    expect_keys(backends, "backends", {"llm", "mllm", "judge"});
    cfg.llm = parse_backend(require(backends, "backends", "llm"), "backends.llm");
    cfg.mllm =
        parse_backend(require(backends, "backends", "mllm"), "backends.mllm");
    if (backends.contains("judge")) {
      cfg.judge = parse_backend(backends["judge"], "backends.judge");
    }
  }

  if (j.contains("mccot")) {
    const json& mccot = j["mccot"];
    expect_keys(mccot, "mccot",
                {"use_caption", "use_guide", "summarizer", "enabled_modules"});
    cfg.mccot.use_caption = mccot.value("use_caption", true);
    cfg.mccot.use_guide = mccot.value("use_guide", true);
    if (mccot.contains("summarizer")) {
      cfg.mccot.summarizer =
          summarizer_from_string(mccot["summarizer"].get<std::string>());
    }
    if (mccot.contains("enabled_modules")) {
      cfg.mccot.enabled_modules.clear();
      for (const auto& module : mccot["enabled_modules"]) {
        cfg.mccot.enabled_modules.push_back(
            module_from_string(module.get<std::string>()));
      }
      if (cfg.mccot.enabled_modules.empty()) {
        throw Error(ErrorClass::Config,
                    "mccot.enabled_modules must not be empty");
      }
    }
  }

  if (j.contains("temperatures")) {
    for (const auto& [tag, value] : j["temperatures"].items()) {
      if (!is_temperature_key(tag)) {
        throw Error(ErrorClass::Config,
                    "temperatures: unknown key '" + tag + "'");
      }
      if (!value.is_number()) {
        throw Error(ErrorClass::Config,
                    "temperatures." + tag + " must be a number");
      }
      double temp = value.get<double>();
      if (temp < 0.0 || temp > 2.0) {
        throw Error(ErrorClass::Config,
                    "temperatures." + tag + " outside [0,2]");
      }
      cfg.temperatures[tag] = temp;
    }
  }

  cfg.max_tokens = j.value("max_tokens", 1024);
  if (cfg.max_tokens <= 0) {
    throw Error(ErrorClass::Config, "max_tokens must be positive");
  }

  if (j.contains("retry")) {
    const json& retry = j["retry"];
    expect_keys(retry, "retry", {"max_attempts", "base_delay_ms", "backoff_factor"});
    cfg.retry.max_attempts = retry.value("max_attempts", cfg.retry.max_attempts);
    cfg.retry.base_delay_ms = retry.value("base_delay_ms", cfg.retry.base_delay_ms);
    cfg.retry.backoff_factor =
        retry.value("backoff_factor", cfg.retry.backoff_factor);
    if (cfg.retry.max_attempts < 1) {
      throw Error(ErrorClass::Config, "retry.max_attempts must be >= 1");
    }
    if (cfg.retry.backoff_factor < 1.0) {
      throw Error(ErrorClass::Config, "retry.backoff_factor must be >= 1");
    }
  }

  cfg.workers = j.value("workers", 1);
  if (cfg.workers < 1) {
    throw Error(ErrorClass::Config, "workers must be >= 1");
  }
  cfg.cache = j.value("cache", true);

  if (j.contains("metrics")) {
    const json& metrics = j["metrics"];
    expect_keys(metrics, "metrics", {"recall_mode", "accuracy_scaling"});
    if (metrics.contains("recall_mode")) {
      cfg.metrics.recall_mode =
          recall_mode_from_string(metrics["recall_mode"].get<std::string>());
    }
    if (metrics.contains("accuracy_scaling")) {
      cfg.metrics.scaling = accuracy_scaling_from_string(
          metrics["accuracy_scaling"].get<std::string>());
    }
  }

  if (j.contains("prompts")) {
    const json& prompts = j["prompts"];
    expect_keys(prompts, "prompts", {"dir", "version"});
    cfg.prompts.dir = prompts.value("dir", "");
    cfg.prompts.version = prompts.value("version", "");
  }

  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorClass::Config, "config file not found: " + path);
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_digest(const RunConfig& config) {
  json j;
  j["framework"] = to_string(config.framework);
  j["dataset"] = {{"kind", to_string(config.dataset.kind)},
                  {"root", config.dataset.root},
                  {"split", to_string(config.dataset.filter.split)},
                  {"language", config.dataset.filter.language}};
  json types = json::array();
  for (AnswerType type : config.dataset.filter.answer_types) {
    types.push_back(to_string(type));
  }
  j["dataset"]["answer_types"] = std::move(types);
  if (config.dataset.filter.limit) {
    j["dataset"]["limit"] = *config.dataset.filter.limit;
  }
  auto backend_json = [](const BackendConfig& bc) {
    json b;
    b["kind"] = bc.kind;
    b["model"] = bc.model;
    if (bc.kind == "http") {
      b["base_url"] = bc.http.base_url;
      b["path"] = bc.http.path;
    }
    if (bc.kind == "replay") b["run_id"] = bc.replay_run_id;
    return b;
  };
  j["llm"] = backend_json(config.llm);
  j["mllm"] = backend_json(config.mllm);
  if (config.judge) j["judge"] = backend_json(*config.judge);
  j["mccot"] = {{"use_caption", config.mccot.use_caption},
                {"use_guide", config.mccot.use_guide},
                {"summarizer", to_string(config.mccot.summarizer)}};
  json modules = json::array();
  for (ModuleKind module : config.mccot.enabled_modules) {
    modules.push_back(to_string(module));
  }
  j["mccot"]["enabled_modules"] = std::move(modules);
  j["temperatures"] = config.temperatures;
  j["max_tokens"] = config.max_tokens;
  j["metrics"] = {{"recall_mode", to_string(config.metrics.recall_mode)},
                  {"accuracy_scaling", to_string(config.metrics.scaling)}};
  j["prompts_version"] = config.prompts.version;
  return sha256_hex(j.dump());
}

}  // namespace medcot
