#include <doctest.h>

#include <string>

#include "medcot/run_config.hpp"
#include "support.hpp"

using namespace medcot;

namespace {

const char* kMinimalConfig = R"({
  "framework": "mc_cot",
  "dataset": {"kind": "slake", "root": "/data/slake"},
  "backends": {
    "llm": {"kind": "mock", "rules": [{"tag": "synthesize", "response": "ANSWER: x"}]},
    "mllm": {"kind": "mock"}
  }
})";

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    parse_run_config(text);
    FAIL_CHECK("config accepted; wanted error mentioning '" << needle << "'");
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::Config);
    CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos,
                  e.what());
  }
}

}  // namespace

TEST_CASE("a minimal config fills in every documented default") {
  auto cfg = parse_run_config(kMinimalConfig);
  CHECK(cfg.framework == FrameworkKind::McCot);
  CHECK(cfg.dataset.kind == DatasetKind::Slake);
  CHECK(cfg.dataset.root == "/data/slake");
  CHECK(cfg.dataset.filter.split == Split::Test);
  CHECK(cfg.dataset.filter.answer_types == std::set<AnswerType>{AnswerType::Open});
  CHECK(cfg.dataset.filter.language == "en");
  CHECK_FALSE(cfg.dataset.filter.limit.has_value());
  CHECK(cfg.llm.kind == "mock");
  REQUIRE(cfg.llm.rules.size() == 1);
  CHECK(cfg.llm.rules[0].tag == "synthesize");
  CHECK_FALSE(cfg.judge.has_value());
  CHECK(cfg.mccot.use_caption);
  CHECK(cfg.mccot.use_guide);
  CHECK(cfg.mccot.summarizer == Summarizer::LLM);
  CHECK(cfg.mccot.enabled_modules.size() == 3);
  CHECK(cfg.temperatures.empty());
  CHECK(cfg.max_tokens == 1024);
  CHECK(cfg.retry.max_attempts == 3);
  CHECK(cfg.workers == 1);
  CHECK(cfg.cache);
  CHECK(cfg.metrics.recall_mode == RecallMode::TokenFraction);
  CHECK(cfg.metrics.scaling == AccuracyScaling::MeanOver4);
  CHECK(cfg.prompts.dir.empty());
  CHECK(cfg.prompts.version.empty());
}

TEST_CASE("a fully specified config parses every section") {
  auto cfg = parse_run_config(R"({
    "run_id": "full-1",
    "framework": "fccot",
    "dataset": {
      "kind": "vqa_rad", "root": "/d", "split": "train",
      "answer_types": ["open", "closed"], "language": "en", "limit": 25,
      "field_map": {"image": "img", "annotation_file": "qa.json"}
    },
    "backends": {
      "llm": {"kind": "http", "model": "gpt-x", "base_url": "https://api.example.com",
              "api_key_env": "MEDCOT_LLM_API_KEY", "rate_per_minute": 30},
      "mllm": {"kind": "replay", "run_id": "older-run", "model": "gpt-v"},
      "judge": {"kind": "mock", "rules": [{"tag": "judge", "response": "3"}]}
    },
    "mccot": {"use_caption": false, "use_guide": false,
              "summarizer": "mllm", "enabled_modules": ["radiology", "anatomy"]},
    "temperatures": {"judge": 0.0, "guide": 0.5, "extract:anatomy": 0.9},
    "max_tokens": 512,
    "retry": {"max_attempts": 5, "base_delay_ms": 100, "backoff_factor": 1.5},
    "workers": 8,
    "cache": false,
    "metrics": {"recall_mode": "binary_containment", "accuracy_scaling": "minus1_over_3"},
    "prompts": {"dir": "prompts/", "version": "repro-1"}
  })");

  CHECK(cfg.run_id == "full-1");
  CHECK(cfg.framework == FrameworkKind::FCCot);
  CHECK(cfg.dataset.filter.split == Split::Train);
  CHECK(cfg.dataset.filter.answer_types.size() == 2);
  CHECK(cfg.dataset.filter.limit == 25);
  REQUIRE(cfg.dataset.field_map.has_value());
  CHECK(cfg.dataset.field_map->image == "img");
  CHECK(cfg.dataset.field_map->annotation_file == "qa.json");
  CHECK(cfg.llm.kind == "http");
  CHECK(cfg.llm.http.base_url == "https://api.example.com");
  CHECK(cfg.llm.http.api_key_env == "MEDCOT_LLM_API_KEY");
  CHECK(cfg.llm.http.rate_per_minute == doctest::Approx(30));
  CHECK(cfg.mllm.kind == "replay");
  CHECK(cfg.mllm.replay_run_id == "older-run");
  REQUIRE(cfg.judge.has_value());
  CHECK(cfg.judge->rules.size() == 1);
  CHECK_FALSE(cfg.mccot.use_caption);
  CHECK(cfg.mccot.summarizer == Summarizer::MLLM);
  CHECK(cfg.mccot.enabled_modules ==
        std::vector<ModuleKind>{ModuleKind::Radiology, ModuleKind::Anatomy});
  CHECK(cfg.temperatures.at("guide") == doctest::Approx(0.5));
  CHECK(cfg.temperatures.at("extract:anatomy") == doctest::Approx(0.9));
  CHECK(cfg.max_tokens == 512);
  CHECK(cfg.retry.max_attempts == 5);
  CHECK(cfg.workers == 8);
  CHECK_FALSE(cfg.cache);
  CHECK(cfg.metrics.recall_mode == RecallMode::BinaryContainment);
  CHECK(cfg.metrics.scaling == AccuracyScaling::Minus1Over3);
  CHECK(cfg.prompts.version == "repro-1");
}

TEST_CASE("unknown keys are named, wherever they hide") {
  // A typo at the top level.
  expect_config_error(R"({
    "framwork": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })",
                      "framwork");

  // Inside the dataset section.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d", "splits": "test"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })",
                      "splits");

  // Inside a backend.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock", "temperature": 0.2},
                 "mllm": {"kind": "mock"}}
  })",
                      "temperature");

  // Inside a mock rule.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock", "rules": [{"tag": "judge", "text": "4"}]},
                 "mllm": {"kind": "mock"}}
  })",
                      "text");
}

TEST_CASE("missing required keys are named") {
  expect_config_error(R"({
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })",
                      "framework");
  expect_config_error(R"({
    "framework": "mc_cot",
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })",
                      "dataset");
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}}
  })",
                      "mllm");
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })",
                      "root");
}

TEST_CASE("backend kinds are validated with their own requirements") {
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "grpc"}, "mllm": {"kind": "mock"}}
  })",
                      "grpc");
  // http demands a base_url and model.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "http", "model": "m"}, "mllm": {"kind": "mock"}}
  })",
                      "base_url");
  // replay demands the source run.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "replay"}, "mllm": {"kind": "mock"}}
  })",
                      "run_id");
  // rules only make sense for mocks.
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "http", "model": "m", "base_url": "https://x",
                         "rules": []},
                 "mllm": {"kind": "mock"}}
  })",
                      "mock-only");
}

TEST_CASE("temperature overrides accept only known tags or families") {
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}},
    "temperatures": {"translation": 0.3}
  })",
                      "translation");
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}},
    "temperatures": {"judge": 3.0}
  })",
                      "[0,2]");
}

TEST_CASE("numeric bounds hold for retry, workers and token budget") {
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}},
    "retry": {"max_attempts": 0}
  })",
                      "max_attempts");
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}},
    "workers": 0
  })",
                      "workers");
  expect_config_error(R"({
    "framework": "mc_cot",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}},
    "max_tokens": -5
  })",
                      "max_tokens");
}

TEST_CASE("non-JSON and non-object inputs are config errors") {
  expect_config_error("not json", "JSON");
  expect_config_error("[1, 2]", "JSON");
}

TEST_CASE("mock rule failure classes parse by name") {
  auto cfg = parse_run_config(R"({
    "framework": "direct",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {
      "llm": {"kind": "mock"},
      "mllm": {"kind": "mock", "rules": [
        {"tag": "direct", "response": "x", "fail_times": 2,
         "fail_class": "http_retryable", "delay_ms": 5}
      ]}
    }
  })");
  REQUIRE(cfg.mllm.rules.size() == 1);
  CHECK(cfg.mllm.rules[0].fail_times == 2);
  CHECK(cfg.mllm.rules[0].fail_class == ErrorClass::HttpRetryable);
  CHECK(cfg.mllm.rules[0].delay_ms == 5);

  expect_config_error(R"({
    "framework": "direct",
    "dataset": {"kind": "slake", "root": "/d"},
    "backends": {
      "llm": {"kind": "mock"},
      "mllm": {"kind": "mock", "rules": [
        {"tag": "direct", "response": "x", "fail_class": "catastrophic"}
      ]}
    }
  })",
                      "catastrophic");
}

TEST_CASE("the config digest is content-addressed, not text-addressed") {
  // Key order and whitespace do not matter; values do.
  auto a = parse_run_config(kMinimalConfig);
  auto b = parse_run_config(R"({
    "backends": {
      "mllm": {"kind": "mock"},
      "llm": {"kind": "mock", "rules": [{"response": "ANSWER: x", "tag": "synthesize"}]}
    },
    "dataset": {"root": "/data/slake", "kind": "slake"},
    "framework": "mc_cot"
  })");
  CHECK(run_config_digest(a) == run_config_digest(b));
  CHECK(run_config_digest(a).size() == 64);

  auto c = parse_run_config(kMinimalConfig);
  c.framework = FrameworkKind::Direct;
  CHECK(run_config_digest(a) != run_config_digest(c));

  auto d = parse_run_config(kMinimalConfig);
  d.temperatures["judge"] = 0.1;
  CHECK(run_config_digest(a) != run_config_digest(d));
}

TEST_CASE("configs load from disk and missing files are named") {
  testsupport::TempDir dir;
  testsupport::write_file(dir.path() / "run.json", kMinimalConfig);
  auto cfg = load_run_config((dir.path() / "run.json").string());
  CHECK(cfg.framework == FrameworkKind::McCot);

  try {
    load_run_config((dir.path() / "absent.json").string());
    FAIL("phantom config loaded");
  } catch (const Error& e) {
    CHECK(e.cls() == ErrorClass::Config);
    CHECK(std::string(e.what()).find("absent.json") != std::string::npos);
  }
}
