#include <doctest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include "medcot/prompt_registry.hpp"
#include "support.hpp"

// Drives the installed command-line binary end to end. The harness exports
// MEDCOT_CLI with the binary's path; without it these cases are skipped so
// the unit binary stays self-contained.

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

const char* cli_path() { return std::getenv("MEDCOT_CLI"); }

CliResult run_cli(const testsupport::TempDir& scratch, const std::string& args) {
  static int counter = 0;
  auto out_path = scratch.path() / ("out-" + std::to_string(counter) + ".txt");
  auto err_path = scratch.path() / ("err-" + std::to_string(counter) + ".txt");
  ++counter;

  std::string command = std::string("'") + cli_path() + "' " + args + " > '" +
                        out_path.string() + "' 2> '" + err_path.string() + "'";
  int status = std::system(command.c_str());

  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = testsupport::read_file(out_path);
  result.err = testsupport::read_file(err_path);
  return result;
}

std::string mock_backend_json() {
  std::string rules = "[";
  bool first = true;
  for (const auto& rule : testsupport::standard_rules()) {
    if (!first) rules += ",";
    first = false;
    std::string response = rule.response;
    std::string escaped;
    for (char c : response) {
      if (c == '"') escaped += "\\\"";
      else if (c == '\n') escaped += "\\n";
      else escaped += c;
    }
    rules += "{\"tag\": \"" + rule.tag + "\", \"response\": \"" + escaped + "\"}";
  }
  rules += "]";
  return "{\"kind\": \"mock\", \"rules\": " + rules + "}";
}

std::string run_config_json(const std::string& dataset_root,
                            const std::string& run_id) {
  return "{\n"
         "  \"run_id\": \"" + run_id + "\",\n"
         "  \"framework\": \"mc_cot\",\n"
         "  \"dataset\": {\"kind\": \"slake\", \"root\": \"" + dataset_root +
         "\"},\n"
         "  \"backends\": {\n"
         "    \"llm\": " + mock_backend_json() + ",\n"
         "    \"mllm\": " + mock_backend_json() + ",\n"
         "    \"judge\": " + mock_backend_json() + "\n"
         "  }\n"
         "}\n";
}

std::string trim_line(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

#define REQUIRE_CLI()                                      \
  if (!cli_path()) {                                       \
    MESSAGE("MEDCOT_CLI not set; skipping CLI coverage");  \
    return;                                                \
  }

TEST_CASE("cli: run, eval and report complete the whole workflow") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  testsupport::write_slake_fixture(scratch.path() / "data", 3);
  auto store = (scratch.path() / "runs").string();
  auto config_path = scratch.path() / "run.json";
  testsupport::write_file(config_path,
                          run_config_json((scratch.path() / "data").string(),
                                          "cli-a"));

  auto run = run_cli(scratch, "--store '" + store + "' run --config '" +
                                  config_path.string() + "'");
  CHECK(run.exit_code == 0);
  // The run id lands on stdout, alone; progress goes to stderr.
  CHECK(trim_line(run.out) == "cli-a");
  CHECK(run.err.find("[1/3]") != std::string::npos);
  CHECK(run.err.find("[3/3]") != std::string::npos);
  CHECK(run.err.find("ok") != std::string::npos);

  auto eval = run_cli(scratch, "--store '" + store + "' eval cli-a --config '" +
                                   config_path.string() + "'");
  CHECK(eval.exit_code == 0);

  auto out_dir = scratch.path() / "report";
  auto report = run_cli(scratch, "--store '" + store +
                                     "' report cli-a --out '" +
                                     out_dir.string() + "'");
  CHECK(report.exit_code == 0);
  auto markdown = testsupport::read_file(out_dir / "report.md");
  CHECK(markdown.find("mc_cot") != std::string::npos);
  CHECK(markdown.find("slake") != std::string::npos);
  CHECK(markdown.find("100.00") != std::string::npos);

  SUBCASE("inspect prints the stored transcript") {
    auto inspect = run_cli(scratch, "--store '" + store +
                                        "' inspect cli-a slake-000001");
    CHECK(inspect.exit_code == 0);
    CHECK(inspect.out.find("slake-000001") != std::string::npos);
    CHECK(inspect.out.find("synthesize") != std::string::npos);
    CHECK(inspect.out.find("the lungs") != std::string::npos);
  }

  SUBCASE("evaluating without a judge config still yields recall") {
    auto no_judge = run_cli(scratch, "--store '" + store +
                                         "' eval cli-a --no-judge");
    CHECK(no_judge.exit_code == 0);
  }

  SUBCASE("judged evaluation without a judge backend is a config error") {
    auto bad = run_cli(scratch, "--store '" + store + "' eval cli-a");
    CHECK(bad.exit_code == 2);
  }
}

TEST_CASE("cli: identical mock runs render byte-identical reports") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  testsupport::write_slake_fixture(scratch.path() / "data", 2);
  auto store = (scratch.path() / "runs").string();
  auto data = (scratch.path() / "data").string();

  for (const char* id : {"det-a", "det-b"}) {
    auto config_path = scratch.path() / (std::string(id) + ".json");
    testsupport::write_file(config_path, run_config_json(data, id));
    auto run = run_cli(scratch, "--store '" + store + "' run --config '" +
                                    config_path.string() + "'");
    REQUIRE(run.exit_code == 0);
    auto eval = run_cli(scratch, "--store '" + store + "' eval " + id +
                                     " --config '" + config_path.string() + "'");
    REQUIRE(eval.exit_code == 0);
    auto report = run_cli(scratch, "--store '" + store + "' report " + id +
                                       " --out '" +
                                       (scratch.path() / id).string() + "'");
    REQUIRE(report.exit_code == 0);
  }

  CHECK(testsupport::read_file(scratch.path() / "det-a" / "report.md") ==
        testsupport::read_file(scratch.path() / "det-b" / "report.md"));
  CHECK(testsupport::read_file(scratch.path() / "det-a" / "report.csv") ==
        testsupport::read_file(scratch.path() / "det-b" / "report.csv"));
}

TEST_CASE("cli: resume executes only the remaining items") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  testsupport::write_slake_fixture(scratch.path() / "data", 4);
  auto store = (scratch.path() / "runs").string();
  auto config_path = scratch.path() / "run.json";
  testsupport::write_file(config_path,
                          run_config_json((scratch.path() / "data").string(),
                                          "res-a"));

  auto first = run_cli(scratch, "--store '" + store + "' run --config '" +
                                    config_path.string() + "' --max-items 1");
  REQUIRE(first.exit_code == 0);
  CHECK(first.err.find("[1/1]") != std::string::npos);

  auto resumed = run_cli(scratch, "--store '" + store + "' run --config '" +
                                      config_path.string() + "' --resume res-a");
  CHECK(resumed.exit_code == 0);
  CHECK(trim_line(resumed.out) == "res-a");
  // One item was already done, three remained.
  CHECK(resumed.err.find("[3/3]") != std::string::npos);
  CHECK(resumed.err.find("[4/") == std::string::npos);
  CHECK(resumed.err.find("3 succeeded") != std::string::npos);
  CHECK(resumed.err.find("1 skipped") != std::string::npos);
}

TEST_CASE("cli: config typos exit with the config code and name the key") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  auto config_path = scratch.path() / "bad.json";
  testsupport::write_file(config_path, R"({
    "framwork": "mc_cot",
    "dataset": {"kind": "slake", "root": "/nowhere"},
    "backends": {"llm": {"kind": "mock"}, "mllm": {"kind": "mock"}}
  })");
  auto result = run_cli(scratch, "run --config '" + config_path.string() + "'");
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("framwork") != std::string::npos);
}

TEST_CASE("cli: a missing dataset exits with the dataset code") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  auto config_path = scratch.path() / "run.json";
  testsupport::write_file(
      config_path,
      run_config_json((scratch.path() / "no-such-dir").string(), "gone-a"));
  auto result = run_cli(scratch, "--store '" +
                                     (scratch.path() / "runs").string() +
                                     "' run --config '" + config_path.string() +
                                     "'");
  CHECK(result.exit_code == 3);
}

TEST_CASE("cli: a run where every item fails exits with code 4") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  testsupport::write_slake_fixture(scratch.path() / "data", 2);
  auto config_path = scratch.path() / "run.json";
  // The multimodal backend has no rules: every caption call dies.
  testsupport::write_file(
      config_path,
      "{\"run_id\": \"dead-a\", \"framework\": \"mc_cot\",\n"
      " \"dataset\": {\"kind\": \"slake\", \"root\": \"" +
          (scratch.path() / "data").string() + "\"},\n"
      " \"backends\": {\"llm\": " + mock_backend_json() +
          ", \"mllm\": {\"kind\": \"mock\", \"rules\": []}}}\n");
  auto result = run_cli(scratch, "--store '" +
                                     (scratch.path() / "runs").string() +
                                     "' run --config '" + config_path.string() +
                                     "'");
  CHECK(result.exit_code == 4);
  CHECK(result.err.find("FAILED") != std::string::npos);
}

TEST_CASE("cli: the prompt catalog lists every template") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  auto result = run_cli(scratch, "prompts list");
  CHECK(result.exit_code == 0);
  for (const auto& id : medcot::template_id_vocabulary()) {
    CHECK_MESSAGE(result.out.find(id) != std::string::npos, id);
  }
  CHECK(result.out.find(medcot::kBuiltinPromptVersion) != std::string::npos);
}

TEST_CASE("cli: unknown runs are reported, not crashed on") {
  REQUIRE_CLI();
  testsupport::TempDir scratch;
  std::filesystem::create_directories(scratch.path() / "runs");
  auto result = run_cli(scratch, "--store '" +
                                     (scratch.path() / "runs").string() +
                                     "' eval nope-1 --no-judge");
  CHECK(result.exit_code == 1);
  CHECK(result.err.find("nope-1") != std::string::npos);
}
