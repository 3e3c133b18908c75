#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "medcot/report.hpp"
#include "medcot/runner.hpp"
#include "medcot/version.hpp"

namespace {

using namespace medcot;

int exit_code_for(const Error& err) {
  switch (err.cls()) {
    case ErrorClass::Config: return 2;
    case ErrorClass::Dataset: return 3;
    default: return 1;
  }
}

void print_progress(const BatchProgress& p) {
  std::fprintf(stderr, "[%zu/%zu] %s %s\n", p.done, p.total, p.item_id.c_str(),
               p.succeeded ? "ok" : "FAILED");
}

int cmd_run(const std::string& store_dir, const std::string& config_path,
            const std::string& resume_run_id, std::size_t max_items) {
  RunConfig config = load_run_config(config_path);
  RunStore store(store_dir);
  BatchOutcome outcome =
      run_batch(store, config, resume_run_id, max_items, print_progress);
  std::fprintf(stderr, "run %s: %zu succeeded, %zu failed, %zu skipped\n",
               outcome.run_id.c_str(), outcome.succeeded, outcome.failed,
               outcome.skipped);
  std::printf("%s\n", outcome.run_id.c_str());
  if (outcome.attempted > 0 && outcome.succeeded == 0) {
    std::fprintf(stderr, "all attempted items failed\n");
    return 4;
  }
  return 0;
}

int cmd_eval(const std::string& store_dir, const std::string& run_id,
             bool no_judge, const std::string& config_path) {
  RunStore store(store_dir);
  EvalOptions options;
  options.with_judge = !no_judge;
  if (options.with_judge) {
    if (config_path.empty()) {
      throw Error(ErrorClass::Config,
                  "judging needs --config with a backends.judge entry "
                  "(or pass --no-judge)");
    }
    RunConfig config = load_run_config(config_path);
    if (!config.judge) {
      throw Error(ErrorClass::Config,
                  "config has no backends.judge entry");
    }
    options.judge = build_backend(*config.judge, store);
    options.retry = config.retry;
  }
  EvalOutcome outcome = evaluate_run(store, run_id, options, print_progress);
  std::fprintf(stderr, "eval %s: %zu evaluated (%zu graded, %zu unmeasurable), %zu skipped\n",
               run_id.c_str(), outcome.evaluated, outcome.graded,
               outcome.unmeasurable, outcome.skipped);
  return 0;
}

int cmd_report(const std::string& store_dir,
               const std::vector<std::string>& run_ids,
               const std::string& out_dir) {
  RunStore store(store_dir);
  Report report = build_report(store, run_ids);
  write_report(report, out_dir);
  std::fprintf(stderr, "wrote %s/report.md and %s/report.csv\n",
               out_dir.c_str(), out_dir.c_str());
  return 0;
}

int cmd_inspect(const std::string& store_dir, const std::string& run_id,
                const std::string& item_id) {
  RunStore store(store_dir);
  auto transcripts = store.effective_transcripts(run_id);
  auto it = transcripts.find(item_id);
  if (it == transcripts.end()) {
    throw Error(ErrorClass::NotFound,
                "no transcript for item " + item_id + " in run " + run_id);
  }
  std::cout << render_transcript(it->second);
  return 0;
}

int cmd_prompts_list(const std::string& override_dir) {
  PromptRegistry registry = PromptRegistry::builtin();
  if (!override_dir.empty()) registry.load_directory(override_dir);
  std::cout << registry.catalog_text();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MC-CoT medical VQA pipeline runner"};
  app.require_subcommand(1);
  std::string store_dir = "runs";
  app.add_option("--store", store_dir, "Run store directory")
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "Execute a framework over a dataset");
  std::string config_path;
  std::string resume_run_id;
  std::size_t max_items = static_cast<std::size_t>(-1);
  run->add_option("--config", config_path, "Run config JSON")->required();
  run->add_option("--resume", resume_run_id,
                  "Resume this run id, skipping completed items");
  run->add_option("--max-items", max_items,
                  "Stop after this many fresh items (the run stays resumable)");

  auto* eval = app.add_subcommand("eval", "Score a finished run");
  std::string eval_run_id;
  bool no_judge = false;
  std::string eval_config;
  eval->add_option("run_id", eval_run_id, "Run to evaluate")->required();
  eval->add_flag("--no-judge", no_judge, "Skip LLM-judge grading");
  eval->add_option("--config", eval_config,
                   "Config supplying the judge backend");

  auto* report = app.add_subcommand("report", "Render evaluated runs as a table");
  std::vector<std::string> report_run_ids;
  std::string out_dir;
  report->add_option("run_ids", report_run_ids, "Runs to include")->required();
  report->add_option("--out", out_dir, "Output directory")->required();

  auto* inspect = app.add_subcommand("inspect", "Dump one item's transcript");
  std::string inspect_run_id;
  std::string inspect_item_id;
  inspect->add_option("run_id", inspect_run_id)->required();
  inspect->add_option("item_id", inspect_item_id)->required();

  auto* prompts = app.add_subcommand("prompts", "Prompt template catalog");
  auto* prompts_list = prompts->add_subcommand("list", "List all templates");
  std::string prompts_dir;
  prompts_list->add_option("--dir", prompts_dir, "Override template directory");
  prompts->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(store_dir, config_path, resume_run_id, max_items);
    if (*eval) return cmd_eval(store_dir, eval_run_id, no_judge, eval_config);
    if (*report) return cmd_report(store_dir, report_run_ids, out_dir);
    if (*inspect) return cmd_inspect(store_dir, inspect_run_id, inspect_item_id);
    if (*prompts_list) return cmd_prompts_list(prompts_dir);
  } catch (const Error& err) {
    std::fprintf(stderr, "error (%s): %s\n", to_string(err.cls()), err.what());
    return exit_code_for(err);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 1;
}
