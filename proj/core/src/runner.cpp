#include "medcot/runner.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <mutex>
#include <thread>

#include "medcot/digest.hpp"
#include "medcot/http_backend.hpp"
#include "medcot/version.hpp"

namespace medcot {

namespace {

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string compact_utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

BackendDescriptor describe(const BackendConfig& bc, const Backend& backend) {
  BackendDescriptor desc;
  desc.kind = backend.kind();
  desc.model_id = backend.model_id();
  if (bc.kind == "http") desc.base_url_digest = sha256_hex(bc.http.base_url);
  return desc;
}

PromptRegistry build_registry(const PromptsConfig& prompts) {
  PromptRegistry registry = PromptRegistry::builtin();
  if (!prompts.dir.empty()) registry.load_directory(prompts.dir);
  return registry;
}

std::string effective_prompt_version(const PromptsConfig& prompts) {
  return prompts.version.empty() ? kBuiltinPromptVersion : prompts.version;
}

struct ResolvedItem {
  VqaItem item;
  ImageRef image;
};

}  // namespace

BatchOutcome run_batch(RunStore& store, const RunConfig& config,
                       const std::string& resume_run_id, std::size_t max_items,
                       const ProgressFn& progress) {
  const FieldMap* fm =
      config.dataset.field_map ? &*config.dataset.field_map : nullptr;
  std::vector<VqaItem> items = load_dataset(
      config.dataset.kind, config.dataset.root, config.dataset.filter, fm);

  PromptRegistry registry = build_registry(config.prompts);
  const std::string prompt_version = effective_prompt_version(config.prompts);

  auto llm = build_backend(config.llm, store);
  auto mllm = build_backend(config.mllm, store);

  BatchOutcome outcome;
  std::set<std::string> completed;
  std::vector<ExcludedItem> excluded;
  std::vector<ResolvedItem> work;

  for (const auto& item : items) {
    try {
      ImageRef image = resolve_image(item, config.dataset.root, fm);
      work.push_back(ResolvedItem{item, std::move(image)});
    } catch (const Error& err) {
      excluded.push_back(ExcludedItem{item.item_id, err.what()});
    }
  }

  if (!resume_run_id.empty()) {
    if (!store.run_exists(resume_run_id)) {
      throw Error(ErrorClass::NotFound, "unknown run: " + resume_run_id);
    }
    RunManifest manifest = store.load_manifest(resume_run_id);
    if (manifest.framework != config.framework) {
      throw Error(ErrorClass::Config,
                  "resume framework mismatch: run was " +
                      std::string(to_string(manifest.framework)));
    }
    outcome.run_id = resume_run_id;
    completed = store.load_completed(resume_run_id);
  } else {
    RunManifest manifest;
    manifest.config_digest = run_config_digest(config);
    if (!config.run_id.empty()) {
      manifest.run_id = config.run_id;
    } else {
      // Same config in the same second must still get a fresh directory.
      std::string base = "run-" + compact_utc_timestamp() + "-" +
                         manifest.config_digest.substr(0, 8);
      manifest.run_id = base;
      for (int n = 2; store.run_exists(manifest.run_id); ++n) {
        manifest.run_id = base + "-" + std::to_string(n);
      }
    }
    manifest.created_at = utc_timestamp();
    manifest.artifact_version = kArtifactVersion;
    manifest.framework = config.framework;
    manifest.dataset = config.dataset.kind;
    manifest.dataset_root = config.dataset.root;
    manifest.filter = config.dataset.filter;
    manifest.mccot = config.mccot;
    manifest.llm = describe(config.llm, *llm);
    manifest.mllm = describe(config.mllm, *mllm);
    for (const auto& listing : registry.list_templates()) {
      if (listing.version == prompt_version) {
        manifest.prompt_versions[listing.template_id] = listing.version;
      }
    }
    manifest.temperatures = config.temperatures;
    manifest.recall_mode = config.metrics.recall_mode;
    manifest.scaling = config.metrics.scaling;
    manifest.stopwords_version = kStopwordsVersion;
    manifest.workers = config.workers;
    manifest.cache_enabled = config.cache;
    manifest.excluded = excluded;
    store.create_run(manifest);
    outcome.run_id = manifest.run_id;
  }
  const std::string run_id = outcome.run_id;

  if (config.cache) {
    auto cache = store.open_cache(run_id);
    llm = std::make_shared<CachingBackend>(std::move(llm), cache);
    mllm = std::make_shared<CachingBackend>(std::move(mllm), cache);
  }

  StageRuntime rt;
  rt.llm = llm;
  rt.mllm = mllm;
  rt.prompts = &registry;
  rt.retry = config.retry;
  rt.temperatures.overrides = config.temperatures;
  rt.max_tokens = config.max_tokens;
  rt.prompt_version = prompt_version;

  std::vector<ResolvedItem> pending;
  for (auto& resolved : work) {
    if (completed.count(resolved.item.item_id)) {
      ++outcome.skipped;
    } else if (pending.size() < max_items) {
      pending.push_back(std::move(resolved));
    }
  }
  outcome.skipped += excluded.size();

  TranscriptWriter writer(store, run_id);

  std::mutex out_mutex;  // serializes writer, progress and counters
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::exception_ptr batch_error;

  auto worker = [&] {
    for (;;) {
      std::size_t index = next.fetch_add(1);
      if (index >= pending.size()) return;
      {
        std::lock_guard<std::mutex> lock(out_mutex);
        if (batch_error) return;
      }
      const ResolvedItem& resolved = pending[index];
      Transcript t = run_framework(config.framework, resolved.item,
                                   resolved.image, config.mccot, rt);
      t.run_id = run_id;

      std::lock_guard<std::mutex> lock(out_mutex);
      try {
        writer.append(t);
      } catch (...) {
        if (!batch_error) batch_error = std::current_exception();
        return;
      }
      ++outcome.attempted;
      if (t.succeeded()) {
        ++outcome.succeeded;
      } else {
        ++outcome.failed;
      }
      if (progress) {
        BatchProgress p;
        p.item_id = resolved.item.item_id;
        p.done = done.fetch_add(1) + 1;
        p.total = pending.size();
        p.succeeded = t.succeeded();
        progress(p);
      }
    }
  };

  const int workers = std::max(1, config.workers);
  if (workers == 1 || pending.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    const std::size_t n =
        std::min(static_cast<std::size_t>(workers), pending.size());
    threads.reserve(n);
    for (std::size_t i = 0; i < n; ++i) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }
  if (batch_error) std::rethrow_exception(batch_error);

  return outcome;
}

EvalOutcome evaluate_run(RunStore& store, const std::string& run_id,
                         const EvalOptions& options, const ProgressFn& progress) {
  RunManifest manifest = store.load_manifest(run_id);
  auto transcripts = store.effective_transcripts(run_id);
  auto existing = store.effective_results(run_id);

  std::vector<VqaItem> items =
      load_dataset(manifest.dataset, manifest.dataset_root, manifest.filter);
  std::map<std::string, const VqaItem*> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);

  StageRuntime judge_rt;
  PromptRegistry registry = PromptRegistry::builtin();
  if (options.with_judge) {
    if (!options.judge) {
      throw Error(ErrorClass::Config,
                  "judge backend required (or evaluate without judging)");
    }
    judge_rt.llm = options.judge;
    judge_rt.prompts = &registry;
    judge_rt.retry = options.retry;
    judge_rt.max_tokens = options.judge_max_tokens;
  }

  EvalOutcome outcome;
  std::size_t total = 0;
  for (const auto& [item_id, t] : transcripts) {
    if (t.succeeded()) ++total;
  }

  for (const auto& [item_id, t] : transcripts) {
    if (!t.succeeded() || !t.final_answer) continue;

    auto row_it = existing.find(item_id);
    const bool have_row = row_it != existing.end();
    const bool need_grade =
        options.with_judge && (!have_row || !row_it->second.graded);
    if (have_row && !need_grade) {
      ++outcome.skipped;
      continue;
    }

    auto item_it = by_id.find(item_id);
    if (item_it == by_id.end()) {
      throw Error(ErrorClass::Dataset,
                  "item " + item_id + " not found in dataset (root moved?)");
    }
    const VqaItem& item = *item_it->second;

    ResultRow row;
    row.item_id = item_id;
    row.dataset = to_string(manifest.dataset);
    row.framework = to_string(manifest.framework);
    row.recall_mode = manifest.recall_mode;
    try {
      RecallResult recall = recall_score(item.ground_truth,
                                         t.final_answer->answer,
                                         manifest.recall_mode);
      row.recall = recall.score;
      row.matched_tokens = recall.matched_tokens;
      row.total_tokens = recall.total_tokens;
    } catch (const Error& err) {
      if (err.cls() != ErrorClass::Unmeasurable) throw;
      row.unmeasurable = true;
      ++outcome.unmeasurable;
    }

    if (options.with_judge) {
      GradedScore graded = grade_accuracy(judge_rt, item.question,
                                          item.ground_truth,
                                          t.final_answer->answer, nullptr);
      row.graded = true;
      row.raw_grade = graded.raw;
      row.judge_parse_fallback = graded.parse_fallback_used;
      row.judge_text_digest = sha256_hex(graded.judge_text);
      ++outcome.graded;
    }

    store.append_result(run_id, row);
    ++outcome.evaluated;
    if (progress) {
      BatchProgress p;
      p.item_id = item_id;
      p.done = outcome.evaluated + outcome.skipped;
      p.total = total;
      p.succeeded = true;
      progress(p);
    }
  }
  return outcome;
}

std::shared_ptr<Backend> build_backend(const BackendConfig& config,
                                       const RunStore& store) {
  if (config.kind == "mock") {
    return std::make_shared<MockBackend>(config.rules, config.model);
  }
  if (config.kind == "http") {
    return std::make_shared<HttpBackend>(config.http);
  }
  if (config.kind == "replay") {
    return make_replay_backend(store, config.replay_run_id, config.model);
  }
  throw Error(ErrorClass::Config, "unknown backend kind: " + config.kind);
}

MetricsSummary summarize_run(const RunStore& store, const std::string& run_id) {
  RunManifest manifest = store.load_manifest(run_id);
  auto transcripts = store.effective_transcripts(run_id);
  auto results = store.effective_results(run_id);

  int n_failed = 0;
  for (const auto& [item_id, t] : transcripts) {
    if (!t.succeeded()) ++n_failed;
  }

  std::vector<ItemEvaluation> items;
  items.reserve(results.size());
  for (const auto& [item_id, row] : results) {
    ItemEvaluation item;
    item.item_id = item_id;
    item.recall = row.recall;
    item.unmeasurable = row.unmeasurable;
    item.graded = row.graded;
    item.raw_grade = row.raw_grade;
    items.push_back(std::move(item));
  }

  return aggregate(to_string(manifest.dataset), to_string(manifest.framework),
                   items, n_failed, manifest.recall_mode, manifest.scaling);
}

}  // namespace medcot
