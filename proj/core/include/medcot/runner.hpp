#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "medcot/run_config.hpp"
#include "medcot/runstore.hpp"

namespace medcot {

struct BatchProgress {
  std::string item_id;
  std::size_t done = 0;
  std::size_t total = 0;
  bool succeeded = true;
};

using ProgressFn = std::function<void(const BatchProgress&)>;

struct BatchOutcome {
  std::string run_id;
  std::size_t attempted = 0;
  std::size_t succeeded = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;  // already done (resume) or excluded
};

/// Runs the configured framework over the dataset, appending one transcript
/// per item. With `resume_run_id` set, reuses that run's manifest and skips
/// items that already succeeded. `max_items` caps fresh work this call
/// (useful for staged/interrupted-run tests); SIZE_MAX means no cap.
BatchOutcome run_batch(RunStore& store, const RunConfig& config,
                       const std::string& resume_run_id = "",
                       std::size_t max_items = static_cast<std::size_t>(-1),
                       const ProgressFn& progress = nullptr);

struct EvalOptions {
  bool with_judge = true;
  // Judge backend; when null and with_judge, built from the stored config is
  // not possible (manifests carry no endpoints), so callers must supply one.
  std::shared_ptr<Backend> judge;
  RetryPolicy retry;
  int judge_max_tokens = 256;
};

struct EvalOutcome {
  std::size_t evaluated = 0;
  std::size_t skipped = 0;       // already had an adequate row
  std::size_t unmeasurable = 0;
  std::size_t graded = 0;
};

/// Scores every succeeded transcript, appending result rows. Resumable:
/// items whose effective row already covers the requested depth (recall
/// only, or recall + grade) are skipped; recall-only rows are upgraded in
/// place by appending a graded row.
EvalOutcome evaluate_run(RunStore& store, const std::string& run_id,
                         const EvalOptions& options,
                         const ProgressFn& progress = nullptr);

/// Aggregates one run's effective rows into a summary.
MetricsSummary summarize_run(const RunStore& store, const std::string& run_id);

/// Constructs a backend from its config entry (mock rule table, http
/// endpoint, or replay over a stored run).
std::shared_ptr<Backend> build_backend(const BackendConfig& config,
                                       const RunStore& store);

}  // namespace medcot
