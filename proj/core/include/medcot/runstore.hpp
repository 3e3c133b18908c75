#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "medcot/dataset.hpp"
#include "medcot/evaluation.hpp"
#include "medcot/frameworks.hpp"
#include "medcot/response_cache.hpp"
#include "medcot/transcript.hpp"

namespace medcot {

struct BackendDescriptor {
  std::string kind;      // mock | http | replay
  std::string model_id;
  std::string base_url_digest;  // sha256 of the base URL; empty for non-http
};

struct ExcludedItem {
  std::string item_id;
  std::string reason;
};

/// Immutable once written; captures every field that affects outputs.
struct RunManifest {
  static constexpr int kSchemaVersion = 1;

  std::string run_id;
  std::string created_at;  // ISO-8601 UTC
  std::string artifact_version;
  FrameworkKind framework = FrameworkKind::McCot;
  DatasetKind dataset = DatasetKind::Slake;
  std::string dataset_root;
  DatasetFilter filter;
  McCotConfig mccot;
  BackendDescriptor llm;
  BackendDescriptor mllm;
  std::map<std::string, std::string> prompt_versions;  // template_id -> version
  std::map<std::string, double> temperatures;          // configured overrides
  RecallMode recall_mode = RecallMode::TokenFraction;
  AccuracyScaling scaling = AccuracyScaling::MeanOver4;
  std::string stopwords_version;
  int workers = 1;
  bool cache_enabled = true;
  std::vector<ExcludedItem> excluded;  // items that failed image resolution
  std::string config_digest;           // sha256 of the sanitized config
};

std::string manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const std::string& text);

/// One evaluation record per item, appended to the run's results file.
/// Re-evaluation appends a new row; the last row per item wins.
struct ResultRow {
  static constexpr int kSchemaVersion = 1;

  std::string item_id;
  std::string dataset;
  std::string framework;
  RecallMode recall_mode = RecallMode::TokenFraction;
  double recall = 0.0;
  std::vector<std::string> matched_tokens;
  int total_tokens = 0;
  bool unmeasurable = false;
  bool graded = false;
  int raw_grade = 0;
  bool judge_parse_fallback = false;
  std::string judge_text_digest;
};

std::string to_json_line(const ResultRow& row);
ResultRow result_row_from_json_line(const std::string& line);

/// Durable experiment state: one directory per run holding manifest.json,
/// transcripts.jsonl, results.jsonl and a cache/ subdirectory. Line-append
/// semantics keep earlier records intact across crashes.
class RunStore {
 public:
  explicit RunStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path run_dir(const std::string& run_id) const;
  bool run_exists(const std::string& run_id) const;
  std::vector<std::string> list_runs() const;

  void create_run(const RunManifest& manifest);
  RunManifest load_manifest(const std::string& run_id) const;

  /// Appends one transcript. Rejects a duplicate once the item has a
  /// succeeded record (failed items may be retried and re-appended).
  void append_transcript(const std::string& run_id, const Transcript& transcript);

  /// All records, in file order. Tolerates a torn final line.
  std::vector<Transcript> load_transcripts(const std::string& run_id) const;

  /// Last record per item.
  std::map<std::string, Transcript> effective_transcripts(const std::string& run_id) const;

  /// Ids of items with a succeeded record; a resumed run skips exactly these.
  std::set<std::string> load_completed(const std::string& run_id) const;

  std::shared_ptr<ResponseCache> open_cache(const std::string& run_id) const;

  void append_result(const std::string& run_id, const ResultRow& row);
  std::vector<ResultRow> load_results(const std::string& run_id) const;
  std::map<std::string, ResultRow> effective_results(const std::string& run_id) const;

 private:
  std::filesystem::path root_;
};

/// Advisory exclusive lock on a run directory (flock), released on
/// destruction or process death.
class RunLock {
 public:
  explicit RunLock(const std::filesystem::path& run_dir);
  ~RunLock();
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  int fd_ = -1;
};

/// Single-writer transcript session: holds the run lock and the known-item
/// index for the duration of a batch.
class TranscriptWriter {
 public:
  TranscriptWriter(const RunStore& store, const std::string& run_id);
  void append(const Transcript& transcript);

 private:
  std::filesystem::path path_;
  RunLock lock_;
  std::set<std::string> succeeded_ids_;
};

/// Backend that answers from the run's recorded calls, keyed by request
/// digest. `model_id` must match the original backend so rebuilt requests
/// hash identically; use the manifest's descriptors.
std::shared_ptr<Backend> make_replay_backend(const RunStore& store,
                                             const std::string& run_id,
                                             const std::string& model_id);

}  // namespace medcot
