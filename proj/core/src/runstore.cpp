#include "medcot/runstore.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "medcot/errors.hpp"
#include "medcot/replay_backend.hpp"

namespace fs = std::filesystem;

namespace medcot {

namespace {

using nlohmann::json;

void write_file_atomically(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) {
      throw Error(ErrorClass::Storage, "cannot write " + tmp.string());
    }
    out << content;
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    throw Error(ErrorClass::Storage, "cannot finalize " + path.string());
  }
}

std::string read_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorClass::NotFound,
                std::string(what) + " not found: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// Reads a JSONL file, parsing each line with `parse`. A torn final line
/// (crash mid-append) is skipped; a malformed line elsewhere is an error.
template <typename T, typename Fn>
std::vector<T> load_jsonl(const fs::path& path, const char* what, Fn&& parse) {
  std::vector<T> out;
  std::ifstream in(path);
  if (!in) return out;  // absent file means no records yet

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) lines.push_back(line);
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    try {
      out.push_back(parse(lines[i]));
    } catch (const Error&) {
      if (i + 1 == lines.size()) continue;  // torn tail from a crash
      throw Error(ErrorClass::Storage,
                  std::string(what) + " line " + std::to_string(i + 1) +
                      " is corrupt in " + path.string());
    }
  }
  return out;
}

void append_line(const fs::path& path, const std::string& line) {
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw Error(ErrorClass::Storage, "cannot append to " + path.string());
  }
  out << line << '\n';
  out.flush();
  if (!out) {
    throw Error(ErrorClass::Storage, "append failed for " + path.string());
  }
}

json descriptor_to_json(const BackendDescriptor& desc) {
  return json{{"kind", desc.kind},
              {"model_id", desc.model_id},
              {"base_url_digest", desc.base_url_digest}};
}

BackendDescriptor descriptor_from_json(const json& j) {
  BackendDescriptor desc;
  desc.kind = j.value("kind", "");
  desc.model_id = j.value("model_id", "");
  desc.base_url_digest = j.value("base_url_digest", "");
  return desc;
}

}  // namespace

std::string manifest_to_json(const RunManifest& manifest) {
  json j;
  j["schema_version"] = RunManifest::kSchemaVersion;
  j["run_id"] = manifest.run_id;
  j["created_at"] = manifest.created_at;
  j["artifact_version"] = manifest.artifact_version;
  j["framework"] = to_string(manifest.framework);
  j["dataset"] = to_string(manifest.dataset);
  j["dataset_root"] = manifest.dataset_root;

  json filter;
  filter["split"] = to_string(manifest.filter.split);
  json types = json::array();
  for (AnswerType type : manifest.filter.answer_types) {
    types.push_back(to_string(type));
  }
  filter["answer_types"] = std::move(types);
  filter["language"] = manifest.filter.language;
  if (manifest.filter.limit) filter["limit"] = *manifest.filter.limit;
  j["filter"] = std::move(filter);

  json mccot;
  mccot["use_caption"] = manifest.mccot.use_caption;
  mccot["use_guide"] = manifest.mccot.use_guide;
  mccot["summarizer"] = to_string(manifest.mccot.summarizer);
  json modules = json::array();
  for (ModuleKind module : manifest.mccot.enabled_modules) {
    modules.push_back(to_string(module));
  }
  mccot["enabled_modules"] = std::move(modules);
  j["mccot"] = std::move(mccot);

  j["llm"] = descriptor_to_json(manifest.llm);
  j["mllm"] = descriptor_to_json(manifest.mllm);
  j["prompt_versions"] = manifest.prompt_versions;
  j["temperatures"] = manifest.temperatures;
  j["recall_mode"] = to_string(manifest.recall_mode);
  j["accuracy_scaling"] = to_string(manifest.scaling);
  j["stopwords_version"] = manifest.stopwords_version;
  j["workers"] = manifest.workers;
  j["cache_enabled"] = manifest.cache_enabled;

  json excluded = json::array();
  for (const auto& ex : manifest.excluded) {
    excluded.push_back({{"item_id", ex.item_id}, {"reason", ex.reason}});
  }
  j["excluded"] = std::move(excluded);
  j["config_digest"] = manifest.config_digest;
  return j.dump(2);
}

RunManifest manifest_from_json(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorClass::Storage, "manifest is not valid JSON");
  }
  RunManifest m;
  m.run_id = j.value("run_id", "");
  m.created_at = j.value("created_at", "");
  m.artifact_version = j.value("artifact_version", "");
  m.framework = framework_from_string(j.value("framework", "mc_cot"));
  m.dataset = dataset_kind_from_string(j.value("dataset", "slake"));
  m.dataset_root = j.value("dataset_root", "");

  if (j.contains("filter")) {
    const json& filter = j["filter"];
    m.filter.split = split_from_string(filter.value("split", "test"));
    m.filter.answer_types.clear();
    for (const auto& type : filter.value("answer_types", json::array())) {
      m.filter.answer_types.insert(
          answer_type_from_string(type.get<std::string>()));
    }
    m.filter.language = filter.value("language", "en");
    if (filter.contains("limit")) {
      m.filter.limit = filter["limit"].get<std::size_t>();
    }
  }

  if (j.contains("mccot")) {
    const json& mccot = j["mccot"];
    m.mccot.use_caption = mccot.value("use_caption", true);
    m.mccot.use_guide = mccot.value("use_guide", true);
    m.mccot.summarizer = summarizer_from_string(mccot.value("summarizer", "llm"));
    m.mccot.enabled_modules.clear();
    for (const auto& module : mccot.value("enabled_modules", json::array())) {
      m.mccot.enabled_modules.push_back(
          module_from_string(module.get<std::string>()));
    }
  }

  if (j.contains("llm")) m.llm = descriptor_from_json(j["llm"]);
  if (j.contains("mllm")) m.mllm = descriptor_from_json(j["mllm"]);
  if (j.contains("prompt_versions")) {
    for (const auto& [id, version] : j["prompt_versions"].items()) {
      m.prompt_versions[id] = version.get<std::string>();
    }
  }
  if (j.contains("temperatures")) {
    for (const auto& [tag, value] : j["temperatures"].items()) {
      m.temperatures[tag] = value.get<double>();
    }
  }
  m.recall_mode = recall_mode_from_string(j.value("recall_mode", "token_fraction"));
  m.scaling =
      accuracy_scaling_from_string(j.value("accuracy_scaling", "mean_over_4"));
  m.stopwords_version = j.value("stopwords_version", "");
  m.workers = j.value("workers", 1);
  m.cache_enabled = j.value("cache_enabled", true);
  for (const auto& ex : j.value("excluded", json::array())) {
    m.excluded.push_back(
        {ex.value("item_id", ""), ex.value("reason", "")});
  }
  m.config_digest = j.value("config_digest", "");
  return m;
}

std::string to_json_line(const ResultRow& row) {
  json j;
  j["schema_version"] = ResultRow::kSchemaVersion;
  j["item_id"] = row.item_id;
  j["dataset"] = row.dataset;
  j["framework"] = row.framework;
  j["recall_mode"] = to_string(row.recall_mode);
  j["recall"] = row.recall;
  j["matched_tokens"] = row.matched_tokens;
  j["total_tokens"] = row.total_tokens;
  j["unmeasurable"] = row.unmeasurable;
  j["graded"] = row.graded;
  j["raw_grade"] = row.raw_grade;
  j["judge_parse_fallback"] = row.judge_parse_fallback;
  j["judge_text_digest"] = row.judge_text_digest;
  return j.dump();
}

ResultRow result_row_from_json_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(ErrorClass::Storage, "result line is not valid JSON");
  }
  ResultRow row;
  row.item_id = j.value("item_id", "");
  row.dataset = j.value("dataset", "");
  row.framework = j.value("framework", "");
  row.recall_mode = recall_mode_from_string(j.value("recall_mode", "token_fraction"));
  row.recall = j.value("recall", 0.0);
  for (const auto& token : j.value("matched_tokens", json::array())) {
    row.matched_tokens.push_back(token.get<std::string>());
  }
  row.total_tokens = j.value("total_tokens", 0);
  row.unmeasurable = j.value("unmeasurable", false);
  row.graded = j.value("graded", false);
  row.raw_grade = j.value("raw_grade", 0);
  row.judge_parse_fallback = j.value("judge_parse_fallback", false);
  row.judge_text_digest = j.value("judge_text_digest", "");
  return row;
}

RunStore::RunStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) {
    throw Error(ErrorClass::Storage,
                "cannot create run store root: " + root_.string());
  }
}

fs::path RunStore::run_dir(const std::string& run_id) const {
  return root_ / run_id;
}

bool RunStore::run_exists(const std::string& run_id) const {
  return fs::exists(run_dir(run_id) / "manifest.json");
}

std::vector<std::string> RunStore::list_runs() const {
  std::vector<std::string> runs;
  for (const auto& entry : fs::directory_iterator(root_)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      runs.push_back(entry.path().filename().string());
    }
  }
  std::sort(runs.begin(), runs.end());
  return runs;
}

void RunStore::create_run(const RunManifest& manifest) {
  if (manifest.run_id.empty()) {
    throw Error(ErrorClass::Contract, "manifest has no run_id");
  }
  if (run_exists(manifest.run_id)) {
    throw Error(ErrorClass::Storage, "run already exists: " + manifest.run_id);
  }
  fs::path dir = run_dir(manifest.run_id);
  std::error_code ec;
  fs::create_directories(dir / "cache", ec);
  if (ec) {
    throw Error(ErrorClass::Storage, "cannot create run dir: " + dir.string());
  }
  write_file_atomically(dir / "manifest.json", manifest_to_json(manifest));
}

RunManifest RunStore::load_manifest(const std::string& run_id) const {
  return manifest_from_json(
      read_file(run_dir(run_id) / "manifest.json", "run manifest"));
}

void RunStore::append_transcript(const std::string& run_id,
                                 const Transcript& transcript) {
  TranscriptWriter writer(*this, run_id);
  writer.append(transcript);
}

std::vector<Transcript> RunStore::load_transcripts(const std::string& run_id) const {
  if (!run_exists(run_id)) {
    throw Error(ErrorClass::NotFound, "unknown run: " + run_id);
  }
  return load_jsonl<Transcript>(run_dir(run_id) / "transcripts.jsonl",
                                "transcript", transcript_from_json_line);
}

std::map<std::string, Transcript> RunStore::effective_transcripts(
    const std::string& run_id) const {
  std::map<std::string, Transcript> out;
  for (auto& t : load_transcripts(run_id)) {
    out.insert_or_assign(t.item_id, std::move(t));
  }
  return out;
}

std::set<std::string> RunStore::load_completed(const std::string& run_id) const {
  std::set<std::string> out;
  for (const auto& t : load_transcripts(run_id)) {
    if (t.succeeded()) out.insert(t.item_id);
  }
  return out;
}

std::shared_ptr<ResponseCache> RunStore::open_cache(const std::string& run_id) const {
  return std::make_shared<ResponseCache>(run_dir(run_id) / "cache");
}

void RunStore::append_result(const std::string& run_id, const ResultRow& row) {
  if (!run_exists(run_id)) {
    throw Error(ErrorClass::NotFound, "unknown run: " + run_id);
  }
  append_line(run_dir(run_id) / "results.jsonl", to_json_line(row));
}

std::vector<ResultRow> RunStore::load_results(const std::string& run_id) const {
  if (!run_exists(run_id)) {
    throw Error(ErrorClass::NotFound, "unknown run: " + run_id);
  }
  return load_jsonl<ResultRow>(run_dir(run_id) / "results.jsonl", "result",
                               result_row_from_json_line);
}

std::map<std::string, ResultRow> RunStore::effective_results(
    const std::string& run_id) const {
  std::map<std::string, ResultRow> out;
  for (auto& row : load_results(run_id)) {
    out.insert_or_assign(row.item_id, std::move(row));
  }
  return out;
}

RunLock::RunLock(const fs::path& run_dir) {
  fs::path lock_path = run_dir / "lock";
  fd_ = ::open(lock_path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    throw Error(ErrorClass::Storage,
                "cannot open lock file: " + lock_path.string());
  }
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorClass::Storage,
                "run is locked by another process: " + run_dir.string());
  }
}

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

fs::path transcripts_path_checked(const RunStore& store,
                                  const std::string& run_id) {
  if (!store.run_exists(run_id)) {
    throw Error(ErrorClass::NotFound, "unknown run: " + run_id);
  }
  return store.run_dir(run_id) / "transcripts.jsonl";
}

}  // namespace

TranscriptWriter::TranscriptWriter(const RunStore& store, const std::string& run_id)
    : path_(transcripts_path_checked(store, run_id)),
      lock_(store.run_dir(run_id)) {
  succeeded_ids_ = store.load_completed(run_id);
}

void TranscriptWriter::append(const Transcript& transcript) {
  if (transcript.item_id.empty()) {
    throw Error(ErrorClass::Contract, "transcript has no item_id");
  }
  if (succeeded_ids_.count(transcript.item_id)) {
    throw Error(ErrorClass::Storage,
                "item already has a succeeded transcript: " + transcript.item_id);
  }
  append_line(path_, to_json_line(transcript));
  if (transcript.succeeded()) succeeded_ids_.insert(transcript.item_id);
}

std::shared_ptr<Backend> make_replay_backend(const RunStore& store,
                                             const std::string& run_id,
                                             const std::string& model_id) {
  auto entries = std::make_shared<std::map<std::string, ReplayEntry>>();
  for (const auto& transcript : store.load_transcripts(run_id)) {
    for (const auto& call : transcript.calls) {
      (*entries)[call.digest] = ReplayEntry{call.response_text, call.usage};
    }
  }
  return std::make_shared<ReplayBackend>(
      std::shared_ptr<const std::map<std::string, ReplayEntry>>(entries),
      model_id);
}

}  // namespace medcot
