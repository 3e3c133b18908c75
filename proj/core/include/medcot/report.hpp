#pragma once

#include <string>
#include <vector>

#include "medcot/evaluation.hpp"
#include "medcot/runstore.hpp"
#include "medcot/transcript.hpp"

namespace medcot {

/// Tabular + markdown views over one or more finished runs. Output depends
/// only on the measured numbers and pinned versions (never on run ids or
/// timestamps), so identical experiments render byte-identical reports.
struct Report {
  std::string markdown;
  std::string csv;
};

struct ReportInputs {
  std::vector<MetricsSummary> summaries;
  std::map<std::string, std::string> prompt_versions;
  std::string stopwords_version;
  std::string artifact_version;
};

Report build_report(const ReportInputs& inputs);

/// Builds a report straight from run ids, pulling each run's summary and
/// provenance from the store.
Report build_report(const RunStore& store, const std::vector<std::string>& run_ids);

/// Writes report.md and report.csv under `out_dir`.
void write_report(const Report& report, const std::string& out_dir);

/// Human-readable view of one item's transcript: the call chain with stage
/// tags, prompt/response digests, intermediate artifacts and the outcome.
std::string render_transcript(const Transcript& transcript);

}  // namespace medcot
