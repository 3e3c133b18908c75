#include "medcot/report.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "medcot/errors.hpp"
#include "medcot/runner.hpp"
#include "medcot/version.hpp"

namespace fs = std::filesystem;

namespace medcot {

namespace {

std::string fixed2(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", value);
  return buf;
}

bool cell_less(const MetricsSummary& a, const MetricsSummary& b) {
  if (a.framework != b.framework) return a.framework < b.framework;
  return a.dataset < b.dataset;
}

/// Two runs of the same (framework, dataset) cell merge exactly: the stored
/// means are unscaled back to sums using the stored counts.
MetricsSummary merge_cells(const MetricsSummary& a, const MetricsSummary& b) {
  MetricsSummary out = a;
  out.n_items += b.n_items;
  out.n_failed += b.n_failed;
  out.n_unmeasurable += b.n_unmeasurable;

  const double recall_sum = a.recall_pct / 100.0 * a.n_evaluated +
                            b.recall_pct / 100.0 * b.n_evaluated;
  out.n_evaluated = a.n_evaluated + b.n_evaluated;
  out.recall_pct =
      out.n_evaluated > 0 ? recall_sum / out.n_evaluated * 100.0 : 0.0;

  auto unscale = [](const MetricsSummary& s) {
    if (!s.has_accuracy) return 0.0;
    double mean = s.scaling == AccuracyScaling::MeanOver4
                      ? s.accuracy_pct / 100.0 * 4.0
                      : s.accuracy_pct / 100.0 * 3.0 + 1.0;
    return mean * s.n_graded;
  };
  const double grade_sum = unscale(a) + unscale(b);
  out.n_graded = a.n_graded + b.n_graded;
  out.has_accuracy = out.n_graded > 0;
  if (out.has_accuracy) {
    out.accuracy_pct = scale_accuracy(grade_sum / out.n_graded, out.scaling);
  }
  return out;
}

}  // namespace

Report build_report(const ReportInputs& inputs) {
  if (inputs.summaries.empty()) {
    throw Error(ErrorClass::Contract, "nothing to report: no evaluated runs");
  }

  // One row per (framework, dataset) cell, sorted.
  std::vector<MetricsSummary> rows;
  for (const auto& summary : inputs.summaries) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const MetricsSummary& r) {
      return r.framework == summary.framework && r.dataset == summary.dataset;
    });
    if (it == rows.end()) {
      rows.push_back(summary);
    } else {
      *it = merge_cells(*it, summary);
    }
  }
  std::sort(rows.begin(), rows.end(), cell_less);

  Report report;

  report.csv = "framework,dataset,n,recall_pct,accuracy_pct,n_failed\n";
  for (const auto& row : rows) {
    report.csv += row.framework;
    report.csv += ',';
    report.csv += row.dataset;
    report.csv += ',';
    report.csv += std::to_string(row.n_items);
    report.csv += ',';
    report.csv += fixed2(row.recall_pct);
    report.csv += ',';
    if (row.has_accuracy) report.csv += fixed2(row.accuracy_pct);
    report.csv += ',';
    report.csv += std::to_string(row.n_failed);
    report.csv += '\n';
  }

  std::string md;
  md += "# Evaluation report\n\n";
  md += "| framework | dataset | n | recall | accuracy | failed |\n";
  md += "|---|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    md += "| " + row.framework + " | " + row.dataset + " | " +
          std::to_string(row.n_items) + " | " + fixed2(row.recall_pct) + " | " +
          (row.has_accuracy ? fixed2(row.accuracy_pct) : std::string("-")) +
          " | " + std::to_string(row.n_failed) + " |\n";
  }

  md += "\n## Provenance\n\n";
  md += "- artifact version: " + inputs.artifact_version + "\n";
  md += "- stopwords version: " + inputs.stopwords_version + "\n";
  std::set<std::string> recall_modes;
  std::set<std::string> scalings;
  for (const auto& row : rows) {
    recall_modes.insert(to_string(row.recall_mode));
    scalings.insert(to_string(row.scaling));
  }
  md += "- recall mode:";
  for (const auto& mode : recall_modes) md += " " + mode;
  md += "\n- accuracy scaling:";
  for (const auto& scaling : scalings) md += " " + scaling;
  md += "\n- prompt versions:";
  if (inputs.prompt_versions.empty()) {
    md += " (none)";
  } else {
    for (const auto& [id, version] : inputs.prompt_versions) {
      md += " " + id + "=" + version;
    }
  }
  md += "\n";
  report.markdown = std::move(md);
  return report;
}

Report build_report(const RunStore& store, const std::vector<std::string>& run_ids) {
  ReportInputs inputs;
  inputs.artifact_version = kArtifactVersion;
  for (const auto& run_id : run_ids) {
    RunManifest manifest = store.load_manifest(run_id);
    inputs.summaries.push_back(summarize_run(store, run_id));
    for (const auto& [id, version] : manifest.prompt_versions) {
      inputs.prompt_versions[id] = version;
    }
    inputs.stopwords_version = manifest.stopwords_version;
  }
  return build_report(inputs);
}

void write_report(const Report& report, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorClass::Storage, "cannot create report dir: " + out_dir);
  }
  auto write = [&](const char* name, const std::string& content) {
    std::ofstream out(fs::path(out_dir) / name, std::ios::trunc);
    if (!out) {
      throw Error(ErrorClass::Storage,
                  std::string("cannot write report file: ") + name);
    }
    out << content;
  };
  write("report.md", report.markdown);
  write("report.csv", report.csv);
}

std::string render_transcript(const Transcript& t) {
  std::string out;
  out += "item: " + t.item_id + "\n";
  out += "status: " + std::string(t.succeeded() ? "succeeded" : "failed") + "\n";
  if (!t.succeeded()) {
    out += "failed stage: " + t.failed_stage + "\n";
    out += "error: " + t.error + "\n";
  }
  if (t.caption) {
    out += "\n== Caption ==\n" + *t.caption + "\n";
  }
  if (t.assignment) {
    out += "\n== Task assignment ==\n";
    out += "rationale: " + t.assignment->rationale + "\n";
    if (t.assignment->fallback_used) out += "(parse fallback used)\n";
    for (ModuleKind module : t.assignment->activated) {
      out += std::string("- ") + to_string(module) + ": " +
             t.assignment->tasks.at(module) + "\n";
    }
  }
  for (ModuleKind module : kAllModules) {
    auto guide = t.guides.find(module);
    auto response = t.responses.find(module);
    if (guide == t.guides.end() && response == t.responses.end()) continue;
    out += std::string("\n== Module: ") + to_string(module) + " ==\n";
    if (guide != t.guides.end()) {
      out += "guide:\n" + guide->second + "\n";
    }
    if (response != t.responses.end()) {
      out += "response:\n" + response->second + "\n";
    }
  }
  if (t.final_answer) {
    out += "\n== Final answer ==\n";
    if (!t.final_answer->rationale.empty()) {
      out += "rationale: " + t.final_answer->rationale + "\n";
    }
    out += "answer: " + t.final_answer->answer + "\n";
    if (t.final_answer->parse_fallback_used) out += "(parse fallback used)\n";
  }
  if (!t.warnings.empty()) {
    out += "\n== Warnings ==\n";
    for (const auto& warning : t.warnings) out += "- " + warning + "\n";
  }
  out += "\n== Calls ==\n";
  for (const auto& call : t.calls) {
    out += "- " + call.tag + " [" + to_string(call.role) + "] digest " +
           call.digest.substr(0, 12) + " attempts=" +
           std::to_string(call.attempts) +
           (call.from_cache ? " (cached)" : "") + " " +
           std::to_string(call.latency_ms) + "ms tokens=" +
           std::to_string(call.usage.prompt_tokens) + "+" +
           std::to_string(call.usage.completion_tokens) + "\n";
  }
  out += "total: " + std::to_string(t.total_ms) + "ms\n";
  return out;
}

}  // namespace medcot
