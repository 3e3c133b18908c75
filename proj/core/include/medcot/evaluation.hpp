#pragma once

#include <string>
#include <vector>

#include "medcot/pipeline.hpp"

namespace medcot {

/// Version tag of the fixed stopword list; stamped into every report
/// because changing the list changes recall.
inline constexpr const char* kStopwordsVersion = "v1";

/// Lowercase, split on any non-alphanumeric character (hyphens split),
/// drop stopwords. Order-preserving.
std::vector<std::string> normalize_text(std::string_view text);

enum class RecallMode { TokenFraction, BinaryContainment };
const char* to_string(RecallMode mode);
RecallMode recall_mode_from_string(const std::string& s);

struct RecallResult {
  std::string item_id;
  std::vector<std::string> matched_tokens;
  int total_tokens = 0;
  double score = 0.0;
  RecallMode mode = RecallMode::TokenFraction;
};

/// Fraction of distinct normalized ground-truth tokens present in the
/// normalized answer (or all-or-nothing under binary containment). Always
/// computed on the final answer, never the rationale. Throws
/// Error{Unmeasurable} when the ground truth normalizes to no tokens.
RecallResult recall_score(const std::string& ground_truth,
                          const std::string& final_answer, RecallMode mode);

struct GradedScore {
  std::string item_id;
  int raw = 1;  // in {1..4}
  std::string judge_text;
  bool parse_fallback_used = false;
};

/// Renders the judge template around the four-level rubric, calls the
/// judge backend at temperature 0, and parses the first integer in {1..4}
/// from its output (unparseable output grades 1 with the fallback flag).
GradedScore grade_accuracy(const StageRuntime& judge_rt, const std::string& question,
                           const std::string& ground_truth,
                           const std::string& final_answer,
                           CallSink* sink = nullptr);

enum class AccuracyScaling { MeanOver4, Minus1Over3 };
const char* to_string(AccuracyScaling scaling);
AccuracyScaling accuracy_scaling_from_string(const std::string& s);

/// mean(raw) mapped onto [.., 100]: mean/4*100 by default (floor 25), or
/// (mean-1)/3*100 when selected.
double scale_accuracy(double mean_raw, AccuracyScaling scaling);

struct MetricsSummary {
  std::string dataset;
  std::string framework;
  int n_items = 0;   // evaluated + failed
  int n_failed = 0;
  int n_evaluated = 0;
  int n_unmeasurable = 0;
  int n_graded = 0;
  double recall_pct = 0.0;
  double accuracy_pct = 0.0;
  bool has_accuracy = false;
  RecallMode recall_mode = RecallMode::TokenFraction;
  AccuracyScaling scaling = AccuracyScaling::MeanOver4;
};

struct ItemEvaluation {
  std::string item_id;
  double recall = 0.0;
  bool unmeasurable = false;
  bool graded = false;
  int raw_grade = 0;
};

/// Permutation-invariant aggregation over one dataset x framework cell.
/// Throws Error{Contract} when no item was evaluated.
MetricsSummary aggregate(const std::string& dataset, const std::string& framework,
                         const std::vector<ItemEvaluation>& items, int n_failed,
                         RecallMode mode, AccuracyScaling scaling);

}  // namespace medcot
