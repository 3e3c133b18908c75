#include "medcot/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "medcot/output_parsing.hpp"

namespace medcot {

namespace {

// Version "v1" of the stopword list; kStopwordsVersion must change if it does.
const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",  "an", "the", "of",   "in", "on", "at",
      "to", "for", "with", "by", "from", "is", "are"};
  return words;
}

}  // namespace

std::vector<std::string> normalize_text(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      if (!stopwords().count(current)) tokens.push_back(current);
      current.clear();
    }
  };
  for (char c : text) {
    unsigned char uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      flush();  // any other character (hyphens included) splits tokens
    }
  }
  flush();
  return tokens;
}

const char* to_string(RecallMode mode) {
  return mode == RecallMode::TokenFraction ? "token_fraction"
                                           : "binary_containment";
}

RecallMode recall_mode_from_string(const std::string& s) {
  if (s == "token_fraction") return RecallMode::TokenFraction;
  if (s == "binary_containment") return RecallMode::BinaryContainment;
  throw Error(ErrorClass::Config, "unknown recall mode: '" + s + "'");
}

const char* to_string(AccuracyScaling scaling) {
  return scaling == AccuracyScaling::MeanOver4 ? "mean_over_4" : "minus1_over_3";
}

AccuracyScaling accuracy_scaling_from_string(const std::string& s) {
  if (s == "mean_over_4") return AccuracyScaling::MeanOver4;
  if (s == "minus1_over_3") return AccuracyScaling::Minus1Over3;
  throw Error(ErrorClass::Config, "unknown accuracy scaling: '" + s + "'");
}

RecallResult recall_score(const std::string& ground_truth,
                          const std::string& final_answer, RecallMode mode) {
  std::vector<std::string> gt_tokens = normalize_text(ground_truth);
  if (gt_tokens.empty()) {
    throw Error(ErrorClass::Unmeasurable,
                "ground truth normalizes to no tokens: '" + ground_truth + "'");
  }
  // Distinct ground-truth tokens, first-occurrence order.
  std::vector<std::string> distinct;
  for (const auto& token : gt_tokens) {
    if (std::find(distinct.begin(), distinct.end(), token) == distinct.end()) {
      distinct.push_back(token);
    }
  }

  std::vector<std::string> answer_tokens = normalize_text(final_answer);
  std::set<std::string> answer_set(answer_tokens.begin(), answer_tokens.end());

  RecallResult result;
  result.mode = mode;
  result.total_tokens = static_cast<int>(distinct.size());
  for (const auto& token : distinct) {
    if (answer_set.count(token)) result.matched_tokens.push_back(token);
  }
  const double fraction = static_cast<double>(result.matched_tokens.size()) /
                          static_cast<double>(distinct.size());
  result.score =
      mode == RecallMode::TokenFraction ? fraction : (fraction == 1.0 ? 1.0 : 0.0);
  return result;
}

GradedScore grade_accuracy(const StageRuntime& judge_rt,
                           const std::string& question,
                           const std::string& ground_truth,
                           const std::string& final_answer, CallSink* sink) {
  if (!judge_rt.prompts) {
    throw Error(ErrorClass::Config, "judge runtime has no prompt catalog");
  }
  std::string prompt =
      judge_rt.prompts
          ->render("judge", judge_rt.prompt_version,
                   {{"question", question},
                    {"ground_truth", ground_truth},
                    {"answer", final_answer}})
          .text;
  Message msg;
  msg.role = ChatRole::User;
  msg.text = std::move(prompt);
  ChatResponse resp =
      invoke_stage(judge_rt, BackendRole::LLM, "judge", {std::move(msg)}, sink);

  JudgeParse parsed = parse_judge_grade(resp.text);
  GradedScore score;
  score.raw = parsed.raw;
  score.judge_text = resp.text;
  score.parse_fallback_used = parsed.fallback_used;
  return score;
}

double scale_accuracy(double mean_raw, AccuracyScaling scaling) {
  if (scaling == AccuracyScaling::MeanOver4) return mean_raw / 4.0 * 100.0;
  return (mean_raw - 1.0) / 3.0 * 100.0;
}

MetricsSummary aggregate(const std::string& dataset, const std::string& framework,
                         const std::vector<ItemEvaluation>& items, int n_failed,
                         RecallMode mode, AccuracyScaling scaling) {
  MetricsSummary summary;
  summary.dataset = dataset;
  summary.framework = framework;
  summary.n_failed = n_failed;
  summary.recall_mode = mode;
  summary.scaling = scaling;

  double recall_sum = 0.0;
  double grade_sum = 0.0;
  for (const auto& item : items) {
    if (item.unmeasurable) {
      ++summary.n_unmeasurable;
    } else {
      ++summary.n_evaluated;
      recall_sum += item.recall;
    }
    if (item.graded) {
      ++summary.n_graded;
      grade_sum += item.raw_grade;
    }
  }
  summary.n_items = static_cast<int>(items.size()) + n_failed;

  if (summary.n_evaluated == 0 && summary.n_graded == 0) {
    throw Error(ErrorClass::Contract,
                "nothing evaluated for " + framework + " on " + dataset);
  }
  if (summary.n_evaluated > 0) {
    summary.recall_pct = recall_sum / summary.n_evaluated * 100.0;
  }
  if (summary.n_graded > 0) {
    summary.accuracy_pct = scale_accuracy(grade_sum / summary.n_graded, scaling);
    summary.has_accuracy = true;
  }
  return summary;
}

}  // namespace medcot
