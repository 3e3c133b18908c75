#include "medcot/frameworks.hpp"

#include <chrono>

#include "medcot/output_parsing.hpp"

namespace medcot {

const char* to_string(FrameworkKind kind) {
  switch (kind) {
    case FrameworkKind::McCot: return "mc_cot";
    case FrameworkKind::Direct: return "direct";
    case FrameworkKind::IICot: return "iicot";
    case FrameworkKind::FCCot: return "fccot";
    case FrameworkKind::QdCaption: return "qd_caption";
  }
  return "mc_cot";
}

FrameworkKind framework_from_string(const std::string& s) {
  if (s == "mc_cot") return FrameworkKind::McCot;
  if (s == "direct") return FrameworkKind::Direct;
  if (s == "iicot") return FrameworkKind::IICot;
  if (s == "fccot") return FrameworkKind::FCCot;
  if (s == "qd_caption") return FrameworkKind::QdCaption;
  throw Error(ErrorClass::Config, "unknown framework: '" + s + "'");
}

namespace {

std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::int64_t ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

std::string render_prompt(const StageRuntime& rt, const std::string& template_id,
                          const std::map<std::string, std::string>& bindings) {
  if (!rt.prompts) {
    throw Error(ErrorClass::Config, "stage runtime has no prompt catalog");
  }
  return rt.prompts->render(template_id, rt.prompt_version, bindings).text;
}

Message user_message(std::string text, const ImageRef* image = nullptr) {
  Message msg;
  msg.role = ChatRole::User;
  msg.text = std::move(text);
  if (image) msg.images.push_back(*image);
  return msg;
}

/// One baseline step: invoke, time, merge records; failures carry the tag.
std::string timed_stage(const StageRuntime& rt, BackendRole role,
                        const std::string& tag, std::string prompt,
                        const ImageRef* image, Transcript& t, VectorSink& sink) {
  auto started = std::chrono::steady_clock::now();
  try {
    ChatResponse resp = invoke_stage(rt, role, tag,
                                     {user_message(std::move(prompt), image)},
                                     &sink);
    t.stage_ms[tag] = ms_since(started);
    sink.append_to(t.calls);
    return resp.text;
  } catch (const StageFailure&) {
    sink.append_to(t.calls);
    throw;
  } catch (const Error& err) {
    sink.append_to(t.calls);
    throw StageFailure(tag, err);
  }
}

Transcript make_transcript(const VqaItem& item) {
  Transcript t;
  t.item_id = item.item_id;
  return t;
}

void finish_with_answer(Transcript& t, const std::string& raw,
                        const std::string& stage) {
  try {
    FinalAnswer answer = parse_final_answer(raw);
    if (answer.parse_fallback_used) {
      t.warnings.push_back(stage + ": parse fallback used");
    }
    t.final_answer = std::move(answer);
    t.status = RunStatus::Succeeded;
  } catch (const Error& err) {
    throw StageFailure(stage, err);
  }
}

void mark_failed(Transcript& t, const StageFailure& failure) {
  t.status = RunStatus::Failed;
  t.failed_stage = failure.stage();
  t.error = failure.what();
}

}  // namespace

Transcript run_direct(const VqaItem& item, const ImageRef& image,
                      const StageRuntime& rt) {
  Transcript t = make_transcript(item);
  auto started = std::chrono::steady_clock::now();
  VectorSink sink;
  try {
    std::string raw = timed_stage(rt, BackendRole::MLLM, "direct",
                                  item.question, &image, t, sink);
    // The whole reply is the answer; there is no reasoning step to strip.
    std::string answer = trim_copy(raw);
    if (answer.empty()) {
      throw StageFailure("direct",
                         Error(ErrorClass::Parse, "model returned no text"));
    }
    t.final_answer = FinalAnswer{"", std::move(answer), false};
    t.status = RunStatus::Succeeded;
  } catch (const StageFailure& failure) {
    mark_failed(t, failure);
  }
  t.total_ms = ms_since(started);
  return t;
}

Transcript run_iicot(const VqaItem& item, const ImageRef& image,
                     const StageRuntime& rt) {
  Transcript t = make_transcript(item);
  auto started = std::chrono::steady_clock::now();
  VectorSink sink;
  try {
    std::string guidance = trim_copy(timed_stage(
        rt, BackendRole::LLM, "iicot_guide",
        render_prompt(rt, "iicot_guide", {{"question", item.question}}),
        nullptr, t, sink));

    std::string rationale = trim_copy(timed_stage(
        rt, BackendRole::MLLM, "iicot_rationale",
        render_prompt(rt, "iicot_rationale",
                      {{"question", item.question}, {"guidance", guidance}}),
        &image, t, sink));

    std::string raw = timed_stage(
        rt, BackendRole::MLLM, "iicot_answer",
        render_prompt(rt, "iicot_answer", {{"question", item.question},
                                           {"guidance", guidance},
                                           {"rationale", rationale}}),
        &image, t, sink);
    finish_with_answer(t, raw, "iicot_answer");
    if (t.final_answer && t.final_answer->rationale.empty()) {
      t.final_answer->rationale = rationale;
    }
  } catch (const StageFailure& failure) {
    mark_failed(t, failure);
  }
  t.total_ms = ms_since(started);
  return t;
}

Transcript run_fccot(const VqaItem& item, const ImageRef& image,
                     const StageRuntime& rt) {
  Transcript t = make_transcript(item);
  auto started = std::chrono::steady_clock::now();
  VectorSink sink;
  try {
    std::string analysis = trim_copy(timed_stage(
        rt, BackendRole::MLLM, "fccot_analyze",
        render_prompt(rt, "fccot_analyze", {{"question", item.question}}),
        &image, t, sink));

    std::string fact_check = trim_copy(timed_stage(
        rt, BackendRole::MLLM, "fccot_fact_check",
        render_prompt(rt, "fccot_fact_check",
                      {{"question", item.question}, {"analysis", analysis}}),
        &image, t, sink));

    // The logic check deliberately goes to the text-only model so it judges
    // the reasoning, not the image.
    std::string logic_check = trim_copy(timed_stage(
        rt, BackendRole::LLM, "fccot_logic_check",
        render_prompt(rt, "fccot_logic_check",
                      {{"question", item.question}, {"analysis", analysis}}),
        nullptr, t, sink));

    std::string raw = timed_stage(
        rt, BackendRole::MLLM, "fccot_revise",
        render_prompt(rt, "fccot_revise", {{"question", item.question},
                                           {"analysis", analysis},
                                           {"fact_check", fact_check},
                                           {"logic_check", logic_check}}),
        &image, t, sink);
    finish_with_answer(t, raw, "fccot_revise");
    if (t.final_answer && t.final_answer->rationale.empty()) {
      t.final_answer->rationale = analysis;
    }
  } catch (const StageFailure& failure) {
    mark_failed(t, failure);
  }
  t.total_ms = ms_since(started);
  return t;
}

Transcript run_qd_caption(const VqaItem& item, const ImageRef& image,
                          const StageRuntime& rt) {
  Transcript t = make_transcript(item);
  auto started = std::chrono::steady_clock::now();
  VectorSink sink;
  try {
    PipelineInput input;
    input.question = item.question;
    input.image = image;

    auto caption_started = std::chrono::steady_clock::now();
    std::string caption;
    try {
      caption = generate_caption(rt, input, &sink, &t.warnings);
    } catch (...) {
      sink.append_to(t.calls);
      throw;
    }
    t.stage_ms["caption"] = ms_since(caption_started);
    sink.append_to(t.calls);
    t.caption = caption;

    std::string raw = timed_stage(
        rt, BackendRole::LLM, "qdcap_answer",
        render_prompt(rt, "qdcap_answer",
                      {{"question", item.question},
                       {"caption", caption.empty() ? "(no caption available)"
                                                   : caption}}),
        nullptr, t, sink);
    finish_with_answer(t, raw, "qdcap_answer");
  } catch (const StageFailure& failure) {
    mark_failed(t, failure);
  }
  t.total_ms = ms_since(started);
  return t;
}

Transcript run_framework(FrameworkKind kind, const VqaItem& item,
                         const ImageRef& image, const McCotConfig& config,
                         const StageRuntime& rt) {
  switch (kind) {
    case FrameworkKind::McCot: return run_mc_cot(item, image, config, rt);
    case FrameworkKind::Direct: return run_direct(item, image, rt);
    case FrameworkKind::IICot: return run_iicot(item, image, rt);
    case FrameworkKind::FCCot: return run_fccot(item, image, rt);
    case FrameworkKind::QdCaption: return run_qd_caption(item, image, rt);
  }
  throw Error(ErrorClass::Config, "unknown framework kind");
}

}  // namespace medcot
