#include "medcot/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <future>

#include "medcot/output_parsing.hpp"

namespace medcot {

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

constexpr const char* kMissingCaption = "(no caption available)";

}  // namespace

const char* to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::Radiology: return "radiology";
    case ModuleKind::Anatomy: return "anatomy";
    case ModuleKind::Pathology: return "pathology";
  }
  return "radiology";
}

bool try_module_from_string(const std::string& s, ModuleKind& out) {
  std::string lowered = s;
  std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lowered == "radiology") {
    out = ModuleKind::Radiology;
    return true;
  }
  if (lowered == "anatomy") {
    out = ModuleKind::Anatomy;
    return true;
  }
  if (lowered == "pathology") {
    out = ModuleKind::Pathology;
    return true;
  }
  return false;
}

ModuleKind module_from_string(const std::string& s) {
  ModuleKind out;
  if (!try_module_from_string(s, out)) {
    throw Error(ErrorClass::Config, "unknown module: '" + s + "'");
  }
  return out;
}

const char* to_string(Summarizer s) {
  return s == Summarizer::LLM ? "llm" : "mllm";
}

Summarizer summarizer_from_string(const std::string& s) {
  if (s == "llm") return Summarizer::LLM;
  if (s == "mllm") return Summarizer::MLLM;
  throw Error(ErrorClass::Config, "unknown summarizer: '" + s + "'");
}

bool McCotConfig::is_enabled(ModuleKind kind) const {
  return std::find(enabled_modules.begin(), enabled_modules.end(), kind) !=
         enabled_modules.end();
}

double StageTemperatures::lookup(const std::string& tag) const {
  auto it = overrides.find(tag);
  if (it != overrides.end()) return it->second;
  std::size_t colon = tag.find(':');
  if (colon != std::string::npos) {
    it = overrides.find(tag.substr(0, colon));
    if (it != overrides.end()) return it->second;
  }
  return tag == "judge" ? 0.0 : 0.2;
}

Backend& StageRuntime::backend_for(BackendRole role) const {
  const auto& backend = role == BackendRole::LLM ? llm : mllm;
  if (!backend) {
    throw Error(ErrorClass::Config,
                std::string("no ") + to_string(role) + " backend configured");
  }
  return *backend;
}

ChatResponse invoke_stage(const StageRuntime& rt, BackendRole role,
                          const std::string& tag, std::vector<Message> messages,
                          CallSink* sink) {
  Backend& backend = rt.backend_for(role);
  ChatRequest request;
  request.backend_role = role;
  request.model_id = backend.model_id();
  request.messages = std::move(messages);
  request.temperature = rt.temperatures.lookup(tag);
  request.max_tokens = rt.max_tokens;
  request.request_tag = tag;

  RetryOutcome outcome = with_retry(backend, request, rt.retry);
  if (sink) {
    CallRecord record;
    record.digest = cache_key(request);
    record.tag = tag;
    record.role = role;
    record.response_text = outcome.response.text;
    record.usage = outcome.response.usage;
    record.latency_ms = outcome.response.latency_ms;
    record.from_cache = outcome.response.from_cache;
    record.attempts = outcome.attempts;
    sink->record(std::move(record));
  }
  return outcome.response;
}

namespace {

/// Renders through the runtime's catalog at its pinned version.
std::string render_prompt(const StageRuntime& rt, const std::string& template_id,
                          const std::map<std::string, std::string>& bindings) {
  if (!rt.prompts) {
    throw Error(ErrorClass::Config, "stage runtime has no prompt catalog");
  }
  return rt.prompts->render(template_id, rt.prompt_version, bindings).text;
}

Message user_message(std::string text) {
  Message msg;
  msg.role = ChatRole::User;
  msg.text = std::move(text);
  return msg;
}

Message user_message_with_image(std::string text, const ImageRef& image) {
  Message msg = user_message(std::move(text));
  msg.images.push_back(image);
  return msg;
}

[[noreturn]] void rethrow_as_stage(const std::string& stage) {
  try {
    throw;
  } catch (const StageFailure&) {
    throw;
  } catch (const Error& err) {
    throw StageFailure(stage, err);
  } catch (const std::exception& ex) {
    throw StageFailure(stage, Error(ErrorClass::Transport, ex.what()));
  }
}

}  // namespace

std::string generate_caption(const StageRuntime& rt, const PipelineInput& input,
                             CallSink* sink, std::vector<std::string>* warnings) {
  try {
    std::string prompt =
        render_prompt(rt, "caption", {{"question", input.question}});
    ChatResponse resp =
        invoke_stage(rt, BackendRole::MLLM, "caption",
                     {user_message_with_image(std::move(prompt), input.image)},
                     sink);
    std::string caption = trim_copy(resp.text);
    if (caption.empty() && warnings) {
      warnings->push_back("caption: model returned empty output");
    }
    return caption;
  } catch (...) {
    rethrow_as_stage("caption");
  }
}

TaskAssignment assign_tasks(const StageRuntime& rt, const PipelineInput& input,
                            const McCotConfig& config, CallSink* sink) {
  try {
    std::string caption_text =
        input.caption && !trim_copy(*input.caption).empty() ? *input.caption
                                                            : kMissingCaption;
    std::string prompt = render_prompt(
        rt, "assign_tasks",
        {{"question", input.question}, {"caption", std::move(caption_text)}});
    ChatResponse resp = invoke_stage(rt, BackendRole::LLM, "assign_tasks",
                                     {user_message(std::move(prompt))}, sink);
    return parse_task_assignment(resp.text, input.question,
                                 config.enabled_modules);
  } catch (...) {
    rethrow_as_stage("assign_tasks");
  }
}

Guide generate_guide(const StageRuntime& rt, ModuleKind module,
                     const std::string& task, CallSink* sink) {
  const std::string tag = std::string("guide:") + to_string(module);
  try {
    std::string prompt = render_prompt(
        rt, "guide", {{"module", to_string(module)}, {"task", task}});
    ChatResponse resp = invoke_stage(rt, BackendRole::LLM, tag,
                                     {user_message(std::move(prompt))}, sink);
    return Guide{module, trim_copy(resp.text)};
  } catch (...) {
    rethrow_as_stage(tag);
  }
}

ModuleResponse extract_features(const StageRuntime& rt, const ImageRef& image,
                                ModuleKind module, const std::string& task,
                                const std::optional<Guide>& guide,
                                CallSink* sink) {
  const std::string tag = std::string("extract:") + to_string(module);
  try {
    std::string guide_section;
    if (guide && !guide->text.empty()) {
      guide_section = "Guidance from a specialist:\n" + guide->text + "\n\n";
    }
    std::string prompt = render_prompt(
        rt, "extract",
        {{"task", task}, {"guide_section", std::move(guide_section)}});
    ChatResponse resp =
        invoke_stage(rt, BackendRole::MLLM, tag,
                     {user_message_with_image(std::move(prompt), image)}, sink);
    return ModuleResponse{module, trim_copy(resp.text)};
  } catch (...) {
    rethrow_as_stage(tag);
  }
}

FinalAnswer synthesize_answer(const StageRuntime& rt, const PipelineInput& input,
                              const std::vector<ModuleResponse>& responses,
                              const McCotConfig& config, CallSink* sink) {
  try {
    std::string caption_section;
    if (config.use_caption && input.caption &&
        !trim_copy(*input.caption).empty()) {
      caption_section = "Image description: " + *input.caption;
    }
    std::string joined;
    for (const auto& resp : responses) {
      if (!joined.empty()) joined += '\n';
      joined += "- ";
      joined += to_string(resp.module);
      joined += ": ";
      joined += resp.text;
    }
    std::string prompt =
        render_prompt(rt, "synthesize", {{"question", input.question},
                                         {"caption_section", caption_section},
                                         {"responses", joined}});

    ChatResponse resp;
    if (config.summarizer == Summarizer::MLLM) {
      resp = invoke_stage(
          rt, BackendRole::MLLM, "synthesize",
          {user_message_with_image(std::move(prompt), input.image)}, sink);
    } else {
      resp = invoke_stage(rt, BackendRole::LLM, "synthesize",
                          {user_message(std::move(prompt))}, sink);
    }
    return parse_final_answer(resp.text);
  } catch (...) {
    rethrow_as_stage("synthesize");
  }
}

namespace {

/// One fan-out slot: the module's own sink keeps concurrent records apart;
/// they are merged into the transcript in canonical module order after the
/// phase joins.
template <typename T>
struct PhaseJob {
  ModuleKind module;
  std::shared_ptr<VectorSink> sink;
  std::future<T> future;
};

template <typename T, typename Fn>
std::map<ModuleKind, T> run_phase(const std::vector<ModuleKind>& modules,
                                  std::vector<CallRecord>& calls, Fn&& make_job) {
  std::vector<PhaseJob<T>> jobs;
  jobs.reserve(modules.size());
  for (ModuleKind module : modules) {
    auto sink = std::make_shared<VectorSink>();
    auto future = std::async(std::launch::async, make_job, module, sink);
    jobs.push_back(PhaseJob<T>{module, std::move(sink), std::move(future)});
  }

  std::map<ModuleKind, T> results;
  std::exception_ptr first_error;
  for (auto& job : jobs) {  // canonical order: modules arrive pre-sorted
    try {
      results.emplace(job.module, job.future.get());
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
    job.sink->append_to(calls);
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace

Transcript run_mc_cot(const VqaItem& item, const ImageRef& image,
                      const McCotConfig& config, const StageRuntime& rt) {
  Transcript t;
  t.item_id = item.item_id;
  auto run_started = std::chrono::steady_clock::now();

  PipelineInput input;
  input.question = item.question;
  input.image = image;

  VectorSink sink;
  try {
    if (config.use_caption) {
      auto started = std::chrono::steady_clock::now();
      std::string caption = generate_caption(rt, input, &sink, &t.warnings);
      t.stage_ms["caption"] = ms_since(started);
      t.caption = caption;
      input.caption = std::move(caption);
      sink.append_to(t.calls);
    }

    {
      auto started = std::chrono::steady_clock::now();
      TaskAssignment assignment = assign_tasks(rt, input, config, &sink);
      t.stage_ms["assign_tasks"] = ms_since(started);
      sink.append_to(t.calls);
      if (assignment.fallback_used) {
        t.warnings.push_back("assign_tasks: parse fallback used");
      }
      t.assignment = std::move(assignment);
    }
    const TaskAssignment& assignment = *t.assignment;

    std::map<ModuleKind, Guide> guides;
    if (config.use_guide) {
      auto started = std::chrono::steady_clock::now();
      guides = run_phase<Guide>(
          assignment.activated, t.calls,
          [&](ModuleKind module, std::shared_ptr<VectorSink> phase_sink) {
            return generate_guide(rt, module, assignment.tasks.at(module),
                                  phase_sink.get());
          });
      t.stage_ms["guide"] = ms_since(started);
      for (const auto& [module, guide] : guides) {
        t.guides[module] = guide.text;
      }
    }

    std::map<ModuleKind, ModuleResponse> extracted;
    {
      auto started = std::chrono::steady_clock::now();
      extracted = run_phase<ModuleResponse>(
          assignment.activated, t.calls,
          [&](ModuleKind module, std::shared_ptr<VectorSink> phase_sink) {
            std::optional<Guide> guide;
            if (auto it = guides.find(module); it != guides.end()) {
              guide = it->second;
            }
            return extract_features(rt, image, module,
                                    assignment.tasks.at(module), guide,
                                    phase_sink.get());
          });
      t.stage_ms["extract"] = ms_since(started);
      for (const auto& [module, resp] : extracted) {
        t.responses[module] = resp.text;
      }
    }

    {
      auto started = std::chrono::steady_clock::now();
      std::vector<ModuleResponse> ordered;
      ordered.reserve(assignment.activated.size());
      for (ModuleKind module : assignment.activated) {
        ordered.push_back(extracted.at(module));
      }
      FinalAnswer answer =
          synthesize_answer(rt, input, ordered, config, &sink);
      t.stage_ms["synthesize"] = ms_since(started);
      sink.append_to(t.calls);
      if (answer.parse_fallback_used) {
        t.warnings.push_back("synthesize: parse fallback used");
      }
      t.final_answer = std::move(answer);
    }

    t.status = RunStatus::Succeeded;
  } catch (const StageFailure& failure) {
    sink.append_to(t.calls);
    t.status = RunStatus::Failed;
    t.failed_stage = failure.stage();
    t.error = failure.what();
  }

  t.total_ms = ms_since(run_started);
  return t;
}

}  // namespace medcot
