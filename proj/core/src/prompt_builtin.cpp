#include "prompt_builtin.hpp"

namespace medcot::detail {

namespace {

PromptTemplate make(const char* id, std::set<std::string> bindings,
                    const char* body) {
  PromptTemplate tmpl;
  tmpl.template_id = id;
  tmpl.version = kBuiltinPromptVersion;
  tmpl.required_bindings = std::move(bindings);
  tmpl.body = body;
  return tmpl;
}

constexpr const char* kCaption =
    R"PROMPT(You are an experienced specialist examining a medical image.

Question: {question}

Please provide a detailed description of the features you believe are relevant to the question. Describe only what is visible in the image; do not answer the question itself.
)PROMPT";

constexpr const char* kAssignTasks =
    R"PROMPT(You are coordinating three specialist modules that analyze a medical image.

Module charters:
- radiology: Determine the appropriate imaging modality, identify the imaging plane, locate the lesion, and analyze the color/contrast characteristics to differentiate tissue types and abnormalities.
- anatomy: Identify the organ or anatomical structure involved and provide detailed information on the anatomical position and relations of the lesion within the body.
- pathology: Consider the number of lesions and their clinical significance, and provide a reasonable explanation for the phenomenon using pathology knowledge.

Question: {question}
Image description: {caption}

Decide which modules are needed to answer the question and give each one a concrete task. Activate only the modules that contribute to this question.

Reply in exactly this format, one ACTIVATE line per module:
RATIONALE: <why these modules>
ACTIVATE: <module name> | TASK: <task for that module>
)PROMPT";

constexpr const char* kGuide =
    R"PROMPT(You are a senior {module} specialist.

Task: {task}

Please use your medical knowledge to provide a guide on how to solve the task. You need to explain the features that the image may contain based on the task, and how to give the right answer from the perspective of the picture. Remember you are teaching a rookie to read a medical image. So make sure you break down medical or biological terms into intuitive descriptions, especially terms related to image features. You cannot give your speculation on the final answer.
)PROMPT";

constexpr const char* kExtract =
    R"PROMPT(Examine the medical image and complete the following task.

Task: {task}

{guide_section}Report the findings you can support from the image, stated concisely.
)PROMPT";

constexpr const char* kSynthesize =
    R"PROMPT(You are an experienced clinician answering a question about a medical image.

Question: {question}
{caption_section}
Specialist findings:
{responses}

Think through the findings step by step, then answer the question concisely.

Reply in exactly this format:
RATIONALE: <your reasoning>
ANSWER: <final answer>
)PROMPT";

constexpr const char* kIicotGuide =
    R"PROMPT(A vision model will answer a question about a medical image.

Question: {question}

Please use your medical knowledge to provide guidance on what to look for in the image to answer this question. You cannot give your speculation on the final answer.
)PROMPT";

constexpr const char* kIicotRationale =
    R"PROMPT(Question: {question}

Guidance: {guidance}

Following the guidance, reason step by step about what the image shows that is relevant to the question. Do not state a final answer yet.
)PROMPT";

constexpr const char* kIicotAnswer =
    R"PROMPT(Question: {question}

Guidance: {guidance}

Reasoning so far: {rationale}

Based on the image and the reasoning above, give the final answer.

Reply in exactly this format:
ANSWER: <final answer>
)PROMPT";

constexpr const char* kFccotAnalyze =
    R"PROMPT(Question: {question}

Analyze the medical image and reason step by step toward an answer. State your analysis and a tentative answer.
)PROMPT";

constexpr const char* kFccotFactCheck =
    R"PROMPT(Question: {question}

Analysis under review: {analysis}

Check the analysis against the image. Point out any claim about the image that is not supported, and confirm the ones that are.
)PROMPT";

constexpr const char* kFccotLogicCheck =
    R"PROMPT(Question: {question}

Analysis under review: {analysis}

Without seeing the image, check the reasoning for logical errors or inconsistencies. Point out any step that does not follow from the previous ones.
)PROMPT";

constexpr const char* kFccotRevise =
    R"PROMPT(Question: {question}

Original analysis: {analysis}

Fact check: {fact_check}

Logic check: {logic_check}

Revise the analysis in light of both checks and answer the question.

Reply in exactly this format:
ANSWER: <final answer>
)PROMPT";

constexpr const char* kQdcapAnswer =
    R"PROMPT(Question: {question}

Image description: {caption}

Answer the question using only the description above.

Reply in exactly this format:
ANSWER: <final answer>
)PROMPT";

constexpr const char* kJudge =
    R"PROMPT(You are grading a model's answer to a medical image question against the reference answer.

Question: {question}
Reference answer: {ground_truth}
Model answer: {answer}

Rate the model answer on a scale of 1 to 4:
1 point represents a refusal to answer or a completely incorrect answer.
2 points for answers with multiple guesses.
3 points for answers with minor conceptual deviations.
4 points indicate complete conceptual accuracy.

Reply with the single digit only.
)PROMPT";

}  // namespace

std::vector<PromptTemplate> builtin_prompt_templates() {
  std::vector<PromptTemplate> out;
  out.push_back(make("caption", {"question"}, kCaption));
  out.push_back(make("assign_tasks", {"question", "caption"}, kAssignTasks));
  out.push_back(make("guide", {"module", "task"}, kGuide));
  out.push_back(make("extract", {"task", "guide_section"}, kExtract));
  out.push_back(make("synthesize", {"question", "caption_section", "responses"},
                     kSynthesize));
  out.push_back(make("iicot_guide", {"question"}, kIicotGuide));
  out.push_back(make("iicot_rationale", {"question", "guidance"}, kIicotRationale));
  out.push_back(
      make("iicot_answer", {"question", "guidance", "rationale"}, kIicotAnswer));
  out.push_back(make("fccot_analyze", {"question"}, kFccotAnalyze));
  out.push_back(make("fccot_fact_check", {"question", "analysis"}, kFccotFactCheck));
  out.push_back(
      make("fccot_logic_check", {"question", "analysis"}, kFccotLogicCheck));
  out.push_back(make("fccot_revise",
                     {"question", "analysis", "fact_check", "logic_check"},
                     kFccotRevise));
  out.push_back(make("qdcap_answer", {"question", "caption"}, kQdcapAnswer));
  out.push_back(
      make("judge", {"question", "ground_truth", "answer"}, kJudge));
  return out;
}

}  // namespace medcot::detail
