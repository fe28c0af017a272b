#include "plancache/templates.hpp"

#include "plancache/errors.hpp"
#include "plancache/json_extract.hpp"

namespace plancache {

FilteredTrace rule_filter(const ExecutionLog& log) {
  if (!log.final_output) throw IncompleteLog();
  FilteredTrace trace;
  trace.task = log.query;
  trace.items.reserve(log.entries.size() * 2 + 1);
  for (const auto& round : log.entries) {
    trace.items.push_back({WorkflowKind::Message, round.plan});
    trace.items.push_back({WorkflowKind::Output, round.response});
  }
  trace.items.push_back({WorkflowKind::Answer, *log.final_output});
  return trace;
}

nlohmann::json serialize_trace(const FilteredTrace& trace) {
  auto workflow = nlohmann::json::array();
  for (const auto& item : trace.items) workflow.push_back({to_string(item.kind), item.content});
  return {{"task", trace.task}, {"workflow", std::move(workflow)}};
}

std::string cache_generation_prompt(const FilteredTrace& trace) {
  std::string prompt =
      "You will see a filtered JSON trace that shows the complete workflow of how a planner "
      "language model solves a complex task by collaborating with an actor language model. Clean "
      "up the element of each item in the workflow, so that we can reuse this trace as a "
      "reference template (independent from problem-specific variables like company name or "
      "fiscal year) when we meet similar tasks later.\n"
      "Requirements:\n"
      "(1) the first element in each \"workflow\" item can only be \"message\", \"output\", or "
      "\"answer\",\n"
      "(2) the task and the workflow should not contain problem-specific details or numbers, "
      "and\n"
      "(3) return the result in JSON format that can be parsed by Python's json.loads().\n"
      "IMPORTANT: The workflow must maintain the sequence of message->loop(output->message/answer) "
      "to ensure proper functioning. Always start with a \"message\" and end with an \"answer\".\n"
      "JSON trace: ";
  prompt += serialize_trace(trace).dump();
  return prompt;
}

namespace {

WorkflowItem parse_generated_item(const nlohmann::json& item, std::size_t index) {
  const nlohmann::json* kind = nullptr;
  const nlohmann::json* content = nullptr;
  if (item.is_array() && item.size() >= 2) {
    kind = &item[0];
    content = &item[1];
  } else if (item.is_object()) {
    if (item.contains("kind")) {
      kind = &item["kind"];
    } else if (item.contains("type")) {
      kind = &item["type"];
    }
    if (item.contains("content")) content = &item["content"];
  }
  if (kind == nullptr || content == nullptr || !kind->is_string()) {
    throw MalformedGeneration("workflow item " + std::to_string(index) +
                              " is not a [kind, content] pair");
  }
  const auto parsed = parse_workflow_kind(kind->get<std::string>());
  if (!parsed) {
    throw InvalidTemplate("workflow item " + std::to_string(index) + " has kind '" +
                          kind->get<std::string>() + "'");
  }
  return {*parsed, content->is_string() ? content->get<std::string>() : content->dump()};
}

}  // namespace

PlanTemplate parse_generated_template(std::string_view reply) {
  std::string error;
  const auto doc = extract_json_object(reply, &error);
  if (!doc) throw MalformedGeneration("reply is not a JSON object: " + error);
  if (!doc->contains("task") || !doc->contains("workflow")) {
    throw MalformedGeneration("reply lacks \"task\" or \"workflow\"");
  }
  const auto& task = (*doc)["task"];
  const auto& workflow = (*doc)["workflow"];
  if (!workflow.is_array()) throw MalformedGeneration("\"workflow\" is not an array");

  PlanTemplate tmpl;
  tmpl.task_summary = task.is_string() ? task.get<std::string>() : task.dump();
  for (std::size_t i = 0; i < workflow.size(); ++i) {
    tmpl.workflow.push_back(parse_generated_item(workflow[i], i));
  }
  if (auto problem = template_problem(tmpl)) throw InvalidTemplate(*problem);
  return tmpl;
}

Generalization generalize(RunContext& ctx, const FilteredTrace& trace, const Keyword& keyword) {
  if (trace.items.empty()) throw std::invalid_argument("cannot generalize an empty trace");
  std::vector<ChatMessage> messages{{Speaker::User, cache_generation_prompt(trace)}};
  auto first = ctx.complete(ModelRole::CacheGenerator, messages);
  try {
    return {parse_generated_template(first.response_text), 0};
  } catch (const MalformedGeneration& e) {
    messages.push_back({Speaker::Assistant, first.response_text});
    messages.push_back({Speaker::User, std::string("Your reply could not be parsed (") + e.what() +
                                           "). Return only the JSON object with \"task\" and "
                                           "\"workflow\" keys."});
  }
  auto second = ctx.complete(ModelRole::CacheGenerator, std::move(messages));
  try {
    return {parse_generated_template(second.response_text), 1};
  } catch (const MalformedGeneration& e) {
    throw MalformedGeneration("template for '" + keyword.str() + "' unparseable after retry: " +
                              e.what());
  }
}

namespace {

std::string json_list(std::span<const std::string> items) {
  return nlohmann::json(std::vector<std::string>(items.begin(), items.end())).dump();
}

}  // namespace

std::string cache_adaptation_prompt(const PlanTemplate& tmpl, std::size_t message_index,
                                    const TaskInstance& task, std::span<const std::string> past_plans,
                                    std::span<const std::string> past_responses) {
  std::string prompt =
      "You are an intelligent language model that works with another model to solve complex "
      "tasks, like data-intensive reasoning questions.\n"
      "Please construct a follow-up action plan (in the form of a message) based on the task and "
      "the reference template.\n";
  prompt += "Reference task: " + tmpl.task_summary + "\n";
  prompt += "Reference follow-up action plan (as a message): " +
            tmpl.message_at(message_index).content + "\n";
  if (auto hint = tmpl.expected_output_after(message_index); !hint.empty()) {
    prompt += "Expected response to the reference message: " + hint + "\n";
  }
  prompt +=
      "Your task is to adapt the reference follow-up message to the current context, "
      "maintaining the same inquiry structure but customizing it for the specific details of the "
      "current question and model output. Make sure the message asks for information not "
      "contained in past messages.\n"
      "Format your response as a JSON object with a \"reasoning\" field set to \"N/A\" and a "
      "\"message\" field containing your action plan message.\n";
  prompt += "Current task: " + task.query + "\n";
  prompt += "Past action plans (as messages): " + json_list(past_plans) + "\n";
  prompt += "Past actor responses: " + json_list(past_responses) + "\n";
  prompt += "Current message:";
  return prompt;
}

std::string final_answer_prompt(const PlanTemplate& tmpl, const TaskInstance& task,
                                std::span<const std::string> past_plans,
                                std::span<const std::string> past_responses) {
  std::string prompt =
      "You are an intelligent language model that works with another model to solve complex "
      "tasks, like data-intensive reasoning questions.\n"
      "All information requested by the reference template has been gathered. Produce the final "
      "answer to the current task by following the reference final step and using only the "
      "figures in the past actor responses.\n";
  prompt += "Reference task: " + tmpl.task_summary + "\n";
  prompt += "Reference final step: " + tmpl.answer().content + "\n";
  prompt += "Current task: " + task.query + "\n";
  prompt += "Past action plans (as messages): " + json_list(past_plans) + "\n";
  prompt += "Past actor responses: " + json_list(past_responses) + "\n";
  prompt +=
      "Format your response as a JSON object with a \"reasoning\" field explaining the "
      "calculation and an \"answer\" field containing only the final answer.";
  return prompt;
}

namespace {

std::optional<std::string> parse_adaptation_reply(std::string_view reply, const char* field,
                                                  std::string& error) {
  const auto doc = extract_json_object(reply, &error);
  if (!doc) return std::nullopt;
  auto value = text_field(*doc, field);
  if (!value) error = std::string("reply has no non-empty \"") + field + "\" field";
  return value;
}

}  // namespace

Adaptation adapt_step(RunContext& ctx, const PlanTemplate& tmpl, const TaskInstance& task,
                      std::span<const std::string> past_plans,
                      std::span<const std::string> past_responses) {
  const std::size_t m = tmpl.message_count();
  const std::size_t r = past_responses.size();
  if (r > m) {
    throw TemplateExhausted("template has " + std::to_string(m) + " plan steps but " +
                            std::to_string(r) + " rounds completed");
  }
  const bool final_step = r == m;
  const char* field = final_step ? "answer" : "message";
  std::vector<ChatMessage> messages{
      {Speaker::User, final_step ? final_answer_prompt(tmpl, task, past_plans, past_responses)
                                 : cache_adaptation_prompt(tmpl, r, task, past_plans, past_responses)}};

  const auto wrap = [&](std::string value, int retries) {
    Adaptation a;
    a.retries = retries;
    if (final_step) {
      a.step = FinalAnswer{std::move(value)};
    } else {
      a.step = NextPlan{std::move(value)};
    }
    return a;
  };

  std::string error;
  auto first = ctx.complete(ModelRole::SmallPlanner, messages);
  if (auto value = parse_adaptation_reply(first.response_text, field, error)) {
    return wrap(std::move(*value), 0);
  }
  messages.push_back({Speaker::Assistant, first.response_text});
  messages.push_back({Speaker::User, "Your reply could not be parsed (" + error +
                                         "). Reply with only a JSON object containing a \"" +
                                         field + "\" field."});
  auto second = ctx.complete(ModelRole::SmallPlanner, std::move(messages));
  if (auto value = parse_adaptation_reply(second.response_text, field, error)) {
    return wrap(std::move(*value), 1);
  }
  throw EscalationRequired("adaptation reply unparseable after retry: " + error);
}

}  // namespace plancache
