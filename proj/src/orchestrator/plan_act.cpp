#include "plancache/plan_act.hpp"

#include "plancache/errors.hpp"
#include "plancache/json_extract.hpp"

namespace plancache {

std::string planner_prompt(const TaskInstance& task,
                           const std::optional<std::string>& in_context_example) {
  std::string prompt;
  if (in_context_example) {
    prompt +=
        "Here is the complete execution log of an earlier run on a similar task. Use it as an "
        "example of how to solve the current task.\n\n### Example execution log\n";
    prompt += *in_context_example;
    prompt += "\n\n";
  }
  prompt += "We need to perform the following task.\n\n### Task\n";
  prompt += task.query;
  prompt +=
      "\n\n### Instructions\n"
      "You will not have direct access to the context, but can chat with a small language model "
      "which has read the entire thing.\n"
      "Decide whether you already have enough information to answer. If not, write one focused "
      "message asking the small language model for the specific information you need next.\n"
      "Respond with a JSON object:\n"
      "{\"reasoning\": \"<your step-by-step thinking>\", "
      "\"decision\": \"request_additional_info\" or \"provide_final_answer\", "
      "\"message\": \"<message to the small language model>\", "
      "\"answer\": \"<final answer>\"}";
  return prompt;
}

PlannerTurn parse_planner_reply(std::string_view reply) {
  std::string error;
  const auto doc = extract_json_object(reply, &error);
  if (!doc) throw MalformedPlannerReply("planner reply is not JSON: " + error);
  PlannerTurn turn;
  turn.reasoning = text_field(*doc, "reasoning").value_or("");
  const auto decision = doc->value("decision", std::string());
  auto message = text_field(*doc, "message");
  auto answer = text_field(*doc, "answer");
  if (decision == "provide_final_answer" && answer) {
    turn.answer = std::move(answer);
  } else if (decision == "request_additional_info" && message) {
    turn.plan = std::move(message);
  } else if (decision.empty() && answer) {
    turn.answer = std::move(answer);
  } else if (decision.empty() && message) {
    turn.plan = std::move(message);
  } else {
    throw MalformedPlannerReply("planner reply has no usable decision (decision='" + decision + "')");
  }
  return turn;
}

std::string run_actor(RunContext& ctx, const TaskInstance& task, const std::string& plan) {
  std::string system =
      "You are a helpful assistant that answers questions about the context below. Another "
      "model (the planner) cannot see the context and relies on you for facts from it. Answer "
      "the planner's message precisely, quoting figures exactly as they appear.\n\n### Context\n";
  system += task.context;
  system += "\n\n### Task the planner is working on\n";
  system += task.query;
  auto exchange = ctx.complete(ModelRole::Actor, {{Speaker::System, std::move(system)},
                                                  {Speaker::User, plan}});
  return exchange.response_text;
}

namespace {

PlannerTurn planner_turn(RunContext& ctx, ModelRole role, std::vector<ChatMessage>& messages) {
  auto first = ctx.complete(role, messages);
  try {
    auto turn = parse_planner_reply(first.response_text);
    messages.push_back({Speaker::Assistant, first.response_text});
    return turn;
  } catch (const MalformedPlannerReply& e) {
    messages.push_back({Speaker::Assistant, first.response_text});
    messages.push_back({Speaker::User, std::string("Your reply could not be parsed (") + e.what() +
                                           "). Respond with only the JSON object."});
  }
  auto second = ctx.complete(role, messages);
  auto turn = parse_planner_reply(second.response_text);
  messages.push_back({Speaker::Assistant, second.response_text});
  return turn;
}

std::string best_effort_answer(RunContext& ctx, ModelRole role, std::vector<ChatMessage>& messages,
                               ExecutionLog& log) {
  messages.push_back({Speaker::User,
                      "The maximum number of rounds has been reached. Provide your best-effort "
                      "final answer now, as a JSON object with \"reasoning\" and \"answer\" "
                      "fields."});
  auto exchange = ctx.complete(role, messages);
  if (auto doc = extract_json_object(exchange.response_text)) {
    if (auto reasoning = text_field(*doc, "reasoning")) log.planner_reasoning.push_back(*reasoning);
    if (auto answer = text_field(*doc, "answer")) return *answer;
    if (auto message = text_field(*doc, "message")) return *message;
  }
  return exchange.response_text;
}

}  // namespace

PlanActResult run_plan_act(RunContext& ctx, const TaskInstance& task, const PlanActOptions& options) {
  PlanActResult result;
  result.log.query = task.query;
  std::vector<ChatMessage> messages{
      {Speaker::User, planner_prompt(task, options.in_context_example)}};

  for (;;) {
    auto turn = planner_turn(ctx, options.planner, messages);
    if (!turn.reasoning.empty()) result.log.planner_reasoning.push_back(turn.reasoning);
    if (turn.answer) {
      result.output = *turn.answer;
      result.log.final_output = *turn.answer;
      return result;
    }
    if (result.log.entries.size() >= options.max_iterations) {
      result.iteration_limit_reached = true;
      result.output = best_effort_answer(ctx, options.planner, messages, result.log);
      return result;
    }
    auto response = run_actor(ctx, task, *turn.plan);
    result.log.entries.push_back({*turn.plan, response});
    messages.push_back({Speaker::User, "The small language model responded:\n" + response +
                                           "\n\nDecide the next step using the same JSON format."});
  }
}

std::string render_execution_log(const ExecutionLog& log) {
  std::string out = "Task: " + log.query + "\n";
  for (std::size_t i = 0; i < log.entries.size(); ++i) {
    const auto round = std::to_string(i + 1);
    if (i < log.planner_reasoning.size()) {
      out += "Planner reasoning (round " + round + "): " + log.planner_reasoning[i] + "\n";
    }
    out += "Planner message (round " + round + "): " + log.entries[i].plan + "\n";
    out += "Actor response (round " + round + "): " + log.entries[i].response + "\n";
  }
  for (std::size_t i = log.entries.size(); i < log.planner_reasoning.size(); ++i) {
    out += "Planner reasoning (final): " + log.planner_reasoning[i] + "\n";
  }
  if (log.final_output) out += "Final answer: " + *log.final_output + "\n";
  return out;
}

}  // namespace plancache
