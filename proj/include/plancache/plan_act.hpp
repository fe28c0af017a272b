#pragma once

#include <optional>
#include <string>

#include "plancache/gateway.hpp"
#include "plancache/model.hpp"

namespace plancache {

inline constexpr std::size_t kDefaultMaxIterations = 10;

struct PlanActOptions {
  ModelRole planner = ModelRole::LargePlanner;
  std::size_t max_iterations = kDefaultMaxIterations;
  /// Rendered past execution shown to the planner before the task.
  std::optional<std::string> in_context_example;
};

struct PlanActResult {
  std::string output;
  ExecutionLog log;
  bool iteration_limit_reached = false;
};

/// Planner prompt for a task. The planner never sees the task context.
std::string planner_prompt(const TaskInstance& task,
                           const std::optional<std::string>& in_context_example);

/// Decoded planner turn: either a plan for the actor or a final answer.
struct PlannerTurn {
  std::string reasoning;
  std::optional<std::string> plan;
  std::optional<std::string> answer;
};

/// Throws MalformedPlannerReply when the reply carries neither.
PlannerTurn parse_planner_reply(std::string_view reply);

/// Executes one plan against the task context on the Actor role.
std::string run_actor(RunContext& ctx, const TaskInstance& task, const std::string& plan);

/// Plain plan-act loop: the planner proposes, the actor answers from
/// context, repeat until a final answer. After max_iterations actor rounds
/// the planner is asked for a best-effort answer and the log is left without
/// final_output.
PlanActResult run_plan_act(RunContext& ctx, const TaskInstance& task, const PlanActOptions& options);

/// Text rendering of a complete log (plans, responses, reasoning, answer),
/// used as an in-context example.
std::string render_execution_log(const ExecutionLog& log);

}  // namespace plancache
