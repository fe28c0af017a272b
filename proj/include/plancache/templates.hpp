#pragma once

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/gateway.hpp"
#include "plancache/keyword.hpp"
#include "plancache/model.hpp"

namespace plancache {

/// Plans, responses and the final answer of a run, with reasoning removed.
struct FilteredTrace {
  std::string task;
  std::vector<WorkflowItem> items;

  friend bool operator==(const FilteredTrace&, const FilteredTrace&) = default;
};

/// Deterministic first filter: message/output per round, then the answer.
/// Throws IncompleteLog when the run has no final output.
FilteredTrace rule_filter(const ExecutionLog& log);

/// {"task": "...", "workflow": [["message", "..."], ["output", "..."], ...]}
nlohmann::json serialize_trace(const FilteredTrace& trace);

std::string cache_generation_prompt(const FilteredTrace& trace);

/// Parses a generator reply into a template.
/// Throws MalformedGeneration (no "task"/"workflow" document) or
/// InvalidTemplate (parsed, but the workflow is not a valid template).
PlanTemplate parse_generated_template(std::string_view reply);

struct Generalization {
  PlanTemplate plan_template;
  int retries = 0;
};

/// Second filter: asks the CacheGenerator role to strip task-specific
/// details. A malformed reply is retried once with the parse error appended;
/// an invalid template is not retried.
Generalization generalize(RunContext& ctx, const FilteredTrace& trace, const Keyword& keyword);

struct NextPlan {
  std::string message;
};

struct FinalAnswer {
  std::string text;
};

struct Adaptation {
  std::variant<NextPlan, FinalAnswer> step;
  int retries = 0;

  bool is_final() const { return std::holds_alternative<FinalAnswer>(step); }
};

std::string cache_adaptation_prompt(const PlanTemplate& tmpl, std::size_t message_index,
                                    const TaskInstance& task, std::span<const std::string> past_plans,
                                    std::span<const std::string> past_responses);
std::string final_answer_prompt(const PlanTemplate& tmpl, const TaskInstance& task,
                                std::span<const std::string> past_plans,
                                std::span<const std::string> past_responses);

/// One step of template-driven planning on the SmallPlanner role.
///
/// With r = past_responses.size() completed rounds and m Message items in
/// the template: r < m adapts Message r into the next plan, r == m produces
/// the final answer guided by the template's Answer item. Throws
/// TemplateExhausted when r > m and EscalationRequired when the reply is
/// still unparseable after one retry.
Adaptation adapt_step(RunContext& ctx, const PlanTemplate& tmpl, const TaskInstance& task,
                      std::span<const std::string> past_plans,
                      std::span<const std::string> past_responses);

}  // namespace plancache
