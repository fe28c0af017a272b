#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace plancache {

/// One agent request. Context may be empty; ground_truth is benchmark-only.
struct TaskInstance {
  std::string id;
  std::string query;
  std::string context;
  std::optional<std::string> ground_truth;

  /// True when the query has non-whitespace content.
  bool has_query() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

enum class WorkflowKind { Message, Output, Answer };

std::string_view to_string(WorkflowKind kind);
std::optional<WorkflowKind> parse_workflow_kind(std::string_view text);

struct WorkflowItem {
  WorkflowKind kind = WorkflowKind::Message;
  std::string content;

  friend bool operator==(const WorkflowItem&, const WorkflowItem&) = default;
};

/// Generalized, context-free workflow distilled from a successful run.
struct PlanTemplate {
  std::string task_summary;
  std::vector<WorkflowItem> workflow;

  /// Number of Message items, i.e. how many plan rounds the template drives.
  std::size_t message_count() const;
  /// The i-th Message item and the Output that follows it (empty if absent).
  const WorkflowItem& message_at(std::size_t i) const;
  std::string expected_output_after(std::size_t message_index) const;
  const WorkflowItem& answer() const;

  friend bool operator==(const PlanTemplate&, const PlanTemplate&) = default;
};

struct PlanRound {
  std::string plan;
  std::string response;

  friend bool operator==(const PlanRound&, const PlanRound&) = default;
};

/// Ordered record of one Plan-Act run. Reasoning is kept apart from plans so
/// the rule filter can drop it without touching plan text.
struct ExecutionLog {
  std::string query;
  std::vector<PlanRound> entries;
  std::vector<std::string> planner_reasoning;
  std::optional<std::string> final_output;

  std::size_t iterations_used() const { return entries.size(); }

  friend bool operator==(const ExecutionLog&, const ExecutionLog&) = default;
};

/// Shape check on the kind sequence alone:
/// Message, then any number of (Output, Message), then Output, then Answer.
bool validate_workflow(std::span<const WorkflowKind> kinds);
bool validate_workflow(std::span<const WorkflowItem> items);

/// Full template check: workflow shape plus non-empty item contents.
/// Returns a description of the first problem, or nullopt when valid.
std::optional<std::string> template_problem(const PlanTemplate& tmpl);

/// Weak generalization check: no item equals the raw query, and no item
/// contains the raw (non-empty) context verbatim.
bool leaks_task_details(const PlanTemplate& tmpl, const TaskInstance& task);

void to_json(nlohmann::json& j, const WorkflowItem& item);
void from_json(const nlohmann::json& j, WorkflowItem& item);
void to_json(nlohmann::json& j, const PlanTemplate& tmpl);
void from_json(const nlohmann::json& j, PlanTemplate& tmpl);
void to_json(nlohmann::json& j, const ExecutionLog& log);
void from_json(const nlohmann::json& j, ExecutionLog& log);

}  // namespace plancache
