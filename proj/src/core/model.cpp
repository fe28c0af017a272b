#include "plancache/model.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace plancache {

bool TaskInstance::has_query() const {
  return std::any_of(query.begin(), query.end(),
                     [](unsigned char c) { return !std::isspace(c); });
}

std::string_view to_string(WorkflowKind kind) {
  switch (kind) {
    case WorkflowKind::Message:
      return "message";
    case WorkflowKind::Output:
      return "output";
    case WorkflowKind::Answer:
      return "answer";
  }
  return "message";
}

std::optional<WorkflowKind> parse_workflow_kind(std::string_view text) {
  if (text == "message") return WorkflowKind::Message;
  if (text == "output") return WorkflowKind::Output;
  if (text == "answer") return WorkflowKind::Answer;
  return std::nullopt;
}

std::size_t PlanTemplate::message_count() const {
  return static_cast<std::size_t>(std::count_if(
      workflow.begin(), workflow.end(),
      [](const WorkflowItem& w) { return w.kind == WorkflowKind::Message; }));
}

const WorkflowItem& PlanTemplate::message_at(std::size_t i) const {
  std::size_t seen = 0;
  for (const auto& item : workflow) {
    if (item.kind != WorkflowKind::Message) continue;
    if (seen++ == i) return item;
  }
  throw std::out_of_range("template has no message #" + std::to_string(i));
}

std::string PlanTemplate::expected_output_after(std::size_t message_index) const {
  std::size_t seen = 0;
  for (std::size_t pos = 0; pos < workflow.size(); ++pos) {
    if (workflow[pos].kind != WorkflowKind::Message) continue;
    if (seen++ != message_index) continue;
    if (pos + 1 < workflow.size() && workflow[pos + 1].kind == WorkflowKind::Output) {
      return workflow[pos + 1].content;
    }
    return {};
  }
  return {};
}

const WorkflowItem& PlanTemplate::answer() const {
  if (workflow.empty() || workflow.back().kind != WorkflowKind::Answer) {
    throw std::logic_error("template does not end with an answer");
  }
  return workflow.back();
}

bool validate_workflow(std::span<const WorkflowKind> kinds) {
  if (kinds.empty()) return false;
  if (kinds.front() != WorkflowKind::Message) return false;
  if (kinds.back() != WorkflowKind::Answer) return false;
  std::size_t answers = 0;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    switch (kinds[i]) {
      case WorkflowKind::Answer:
        ++answers;
        if (i + 1 != kinds.size()) return false;
        [[fallthrough]];
      case WorkflowKind::Message:
        if (i > 0 && kinds[i - 1] != WorkflowKind::Output) return false;
        break;
      case WorkflowKind::Output:
        if (i == 0 || kinds[i - 1] != WorkflowKind::Message) return false;
        break;
    }
  }
  return answers == 1;
}

bool validate_workflow(std::span<const WorkflowItem> items) {
  std::vector<WorkflowKind> kinds;
  kinds.reserve(items.size());
  for (const auto& item : items) kinds.push_back(item.kind);
  return validate_workflow(std::span<const WorkflowKind>(kinds));
}

std::optional<std::string> template_problem(const PlanTemplate& tmpl) {
  if (!validate_workflow(std::span<const WorkflowItem>(tmpl.workflow))) {
    return "workflow must be message, (output, message)*, output, answer";
  }
  for (std::size_t i = 0; i < tmpl.workflow.size(); ++i) {
    if (tmpl.workflow[i].content.empty()) {
      return "workflow item " + std::to_string(i) + " has empty content";
    }
  }
  return std::nullopt;
}

bool leaks_task_details(const PlanTemplate& tmpl, const TaskInstance& task) {
  const auto leaks = [&](const std::string& text) {
    if (!task.query.empty() && text == task.query) return true;
    return !task.context.empty() && text.find(task.context) != std::string::npos;
  };
  if (leaks(tmpl.task_summary)) return true;
  return std::any_of(tmpl.workflow.begin(), tmpl.workflow.end(),
                     [&](const WorkflowItem& w) { return leaks(w.content); });
}

void to_json(nlohmann::json& j, const WorkflowItem& item) {
  j = {{"kind", to_string(item.kind)}, {"content", item.content}};
}

void from_json(const nlohmann::json& j, WorkflowItem& item) {
  const auto kind = parse_workflow_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::invalid_argument("unknown workflow kind: " + j.at("kind").dump());
  item.kind = *kind;
  item.content = j.at("content").get<std::string>();
}

void to_json(nlohmann::json& j, const PlanTemplate& tmpl) {
  j = {{"task_summary", tmpl.task_summary}, {"workflow", tmpl.workflow}};
}

void from_json(const nlohmann::json& j, PlanTemplate& tmpl) {
  tmpl.task_summary = j.at("task_summary").get<std::string>();
  tmpl.workflow = j.at("workflow").get<std::vector<WorkflowItem>>();
}

void to_json(nlohmann::json& j, const ExecutionLog& log) {
  auto entries = nlohmann::json::array();
  for (const auto& e : log.entries) entries.push_back({{"plan", e.plan}, {"response", e.response}});
  j = {{"query", log.query},
       {"entries", std::move(entries)},
       {"planner_reasoning", log.planner_reasoning},
       {"final_output", log.final_output ? nlohmann::json(*log.final_output) : nlohmann::json()}};
}

void from_json(const nlohmann::json& j, ExecutionLog& log) {
  log.query = j.at("query").get<std::string>();
  log.entries.clear();
  for (const auto& e : j.at("entries")) {
    log.entries.push_back({e.at("plan").get<std::string>(), e.at("response").get<std::string>()});
  }
  log.planner_reasoning = j.at("planner_reasoning").get<std::vector<std::string>>();
  const auto& fo = j.at("final_output");
  log.final_output = fo.is_null() ? std::nullopt : std::optional(fo.get<std::string>());
}

}  // namespace plancache
