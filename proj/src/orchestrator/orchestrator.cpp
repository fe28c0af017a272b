#include "plancache/orchestrator.hpp"

#include <spdlog/spdlog.h>

#include "plancache/errors.hpp"
#include "plancache/templates.hpp"

namespace plancache {

std::string_view to_string(RunPath path) {
  switch (path) {
    case RunPath::Hit:
      return "hit";
    case RunPath::Miss:
      return "miss";
    case RunPath::HitEscalatedToMiss:
      return "hit_escalated_to_miss";
    case RunPath::NoCache:
      return "no_cache";
  }
  return "miss";
}

std::size_t RunOutcome::calls(ModelRole role) const {
  return static_cast<std::size_t>(std::count_if(
      transcript.begin(), transcript.end(), [&](const ChatExchange& e) { return e.role == role; }));
}

Usd RunOutcome::serving_usd() const {
  Usd total;
  for (const auto& row : cost_fragment) {
    if (is_serving(row.component)) total += row.usd;
  }
  return total;
}

std::uint64_t RunOutcome::prompt_tokens() const {
  std::uint64_t total = 0;
  for (const auto& e : transcript) total += e.usage.input_tokens;
  return total;
}

nlohmann::json to_json(const RunOutcome& o) {
  auto rows = nlohmann::json::array();
  for (const auto& r : o.cost_fragment) {
    rows.push_back({{"component", to_string(r.component)},
                    {"model", r.model_id},
                    {"input_tokens", r.usage.input_tokens},
                    {"output_tokens", r.usage.output_tokens},
                    {"usd", r.usd.to_string()}});
  }
  auto transcript = nlohmann::json::array();
  for (const auto& e : o.transcript) transcript.push_back(e);
  return {{"task_id", o.task_id},
          {"output", o.output},
          {"path", to_string(o.path)},
          {"iterations", o.iterations},
          {"keyword", o.keyword ? nlohmann::json(*o.keyword) : nlohmann::json()},
          {"template_inserted", o.template_inserted},
          {"iteration_limit_reached", o.iteration_limit_reached},
          {"notes", o.notes},
          {"log", o.log},
          {"cost_fragment", std::move(rows)},
          {"transcript", std::move(transcript)}};
}

void attach_run_record(RunOutcome& outcome, const RunContext& ctx) {
  outcome.cost_fragment.assign(ctx.fragment().begin(), ctx.fragment().end());
  outcome.transcript.assign(ctx.transcript().begin(), ctx.transcript().end());
}

PlanCachingAgent::PlanCachingAgent(Gateway& gateway, PlanCache& cache, AgentConfig config,
                                   InsertionVerifier verifier)
    : gateway_(gateway), cache_(cache), config_(config), verifier_(std::move(verifier)) {}

RunOutcome PlanCachingAgent::run_task(const TaskInstance& task) {
  if (!task.has_query()) throw std::invalid_argument("task '" + task.id + "' has an empty query");
  const std::string run_id =
      task.id.empty() ? "run-" + std::to_string(++anonymous_runs_) : task.id;
  RunContext ctx(gateway_, run_id);

  std::optional<Keyword> keyword;
  try {
    keyword = extract_keyword(ctx, task.query);
  } catch (const EmptyKeyword&) {
    spdlog::warn("task {}: keyword extraction returned nothing; running uncached", run_id);
  }

  RunOutcome outcome;
  if (keyword) {
    if (auto entry = cache_.lookup(*keyword)) {
      outcome = handle_cache_hit(ctx, task, *entry);
    } else {
      outcome = handle_cache_miss(ctx, task, keyword);
    }
  } else {
    outcome = handle_cache_miss(ctx, task, std::nullopt);
    outcome.notes.push_back("empty keyword; template not cached");
  }
  outcome.task_id = run_id;
  attach_run_record(outcome, ctx);
  return outcome;
}

RunOutcome PlanCachingAgent::handle_cache_hit(RunContext& ctx, const TaskInstance& task,
                                              const CacheEntry& entry) {
  RunOutcome outcome;
  outcome.keyword = entry.keyword.str();
  outcome.log.query = task.query;
  std::vector<std::string> plans;
  std::vector<std::string> responses;

  std::string escalation_reason;
  try {
    for (;;) {
      auto step = adapt_step(ctx, entry.value, task, plans, responses);
      if (auto* answer = std::get_if<FinalAnswer>(&step.step)) {
        outcome.path = RunPath::Hit;
        outcome.output = answer->text;
        outcome.log.final_output = answer->text;
        outcome.iterations = outcome.log.iterations_used();
        return outcome;
      }
      if (responses.size() >= config_.max_iterations) {
        throw EscalationRequired("template needs more than " +
                                 std::to_string(config_.max_iterations) + " rounds");
      }
      const auto& plan = std::get<NextPlan>(step.step).message;
      auto response = run_actor(ctx, task, plan);
      plans.push_back(plan);
      responses.push_back(response);
      outcome.log.entries.push_back({plan, response});
    }
  } catch (const EscalationRequired& e) {
    escalation_reason = e.what();
  }

  spdlog::warn("task {}: escalating cached plan '{}' to the large planner: {}", ctx.run_id(),
               entry.keyword.str(), escalation_reason);
  {
    std::lock_guard lock(escalation_mutex_);
    ++escalations_[entry.keyword.str()];
  }
  auto escalated = handle_cache_miss(ctx, task, entry.keyword);
  escalated.path = RunPath::HitEscalatedToMiss;
  escalated.notes.insert(escalated.notes.begin(), "escalated: " + escalation_reason);
  return escalated;
}

RunOutcome PlanCachingAgent::handle_cache_miss(RunContext& ctx, const TaskInstance& task,
                                               const std::optional<Keyword>& keyword) {
  PlanActOptions options;
  options.planner = ModelRole::LargePlanner;
  options.max_iterations = config_.max_iterations;
  auto result = run_plan_act(ctx, task, options);

  RunOutcome outcome;
  outcome.path = RunPath::Miss;
  outcome.output = result.output;
  outcome.log = std::move(result.log);
  outcome.iterations = outcome.log.iterations_used();
  outcome.iteration_limit_reached = result.iteration_limit_reached;
  if (keyword) outcome.keyword = keyword->str();

  if (result.iteration_limit_reached) {
    outcome.notes.push_back("iteration limit reached; template not cached");
  } else if (keyword) {
    maybe_cache_template(ctx, task, *keyword, outcome);
  }
  return outcome;
}

void PlanCachingAgent::maybe_cache_template(RunContext& ctx, const TaskInstance& task,
                                            const Keyword& keyword, RunOutcome& outcome) {
  if (cache_.contains(keyword)) {
    outcome.notes.push_back("keyword already cached");
    return;
  }
  try {
    if (config_.strict_insert_gate && task.ground_truth && verifier_ &&
        !verifier_(ctx, task, outcome.output)) {
      outcome.notes.push_back("insertion gate rejected the answer");
      return;
    }
    auto generated = generalize(ctx, rule_filter(outcome.log), keyword);
    if (leaks_task_details(generated.plan_template, task)) {
      outcome.notes.push_back("generated template repeats task details verbatim");
      return;
    }
    outcome.template_inserted = cache_.insert(keyword, std::move(generated.plan_template));
    if (!outcome.template_inserted) outcome.notes.push_back("keyword already cached");
  } catch (const Error& e) {
    // Caching is best effort; the user still gets the answer.
    spdlog::warn("task {}: template for '{}' not cached: {}", ctx.run_id(), keyword.str(), e.what());
    outcome.notes.push_back(std::string("template generation failed: ") + e.what());
  }
}

std::size_t PlanCachingAgent::escalations(const Keyword& keyword) const {
  std::lock_guard lock(escalation_mutex_);
  auto it = escalations_.find(keyword.str());
  return it == escalations_.end() ? 0 : it->second;
}

}  // namespace plancache
