#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/gateway.hpp"
#include "plancache/keyword.hpp"
#include "plancache/model.hpp"
#include "plancache/plan_act.hpp"
#include "plancache/store.hpp"

namespace plancache {

/// How a run was served. NoCache marks strategies that never consult a cache.
enum class RunPath { Hit, Miss, HitEscalatedToMiss, NoCache };

std::string_view to_string(RunPath path);

struct RunOutcome {
  std::string task_id;
  std::string output;
  RunPath path = RunPath::Miss;
  std::size_t iterations = 0;
  ExecutionLog log;
  std::vector<LedgerRow> cost_fragment;
  std::vector<ChatExchange> transcript;
  std::optional<std::string> keyword;
  bool template_inserted = false;
  bool iteration_limit_reached = false;
  /// Cache-side problems that did not affect the answer.
  std::vector<std::string> notes;

  bool cache_hit() const { return path == RunPath::Hit || path == RunPath::HitEscalatedToMiss; }
  std::size_t calls(ModelRole role) const;
  Usd serving_usd() const;
  std::uint64_t prompt_tokens() const;
};

nlohmann::json to_json(const RunOutcome& outcome);

/// Copies the context's ledger slice and transcript into the outcome.
void attach_run_record(RunOutcome& outcome, const RunContext& ctx);

struct AgentConfig {
  std::size_t max_iterations = kDefaultMaxIterations;
  /// When set and the task has ground truth, the verifier must accept the
  /// answer before its template is cached.
  bool strict_insert_gate = false;
};

/// Returns true when `output` is an acceptable answer for `task`.
using InsertionVerifier =
    std::function<bool(RunContext& ctx, const TaskInstance& task, const std::string& output)>;

/// Plan-caching agent: keyword lookup, template-guided small-planner runs on
/// hits, large-planner runs plus template generation on misses.
class PlanCachingAgent {
 public:
  PlanCachingAgent(Gateway& gateway, PlanCache& cache, AgentConfig config = {},
                   InsertionVerifier verifier = {});

  /// Throws std::invalid_argument for an empty query; provider failures
  /// propagate. EmptyKeyword sends the task down the miss path uncached.
  RunOutcome run_task(const TaskInstance& task);

  /// Adaptation failures and iteration exhaustion escalate to the miss path
  /// inside the same run instead of raising.
  RunOutcome handle_cache_hit(RunContext& ctx, const TaskInstance& task, const CacheEntry& entry);

  RunOutcome handle_cache_miss(RunContext& ctx, const TaskInstance& task,
                               const std::optional<Keyword>& keyword);

  std::size_t escalations(const Keyword& keyword) const;
  const AgentConfig& config() const { return config_; }
  PlanCache& cache() { return cache_; }

 private:
  void maybe_cache_template(RunContext& ctx, const TaskInstance& task, const Keyword& keyword,
                            RunOutcome& outcome);

  Gateway& gateway_;
  PlanCache& cache_;
  AgentConfig config_;
  InsertionVerifier verifier_;
  mutable std::mutex escalation_mutex_;
  std::map<std::string, std::size_t> escalations_;
  std::atomic<std::size_t> anonymous_runs_{0};
};

}  // namespace plancache
