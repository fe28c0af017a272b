#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plancache/baselines.hpp"
#include "plancache/gateway.hpp"
#include "plancache/model.hpp"
#include "plancache/provider_config.hpp"

namespace plancache::testing {

// Model replies in the formats the library expects.
std::string planner_plan(const std::string& reasoning, const std::string& message);
std::string planner_answer(const std::string& reasoning, const std::string& answer);
std::string adaptation_plan(const std::string& message);
std::string adaptation_answer(const std::string& reasoning, const std::string& answer);
std::string generator_reply(const PlanTemplate& tmpl);

PlanTemplate make_template(const std::string& summary, std::size_t messages);

// Working-capital-ratio scenario: a Costco FY2019 miss followed by a
// Best Buy FY2021 hit on the same keyword.
TaskInstance costco_task();
TaskInstance bestbuy_task();
PlanTemplate working_capital_template();

void script_costco_miss(ScriptedProvider& script);
void script_costco_generation(ScriptedProvider& script);
void script_bestbuy_hit(ScriptedProvider& script);
/// Best Buy run under full-history caching: the small planner speaks the
/// plain planner protocol.
void script_bestbuy_full_history_hit(ScriptedProvider& script);

/// Pinned token counts per call type. Unset fields fall back to estimates.
struct TokenProfile {
  struct Pin {
    std::uint64_t in = 0;
    std::uint64_t out = 0;
  };
  std::optional<Pin> keyword, generator, large_plan, large_answer, small_plan, small_answer, actor;

  /// Roughly FinanceBench-shaped: the actor reads the whole filing, the
  /// large planner dominates spend, extraction and generation are small.
  static TokenProfile finance_like();
};

/// Synthetic workload: `classes` keyword classes, tasks spread over them in
/// a fixed interleaved order. Every task's ground truth is "answer-<i>".
struct Workload {
  std::vector<TaskInstance> tasks;
  std::vector<std::string> keyword_of;  ///< per task
  /// True when an earlier task shares the keyword.
  std::vector<bool> repeat;
};

Workload synthetic_workload();  ///< 20 tasks, 5 classes

/// Queues every reply the given strategy needs to run `w` in order.
/// `hits[i]` says whether task i is served from cache (ignored for
/// no-cache strategies). Judge replies ("1") are added when `judge` is set.
void script_workload(ScriptedProvider& script, const Workload& w, StrategyKind kind,
                     const std::vector<bool>& hits, const TokenProfile& tokens = {},
                     bool judge = false);

/// A gateway bound to `script` for every role with the default model ids.
Gateway scripted_gateway(std::shared_ptr<ScriptedProvider> script);

}  // namespace plancache::testing
