#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/baselines.hpp"
#include "plancache/embedding.hpp"
#include "plancache/gateway.hpp"
#include "plancache/ledger.hpp"
#include "plancache/model.hpp"

namespace plancache {

// ---------------------------------------------------------------------------
// Dataset ingestion

enum class TaskFormat { TaskJsonl, FinanceBench, TabMWP };

/// CLI names: jsonl, financebench, tabmwp.
std::string_view to_string(TaskFormat format);
std::optional<TaskFormat> parse_task_format(std::string_view text);

/// jsonl:        one {"id", "query", "context", "answer"} object per line.
/// financebench: JSONL with question / answer, context from "document",
///               "context" or the joined "evidence" texts.
/// tabmwp:       either the published object keyed by problem id or JSONL;
///               question (+ choices) becomes the query, title + table the
///               context.
/// Blank lines are skipped. Throws FormatError with a 1-based line number.
std::vector<TaskInstance> parse_tasks(std::string_view text, TaskFormat format);
std::vector<TaskInstance> load_tasks(const std::filesystem::path& path, TaskFormat format);

/// Seeded uniform sample of n tasks without replacement, keeping the
/// original relative order. n >= size returns every task.
std::vector<TaskInstance> sample_tasks(std::span<const TaskInstance> tasks, std::size_t n,
                                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// LLM-as-judge

std::string judge_prompt(const TaskInstance& task, std::string_view response);

/// 0 or 1 from the first non-whitespace character; nullopt otherwise.
std::optional<int> parse_verdict(std::string_view reply);

struct Verdict {
  int score = 0;
  /// Set when the judge never produced a parseable verdict.
  bool flagged = false;
  int retries = 0;
};

/// Requires task.ground_truth (std::invalid_argument otherwise). An
/// unparseable verdict is retried once, then scored 0 and flagged.
Verdict judge(RunContext& ctx, const TaskInstance& task, std::string_view response);

// ---------------------------------------------------------------------------
// Benchmark runs

struct BenchConfig {
  /// Recorded in the report; sampling itself happens before the run.
  std::optional<std::uint64_t> sample_seed;
  /// Stop before the next task once total spend (serving + judging) reaches this.
  std::optional<Usd> budget;
  /// Free-form settings echoed into report.json.
  nlohmann::json settings = nlohmann::json::object();
};

struct TaskRow {
  std::string task_id;
  std::optional<RunPath> path;
  std::optional<std::string> keyword;
  std::string output;
  std::optional<std::string> ground_truth;
  std::optional<int> score;
  bool judge_flagged = false;
  std::size_t iterations = 0;
  Usd serving_usd;
  std::optional<std::string> error;
  std::vector<std::string> notes;

  bool correct() const { return score.value_or(0) == 1; }
};

struct RunReport {
  StrategyKind strategy = StrategyKind::PlanCache;
  std::vector<TaskRow> rows;
  std::vector<LedgerRow> ledger;
  CostBreakdown breakdown;
  std::optional<CacheStats> cache_stats;
  std::optional<std::uint64_t> sample_seed;
  nlohmann::json settings = nlohmann::json::object();
  bool budget_exhausted = false;
  std::size_t skipped_tasks = 0;

  // Counts over rows. "judged" rows are those with ground truth.
  std::size_t judged = 0;
  std::size_t correct = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t judged_hits = 0;
  std::size_t correct_hits = 0;
  std::size_t judged_misses = 0;
  std::size_t correct_misses = 0;

  std::optional<double> accuracy() const;
  /// Not applicable (nullopt) for strategies without a cache.
  std::optional<double> hit_rate() const;
  std::optional<double> accuracy_on_hits() const;
  std::optional<double> accuracy_on_misses() const;
  Usd total_cost() const { return breakdown.total_usd; }
};

/// Sequential pass in arrival order; cache state carries across tasks.
/// Attaches a fresh ledger to `gateway` for the duration of the run. Task
/// failures are recorded as incorrect rows and the run continues.
RunReport run_benchmark(Strategy& strategy, Gateway& gateway, std::span<const TaskInstance> tasks,
                        const BenchConfig& config = {});

nlohmann::json to_json(const RunReport& report);

/// report.json, tasks.csv and ledger.csv under `dir` (created if needed).
void write_report(const RunReport& report, const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Query-vs-keyword matching analysis

struct LabeledPair {
  std::string query_a;
  std::string query_b;
  std::string keyword_a;
  std::string keyword_b;
  bool same_plan = false;
};

/// Error counts over all pairs: FP = matched but labeled different-plan,
/// FN = unmatched but labeled same-plan. Rates divide by the pair count.
struct MatchRates {
  std::size_t pairs = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  double fp_rate() const;
  double fn_rate() const;
};

struct ThresholdRow {
  double threshold = 0.0;
  MatchRates rates;
};

struct MatchAnalysisReport {
  std::vector<ThresholdRow> query_based;
  MatchRates keyword_based;
};

/// 0, 0.05, ..., 1.0.
std::vector<double> default_thresholds();

/// Query match: query_similarity(embed(a), embed(b)) >= t.
/// Keyword match: equality after normalization (blank keywords never match).
MatchAnalysisReport matching_analysis(std::span<const LabeledPair> pairs,
                                      std::span<const double> thresholds, Embedder& embedder);

/// JSONL: {"query_a", "query_b", "keyword_a", "keyword_b", "same_plan"}.
std::vector<LabeledPair> parse_pairs(std::string_view text);
std::vector<LabeledPair> load_pairs(const std::filesystem::path& path);

nlohmann::json to_json(const MatchAnalysisReport& report);

/// match_report.json and threshold_sweep.csv under `dir`.
void write_match_report(const MatchAnalysisReport& report, const std::filesystem::path& dir);

}  // namespace plancache
