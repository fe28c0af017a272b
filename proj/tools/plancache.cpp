// plancache: run a caching strategy over a task file, or run the
// query-vs-keyword matching analysis over labeled pairs.
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "plancache/baselines.hpp"
#include "plancache/bench.hpp"
#include "plancache/errors.hpp"
#include "plancache/orchestrator.hpp"
#include "plancache/provider_config.hpp"

using namespace plancache;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;

struct RunArgs {
  std::string strategy = "plan";
  std::string tasks;
  std::string format = "jsonl";
  std::string cache;
  bool warm_cache = false;
  std::optional<std::size_t> cache_capacity;
  std::string provider = "live";
  std::string config;
  double threshold = 0.9;
  std::size_t max_iters = kDefaultMaxIterations;
  bool strict_insert_gate = false;
  std::string report;
  std::optional<std::size_t> sample;
  std::uint64_t sample_seed = 0;
  std::string budget_usd;
};

struct MatchArgs {
  std::string pairs;
  std::string report;
};

class GatewayEmbedder final : public Embedder {
 public:
  explicit GatewayEmbedder(Gateway& gateway) : gateway_(gateway) {}
  Embedding embed(std::string_view text) override { return gateway_.embed(text); }

 private:
  Gateway& gateway_;
};

Gateway build_gateway(const RunArgs& args) {
  auto config = args.config.empty() ? GatewayConfig::defaults() : GatewayConfig::from_file(args.config);
  if (args.provider == "live") return make_live_gateway(config);
  constexpr std::string_view prefix = "scripted:";
  if (args.provider.rfind(prefix, 0) == 0 && args.provider.size() > prefix.size()) {
    return make_scripted_gateway(ScriptedProvider::from_file(args.provider.substr(prefix.size())),
                                 config);
  }
  throw ConfigError("--provider must be 'live' or 'scripted:FILE', got '" + args.provider + "'");
}

void print_summary(const RunReport& r) {
  auto pct = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f%%", *v * 100.0);
    return std::string(buf);
  };
  std::cout << "strategy:           " << to_string(r.strategy) << "\n"
            << "tasks:              " << r.rows.size() << "\n"
            << "accuracy:           " << pct(r.accuracy()) << " (" << r.correct << "/" << r.judged
            << ")\n"
            << "hit rate:           " << pct(r.hit_rate()) << "\n"
            << "accuracy on hits:   " << pct(r.accuracy_on_hits()) << "\n"
            << "accuracy on misses: " << pct(r.accuracy_on_misses()) << "\n"
            << "serving cost:       " << r.breakdown.formatted_total() << "\n"
            << "cache overhead:     " << r.breakdown.formatted_overhead() << "\n"
            << "judge/embedding:    $" << r.breakdown.evaluation_usd.to_string(4) << "\n";
  if (r.budget_exhausted) {
    std::cout << "budget exhausted; " << r.skipped_tasks << " task(s) skipped\n";
  }
}

int run_command(const RunArgs& args) {
  const auto kind = parse_strategy_kind(args.strategy);
  if (!kind) throw ConfigError("unknown strategy '" + args.strategy + "'");
  const auto format = parse_task_format(args.format);
  if (!format) throw ConfigError("unknown task format '" + args.format + "'");
  if (args.warm_cache && args.cache.empty()) throw ConfigError("--warm-cache needs --cache FILE");
  if (!uses_cache(*kind) && (!args.cache.empty() || args.warm_cache)) {
    throw ConfigError("strategy '" + args.strategy + "' does not use a cache");
  }
  if (args.max_iters == 0) throw ConfigError("--max-iters must be positive");

  BenchConfig bench;
  if (!args.budget_usd.empty()) {
    try {
      bench.budget = Usd::parse(args.budget_usd);
    } catch (const std::invalid_argument&) {
      throw ConfigError("--budget-usd must be a decimal amount, got '" + args.budget_usd + "'");
    }
  }

  auto tasks = load_tasks(args.tasks, *format);
  if (args.sample) {
    tasks = sample_tasks(tasks, *args.sample, args.sample_seed);
    bench.sample_seed = args.sample_seed;
  }
  bench.settings = {{"tasks_file", args.tasks},
                    {"format", args.format},
                    {"provider", args.provider},
                    {"max_iters", args.max_iters},
                    {"strict_insert_gate", args.strict_insert_gate},
                    {"warm_cache", args.warm_cache}};
  if (*kind == StrategyKind::SemanticCache) bench.settings["threshold"] = args.threshold;
  if (bench.budget) bench.settings["budget_usd"] = bench.budget->to_string(2);

  Gateway gateway = build_gateway(args);
  const std::filesystem::path cache_path = args.cache;

  std::unique_ptr<Strategy> strategy;
  PlanCache plan_cache(args.cache_capacity);
  RawLogCache raw_cache(args.cache_capacity);
  SemanticAnswerCache answer_cache;
  std::unique_ptr<PlanCachingAgent> agent;
  GatewayEmbedder embedder(gateway);

  switch (*kind) {
    case StrategyKind::AccuracyOptimal:
      strategy = std::make_unique<AccuracyOptimalStrategy>(gateway, args.max_iters);
      break;
    case StrategyKind::CostOptimal:
      strategy = std::make_unique<CostOptimalStrategy>(gateway, args.max_iters);
      break;
    case StrategyKind::SemanticCache:
      if (args.warm_cache) answer_cache = SemanticAnswerCache::load(cache_path, embedder);
      strategy = std::make_unique<SemanticCacheStrategy>(gateway, answer_cache, args.threshold,
                                                         args.max_iters);
      break;
    case StrategyKind::FullHistoryCache:
      if (args.warm_cache) raw_cache = RawLogCache::load(cache_path, args.cache_capacity);
      strategy = std::make_unique<FullHistoryCacheStrategy>(gateway, raw_cache, args.max_iters);
      break;
    case StrategyKind::PlanCache: {
      if (args.warm_cache) plan_cache = PlanCache::load(cache_path, args.cache_capacity);
      AgentConfig agent_config;
      agent_config.max_iterations = args.max_iters;
      agent_config.strict_insert_gate = args.strict_insert_gate;
      InsertionVerifier verifier = [](RunContext& ctx, const TaskInstance& task,
                                      const std::string& output) {
        return judge(ctx, task, output).score == 1;
      };
      agent = std::make_unique<PlanCachingAgent>(gateway, plan_cache, agent_config, verifier);
      strategy = std::make_unique<PlanCacheStrategy>(*agent);
      break;
    }
  }

  const auto report = run_benchmark(*strategy, gateway, tasks, bench);
  if (!args.cache.empty()) strategy->save_cache(cache_path);
  if (!args.report.empty()) write_report(report, args.report);
  print_summary(report);
  return 0;
}

int match_command(const MatchArgs& args) {
  const auto pairs = load_pairs(args.pairs);
  BagOfWordsEmbedder embedder;
  const auto thresholds = default_thresholds();
  const auto report = matching_analysis(pairs, thresholds, embedder);
  if (!args.report.empty()) write_match_report(report, args.report);
  std::printf("keyword  fp=%.4f fn=%.4f\n", report.keyword_based.fp_rate(),
              report.keyword_based.fn_rate());
  for (const auto& row : report.query_based) {
    std::printf("t=%.2f   fp=%.4f fn=%.4f\n", row.threshold, row.rates.fp_rate(), row.rates.fn_rate());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plan caching for Plan-Act agents"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one strategy over a task file");
  run_cmd->add_option("--strategy", run.strategy, "plan|semantic|full-history|accuracy-opt|cost-opt")
      ->capture_default_str();
  run_cmd->add_option("--tasks", run.tasks, "Task file")->required();
  run_cmd->add_option("--format", run.format, "jsonl|financebench|tabmwp")->capture_default_str();
  run_cmd->add_option("--cache", run.cache, "Cache file, saved after the run");
  run_cmd->add_flag("--warm-cache", run.warm_cache, "Load --cache before the first task");
  run_cmd->add_option("--cache-capacity", run.cache_capacity, "LRU capacity (default unbounded)");
  run_cmd->add_option("--provider", run.provider, "live or scripted:FILE")->capture_default_str();
  run_cmd->add_option("--config", run.config, "Provider config file");
  run_cmd->add_option("--threshold", run.threshold, "Semantic cache similarity threshold")
      ->capture_default_str();
  run_cmd->add_option("--max-iters", run.max_iters, "Plan-act round limit")->capture_default_str();
  run_cmd->add_flag("--strict-insert-gate", run.strict_insert_gate,
                    "Judge answers before caching their templates");
  run_cmd->add_option("--report", run.report, "Report directory");
  run_cmd->add_option("--sample", run.sample, "Run a seeded sample of N tasks");
  run_cmd->add_option("--sample-seed", run.sample_seed, "Seed for --sample")->capture_default_str();
  run_cmd->add_option("--budget-usd", run.budget_usd, "Stop once total spend reaches this amount");

  MatchArgs match;
  auto* match_cmd = app.add_subcommand("match", "Query-based vs keyword-based matching analysis");
  match_cmd->add_option("--pairs", match.pairs, "Labeled pairs (JSONL)")->required();
  match_cmd->add_option("--report", match.report, "Report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  spdlog::set_default_logger(spdlog::stderr_color_mt("plancache"));
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*run_cmd) return run_command(run);
    return match_command(match);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
