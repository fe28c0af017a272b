#include <fstream>

#include <spdlog/spdlog.h>

#include "plancache/bench.hpp"
#include "plancache/csv.hpp"
#include "plancache/errors.hpp"

namespace plancache {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json();
}

// Restores the gateway's previous ledger when the run ends.
class LedgerScope {
 public:
  LedgerScope(Gateway& gateway, CostLedger& ledger) : gateway_(gateway), previous_(gateway.ledger()) {
    gateway_.attach_ledger(&ledger);
  }
  ~LedgerScope() { gateway_.attach_ledger(previous_); }
  LedgerScope(const LedgerScope&) = delete;
  LedgerScope& operator=(const LedgerScope&) = delete;

 private:
  Gateway& gateway_;
  CostLedger* previous_;
};

Usd total_spend(const CostLedger& ledger) {
  Usd sum;
  for (const auto& row : ledger.snapshot()) sum += row.usd;
  return sum;
}

}  // namespace

std::optional<double> RunReport::accuracy() const { return ratio(correct, judged); }

std::optional<double> RunReport::hit_rate() const {
  if (!uses_cache(strategy)) return std::nullopt;
  return ratio(hits, hits + misses);
}

std::optional<double> RunReport::accuracy_on_hits() const { return ratio(correct_hits, judged_hits); }

std::optional<double> RunReport::accuracy_on_misses() const {
  return ratio(correct_misses, judged_misses);
}

RunReport run_benchmark(Strategy& strategy, Gateway& gateway, std::span<const TaskInstance> tasks,
                        const BenchConfig& config) {
  CostLedger ledger(gateway.pricing());
  LedgerScope scope(gateway, ledger);

  RunReport report;
  report.strategy = strategy.kind();
  report.sample_seed = config.sample_seed;
  report.settings = config.settings;

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& task = tasks[i];
    if (config.budget && total_spend(ledger) >= *config.budget) {
      report.budget_exhausted = true;
      report.skipped_tasks = tasks.size() - i;
      spdlog::warn("budget of ${} reached; skipping {} remaining task(s)",
                   config.budget->to_string(4), report.skipped_tasks);
      break;
    }

    TaskRow row;
    row.task_id = task.id.empty() ? "task-" + std::to_string(i + 1) : task.id;
    row.ground_truth = task.ground_truth;
    try {
      auto outcome = strategy.run(task);
      row.path = outcome.path;
      row.keyword = outcome.keyword;
      row.output = outcome.output;
      row.iterations = outcome.iterations;
      row.serving_usd = outcome.serving_usd();
      row.notes = outcome.notes;
    } catch (const std::exception& e) {
      spdlog::error("task {} failed: {}", row.task_id, e.what());
      row.error = e.what();
    }

    if (task.ground_truth) {
      if (row.error) {
        row.score = 0;
      } else {
        try {
          RunContext judge_ctx(gateway, row.task_id + ":judge");
          const auto verdict = judge(judge_ctx, task, row.output);
          row.score = verdict.score;
          row.judge_flagged = verdict.flagged;
        } catch (const std::exception& e) {
          spdlog::error("judging task {} failed: {}", row.task_id, e.what());
          row.score = 0;
          row.judge_flagged = true;
          row.notes.push_back(std::string("judge failed: ") + e.what());
        }
      }
    }

    const bool hit = row.path && (*row.path == RunPath::Hit || *row.path == RunPath::HitEscalatedToMiss);
    if (uses_cache(report.strategy)) (hit ? report.hits : report.misses) += 1;
    if (row.score) {
      ++report.judged;
      if (row.correct()) ++report.correct;
      if (uses_cache(report.strategy)) {
        (hit ? report.judged_hits : report.judged_misses) += 1;
        if (row.correct()) (hit ? report.correct_hits : report.correct_misses) += 1;
      }
    }
    report.rows.push_back(std::move(row));
  }

  report.ledger = ledger.snapshot();
  report.breakdown = breakdown(report.ledger);
  report.cache_stats = strategy.cache_stats();
  return report;
}

nlohmann::json to_json(const RunReport& r) {
  nlohmann::json stats;
  if (r.cache_stats) {
    stats = {{"hits", r.cache_stats->hits},
             {"misses", r.cache_stats->misses},
             {"insertions", r.cache_stats->insertions},
             {"evictions", r.cache_stats->evictions}};
  }
  auto rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"task_id", row.task_id},
                    {"path", row.path ? nlohmann::json(to_string(*row.path)) : nlohmann::json()},
                    {"keyword", row.keyword ? nlohmann::json(*row.keyword) : nlohmann::json()},
                    {"output", row.output},
                    {"ground_truth",
                     row.ground_truth ? nlohmann::json(*row.ground_truth) : nlohmann::json()},
                    {"score", row.score ? nlohmann::json(*row.score) : nlohmann::json()},
                    {"judge_flagged", row.judge_flagged},
                    {"iterations", row.iterations},
                    {"serving_usd", row.serving_usd.to_string()},
                    {"error", row.error ? nlohmann::json(*row.error) : nlohmann::json()},
                    {"notes", row.notes}});
  }
  return {{"strategy", to_string(r.strategy)},
          {"tasks", r.rows.size()},
          {"judged", r.judged},
          {"correct", r.correct},
          {"accuracy", optional_json(r.accuracy())},
          {"hits", uses_cache(r.strategy) ? nlohmann::json(r.hits) : nlohmann::json()},
          {"misses", uses_cache(r.strategy) ? nlohmann::json(r.misses) : nlohmann::json()},
          {"hit_rate", optional_json(r.hit_rate())},
          {"accuracy_on_hits", optional_json(r.accuracy_on_hits())},
          {"accuracy_on_misses", optional_json(r.accuracy_on_misses())},
          {"total_cost_usd", r.total_cost().to_string()},
          {"breakdown", to_json(r.breakdown)},
          {"cache_stats", std::move(stats)},
          {"sample_seed", r.sample_seed ? nlohmann::json(*r.sample_seed) : nlohmann::json()},
          {"settings", r.settings},
          {"budget_exhausted", r.budget_exhausted},
          {"skipped_tasks", r.skipped_tasks},
          {"rows", std::move(rows)}};
}

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create report directory " + dir.string() + ": " + ec.message());

  {
    auto out = open_for_write(dir / "report.json");
    out << to_json(report).dump(2) << "\n";
  }
  {
    auto out = open_for_write(dir / "tasks.csv");
    out << "task_id,path,keyword,score,judge_flagged,iterations,serving_usd,output,ground_truth,error\n";
    for (const auto& row : report.rows) {
      out << csv_field(row.task_id) << ',' << (row.path ? to_string(*row.path) : "") << ','
          << csv_field(row.keyword.value_or("")) << ','
          << (row.score ? std::to_string(*row.score) : "") << ','
          << (row.judge_flagged ? "true" : "false") << ',' << row.iterations << ','
          << row.serving_usd.to_string() << ',' << csv_field(row.output) << ','
          << csv_field(row.ground_truth.value_or("")) << ',' << csv_field(row.error.value_or(""))
          << "\n";
    }
  }
  {
    auto out = open_for_write(dir / "ledger.csv");
    write_ledger_csv(out, report.ledger);
  }
}

}  // namespace plancache
