#include "plancache/baselines.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "plancache/errors.hpp"

namespace plancache {

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::AccuracyOptimal:
      return "accuracy-opt";
    case StrategyKind::CostOptimal:
      return "cost-opt";
    case StrategyKind::SemanticCache:
      return "semantic";
    case StrategyKind::FullHistoryCache:
      return "full-history";
    case StrategyKind::PlanCache:
      return "plan";
  }
  return "plan";
}

std::optional<StrategyKind> parse_strategy_kind(std::string_view text) {
  for (auto k : {StrategyKind::AccuracyOptimal, StrategyKind::CostOptimal,
                 StrategyKind::SemanticCache, StrategyKind::FullHistoryCache,
                 StrategyKind::PlanCache}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

bool uses_cache(StrategyKind kind) {
  return kind != StrategyKind::AccuracyOptimal && kind != StrategyKind::CostOptimal;
}

namespace {

std::string run_id_for(const TaskInstance& task, std::atomic<std::size_t>& counter) {
  return task.id.empty() ? "run-" + std::to_string(++counter) : task.id;
}

std::atomic<std::size_t> g_anonymous_runs{0};

void require_query(const TaskInstance& task) {
  if (!task.has_query()) throw std::invalid_argument("task '" + task.id + "' has an empty query");
}

RunOutcome outcome_from(PlanActResult result, RunPath path) {
  RunOutcome o;
  o.path = path;
  o.output = std::move(result.output);
  o.log = std::move(result.log);
  o.iterations = o.log.iterations_used();
  o.iteration_limit_reached = result.iteration_limit_reached;
  return o;
}

RunOutcome uncached_run(Gateway& gateway, const TaskInstance& task, ModelRole planner,
                        std::size_t max_iterations) {
  require_query(task);
  RunContext ctx(gateway, run_id_for(task, g_anonymous_runs));
  PlanActOptions options;
  options.planner = planner;
  options.max_iterations = max_iterations;
  auto outcome = outcome_from(run_plan_act(ctx, task, options), RunPath::NoCache);
  outcome.task_id = ctx.run_id();
  attach_run_record(outcome, ctx);
  return outcome;
}

}  // namespace

AccuracyOptimalStrategy::AccuracyOptimalStrategy(Gateway& gateway, std::size_t max_iterations)
    : gateway_(gateway), max_iterations_(max_iterations) {}

RunOutcome AccuracyOptimalStrategy::run(const TaskInstance& task) {
  return uncached_run(gateway_, task, ModelRole::LargePlanner, max_iterations_);
}

CostOptimalStrategy::CostOptimalStrategy(Gateway& gateway, std::size_t max_iterations)
    : gateway_(gateway), max_iterations_(max_iterations) {}

RunOutcome CostOptimalStrategy::run(const TaskInstance& task) {
  return uncached_run(gateway_, task, ModelRole::SmallPlanner, max_iterations_);
}

// ---------------------------------------------------------------------------
// Semantic caching

double query_similarity(std::string_view query_a, const Embedding& a, std::string_view query_b,
                        const Embedding& b) {
  if (query_a == query_b) return 1.0;
  const double c = cosine(a, b);
  if (!(c > 0.0)) return 0.0;
  return std::min(c, std::nextafter(1.0, 0.0));
}

std::optional<SemanticAnswerCache::Match> SemanticAnswerCache::best_match(
    std::string_view query, const Embedding& embedding) const {
  std::lock_guard lock(mutex_);
  std::optional<Match> best;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const double s = query_similarity(query, embedding, entries_[i].query, entries_[i].embedding);
    if (!best || s > best->similarity) best = Match{i, s};
  }
  return best;
}

std::optional<SemanticAnswerCache::Entry> SemanticAnswerCache::lookup(std::string_view query,
                                                                      const Embedding& embedding,
                                                                      double threshold) {
  const auto match = best_match(query, embedding);
  std::lock_guard lock(mutex_);
  if (!match || match->similarity < threshold) {
    ++stats_.misses;
    return std::nullopt;
  }
  ++stats_.hits;
  auto& entry = entries_[match->index];
  ++entry.hit_count;
  return entry;
}

void SemanticAnswerCache::add(std::string query, std::string answer, Embedding embedding) {
  std::lock_guard lock(mutex_);
  entries_.push_back({std::move(query), std::move(answer), std::move(embedding), 0});
  ++stats_.insertions;
}

std::size_t SemanticAnswerCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

CacheStats SemanticAnswerCache::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

std::vector<SemanticAnswerCache::Entry> SemanticAnswerCache::entries() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

void SemanticAnswerCache::save(const std::filesystem::path& path, const SaveOptions& options) const {
  nlohmann::json doc;
  {
    std::lock_guard lock(mutex_);
    auto entries = nlohmann::json::array();
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      entries.push_back({{"query", entries_[i].query},
                         {"answer", entries_[i].answer},
                         {"created_at", i},
                         {"hit_count", entries_[i].hit_count}});
    }
    doc = {{"schema_version", kCacheSchemaVersion},
           {"payload_kind", "answer_pair"},
           {"entries", std::move(entries)},
           {"stats",
            {{"hits", stats_.hits},
             {"misses", stats_.misses},
             {"insertions", stats_.insertions},
             {"evictions", stats_.evictions}}},
           {"next_seq", entries_.size()}};
  }
  atomic_write_file(path, doc.dump(2) + "\n", options);
}

SemanticAnswerCache SemanticAnswerCache::load(const std::filesystem::path& path,
                                              Embedder& embedder) {
  SemanticAnswerCache cache;
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    if (doc.at("schema_version").get<int>() != kCacheSchemaVersion) {
      throw PersistenceError("unsupported cache schema_version in " + path.string());
    }
    if (doc.at("payload_kind").get<std::string>() != "answer_pair") {
      throw PersistenceError(path.string() + " does not hold answer pairs");
    }
    for (const auto& e : doc.at("entries")) {
      auto query = e.at("query").get<std::string>();
      if (query.empty()) throw PersistenceError("answer pair with empty query");
      auto embedding = embedder.embed(query);
      cache.entries_.push_back({std::move(query), e.at("answer").get<std::string>(),
                                std::move(embedding), e.at("hit_count").get<std::uint64_t>()});
    }
    const auto& s = doc.at("stats");
    cache.stats_ = {s.at("hits").get<std::uint64_t>(), s.at("misses").get<std::uint64_t>(),
                    s.at("insertions").get<std::uint64_t>(), s.at("evictions").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("malformed answer cache " + path.string() + ": " + e.what());
  }
  return cache;
}

SemanticCacheStrategy::SemanticCacheStrategy(Gateway& gateway, SemanticAnswerCache& cache,
                                             double threshold, std::size_t max_iterations)
    : gateway_(gateway), cache_(cache), threshold_(threshold), max_iterations_(max_iterations) {
  if (std::isnan(threshold)) throw ConfigError("semantic threshold is NaN");
}

RunOutcome SemanticCacheStrategy::run(const TaskInstance& task) {
  require_query(task);
  RunContext ctx(gateway_, run_id_for(task, g_anonymous_runs));
  const auto embedding = ctx.embed(task.query);

  RunOutcome outcome;
  if (auto hit = cache_.lookup(task.query, embedding, threshold_)) {
    outcome.path = RunPath::Hit;
    outcome.output = hit->answer;
    outcome.log.query = task.query;
    outcome.log.final_output = hit->answer;
    cache_.add(task.query, hit->answer, embedding);
  } else {
    PlanActOptions options;
    options.planner = ModelRole::LargePlanner;
    options.max_iterations = max_iterations_;
    outcome = outcome_from(run_plan_act(ctx, task, options), RunPath::Miss);
    cache_.add(task.query, outcome.output, embedding);
  }
  outcome.task_id = ctx.run_id();
  attach_run_record(outcome, ctx);
  return outcome;
}

// ---------------------------------------------------------------------------
// Full-history caching

FullHistoryCacheStrategy::FullHistoryCacheStrategy(Gateway& gateway, RawLogCache& cache,
                                                   std::size_t max_iterations)
    : gateway_(gateway), cache_(cache), max_iterations_(max_iterations) {}

RunOutcome FullHistoryCacheStrategy::run(const TaskInstance& task) {
  require_query(task);
  RunContext ctx(gateway_, run_id_for(task, g_anonymous_runs));

  std::optional<Keyword> keyword;
  try {
    keyword = extract_keyword(ctx, task.query);
  } catch (const EmptyKeyword&) {
  }

  PlanActOptions options;
  options.max_iterations = max_iterations_;
  std::optional<RawLogCache::Entry> hit;
  if (keyword) hit = cache_.lookup(*keyword);

  RunOutcome outcome;
  if (hit) {
    options.planner = ModelRole::SmallPlanner;
    options.in_context_example = render_execution_log(hit->value);
    outcome = outcome_from(run_plan_act(ctx, task, options), RunPath::Hit);
  } else {
    options.planner = ModelRole::LargePlanner;
    outcome = outcome_from(run_plan_act(ctx, task, options), RunPath::Miss);
    if (keyword && outcome.log.final_output) {
      outcome.template_inserted = cache_.insert(*keyword, outcome.log);
    }
  }
  if (keyword) outcome.keyword = keyword->str();
  outcome.task_id = ctx.run_id();
  attach_run_record(outcome, ctx);
  return outcome;
}

}  // namespace plancache
