#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plancache/embedding.hpp"
#include "plancache/gateway.hpp"
#include "plancache/orchestrator.hpp"
#include "plancache/store.hpp"

namespace plancache {

enum class StrategyKind { AccuracyOptimal, CostOptimal, SemanticCache, FullHistoryCache, PlanCache };

/// CLI names: accuracy-opt, cost-opt, semantic, full-history, plan.
std::string_view to_string(StrategyKind kind);
std::optional<StrategyKind> parse_strategy_kind(std::string_view text);
bool uses_cache(StrategyKind kind);

/// Common shape for the five systems the harness compares.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual StrategyKind kind() const = 0;
  virtual RunOutcome run(const TaskInstance& task) = 0;
  virtual std::optional<CacheStats> cache_stats() const { return std::nullopt; }
  virtual void save_cache(const std::filesystem::path&) const {}
};

/// Large planner every time; never reads or writes a cache.
class AccuracyOptimalStrategy final : public Strategy {
 public:
  explicit AccuracyOptimalStrategy(Gateway& gateway,
                                   std::size_t max_iterations = kDefaultMaxIterations);
  StrategyKind kind() const override { return StrategyKind::AccuracyOptimal; }
  RunOutcome run(const TaskInstance& task) override;

 private:
  Gateway& gateway_;
  std::size_t max_iterations_;
};

/// Small planner every time; never reads or writes a cache.
class CostOptimalStrategy final : public Strategy {
 public:
  explicit CostOptimalStrategy(Gateway& gateway, std::size_t max_iterations = kDefaultMaxIterations);
  StrategyKind kind() const override { return StrategyKind::CostOptimal; }
  RunOutcome run(const TaskInstance& task) override;

 private:
  Gateway& gateway_;
  std::size_t max_iterations_;
};

/// Similarity between two queries for answer reuse: exactly 1.0 for
/// byte-identical text, otherwise the embedding cosine clamped into
/// [0, 1) so that a threshold of 1.0 accepts only identical queries.
double query_similarity(std::string_view query_a, const Embedding& a, std::string_view query_b,
                        const Embedding& b);

/// Query-level answer store.
class SemanticAnswerCache {
 public:
  struct Entry {
    std::string query;
    std::string answer;
    Embedding embedding;
    std::uint64_t hit_count = 0;
  };

  struct Match {
    std::size_t index = 0;
    double similarity = 0.0;
  };

  SemanticAnswerCache() = default;
  SemanticAnswerCache(SemanticAnswerCache&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    entries_ = std::move(other.entries_);
    stats_ = other.stats_;
  }
  SemanticAnswerCache& operator=(SemanticAnswerCache&& other) noexcept {
    if (this != &other) {
      std::scoped_lock lock(mutex_, other.mutex_);
      entries_ = std::move(other.entries_);
      stats_ = other.stats_;
    }
    return *this;
  }

  /// Highest-similarity entry; ties go to the earliest entry.
  std::optional<Match> best_match(std::string_view query, const Embedding& embedding) const;

  /// Hit when the best similarity reaches `threshold`; bumps stats.
  std::optional<Entry> lookup(std::string_view query, const Embedding& embedding, double threshold);
  void add(std::string query, std::string answer, Embedding embedding);

  std::size_t size() const;
  CacheStats stats() const;
  std::vector<Entry> entries() const;

  /// Same document layout as the plan cache, payload_kind "answer_pair".
  void save(const std::filesystem::path& path, const SaveOptions& options = {}) const;
  /// Embeddings are recomputed with `embedder` on load.
  static SemanticAnswerCache load(const std::filesystem::path& path, Embedder& embedder);

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  CacheStats stats_;
};

/// Reuses a stored final answer when a past query is similar enough.
/// Every served query is indexed (hits with the answer they received), so
/// the set of stored queries never depends on the threshold.
class SemanticCacheStrategy final : public Strategy {
 public:
  SemanticCacheStrategy(Gateway& gateway, SemanticAnswerCache& cache, double threshold,
                        std::size_t max_iterations = kDefaultMaxIterations);
  StrategyKind kind() const override { return StrategyKind::SemanticCache; }
  RunOutcome run(const TaskInstance& task) override;
  std::optional<CacheStats> cache_stats() const override { return cache_.stats(); }
  void save_cache(const std::filesystem::path& path) const override { cache_.save(path); }

 private:
  Gateway& gateway_;
  SemanticAnswerCache& cache_;
  double threshold_;
  std::size_t max_iterations_;
};

/// Caches the raw execution log under the extracted keyword; on a hit the
/// small planner sees the whole unfiltered log as an in-context example.
class FullHistoryCacheStrategy final : public Strategy {
 public:
  FullHistoryCacheStrategy(Gateway& gateway, RawLogCache& cache,
                           std::size_t max_iterations = kDefaultMaxIterations);
  StrategyKind kind() const override { return StrategyKind::FullHistoryCache; }
  RunOutcome run(const TaskInstance& task) override;
  std::optional<CacheStats> cache_stats() const override { return cache_.stats(); }
  void save_cache(const std::filesystem::path& path) const override { cache_.save(path); }

 private:
  Gateway& gateway_;
  RawLogCache& cache_;
  std::size_t max_iterations_;
};

class PlanCacheStrategy final : public Strategy {
 public:
  explicit PlanCacheStrategy(PlanCachingAgent& agent) : agent_(agent) {}
  StrategyKind kind() const override { return StrategyKind::PlanCache; }
  RunOutcome run(const TaskInstance& task) override { return agent_.run_task(task); }
  std::optional<CacheStats> cache_stats() const override { return agent_.cache().stats(); }
  void save_cache(const std::filesystem::path& path) const override { agent_.cache().save(path); }

 private:
  PlanCachingAgent& agent_;
};

}  // namespace plancache
