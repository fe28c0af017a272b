#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/errors.hpp"
#include "plancache/keyword.hpp"
#include "plancache/model.hpp"

namespace plancache {

inline constexpr int kCacheSchemaVersion = 1;

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t insertions = 0;
  std::uint64_t evictions = 0;

  std::uint64_t lookups() const { return hits + misses; }
  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

template <typename Payload>
struct StoreEntry {
  Keyword keyword;
  Payload value;
  std::uint64_t created_at = 0;
  std::uint64_t hit_count = 0;
  std::uint64_t last_used = 0;

  friend bool operator==(const StoreEntry&, const StoreEntry&) = default;
};

/// Describes how a payload type is named, validated and serialized in the
/// cache document.
template <typename Payload>
struct PayloadTraits;

template <>
struct PayloadTraits<PlanTemplate> {
  static constexpr std::string_view kind = "template";
  static constexpr std::string_view field = "template";
  static std::optional<std::string> problem(const PlanTemplate& t) { return template_problem(t); }
};

template <>
struct PayloadTraits<ExecutionLog> {
  static constexpr std::string_view kind = "raw_log";
  static constexpr std::string_view field = "raw_log";
  static std::optional<std::string> problem(const ExecutionLog& log) {
    if (!log.final_output) return "raw log has no final output";
    return std::nullopt;
  }
};

struct SaveOptions {
  /// Test seam for crash injection; called with "partial_write" once half of
  /// the document is on disk and with "before_rename" before the commit.
  std::function<void(std::string_view stage)> fault_hook;
};

/// Writes `content` to a sibling temp file and renames it over `path`, so
/// readers see either the old or the new document. Throws PersistenceError.
void atomic_write_file(const std::filesystem::path& path, std::string_view content,
                       const SaveOptions& options = {});
std::string read_file(const std::filesystem::path& path);

/// Exact-match keyword store with optional LRU capacity.
///
/// Duplicate inserts keep the first entry. Recency is bumped by inserts and
/// by hits; misses touch nothing but the stats. Lookups mutate recency, so
/// they take the writer side of the lock; read-only queries share it.
template <typename Payload>
class KeyedStore {
 public:
  using Entry = StoreEntry<Payload>;
  using Traits = PayloadTraits<Payload>;

  explicit KeyedStore(std::optional<std::size_t> capacity = std::nullopt) : capacity_(capacity) {
    if (capacity_ && *capacity_ == 0) throw ConfigError("cache capacity must be positive");
  }

  KeyedStore(const KeyedStore& other) { copy_from(other); }
  KeyedStore& operator=(const KeyedStore& other) {
    if (this != &other) copy_from(other);
    return *this;
  }
  KeyedStore(KeyedStore&& other) { copy_from(other); }
  KeyedStore& operator=(KeyedStore&& other) {
    if (this != &other) copy_from(other);
    return *this;
  }

  std::optional<Entry> lookup(const Keyword& keyword) {
    std::unique_lock lock(mutex_);
    auto it = map_.find(keyword);
    if (it == map_.end()) {
      ++stats_.misses;
      return std::nullopt;
    }
    ++stats_.hits;
    auto& slot = it->second;
    ++slot.entry.hit_count;
    slot.entry.last_used = next_seq_++;
    recency_.splice(recency_.begin(), recency_, slot.position);
    return slot.entry;
  }

  /// Returns false when the key already exists (first writer wins).
  /// Throws InvalidTemplate when the payload fails validation.
  bool insert(const Keyword& keyword, Payload value) {
    if (auto problem = Traits::problem(value)) {
      throw InvalidTemplate("refusing to cache '" + keyword.str() + "': " + *problem);
    }
    std::unique_lock lock(mutex_);
    if (map_.contains(keyword)) return false;
    if (capacity_ && map_.size() >= *capacity_) evict_lru();
    const auto seq = next_seq_++;
    recency_.push_front(keyword);
    map_.emplace(keyword, Slot{Entry{keyword, std::move(value), seq, 0, seq}, recency_.begin()});
    ++stats_.insertions;
    return true;
  }

  bool contains(const Keyword& keyword) const {
    std::shared_lock lock(mutex_);
    return map_.contains(keyword);
  }

  /// Read without touching stats or recency.
  std::optional<Entry> peek(const Keyword& keyword) const {
    std::shared_lock lock(mutex_);
    auto it = map_.find(keyword);
    if (it == map_.end()) return std::nullopt;
    return it->second.entry;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return map_.size();
  }

  CacheStats stats() const {
    std::shared_lock lock(mutex_);
    return stats_;
  }

  std::uint64_t next_seq() const {
    std::shared_lock lock(mutex_);
    return next_seq_;
  }

  std::optional<std::size_t> capacity() const { return capacity_; }

  /// Entries ordered by creation.
  std::vector<Entry> entries() const {
    std::shared_lock lock(mutex_);
    return entries_locked();
  }

  /// Keys from most to least recently used.
  std::vector<Keyword> keys_by_recency() const {
    std::shared_lock lock(mutex_);
    return {recency_.begin(), recency_.end()};
  }

  nlohmann::json to_document() const {
    std::shared_lock lock(mutex_);
    auto entries = nlohmann::json::array();
    for (const auto& e : entries_locked()) {
      entries.push_back({{"keyword", e.keyword.str()},
                         {std::string(Traits::field), e.value},
                         {"created_at", e.created_at},
                         {"hit_count", e.hit_count},
                         {"last_used", e.last_used}});
    }
    return {{"schema_version", kCacheSchemaVersion},
            {"payload_kind", Traits::kind},
            {"entries", std::move(entries)},
            {"stats",
             {{"hits", stats_.hits},
              {"misses", stats_.misses},
              {"insertions", stats_.insertions},
              {"evictions", stats_.evictions}}},
            {"next_seq", next_seq_}};
  }

  /// Throws PersistenceError naming the offending keyword where possible.
  static KeyedStore from_document(const nlohmann::json& doc,
                                  std::optional<std::size_t> capacity = std::nullopt) {
    if (!doc.is_object()) throw PersistenceError("cache document is not an object");
    try {
      const int version = doc.at("schema_version").get<int>();
      if (version != kCacheSchemaVersion) {
        throw PersistenceError("unsupported cache schema_version " + std::to_string(version));
      }
      const std::string kind = doc.value("payload_kind", std::string(PayloadTraits<PlanTemplate>::kind));
      if (kind != Traits::kind) {
        throw PersistenceError("cache holds payload_kind '" + kind + "', expected '" +
                               std::string(Traits::kind) + "'");
      }
      const auto next_seq = doc.at("next_seq").get<std::uint64_t>();
      const auto& s = doc.at("stats");
      CacheStats stats{s.at("hits").get<std::uint64_t>(), s.at("misses").get<std::uint64_t>(),
                       s.at("insertions").get<std::uint64_t>(),
                       s.at("evictions").get<std::uint64_t>()};

      std::vector<Entry> entries;
      std::unordered_set<std::uint64_t> used;
      for (const auto& e : doc.at("entries")) {
        const auto raw = e.at("keyword").get<std::string>();
        if (!is_normalized(raw)) {
          throw PersistenceError("entry '" + raw + "': keyword is not normalized");
        }
        Payload value;
        try {
          value = e.at(std::string(Traits::field)).template get<Payload>();
        } catch (const std::exception& ex) {
          throw PersistenceError("entry '" + raw + "': malformed payload: " + ex.what());
        }
        if (auto problem = Traits::problem(value)) {
          throw PersistenceError("entry '" + raw + "': " + *problem);
        }
        Entry entry{normalize(raw), std::move(value), e.at("created_at").get<std::uint64_t>(),
                    e.at("hit_count").get<std::uint64_t>(), e.at("last_used").get<std::uint64_t>()};
        if (entry.last_used < entry.created_at || entry.last_used >= next_seq) {
          throw PersistenceError("entry '" + raw + "': sequence numbers out of range");
        }
        if (!used.insert(entry.last_used).second) {
          throw PersistenceError("entry '" + raw + "': duplicate last_used sequence");
        }
        entries.push_back(std::move(entry));
      }
      KeyedStore store(capacity);
      store.restore(std::move(entries), stats, next_seq);
      return store;
    } catch (const nlohmann::json::exception& e) {
      throw PersistenceError(std::string("malformed cache document: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path, const SaveOptions& options = {}) const {
    atomic_write_file(path, to_document().dump(2) + "\n", options);
  }

  static KeyedStore load(const std::filesystem::path& path,
                         std::optional<std::size_t> capacity = std::nullopt) {
    const auto text = read_file(path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw PersistenceError("cache file " + path.string() + " is not valid: " + e.what());
    }
    return from_document(doc, capacity);
  }

  friend bool operator==(const KeyedStore& a, const KeyedStore& b) {
    return a.entries() == b.entries() && a.stats() == b.stats() && a.next_seq() == b.next_seq() &&
           a.keys_by_recency() == b.keys_by_recency();
  }

 private:
  struct Slot {
    Entry entry;
    typename std::list<Keyword>::iterator position;
  };

  std::vector<Entry> entries_locked() const {
    std::vector<Entry> out;
    out.reserve(map_.size());
    for (const auto& [_, slot] : map_) out.push_back(slot.entry);
    std::sort(out.begin(), out.end(),
              [](const Entry& x, const Entry& y) { return x.created_at < y.created_at; });
    return out;
  }

  void evict_lru() {
    const Keyword victim = recency_.back();
    recency_.pop_back();
    map_.erase(victim);
    ++stats_.evictions;
  }

  // Rebuilds recency from last_used. Trims to capacity, counting evictions.
  void restore(std::vector<Entry> entries, CacheStats stats, std::uint64_t next_seq) {
    std::sort(entries.begin(), entries.end(),
              [](const Entry& x, const Entry& y) { return x.last_used > y.last_used; });
    map_.clear();
    recency_.clear();
    stats_ = stats;
    next_seq_ = next_seq;
    for (auto& e : entries) {
      if (map_.contains(e.keyword)) {
        throw PersistenceError("entry '" + e.keyword.str() + "': duplicate keyword");
      }
      recency_.push_back(e.keyword);
      auto pos = std::prev(recency_.end());
      auto key = e.keyword;
      map_.emplace(std::move(key), Slot{std::move(e), pos});
    }
    while (capacity_ && map_.size() > *capacity_) evict_lru();
  }

  void copy_from(const KeyedStore& other) {
    std::vector<Entry> entries;
    CacheStats stats;
    std::uint64_t next_seq = 0;
    {
      std::shared_lock lock(other.mutex_);
      entries = other.entries_locked();
      stats = other.stats_;
      next_seq = other.next_seq_;
    }
    std::unique_lock lock(mutex_);
    capacity_ = other.capacity_;
    restore(std::move(entries), stats, next_seq);
  }

  mutable std::shared_mutex mutex_;
  std::optional<std::size_t> capacity_;
  std::list<Keyword> recency_;
  std::unordered_map<Keyword, Slot> map_;
  CacheStats stats_;
  std::uint64_t next_seq_ = 0;
};

using CacheEntry = StoreEntry<PlanTemplate>;
using PlanCache = KeyedStore<PlanTemplate>;
using RawLogCache = KeyedStore<ExecutionLog>;

}  // namespace plancache
