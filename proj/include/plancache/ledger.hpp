#pragma once

#include <array>
#include <mutex>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/chat.hpp"
#include "plancache/money.hpp"

namespace plancache {

enum class CostComponent {
  LargePlanner,
  SmallPlanner,
  Actor,
  KeywordExtraction,
  CacheGeneration,
  Judge,
  Embedding,
};

inline constexpr std::size_t kComponentCount = 7;

std::string_view to_string(CostComponent c);
std::optional<CostComponent> parse_cost_component(std::string_view text);
CostComponent component_for(ModelRole role);

/// Judge and Embedding are evaluation apparatus, not serving cost.
constexpr bool is_serving(CostComponent c) {
  return c != CostComponent::Judge && c != CostComponent::Embedding;
}

struct LedgerRow {
  std::string run_id;
  CostComponent component = CostComponent::Actor;
  std::string model_id;
  TokenUsage usage;
  Usd usd;

  friend bool operator==(const LedgerRow&, const LedgerRow&) = default;
};

struct ComponentTotal {
  Usd usd;
  TokenUsage tokens;
  std::size_t calls = 0;
};

/// Table-3 style grouping. Serving totals exclude Judge and Embedding rows,
/// which are reported in evaluation_usd instead.
struct CostBreakdown {
  std::array<ComponentTotal, kComponentCount> components{};
  Usd total_usd;
  Usd overhead_usd;
  Usd evaluation_usd;
  double overhead_fraction = 0.0;

  const ComponentTotal& operator[](CostComponent c) const {
    return components[static_cast<std::size_t>(c)];
  }
  /// Share of serving total, in hundredths of a percent, half-even rounded.
  std::int64_t share_hundredths(CostComponent c) const;
  std::int64_t overhead_share_hundredths() const;
  /// "$1.7544 (94.17%)"
  std::string formatted(CostComponent c) const;
  std::string formatted_overhead() const;
  std::string formatted_total() const;
};

CostBreakdown breakdown(std::span<const LedgerRow> rows);

/// Append-only ledger. Appends are serialized; snapshot() copies under lock.
class CostLedger {
 public:
  explicit CostLedger(PricingTable pricing) : pricing_(std::move(pricing)) {}

  CostLedger(const CostLedger&) = delete;
  CostLedger& operator=(const CostLedger&) = delete;

  /// Prices and appends one row. Throws UnknownPricing.
  LedgerRow record(std::string run_id, CostComponent component, const ChatExchange& exchange);
  void append(LedgerRow row);

  std::vector<LedgerRow> snapshot() const;
  std::size_t size() const;
  Usd serving_total() const;
  const PricingTable& pricing() const { return pricing_; }

  /// CSV: run_id,component,model,input_tokens,output_tokens,usd
  void write_csv(std::ostream& out) const;

 private:
  PricingTable pricing_;
  mutable std::mutex mutex_;
  std::vector<LedgerRow> rows_;
};

void write_ledger_csv(std::ostream& out, std::span<const LedgerRow> rows);
nlohmann::json to_json(const CostBreakdown& b);

}  // namespace plancache
