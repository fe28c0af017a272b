#include "plancache/ledger.hpp"

#include "plancache/csv.hpp"

namespace plancache {

std::string_view to_string(CostComponent c) {
  switch (c) {
    case CostComponent::LargePlanner:
      return "large_planner";
    case CostComponent::SmallPlanner:
      return "small_planner";
    case CostComponent::Actor:
      return "actor";
    case CostComponent::KeywordExtraction:
      return "keyword_extraction";
    case CostComponent::CacheGeneration:
      return "cache_generation";
    case CostComponent::Judge:
      return "judge";
    case CostComponent::Embedding:
      return "embedding";
  }
  return "actor";
}

std::optional<CostComponent> parse_cost_component(std::string_view text) {
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    const auto c = static_cast<CostComponent>(i);
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

CostComponent component_for(ModelRole role) {
  switch (role) {
    case ModelRole::LargePlanner:
      return CostComponent::LargePlanner;
    case ModelRole::SmallPlanner:
      return CostComponent::SmallPlanner;
    case ModelRole::Actor:
      return CostComponent::Actor;
    case ModelRole::KeywordExtractor:
      return CostComponent::KeywordExtraction;
    case ModelRole::CacheGenerator:
      return CostComponent::CacheGeneration;
    case ModelRole::Judge:
      return CostComponent::Judge;
    case ModelRole::Embedder:
      return CostComponent::Embedding;
  }
  return CostComponent::Actor;
}

std::int64_t CostBreakdown::share_hundredths(CostComponent c) const {
  return percent_hundredths((*this)[c].usd, total_usd);
}

std::int64_t CostBreakdown::overhead_share_hundredths() const {
  return percent_hundredths(overhead_usd, total_usd);
}

namespace {

std::string usd_with_share(Usd part, Usd whole) {
  return "$" + part.to_string(4) + " (" + format_percent(part, whole) + "%)";
}

}  // namespace

std::string CostBreakdown::formatted(CostComponent c) const {
  return usd_with_share((*this)[c].usd, total_usd);
}

std::string CostBreakdown::formatted_overhead() const {
  return usd_with_share(overhead_usd, total_usd);
}

std::string CostBreakdown::formatted_total() const {
  return usd_with_share(total_usd, total_usd);
}

CostBreakdown breakdown(std::span<const LedgerRow> rows) {
  CostBreakdown b;
  for (const auto& row : rows) {
    auto& slot = b.components[static_cast<std::size_t>(row.component)];
    slot.usd += row.usd;
    slot.tokens += row.usage;
    ++slot.calls;
    if (is_serving(row.component)) {
      b.total_usd += row.usd;
    } else {
      b.evaluation_usd += row.usd;
    }
  }
  b.overhead_usd =
      b[CostComponent::KeywordExtraction].usd + b[CostComponent::CacheGeneration].usd;
  if (b.total_usd.units() != 0) {
    b.overhead_fraction = static_cast<double>(static_cast<long double>(b.overhead_usd.units()) /
                                              static_cast<long double>(b.total_usd.units()));
  }
  return b;
}

LedgerRow CostLedger::record(std::string run_id, CostComponent component,
                             const ChatExchange& exchange) {
  const auto& price = pricing_.at(exchange.model_id);
  LedgerRow row{std::move(run_id), component, exchange.model_id, exchange.usage,
                cost_of(exchange.usage, price)};
  append(row);
  return row;
}

void CostLedger::append(LedgerRow row) {
  std::lock_guard lock(mutex_);
  rows_.push_back(std::move(row));
}

std::vector<LedgerRow> CostLedger::snapshot() const {
  std::lock_guard lock(mutex_);
  return rows_;
}

std::size_t CostLedger::size() const {
  std::lock_guard lock(mutex_);
  return rows_.size();
}

Usd CostLedger::serving_total() const {
  std::lock_guard lock(mutex_);
  Usd total;
  for (const auto& r : rows_) {
    if (is_serving(r.component)) total += r.usd;
  }
  return total;
}

void CostLedger::write_csv(std::ostream& out) const {
  const auto rows = snapshot();
  write_ledger_csv(out, rows);
}

void write_ledger_csv(std::ostream& out, std::span<const LedgerRow> rows) {
  out << "run_id,component,model,input_tokens,output_tokens,usd\n";
  for (const auto& r : rows) {
    out << csv_field(r.run_id) << ',' << to_string(r.component) << ',' << csv_field(r.model_id)
        << ',' << r.usage.input_tokens << ',' << r.usage.output_tokens << ','
        << r.usd.to_string() << '\n';
  }
}

nlohmann::json to_json(const CostBreakdown& b) {
  nlohmann::json components = nlohmann::json::object();
  for (std::size_t i = 0; i < kComponentCount; ++i) {
    const auto c = static_cast<CostComponent>(i);
    const auto& t = b[c];
    components[std::string(to_string(c))] = {
        {"usd", t.usd.to_string()},
        {"calls", t.calls},
        {"input_tokens", t.tokens.input_tokens},
        {"output_tokens", t.tokens.output_tokens},
        {"display", is_serving(c) ? b.formatted(c) : "$" + t.usd.to_string(4)},
    };
  }
  return {{"components", std::move(components)},
          {"total_usd", b.total_usd.to_string()},
          {"overhead_usd", b.overhead_usd.to_string()},
          {"evaluation_usd", b.evaluation_usd.to_string()},
          {"overhead_fraction", b.overhead_fraction},
          {"overhead_display", b.formatted_overhead()},
          {"total_display", b.formatted_total()}};
}

}  // namespace plancache
