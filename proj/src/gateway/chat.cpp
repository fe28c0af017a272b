#include "plancache/chat.hpp"

#include "plancache/errors.hpp"

namespace plancache {

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::LargePlanner:
      return "large_planner";
    case ModelRole::SmallPlanner:
      return "small_planner";
    case ModelRole::Actor:
      return "actor";
    case ModelRole::KeywordExtractor:
      return "keyword_extractor";
    case ModelRole::CacheGenerator:
      return "cache_generator";
    case ModelRole::Judge:
      return "judge";
    case ModelRole::Embedder:
      return "embedder";
  }
  return "actor";
}

std::optional<ModelRole> parse_model_role(std::string_view text) {
  for (ModelRole r : kAllRoles) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::string_view to_string(Speaker speaker) {
  switch (speaker) {
    case Speaker::System:
      return "system";
    case Speaker::User:
      return "user";
    case Speaker::Assistant:
      return "assistant";
  }
  return "user";
}

Usd cost_of(const TokenUsage& usage, const ModelPricing& pricing) {
  const __int128 in = static_cast<__int128>(usage.input_tokens) * pricing.usd_per_million_input.units();
  const __int128 out =
      static_cast<__int128>(usage.output_tokens) * pricing.usd_per_million_output.units();
  return Usd::from_units(static_cast<std::int64_t>(divide_half_even(in + out, 1'000'000)));
}

void PricingTable::set(ModelPricing pricing) {
  if (pricing.usd_per_million_input < Usd{} || pricing.usd_per_million_output < Usd{}) {
    throw ConfigError("negative price for model " + pricing.model_id);
  }
  auto key = pricing.model_id;
  rows_.insert_or_assign(std::move(key), std::move(pricing));
}

const ModelPricing* PricingTable::find(std::string_view model_id) const {
  if (auto it = rows_.find(model_id); it != rows_.end()) return &it->second;
  // Hosted open-weight models are often addressed as "org/model".
  if (auto slash = model_id.rfind('/'); slash != std::string_view::npos) {
    if (auto it = rows_.find(model_id.substr(slash + 1)); it != rows_.end()) return &it->second;
  }
  return nullptr;
}

const ModelPricing& PricingTable::at(std::string_view model_id) const {
  if (const auto* p = find(model_id)) return *p;
  throw UnknownPricing("no pricing for model '" + std::string(model_id) + "'");
}

PricingTable PricingTable::published_rates() {
  PricingTable t;
  const auto add = [&](const char* id, const char* in, const char* out) {
    t.set({id, Usd::parse(in), Usd::parse(out)});
  };
  add("gpt-4o", "2.50", "10.00");
  add("gpt-4o-mini", "0.15", "0.60");
  add("claude-3-5-sonnet-20240620", "3.00", "15.00");
  add("Meta-Llama-3.1-8B-Instruct-Turbo", "0.18", "0.18");
  add("Llama-3.2-3B-Instruct-Turbo", "0.06", "0.06");
  add("Qwen2.5-7B-Instruct-Turbo", "0.30", "0.30");
  return t;
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
  j = {{"role", to_string(m.speaker)}, {"content", m.text}};
}

void to_json(nlohmann::json& j, const ChatExchange& e) {
  j = {{"role", to_string(e.role)},
       {"model", e.model_id},
       {"messages", e.prompt_messages},
       {"response", e.response_text},
       {"input_tokens", e.usage.input_tokens},
       {"output_tokens", e.usage.output_tokens},
       {"retries", e.retries}};
}

}  // namespace plancache
