#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/money.hpp"

namespace plancache {

enum class ModelRole {
  LargePlanner,
  SmallPlanner,
  Actor,
  KeywordExtractor,
  CacheGenerator,
  Judge,
  Embedder,
};

inline constexpr ModelRole kAllRoles[] = {
    ModelRole::LargePlanner,     ModelRole::SmallPlanner,   ModelRole::Actor,
    ModelRole::KeywordExtractor, ModelRole::CacheGenerator, ModelRole::Judge,
    ModelRole::Embedder,
};

/// snake_case names used in config and script files ("large_planner", ...).
std::string_view to_string(ModelRole role);
std::optional<ModelRole> parse_model_role(std::string_view text);

enum class Speaker { System, User, Assistant };

std::string_view to_string(Speaker speaker);

struct ChatMessage {
  Speaker speaker = Speaker::User;
  std::string text;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct TokenUsage {
  std::uint64_t input_tokens = 0;
  std::uint64_t output_tokens = 0;

  TokenUsage& operator+=(const TokenUsage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

/// Defaults: temperature 0, at most 4096 output tokens.
struct GenerationConfig {
  double temperature = 0.0;
  int max_tokens = 4096;
};

struct ChatExchange {
  ModelRole role = ModelRole::Actor;
  std::string model_id;
  std::vector<ChatMessage> prompt_messages;
  std::string response_text;
  TokenUsage usage;
  int retries = 0;
};

struct ModelPricing {
  std::string model_id;
  Usd usd_per_million_input;
  Usd usd_per_million_output;
};

/// input × price_in / 1e6 + output × price_out / 1e6, exact in decimal.
Usd cost_of(const TokenUsage& usage, const ModelPricing& pricing);

class PricingTable {
 public:
  void set(ModelPricing pricing);
  const ModelPricing* find(std::string_view model_id) const;
  /// Throws UnknownPricing.
  const ModelPricing& at(std::string_view model_id) const;
  std::size_t size() const { return rows_.size(); }

  /// Per-million-token API prices for the models used in the evaluation.
  static PricingTable published_rates();

 private:
  std::map<std::string, ModelPricing, std::less<>> rows_;
};

void to_json(nlohmann::json& j, const ChatMessage& m);
void to_json(nlohmann::json& j, const ChatExchange& e);

}  // namespace plancache
