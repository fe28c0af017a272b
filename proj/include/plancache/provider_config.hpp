#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "plancache/gateway.hpp"

namespace plancache {

struct ProviderSettings {
  std::string base_url;
  std::string api_key_env;
  std::string chat_path = "/v1/chat/completions";
  std::string embeddings_path = "/v1/embeddings";
};

struct RoleBinding {
  std::string provider;
  std::string model;
};

/// Provider config file: pricing table, API endpoints, key env-var names and
/// role-to-model bindings.
///
///   {
///     "pricing":   [{"model": "gpt-4o", "input_per_million": "2.50",
///                    "output_per_million": "10.00"}],
///     "providers": {"openai": {"base_url": "https://api.openai.com",
///                              "api_key_env": "OPENAI_API_KEY"}},
///     "roles":     {"large_planner": {"provider": "openai", "model": "gpt-4o"}},
///     "embedder":  {"provider": "openai", "model": "text-embedding-3-small"}
///   }
///
/// "pricing" rows extend (and override) the published rate table.
struct GatewayConfig {
  PricingTable pricing = PricingTable::published_rates();
  std::map<std::string, ProviderSettings> providers;
  std::map<ModelRole, RoleBinding> roles;
  std::optional<RoleBinding> embedder;

  /// GPT-4o planner and judge, Llama-3.1-8B small planner and actor,
  /// GPT-4o-mini keyword extraction and template generation.
  static GatewayConfig defaults();
  /// Throws ConfigError.
  static GatewayConfig from_json(const nlohmann::json& doc);
  static GatewayConfig from_file(const std::filesystem::path& path);
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Builds HTTP providers for every bound role. Throws ConfigError when a
/// role references an unknown provider or its key variable is unset.
Gateway make_live_gateway(const GatewayConfig& config, RetryPolicy retry = {},
                          const EnvLookup& env = process_env);

/// Binds every configured role (every role, for the default config) to one
/// scripted provider, keeping the configured model ids for pricing.
Gateway make_scripted_gateway(std::shared_ptr<ScriptedProvider> script,
                              const GatewayConfig& config = GatewayConfig::defaults());

}  // namespace plancache
