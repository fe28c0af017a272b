#include "plancache/provider_config.hpp"

#include <cstdlib>
#include <fstream>

#include "plancache/errors.hpp"

namespace plancache {

GatewayConfig GatewayConfig::defaults() {
  GatewayConfig c;
  c.providers["openai"] = {"https://api.openai.com", "OPENAI_API_KEY"};
  c.providers["together"] = {"https://api.together.xyz", "TOGETHER_API_KEY"};
  const std::string llama = "meta-llama/Meta-Llama-3.1-8B-Instruct-Turbo";
  c.roles[ModelRole::LargePlanner] = {"openai", "gpt-4o"};
  c.roles[ModelRole::SmallPlanner] = {"together", llama};
  c.roles[ModelRole::Actor] = {"together", llama};
  c.roles[ModelRole::KeywordExtractor] = {"openai", "gpt-4o-mini"};
  c.roles[ModelRole::CacheGenerator] = {"openai", "gpt-4o-mini"};
  c.roles[ModelRole::Judge] = {"openai", "gpt-4o"};
  return c;
}

namespace {

std::string price_text(const nlohmann::json& v, const std::string& what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ConfigError(what + " must be a decimal string or number");
}

RoleBinding parse_binding(const nlohmann::json& v, const std::string& where) {
  if (!v.is_object() || !v.contains("provider") || !v.contains("model")) {
    throw ConfigError(where + " needs \"provider\" and \"model\"");
  }
  return {v["provider"].get<std::string>(), v["model"].get<std::string>()};
}

}  // namespace

GatewayConfig GatewayConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("provider config must be a JSON object");
  GatewayConfig c = defaults();
  try {
    if (doc.contains("pricing")) {
      for (const auto& row : doc["pricing"]) {
        const auto model = row.at("model").get<std::string>();
        try {
          c.pricing.set({model, Usd::parse(price_text(row.at("input_per_million"), model)),
                         Usd::parse(price_text(row.at("output_per_million"), model))});
        } catch (const std::invalid_argument& e) {
          throw ConfigError("bad price for " + model + ": " + e.what());
        }
      }
    }
    if (doc.contains("providers")) {
      for (const auto& [name, p] : doc["providers"].items()) {
        ProviderSettings s;
        s.base_url = p.at("base_url").get<std::string>();
        s.api_key_env = p.value("api_key_env", "");
        s.chat_path = p.value("chat_path", s.chat_path);
        s.embeddings_path = p.value("embeddings_path", s.embeddings_path);
        c.providers[name] = std::move(s);
      }
    }
    if (doc.contains("roles")) {
      for (const auto& [name, b] : doc["roles"].items()) {
        const auto role = parse_model_role(name);
        if (!role) throw ConfigError("unknown role '" + name + "' in provider config");
        if (*role == ModelRole::Embedder) {
          c.embedder = parse_binding(b, "roles.embedder");
        } else {
          c.roles[*role] = parse_binding(b, "roles." + name);
        }
      }
    }
    if (doc.contains("embedder")) c.embedder = parse_binding(doc["embedder"], "embedder");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed provider config: ") + e.what());
  }
  return c;
}

GatewayConfig GatewayConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open provider config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("provider config " + path.string() + " is not valid JSON: " + e.what());
  }
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str()); v != nullptr && *v != '\0') return std::string(v);
  return std::nullopt;
}

Gateway make_live_gateway(const GatewayConfig& config, RetryPolicy retry, const EnvLookup& env) {
  Gateway gw(config.pricing);
  std::map<std::string, std::shared_ptr<OpenAiCompatibleProvider>> built;

  const auto settings_for = [&](const std::string& name) -> const ProviderSettings& {
    auto it = config.providers.find(name);
    if (it == config.providers.end()) throw ConfigError("unknown provider '" + name + "'");
    return it->second;
  };
  const auto key_for = [&](const ProviderSettings& s) {
    if (s.api_key_env.empty()) return std::string();
    auto key = env(s.api_key_env);
    if (!key) throw ConfigError("environment variable " + s.api_key_env + " is not set");
    return *key;
  };

  for (const auto& [role, binding] : config.roles) {
    auto& provider = built[binding.provider];
    if (!provider) {
      const auto& s = settings_for(binding.provider);
      provider = std::make_shared<OpenAiCompatibleProvider>(
          std::make_shared<HttplibTransport>(s.base_url), key_for(s), retry, s.chat_path);
    }
    gw.bind(role, binding.model, provider);
  }
  if (config.embedder) {
    const auto& s = settings_for(config.embedder->provider);
    gw.set_embedder(std::make_shared<OpenAiCompatibleEmbedder>(
        std::make_shared<HttplibTransport>(s.base_url), key_for(s), config.embedder->model, retry,
        s.embeddings_path));
  }
  return gw;
}

Gateway make_scripted_gateway(std::shared_ptr<ScriptedProvider> script,
                              const GatewayConfig& config) {
  Gateway gw(config.pricing);
  for (const auto& [role, binding] : config.roles) gw.bind(role, binding.model, script);
  return gw;
}

}  // namespace plancache
