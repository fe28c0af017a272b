#include "plancache/gateway.hpp"

#include <fstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "plancache/errors.hpp"

namespace plancache {

std::uint64_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

// ---------------------------------------------------------------------------
// ScriptedProvider

void ScriptedProvider::push(ModelRole role, Step step) {
  std::lock_guard lock(mutex_);
  queues_[role].push_back(std::move(step));
}

ProviderReply ScriptedProvider::complete(const ProviderRequest& request) {
  Step step;
  {
    std::lock_guard lock(mutex_);
    auto& queue = queues_[request.role];
    ++calls_[request.role];
    if (queue.empty()) {
      throw ScriptExhausted("script has no response left for role '" +
                            std::string(to_string(request.role)) + "'");
    }
    step = std::move(queue.front());
    queue.pop_front();
  }
  if (step.error) throw ProviderError(*step.error, 500, true);

  ProviderReply reply;
  reply.text = std::move(step.text);
  if (step.input_tokens) {
    reply.usage.input_tokens = *step.input_tokens;
  } else {
    std::uint64_t total = 0;
    for (const auto& m : request.messages) total += estimate_tokens(m.text);
    reply.usage.input_tokens = total;
  }
  reply.usage.output_tokens = step.output_tokens.value_or(estimate_tokens(reply.text));
  return reply;
}

std::size_t ScriptedProvider::remaining(ModelRole role) const {
  std::lock_guard lock(mutex_);
  auto it = queues_.find(role);
  return it == queues_.end() ? 0 : it->second.size();
}

std::size_t ScriptedProvider::calls(ModelRole role) const {
  std::lock_guard lock(mutex_);
  auto it = calls_.find(role);
  return it == calls_.end() ? 0 : it->second;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_json(const nlohmann::json& doc) {
  auto provider = std::make_shared<ScriptedProvider>();
  if (!doc.is_object() || !doc.contains("roles") || !doc["roles"].is_object()) {
    throw ConfigError("script must be an object with a \"roles\" object");
  }
  for (const auto& [name, steps] : doc["roles"].items()) {
    const auto role = parse_model_role(name);
    if (!role) throw ConfigError("script names unknown role '" + name + "'");
    if (!steps.is_array()) throw ConfigError("script role '" + name + "' is not an array");
    for (const auto& s : steps) {
      Step step;
      if (s.is_string()) {
        step.text = s.get<std::string>();
      } else if (s.is_object()) {
        step.text = s.value("text", "");
        if (s.contains("input_tokens")) step.input_tokens = s["input_tokens"].get<std::uint64_t>();
        if (s.contains("output_tokens")) step.output_tokens = s["output_tokens"].get<std::uint64_t>();
        if (s.contains("error")) step.error = s["error"].get<std::string>();
      } else {
        throw ConfigError("script step for '" + name + "' must be a string or object");
      }
      provider->push(*role, std::move(step));
    }
  }
  return provider;
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open script " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("script " + path.string() + " is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Retry

bool RetryPolicy::is_transient(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

std::chrono::milliseconds RetryPolicy::backoff(int retry_index) const {
  double ms = static_cast<double>(initial_backoff.count());
  for (int i = 0; i < retry_index; ++i) ms *= multiplier;
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

namespace {

struct PostResult {
  HttpResponse response;
  int retries = 0;
};

PostResult post_with_retry(HttpTransport& transport, const RetryPolicy& retry,
                           const std::string& path,
                           const std::vector<std::pair<std::string, std::string>>& headers,
                           const std::string& body) {
  const int attempts = std::max(1, retry.max_attempts);
  HttpResponse last;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    last = transport.post(path, headers, body);
    if (last.status >= 200 && last.status < 300) return {std::move(last), attempt};
    const bool transient = RetryPolicy::is_transient(last.status);
    if (!transient || attempt + 1 == attempts) {
      const std::string detail = last.status == 0 ? last.error : last.body;
      throw ProviderError("HTTP " + std::to_string(last.status) + " from " + path + ": " + detail,
                          last.status, transient);
    }
    const auto delay = retry.backoff(attempt);
    spdlog::debug("transient failure (status {}), retrying in {} ms", last.status, delay.count());
    if (retry.sleep) {
      retry.sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
  throw ProviderError("retry loop exhausted", last.status, true);
}

std::vector<std::pair<std::string, std::string>> auth_headers(const std::string& key) {
  std::vector<std::pair<std::string, std::string>> h{{"Content-Type", "application/json"}};
  if (!key.empty()) h.emplace_back("Authorization", "Bearer " + key);
  return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// OpenAI-compatible chat

OpenAiCompatibleProvider::OpenAiCompatibleProvider(std::shared_ptr<HttpTransport> transport,
                                                   std::string api_key, RetryPolicy retry,
                                                   std::string path)
    : transport_(std::move(transport)),
      api_key_(std::move(api_key)),
      retry_(std::move(retry)),
      path_(std::move(path)) {}

nlohmann::json OpenAiCompatibleProvider::build_request(const ProviderRequest& request) {
  auto messages = nlohmann::json::array();
  for (const auto& m : request.messages) messages.push_back(m);
  return {{"model", request.model_id},
          {"messages", std::move(messages)},
          {"temperature", request.config.temperature},
          {"max_tokens", request.config.max_tokens}};
}

ProviderReply OpenAiCompatibleProvider::parse_response(const std::string& body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("unparseable completion body: ") + e.what(), 200);
  }
  const auto* content = [&]() -> const nlohmann::json* {
    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) return nullptr;
    const auto& choice = doc["choices"][0];
    if (!choice.contains("message") || !choice["message"].contains("content")) return nullptr;
    return &choice["message"]["content"];
  }();
  if (content == nullptr || !content->is_string()) {
    throw ProviderError("completion body has no choices[0].message.content", 200);
  }
  ProviderReply reply;
  reply.text = content->get<std::string>();
  if (doc.contains("usage") && doc["usage"].is_object()) {
    reply.usage.input_tokens = doc["usage"].value("prompt_tokens", std::uint64_t{0});
    reply.usage.output_tokens = doc["usage"].value("completion_tokens", std::uint64_t{0});
  }
  return reply;
}

ProviderReply OpenAiCompatibleProvider::complete(const ProviderRequest& request) {
  const auto body = build_request(request).dump();
  auto result = post_with_retry(*transport_, retry_, path_, auth_headers(api_key_), body);
  auto reply = parse_response(result.response.body);
  reply.retries = result.retries;
  return reply;
}

// ---------------------------------------------------------------------------
// OpenAI-compatible embeddings

OpenAiCompatibleEmbedder::OpenAiCompatibleEmbedder(std::shared_ptr<HttpTransport> transport,
                                                   std::string api_key, std::string model,
                                                   RetryPolicy retry, std::string path)
    : transport_(std::move(transport)),
      api_key_(std::move(api_key)),
      model_(std::move(model)),
      retry_(std::move(retry)),
      path_(std::move(path)) {}

Embedding OpenAiCompatibleEmbedder::embed(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("cannot embed empty text");
  const nlohmann::json request = {{"model", model_}, {"input", std::string(text)}};
  auto result = post_with_retry(*transport_, retry_, path_, auth_headers(api_key_), request.dump());
  try {
    const auto doc = nlohmann::json::parse(result.response.body);
    return Embedding::from_dense(doc.at("data").at(0).at("embedding").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed embedding body: ") + e.what(), 200);
  }
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(PricingTable pricing)
    : pricing_(std::move(pricing)), embedder_(std::make_shared<BagOfWordsEmbedder>()) {}

void Gateway::bind(ModelRole role, std::string model_id, std::shared_ptr<ChatProvider> provider) {
  if (!provider) throw ConfigError("null provider for role " + std::string(to_string(role)));
  bindings_[role] = Binding{std::move(model_id), std::move(provider)};
}

bool Gateway::is_bound(ModelRole role) const { return bindings_.contains(role); }

const std::string& Gateway::model_for(ModelRole role) const {
  auto it = bindings_.find(role);
  if (it == bindings_.end()) {
    throw ConfigError("no model bound for role '" + std::string(to_string(role)) + "'");
  }
  return it->second.model_id;
}

ChatExchange Gateway::complete(ModelRole role, std::vector<ChatMessage> messages,
                               const GenerationConfig& config, std::string_view run_id) {
  auto it = bindings_.find(role);
  if (it == bindings_.end()) {
    throw ConfigError("no model bound for role '" + std::string(to_string(role)) + "'");
  }
  const auto& binding = it->second;
  ProviderRequest request{role, binding.model_id, messages, config};
  auto reply = binding.provider->complete(request);

  ChatExchange exchange;
  exchange.role = role;
  exchange.model_id = binding.model_id;
  exchange.prompt_messages = std::move(messages);
  exchange.response_text = std::move(reply.text);
  exchange.usage = reply.usage;
  exchange.retries = reply.retries;
  if (ledger_ != nullptr) ledger_->record(std::string(run_id), component_for(role), exchange);
  return exchange;
}

Embedding Gateway::embed(std::string_view text) { return embedder_->embed(text); }

// ---------------------------------------------------------------------------
// RunContext

RunContext::RunContext(Gateway& gateway, std::string run_id)
    : gateway_(gateway), run_id_(std::move(run_id)) {}

ChatExchange RunContext::complete(ModelRole role, std::vector<ChatMessage> messages,
                                  const GenerationConfig& config) {
  auto exchange = gateway_.complete(role, std::move(messages), config, run_id_);
  const auto& price = gateway_.pricing().at(exchange.model_id);
  rows_.push_back(LedgerRow{run_id_, component_for(role), exchange.model_id, exchange.usage,
                            cost_of(exchange.usage, price)});
  transcript_.push_back(exchange);
  return exchange;
}

std::size_t RunContext::calls(ModelRole role) const {
  return static_cast<std::size_t>(std::count_if(
      transcript_.begin(), transcript_.end(), [&](const ChatExchange& e) { return e.role == role; }));
}

std::uint64_t RunContext::prompt_tokens() const {
  std::uint64_t total = 0;
  for (const auto& e : transcript_) total += e.usage.input_tokens;
  return total;
}

}  // namespace plancache
