#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "plancache/chat.hpp"
#include "plancache/embedding.hpp"
#include "plancache/ledger.hpp"

namespace plancache {

struct ProviderRequest {
  ModelRole role = ModelRole::Actor;
  std::string model_id;
  std::span<const ChatMessage> messages;
  GenerationConfig config;
};

struct ProviderReply {
  std::string text;
  TokenUsage usage;
  int retries = 0;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ProviderReply complete(const ProviderRequest& request) = 0;
};

/// Rough token count used when a script does not pin usage: ceil(bytes / 4).
std::uint64_t estimate_tokens(std::string_view text);

/// Deterministic provider that replays per-role response queues.
///
/// Token usage comes from the script when given; otherwise it is estimated
/// from the prompt and response text so prompt-size comparisons stay
/// meaningful. A step may carry `error` to simulate a provider failure.
class ScriptedProvider final : public ChatProvider {
 public:
  struct Step {
    std::string text;
    std::optional<std::uint64_t> input_tokens;
    std::optional<std::uint64_t> output_tokens;
    std::optional<std::string> error;
  };

  void push(ModelRole role, Step step);
  void push(ModelRole role, std::string text) { push(role, Step{std::move(text), {}, {}, {}}); }

  ProviderReply complete(const ProviderRequest& request) override;

  std::size_t remaining(ModelRole role) const;
  std::size_t calls(ModelRole role) const;

  /// {"roles": {"keyword_extractor": ["text" | {"text", "input_tokens",
  /// "output_tokens", "error"}...], ...}}. Throws ConfigError.
  static std::shared_ptr<ScriptedProvider> from_json(const nlohmann::json& doc);
  static std::shared_ptr<ScriptedProvider> from_file(const std::filesystem::path& path);

 private:
  mutable std::mutex mutex_;
  std::map<ModelRole, std::deque<Step>> queues_;
  std::map<ModelRole, std::size_t> calls_;
};

struct HttpResponse {
  int status = 0;  ///< 0 when the request never reached the server.
  std::string body;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse post(const std::string& path,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) = 0;
};

/// cpp-httplib backed transport; a fresh client per request.
class HttplibTransport final : public HttpTransport {
 public:
  explicit HttplibTransport(std::string base_url,
                            std::chrono::seconds timeout = std::chrono::seconds(120));
  HttpResponse post(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& headers,
                    const std::string& body) override;

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

/// Up to max_attempts tries with exponential backoff. Network errors, 408,
/// 429 and 5xx are retried; other 4xx fail immediately.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep;

  static bool is_transient(int status);
  std::chrono::milliseconds backoff(int retry_index) const;
};

/// OpenAI-compatible /chat/completions client.
class OpenAiCompatibleProvider final : public ChatProvider {
 public:
  OpenAiCompatibleProvider(std::shared_ptr<HttpTransport> transport, std::string api_key,
                           RetryPolicy retry = {}, std::string path = "/v1/chat/completions");

  ProviderReply complete(const ProviderRequest& request) override;

  static nlohmann::json build_request(const ProviderRequest& request);
  /// Throws ProviderError when the body lacks choices[0].message.content.
  static ProviderReply parse_response(const std::string& body);

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
  RetryPolicy retry_;
  std::string path_;
};

/// OpenAI-compatible /embeddings client.
class OpenAiCompatibleEmbedder final : public Embedder {
 public:
  OpenAiCompatibleEmbedder(std::shared_ptr<HttpTransport> transport, std::string api_key,
                           std::string model, RetryPolicy retry = {},
                           std::string path = "/v1/embeddings");
  Embedding embed(std::string_view text) override;

 private:
  std::shared_ptr<HttpTransport> transport_;
  std::string api_key_;
  std::string model_;
  RetryPolicy retry_;
  std::string path_;
};

/// Role-to-model routing over pluggable providers, with optional ledger.
///
/// Bind every role before use. When a ledger is attached, each complete()
/// appends exactly one row.
class Gateway {
 public:
  explicit Gateway(PricingTable pricing);

  void bind(ModelRole role, std::string model_id, std::shared_ptr<ChatProvider> provider);
  bool is_bound(ModelRole role) const;
  const std::string& model_for(ModelRole role) const;

  void set_embedder(std::shared_ptr<Embedder> embedder) { embedder_ = std::move(embedder); }
  void attach_ledger(CostLedger* ledger) { ledger_ = ledger; }
  CostLedger* ledger() const { return ledger_; }
  const PricingTable& pricing() const { return pricing_; }

  /// Throws ConfigError for unbound roles, ProviderError / ScriptExhausted
  /// from the provider.
  ChatExchange complete(ModelRole role, std::vector<ChatMessage> messages,
                        const GenerationConfig& config = {}, std::string_view run_id = {});

  Embedding embed(std::string_view text);

 private:
  struct Binding {
    std::string model_id;
    std::shared_ptr<ChatProvider> provider;
  };

  PricingTable pricing_;
  std::map<ModelRole, Binding> bindings_;
  std::shared_ptr<Embedder> embedder_;
  CostLedger* ledger_ = nullptr;
};

/// Per-run view over a gateway: tags calls with the run id and keeps the
/// run's own ledger slice and transcript.
class RunContext {
 public:
  RunContext(Gateway& gateway, std::string run_id);

  ChatExchange complete(ModelRole role, std::vector<ChatMessage> messages,
                        const GenerationConfig& config = {});
  Embedding embed(std::string_view text) { return gateway_.embed(text); }

  const std::string& run_id() const { return run_id_; }
  std::span<const LedgerRow> fragment() const { return rows_; }
  std::span<const ChatExchange> transcript() const { return transcript_; }
  std::size_t calls(ModelRole role) const;
  std::size_t total_calls() const { return transcript_.size(); }
  /// Sum of input tokens over every call made through this context.
  std::uint64_t prompt_tokens() const;
  Gateway& gateway() { return gateway_; }

 private:
  Gateway& gateway_;
  std::string run_id_;
  std::vector<LedgerRow> rows_;
  std::vector<ChatExchange> transcript_;
};

}  // namespace plancache
