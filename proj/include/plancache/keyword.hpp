#pragma once

#include <compare>
#include <functional>
#include <string>
#include <string_view>

namespace plancache {

class RunContext;

/// Normalized cache key: lowercase, trimmed, single-spaced, non-empty.
/// The only way to obtain one is through normalize().
class Keyword {
 public:
  const std::string& str() const { return value_; }

  friend bool operator==(const Keyword&, const Keyword&) = default;
  friend auto operator<=>(const Keyword&, const Keyword&) = default;

 private:
  explicit Keyword(std::string v) : value_(std::move(v)) {}
  friend Keyword normalize(std::string_view raw);

  std::string value_;
};

/// ASCII case fold plus whitespace trim/collapse. No stemming, no punctuation
/// handling. Throws EmptyKeyword when nothing is left.
Keyword normalize(std::string_view raw);

/// True when `raw` is already in normal form.
bool is_normalized(std::string_view raw);

/// Builds the keyword-extraction prompt for a query.
std::string keyword_extraction_prompt(std::string_view query);

/// Asks the KeywordExtractor role for the intent keyword of `query` and
/// normalizes the reply. Only the query is sent; never the task context.
Keyword extract_keyword(RunContext& ctx, std::string_view query);

}  // namespace plancache

template <>
struct std::hash<plancache::Keyword> {
  std::size_t operator()(const plancache::Keyword& k) const noexcept {
    return std::hash<std::string>{}(k.str());
  }
};
