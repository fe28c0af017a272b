#include "plancache/keyword.hpp"

#include <cctype>
#include <stdexcept>

#include "plancache/errors.hpp"
#include "plancache/gateway.hpp"

namespace plancache {

Keyword normalize(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += static_cast<char>(std::tolower(c));
  }
  if (out.empty()) throw EmptyKeyword();
  return Keyword(std::move(out));
}

bool is_normalized(std::string_view raw) {
  try {
    return normalize(raw).str() == raw;
  } catch (const EmptyKeyword&) {
    return false;
  }
}

std::string keyword_extraction_prompt(std::string_view query) {
  std::string prompt =
      "Can you help me summarize what is the 'task' or 'keyword' describing the higher-level "
      "goal or intent of this query? Please answer only with the task / keyword, which must be "
      "independent from problem-specific details.\n";
  prompt += query;
  return prompt;
}

Keyword extract_keyword(RunContext& ctx, std::string_view query) {
  if (query.find_first_not_of(" \t\r\n\f\v") == std::string_view::npos) {
    throw std::invalid_argument("cannot extract a keyword from an empty query");
  }
  auto exchange =
      ctx.complete(ModelRole::KeywordExtractor, {{Speaker::User, keyword_extraction_prompt(query)}});
  return normalize(exchange.response_text);
}

}  // namespace plancache
