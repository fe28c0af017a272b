#include <stdexcept>

#include "plancache/bench.hpp"
#include "plancache/errors.hpp"

namespace plancache {

std::string judge_prompt(const TaskInstance& task, std::string_view response) {
  std::string prompt = "You are a judge that grades numeric answers to data-intensive reasoning problems.\n";
  prompt += "This is the question: " + task.query + ".\n";
  prompt += "This is the reference answer: " + task.ground_truth.value_or("") + ".\n";
  prompt += "This is the answer given by a language model: ";
  prompt += response;
  prompt +=
      ".\n"
      "Please grade it. Requirements:\n"
      "(1) Please allow minor deviations, such as\n"
      "    (i) giving the answer in billions when the unit was given in the question as millions.\n"
      "    (ii) giving the answer in percentage when the ground truth answer is floating point.\n"
      "    Please also allow small rounding errors or small numerical errors.\n"
      "(2) Incorrect answers vary, from calculations that are off by small margins to several "
      "orders of magnitude, and from making up legal information to giving the wrong direction "
      "for an effect (e.g. reporting negative growth when it is actually positive).\n"
      "(3) Just answer '1' for correct answers, or '0' for incorrect answers.";
  return prompt;
}

std::optional<int> parse_verdict(std::string_view reply) {
  const auto pos = reply.find_first_not_of(" \t\r\n\f\v");
  if (pos == std::string_view::npos) return std::nullopt;
  if (reply[pos] == '1') return 1;
  if (reply[pos] == '0') return 0;
  return std::nullopt;
}

Verdict judge(RunContext& ctx, const TaskInstance& task, std::string_view response) {
  if (!task.ground_truth) {
    throw std::invalid_argument("task '" + task.id + "' has no ground truth to judge against");
  }
  std::vector<ChatMessage> messages{{Speaker::User, judge_prompt(task, response)}};
  Verdict verdict;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto exchange = ctx.complete(ModelRole::Judge, messages);
    if (auto score = parse_verdict(exchange.response_text)) {
      verdict.score = *score;
      return verdict;
    }
    if (attempt == 0) {
      ++verdict.retries;
      messages.push_back({Speaker::Assistant, exchange.response_text});
      messages.push_back({Speaker::User, "Answer with a single character: '1' or '0'."});
    }
  }
  verdict.score = 0;
  verdict.flagged = true;
  return verdict;
}

}  // namespace plancache
