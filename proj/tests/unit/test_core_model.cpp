#include <doctest.h>

#include <regex>

#include "plancache/model.hpp"

using namespace plancache;
using K = WorkflowKind;

namespace {

bool valid(std::initializer_list<K> kinds) {
  std::vector<K> v(kinds);
  return validate_workflow(std::span<const K>(v));
}

// Independent oracle: the kind sequence spelled as letters against M(OM)*OA.
bool regex_oracle(const std::vector<K>& kinds) {
  static const std::regex grammar("^M(OM)*OA$");
  std::string s;
  for (auto k : kinds) s += k == K::Message ? 'M' : k == K::Output ? 'O' : 'A';
  return std::regex_match(s, grammar);
}

}  // namespace

TEST_CASE("validate_workflow examples") {
  CHECK(valid({K::Message, K::Output, K::Answer}));
  CHECK_FALSE(valid({}));
  CHECK(valid({K::Message, K::Output, K::Message, K::Output, K::Answer}));
  CHECK_FALSE(valid({K::Answer}));
  CHECK_FALSE(valid({K::Message, K::Answer}));
  CHECK_FALSE(valid({K::Message, K::Output, K::Output, K::Answer}));
  CHECK_FALSE(valid({K::Message, K::Output, K::Answer, K::Output, K::Answer}));
  CHECK_FALSE(valid({K::Message, K::Output, K::Message}));
}

TEST_CASE("validate_workflow agrees with the regex oracle up to length 7") {
  std::size_t accepted = 0;
  for (std::size_t len = 0; len <= 7; ++len) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < len; ++i) total *= 3;
    for (std::size_t code = 0; code < total; ++code) {
      std::vector<K> seq;
      for (std::size_t i = 0, c = code; i < len; ++i, c /= 3) seq.push_back(static_cast<K>(c % 3));
      const bool got = validate_workflow(std::span<const K>(seq));
      REQUIRE(got == regex_oracle(seq));
      accepted += got;
    }
  }
  // Accepted lengths are 3, 5 and 7: exactly one sequence each.
  CHECK(accepted == 3);
}

TEST_CASE("workflow kinds round-trip through their names") {
  for (auto k : {K::Message, K::Output, K::Answer}) CHECK(parse_workflow_kind(to_string(k)) == k);
  CHECK(to_string(K::Message) == "message");
  CHECK_FALSE(parse_workflow_kind("plan").has_value());
  CHECK_FALSE(parse_workflow_kind("Message").has_value());
}

TEST_CASE("template_problem checks shape and contents") {
  PlanTemplate t{"summary", {{K::Message, "ask"}, {K::Output, "figures"}, {K::Answer, "divide"}}};
  CHECK_FALSE(template_problem(t).has_value());
  CHECK(t.message_count() == 1);
  CHECK(t.message_at(0).content == "ask");
  CHECK(t.expected_output_after(0) == "figures");
  CHECK(t.answer().content == "divide");

  auto empty_item = t;
  empty_item.workflow[1].content.clear();
  CHECK(template_problem(empty_item).has_value());

  PlanTemplate bad{"summary", {{K::Answer, "x"}}};
  CHECK(template_problem(bad).has_value());
}

TEST_CASE("leakage check looks for the raw query and context") {
  TaskInstance task{"t", "What is the ratio for Costco?", "Total current assets 23,485", "1.01"};
  PlanTemplate t{"Compute a ratio", {{K::Message, "ask"}, {K::Output, "figures"}, {K::Answer, "divide"}}};
  CHECK_FALSE(leaks_task_details(t, task));

  auto same_query = t;
  same_query.workflow[0].content = task.query;
  CHECK(leaks_task_details(same_query, task));

  auto has_context = t;
  has_context.workflow[1].content = "Expect: Total current assets 23,485 and more";
  CHECK(leaks_task_details(has_context, task));

  TaskInstance no_context{"t", "q", "", std::nullopt};
  CHECK_FALSE(leaks_task_details(t, no_context));
}

TEST_CASE("task query must have content") {
  CHECK(TaskInstance{"a", "q", "", std::nullopt}.has_query());
  CHECK_FALSE(TaskInstance{"a", " \t\n", "", std::nullopt}.has_query());
  CHECK_FALSE(TaskInstance{"a", "", "ctx", std::nullopt}.has_query());
}

TEST_CASE("templates and logs round-trip through JSON") {
  PlanTemplate t{"summary", {{K::Message, "ask"}, {K::Output, "figures"}, {K::Answer, "divide"}}};
  nlohmann::json j = t;
  CHECK(j["workflow"][0]["kind"] == "message");
  CHECK(j.get<PlanTemplate>() == t);

  ExecutionLog log;
  log.query = "q";
  log.entries = {{"plan", "response"}};
  log.planner_reasoning = {"think"};
  log.final_output = "42";
  nlohmann::json lj = log;
  CHECK(lj.get<ExecutionLog>() == log);
  CHECK(log.iterations_used() == 1);

  ExecutionLog open;
  open.query = "q";
  nlohmann::json oj = open;
  CHECK_FALSE(oj.get<ExecutionLog>().final_output.has_value());
}

TEST_CASE("unknown workflow kinds are rejected when parsing JSON") {
  auto j = nlohmann::json::parse(R"({"task_summary": "s", "workflow": [{"kind": "plan", "content": "x"}]})");
  CHECK_THROWS(j.get<PlanTemplate>());
}
