#include "fixtures.hpp"

#include <nlohmann/json.hpp>

namespace plancache::testing {

std::string planner_plan(const std::string& reasoning, const std::string& message) {
  return nlohmann::json{{"reasoning", reasoning},
                        {"decision", "request_additional_info"},
                        {"message", message}}
      .dump();
}

std::string planner_answer(const std::string& reasoning, const std::string& answer) {
  return nlohmann::json{{"reasoning", reasoning},
                        {"decision", "provide_final_answer"},
                        {"answer", answer}}
      .dump();
}

std::string adaptation_plan(const std::string& message) {
  return nlohmann::json{{"reasoning", "N/A"}, {"message", message}}.dump();
}

std::string adaptation_answer(const std::string& reasoning, const std::string& answer) {
  return nlohmann::json{{"reasoning", reasoning}, {"answer", answer}}.dump();
}

std::string generator_reply(const PlanTemplate& tmpl) {
  auto workflow = nlohmann::json::array();
  for (const auto& item : tmpl.workflow) workflow.push_back({to_string(item.kind), item.content});
  return nlohmann::json{{"task", tmpl.task_summary}, {"workflow", std::move(workflow)}}.dump();
}

PlanTemplate make_template(const std::string& summary, std::size_t messages) {
  PlanTemplate t;
  t.task_summary = summary;
  for (std::size_t i = 0; i < messages; ++i) {
    t.workflow.push_back({WorkflowKind::Message, "Ask for figure group " + std::to_string(i + 1) + "."});
    t.workflow.push_back({WorkflowKind::Output, "Figure group " + std::to_string(i + 1) + "."});
  }
  t.workflow.push_back({WorkflowKind::Answer, "Combine the gathered figures into the requested metric."});
  return t;
}

// ---------------------------------------------------------------------------
// Working capital ratio scenario

TaskInstance costco_task() {
  return {"costco-fy2019",
          "What is FY2019 working capital ratio for Costco? Define working capital ratio as total "
          "current assets divided by total current liabilities. Round your answer to two decimal "
          "places. Give a response to the question by relying on the details shown in the "
          "statement of financial position.",
          "COSTCO WHOLESALE CORPORATION\nCONSOLIDATED BALANCE SHEETS (amounts in millions)\n"
          "September 1, 2019\nCash and cash equivalents 8,384\nShort-term investments 1,060\n"
          "Receivables, net 1,535\nMerchandise inventories 11,395\nOther current assets 1,111\n"
          "Total current assets 23,485\nAccounts payable 11,679\nAccrued salaries and benefits "
          "3,176\nOther current liabilities 8,382\nTotal current liabilities 23,237\n",
          "1.01"};
}

TaskInstance bestbuy_task() {
  return {"bestbuy-fy2021",
          "What is FY2021 working capital ratio for Best Buy? Define working capital ratio as "
          "total current assets divided by total current liabilities. Round your answer to two "
          "decimal places. Please base your judgments on the information provided primarily in "
          "the statement of financial position.",
          "BEST BUY CO., INC.\nCONSOLIDATED BALANCE SHEETS ($ in millions)\nJanuary 30, 2021\n"
          "Cash and cash equivalents 5,494\nReceivables, net 1,061\nMerchandise inventories "
          "5,612\nOther current assets 373\nTotal current assets 12,540\nAccounts payable 6,979\n"
          "Unredeemed gift card liabilities 317\nAccrued liabilities 3,225\nTotal current "
          "liabilities 10,521\n",
          "1.19"};
}

PlanTemplate working_capital_template() {
  return {"Calculate the working capital ratio of a company for a fiscal year from its statement "
          "of financial position, rounded to two decimal places.",
          {{WorkflowKind::Message,
            "Retrieve total current assets and total current liabilities from the statement of "
            "financial position."},
           {WorkflowKind::Output, "Total current assets and total current liabilities."},
           {WorkflowKind::Answer,
            "The working capital ratio can be determined by: Working Capital Ratio = Total Current "
            "Assets / Total Current Liabilities."}}};
}

namespace {

const char* kCostcoPlan =
    "Please provide the total current assets and total current liabilities for Costco for FY2019 "
    "from the statement of financial position.";
const char* kCostcoActor =
    "Based on the provided statement of financial position for Costco Wholesale Corporation as of "
    "September 1, 2019:\n- Total current assets: $23,485 million\n- Total current liabilities: "
    "$23,237 million";
const char* kBestBuyPlan =
    "Please provide the total current assets and total current liabilities for Best Buy in FY2021 "
    "from the statement of financial position, so I can calculate the working capital ratio.";
const char* kBestBuyActor =
    "According to the Consolidated Balance Sheets, total current assets for Best Buy in FY2021 are "
    "$12,540 million and total current liabilities are $10,521 million.";

}  // namespace

void script_costco_miss(ScriptedProvider& s) {
  s.push(ModelRole::KeywordExtractor, "Working Capital Ratio");
  s.push(ModelRole::LargePlanner,
         planner_plan("The ratio needs two balance sheet figures for FY2019: total current assets "
                      "(the numerator) and total current liabilities (the denominator). I cannot "
                      "see the statement, so I will ask for both in one message, then divide and "
                      "round to two decimals.",
                      kCostcoPlan));
  s.push(ModelRole::Actor, kCostcoActor);
  s.push(ModelRole::LargePlanner,
         planner_answer("Both figures are available: current assets $23,485 million and current "
                        "liabilities $23,237 million. Working capital ratio = 23,485 / 23,237 = "
                        "1.0107, which rounds to 1.01. No further information is needed.",
                        "1.01"));
}

void script_costco_generation(ScriptedProvider& s) {
  s.push(ModelRole::CacheGenerator, generator_reply(working_capital_template()));
}

void script_bestbuy_hit(ScriptedProvider& s) {
  s.push(ModelRole::KeywordExtractor, "working capital ratio");
  s.push(ModelRole::SmallPlanner, adaptation_plan(kBestBuyPlan));
  s.push(ModelRole::Actor, kBestBuyActor);
  s.push(ModelRole::SmallPlanner,
         adaptation_answer("Working capital ratio = 12,540 / 10,521 = 1.19 (two decimals).", "1.19"));
}

void script_bestbuy_full_history_hit(ScriptedProvider& s) {
  s.push(ModelRole::KeywordExtractor, "working capital ratio");
  s.push(ModelRole::SmallPlanner,
         planner_plan("Following the example, ask for the two balance sheet totals.", kBestBuyPlan));
  s.push(ModelRole::Actor, kBestBuyActor);
  s.push(ModelRole::SmallPlanner,
         planner_answer("12,540 / 10,521 = 1.19 when rounded to two decimals.", "1.19"));
}

// ---------------------------------------------------------------------------
// Synthetic workload

TokenProfile TokenProfile::finance_like() {
  TokenProfile p;
  p.keyword = Pin{100, 17};
  p.generator = Pin{1000, 154};
  p.large_plan = Pin{2300, 340};
  p.large_answer = Pin{2300, 340};
  p.small_plan = Pin{800, 60};
  p.small_answer = Pin{800, 60};
  p.actor = Pin{9000, 70};
  return p;
}

namespace {

struct KeywordClass {
  const char* keyword;
  const char* summary;
  const char* question;  // {c} company, {y} year
};

const KeywordClass kClasses[] = {
    {"working capital ratio", "Compute a company's working capital ratio for a fiscal year.",
     "What is the FY{y} working capital ratio for {c}? Round to two decimal places."},
    {"mean calculation", "Compute the average of all numbers listed in a document.",
     "Compute the average of all numbers listed in the {c} FY{y} store count table."},
    {"revenue growth rate", "Compute year-over-year revenue growth for a company.",
     "By what percentage did {c} revenue grow in FY{y} compared with the prior year?"},
    {"gross margin", "Compute a company's gross margin for a fiscal year.",
     "What was the gross margin of {c} in FY{y}, as a percentage of net sales?"},
    {"quick ratio", "Compute a company's quick ratio for a fiscal year.",
     "Using the balance sheet, what is the FY{y} quick ratio for {c}?"},
};

const char* kCompanies[] = {"Costco", "Best Buy", "Walmart", "Target", "Kroger",
                            "Home Depot", "Lowe's", "Nike", "PepsiCo", "3M"};

std::string fill(std::string text, const std::string& company, int year) {
  auto replace = [&text](const std::string& from, const std::string& to) {
    for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
      text.replace(pos, from.size(), to);
    }
  };
  replace("{c}", company);
  replace("{y}", std::to_string(year));
  return text;
}

ScriptedProvider::Step step(std::string text, const std::optional<TokenProfile::Pin>& pin) {
  ScriptedProvider::Step s{std::move(text), {}, {}, {}};
  if (pin) {
    s.input_tokens = pin->in;
    s.output_tokens = pin->out;
  }
  return s;
}

}  // namespace

Workload synthetic_workload() {
  static constexpr int kOrder[20] = {0, 0, 1, 2, 1, 3, 0, 4, 2, 3, 4, 1, 0, 2, 3, 4, 1, 2, 3, 4};
  Workload w;
  std::vector<bool> seen(std::size(kClasses), false);
  for (int i = 0; i < 20; ++i) {
    const auto& cls = kClasses[kOrder[i]];
    const std::string company = kCompanies[(i * 3) % std::size(kCompanies)];
    const int year = 2015 + (i % 7);
    TaskInstance t;
    t.id = "w" + std::to_string(i + 1);
    t.query = fill(cls.question, company, year);
    t.context = company + " FY" + std::to_string(year) + " filing excerpt: figure A " +
                std::to_string(1000 + 37 * i) + ", figure B " + std::to_string(800 + 11 * i) + ".";
    t.ground_truth = "answer-" + std::to_string(i + 1);
    w.tasks.push_back(std::move(t));
    w.keyword_of.push_back(cls.keyword);
    w.repeat.push_back(seen[kOrder[i]]);
    seen[kOrder[i]] = true;
  }
  return w;
}

void script_workload(ScriptedProvider& s, const Workload& w, StrategyKind kind,
                     const std::vector<bool>& hits, const TokenProfile& tok, bool judge) {
  for (std::size_t i = 0; i < w.tasks.size(); ++i) {
    const auto& task = w.tasks[i];
    const std::string answer = *task.ground_truth;
    const std::string plan = "Please report figure A and figure B for task " + task.id + ".";
    const std::string actor = "Figure A and figure B are listed in the excerpt for " + task.id + ".";
    const bool hit = uses_cache(kind) && hits.at(i);

    const bool keyword = kind == StrategyKind::PlanCache || kind == StrategyKind::FullHistoryCache;
    if (keyword) s.push(ModelRole::KeywordExtractor, step(w.keyword_of[i], tok.keyword));

    const bool small = kind == StrategyKind::CostOptimal ||
                       (hit && kind == StrategyKind::FullHistoryCache);
    if (kind == StrategyKind::PlanCache && hit) {
      s.push(ModelRole::SmallPlanner, step(adaptation_plan(plan), tok.small_plan));
      s.push(ModelRole::Actor, step(actor, tok.actor));
      s.push(ModelRole::SmallPlanner,
             step(adaptation_answer("Combine the figures.", answer), tok.small_answer));
    } else if (kind == StrategyKind::SemanticCache && hit) {
      // Served from the answer cache: no model calls.
    } else if (small) {
      s.push(ModelRole::SmallPlanner, step(planner_plan("Need both figures.", plan), tok.small_plan));
      s.push(ModelRole::Actor, step(actor, tok.actor));
      s.push(ModelRole::SmallPlanner,
             step(planner_answer("Combine the figures.", answer), tok.small_answer));
    } else {
      s.push(ModelRole::LargePlanner, step(planner_plan("Need both figures.", plan), tok.large_plan));
      s.push(ModelRole::Actor, step(actor, tok.actor));
      s.push(ModelRole::LargePlanner,
             step(planner_answer("Combine the figures.", answer), tok.large_answer));
      if (kind == StrategyKind::PlanCache) {
        std::string summary = "Answer a numeric question from a company filing.";
        for (const auto& cls : kClasses) {
          if (w.keyword_of[i] == cls.keyword) summary = cls.summary;
        }
        s.push(ModelRole::CacheGenerator,
               step(generator_reply(make_template(summary, 1)), tok.generator));
      }
    }
    if (judge && task.ground_truth) s.push(ModelRole::Judge, "1");
  }
}

Gateway scripted_gateway(std::shared_ptr<ScriptedProvider> script) {
  return make_scripted_gateway(std::move(script));
}

}  // namespace plancache::testing
