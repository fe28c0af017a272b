#include <fstream>

#include "plancache/bench.hpp"
#include "plancache/errors.hpp"
#include "plancache/keyword.hpp"
#include "plancache/store.hpp"

namespace plancache {

double MatchRates::fp_rate() const {
  return pairs == 0 ? 0.0 : static_cast<double>(false_positives) / static_cast<double>(pairs);
}

double MatchRates::fn_rate() const {
  return pairs == 0 ? 0.0 : static_cast<double>(false_negatives) / static_cast<double>(pairs);
}

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 0; i <= 20; ++i) out.push_back(i / 20.0);
  return out;
}

namespace {

void tally(MatchRates& rates, bool matched, bool same_plan) {
  ++rates.pairs;
  if (matched && !same_plan) ++rates.false_positives;
  if (!matched && same_plan) ++rates.false_negatives;
}

bool keywords_match(const std::string& a, const std::string& b) {
  try {
    return normalize(a) == normalize(b);
  } catch (const EmptyKeyword&) {
    return false;
  }
}

}  // namespace

MatchAnalysisReport matching_analysis(std::span<const LabeledPair> pairs,
                                      std::span<const double> thresholds, Embedder& embedder) {
  std::vector<double> similarity;
  similarity.reserve(pairs.size());
  MatchAnalysisReport report;
  for (const auto& p : pairs) {
    similarity.push_back(
        query_similarity(p.query_a, embedder.embed(p.query_a), p.query_b, embedder.embed(p.query_b)));
    tally(report.keyword_based, keywords_match(p.keyword_a, p.keyword_b), p.same_plan);
  }
  for (double t : thresholds) {
    ThresholdRow row{t, {}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      tally(row.rates, similarity[i] >= t, pairs[i].same_plan);
    }
    report.query_based.push_back(row);
  }
  return report;
}

std::vector<LabeledPair> parse_pairs(std::string_view text) {
  std::vector<LabeledPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto end = std::min(text.find('\n', pos), text.size());
    const auto line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      pairs.push_back({obj.at("query_a").get<std::string>(), obj.at("query_b").get<std::string>(),
                       obj.at("keyword_a").get<std::string>(), obj.at("keyword_b").get<std::string>(),
                       obj.at("same_plan").get<bool>()});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(std::string("bad labeled pair: ") + e.what(), line_no);
    }
    if (pairs.back().query_a.empty() || pairs.back().query_b.empty()) {
      throw FormatError("labeled pair has an empty query", line_no);
    }
  }
  return pairs;
}

std::vector<LabeledPair> load_pairs(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const PersistenceError& e) {
    throw FormatError(e.what(), 0);
  }
  return parse_pairs(text);
}

nlohmann::json to_json(const MatchAnalysisReport& report) {
  auto rates = [](const MatchRates& r) {
    return nlohmann::json{{"pairs", r.pairs},
                          {"false_positives", r.false_positives},
                          {"false_negatives", r.false_negatives},
                          {"fp_rate", r.fp_rate()},
                          {"fn_rate", r.fn_rate()}};
  };
  auto sweep = nlohmann::json::array();
  for (const auto& row : report.query_based) {
    auto j = rates(row.rates);
    j["threshold"] = row.threshold;
    sweep.push_back(std::move(j));
  }
  return {{"query_based", std::move(sweep)}, {"keyword_based", rates(report.keyword_based)}};
}

void write_match_report(const MatchAnalysisReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PersistenceError("cannot create report directory " + dir.string() + ": " + ec.message());
  {
    std::ofstream out(dir / "match_report.json", std::ios::binary | std::ios::trunc);
    if (!out) throw PersistenceError("cannot write match_report.json");
    out << to_json(report).dump(2) << "\n";
  }
  std::ofstream out(dir / "threshold_sweep.csv", std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError("cannot write threshold_sweep.csv");
  out << "method,threshold,pairs,false_positives,false_negatives,fp_rate,fn_rate\n";
  auto line = [&out](std::string_view method, std::string threshold, const MatchRates& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f,%.6f", r.fp_rate(), r.fn_rate());
    out << method << ',' << threshold << ',' << r.pairs << ',' << r.false_positives << ','
        << r.false_negatives << ',' << buf << "\n";
  };
  for (const auto& row : report.query_based) {
    char t[32];
    std::snprintf(t, sizeof t, "%.2f", row.threshold);
    line("query", t, row.rates);
  }
  line("keyword", "", report.keyword_based);
}

}  // namespace plancache
