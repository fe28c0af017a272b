#include "plancache/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace plancache {

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(std::tolower(c));
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Embedding Embedding::from_dense(const std::vector<double>& values) {
  Embedding e;
  e.entries.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) e.entries.emplace_back(i, values[i]);
  }
  return e;
}

double dot(const Embedding& a, const Embedding& b) {
  double sum = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      sum += ia->second * ib->second;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

double cosine(const Embedding& a, const Embedding& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

std::vector<std::string_view> alnum_tokens(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

Embedding BagOfWordsEmbedder::embed(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("cannot embed empty text");
  std::map<std::uint64_t, double> counts;
  for (auto tok : alnum_tokens(text)) counts[fnv1a(tok)] += 1.0;
  double norm = 0.0;
  for (const auto& [_, c] : counts) norm += c * c;
  norm = std::sqrt(norm);
  Embedding e;
  e.entries.reserve(counts.size());
  for (const auto& [dim, c] : counts) e.entries.emplace_back(dim, c / norm);
  return e;
}

}  // namespace plancache
