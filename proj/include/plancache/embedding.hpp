#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace plancache {

/// Sparse vector: (dimension, weight) pairs sorted by dimension, no duplicates.
/// Dense provider embeddings use dimensions 0..n-1.
struct Embedding {
  std::vector<std::pair<std::uint64_t, double>> entries;

  static Embedding from_dense(const std::vector<double>& values);
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

double dot(const Embedding& a, const Embedding& b);
/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const Embedding& a, const Embedding& b);

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// Throws std::invalid_argument on empty text, ProviderError for remote models.
  virtual Embedding embed(std::string_view text) = 0;
};

/// Offline embedder: L2-normalized term frequencies over lowercased ASCII
/// alphanumeric tokens. Each token maps to its 64-bit FNV-1a hash, so equal
/// texts embed identically and disjoint vocabularies are orthogonal.
class BagOfWordsEmbedder final : public Embedder {
 public:
  Embedding embed(std::string_view text) override;
};

std::vector<std::string_view> alnum_tokens(std::string_view text);

}  // namespace plancache
