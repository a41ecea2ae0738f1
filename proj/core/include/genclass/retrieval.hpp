#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace genclass {

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

/// Flat embedding index over training examples. Exact exhaustive scan; the
/// corpora involved stay well under a million entries and determinism matters
/// more than speed here.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;
  explicit EmbeddingStore(size_t dim) : dim_(dim) {}

  void add(const std::string& id, std::vector<double> vector);

  size_t dim() const { return dim_; }
  size_t size() const { return entries_.size(); }
  bool contains(const std::string& id) const;
  const std::vector<double>* vector_of(const std::string& id) const;
  const std::vector<std::pair<std::string, std::vector<double>>>& entries() const {
    return entries_;
  }

 private:
  size_t dim_ = 0;
  std::vector<std::pair<std::string, std::vector<double>>> entries_;
};

/// dot(u,v) / (|u||v|). Throws on dimension mismatch or a zero-norm input.
double cosine(const std::vector<double>& u, const std::vector<double>& v);

/// The k ids with highest cosine to the query, descending; ties break by
/// ascending id; exclude_id is never returned.
std::vector<ScoredId> top_k(const EmbeddingStore& store,
                            const std::vector<double>& query, size_t k,
                            const std::optional<std::string>& exclude_id = std::nullopt);

}  // namespace genclass
