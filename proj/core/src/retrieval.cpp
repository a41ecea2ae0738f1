#include "genclass/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "genclass/errors.hpp"

namespace genclass {

void EmbeddingStore::add(const std::string& id, std::vector<double> vector) {
  if (entries_.empty() && dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw Error(ErrorKind::DimMismatch,
                "vector for '" + id + "' has dim " + std::to_string(vector.size()) +
                    ", store dim is " + std::to_string(dim_));
  }
  if (contains(id)) {
    throw Error(ErrorKind::DuplicateId, "duplicate embedding id: " + id);
  }
  entries_.emplace_back(id, std::move(vector));
}

bool EmbeddingStore::contains(const std::string& id) const {
  return vector_of(id) != nullptr;
}

const std::vector<double>* EmbeddingStore::vector_of(const std::string& id) const {
  for (const auto& [key, vec] : entries_) {
    if (key == id) return &vec;
  }
  return nullptr;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) {
    throw Error(ErrorKind::DimMismatch, "cosine of vectors with different dims");
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorKind::ZeroVector, "cosine undefined for zero vector");
  }
  return dot / (std::sqrt(nu) * std::sqrt(nv));
}

std::vector<ScoredId> top_k(const EmbeddingStore& store,
                            const std::vector<double>& query, size_t k,
                            const std::optional<std::string>& exclude_id) {
  size_t available = store.size();
  if (exclude_id && store.contains(*exclude_id)) available -= 1;
  if (k > available) {
    throw Error(ErrorKind::InsufficientExamples,
                "top_k of " + std::to_string(k) + " from " +
                    std::to_string(available) + " entries");
  }

  std::vector<ScoredId> scored;
  scored.reserve(available);
  for (const auto& [id, vec] : store.entries()) {
    if (exclude_id && id == *exclude_id) continue;
    scored.push_back({id, cosine(query, vec)});
  }
  auto better = [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  };
  if (k < scored.size()) {
    std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(k),
                      scored.end(), better);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), better);
  }
  return scored;
}

}  // namespace genclass
