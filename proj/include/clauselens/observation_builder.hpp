#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "clauselens/clause_store.hpp"
#include "clauselens/config.hpp"
#include "clauselens/errors.hpp"
#include "clauselens/treaty_domain.hpp"

namespace clauselens {

/// Signed-hash projection of vocabulary-width tf-idf rows down to a fixed
/// width. Buckets and signs are derived from the term strings, never from
/// column positions, so the projection is invariant to corpus file order.
class HashProjection {
 public:
  HashProjection(const ClauseIndex& index, std::size_t dim, std::uint64_t seed)
      : dim_(dim) {
    if (dim < 1) throw ConfigError("projection dimension must be >= 1");
    if (dim > index.vocabulary().size())
      throw ConfigError("projection dimension exceeds vocabulary size");
    buckets_.resize(index.vocabulary().size());
    signs_.resize(index.vocabulary().size());
    for (const auto& [term, col] : index.vocabulary()) {
      std::uint64_t h = fnv1a64(term.data(), term.size(), seed * 0x9e3779b97f4a7c15ULL ^ 0xcbf29ce484222325ULL);
      buckets_[col] = std::size_t(h % dim);
      signs_[col] = (h >> 63) ? 1.0 : -1.0;
    }
  }

  std::size_t dim() const { return dim_; }

  /// Project a sparse L2-normalized row; the result is rescaled onto the
  /// unit ball when hash collisions push its norm above 1.
  std::vector<double> project(
      const std::vector<std::pair<std::size_t, double>>& row) const {
    std::vector<double> out(dim_, 0.0);
    for (const auto& [col, weight] : row)
      out[buckets_[col]] += signs_[col] * weight;
    double norm_sq = 0.0;
    for (double v : out) norm_sq += v * v;
    if (norm_sq > 1.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (double& v : out) v *= inv;
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<std::size_t> buckets_;
  std::vector<double> signs_;
};

/// Fixed-width policy observation: the request features followed by k clause
/// blocks in retrieval rank order, zero-filled past the number retrieved.
struct AugmentedState {
  std::vector<double> values;
  std::size_t feature_width = 0;
  std::size_t clause_width = 0;
  std::size_t clause_slots = 0;

  std::size_t size() const { return values.size(); }
};

inline AugmentedState build_state(const FeatureVector& features,
                                  const RetrievalResult& retrieval,
                                  const ClauseIndex& index,
                                  const HashProjection& projection,
                                  std::size_t k) {
  if (retrieval.hits.size() > k)
    throw DomainError("retrieval returned more clauses than the state holds");
  AugmentedState s;
  s.feature_width = features.size();
  s.clause_width = projection.dim();
  s.clause_slots = k;
  s.values = features.values;
  s.values.resize(s.feature_width + k * s.clause_width, 0.0);
  for (std::size_t r = 0; r < retrieval.hits.size(); ++r) {
    const auto block =
        projection.project(index.row(index.row_of(retrieval.hits[r].id)));
    std::copy(block.begin(), block.end(),
              s.values.begin() + std::ptrdiff_t(s.feature_width + r * s.clause_width));
  }
  return s;
}

struct ObservationConfig {
  std::size_t k = 4;
  std::size_t dim_c = 64;
  std::uint64_t projection_seed = 1234;
};

inline ObservationConfig observation_config_from(const ConfigFile& cfg) {
  ObservationConfig o;
  if (cfg.has("retrieval", "k"))
    o.k = std::size_t(cfg.get_int("retrieval", "k"));
  if (cfg.has("retrieval", "dim_c"))
    o.dim_c = std::size_t(cfg.get_int("retrieval", "dim_c"));
  if (cfg.has("retrieval", "projection_seed"))
    o.projection_seed = std::uint64_t(cfg.get_int("retrieval", "projection_seed"));
  if (o.k < 1) throw ConfigError("[retrieval] k must be >= 1");
  return o;
}

}  // namespace clauselens
