#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/geometry.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace leakscope {

// Neighborhood-overlap similarity between two index-paired point clouds:
//   S_k = mean_i |N_k(p_i) ∩ N_k(q_i)| / k,   S = max_k S_k.
struct TopoOptions {
  Metric metric = Metric::CosineDivergence;
  bool include_self = false;
  std::size_t k_min = 1;
  // Unset: ceil(sqrt(n)), capped at the largest k the self policy allows.
  std::optional<std::size_t> k_max;
  // Compare x_a with E_a (and x_t with E_t) on every item instead of on
  // label centroids. E_a vs E_t always uses audio centroids.
  bool full_unimodal_clouds = false;
};

struct KRange {
  std::size_t min = 1;
  std::size_t max = 1;
};

struct TopoSimilarityResult {
  std::vector<double> curve; // curve[k - k_range.min] = S_k
  double s_max = 0.0;
  std::size_t k_at_max = 1;
  KRange k_range;
  bool include_self = false;
  Metric metric = Metric::CosineDivergence;

  double at(std::size_t k) const { return curve.at(k - k_range.min); }
};

KRange resolve_k_range(std::size_t n, const TopoOptions &opts);

std::vector<double> topo_similarity_curve(const EmbeddingSet &p, const EmbeddingSet &q,
                                          const TopoOptions &opts);
TopoSimilarityResult topo_similarity(const EmbeddingSet &p, const EmbeddingSet &q,
                                     const TopoOptions &opts);

// Same computation from precomputed distance matrices (index-paired).
TopoSimilarityResult topo_similarity(const DistanceMatrix &p, const DistanceMatrix &q,
                                     const TopoOptions &opts);

struct SpaceComparison {
  TopoSimilarityResult audio;       // x_a vs E_a
  TopoSimilarityResult text;        // x_t vs E_t
  TopoSimilarityResult cross_modal; // E_a vs E_t
};

// Audio sets are reduced to label centroids and matched to the text sets'
// ids by normalize_label; both vocabularies must agree exactly.
SpaceComparison compare_all_spaces(const EmbeddingSet &x_a, const EmbeddingSet &e_a,
                                   const EmbeddingSet &x_t, const EmbeddingSet &e_t,
                                   const TopoOptions &opts);

// "k,S_k" lines with a header, for plotting.
std::string curve_csv(const TopoSimilarityResult &result);

} // namespace leakscope
