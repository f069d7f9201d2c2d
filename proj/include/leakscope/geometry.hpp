#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/matrix.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope {

enum class Metric { CosineDivergence, Euclidean };

std::string_view metric_name(Metric metric); // "cosine" / "euclidean"
Metric parse_metric(std::string_view name);

// Symmetric n x n table of pairwise divergences with a zero diagonal.
struct DistanceMatrix {
  Metric metric = Metric::CosineDivergence;
  Matrix values;

  std::size_t size() const { return values.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return values(i, j); }
};

// k nearest indices per item, ascending by distance, ties by ascending index.
// With include_self the item itself is always first in its own list.
struct NeighborLists {
  std::size_t k = 0;
  bool include_self = false;
  std::vector<std::vector<std::size_t>> lists;
};

EmbeddingSet l2_normalize(const EmbeddingSet &set);

// 1 - cos(u, v), clamped to [0, 2]. Throws on a zero vector.
double cosine_divergence(std::span<const double> u, std::span<const double> v);
double euclidean_distance(std::span<const double> u, std::span<const double> v);

DistanceMatrix pairwise_divergence(const Matrix &points, Metric metric);
DistanceMatrix pairwise_divergence(const EmbeddingSet &set, Metric metric);

// Full neighbor ranking (ascending distance, ties by index) up to k_max.
std::vector<std::vector<std::size_t>> ranked_neighbors(const DistanceMatrix &dm, std::size_t k_max,
                                                       bool include_self);
NeighborLists knn_lists(const DistanceMatrix &dm, std::size_t k, bool include_self);

// One row per distinct label, labels in ascending byte order; the row is the
// mean of that label's items and the new ids are the label strings.
EmbeddingSet label_centroids(const EmbeddingSet &set);

} // namespace leakscope
