#include "leakscope/geometry.hpp"

#include "leakscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace leakscope {

std::string_view metric_name(Metric metric) {
  return metric == Metric::CosineDivergence ? "cosine" : "euclidean";
}

Metric parse_metric(std::string_view name) {
  if (name == "cosine")
    return Metric::CosineDivergence;
  if (name == "euclidean")
    return Metric::Euclidean;
  throw ValidationError("unknown metric '" + std::string(name) + "' (expected cosine or euclidean)");
}

namespace {

double dot(std::span<const double> u, std::span<const double> v) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += u[i] * v[i];
  return s;
}

void require_same_dim(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size())
    throw ValidationError("vector dimensions differ: " + std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
}

double cosine_from_parts(double uv, double nu, double nv) {
  return std::clamp(1.0 - uv / (nu * nv), 0.0, 2.0);
}

} // namespace

EmbeddingSet l2_normalize(const EmbeddingSet &set) {
  Matrix out = set.matrix();
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double norm = std::sqrt(dot(row, row));
    if (norm == 0.0)
      throw ValidationError("l2_normalize: row " + std::to_string(r) + " (id '" + set.ids()[r] +
                            "') has zero norm");
    for (double &x : row)
      x /= norm;
  }
  return set.with_matrix(std::move(out));
}

double cosine_divergence(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u, v);
  const double nu = std::sqrt(dot(u, u));
  const double nv = std::sqrt(dot(v, v));
  if (nu == 0.0 || nv == 0.0)
    throw ValidationError("cosine_divergence: zero vector");
  return cosine_from_parts(dot(u, v), nu, nv);
}

double euclidean_distance(std::span<const double> u, std::span<const double> v) {
  require_same_dim(u, v);
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

DistanceMatrix pairwise_divergence(const Matrix &points, Metric metric) {
  const std::size_t n = points.rows();
  if (n < 2)
    throw ValidationError("pairwise_divergence: need at least 2 points, got " + std::to_string(n));

  DistanceMatrix dm{metric, Matrix(n, n)};
  std::vector<double> norms;
  if (metric == Metric::CosineDivergence) {
    norms.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      norms[i] = std::sqrt(dot(points.row(i), points.row(i)));
      if (norms[i] == 0.0)
        throw ValidationError("pairwise_divergence: row " + std::to_string(i) +
                              " is a zero vector (cosine divergence undefined)");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = metric == Metric::CosineDivergence
                           ? cosine_from_parts(dot(points.row(i), points.row(j)), norms[i], norms[j])
                           : euclidean_distance(points.row(i), points.row(j));
      dm.values(i, j) = d;
      dm.values(j, i) = d;
    }
  }
  return dm;
}

DistanceMatrix pairwise_divergence(const EmbeddingSet &set, Metric metric) {
  return pairwise_divergence(set.matrix(), metric);
}

std::vector<std::vector<std::size_t>> ranked_neighbors(const DistanceMatrix &dm, std::size_t k_max,
                                                       bool include_self) {
  const std::size_t n = dm.size();
  const std::size_t limit = include_self ? n : n - 1;
  if (n == 0 || k_max < 1 || k_max > limit)
    throw ValidationError("knn: k=" + std::to_string(k_max) + " out of range [1, " +
                          std::to_string(limit) + "] for n=" + std::to_string(n) +
                          (include_self ? " (self included)" : " (self excluded)"));

  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> others;
  others.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    others.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        others.push_back(j);
    const std::size_t take = include_self ? k_max - 1 : k_max;
    auto closer = [&](std::size_t a, std::size_t b) {
      const double da = dm(i, a), db = dm(i, b);
      return da < db || (da == db && a < b);
    };
    std::partial_sort(others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take),
                      others.end(), closer);
    auto &list = out[i];
    list.reserve(k_max);
    if (include_self)
      list.push_back(i);
    list.insert(list.end(), others.begin(), others.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

NeighborLists knn_lists(const DistanceMatrix &dm, std::size_t k, bool include_self) {
  return NeighborLists{k, include_self, ranked_neighbors(dm, k, include_self)};
}

EmbeddingSet label_centroids(const EmbeddingSet &set) {
  if (!set.labels())
    throw ValidationError("label_centroids: embedding set '" + std::string(role_tag(set.role())) +
                          "' has no labels");
  const auto &labels = *set.labels();
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[labels[i]].push_back(i);

  const std::size_t d = set.dim();
  Matrix centroids(members.size(), d);
  std::vector<std::string> ids;
  ids.reserve(members.size());
  std::size_t r = 0;
  for (const auto &[label, rows] : members) {
    auto out = centroids.row(r++);
    for (std::size_t i : rows) {
      const auto src = set.matrix().row(i);
      for (std::size_t c = 0; c < d; ++c)
        out[c] += src[c];
    }
    for (double &x : out)
      x /= static_cast<double>(rows.size());
    ids.push_back(label);
  }
  auto labels_out = ids;
  return EmbeddingSet(set.role(), std::move(ids), std::move(centroids), std::move(labels_out));
}

} // namespace leakscope
