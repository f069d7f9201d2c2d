#include "leakscope/silhouette.hpp"

#include "leakscope/error.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace leakscope {

std::vector<double> silhouette_samples(const DistanceMatrix &dm,
                                       const std::vector<std::string> &labels) {
  const std::size_t n = dm.size();
  if (labels.size() != n)
    throw ValidationError("silhouette: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(n) + " items");
  if (n < 2)
    throw ValidationError("silhouette: need at least 2 items");

  // Dense cluster index per item.
  std::map<std::string, std::size_t> cluster_of_label;
  for (const auto &l : labels)
    cluster_of_label.emplace(l, 0);
  if (cluster_of_label.size() < 2)
    throw ValidationError("silhouette: need at least 2 distinct labels, got " +
                          std::to_string(cluster_of_label.size()));
  std::size_t next = 0;
  for (auto &[label, idx] : cluster_of_label)
    idx = next++;
  const std::size_t n_clusters = next;

  std::vector<std::size_t> cluster(n);
  std::vector<std::size_t> cluster_size(n_clusters, 0);
  for (std::size_t i = 0; i < n; ++i) {
    cluster[i] = cluster_of_label.at(labels[i]);
    ++cluster_size[cluster[i]];
  }

  // One pass over the distance matrix: per item, summed distance to each cluster.
  std::vector<double> sums(n_clusters);
  std::vector<double> scores(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t own = cluster[i];
    if (cluster_size[own] < 2)
      continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    const auto row = dm.values.row(i);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i)
        sums[cluster[j]] += row[j];

    const double a = sums[own] / static_cast<double>(cluster_size[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n_clusters; ++c)
      if (c != own)
        b = std::min(b, sums[c] / static_cast<double>(cluster_size[c]));

    const double denom = std::max(a, b);
    scores[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return scores;
}

double silhouette_score(const DistanceMatrix &dm, const std::vector<std::string> &labels) {
  const auto s = silhouette_samples(dm, labels);
  double total = 0.0;
  for (double v : s)
    total += v;
  return total / static_cast<double>(s.size());
}

} // namespace leakscope
