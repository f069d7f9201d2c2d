#include "leakscope/topo_similarity.hpp"

#include "leakscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

namespace leakscope {

KRange resolve_k_range(std::size_t n, const TopoOptions &opts) {
  if (n < 2)
    throw ValidationError("topo similarity: need at least 2 points, got " + std::to_string(n));
  const std::size_t limit = opts.include_self ? n : n - 1;
  std::size_t k_max = opts.k_max.value_or(
      std::min(limit, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))))));
  if (opts.k_min < 1 || opts.k_min > k_max)
    throw ValidationError("topo similarity: empty k range [" + std::to_string(opts.k_min) + ", " +
                          std::to_string(k_max) + "]");
  if (k_max > limit)
    throw ValidationError("topo similarity: k_max=" + std::to_string(k_max) + " exceeds " +
                          std::to_string(limit) + " for n=" + std::to_string(n) +
                          (opts.include_self ? " (self included)" : " (self excluded)"));
  return {opts.k_min, k_max};
}

namespace {

void require_aligned(const EmbeddingSet &p, const EmbeddingSet &q) {
  if (p.size() != q.size())
    throw ValidationError("topo similarity: clouds have " + std::to_string(p.size()) + " and " +
                          std::to_string(q.size()) + " points");
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p.ids()[i] != q.ids()[i])
      throw ValidationError("topo similarity: id misalignment at index " + std::to_string(i) +
                            " ('" + p.ids()[i] + "' vs '" + q.ids()[i] + "')");
}

// S_k for every k in the range. For item i, an index j belongs to both
// neighbor sets at size k exactly when max(rank_p(j), rank_q(j)) < k, so one
// histogram over that max gives the overlap for all k at once.
std::vector<double> overlap_curve(const DistanceMatrix &p, const DistanceMatrix &q, KRange range,
                                  bool include_self) {
  const std::size_t n = p.size();
  const auto np = ranked_neighbors(p, range.max, include_self);
  const auto nq = ranked_neighbors(q, range.max, include_self);

  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> rank_p(n, kAbsent);
  std::vector<double> overlap_sum(range.max + 1, 0.0);
  std::vector<std::size_t> first_shared(range.max + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < np[i].size(); ++r)
      rank_p[np[i][r]] = r;
    std::fill(first_shared.begin(), first_shared.end(), 0);
    for (std::size_t r = 0; r < nq[i].size(); ++r) {
      const std::size_t rp = rank_p[nq[i][r]];
      if (rp != kAbsent)
        ++first_shared[std::max(rp, r) + 1];
    }
    std::size_t shared = 0;
    for (std::size_t k = 1; k <= range.max; ++k) {
      shared += first_shared[k];
      overlap_sum[k] += static_cast<double>(shared) / static_cast<double>(k);
    }
    for (std::size_t idx : np[i])
      rank_p[idx] = kAbsent;
  }
  std::vector<double> curve;
  curve.reserve(range.max - range.min + 1);
  for (std::size_t k = range.min; k <= range.max; ++k)
    curve.push_back(overlap_sum[k] / static_cast<double>(n));
  return curve;
}

TopoSimilarityResult summarize(std::vector<double> curve, KRange range, const TopoOptions &opts) {
  TopoSimilarityResult r;
  r.k_range = range;
  r.include_self = opts.include_self;
  r.metric = opts.metric;
  r.k_at_max = range.min;
  r.s_max = curve.front();
  for (std::size_t idx = 1; idx < curve.size(); ++idx)
    if (curve[idx] > r.s_max) {
      r.s_max = curve[idx];
      r.k_at_max = range.min + idx;
    }
  r.curve = std::move(curve);
  return r;
}

} // namespace

std::vector<double> topo_similarity_curve(const EmbeddingSet &p, const EmbeddingSet &q,
                                          const TopoOptions &opts) {
  return topo_similarity(p, q, opts).curve;
}

TopoSimilarityResult topo_similarity(const EmbeddingSet &p, const EmbeddingSet &q,
                                     const TopoOptions &opts) {
  require_aligned(p, q);
  return topo_similarity(pairwise_divergence(p, opts.metric), pairwise_divergence(q, opts.metric),
                         opts);
}

TopoSimilarityResult topo_similarity(const DistanceMatrix &p, const DistanceMatrix &q,
                                     const TopoOptions &opts) {
  if (p.size() != q.size())
    throw ValidationError("topo similarity: distance matrices have " + std::to_string(p.size()) +
                          " and " + std::to_string(q.size()) + " points");
  const KRange range = resolve_k_range(p.size(), opts);
  return summarize(overlap_curve(p, q, range, opts.include_self), range, opts);
}

namespace {

// Rows of `text` reordered to follow `labels`, matched by normalize_label.
EmbeddingSet align_text(const EmbeddingSet &text, const std::vector<std::string> &labels) {
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto [it, fresh] = row_of.emplace(normalize_label(text.ids()[i]), i);
    if (!fresh)
      throw ValidationError("compare spaces: text set '" + std::string(role_tag(text.role())) +
                            "' has two ids normalizing to '" + it->first + "'");
  }
  std::vector<std::string> missing;
  Matrix m(labels.size(), text.dim());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    auto it = row_of.find(normalize_label(labels[r]));
    if (it == row_of.end()) {
      missing.push_back(labels[r]);
      continue;
    }
    std::copy(text.matrix().row(it->second).begin(), text.matrix().row(it->second).end(),
              m.row(r).begin());
  }
  if (!missing.empty() || labels.size() != text.size()) {
    std::string msg = "compare spaces: label vocabulary mismatch between audio labels (" +
                      std::to_string(labels.size()) + ") and text ids (" +
                      std::to_string(text.size()) + ")";
    if (!missing.empty())
      msg += "; audio labels without a text row: '" + missing.front() + "'" +
             (missing.size() > 1 ? " and " + std::to_string(missing.size() - 1) + " more" : "");
    throw ValidationError(msg);
  }
  return EmbeddingSet(text.role(), labels, std::move(m), labels);
}

} // namespace

SpaceComparison compare_all_spaces(const EmbeddingSet &x_a, const EmbeddingSet &e_a,
                                   const EmbeddingSet &x_t, const EmbeddingSet &e_t,
                                   const TopoOptions &opts) {
  require_aligned(x_a, e_a);
  const EmbeddingSet centroids_x = label_centroids(x_a);
  const EmbeddingSet centroids_e = label_centroids(e_a);
  const auto &labels = centroids_e.ids();
  const EmbeddingSet text_x = align_text(x_t, labels);
  const EmbeddingSet text_e = align_text(e_t, labels);

  SpaceComparison out;
  out.audio = opts.full_unimodal_clouds ? topo_similarity(x_a, e_a, opts)
                                        : topo_similarity(centroids_x, centroids_e, opts);
  out.text = topo_similarity(text_x, text_e, opts);
  out.cross_modal = topo_similarity(centroids_e, text_e, opts);
  return out;
}

std::string curve_csv(const TopoSimilarityResult &result) {
  std::ostringstream os;
  os.precision(17);
  os << "k,S_k\n";
  for (std::size_t k = result.k_range.min; k <= result.k_range.max; ++k)
    os << k << ',' << result.at(k) << '\n';
  return os.str();
}

} // namespace leakscope
