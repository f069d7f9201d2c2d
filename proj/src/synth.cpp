#include "leakscope/synth.hpp"

#include "leakscope/error.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <random>

namespace leakscope::synth {

namespace {

// Independent streams from one user seed.
enum Stream : std::uint64_t { kCentroids = 1, kPoints = 2, kPaired = 3, kRotation = 4, kText = 5 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Orthonormalizes the rows of `m` in place (modified Gram-Schmidt) and
// returns how many independent rows survived at the front.
std::size_t orthonormalize_rows(Matrix &m) {
  std::size_t kept = 0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto v = m.row(r);
    for (std::size_t q = 0; q < kept; ++q) {
      const auto u = m.row(q);
      double proj = 0.0;
      for (std::size_t c = 0; c < m.cols(); ++c)
        proj += v[c] * u[c];
      for (std::size_t c = 0; c < m.cols(); ++c)
        v[c] -= proj * u[c];
    }
    double norm = 0.0;
    for (double x : v)
      norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-10)
      continue;
    auto dst = m.row(kept);
    for (std::size_t c = 0; c < m.cols(); ++c)
      dst[c] = v[c] / norm;
    ++kept;
  }
  return kept;
}

Matrix random_rotation(std::size_t dim, std::uint64_t seed) {
  auto rng = make_rng(seed, kRotation);
  std::normal_distribution<double> normal;
  for (;;) {
    Matrix m(dim, dim);
    for (double &x : m.data())
      x = normal(rng);
    if (orthonormalize_rows(m) == dim)
      return m;
  }
}

Matrix rotate(const Matrix &points, const Matrix &rotation) {
  Matrix out(points.rows(), rotation.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
    for (std::size_t r = 0; r < rotation.rows(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c)
        s += rotation(r, c) * points(i, c);
      out(i, r) = s;
    }
  return out;
}

} // namespace

void validate(const ClusterSpec &spec) {
  if (spec.n_classes == 0 || spec.points_per_class == 0 || spec.dim == 0)
    throw ValidationError("synth: n_classes, points_per_class and dim must be positive");
  if (!(spec.separation >= 0.0) || !std::isfinite(spec.separation))
    throw ValidationError("synth: separation must be a finite value >= 0");
}

bool simplex_fits(const ClusterSpec &spec) { return spec.dim + 1 >= spec.n_classes; }

Matrix class_centroids(const ClusterSpec &spec) {
  validate(spec);
  const std::size_t c = spec.n_classes;
  Matrix centroids(c, spec.dim);
  if (c == 1)
    return centroids;

  if (simplex_fits(spec)) {
    // Vertices e_k - mean(e) of the standard simplex are pairwise sqrt(2)
    // apart; express them in an orthonormal basis of their (c-1)-dim span.
    Matrix vertices(c, c);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t j = 0; j < c; ++j)
        vertices(k, j) = (k == j ? 1.0 : 0.0) - 1.0 / static_cast<double>(c);
    Matrix basis = vertices;
    const std::size_t rank = orthonormalize_rows(basis);
    const double scale = spec.separation / std::sqrt(2.0);
    for (std::size_t k = 0; k < c; ++k)
      for (std::size_t b = 0; b < rank && b < spec.dim; ++b) {
        double coord = 0.0;
        for (std::size_t j = 0; j < c; ++j)
          coord += vertices(k, j) * basis(b, j);
        centroids(k, b) = scale * coord;
      }
    return centroids;
  }

  std::cerr << "warning: synth: dim " << spec.dim << " < n_classes - 1 = " << c - 1
            << "; placing centroids along random directions\n";
  auto rng = make_rng(spec.seed, kCentroids);
  std::normal_distribution<double> normal;
  for (double &x : centroids.data())
    x = normal(rng);
  double closest = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < c; ++a)
    for (std::size_t b = a + 1; b < c; ++b)
      closest = std::min(closest, dist(centroids.row(a), centroids.row(b)));
  const double scale = closest > 0.0 ? spec.separation / closest : 0.0;
  for (double &x : centroids.data())
    x *= scale;
  return centroids;
}

std::vector<std::string> class_names(std::size_t n_classes) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < n_classes; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "class_%02zu", k);
    names.emplace_back(buf);
  }
  return names;
}

namespace {

EmbeddingSet sample_around(const ClusterSpec &spec, const Matrix &centers, double center_scale) {
  const auto names = class_names(spec.n_classes);
  const std::size_t n = spec.n_classes * spec.points_per_class;
  Matrix points(n, spec.dim);
  std::vector<std::string> ids, labels;
  ids.reserve(n);
  labels.reserve(n);
  auto rng = make_rng(spec.seed, kPoints);
  std::normal_distribution<double> normal;
  std::size_t i = 0;
  for (std::size_t k = 0; k < spec.n_classes; ++k)
    for (std::size_t p = 0; p < spec.points_per_class; ++p, ++i) {
      for (std::size_t c = 0; c < spec.dim; ++c)
        points(i, c) = center_scale * centers(k, c) + normal(rng);
      char buf[32];
      std::snprintf(buf, sizeof buf, "item_%05zu", i);
      ids.emplace_back(buf);
      labels.push_back(names[k]);
    }
  return EmbeddingSet(Role::AudioCrossModal, std::move(ids), std::move(points), std::move(labels));
}

} // namespace

EmbeddingSet gaussian_clusters(const ClusterSpec &spec) {
  return sample_around(spec, class_centroids(spec), 1.0);
}

EmbeddingSet paired_cloud(const EmbeddingSet &base, double noise_scale, std::uint64_t seed) {
  if (!(noise_scale >= 0.0))
    throw ValidationError("paired_cloud: noise_scale must be >= 0");
  Matrix m = base.matrix();
  if (noise_scale > 0.0) {
    auto rng = make_rng(seed, kPaired);
    std::normal_distribution<double> normal;
    for (double &x : m.data())
      x += noise_scale * normal(rng);
  }
  return base.with_matrix(std::move(m));
}

Scenario leaky_vs_clean_scenario(const ClusterSpec &spec, double leak_strength) {
  if (!(leak_strength >= 0.0 && leak_strength <= 1.0))
    throw ValidationError("synth: leak_strength must lie in [0, 1]");
  const Matrix centroids = class_centroids(spec);
  auto names = class_names(spec.n_classes);
  auto text_labels = names;
  EmbeddingSet text(Role::TextCrossModal, std::move(names), centroids, std::move(text_labels));
  return {sample_around(spec, centroids, leak_strength), std::move(text)};
}

FullScenario full_scenario(const ClusterSpec &spec, double leak_strength) {
  auto s = leaky_vs_clean_scenario(spec, leak_strength);
  constexpr double kUnimodalNoise = 0.1;
  const Matrix rot_a = random_rotation(spec.dim, spec.seed);
  const Matrix rot_t = random_rotation(spec.dim, spec.seed + 1);

  Matrix xa = rotate(s.audio.matrix(), rot_a);
  Matrix xt = rotate(s.class_text.matrix(), rot_t);
  auto rng = make_rng(spec.seed, kText);
  std::normal_distribution<double> normal;
  for (double &x : xa.data())
    x += kUnimodalNoise * normal(rng);
  for (double &x : xt.data())
    x += kUnimodalNoise * normal(rng);

  EmbeddingSet x_a(Role::AudioUnimodal, s.audio.ids(), std::move(xa), s.audio.labels());
  EmbeddingSet x_t(Role::TextUnimodal, s.class_text.ids(), std::move(xt), s.class_text.labels());
  return {std::move(x_a), std::move(s.audio), std::move(x_t), std::move(s.class_text)};
}

} // namespace leakscope::synth
