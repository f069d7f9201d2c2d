#include "leakscope/error.hpp"
#include "leakscope/topo_similarity.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace leakscope;

namespace {

EmbeddingSet cloud(const Matrix &m, Role role = Role::AudioUnimodal) {
  return EmbeddingSet(role, oracle::ids(m.rows()), m);
}

// Rotation by a random angle in the plane spanned by two coordinates, then
// a translation: a Euclidean isometry.
Matrix isometry(const Matrix &m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double theta = u(rng);
  Matrix out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double a = m(i, 0), b = m(i, 1);
    out(i, 0) = std::cos(theta) * a - std::sin(theta) * b;
    out(i, 1) = std::sin(theta) * a + std::cos(theta) * b;
  }
  std::vector<double> shift(m.cols());
  for (double &s : shift)
    s = u(rng);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c)
      out(i, c) += shift[c];
  return out;
}

} // namespace

TEST_CASE("identical clouds give S = 1 for every k") {
  const Matrix m = oracle::random_matrix(40, 5, 1);
  TopoOptions opts;
  opts.k_max = 39;
  const auto r = topo_similarity(cloud(m), cloud(m), opts);
  for (double s : r.curve)
    CHECK(s == 1.0);
  CHECK(r.s_max == 1.0);
  CHECK(r.k_at_max == 1);
}

TEST_CASE("curve equals the set-intersection oracle") {
  for (std::uint64_t seed = 0; seed < 8; ++seed)
    for (bool self : {false, true}) {
      const Matrix a = oracle::random_matrix(30, 4, seed);
      const Matrix b = oracle::random_matrix(30, 4, seed + 100);
      TopoOptions opts;
      opts.metric = Metric::Euclidean;
      opts.include_self = self;
      opts.k_max = 12;
      const auto r = topo_similarity(cloud(a), cloud(b), opts);
      const auto da = oracle::naive_euclidean(a), db = oracle::naive_euclidean(b);
      const auto na = oracle::knn_full_sort(da, 12, self), nb = oracle::knn_full_sort(db, 12, self);
      for (std::size_t k = 1; k <= 12; ++k)
        CHECK(r.at(k) == doctest::Approx(oracle::overlap_curve_point(na, nb, k)).epsilon(1e-14));
    }
}

TEST_CASE("symmetry and isometry invariance") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = oracle::random_matrix(25, 3, seed);
    const Matrix b = oracle::random_matrix(25, 3, seed + 1000);
    TopoOptions opts;
    opts.metric = Metric::Euclidean;
    const auto ab = topo_similarity(cloud(a), cloud(b), opts);
    const auto ba = topo_similarity(cloud(b), cloud(a), opts);
    CHECK(ab.curve == ba.curve);
    const auto moved = topo_similarity(cloud(isometry(a, seed)), cloud(b), opts);
    for (std::size_t i = 0; i < ab.curve.size(); ++i)
      CHECK(moved.curve[i] == doctest::Approx(ab.curve[i]).epsilon(1e-12));
  }
}

TEST_CASE("include_self forces S_1 = 1 and S_k >= 1/k") {
  const Matrix a = oracle::random_matrix(30, 4, 7), b = oracle::random_matrix(30, 4, 8);
  TopoOptions opts;
  opts.include_self = true;
  opts.k_max = 20;
  const auto r = topo_similarity(cloud(a), cloud(b), opts);
  CHECK(r.at(1) == 1.0);
  for (std::size_t k = 1; k <= 20; ++k)
    CHECK(r.at(k) >= 1.0 / static_cast<double>(k) - 1e-15);
}

TEST_CASE("independent clouds sit near the k/(n-1) baseline") {
  const std::size_t n = 60, k = 6;
  double mean = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    TopoOptions opts;
    opts.k_max = k;
    const auto r = topo_similarity(cloud(oracle::random_matrix(n, 8, 2 * s)),
                                   cloud(oracle::random_matrix(n, 8, 2 * s + 1)), opts);
    mean += r.at(k) / seeds;
  }
  CHECK(mean == doctest::Approx(double(k) / double(n - 1)).epsilon(0.25));
}

TEST_CASE("default k range and validation") {
  TopoOptions opts;
  CHECK(resolve_k_range(50, opts).max == 8);
  CHECK(resolve_k_range(4, opts).max == 2);
  CHECK(resolve_k_range(2, opts).max == 1);
  opts.k_max = 50;
  CHECK_THROWS_AS(resolve_k_range(50, opts), ValidationError);
  opts.include_self = true;
  CHECK(resolve_k_range(50, opts).max == 50);
  opts.k_min = 0;
  CHECK_THROWS_AS(resolve_k_range(50, opts), ValidationError);
}

TEST_CASE("misaligned ids are rejected") {
  const Matrix m = oracle::random_matrix(5, 2, 1);
  const EmbeddingSet a(Role::AudioUnimodal, {"a", "b", "c", "d", "e"}, m);
  const EmbeddingSet b(Role::AudioCrossModal, {"a", "b", "c", "e", "d"}, m);
  CHECK_THROWS_AS(topo_similarity(a, b, TopoOptions{}), ValidationError);
}

TEST_CASE("ties in the max go to the smaller k") {
  const Matrix m = oracle::random_matrix(20, 3, 4);
  TopoOptions opts;
  opts.k_min = 2;
  opts.k_max = 6;
  const auto r = topo_similarity(cloud(m), cloud(m), opts);
  CHECK(r.k_at_max == 2);
  CHECK(r.curve.size() == 5);
}

TEST_CASE("compare_all_spaces aligns centroids with class text by label") {
  const Matrix audio(6, 2, {1, 0, 1.1, 0.1, 0, 1, 0.1, 1.1, -1, 0, -1.1, -0.1});
  const std::vector<std::string> labels{"Dog", "Dog", "cat", "cat", "Bird", "Bird"};
  const EmbeddingSet x_a(Role::AudioUnimodal, oracle::ids(6), audio, labels);
  const EmbeddingSet e_a(Role::AudioCrossModal, oracle::ids(6), audio, labels);
  // Text rows listed in a different order from the centroid order.
  const EmbeddingSet e_t(Role::TextCrossModal, {"cat", "dog", "bird"},
                         Matrix(3, 2, {0, 1, 1, 0, -1, 0}));
  const EmbeddingSet x_t(Role::TextUnimodal, {"cat", "dog", "bird"},
                         Matrix(3, 2, {0, 1, 1, 0, -1, 0}));
  const auto cmp = compare_all_spaces(x_a, e_a, x_t, e_t, TopoOptions{});
  CHECK(cmp.audio.s_max == 1.0);
  CHECK(cmp.text.s_max == 1.0);
  CHECK(cmp.cross_modal.s_max == 1.0);

  const EmbeddingSet wrong(Role::TextCrossModal, {"cat", "dog", "fish"},
                           Matrix(3, 2, {0, 1, 1, 0, -1, 0}));
  CHECK_THROWS_AS(compare_all_spaces(x_a, e_a, x_t, wrong, TopoOptions{}), ValidationError);
}

TEST_CASE("curve csv has a header and one line per k") {
  const Matrix m = oracle::random_matrix(10, 2, 3);
  TopoOptions opts;
  opts.k_max = 3;
  const auto csv = curve_csv(topo_similarity(cloud(m), cloud(m), opts));
  CHECK(csv.rfind("k,S_k\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
}
