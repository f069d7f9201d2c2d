#include "leakscope/error.hpp"
#include "leakscope/geometry.hpp"
#include "leakscope/scatter_svg.hpp"
#include "leakscope/silhouette.hpp"
#include "leakscope/synth.hpp"
#include "leakscope/tsne.hpp"
#include "oracles.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace leakscope;

TEST_CASE("calibrated rows hit the target perplexity") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (double perplexity : {2.0, 5.0, 15.0, 30.0}) {
    std::vector<double> d(60);
    for (double &x : d)
      x = u(rng);
    const auto row = tsne::perplexity_calibration(d, perplexity);
    CHECK(row.converged);
    double sum = 0;
    for (double p : row.probabilities)
      sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(oracle::shannon_bits(row.probabilities) == doctest::Approx(row.entropy_bits).epsilon(1e-9));
    CHECK(std::abs(row.entropy_bits - std::log2(perplexity)) < tsne::kEntropyTolerance);
    // Probabilities follow the Gaussian kernel with the reported sigma;
    // compare the two nearest entries, which never underflow.
    std::vector<std::size_t> order(d.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return d[a] < d[b]; });
    const std::size_t i0 = order[0], i1 = order[1];
    const double ratio = row.probabilities[i1] / row.probabilities[i0];
    const double want =
        std::exp(-(d[i1] * d[i1] - d[i0] * d[i0]) / (2.0 * row.sigma * row.sigma));
    CHECK(ratio == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("equal distances give a uniform row") {
  const std::vector<double> d(9, 1.5);
  const auto row = tsne::perplexity_calibration(d, 9.0);
  for (double p : row.probabilities)
    CHECK(p == doctest::Approx(1.0 / 9.0));
  CHECK(row.converged);
}

TEST_CASE("unreachable perplexity is reported, not hidden") {
  const std::vector<double> d{1.0, 2.0, 3.0};
  const auto row = tsne::perplexity_calibration(d, 10.0);
  CHECK_FALSE(row.converged);
  CHECK(row.steps == tsne::kMaxBisectionSteps);
}

TEST_CASE("joint probabilities are symmetric and sum to one") {
  const auto dm = pairwise_divergence(oracle::random_matrix(30, 5, 2), Metric::Euclidean);
  const auto aff = tsne::joint_probabilities(dm, 8.0);
  double sum = 0;
  for (std::size_t i = 0; i < 30; ++i) {
    CHECK(aff.joint(i, i) == 0.0);
    for (std::size_t j = 0; j < 30; ++j) {
      CHECK(aff.joint(i, j) == aff.joint(j, i));
      sum += aff.joint(i, j);
    }
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(aff.unconverged.empty());
}

TEST_CASE("KL matches the direct formula and its gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix p = oracle::random_joint(10, seed);
    const Matrix y = oracle::random_matrix(10, 2, seed + 7);
    CHECK(tsne::kl_divergence(p, y) == doctest::Approx(oracle::tsne_kl(p, y)).epsilon(1e-12));
    const Matrix g = tsne::kl_gradient(p, y);
    const Matrix fd = oracle::tsne_kl_fd_gradient(p, y);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < g.data().size(); ++i) {
      num += (g.data()[i] - fd.data()[i]) * (g.data()[i] - fd.data()[i]);
      den += fd.data()[i] * fd.data()[i];
    }
    CHECK(std::sqrt(num / den) < 1e-4);
  }
}

TEST_CASE("embedding separates well-separated clusters") {
  synth::ClusterSpec spec;
  spec.n_classes = 3;
  spec.points_per_class = 25;
  spec.dim = 5;
  spec.separation = 10.0;
  spec.seed = 3;
  const auto set = synth::gaussian_clusters(spec);
  tsne::Config cfg;
  cfg.input_metric = Metric::Euclidean;
  cfg.seed = 1;
  const auto res = tsne::run(set, cfg);
  REQUIRE(res.coords.rows() == set.size());
  REQUIRE(res.coords.cols() == 2);
  const double s =
      silhouette_score(pairwise_divergence(res.coords, Metric::Euclidean), *set.labels());
  CHECK(s > 0.5);

  REQUIRE(res.kl_trace.size() == 1000);
  for (double kl : res.kl_trace)
    CHECK(std::isfinite(kl));
  for (std::size_t i = res.kl_trace.size() - 100; i + 1 < res.kl_trace.size(); ++i)
    CHECK(res.kl_trace[i + 1] <= res.kl_trace[i] + 1e-3);
}

TEST_CASE("KL trace settles across seeds and metrics") {
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    for (Metric metric : {Metric::CosineDivergence, Metric::Euclidean}) {
      synth::ClusterSpec spec;
      spec.n_classes = 2 + seed;
      spec.points_per_class = 15;
      spec.dim = 8;
      spec.separation = 3.0 + 2.0 * static_cast<double>(seed);
      spec.seed = seed;
      tsne::Config cfg;
      cfg.input_metric = metric;
      cfg.seed = seed;
      const auto res = tsne::run(synth::gaussian_clusters(spec), cfg);
      for (double kl : res.kl_trace)
        CHECK(kl >= 0.0);
      for (std::size_t i = res.kl_trace.size() - 100; i + 1 < res.kl_trace.size(); ++i)
        CHECK(res.kl_trace[i + 1] <= res.kl_trace[i] + 1e-3);
    }
}

TEST_CASE("runs are deterministic per seed") {
  const auto dm = pairwise_divergence(oracle::random_matrix(20, 4, 9), Metric::CosineDivergence);
  tsne::Config cfg;
  cfg.iterations = 200;
  cfg.seed = 42;
  const auto a = tsne::run(dm, cfg);
  const auto b = tsne::run(dm, cfg);
  CHECK(a.coords == b.coords);
  CHECK(a.kl_trace == b.kl_trace);
  cfg.seed = 43;
  CHECK_FALSE(tsne::run(dm, cfg).coords == a.coords);
}

TEST_CASE("perplexity defaults and validation") {
  tsne::Config cfg;
  CHECK(tsne::resolve_perplexity(cfg, 1000) == 30.0);
  CHECK(tsne::resolve_perplexity(cfg, 31) == 10.0);
  CHECK(tsne::resolve_perplexity(cfg, 5) == 2.0);
  CHECK_NOTHROW(tsne::validate(cfg, 4));
  CHECK_THROWS_AS(tsne::validate(cfg, 3), ValidationError);
  cfg.perplexity = 10.0;
  CHECK_THROWS_AS(tsne::validate(cfg, 11), ValidationError);
  CHECK_NOTHROW(tsne::validate(cfg, 12));
}

namespace {

namespace pt = boost::property_tree;

std::size_t count_children(const pt::ptree &node, const std::string &name) {
  std::size_t n = 0;
  for (const auto &child : node)
    n += child.first == name;
  return n;
}

} // namespace

TEST_CASE("scatter svg is well-formed with one circle per point and a legend") {
  const Matrix coords = oracle::random_matrix(12, 2, 1);
  std::vector<std::string> labels;
  for (int i = 0; i < 12; ++i)
    labels.push_back(i % 3 == 0 ? "a & b" : (i % 3 == 1 ? "<c>" : "d\"e"));
  const std::string svg = scatter_svg(coords, labels, "t-SNE <E_a>");
  std::istringstream in(svg);
  pt::ptree tree;
  REQUIRE_NOTHROW(pt::read_xml(in, tree));
  const auto &root = tree.get_child("svg");
  const auto &plot = root.get_child("svg");
  CHECK(count_children(plot, "circle") == 12);
  std::size_t legends = 0, entries = 0;
  for (const auto &child : root)
    if (child.first == "g" && child.second.get<std::string>("<xmlattr>.class", "") == "legend") {
      ++legends;
      entries = count_children(child.second, "g");
    }
  CHECK(legends == 1);
  CHECK(entries == 3);
  CHECK(svg.find("a &amp; b") != std::string::npos);
  CHECK(svg.find("&lt;c&gt;") != std::string::npos);
}

TEST_CASE("scatter svg without labels has no legend and is deterministic") {
  const Matrix coords = oracle::random_matrix(5, 2, 2);
  const auto a = scatter_svg(coords, {});
  CHECK(a == scatter_svg(coords, {}));
  CHECK(a.find("legend") == std::string::npos);
  const auto csv = coords_csv(coords, oracle::ids(5), {});
  CHECK(csv.rfind("id,x,y,label\n", 0) == 0);
}
