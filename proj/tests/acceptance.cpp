// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include "leakscope/correlation.hpp"
#include "leakscope/experiment.hpp"
#include "leakscope/geometry.hpp"
#include "leakscope/leakage_filter.hpp"
#include "leakscope/npy.hpp"
#include "leakscope/silhouette.hpp"
#include "leakscope/synth.hpp"
#include "leakscope/synth_grid.hpp"
#include "leakscope/topo_similarity.hpp"
#include "leakscope/tsne.hpp"
#include "leakscope/zero_shot.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace leakscope;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failed sub-checks; the first few are kept for the summary line.
struct Checker {
  Outcome out;
  std::size_t failures = 0;

  void expect(bool ok, const std::string &what) {
    if (ok)
      return;
    out.pass = false;
    if (++failures <= 3)
      out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
  Outcome done(const std::string &summary) {
    if (failures > 3)
      out.detail += "; +" + std::to_string(failures - 3) + " more";
    if (out.pass)
      out.detail = summary;
    return out;
  }
};

std::string fmt(const char *f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

int g_failed = 0;

void criterion(int id, const char *name, double budget_s, const std::function<Outcome()> &fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception &e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s) {
    o.pass = false;
    o.detail += fmt(" (over the %.0f s budget)", budget_s);
  }
  if (!o.pass)
    ++g_failed;
  std::printf("%s  %d. %-32s %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

const std::vector<double> kAccuracy{0.73, 0.61, 0.31, 0.48, 0.40, 0.14};
const std::vector<double> kSilhouetteEa{0.34, 0.20, 0.08, 0.14, 0.15, -0.05};
const std::vector<double> kTopoEaEt{0.46, 0.47, 0.44, 0.50, 0.45, 0.38};

Outcome correlation_reproduction() {
  Checker c;
  const double rho = stats::pearson(kAccuracy, kSilhouetteEa);
  const double p = stats::pearson_p_value(rho, kAccuracy.size());
  c.expect(std::abs(rho - 0.97) <= 0.005, fmt("rho=%.5f not within 0.97+-0.005", rho));
  c.expect(p < 1e-2, fmt("p=%.5f not < 0.01", p));
  return c.done(fmt("rho=%.4f p=%.5f", rho, p));
}

Outcome log_correlation_reproduction() {
  Checker c;
  const double rho = stats::pearson(stats::log_transform(kAccuracy), kTopoEaEt);
  const double p = stats::pearson_p_value(rho, kAccuracy.size());
  c.expect(std::abs(rho - 0.85) <= 0.01, fmt("rho=%.5f not within 0.85+-0.01", rho));
  c.expect(p >= 0.025 && p <= 0.045, fmt("p=%.5f outside [0.025, 0.045]", p));
  return c.done(fmt("rho=%.4f p=%.4f", rho, p));
}

EmbeddingSet random_unit_set(Role role, std::vector<std::string> ids, std::size_t dim,
                             std::uint64_t seed, std::optional<std::vector<std::string>> labels) {
  const std::size_t n = ids.size();
  return l2_normalize(EmbeddingSet(role, std::move(ids), oracle::random_matrix(n, dim, seed),
                                   std::move(labels)));
}

Outcome random_guess_baseline() {
  Checker c;
  const std::size_t n_classes = 50, n_items = 2000, dim = 128, seeds = 20;
  std::vector<std::string> classes, labels;
  for (std::size_t k = 0; k < n_classes; ++k)
    classes.push_back("class_" + std::to_string(k));
  for (std::size_t i = 0; i < n_items; ++i)
    labels.push_back(classes[i % n_classes]);
  double mean = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto audio = random_unit_set(Role::AudioCrossModal, oracle::ids(n_items), dim,
                                       1000 + 2 * s, labels);
    const auto text = random_unit_set(Role::TextCrossModal, classes, dim, 1001 + 2 * s, {});
    mean += evaluate(audio, text).accuracy / static_cast<double>(seeds);
  }
  const double p = 1.0 / static_cast<double>(n_classes);
  const double se = std::sqrt(p * (1 - p) / static_cast<double>(n_items * seeds));
  c.expect(std::abs(mean - p) <= 3 * se, fmt("accuracy %.5f, |diff| > 3 SE (%.5f)", mean, se));
  return c.done(fmt("accuracy %.5f vs 0.02, %.2f SE", mean, std::abs(mean - p) / se));
}

Outcome silhouette_oracle() {
  Checker c;
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng() % 191;
    const std::size_t clusters = 2 + rng() % 9;
    std::vector<std::string> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = "c" + std::to_string(i < clusters ? i : rng() % clusters);
    const Metric metric = trial % 2 ? Metric::Euclidean : Metric::CosineDivergence;
    const auto dm = pairwise_divergence(oracle::random_matrix(n, 2 + rng() % 6, rng()), metric);
    const auto got = silhouette_samples(dm, labels);
    const auto want = oracle::silhouette_by_definition(dm.values, labels);
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      worst = std::max(worst, std::abs(got[i] - want[i]));
      c.expect(got[i] >= -1.0 && got[i] <= 1.0, "sample outside [-1, 1]");
      mean += got[i] / static_cast<double>(n);
    }
    auto scaled = dm;
    for (double &x : scaled.values.data())
      x *= 0.37 + trial;
    const double s = silhouette_score(scaled, labels);
    c.expect(std::abs(s - mean) <= 1e-12, fmt("scaling changed the score by %.3g", s - mean));
  }
  c.expect(worst <= 1e-12, fmt("max deviation from oracle %.3g", worst));
  return c.done(fmt("50 instances, max |diff| %.2g", worst));
}

Outcome topology_laws() {
  Checker c;
  auto cloud = [](const Matrix &m) { return EmbeddingSet(Role::AudioUnimodal, oracle::ids(m.rows()), m); };

  // Identical clouds.
  {
    const Matrix m = oracle::random_matrix(80, 6, 1);
    TopoOptions o;
    o.k_max = 40;
    const auto r = topo_similarity(cloud(m), cloud(m), o);
    c.expect(r.s_max == 1.0, "identical clouds: S != 1");
    for (double s : r.curve)
      c.expect(s == 1.0, "identical clouds: some S_k != 1");
  }

  // Independent clouds against k/(n-1), per k, over 20 seeds.
  const std::size_t n = 100, k_max = 10, seeds = 20;
  double worst_z = 0.0;
  {
    std::vector<std::vector<double>> per_k(k_max);
    for (std::size_t s = 0; s < seeds; ++s) {
      TopoOptions o;
      o.k_max = k_max;
      const auto r = topo_similarity(cloud(oracle::random_matrix(n, 10, 500 + 2 * s)),
                                     cloud(oracle::random_matrix(n, 10, 501 + 2 * s)), o);
      for (std::size_t k = 1; k <= k_max; ++k)
        per_k[k - 1].push_back(r.at(k));
    }
    for (std::size_t k = 1; k <= k_max; ++k) {
      const auto &v = per_k[k - 1];
      double mean = 0, var = 0;
      for (double x : v)
        mean += x / seeds;
      for (double x : v)
        var += (x - mean) * (x - mean) / (seeds - 1);
      const double se = std::sqrt(var / seeds);
      const double expected = double(k) / double(n - 1);
      const double z = std::abs(mean - expected) / se;
      worst_z = std::max(worst_z, z);
      c.expect(z <= 5.0, fmt("k=%.0f: mean %.4f vs %.4f (%.1f SE)", double(k), mean, expected, z));
    }
  }

  // include_self, symmetry and isometry on 20 random instances.
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Matrix a = oracle::random_matrix(40, 3, 900 + s), b = oracle::random_matrix(40, 3, 950 + s);
    TopoOptions self;
    self.include_self = true;
    self.k_max = 20;
    const auto r = topo_similarity(cloud(a), cloud(b), self);
    c.expect(r.at(1) == 1.0, "include_self: S_1 != 1");
    for (std::size_t k = 1; k <= 20; ++k)
      c.expect(r.at(k) >= 1.0 / double(k) - 1e-15, "include_self: S_k < 1/k");

    TopoOptions euc;
    euc.metric = Metric::Euclidean;
    euc.k_max = 12;
    const auto ab = topo_similarity(cloud(a), cloud(b), euc);
    const auto ba = topo_similarity(cloud(b), cloud(a), euc);
    c.expect(ab.curve == ba.curve, "symmetry violated");

    // Rotation about the z axis, reflection of x, then a translation.
    std::mt19937_64 rng(s);
    std::uniform_real_distribution<double> u(-5, 5);
    const double th = u(rng), tx = u(rng), ty = u(rng), tz = u(rng);
    Matrix moved = a;
    for (std::size_t i = 0; i < a.rows(); ++i) {
      moved(i, 0) = -(std::cos(th) * a(i, 0) - std::sin(th) * a(i, 1)) + tx;
      moved(i, 1) = std::sin(th) * a(i, 0) + std::cos(th) * a(i, 1) + ty;
      moved(i, 2) = a(i, 2) + tz;
    }
    const auto mb = topo_similarity(cloud(moved), cloud(b), euc);
    for (std::size_t i = 0; i < ab.curve.size(); ++i)
      c.expect(std::abs(mb.curve[i] - ab.curve[i]) <= 1e-12, "isometry changed S_k");
  }
  return c.done(fmt("baseline worst %.2f SE; self, symmetry, isometry on 20 instances", worst_z));
}

Outcome tsne_checks() {
  Checker c;
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Matrix p = oracle::random_joint(10, 70 + s);
    const Matrix y = oracle::random_matrix(10, 2, 80 + s);
    const Matrix g = tsne::kl_gradient(p, y, 1.0);
    const Matrix fd = oracle::tsne_kl_fd_gradient(p, y);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < g.data().size(); ++i) {
      num += (g.data()[i] - fd.data()[i]) * (g.data()[i] - fd.data()[i]);
      den += fd.data()[i] * fd.data()[i];
    }
    worst = std::max(worst, std::sqrt(num / den));
  }
  c.expect(worst <= 1e-4, fmt("gradient relative error %.3g", worst));

  synth::ClusterSpec spec;
  spec.n_classes = 3;
  spec.points_per_class = 30;
  spec.dim = 10;
  spec.separation = 10.0;
  spec.seed = 7;
  const auto set = synth::gaussian_clusters(spec);
  tsne::Config cfg;
  cfg.seed = 7;
  cfg.input_metric = Metric::Euclidean;
  const auto res = tsne::run(set, cfg);
  double worst_rise = 0.0;
  for (double kl : res.kl_trace)
    c.expect(std::isfinite(kl), "non-finite KL in trace");
  for (std::size_t i = res.kl_trace.size() - 100; i + 1 < res.kl_trace.size(); ++i)
    worst_rise = std::max(worst_rise, res.kl_trace[i + 1] - res.kl_trace[i]);
  c.expect(worst_rise <= 1e-3, fmt("KL rose by %.3g in the final 100 steps", worst_rise));
  const double sil =
      silhouette_score(pairwise_divergence(res.coords, Metric::Euclidean), *set.labels());
  c.expect(sil > 0.5, fmt("projection silhouette %.3f", sil));
  return c.done(fmt("grad rel err %.2g, final-100 max KL rise %.2g, silhouette %.3f", worst,
                    worst_rise, sil));
}

Outcome leakage_contract() {
  Checker c;
  auto cap = [](std::string id, std::string text) {
    return ItemRecord{std::move(id), "", std::move(text), std::nullopt};
  };
  const std::vector<ItemRecord> corpus{
      cap("a1", "Someone knocks on a wooden door"), cap("a1", "A person taps on wood"),
      cap("a1", "tapping sounds"),                  cap("a2", "Rain on a tin roof"),
      cap("a3", "a dog barking far away"),          cap("a3", "distant barks"),
      cap("a4", "door creaks open slowly"),         cap("a5", "children at play"),
      cap("a6", "KNOCK knock, who is there"),       cap("a7", "glass shatters on tiles")};
  const FilterOptions opts;

  const auto words = class_word_set({"door wood knock"}, opts);
  c.expect(words == WordSet{"door", "knock", "wood"}, "multi-word label split");

  const auto rep = filter_dataset(corpus, {"door wood knock"}, opts);
  std::vector<std::string> removed_ids;
  for (const auto &r : rep.removed)
    removed_ids.push_back(r.record.id);
  c.expect(removed_ids == std::vector<std::string>{"a1", "a1", "a1", "a4", "a6"},
           "audio-id removal set");
  c.expect(rep.removed_audio_ids == 3, "removed audio id count");
  for (const auto &k : rep.kept)
    for (const auto &r : rep.removed)
      c.expect(k.id != r.record.id, "an audio id is split between kept and removed");

  const std::vector<std::vector<std::string>> word_sets{
      {"dog"}, {"dog", "rain"}, {"dog", "rain", "door wood knock"},
      {"dog", "rain", "door wood knock", "glass"}};
  std::size_t previous_kept = corpus.size() + 1;
  std::vector<ItemRecord> previous;
  for (const auto &classes : word_sets) {
    const auto r = filter_dataset(corpus, classes, opts);
    const auto again = filter_dataset(r.kept, classes, opts);
    c.expect(again.kept == r.kept && again.removed.empty(), "not idempotent");
    c.expect(r.kept.size() <= previous_kept, "kept set grew with more class words");
    for (const auto &k : r.kept)
      c.expect(previous.empty() || std::find(previous.begin(), previous.end(), k) != previous.end(),
               "kept record not kept under a smaller word set");
    previous = r.kept;
    previous_kept = r.kept.size();
  }
  return c.done("idempotent, monotone, audio-id removal on 10 captions / 7 audio ids");
}

synth::ClusterSpec emulation_spec() {
  synth::ClusterSpec spec;
  spec.n_classes = 10;
  spec.points_per_class = 20;
  spec.dim = 16;
  spec.separation = 10.0;
  spec.seed = 1;
  return spec;
}

const std::vector<double> kLeaks{0.5, 0.4, 0.3, 0.2, 0.1, 0.0};

std::filesystem::path scratch(const std::string &name) {
  auto p = std::filesystem::path(LEAKSCOPE_TEST_SCRATCH) / name;
  std::filesystem::remove_all(p);
  return p;
}

Outcome end_to_end_emulation() {
  Checker c;
  const auto cfg_path = report::write_synth_grid(emulation_spec(), kLeaks, scratch("acc_emulation"),
                                                 {{"seed", 1}, {"tsne", {{"enabled", false}}}});
  const auto rep = report::run_grid(report::load_grid_config(cfg_path));
  c.expect(!rep.has_failures(), "an experiment failed");
  const report::Correlation *corr = nullptr;
  for (const auto &k : rep.correlations)
    if (k.x_description == "zero-shot accuracy")
      corr = &k;
  c.expect(corr != nullptr, "accuracy-vs-silhouette correlation missing");
  if (!corr)
    return c.done("");
  c.expect(corr->rho > 0.9, fmt("rho=%.4f", corr->rho));
  std::string accs;
  for (const auto &o : rep.experiments)
    if (o.report)
      accs += fmt("%.2f ", o.report->zero_shot.accuracy);
  return c.done(fmt("rho=%.4f p=%.2g over 6 leak strengths; accuracy ", corr->rho, corr->p) + accs);
}

Outcome io_bit_exactness() {
  Checker c;
  Matrix m = oracle::random_matrix(64, 33, 3, 1e3);
  m(0, 0) = -0.0;
  m(1, 0) = std::numeric_limits<double>::denorm_min();
  m(2, 0) = std::numeric_limits<double>::quiet_NaN();
  m(3, 0) = std::numeric_limits<double>::infinity();
  const auto dir = scratch("acc_io");
  npy::write(m, dir / "m.npy");
  const Matrix back = npy::read(dir / "m.npy");
  c.expect(back.rows() == m.rows() && back.cols() == m.cols() &&
               std::memcmp(back.data().data(), m.data().data(), m.data().size() * 8) == 0,
           "npy round trip not bit-identical");
  c.expect(npy::encode(back) == npy::encode(m), "re-encoding differs");

  auto run_once = [&](const std::string &name) {
    const auto path = report::write_synth_grid(emulation_spec(), {1.0, 0.3, 0.0}, scratch(name),
                                               {{"seed", 4}, {"tsne", {{"iterations", 200}}}});
    auto cfg = report::load_grid_config(path);
    cfg.options.out_dir = scratch("acc_io_out");
    const auto rep = report::run_grid(cfg);
    std::string blob = report::to_json(rep).dump() + report::to_markdown(rep);
    for (const auto &o : rep.experiments)
      if (o.report)
        for (const auto &[role, file] : o.report->tsne_outputs) {
          std::ifstream in(file, std::ios::binary);
          std::ostringstream os;
          os << in.rdbuf();
          blob += os.str();
        }
    return blob;
  };
  const auto a = run_once("acc_io_grid_a"), b = run_once("acc_io_grid_b");
  c.expect(a == b, "grid outputs differ between identical runs");
  return c.done(fmt("npy round trip bit-identical; grid JSON+Markdown+SVG identical (%.0f bytes)",
                    double(a.size())));
}

} // namespace

int main() {
  criterion(1, "correlation reproduction", 1, correlation_reproduction);
  criterion(2, "log-correlation reproduction", 1, log_correlation_reproduction);
  criterion(3, "random-guess baseline", 10, random_guess_baseline);
  criterion(4, "silhouette oracle equivalence", 30, silhouette_oracle);
  criterion(5, "topological-similarity laws", 30, topology_laws);
  criterion(6, "t-SNE gradient check", 120, tsne_checks);
  criterion(7, "leakage-filter contract", 5, leakage_contract);
  criterion(8, "end-to-end leakage emulation", 60, end_to_end_emulation);
  criterion(9, "I/O bit-exactness", 60, io_bit_exactness);
  std::printf("%d of 9 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
