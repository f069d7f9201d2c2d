#include "leakscope/correlation.hpp"
#include "leakscope/error.hpp"
#include "leakscope/experiment.hpp"
#include "leakscope/synth_grid.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <regex>

using namespace leakscope;
using namespace leakscope::report;
using nlohmann::json;
using testing_support::scratch;
using testing_support::slurp;
using testing_support::spit;

namespace {

const std::filesystem::path kData = std::filesystem::path(LEAKSCOPE_SOURCE_DIR) / "data";

synth::ClusterSpec small_spec() {
  synth::ClusterSpec spec;
  spec.n_classes = 4;
  spec.points_per_class = 12;
  spec.dim = 6;
  spec.seed = 5;
  return spec;
}

GridConfig synth_config(const std::string &name, const std::vector<double> &leaks,
                        bool with_tsne = false) {
  const auto dir = scratch(name);
  json options = {{"seed", 9}, {"out_dir", "out"}};
  options["tsne"] = with_tsne ? json{{"iterations", 150}} : json{{"enabled", false}};
  return load_grid_config(write_synth_grid(small_spec(), leaks, dir, options));
}

const Correlation *find_corr(const GridReport &r, const std::string &x) {
  for (const auto &c : r.correlations)
    if (c.x_description == x)
      return &c;
  return nullptr;
}

} // namespace

TEST_CASE("reference override reproduces the published correlations") {
  for (const char *name : {"reference_grid.json", "reference_grid.toml"}) {
    const auto rep = run_grid(load_grid_config(kData / name));
    CHECK_FALSE(rep.has_failures());
    const auto *sil = find_corr(rep, "zero-shot accuracy");
    const auto *topo = find_corr(rep, "ln zero-shot accuracy");
    REQUIRE(sil);
    REQUIRE(topo);
    CHECK(std::abs(sil->rho - 0.97) <= 0.005);
    CHECK(sil->p < 0.01);
    CHECK(std::abs(topo->rho - 0.85) <= 0.01);
    CHECK(topo->p >= 0.025);
    CHECK(topo->p <= 0.045);
    REQUIRE(rep.random_guess);
    CHECK(*rep.random_guess == doctest::Approx(0.02));
  }
}

TEST_CASE("markdown tables use exactly two decimals and the grid layout") {
  const auto md = to_markdown(run_grid(load_grid_config(kData / "reference_grid.json")));
  CHECK(md.find("| dirty | 0.73 | 0.61 | 0.31 |") != std::string::npos);
  CHECK(md.find("| clean | 0.48 | 0.40 | 0.14 |") != std::string::npos);
  CHECK(md.find("| Random guess | | | 0.02 |") != std::string::npos);
  CHECK(md.find("| clean | E_a | 0.14 | 0.15 | -0.05 |") != std::string::npos);
  CHECK(md.find("| E_a vs E_t | clean | 0.50 | 0.45 | 0.38 |") != std::string::npos);
  // Every number inside a table cell has two decimals.
  const std::regex cell(R"(\|\s*(-?[0-9][0-9.]*)\s*(?=\|))");
  std::size_t cells = 0;
  for (std::sregex_iterator it(md.begin(), md.end(), cell), end; it != end; ++it, ++cells)
    CHECK(std::regex_match((*it)[1].str(), std::regex(R"(-?[0-9]+\.[0-9]{2})")));
  CHECK(cells == 6 + 1 + 12 + 18);
}

TEST_CASE("json report round-trips and its correlations recompute from its own numbers") {
  const auto rep = run_grid(load_grid_config(kData / "reference_grid.json"));
  const std::string text = to_json(rep).dump(2);
  const json doc = json::parse(text);
  CHECK(doc.dump(2) == text);
  CHECK(doc["schema"] == "leakscope.grid_report/1");
  std::vector<double> acc, sil, topo;
  for (const auto &e : doc["experiments"]) {
    acc.push_back(e["report"]["zero_shot"]["accuracy"].get<double>());
    sil.push_back(e["report"]["silhouettes"]["E_a"].get<double>());
    topo.push_back(e["report"]["topo"]["E_a_vs_E_t"]["s_max"].get<double>());
  }
  const auto &c = doc["correlations"];
  REQUIRE(c.size() == 2);
  CHECK(c[0]["rho"].get<double>() == stats::pearson(acc, sil));
  CHECK(c[1]["rho"].get<double>() == stats::pearson(stats::log_transform(acc), topo));
  CHECK(c[0]["p"].get<double>() == stats::pearson_p_value(stats::pearson(acc, sil), 6));
}

TEST_CASE("a single-experiment grid still emits tables but no correlations") {
  auto cfg = synth_config("single_grid", {1.0});
  const auto rep = run_grid(cfg);
  CHECK(rep.correlations.empty());
  CHECK_FALSE(rep.notes.empty());
  const auto md = to_markdown(rep);
  CHECK(md.find("## Zero-shot accuracy") != std::string::npos);
  CHECK(md.find("| dirty | 1.00 | n/a | n/a |") != std::string::npos);
}

TEST_CASE("full leak gives near-perfect zero-shot accuracy") {
  auto cfg = synth_config("full_leak", {1.0});
  const auto r = run_experiment(cfg.experiments.front(), cfg.options);
  CHECK(r.zero_shot.accuracy > 0.95);
  for (const auto &[role, s] : r.silhouettes) {
    CHECK(s >= -1.0);
    CHECK(s <= 1.0);
  }
  CHECK(r.topo.size() == 3);
  for (const auto &[key, t] : r.topo) {
    CHECK(t.s_max >= 0.0);
    CHECK(t.s_max <= 1.0);
  }
}

TEST_CASE("a spec without E_t fails validation before any file is touched") {
  ExperimentSpec spec;
  spec.name = "broken";
  for (Role r : {Role::AudioUnimodal, Role::AudioCrossModal, Role::TextUnimodal})
    spec.paths[r] = {"/nonexistent/m.npy", "/nonexistent/m.jsonl"};
  CHECK_THROWS_AS(run_experiment(spec, AuditOptions{}), ValidationError);
  json doc = {{"experiments",
               {{{"name", "a"},
                 {"training", "dirty"},
                 {"pretraining", "none"},
                 {"paths", {{"x_a", {{"matrix", "m"}, {"manifest", "n"}}}}}}}}};
  CHECK_THROWS_AS(parse_grid_config(doc, "."), ValidationError);
}

TEST_CASE("missing files surface as I/O errors naming the experiment") {
  ExperimentSpec spec;
  spec.name = "ghost";
  for (Role r : {Role::AudioUnimodal, Role::AudioCrossModal, Role::TextUnimodal,
                 Role::TextCrossModal})
    spec.paths[r] = {"/nonexistent/m.npy", "/nonexistent/m.jsonl"};
  try {
    run_experiment(spec, AuditOptions{});
    FAIL("expected an error");
  } catch (const IoError &e) {
    CHECK(std::string(e.what()).find("ghost") != std::string::npos);
  }
}

TEST_CASE("failed experiments are recorded and excluded from correlations") {
  auto cfg = synth_config("partial_grid", {1.0, 0.6, 0.3, 0.0});
  cfg.experiments[1].paths[Role::TextCrossModal].matrix = "/nonexistent/E_t.npy";
  const auto rep = run_grid(cfg);
  CHECK(rep.has_failures());
  CHECK(rep.experiments[1].error);
  CHECK_FALSE(rep.experiments[0].error);
  REQUIRE(rep.correlations.size() >= 1);
  CHECK(rep.correlations[0].n == 3);
  CHECK(to_markdown(rep).find("## Failed experiments") != std::string::npos);
  CHECK(to_json(rep)["experiments"][1]["status"] == "failed");
}

TEST_CASE("grid runs are byte-deterministic including plots") {
  auto run_once = [](const std::string &name) {
    auto cfg = synth_config(name, {1.0, 0.5, 0.0}, true);
    cfg.options.out_dir = std::filesystem::path(LEAKSCOPE_TEST_SCRATCH) / "determinism_out";
    std::filesystem::remove_all(cfg.options.out_dir);
    const auto rep = run_grid(cfg);
    REQUIRE_FALSE(rep.has_failures());
    std::string svgs;
    for (const auto &o : rep.experiments)
      for (const auto &[role, path] : o.report->tsne_outputs)
        svgs += slurp(path);
    return std::make_pair(to_json(rep).dump(), svgs);
  };
  const auto a = run_once("det_a");
  const auto b = run_once("det_b");
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK(a.second.find("<svg") != std::string::npos);
}

TEST_CASE("config parsing is strict") {
  const auto base = scratch("strict_config");
  auto grid_with = [&](json options) {
    return json{{"options", options},
                {"experiments", {{{"name", "a"}, {"training", "dirty"}, {"pretraining", "none"}}}},
                {"metrics_override", {{"experiments", {{"a", {{"accuracy", 0.5}}}}}}}};
  };
  CHECK_NOTHROW(parse_grid_config(grid_with(json::object()), base));
  CHECK_THROWS_AS(parse_grid_config(grid_with({{"metrc", "cosine"}}), base), ValidationError);
  CHECK_THROWS_AS(parse_grid_config(grid_with({{"metric", "manhattan"}}), base), ValidationError);
  CHECK_THROWS_AS(parse_grid_config(grid_with({{"topo", {{"kmax", 3}}}}), base), ValidationError);

  json dup = grid_with(json::object());
  dup["experiments"].push_back({{"name", "b"}, {"training", "dirty"}, {"pretraining", "none"}});
  dup["metrics_override"]["experiments"]["b"] = {{"accuracy", 0.1}};
  CHECK_THROWS_AS(parse_grid_config(dup, base), ValidationError);

  json bad_cond = grid_with(json::object());
  bad_cond["experiments"][0]["training"] = "muddy";
  CHECK_THROWS_AS(parse_grid_config(bad_cond, base), ValidationError);

  spit(base / "broken.toml", "[options\nmetric = 1\n");
  CHECK_THROWS_AS(load_grid_config(base / "broken.toml"), ValidationError);
  CHECK_THROWS_AS(load_grid_config(base / "absent.json"), IoError);
}

TEST_CASE("options echo into every report") {
  auto cfg = synth_config("echo", {1.0});
  cfg.options.topo.k_max = 2;
  const auto j = to_json(run_grid(cfg));
  CHECK(j["options"]["topo"]["k_max"] == 2);
  CHECK(j["options"]["metric"] == "cosine");
  CHECK(j["options"]["seed"] == 9);
}

TEST_CASE("safe names and formats") {
  CHECK(safe_name("dirty/clean") == "dirty_clean");
  CHECK(parse_format("markdown") == Format::Markdown);
  CHECK_THROWS_AS(parse_format("html"), ValidationError);
}
