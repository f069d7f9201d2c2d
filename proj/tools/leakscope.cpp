#include "file_util.hpp"
#include "leakscope/corpus.hpp"
#include "leakscope/error.hpp"
#include "leakscope/experiment.hpp"
#include "leakscope/geometry.hpp"
#include "leakscope/leakage_filter.hpp"
#include "leakscope/scatter_svg.hpp"
#include "leakscope/silhouette.hpp"
#include "leakscope/synth_grid.hpp"
#include "leakscope/topo_similarity.hpp"
#include "leakscope/tsne.hpp"
#include "leakscope/zero_shot.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace leakscope;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kPartialGrid = 2, kIo = 3 };

// Flags shared by most subcommands. Unset optionals leave config values alone.
struct Common {
  std::optional<std::string> metric;
  std::optional<std::size_t> k_max;
  bool include_self = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::string format = "json";
};

void add_common(CLI::App *cmd, Common &c) {
  cmd->add_option("--metric", c.metric, "Distance: cosine or euclidean")
      ->check(CLI::IsMember({"cosine", "euclidean"}));
  cmd->add_option("--k-max", c.k_max, "Largest neighborhood size for topological similarity");
  cmd->add_flag("--include-self", c.include_self, "Count each item as its own first neighbor");
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out-dir", c.out_dir, "Output directory");
  cmd->add_option("--format", c.format, "Report format: json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}));
}

void apply_common(const Common &c, report::AuditOptions &o) {
  if (c.metric) {
    o.metric = parse_metric(*c.metric);
    o.topo.metric = o.metric;
    o.tsne.config.input_metric = o.metric;
  }
  if (c.k_max)
    o.topo.k_max = *c.k_max;
  if (c.include_self)
    o.topo.include_self = true;
  if (c.seed) {
    o.seed = *c.seed;
    o.tsne.config.seed = *c.seed;
  }
  if (c.out_dir)
    o.out_dir = *c.out_dir;
}

Metric metric_of(const Common &c) { return c.metric ? parse_metric(*c.metric) : Metric::CosineDivergence; }
fs::path out_dir_of(const Common &c) { return c.out_dir ? fs::path(*c.out_dir) : fs::path("leakscope-out"); }

void print_json(const json &j) { std::cout << j.dump(2) << "\n"; }

report::GridReport single_report(const report::ExperimentSpec &spec, const report::AuditOptions &o,
                                 report::MetricsReport r) {
  report::GridReport g;
  g.options = o;
  if (!r.zero_shot.classes.empty())
    g.random_guess = 1.0 / static_cast<double>(r.zero_shot.classes.size());
  g.experiments.push_back({spec.name, spec.training, spec.pretraining, std::move(r), std::nullopt});
  g.correlations = report::grid_correlations(g.experiments, &g.notes);
  return g;
}

json parse_override_arg(const std::string &arg) {
  // Inline JSON or a path to a JSON file.
  const auto first = arg.find_first_not_of(" \t\r\n");
  const std::string text =
      first != std::string::npos && arg[first] == '{' ? arg : detail::read_text(arg);
  try {
    return json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError("metrics override: invalid JSON: " + std::string(e.what()));
  }
}

std::vector<double> parse_leaks(const std::vector<double> &leaks) {
  for (double l : leaks)
    if (!(l >= 0.0 && l <= 1.0))
      throw ValidationError("--leak values must lie in [0, 1]");
  return leaks;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Embedding-geometry audit for zero-shot audio classification leakage"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "leakscope 0.1.0");

  // audit ------------------------------------------------------------------
  Common audit_c;
  std::string audit_config;
  std::optional<std::string> audit_experiment;
  std::optional<std::string> audit_output;
  auto *audit = app.add_subcommand("audit", "Run every metric on one experiment");
  audit->add_option("--config", audit_config, "Config file (.json or .toml)")->required();
  audit->add_option("--experiment", audit_experiment, "Experiment name (default: the only one)");
  audit->add_option("-o,--output", audit_output, "Report path (default: stdout)");
  add_common(audit, audit_c);

  // grid -------------------------------------------------------------------
  Common grid_c;
  std::string grid_config;
  std::optional<std::string> grid_override;
  auto *grid = app.add_subcommand("grid", "Run the experiment grid and emit tables and correlations");
  grid->add_option("--config", grid_config, "Config file (.json or .toml)")->required();
  grid->add_option("--metrics-override", grid_override,
                   "JSON file or inline JSON replacing computed metrics per experiment");
  add_common(grid, grid_c);

  // filter-captions --------------------------------------------------------
  Common filter_c;
  std::string filter_manifest;
  std::vector<std::string> filter_classes;
  std::optional<std::string> filter_classes_file;
  bool filter_plural = false;
  bool filter_keep_case = false;
  auto *filter = app.add_subcommand("filter-captions",
                                    "Remove audio whose captions mention a class word");
  filter->add_option("--manifest", filter_manifest, "Caption manifest (.jsonl or .csv)")->required();
  filter->add_option("--class", filter_classes, "Class label (repeatable)");
  filter->add_option("--classes-file", filter_classes_file, "File with one class label per line");
  filter->add_flag("--strip-plural", filter_plural, "Match 'dogs' against 'dog'");
  filter->add_flag("--case-sensitive", filter_keep_case, "Do not lowercase tokens");
  add_common(filter, filter_c);

  // tsne -------------------------------------------------------------------
  Common tsne_c;
  std::string tsne_matrix, tsne_manifest, tsne_role = "E_a";
  std::optional<double> tsne_perplexity;
  int tsne_iterations = 1000;
  std::string tsne_title;
  auto *tsne_cmd = app.add_subcommand("tsne", "Project a labeled matrix to 2-D and draw it");
  tsne_cmd->add_option("--matrix", tsne_matrix, "Embedding matrix (.npy or .csv)")->required();
  tsne_cmd->add_option("--manifest", tsne_manifest, "Item manifest")->required();
  tsne_cmd->add_option("--role", tsne_role, "x_a, E_a, x_t or E_t");
  tsne_cmd->add_option("--perplexity", tsne_perplexity, "Effective neighborhood size");
  tsne_cmd->add_option("--iterations", tsne_iterations, "Gradient steps");
  tsne_cmd->add_option("--title", tsne_title, "Plot title");
  add_common(tsne_cmd, tsne_c);

  // silhouette -------------------------------------------------------------
  Common sil_c;
  std::string sil_matrix, sil_manifest;
  bool sil_samples = false;
  auto *sil = app.add_subcommand("silhouette", "Silhouette score of a labeled matrix");
  sil->add_option("--matrix", sil_matrix, "Embedding matrix (.npy or .csv)")->required();
  sil->add_option("--manifest", sil_manifest, "Item manifest with labels")->required();
  sil->add_flag("--samples", sil_samples, "Include per-item scores");
  add_common(sil, sil_c);

  // topo-sim ---------------------------------------------------------------
  Common topo_c;
  std::string topo_p_matrix, topo_p_manifest, topo_q_matrix, topo_q_manifest;
  std::size_t topo_k_min = 1;
  std::optional<std::string> topo_curve;
  auto *topo = app.add_subcommand("topo-sim", "Neighborhood-overlap similarity of two paired clouds");
  topo->add_option("--p-matrix", topo_p_matrix, "First cloud matrix")->required();
  topo->add_option("--p-manifest", topo_p_manifest, "First cloud manifest")->required();
  topo->add_option("--q-matrix", topo_q_matrix, "Second cloud matrix")->required();
  topo->add_option("--q-manifest", topo_q_manifest, "Second cloud manifest")->required();
  topo->add_option("--k-min", topo_k_min, "Smallest neighborhood size");
  topo->add_option("--curve-csv", topo_curve, "Write the S_k curve here");
  add_common(topo, topo_c);

  // zero-shot --------------------------------------------------------------
  Common zs_c;
  std::string zs_audio_matrix, zs_audio_manifest, zs_text_matrix, zs_text_manifest;
  auto *zs = app.add_subcommand("zero-shot", "Nearest-class-text accuracy and confusion matrix");
  zs->add_option("--audio-matrix", zs_audio_matrix, "Audio embeddings (E_a)")->required();
  zs->add_option("--audio-manifest", zs_audio_manifest, "Audio manifest with labels")->required();
  zs->add_option("--text-matrix", zs_text_matrix, "Class text embeddings (E_t)")->required();
  zs->add_option("--text-manifest", zs_text_manifest, "Class manifest; ids are class names")
      ->required();
  add_common(zs, zs_c);

  // synth ------------------------------------------------------------------
  Common synth_c;
  synth::ClusterSpec synth_spec;
  std::vector<double> synth_leaks{1.0, 0.8, 0.6, 0.4, 0.2, 0.0};
  auto *synth_cmd = app.add_subcommand("synth", "Write a synthetic leaky-vs-clean experiment grid");
  synth_cmd->add_option("--classes", synth_spec.n_classes, "Number of classes");
  synth_cmd->add_option("--points", synth_spec.points_per_class, "Items per class");
  synth_cmd->add_option("--dim", synth_spec.dim, "Embedding dimension");
  synth_cmd->add_option("--separation", synth_spec.separation, "Centroid distance");
  synth_cmd->add_option("--leak", synth_leaks, "Leak strengths in [0, 1], at most six");
  add_common(synth_cmd, synth_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*audit) {
      auto cfg = report::load_grid_config(audit_config);
      apply_common(audit_c, cfg.options);
      const report::ExperimentSpec *spec = nullptr;
      if (audit_experiment) {
        for (const auto &e : cfg.experiments)
          if (e.name == *audit_experiment)
            spec = &e;
        if (!spec)
          throw ValidationError("audit: no experiment named '" + *audit_experiment + "'");
      } else if (cfg.experiments.size() == 1) {
        spec = &cfg.experiments.front();
      } else {
        throw ValidationError("audit: config lists several experiments; pick one with --experiment");
      }
      auto r = report::run_experiment(*spec, cfg.options);
      const auto fmt = report::parse_format(audit_c.format);
      std::string text;
      if (fmt == report::Format::Json) {
        json j = report::to_json(r);
        j["options"] = report::to_json(cfg.options);
        text = j.dump(2) + "\n";
      } else {
        text = report::to_markdown(single_report(*spec, cfg.options, std::move(r)));
      }
      if (audit_output)
        detail::write_text(*audit_output, text);
      else
        std::cout << text;
      return kOk;
    }

    if (*grid) {
      auto cfg = report::load_grid_config(grid_config);
      apply_common(grid_c, cfg.options);
      if (grid_override) {
        cfg.overrides.clear();
        report::parse_overrides(parse_override_arg(*grid_override), cfg);
      }
      const auto rep = report::run_grid(cfg);
      const fs::path dir = cfg.options.out_dir;
      report::emit_report(rep, report::Format::Json, dir / "grid_report.json");
      report::emit_report(rep, report::Format::Markdown, dir / "grid_report.md");
      if (report::parse_format(grid_c.format) == report::Format::Json)
        print_json(report::to_json(rep));
      else
        std::cout << report::to_markdown(rep);
      for (const auto &o : rep.experiments)
        if (o.error)
          std::cerr << "error: " << o.name << ": " << *o.error << "\n";
      return rep.has_failures() ? kPartialGrid : kOk;
    }

    if (*filter) {
      FilterOptions fo;
      fo.lowercase = !filter_keep_case;
      fo.strip_plural_s = filter_plural;
      std::vector<std::string> classes = filter_classes;
      if (filter_classes_file) {
        const std::string text = detail::read_text(*filter_classes_file);
        std::size_t start = 0;
        while (start <= text.size()) {
          auto end = text.find('\n', start);
          if (end == std::string::npos)
            end = text.size();
          std::string line = text.substr(start, end - start);
          if (!line.empty() && line.back() == '\r')
            line.pop_back();
          if (line.find_first_not_of(" \t") != std::string::npos)
            classes.push_back(line);
          start = end + 1;
        }
      }
      const auto records =
          read_manifest(filter_manifest, ManifestOptions{.unique_ids = false, .require_label = false});
      const auto rep = filter_dataset(records, classes, fo);
      const fs::path dir = out_dir_of(filter_c);
      write_manifest(rep.kept, dir / "kept.jsonl");
      std::string removed;
      for (const auto &r : rep.removed) {
        json j = json::parse(record_to_json_line(r.record));
        j["matched_words"] = r.matched_words;
        removed += j.dump() + "\n";
      }
      detail::write_text(dir / "removed.jsonl", removed);
      json summary = {{"records", records.size()},
                      {"kept", rep.kept.size()},
                      {"removed", rep.removed.size()},
                      {"removed_audio_ids", rep.removed_audio_ids},
                      {"removal_rate", rep.removal_rate},
                      {"class_words", rep.class_word_vocabulary},
                      {"word_match_counts", rep.word_match_counts},
                      {"strip_plural_s", fo.strip_plural_s},
                      {"lowercase", fo.lowercase}};
      detail::write_text(dir / "filter_summary.json", summary.dump(2) + "\n");
      print_json(summary);
      return kOk;
    }

    if (*tsne_cmd) {
      const auto set = load_embedding_set(tsne_matrix, tsne_manifest, parse_role(tsne_role));
      tsne::Config cfg;
      cfg.perplexity = tsne_perplexity;
      cfg.iterations = tsne_iterations;
      cfg.input_metric = metric_of(tsne_c);
      cfg.seed = tsne_c.seed.value_or(0);
      const auto res = tsne::run(set, cfg);
      const fs::path dir = out_dir_of(tsne_c);
      const std::vector<std::string> labels = set.labels().value_or(std::vector<std::string>{});
      const std::string stem = "tsne_" + tsne_role;
      render_scatter(res.coords, labels, dir / (stem + ".svg"),
                     tsne_title.empty() ? "t-SNE of " + tsne_role : tsne_title);
      detail::write_text(dir / (stem + ".csv"), coords_csv(res.coords, set.ids(), labels));
      print_json({{"svg", (dir / (stem + ".svg")).generic_string()},
                  {"coords", (dir / (stem + ".csv")).generic_string()},
                  {"perplexity", *res.config.perplexity},
                  {"iterations", res.config.iterations},
                  {"final_kl", res.kl_trace.empty() ? 0.0 : res.kl_trace.back()},
                  {"unconverged_rows", res.unconverged_rows}});
      return kOk;
    }

    if (*sil) {
      const auto set = load_embedding_set(sil_matrix, sil_manifest, Role::AudioCrossModal);
      if (!set.labels())
        throw ValidationError("silhouette: manifest has no labels");
      const Metric m = metric_of(sil_c);
      const auto dm = pairwise_divergence(set, m);
      const auto samples = silhouette_samples(dm, *set.labels());
      double mean = 0.0;
      for (double s : samples)
        mean += s;
      mean /= static_cast<double>(samples.size());
      json j = {{"metric", std::string(metric_name(m))}, {"n", set.size()}, {"silhouette", mean}};
      if (sil_samples)
        j["samples"] = samples;
      print_json(j);
      return kOk;
    }

    if (*topo) {
      const auto p = load_embedding_set(topo_p_matrix, topo_p_manifest, Role::AudioUnimodal);
      const auto q = load_embedding_set(topo_q_matrix, topo_q_manifest, Role::AudioCrossModal);
      TopoOptions opts;
      opts.metric = metric_of(topo_c);
      opts.include_self = topo_c.include_self;
      opts.k_min = topo_k_min;
      opts.k_max = topo_c.k_max;
      const auto res = topo_similarity(p, q, opts);
      if (topo_curve)
        detail::write_text(*topo_curve, curve_csv(res));
      print_json(report::to_json(res));
      return kOk;
    }

    if (*zs) {
      const auto audio =
          load_embedding_set(zs_audio_matrix, zs_audio_manifest, Role::AudioCrossModal);
      const auto text = load_embedding_set(zs_text_matrix, zs_text_manifest, Role::TextCrossModal);
      const auto rep = evaluate(audio, text);
      const fs::path dir = out_dir_of(zs_c);
      const json j = report::to_json(rep, true);
      detail::write_text(dir / "zero_shot.json", j.dump(2) + "\n");
      detail::write_text(dir / "confusion.csv", confusion_csv(rep));
      print_json({{"accuracy", rep.accuracy},
                  {"classes", rep.classes.size()},
                  {"report", (dir / "zero_shot.json").generic_string()},
                  {"confusion", (dir / "confusion.csv").generic_string()}});
      return kOk;
    }

    if (*synth_cmd) {
      synth_spec.seed = synth_c.seed.value_or(0);
      const fs::path dir = out_dir_of(synth_c);
      json options = {{"seed", synth_spec.seed}, {"out_dir", "out"}};
      if (synth_c.metric)
        options["metric"] = *synth_c.metric;
      const auto path = report::write_synth_grid(synth_spec, parse_leaks(synth_leaks), dir, options);
      print_json({{"config", path.generic_string()}, {"experiments", synth_leaks.size()}});
      return kOk;
    }
  } catch (const ValidationError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const json::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kOk;
}
