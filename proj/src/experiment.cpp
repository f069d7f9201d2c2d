#include "leakscope/experiment.hpp"

#include "file_util.hpp"
#include "leakscope/correlation.hpp"
#include "leakscope/error.hpp"
#include "leakscope/scatter_svg.hpp"
#include "leakscope/silhouette.hpp"

#include <cctype>
#include <cstdio>
#include <initializer_list>
#include <set>

namespace leakscope::report {

using nlohmann::json;

std::string_view condition_name(TrainingCondition c) {
  return c == TrainingCondition::Dirty ? "dirty" : "clean";
}

std::string_view condition_name(PretrainingCondition c) {
  switch (c) {
  case PretrainingCondition::Dirty:
    return "dirty";
  case PretrainingCondition::Clean:
    return "clean";
  case PretrainingCondition::None:
    return "none";
  }
  return "?";
}

TrainingCondition parse_training(std::string_view s) {
  if (s == "dirty")
    return TrainingCondition::Dirty;
  if (s == "clean")
    return TrainingCondition::Clean;
  throw ValidationError("training condition must be dirty or clean, got '" + std::string(s) + "'");
}

PretrainingCondition parse_pretraining(std::string_view s) {
  if (s == "dirty")
    return PretrainingCondition::Dirty;
  if (s == "clean")
    return PretrainingCondition::Clean;
  if (s == "none")
    return PretrainingCondition::None;
  throw ValidationError("pretraining condition must be dirty, clean or none, got '" +
                        std::string(s) + "'");
}

Format parse_format(std::string_view s) {
  if (s == "json")
    return Format::Json;
  if (s == "markdown")
    return Format::Markdown;
  throw ValidationError("format must be json or markdown, got '" + std::string(s) + "'");
}

std::string safe_name(std::string_view name) {
  std::string out;
  for (char c : name)
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  return out.empty() ? "_" : out;
}

void validate(const ExperimentSpec &spec) {
  std::string missing;
  for (Role r : {Role::AudioUnimodal, Role::AudioCrossModal, Role::TextUnimodal,
                 Role::TextCrossModal})
    if (!spec.paths.contains(r))
      missing += (missing.empty() ? "" : ", ") + std::string(role_tag(r));
  if (!missing.empty())
    throw ValidationError("experiment '" + spec.name + "': missing paths for " + missing);
}

bool GridReport::has_failures() const {
  for (const auto &e : experiments)
    if (e.error)
      return true;
  return false;
}

// ---------------------------------------------------------------------------
// Config parsing

namespace {

void check_keys(const json &obj, std::initializer_list<std::string_view> allowed,
                const std::string &where) {
  if (!obj.is_object())
    throw ValidationError(where + ": expected an object");
  for (const auto &[key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ValidationError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T get_or(const json &obj, const char *key, T fallback, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null())
    return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception &) {
    throw ValidationError(where + ": key '" + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

AuditOptions parse_options(const json &obj, const std::filesystem::path &base) {
  AuditOptions o;
  if (obj.is_null())
    return o;
  const std::string where = "options";
  check_keys(obj, {"metric", "normalize_cross_modal", "topo", "tsne", "seed", "out_dir"}, where);
  o.metric = parse_metric(get_or<std::string>(obj, "metric", "cosine", where));
  o.normalize_cross_modal = get_or<bool>(obj, "normalize_cross_modal", true, where);
  o.seed = get_or<std::uint64_t>(obj, "seed", 0, where);
  if (obj.contains("out_dir"))
    o.out_dir = resolve(base, get_or<std::string>(obj, "out_dir", "", where));

  o.topo.metric = o.metric;
  if (auto it = obj.find("topo"); it != obj.end()) {
    const std::string w = "options.topo";
    check_keys(*it, {"include_self", "k_min", "k_max", "full_unimodal_clouds"}, w);
    o.topo.include_self = get_or<bool>(*it, "include_self", false, w);
    o.topo.k_min = get_or<std::size_t>(*it, "k_min", 1, w);
    if (it->contains("k_max") && !(*it)["k_max"].is_null())
      o.topo.k_max = get_or<std::size_t>(*it, "k_max", 0, w);
    o.topo.full_unimodal_clouds = get_or<bool>(*it, "full_unimodal_clouds", false, w);
  }

  o.tsne.config.input_metric = o.metric;
  if (auto it = obj.find("tsne"); it != obj.end()) {
    const std::string w = "options.tsne";
    check_keys(*it,
               {"enabled", "roles", "perplexity", "iterations", "learning_rate",
                "early_exaggeration", "metric"},
               w);
    o.tsne.enabled = get_or<bool>(*it, "enabled", true, w);
    if (it->contains("roles")) {
      o.tsne.roles.clear();
      for (const auto &r : (*it)["roles"])
        o.tsne.roles.push_back(parse_role(r.get<std::string>()));
    }
    if (it->contains("perplexity") && !(*it)["perplexity"].is_null())
      o.tsne.config.perplexity = get_or<double>(*it, "perplexity", 0.0, w);
    o.tsne.config.iterations = get_or<int>(*it, "iterations", 1000, w);
    o.tsne.config.learning_rate = get_or<double>(*it, "learning_rate", 200.0, w);
    o.tsne.config.early_exaggeration = get_or<double>(*it, "early_exaggeration", 12.0, w);
    o.tsne.config.input_metric =
        parse_metric(get_or<std::string>(*it, "metric", std::string(metric_name(o.metric)), w));
  }
  o.tsne.config.seed = o.seed;
  return o;
}

ExperimentSpec parse_experiment(const json &obj, const std::filesystem::path &base,
                                std::size_t index) {
  const std::string where = "experiments[" + std::to_string(index) + "]";
  check_keys(obj, {"name", "training", "pretraining", "paths"}, where);
  ExperimentSpec spec;
  spec.training = parse_training(get_or<std::string>(obj, "training", "", where));
  spec.pretraining = parse_pretraining(get_or<std::string>(obj, "pretraining", "", where));
  spec.name = get_or<std::string>(obj, "name",
                                  std::string(condition_name(spec.training)) + "/" +
                                      std::string(condition_name(spec.pretraining)),
                                  where);
  if (auto it = obj.find("paths"); it != obj.end()) {
    check_keys(*it, {"x_a", "E_a", "x_t", "E_t"}, where + ".paths");
    for (const auto &[tag, entry] : it->items()) {
      const std::string w = where + ".paths." + tag;
      check_keys(entry, {"matrix", "manifest"}, w);
      SetPaths p;
      p.matrix = resolve(base, get_or<std::string>(entry, "matrix", "", w));
      p.manifest = resolve(base, get_or<std::string>(entry, "manifest", "", w));
      if (p.matrix.empty() || p.manifest.empty())
        throw ValidationError(w + ": both 'matrix' and 'manifest' are required");
      spec.paths[parse_role(tag)] = p;
    }
  }
  return spec;
}

double number_at(const json &obj, const char *key, const std::string &where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number())
    throw ValidationError(where + ": '" + key + "' must be a number");
  return it->get<double>();
}

} // namespace

void parse_overrides(const json &doc, GridConfig &config) {
  const std::string where = "metrics override";
  check_keys(doc, {"n_classes", "experiments"}, where);
  if (doc.contains("n_classes"))
    config.override_n_classes = get_or<std::size_t>(doc, "n_classes", 0, where);
  if (!doc.contains("experiments") || !doc["experiments"].is_object())
    throw ValidationError(where + ": 'experiments' must be an object keyed by experiment name");
  const auto &exps = doc["experiments"];
  for (const auto &[name, entry] : exps.items()) {
    const std::string w = where + "." + name;
    check_keys(entry, {"accuracy", "silhouette", "topo"}, w);
    MetricsOverride o;
    o.accuracy = number_at(entry, "accuracy", w);
    if (auto it = entry.find("silhouette"); it != entry.end())
      for (const auto &[tag, v] : it->items()) {
        if (!v.is_number())
          throw ValidationError(w + ".silhouette." + tag + ": must be a number");
        o.silhouettes[parse_role(tag)] = v.get<double>();
      }
    if (auto it = entry.find("topo"); it != entry.end())
      for (const auto &[key, v] : it->items()) {
        if (key != kTopoAudio && key != kTopoText && key != kTopoCross)
          throw ValidationError(w + ".topo: unknown comparison '" + key + "'");
        if (!v.is_number())
          throw ValidationError(w + ".topo." + key + ": must be a number");
        o.topo[key] = v.get<double>();
      }
    config.overrides[name] = std::move(o);
  }
}

GridConfig parse_grid_config(const json &doc, const std::filesystem::path &base_dir) {
  check_keys(doc, {"options", "experiments", "metrics_override"}, "config");
  GridConfig cfg;
  cfg.options = parse_options(doc.contains("options") ? doc["options"] : json(), base_dir);
  if (!doc.contains("experiments") || !doc["experiments"].is_array() ||
      doc["experiments"].empty())
    throw ValidationError("config: 'experiments' must be a non-empty array");

  std::set<std::string> names;
  std::set<std::pair<TrainingCondition, PretrainingCondition>> cells;
  std::size_t index = 0;
  for (const auto &e : doc["experiments"]) {
    auto spec = parse_experiment(e, base_dir, index++);
    if (!names.insert(spec.name).second)
      throw ValidationError("config: duplicate experiment name '" + spec.name + "'");
    if (!cells.insert({spec.training, spec.pretraining}).second)
      throw ValidationError("config: two experiments share the condition pair " +
                            std::string(condition_name(spec.training)) + "/" +
                            std::string(condition_name(spec.pretraining)));
    cfg.experiments.push_back(std::move(spec));
  }

  if (auto it = doc.find("metrics_override"); it != doc.end()) {
    if (it->is_string()) {
      const auto path = resolve(base_dir, it->get<std::string>());
      json over;
      try {
        over = json::parse(detail::read_text(path));
      } catch (const json::parse_error &e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
      }
      parse_overrides(over, cfg);
    } else {
      parse_overrides(*it, cfg);
    }
  }
  for (const auto &spec : cfg.experiments)
    if (!cfg.overrides.contains(spec.name))
      validate(spec);
  return cfg;
}

GridConfig load_grid_config(const std::filesystem::path &path) {
  const std::string text = detail::read_text(path);
  json doc;
  try {
    doc = path.extension() == ".toml" ? toml_to_json(text) : json::parse(text);
  } catch (const json::parse_error &e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  } catch (const ValidationError &e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return parse_grid_config(doc, path.parent_path());
}

// ---------------------------------------------------------------------------
// Running

namespace {

template <typename F> auto with_context(const std::string &name, F &&f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError &e) {
    throw ValidationError("experiment '" + name + "': " + e.what());
  } catch (const IoError &e) {
    throw IoError("experiment '" + name + "': " + e.what());
  } catch (const NumericError &e) {
    throw NumericError("experiment '" + name + "': " + e.what());
  }
}

} // namespace

MetricsReport run_experiment(const ExperimentSpec &spec, const AuditOptions &options) {
  validate(spec);
  return with_context(spec.name, [&] {
    auto load = [&](Role r) {
      const auto &p = spec.paths.at(r);
      return load_embedding_set(p.matrix, p.manifest, r);
    };
    const EmbeddingSet x_a = load(Role::AudioUnimodal);
    EmbeddingSet e_a = load(Role::AudioCrossModal);
    const EmbeddingSet x_t = load(Role::TextUnimodal);
    EmbeddingSet e_t = load(Role::TextCrossModal);
    if (options.normalize_cross_modal) {
      e_a = l2_normalize(e_a);
      e_t = l2_normalize(e_t);
    }
    if (!x_a.labels() || !e_a.labels())
      throw ValidationError("audio manifests must label every item");

    MetricsReport rep;
    rep.name = spec.name;
    rep.training = spec.training;
    rep.pretraining = spec.pretraining;
    rep.zero_shot = evaluate(e_a, e_t);
    for (const EmbeddingSet *set : {&x_a, static_cast<const EmbeddingSet *>(&e_a)})
      rep.silhouettes[set->role()] =
          silhouette_score(pairwise_divergence(*set, options.metric), *set->labels());

    TopoOptions topo = options.topo;
    topo.metric = options.metric;
    const auto cmp = compare_all_spaces(x_a, e_a, x_t, e_t, topo);
    rep.topo[std::string(kTopoAudio)] = cmp.audio;
    rep.topo[std::string(kTopoText)] = cmp.text;
    rep.topo[std::string(kTopoCross)] = cmp.cross_modal;

    if (options.tsne.enabled) {
      tsne::Config cfg = options.tsne.config;
      cfg.seed = options.seed;
      const auto dir = options.out_dir / safe_name(spec.name);
      for (Role role : options.tsne.roles) {
        const EmbeddingSet &set = role == Role::AudioUnimodal    ? x_a
                                  : role == Role::AudioCrossModal ? e_a
                                  : role == Role::TextUnimodal    ? x_t
                                                                  : e_t;
        const auto result = tsne::run(set, cfg);
        const auto labels = set.labels().value_or(set.ids());
        const auto svg = dir / ("tsne_" + std::string(role_tag(role)) + ".svg");
        render_scatter(result.coords, labels, svg,
                       spec.name + " " + std::string(role_tag(role)));
        detail::write_text(dir / ("tsne_" + std::string(role_tag(role)) + ".csv"),
                           coords_csv(result.coords, set.ids(), labels));
        rep.tsne_outputs[role] = svg;
      }
    }
    return rep;
  });
}

MetricsReport report_from_override(const ExperimentSpec &spec, const MetricsOverride &values) {
  MetricsReport rep;
  rep.name = spec.name;
  rep.training = spec.training;
  rep.pretraining = spec.pretraining;
  rep.overridden = true;
  rep.zero_shot.accuracy = values.accuracy;
  rep.silhouettes = values.silhouettes;
  for (const auto &[key, v] : values.topo) {
    TopoSimilarityResult r;
    r.s_max = v;
    r.curve = {v};
    rep.topo[key] = r;
  }
  return rep;
}

std::vector<Correlation> grid_correlations(const std::vector<ExperimentOutcome> &outcomes,
                                           std::vector<std::string> *notes) {
  struct Series {
    std::string x_desc, y_desc;
    std::vector<double> x, y;
    bool log_x = false;
  };
  Series sil{"zero-shot accuracy", "silhouette E_a", {}, {}, false};
  Series topo{"ln zero-shot accuracy", "topological similarity E_a vs E_t", {}, {}, true};
  std::size_t successes = 0;
  for (const auto &o : outcomes) {
    if (!o.report)
      continue;
    ++successes;
    const auto &r = *o.report;
    if (auto it = r.silhouettes.find(Role::AudioCrossModal); it != r.silhouettes.end()) {
      sil.x.push_back(r.zero_shot.accuracy);
      sil.y.push_back(it->second);
    }
    if (auto it = r.topo.find(std::string(kTopoCross)); it != r.topo.end()) {
      topo.x.push_back(r.zero_shot.accuracy);
      topo.y.push_back(it->second.s_max);
    }
  }
  std::vector<Correlation> out;
  if (successes < 3) {
    if (notes)
      notes->push_back("correlations skipped: " + std::to_string(successes) +
                       " successful experiment(s), need at least 3");
    return out;
  }
  for (Series *s : {&sil, &topo}) {
    if (s->x.size() < 3) {
      if (notes)
        notes->push_back("correlation '" + s->x_desc + "' vs '" + s->y_desc + "' skipped: only " +
                         std::to_string(s->x.size()) + " experiment(s) report both values");
      continue;
    }
    try {
      const auto x = s->log_x ? stats::log_transform(s->x) : s->x;
      Correlation c;
      c.x_description = s->x_desc;
      c.y_description = s->y_desc;
      c.rho = stats::pearson(x, s->y);
      c.p = stats::pearson_p_value(c.rho, x.size());
      c.n = x.size();
      out.push_back(std::move(c));
    } catch (const ValidationError &e) {
      if (notes)
        notes->push_back("correlation '" + s->x_desc + "' vs '" + s->y_desc +
                         "' skipped: " + e.what());
    }
  }
  return out;
}

GridReport run_grid(const GridConfig &config) {
  if (config.experiments.empty())
    throw ValidationError("grid: no experiments configured");
  GridReport rep;
  rep.options = config.options;
  for (const auto &spec : config.experiments) {
    ExperimentOutcome o;
    o.name = spec.name;
    o.training = spec.training;
    o.pretraining = spec.pretraining;
    try {
      if (auto it = config.overrides.find(spec.name); it != config.overrides.end())
        o.report = report_from_override(spec, it->second);
      else
        o.report = run_experiment(spec, config.options);
    } catch (const std::exception &e) {
      o.error = e.what();
    }
    rep.experiments.push_back(std::move(o));
  }
  rep.correlations = grid_correlations(rep.experiments, &rep.notes);

  if (config.override_n_classes && *config.override_n_classes > 0)
    rep.random_guess = 1.0 / static_cast<double>(*config.override_n_classes);
  for (const auto &o : rep.experiments)
    if (!rep.random_guess && o.report && !o.report->zero_shot.classes.empty())
      rep.random_guess = 1.0 / static_cast<double>(o.report->zero_shot.classes.size());
  return rep;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const AuditOptions &o) {
  json topo = {{"include_self", o.topo.include_self},
               {"k_min", o.topo.k_min},
               {"k_max", o.topo.k_max ? json(*o.topo.k_max) : json()},
               {"full_unimodal_clouds", o.topo.full_unimodal_clouds}};
  json roles = json::array();
  for (Role r : o.tsne.roles)
    roles.push_back(std::string(role_tag(r)));
  json tsne = {{"enabled", o.tsne.enabled},
               {"roles", roles},
               {"perplexity", o.tsne.config.perplexity ? json(*o.tsne.config.perplexity) : json()},
               {"iterations", o.tsne.config.iterations},
               {"learning_rate", o.tsne.config.learning_rate},
               {"early_exaggeration", o.tsne.config.early_exaggeration},
               {"exaggeration_iterations", o.tsne.config.exaggeration_iterations},
               {"initial_momentum", o.tsne.config.initial_momentum},
               {"final_momentum", o.tsne.config.final_momentum},
               {"momentum_switch_iteration", o.tsne.config.momentum_switch_iteration},
               {"metric", std::string(metric_name(o.tsne.config.input_metric))}};
  return {{"metric", std::string(metric_name(o.metric))},
          {"normalize_cross_modal", o.normalize_cross_modal},
          {"seed", o.seed},
          {"out_dir", o.out_dir.generic_string()},
          {"topo", topo},
          {"tsne", tsne}};
}

json to_json(const ZeroShotReport &r, bool include_predictions) {
  json j = {{"accuracy", r.accuracy},
            {"classes", r.classes},
            {"per_class_accuracy", r.per_class_accuracy},
            {"confusion", r.confusion}};
  if (include_predictions)
    j["predictions"] = r.predictions;
  return j;
}

json to_json(const TopoSimilarityResult &r) {
  return {{"s_max", r.s_max},
          {"k_at_max", r.k_at_max},
          {"k_min", r.k_range.min},
          {"k_max", r.k_range.max},
          {"include_self", r.include_self},
          {"metric", std::string(metric_name(r.metric))},
          {"curve", r.curve}};
}

json to_json(const MetricsReport &r) {
  json sil = json::object();
  for (const auto &[role, v] : r.silhouettes)
    sil[std::string(role_tag(role))] = v;
  json topo = json::object();
  for (const auto &[key, v] : r.topo)
    topo[key] = r.overridden ? json{{"s_max", v.s_max}} : to_json(v);
  json tsne = json::object();
  for (const auto &[role, path] : r.tsne_outputs)
    tsne[std::string(role_tag(role))] = path.generic_string();
  json zs = r.overridden ? json{{"accuracy", r.zero_shot.accuracy}} : to_json(r.zero_shot);
  return {{"name", r.name},
          {"training", std::string(condition_name(r.training))},
          {"pretraining", std::string(condition_name(r.pretraining))},
          {"overridden", r.overridden},
          {"zero_shot", zs},
          {"silhouettes", sil},
          {"topo", topo},
          {"tsne_outputs", tsne}};
}

json to_json(const GridReport &r) {
  json exps = json::array();
  for (const auto &o : r.experiments) {
    json e = {{"name", o.name},
              {"training", std::string(condition_name(o.training))},
              {"pretraining", std::string(condition_name(o.pretraining))},
              {"status", o.error ? "failed" : "ok"}};
    if (o.error)
      e["error"] = *o.error;
    if (o.report)
      e["report"] = to_json(*o.report);
    exps.push_back(std::move(e));
  }
  json corr = json::array();
  for (const auto &c : r.correlations)
    corr.push_back({{"x", c.x_description},
                    {"y", c.y_description},
                    {"rho", c.rho},
                    {"p", c.p},
                    {"n", c.n}});
  return {{"schema", "leakscope.grid_report/1"},
          {"options", to_json(r.options)},
          {"experiments", exps},
          {"correlations", corr},
          {"notes", r.notes},
          {"random_guess", r.random_guess ? json(*r.random_guess) : json()}};
}

namespace {

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const MetricsReport *find_cell(const GridReport &r, TrainingCondition t, PretrainingCondition p) {
  for (const auto &o : r.experiments)
    if (o.training == t && o.pretraining == p && o.report)
      return &*o.report;
  return nullptr;
}

constexpr TrainingCondition kTrainings[] = {TrainingCondition::Dirty, TrainingCondition::Clean};
constexpr PretrainingCondition kPretrainings[] = {
    PretrainingCondition::Dirty, PretrainingCondition::Clean, PretrainingCondition::None};

template <typename Cell> std::string grid_row(const GridReport &r, TrainingCondition t, Cell cell) {
  std::string row;
  for (auto p : kPretrainings) {
    const MetricsReport *m = find_cell(r, t, p);
    const auto v = m ? cell(*m) : std::optional<double>();
    row += " " + (v ? fmt2(*v) : std::string("n/a")) + " |";
  }
  return row;
}

} // namespace

std::string to_markdown(const GridReport &r) {
  std::string md = "# Leakage audit\n\n";

  md += "## Zero-shot accuracy\n\n";
  md += "| Training \\ Pre-training | dirty | clean | none |\n|---|---|---|---|\n";
  for (auto t : kTrainings)
    md += "| " + std::string(condition_name(t)) + " |" +
          grid_row(r, t, [](const MetricsReport &m) { return std::optional(m.zero_shot.accuracy); }) +
          "\n";
  md += "| Random guess | | | " + (r.random_guess ? fmt2(*r.random_guess) : std::string("n/a")) +
        " |\n\n";

  md += "## Silhouette scores (" + std::string(metric_name(r.options.metric)) + ")\n\n";
  md += "| Training | Space | dirty | clean | none |\n|---|---|---|---|---|\n";
  for (auto t : kTrainings)
    for (Role role : {Role::AudioUnimodal, Role::AudioCrossModal})
      md += "| " + std::string(condition_name(t)) + " | " + std::string(role_tag(role)) + " |" +
            grid_row(r, t,
                     [role](const MetricsReport &m) {
                       auto it = m.silhouettes.find(role);
                       return it == m.silhouettes.end() ? std::optional<double>()
                                                        : std::optional(it->second);
                     }) +
            "\n";
  md += "\n";

  md += "## Topological similarity\n\n";
  md += "| Representations | Training | dirty | clean | none |\n|---|---|---|---|---|\n";
  const std::pair<std::string_view, const char *> comparisons[] = {
      {kTopoAudio, "x_a vs E_a"}, {kTopoText, "x_t vs E_t"}, {kTopoCross, "E_a vs E_t"}};
  for (const auto &[key, title] : comparisons)
    for (auto t : kTrainings)
      md += std::string("| ") + title + " | " + std::string(condition_name(t)) + " |" +
            grid_row(r, t,
                     [key = std::string(key)](const MetricsReport &m) {
                       auto it = m.topo.find(key);
                       return it == m.topo.end() ? std::optional<double>()
                                                 : std::optional(it->second.s_max);
                     }) +
            "\n";
  md += "\n";

  md += "## Correlations\n\n";
  if (r.correlations.empty()) {
    md += "None computed.\n";
  } else {
    for (const auto &c : r.correlations) {
      const std::string p = c.p < 0.01 ? "p < 0.01" : "p = " + fmt2(c.p);
      md += "- " + c.x_description + " vs " + c.y_description + ": rho = " + fmt2(c.rho) + ", " +
            p + " (n = " + std::to_string(c.n) + ")\n";
    }
  }
  for (const auto &n : r.notes)
    md += "\n- " + n;
  if (!r.notes.empty())
    md += "\n";

  bool any_failed = false;
  for (const auto &o : r.experiments)
    if (o.error) {
      if (!any_failed)
        md += "\n## Failed experiments\n\n";
      any_failed = true;
      md += "- " + o.name + ": " + *o.error + "\n";
    }
  return md;
}

void emit_report(const GridReport &report, Format format, const std::filesystem::path &path) {
  if (format == Format::Json)
    detail::write_text(path, to_json(report).dump(2) + "\n");
  else
    detail::write_text(path, to_markdown(report));
}

} // namespace leakscope::report
