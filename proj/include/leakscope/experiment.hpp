#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/geometry.hpp"
#include "leakscope/topo_similarity.hpp"
#include "leakscope/tsne.hpp"
#include "leakscope/zero_shot.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace leakscope::report {

enum class TrainingCondition { Dirty, Clean };
enum class PretrainingCondition { Dirty, Clean, None };

std::string_view condition_name(TrainingCondition c);
std::string_view condition_name(PretrainingCondition c);
TrainingCondition parse_training(std::string_view s);
PretrainingCondition parse_pretraining(std::string_view s);

struct SetPaths {
  std::filesystem::path matrix;
  std::filesystem::path manifest;
};

struct ExperimentSpec {
  std::string name;
  TrainingCondition training = TrainingCondition::Dirty;
  PretrainingCondition pretraining = PretrainingCondition::Dirty;
  std::map<Role, SetPaths> paths;
};

// Throws ValidationError unless all four roles have paths.
void validate(const ExperimentSpec &spec);

struct TsneOptions {
  bool enabled = true;
  std::vector<Role> roles{Role::AudioCrossModal};
  tsne::Config config;
};

// One options record shared by every experiment of a run.
struct AuditOptions {
  Metric metric = Metric::CosineDivergence;
  bool normalize_cross_modal = true;
  TopoOptions topo;
  TsneOptions tsne;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "leakscope-out";
};

// Metric values supplied directly instead of computed from embeddings.
struct MetricsOverride {
  double accuracy = 0.0;
  std::map<Role, double> silhouettes;
  std::map<std::string, double> topo; // keys as in topo_key()
};

struct GridConfig {
  AuditOptions options;
  std::vector<ExperimentSpec> experiments;
  std::map<std::string, MetricsOverride> overrides; // by experiment name
  std::optional<std::size_t> override_n_classes;
};

// Keys for the three space comparisons.
inline constexpr std::string_view kTopoAudio = "x_a_vs_E_a";
inline constexpr std::string_view kTopoText = "x_t_vs_E_t";
inline constexpr std::string_view kTopoCross = "E_a_vs_E_t";

struct MetricsReport {
  std::string name;
  TrainingCondition training = TrainingCondition::Dirty;
  PretrainingCondition pretraining = PretrainingCondition::Dirty;
  bool overridden = false;
  ZeroShotReport zero_shot;
  std::map<Role, double> silhouettes;
  std::map<std::string, TopoSimilarityResult> topo;
  std::map<Role, std::filesystem::path> tsne_outputs;
};

struct ExperimentOutcome {
  std::string name;
  TrainingCondition training = TrainingCondition::Dirty;
  PretrainingCondition pretraining = PretrainingCondition::Dirty;
  std::optional<MetricsReport> report;
  std::optional<std::string> error;
};

struct Correlation {
  std::string x_description;
  std::string y_description;
  double rho = 0.0;
  double p = 1.0;
  std::size_t n = 0;
};

struct GridReport {
  AuditOptions options;
  std::vector<ExperimentOutcome> experiments; // config order
  std::vector<Correlation> correlations;
  std::vector<std::string> notes;             // skipped correlations and similar
  std::optional<double> random_guess;         // 1 / number of classes

  bool has_failures() const;
};

// Config documents are JSON or TOML (by extension .toml) with the same
// structure. Relative paths resolve against the config file's directory.
GridConfig parse_grid_config(const nlohmann::json &doc, const std::filesystem::path &base_dir);
GridConfig load_grid_config(const std::filesystem::path &path);
nlohmann::json toml_to_json(std::string_view toml_text);

void parse_overrides(const nlohmann::json &doc, GridConfig &config);

MetricsReport run_experiment(const ExperimentSpec &spec, const AuditOptions &options);
MetricsReport report_from_override(const ExperimentSpec &spec, const MetricsOverride &values);

// Runs every experiment; failures are recorded, never thrown. Correlations
// are computed over successful experiments when there are at least three.
GridReport run_grid(const GridConfig &config);
std::vector<Correlation> grid_correlations(const std::vector<ExperimentOutcome> &outcomes,
                                           std::vector<std::string> *notes = nullptr);

nlohmann::json to_json(const AuditOptions &options);
nlohmann::json to_json(const ZeroShotReport &report, bool include_predictions = false);
nlohmann::json to_json(const TopoSimilarityResult &result);
nlohmann::json to_json(const MetricsReport &report);
nlohmann::json to_json(const GridReport &report);

std::string to_markdown(const GridReport &report);

enum class Format { Json, Markdown };
Format parse_format(std::string_view s);
void emit_report(const GridReport &report, Format format, const std::filesystem::path &path);

// Filesystem-safe form of an experiment name ("dirty/clean" -> "dirty_clean").
std::string safe_name(std::string_view name);

} // namespace leakscope::report
