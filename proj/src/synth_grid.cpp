#include "leakscope/synth_grid.hpp"

#include "file_util.hpp"
#include "leakscope/error.hpp"
#include "leakscope/npy.hpp"

#include <cstdio>

namespace leakscope::report {

namespace {

constexpr std::pair<TrainingCondition, PretrainingCondition> kCells[] = {
    {TrainingCondition::Dirty, PretrainingCondition::Dirty},
    {TrainingCondition::Dirty, PretrainingCondition::Clean},
    {TrainingCondition::Dirty, PretrainingCondition::None},
    {TrainingCondition::Clean, PretrainingCondition::Dirty},
    {TrainingCondition::Clean, PretrainingCondition::Clean},
    {TrainingCondition::Clean, PretrainingCondition::None},
};

std::vector<ItemRecord> records_of(const EmbeddingSet &set) {
  std::vector<ItemRecord> out;
  for (std::size_t i = 0; i < set.size(); ++i)
    out.push_back({set.ids()[i], set.labels() ? (*set.labels())[i] : std::string(), {}, {}});
  return out;
}

} // namespace

std::filesystem::path write_synth_grid(const synth::ClusterSpec &spec,
                                       const std::vector<double> &leak_strengths,
                                       const std::filesystem::path &dir,
                                       const nlohmann::json &options) {
  if (leak_strengths.empty() || leak_strengths.size() > std::size(kCells))
    throw ValidationError("synth grid: need between 1 and 6 leak strengths, got " +
                          std::to_string(leak_strengths.size()));
  nlohmann::json experiments = nlohmann::json::array();
  for (std::size_t i = 0; i < leak_strengths.size(); ++i) {
    const auto s = synth::full_scenario(spec, leak_strengths[i]);
    char sub[32];
    std::snprintf(sub, sizeof sub, "leak_%.3f", leak_strengths[i]);
    const std::filesystem::path d = dir / sub;
    npy::write(s.x_a.matrix(), d / "x_a.npy");
    npy::write(s.e_a.matrix(), d / "E_a.npy");
    npy::write(s.x_t.matrix(), d / "x_t.npy");
    npy::write(s.e_t.matrix(), d / "E_t.npy");
    write_manifest(records_of(s.e_a), d / "audio.jsonl");
    write_manifest(records_of(s.e_t), d / "text.jsonl");

    const std::string rel = sub;
    auto entry = [&](const char *tag, const char *manifest) {
      return nlohmann::json{{"matrix", rel + "/" + tag + ".npy"}, {"manifest", rel + "/" + manifest}};
    };
    experiments.push_back({{"name", rel},
                           {"training", std::string(condition_name(kCells[i].first))},
                           {"pretraining", std::string(condition_name(kCells[i].second))},
                           {"paths",
                            {{"x_a", entry("x_a", "audio.jsonl")},
                             {"E_a", entry("E_a", "audio.jsonl")},
                             {"x_t", entry("x_t", "text.jsonl")},
                             {"E_t", entry("E_t", "text.jsonl")}}}});
  }
  nlohmann::json doc = {{"options", options}, {"experiments", experiments}};
  const auto path = dir / "grid.json";
  detail::write_text(path, doc.dump(2) + "\n");
  return path;
}

} // namespace leakscope::report
