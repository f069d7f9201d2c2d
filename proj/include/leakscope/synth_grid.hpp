#pragma once

#include "leakscope/experiment.hpp"
#include "leakscope/synth.hpp"

#include <filesystem>
#include <vector>

namespace leakscope::report {

// Writes one full_scenario per leak strength under `dir` (four .npy matrices
// plus audio/text manifests each) and a grid.json that lists them in grid
// cell order: dirty/dirty, dirty/clean, dirty/none, clean/dirty, clean/clean,
// clean/none. At most six strengths. Returns the path of grid.json.
std::filesystem::path write_synth_grid(const synth::ClusterSpec &spec,
                                       const std::vector<double> &leak_strengths,
                                       const std::filesystem::path &dir,
                                       const nlohmann::json &options = nlohmann::json::object());

} // namespace leakscope::report
