#pragma once

#include "leakscope/matrix.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace leakscope {

// SVG 1.1 scatter of n x 2 coordinates. Colors cycle through a fixed palette
// in order of first appearance of each label; a legend lists label -> color.
// An empty label list draws every point in one color with no legend.
std::string scatter_svg(const Matrix &coords, const std::vector<std::string> &labels,
                        const std::string &title = {});
void render_scatter(const Matrix &coords, const std::vector<std::string> &labels,
                    const std::filesystem::path &output_path, const std::string &title = {});

// "id,x,y,label" rows with a header line.
std::string coords_csv(const Matrix &coords, const std::vector<std::string> &ids,
                       const std::vector<std::string> &labels);

} // namespace leakscope
