#pragma once

#include "leakscope/geometry.hpp"

#include <string>
#include <vector>

namespace leakscope {

// Per-item silhouette s(i) = (b - a) / max(a, b) against the given labels.
// Items in singleton clusters score 0, as does the degenerate a = b = 0 case.
// Requires n >= 2 and at least two distinct labels.
std::vector<double> silhouette_samples(const DistanceMatrix &dm,
                                       const std::vector<std::string> &labels);

// Mean of silhouette_samples.
double silhouette_score(const DistanceMatrix &dm, const std::vector<std::string> &labels);

} // namespace leakscope
