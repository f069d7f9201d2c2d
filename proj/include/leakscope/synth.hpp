#pragma once

#include "leakscope/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace leakscope::synth {

struct ClusterSpec {
  std::size_t n_classes = 3;
  std::size_t points_per_class = 20;
  std::size_t dim = 2;
  // Inter-centroid distance in units of the within-class standard deviation (1).
  double separation = 10.0;
  std::uint64_t seed = 0;
};

void validate(const ClusterSpec &spec);

// True when dim >= n_classes - 1, i.e. a regular simplex of centroids fits.
bool simplex_fits(const ClusterSpec &spec);

// n_classes x dim centroids, pairwise distance exactly `separation` on a
// regular simplex centered at the origin; otherwise random directions scaled
// so the closest pair sits at `separation` (a warning goes to stderr).
Matrix class_centroids(const ClusterSpec &spec);

// Class names used by the generators: "class_00", "class_01", ...
std::vector<std::string> class_names(std::size_t n_classes);

// Centroid + isotropic unit Gaussian noise. Items are grouped by class, ids
// "item_00000", ... and role E_a.
EmbeddingSet gaussian_clusters(const ClusterSpec &spec);

// base + noise_scale * N(0, 1) per coordinate; same ids, labels and role.
EmbeddingSet paired_cloud(const EmbeddingSet &base, double noise_scale, std::uint64_t seed);

struct Scenario {
  EmbeddingSet audio;      // E_a, labeled items
  EmbeddingSet class_text; // E_t, one row per class, ids = class names
};

// Audio item of class c = leak_strength * centroid_c + N(0, I); class text
// rows are the centroids themselves. leak_strength 1 gives clusters at full
// separation that point at their text rows; 0 gives label-free noise.
Scenario leaky_vs_clean_scenario(const ClusterSpec &spec, double leak_strength);

// Unimodal stand-ins for a scenario: fixed random rotations of the cross-modal
// sets plus a little noise, so every role of an experiment can be populated.
struct FullScenario {
  EmbeddingSet x_a;
  EmbeddingSet e_a;
  EmbeddingSet x_t;
  EmbeddingSet e_t;
};
FullScenario full_scenario(const ClusterSpec &spec, double leak_strength);

} // namespace leakscope::synth
