#pragma once

#include "leakscope/corpus.hpp"
#include "leakscope/geometry.hpp"
#include "leakscope/matrix.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace leakscope::tsne {

struct Config {
  // Unset: min(30, floor((n-1)/3)), raised to 2 for very small inputs.
  std::optional<double> perplexity;
  int iterations = 1000;
  double learning_rate = 200.0;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  int momentum_switch_iteration = 250;
  std::uint64_t seed = 0;
  Metric input_metric = Metric::CosineDivergence;
};

// Perplexity actually used for n points.
double resolve_perplexity(const Config &config, std::size_t n);
// Throws ValidationError unless perplexity in [2, n-1) and iterations >= 1.
void validate(const Config &config, std::size_t n);

struct CalibratedRow {
  std::vector<double> probabilities; // p_{j|i}, sums to 1
  double sigma = 0.0;
  double entropy_bits = 0.0;
  int steps = 0;
  bool converged = false;
};

constexpr double kEntropyTolerance = 1e-5;
constexpr int kMaxBisectionSteps = 50;

// Bisects the Gaussian bandwidth so that 2^H(p) matches `perplexity`, with
// p_j proportional to exp(-d_j^2 / (2 sigma^2)). Stops at kMaxBisectionSteps
// and reports converged = false if the target entropy was not reached.
CalibratedRow perplexity_calibration(std::span<const double> distances, double perplexity);

struct Affinities {
  Matrix joint;                            // symmetric P, zero diagonal
  std::vector<std::size_t> unconverged;    // rows whose calibration missed the target
};

constexpr double kMinProbability = 1e-12;

// p_ij = (p_{j|i} + p_{i|j}) / 2n, floored at kMinProbability off the diagonal.
Affinities joint_probabilities(const DistanceMatrix &dm, double perplexity);

// KL(P || Q) with q_ij proportional to (1 + |y_i - y_j|^2)^-1.
double kl_divergence(const Matrix &joint, const Matrix &coords);

// dKL/dy_i = 4 sum_j (e*p_ij - q_ij)(1 + |y_i - y_j|^2)^-1 (y_i - y_j),
// e being the exaggeration factor (1 gives the true KL gradient).
Matrix kl_gradient(const Matrix &joint, const Matrix &coords, double exaggeration = 1.0);

struct Result {
  Matrix coords; // n x 2
  std::vector<double> kl_trace;
  Config config; // perplexity resolved
  std::vector<std::size_t> unconverged_rows;
};

Result run(const DistanceMatrix &dm, const Config &config);
Result run(const EmbeddingSet &set, const Config &config);

} // namespace leakscope::tsne
