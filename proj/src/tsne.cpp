#include "leakscope/tsne.hpp"

#include "leakscope/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace leakscope::tsne {

double resolve_perplexity(const Config &config, std::size_t n) {
  if (config.perplexity)
    return *config.perplexity;
  const double cap = std::floor(static_cast<double>(n - 1) / 3.0);
  return std::max(2.0, std::min(30.0, cap));
}

void validate(const Config &config, std::size_t n) {
  if (n < 4)
    throw ValidationError("tsne: need at least 4 points, got " + std::to_string(n));
  const double perplexity = resolve_perplexity(config, n);
  if (!(perplexity >= 2.0) || !(perplexity < static_cast<double>(n - 1)))
    throw ValidationError("tsne: perplexity " + std::to_string(perplexity) +
                          " outside [2, n-1) for n=" + std::to_string(n));
  if (config.iterations < 1)
    throw ValidationError("tsne: iterations must be >= 1");
  if (!(config.learning_rate > 0.0))
    throw ValidationError("tsne: learning rate must be positive");
}

namespace {

// Fills `p` with the normalized kernel for precision `beta` over shifted
// squared distances and returns the entropy in bits.
double kernel_row(std::span<const double> shifted_sq, double beta, std::vector<double> &p) {
  double z = 0.0, weighted = 0.0;
  for (std::size_t j = 0; j < shifted_sq.size(); ++j) {
    p[j] = std::exp(-beta * shifted_sq[j]);
    z += p[j];
    weighted += p[j] * shifted_sq[j];
  }
  for (double &v : p)
    v /= z;
  return (std::log(z) + beta * weighted / z) / std::numbers::ln2;
}

} // namespace

CalibratedRow perplexity_calibration(std::span<const double> distances, double perplexity) {
  const std::size_t m = distances.size();
  if (m == 0)
    throw ValidationError("perplexity calibration: empty distance row");
  if (!(perplexity >= 1.0))
    throw ValidationError("perplexity calibration: perplexity must be >= 1");

  std::vector<double> sq(m);
  double lo_sq = std::numeric_limits<double>::infinity(), hi_sq = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    if (!std::isfinite(distances[j]))
      throw ValidationError("perplexity calibration: non-finite distance at index " +
                            std::to_string(j));
    sq[j] = distances[j] * distances[j];
    lo_sq = std::min(lo_sq, sq[j]);
    hi_sq = std::max(hi_sq, sq[j]);
  }
  for (double &v : sq)
    v -= lo_sq; // shift-invariant; keeps exp() in range

  const double target = std::log2(perplexity);
  CalibratedRow out;
  out.probabilities.assign(m, 1.0 / static_cast<double>(m));
  const double spread = hi_sq - lo_sq;
  if (spread == 0.0) {
    out.sigma = std::numeric_limits<double>::infinity();
    out.entropy_bits = std::log2(static_cast<double>(m));
    out.converged = std::fabs(out.entropy_bits - target) < kEntropyTolerance;
    return out;
  }

  // Entropy falls monotonically in beta = 1/(2 sigma^2); bisect log(beta).
  double log_lo = std::log(1e-20 / spread);
  double log_hi = std::log(1e20 / spread);
  std::vector<double> p(m);
  double best_gap = std::numeric_limits<double>::infinity();
  double best_beta = 0.0;
  for (int step = 1; step <= kMaxBisectionSteps; ++step) {
    const double log_beta = 0.5 * (log_lo + log_hi);
    const double beta = std::exp(log_beta);
    const double h = kernel_row(sq, beta, p);
    const double gap = h - target;
    out.steps = step;
    if (std::fabs(gap) < best_gap) {
      best_gap = std::fabs(gap);
      best_beta = beta;
      out.probabilities = p;
      out.entropy_bits = h;
    }
    if (std::fabs(gap) < kEntropyTolerance) {
      out.converged = true;
      break;
    }
    if (gap > 0.0)
      log_lo = log_beta;
    else
      log_hi = log_beta;
  }
  out.sigma = 1.0 / std::sqrt(2.0 * best_beta);
  return out;
}

Affinities joint_probabilities(const DistanceMatrix &dm, double perplexity) {
  const std::size_t n = dm.size();
  Matrix conditional(n, n);
  Affinities out;
  std::vector<double> row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (j != i)
        row[k++] = dm(i, j);
    const auto cal = perplexity_calibration(row, perplexity);
    if (!cal.converged)
      out.unconverged.push_back(i);
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (j != i)
        conditional(i, j) = cal.probabilities[k++];
  }
  out.joint = Matrix(n, n);
  const double denom = 2.0 * static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = std::max((conditional(i, j) + conditional(j, i)) / denom, kMinProbability);
      out.joint(i, j) = v;
      out.joint(j, i) = v;
    }
  return out;
}

namespace {

// Unnormalized Student-t kernel (1 + |y_i - y_j|^2)^-1 and its off-diagonal sum.
double student_kernel(const Matrix &y, Matrix &num) {
  const std::size_t n = y.rows();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num(i, i) = 0.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < y.cols(); ++c) {
        const double diff = y(i, c) - y(j, c);
        d2 += diff * diff;
      }
      const double v = 1.0 / (1.0 + d2);
      num(i, j) = v;
      num(j, i) = v;
      total += 2.0 * v;
    }
  }
  return total;
}

double kl_from_kernel(const Matrix &joint, const Matrix &num, double total) {
  const std::size_t n = joint.rows();
  double kl = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double p = joint(i, j);
      const double q = num(i, j) / total;
      kl += p * std::log(p / q);
    }
  return kl;
}

void gradient_from_kernel(const Matrix &joint, const Matrix &num, double total,
                          const Matrix &y, double exaggeration, Matrix &grad) {
  const std::size_t n = y.rows();
  std::fill(grad.data().begin(), grad.data().end(), 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j)
        continue;
      const double w = (exaggeration * joint(i, j) - num(i, j) / total) * num(i, j);
      for (std::size_t c = 0; c < y.cols(); ++c)
        grad(i, c) += 4.0 * w * (y(i, c) - y(j, c));
    }
}

} // namespace

double kl_divergence(const Matrix &joint, const Matrix &coords) {
  Matrix num(coords.rows(), coords.rows());
  const double total = student_kernel(coords, num);
  return kl_from_kernel(joint, num, total);
}

Matrix kl_gradient(const Matrix &joint, const Matrix &coords, double exaggeration) {
  Matrix num(coords.rows(), coords.rows());
  const double total = student_kernel(coords, num);
  Matrix grad(coords.rows(), coords.cols());
  gradient_from_kernel(joint, num, total, coords, exaggeration, grad);
  return grad;
}

Result run(const DistanceMatrix &dm, const Config &config) {
  const std::size_t n = dm.size();
  validate(config, n);
  Result res;
  res.config = config;
  res.config.perplexity = resolve_perplexity(config, n);

  auto affinities = joint_probabilities(dm, *res.config.perplexity);
  res.unconverged_rows = std::move(affinities.unconverged);
  const Matrix &joint = affinities.joint;

  constexpr std::size_t kDims = 2;
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> init(0.0, 1e-4);
  Matrix y(n, kDims);
  for (double &v : y.data())
    v = init(rng);

  Matrix update(n, kDims), grad(n, kDims), num(n, n);
  res.kl_trace.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    const double exaggeration = it < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum =
        it < config.momentum_switch_iteration ? config.initial_momentum : config.final_momentum;

    const double total = student_kernel(y, num);
    res.kl_trace.push_back(kl_from_kernel(joint, num, total));
    gradient_from_kernel(joint, num, total, y, exaggeration, grad);
    for (double g : grad.data())
      if (!std::isfinite(g))
        throw NumericError("tsne: non-finite gradient at iteration " + std::to_string(it));

    for (std::size_t k = 0; k < y.data().size(); ++k) {
      update.data()[k] = momentum * update.data()[k] - config.learning_rate * grad.data()[k];
      y.data()[k] += update.data()[k];
    }
    for (std::size_t c = 0; c < kDims; ++c) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        mean += y(i, c);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        y(i, c) -= mean;
    }
  }
  res.coords = std::move(y);
  return res;
}

Result run(const EmbeddingSet &set, const Config &config) {
  validate(config, set.size());
  return run(pairwise_divergence(set, config.input_metric), config);
}

} // namespace leakscope::tsne
