#pragma once
// Per-input smoothing-parameter search. Both routines ascend a Monte Carlo
// surrogate of the certified gap, differentiated through x + theta .* eps
// (reparameterization), with Adam on log theta.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ancer/nn.hpp"
#include "ancer/rng.hpp"
#include "ancer/smoothing.hpp"

namespace ancer {

enum class OptimizeMode { isotropic, ancer };

struct OptimizerConfig {
  std::size_t iterations = 100;
  std::size_t samples_per_iter = 100;
  double kappa = 2.0;
  // Unset means the mode default: 0.04 isotropic, 0.01 anisotropic.
  std::optional<double> learning_rate;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  // Draws for the final check that the anisotropic result still contains the
  // isotropic ball; 0 returns the ascent result unchecked.
  std::size_t accept_samples = 10000;
  double accept_z = 2.0;

  double learning_rate_for(OptimizeMode mode) const;
};

// Throws ConfigError on invalid values.
void validate(const OptimizerConfig& cfg);

// Flat key=value text; keys are the field names above. '#' starts a comment.
OptimizerConfig parse_optimizer_config(const std::string& text);
OptimizerConfig load_optimizer_config(const std::filesystem::path& path);
std::string format_optimizer_config(const OptimizerConfig& cfg);

struct SoftGapEstimate {
  double value = 0.0;
  std::vector<double> grad_theta;
  std::size_t top_class = 0;
  std::size_t runner_up = 1;
};

// Probability clamp applied before Phi^{-1} in the gaussian surrogate.
inline constexpr double kSoftGapClamp = 1e-4;

// Surrogate gap over m draws of parameter-free noise from rng:
//   gaussian  (Phi^{-1}(s_A) - Phi^{-1}(s_B)) / 2 with s clamped
//   uniform   s_A - s_B
// where s_c is the mean softmax score of class c at x + theta .* eps_j.
SoftGapEstimate soft_gap(const Classifier& model, std::span<const double> x,
                         const SmoothingSpec& spec, std::size_t m, RngStream& rng);

// Same surrogate on caller-provided noise (m rows of dim(x), row-major), so
// that nearby theta can be compared with common random numbers.
SoftGapEstimate soft_gap_from_noise(const Classifier& model, std::span<const double> x,
                                    SmoothingKind kind, std::span<const double> theta,
                                    std::span<const double> noise);

struct AdamState {
  AdamState(std::size_t dim, double beta1, double beta2, double eps);

  std::vector<double> m;
  std::vector<double> v;
  std::size_t t = 0;
  double beta1;
  double beta2;
  double eps;
};

// One bias-corrected Adam ascent step: params += lr * m_hat / (sqrt(v_hat) + eps).
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr);

// Objective  G * (geomean_weight * geomean(theta) + kappa * min_i theta_i),
// projected onto theta_i >= floor after every step. With tie_axes all axes
// share one parameter.
struct AscentObjective {
  double geomean_weight = 1.0;
  double kappa = 2.0;
  bool tie_axes = false;
  std::optional<double> floor;
};

using AscentObserver = std::function<void(std::size_t iteration, std::span<const double> theta)>;

std::vector<double> projected_ascent(const Classifier& model, std::span<const double> x,
                                     SmoothingKind kind, std::vector<double> theta,
                                     const AscentObjective& objective, double learning_rate,
                                     const OptimizerConfig& cfg, RngStream& rng,
                                     const AscentObserver& observer = {});

struct IsotropicSolution {
  double theta = 0.0;
  // theta * surrogate gap, re-estimated on a fresh stream.
  double radius = 0.0;
};

// Maximizes theta * G(theta) over a scalar theta shared by all axes.
IsotropicSolution optimize_isotropic(const Classifier& model, std::span<const double> x,
                                     SmoothingKind kind, double init_sigma,
                                     const OptimizerConfig& cfg, std::uint64_t sample_index = 0);

// Anisotropic volume maximization started from the isotropic solution:
// G * geomean(theta) + kappa * min_i theta_i * G subject to theta_i >= init.theta.
SmoothingSpec optimize_ancer(const Classifier& model, std::span<const double> x,
                             SmoothingKind kind, const IsotropicSolution& init,
                             const OptimizerConfig& cfg, std::uint64_t sample_index = 0,
                             const AscentObserver& observer = {});

}  // namespace ancer
