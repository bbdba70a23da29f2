#pragma once
// Independent oracles and shared fixtures for the unit tests.
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ancer/datasets.hpp"
#include "ancer/nn.hpp"

namespace test {

// Toy model trained once per process with the pipeline defaults.
inline const ancer::Classifier& toy_model() {
  static const ancer::Classifier model = [] {
    const ancer::Dataset data = ancer::generate_radial_dataset(1000, 0.05, 1);
    const std::vector<std::size_t> arch{2, 32, 32, 2};
    ancer::TrainHyper h;
    h.lr = 0.1;
    h.epochs = 200;
    h.batch = 32;
    h.seed = 7;
    return ancer::train_classifier(data, arch, h).model;
  }();
  return model;
}

// Phi by the positive-term series erf(z) = 2/sqrt(pi) e^{-z^2} sum z^{2k+1} 2^k / (1*3*...*(2k+1)).
inline double phi_series(double x) {
  const double z = std::abs(x) / std::numbers::sqrt2;
  double term = z, sum = z;
  for (int k = 1; k < 500; ++k) {
    term *= 2.0 * z * z / (2.0 * k + 1.0);
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  const double erf = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-z * z) * sum;
  return x >= 0 ? 0.5 * (1.0 + erf) : 0.5 * (1.0 - erf);
}

template <class F>
double bisect(F f, double lo, double hi, int iters = 200) {
  // f increasing, root in [lo, hi]
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double icdf_bisect(double p) {
  return bisect([p](double x) { return phi_series(x) - p; }, -40.0, 40.0);
}

// P[Bin(n, p) >= k] by direct log-space summation.
inline double binom_tail_sum(std::uint64_t k, std::uint64_t n, double p) {
  if (k == 0) return 1.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double total = 0.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  for (std::uint64_t j = k; j <= n; ++j) {
    const double lc = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    total += std::exp(lc + j * lp + (n - j) * lq);
  }
  return total;
}

// Largest p with P[Bin(n, p) >= k] <= alpha.
inline double cp_lower_oracle(std::uint64_t k, std::uint64_t n, double alpha) {
  if (k == 0) return 0.0;
  return bisect([&](double p) { return binom_tail_sum(k, n, p) - alpha; }, 0.0, 1.0, 80);
}

// Straightforward forward pass without the evaluator or SIMD kernels.
inline std::vector<double> naive_forward(const ancer::Classifier& model, std::span<const double> x) {
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : model.layers()) {
    std::vector<double> z(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      double s = layer.bias[r];
      for (std::size_t c = 0; c < layer.cols; ++c) s += layer.weights[r * layer.cols + c] * a[c];
      z[r] = layer.activation == ancer::Activation::relu ? std::max(s, 0.0) : s;
    }
    a = std::move(z);
  }
  double mx = a[0];
  for (double v : a) mx = std::max(mx, v);
  double total = 0.0;
  for (double& v : a) total += (v = std::exp(v - mx));
  for (double& v : a) v /= total;
  return a;
}

// True when no hidden pre-activation lies within `margin` of zero.
inline bool away_from_kinks(const ancer::Classifier& model, std::span<const double> x, double margin) {
  std::vector<double> a(x.begin(), x.end());
  for (const auto& layer : model.layers()) {
    std::vector<double> z(layer.rows);
    for (std::size_t r = 0; r < layer.rows; ++r) {
      double s = layer.bias[r];
      for (std::size_t c = 0; c < layer.cols; ++c) s += layer.weights[r * layer.cols + c] * a[c];
      if (layer.activation == ancer::Activation::relu && std::abs(s) < margin) return false;
      z[r] = layer.activation == ancer::Activation::relu ? std::max(s, 0.0) : s;
    }
    a = std::move(z);
  }
  return true;
}

inline ancer::Classifier constant_model(std::size_t n, std::size_t k, std::size_t favored) {
  ancer::DenseLayer l;
  l.rows = k;
  l.cols = n;
  l.weights.assign(k * n, 0.0);
  l.bias.assign(k, 0.0);
  l.bias[favored] = 1.0;
  return ancer::Classifier({l});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ancer_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
