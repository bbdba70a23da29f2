#pragma once
// End-to-end pipeline: data -> model -> per-sample optimization (isotropic,
// then anisotropic) -> certification of the fixed, isotropic and anisotropic
// variants -> report files and a metric summary.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ancer/certify.hpp"
#include "ancer/metrics.hpp"
#include "ancer/optimize.hpp"

namespace ancer {

struct ExperimentConfig {
  std::filesystem::path out_dir = "ancer_out";

  // toy | csv | idx
  std::string data = "toy";
  std::size_t train_count = 1000;
  std::size_t test_count = 240;
  double noise = 0.05;
  std::uint64_t data_seed = 1;
  std::filesystem::path train_path, train_labels_path;
  std::filesystem::path test_path, test_labels_path;

  bool train = true;
  std::filesystem::path model_path;
  std::vector<std::size_t> arch{2, 32, 32, 2};
  std::size_t epochs = 200;
  double train_lr = 0.1;
  std::size_t batch = 32;
  std::uint64_t train_seed = 7;

  SmoothingKind kind = SmoothingKind::gaussian;
  double init_sigma = 0.25;
  CertifyConfig certify;
  std::uint64_t cert_seed = 2024;
  std::size_t threads = 1;
  bool record_time = false;

  OptimizerConfig optimizer;
};

// Flat key=value text. Optimizer keys use the OptimizerConfig field names;
// unknown keys are a ConfigError.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);
// Every key in a fixed order, the input of the fingerprint.
std::string canonical_config(const ExperimentConfig& cfg);
std::string config_fingerprint(const ExperimentConfig& cfg);

struct ExperimentResult {
  double train_accuracy = 0.0;
  CertificationReport fixed;
  CertificationReport isotropic;
  CertificationReport ancer;
  SupersetStats ancer_vs_isotropic;
  SupersetStats ancer_vs_fixed;
  FactorData factors;
  std::string summary;
};

// Writes model.txt (when trained), {fixed,isotropic,ancer}.csv with theta
// companions, factors.csv, curves.csv and summary.txt under out_dir. Errors
// are rethrown with the failing stage prefixed to the message.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace ancer
