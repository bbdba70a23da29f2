#pragma once
// Small dense feed-forward classifier whose outputs live on the probability
// simplex. Everything is double precision.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "ancer/dataset.hpp"

namespace ancer {

enum class Activation { relu, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct DenseLayer {
  std::size_t rows = 0;  // outputs
  std::size_t cols = 0;  // inputs
  std::vector<double> weights;  // row-major rows x cols
  std::vector<double> bias;     // rows
  Activation activation = Activation::identity;

  std::span<const double> row(std::size_t r) const {
    return {weights.data() + r * cols, cols};
  }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

class Classifier {
 public:
  Classifier() = default;
  // Validates that layer shapes chain; throws InputShapeError otherwise.
  explicit Classifier(std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return input_dim_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::size_t max_width() const noexcept { return max_width_; }

  friend bool operator==(const Classifier&, const Classifier&) = default;

 private:
  std::vector<DenseLayer> layers_;
  std::size_t input_dim_ = 0;
  std::size_t num_classes_ = 0;
  std::size_t max_width_ = 0;
};

// Reusable scratch space for repeated evaluation of one model. Not
// thread-safe; give each worker its own.
class Evaluator {
 public:
  explicit Evaluator(const Classifier& model);

  // Softmax output. The returned view is valid until the next call.
  std::span<const double> probabilities(std::span<const double> x);

  // argmax of probabilities(x), lowest index on ties.
  std::size_t predict(std::span<const double> x);

  // Gradient w.r.t. the input of sum_c upstream[c] * softmax_c, evaluated at
  // the point passed to the most recent probabilities()/predict() call.
  void input_vjp(std::span<const double> upstream, std::span<double> grad_out);

  const Classifier& model() const noexcept { return *model_; }

 private:
  void check_input(std::span<const double> x) const;

  const Classifier* model_;
  std::vector<std::vector<double>> pre_;   // pre-activations per layer
  std::vector<std::vector<double>> post_;  // post-activations per layer
  std::vector<double> input_;
  std::vector<double> probs_;
  std::vector<double> grad_a_;
  std::vector<double> grad_b_;
};

std::vector<double> forward(const Classifier& model, std::span<const double> x);

// d softmax_head / dx.
std::vector<double> input_gradient(const Classifier& model, std::span<const double> x,
                                   std::size_t head);

struct TrainHyper {
  double lr = 0.05;
  std::size_t epochs = 200;
  std::size_t batch = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  Classifier model;
  double train_accuracy = 0.0;
};

// Xavier-uniform initialization of an MLP with ReLU hidden layers and an
// identity output layer; arch = {n, hidden..., K}.
Classifier init_classifier(std::span<const std::size_t> arch, std::uint64_t seed);

// Minibatch SGD on softmax cross-entropy.
TrainResult train_classifier(const Dataset& data, std::span<const std::size_t> arch,
                             const TrainHyper& hyper);

double accuracy(const Classifier& model, const Dataset& data);

void save_model(const Classifier& model, const std::filesystem::path& path);
Classifier load_model(const std::filesystem::path& path);

}  // namespace ancer
