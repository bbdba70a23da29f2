#include "ancer/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "ancer/errors.hpp"
#include "ancer/rng.hpp"
#include "ancer/simd.hpp"
#include "ancer/textio.hpp"

namespace ancer {

std::size_t Dataset::num_classes() const noexcept {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

void validate(const Dataset& data, std::size_t num_classes) {
  if (data.inputs.size() != data.labels.size())
    throw InvalidInputError("dataset has " + std::to_string(data.inputs.size()) + " inputs but " +
                            std::to_string(data.labels.size()) + " labels");
  const std::size_t d = data.dim();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.inputs[i].size() != d)
      throw InvalidInputError("sample " + std::to_string(i) + " has dimension " +
                              std::to_string(data.inputs[i].size()) + ", expected " + std::to_string(d));
    if (num_classes != 0 && data.labels[i] >= num_classes)
      throw InvalidInputError("sample " + std::to_string(i) + " label out of range");
  }
}

std::string_view to_string(Activation a) { return a == Activation::relu ? "relu" : "identity"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::relu;
  if (name == "identity") return Activation::identity;
  throw ParseError("unknown activation '" + std::string(name) + "'");
}

Classifier::Classifier(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw InputShapeError("classifier needs at least one layer");
  for (std::size_t t = 0; t < layers_.size(); ++t) {
    const DenseLayer& l = layers_[t];
    if (l.rows == 0 || l.cols == 0) throw InputShapeError("layer " + std::to_string(t) + " is empty");
    if (l.weights.size() != l.rows * l.cols || l.bias.size() != l.rows)
      throw InputShapeError("layer " + std::to_string(t) + " storage does not match its shape");
    if (t > 0 && l.cols != layers_[t - 1].rows)
      throw InputShapeError("layer " + std::to_string(t) + " expects " + std::to_string(l.cols) +
                            " inputs but previous layer emits " + std::to_string(layers_[t - 1].rows));
    max_width_ = std::max({max_width_, l.rows, l.cols});
  }
  input_dim_ = layers_.front().cols;
  num_classes_ = layers_.back().rows;
}

Evaluator::Evaluator(const Classifier& model) : model_(&model) {
  for (const DenseLayer& l : model.layers()) {
    pre_.emplace_back(l.rows);
    post_.emplace_back(l.rows);
  }
  input_.resize(model.input_dim());
  probs_.resize(model.num_classes());
  grad_a_.resize(model.max_width());
  grad_b_.resize(model.max_width());
}

void Evaluator::check_input(std::span<const double> x) const {
  if (x.size() != model_->input_dim())
    throw InputShapeError("input has dimension " + std::to_string(x.size()) + ", model expects " +
                          std::to_string(model_->input_dim()));
}

std::span<const double> Evaluator::probabilities(std::span<const double> x) {
  check_input(x);
  const auto& k = simd::kernels();
  std::copy(x.begin(), x.end(), input_.begin());
  const double* in = input_.data();
  const auto& layers = model_->layers();
  for (std::size_t t = 0; t < layers.size(); ++t) {
    const DenseLayer& l = layers[t];
    double* z = pre_[t].data();
    for (std::size_t r = 0; r < l.rows; ++r)
      z[r] = k.dot(l.weights.data() + r * l.cols, in, l.cols) + l.bias[r];
    double* a = post_[t].data();
    std::copy(z, z + l.rows, a);
    if (l.activation == Activation::relu) k.relu(a, l.rows);
    in = a;
  }
  const std::vector<double>& logits = post_.back();
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t c = 0; c < probs_.size(); ++c) {
    probs_[c] = std::exp(logits[c] - top);
    total += probs_[c];
  }
  for (double& p : probs_) p /= total;
  return probs_;
}

std::size_t Evaluator::predict(std::span<const double> x) {
  const auto p = probabilities(x);
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

void Evaluator::input_vjp(std::span<const double> upstream, std::span<double> grad_out) {
  if (upstream.size() != model_->num_classes())
    throw InputShapeError("upstream vector must have one entry per class");
  if (grad_out.size() != model_->input_dim())
    throw InputShapeError("gradient buffer must match the input dimension");
  const auto& k = simd::kernels();
  const auto& layers = model_->layers();

  // softmax backward: dz_c = p_c (u_c - <u, p>)
  const double mean = std::inner_product(upstream.begin(), upstream.end(), probs_.begin(), 0.0);
  double* g = grad_a_.data();
  for (std::size_t c = 0; c < probs_.size(); ++c) g[c] = probs_[c] * (upstream[c] - mean);

  for (std::size_t t = layers.size(); t-- > 0;) {
    const DenseLayer& l = layers[t];
    if (l.activation == Activation::relu) {
      const double* z = pre_[t].data();
      for (std::size_t r = 0; r < l.rows; ++r)
        if (!(z[r] > 0.0)) g[r] = 0.0;
    }
    double* next = (g == grad_a_.data()) ? grad_b_.data() : grad_a_.data();
    std::fill(next, next + l.cols, 0.0);
    for (std::size_t r = 0; r < l.rows; ++r)
      if (g[r] != 0.0) k.axpy(g[r], l.weights.data() + r * l.cols, next, l.cols);
    g = next;
  }
  std::copy(g, g + grad_out.size(), grad_out.begin());
}

std::vector<double> forward(const Classifier& model, std::span<const double> x) {
  Evaluator ev(model);
  const auto p = ev.probabilities(x);
  return {p.begin(), p.end()};
}

std::vector<double> input_gradient(const Classifier& model, std::span<const double> x,
                                   std::size_t head) {
  if (head >= model.num_classes())
    throw std::out_of_range("head " + std::to_string(head) + " out of range for " +
                            std::to_string(model.num_classes()) + " classes");
  Evaluator ev(model);
  ev.probabilities(x);
  std::vector<double> upstream(model.num_classes(), 0.0);
  upstream[head] = 1.0;
  std::vector<double> grad(model.input_dim());
  ev.input_vjp(upstream, grad);
  return grad;
}

Classifier init_classifier(std::span<const std::size_t> arch, std::uint64_t seed) {
  if (arch.size() < 2) throw InvalidInputError("architecture needs input and output sizes");
  RngStream rng(seed, 0);
  std::vector<DenseLayer> layers;
  for (std::size_t t = 0; t + 1 < arch.size(); ++t) {
    DenseLayer l;
    l.cols = arch[t];
    l.rows = arch[t + 1];
    if (l.rows == 0 || l.cols == 0) throw InvalidInputError("architecture sizes must be positive");
    const double limit = std::sqrt(6.0 / static_cast<double>(l.rows + l.cols));
    l.weights.resize(l.rows * l.cols);
    for (double& w : l.weights) w = limit * rng.uniform_pm1();
    l.bias.assign(l.rows, 0.0);
    l.activation = (t + 2 < arch.size()) ? Activation::relu : Activation::identity;
    layers.push_back(std::move(l));
  }
  return Classifier(std::move(layers));
}

double accuracy(const Classifier& model, const Dataset& data) {
  if (data.empty()) return 0.0;
  Evaluator ev(model);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    if (ev.predict(data.inputs[i]) == data.labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainResult train_classifier(const Dataset& data, std::span<const std::size_t> arch,
                             const TrainHyper& hyper) {
  if (data.empty()) throw InvalidInputError("cannot train on an empty dataset");
  if (arch.size() < 2 || arch.front() != data.dim())
    throw InvalidInputError("architecture input size does not match the data dimension");
  validate(data, arch.back());
  if (hyper.batch == 0) throw InvalidInputError("batch size must be positive");

  std::vector<DenseLayer> layers = init_classifier(arch, hyper.seed).layers();
  const std::size_t depth = layers.size();

  std::vector<std::vector<double>> grad_w(depth), grad_b(depth), pre(depth), post(depth), delta(depth);
  for (std::size_t t = 0; t < depth; ++t) {
    grad_w[t].resize(layers[t].weights.size());
    grad_b[t].resize(layers[t].rows);
    pre[t].resize(layers[t].rows);
    post[t].resize(layers[t].rows);
    delta[t].resize(layers[t].rows);
  }

  const auto& k = simd::kernels();
  RngStream shuffle_rng(hyper.seed, 1);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    for (std::size_t start = 0; start < order.size(); start += hyper.batch) {
      const std::size_t stop = std::min(order.size(), start + hyper.batch);
      for (std::size_t t = 0; t < depth; ++t) {
        std::fill(grad_w[t].begin(), grad_w[t].end(), 0.0);
        std::fill(grad_b[t].begin(), grad_b[t].end(), 0.0);
      }
      for (std::size_t s = start; s < stop; ++s) {
        const std::vector<double>& x = data.inputs[order[s]];
        const double* in = x.data();
        for (std::size_t t = 0; t < depth; ++t) {
          const DenseLayer& l = layers[t];
          for (std::size_t r = 0; r < l.rows; ++r)
            pre[t][r] = k.dot(l.weights.data() + r * l.cols, in, l.cols) + l.bias[r];
          post[t] = pre[t];
          if (l.activation == Activation::relu) k.relu(post[t].data(), l.rows);
          in = post[t].data();
        }
        // cross-entropy on softmax: d loss / d logits = p - onehot
        std::vector<double>& out = delta[depth - 1];
        const double top = *std::max_element(post[depth - 1].begin(), post[depth - 1].end());
        double total = 0.0;
        for (std::size_t c = 0; c < out.size(); ++c) {
          out[c] = std::exp(post[depth - 1][c] - top);
          total += out[c];
        }
        for (double& v : out) v /= total;
        out[data.labels[order[s]]] -= 1.0;

        for (std::size_t t = depth; t-- > 0;) {
          const DenseLayer& l = layers[t];
          if (l.activation == Activation::relu)
            for (std::size_t r = 0; r < l.rows; ++r)
              if (!(pre[t][r] > 0.0)) delta[t][r] = 0.0;
          const double* prev = (t == 0) ? x.data() : post[t - 1].data();
          for (std::size_t r = 0; r < l.rows; ++r) {
            if (delta[t][r] == 0.0) continue;
            k.axpy(delta[t][r], prev, grad_w[t].data() + r * l.cols, l.cols);
            grad_b[t][r] += delta[t][r];
          }
          if (t > 0) {
            std::fill(delta[t - 1].begin(), delta[t - 1].end(), 0.0);
            for (std::size_t r = 0; r < l.rows; ++r)
              if (delta[t][r] != 0.0) k.axpy(delta[t][r], l.weights.data() + r * l.cols, delta[t - 1].data(), l.cols);
          }
        }
      }
      const double step = -hyper.lr / static_cast<double>(stop - start);
      for (std::size_t t = 0; t < depth; ++t) {
        k.axpy(step, grad_w[t].data(), layers[t].weights.data(), grad_w[t].size());
        k.axpy(step, grad_b[t].data(), layers[t].bias.data(), grad_b[t].size());
      }
    }
  }

  TrainResult result{Classifier(std::move(layers)), 0.0};
  result.train_accuracy = accuracy(result.model, data);
  return result;
}

void save_model(const Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << "ANCER-MLP v1\n";
  out << model.layers().size() << ' ' << model.input_dim() << ' ' << model.num_classes() << '\n';
  for (const DenseLayer& l : model.layers()) {
    out << l.rows << ' ' << l.cols << ' ' << to_string(l.activation) << '\n';
    for (std::size_t r = 0; r < l.rows; ++r) {
      for (std::size_t c = 0; c < l.cols; ++c) {
        if (c) out << ' ';
        out << textio::format_double17(l.weights[r * l.cols + c]);
      }
      out << '\n';
    }
    for (std::size_t r = 0; r < l.rows; ++r) {
      if (r) out << ' ';
      out << textio::format_double17(l.bias[r]);
    }
    out << '\n';
  }
  if (!out) throw Error("failed writing model to '" + path.string() + "'");
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) throw ParseError(std::string("unexpected end of file, expected ") + what, line_no_ + 1);
    ++line_no_;
    return line;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

std::vector<double> parse_row(const std::string& line, std::size_t expected, std::size_t line_no) {
  const auto tokens = textio::split_ws(line);
  if (tokens.size() != expected)
    throw ParseError("expected " + std::to_string(expected) + " values, found " + std::to_string(tokens.size()), line_no);
  std::vector<double> row;
  row.reserve(expected);
  for (auto tok : tokens) row.push_back(textio::parse_double(tok, line_no));
  return row;
}

}  // namespace

Classifier load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file '" + path.string() + "'");
  LineReader reader(in);
  if (textio::trim(reader.next("magic line")) != "ANCER-MLP v1")
    throw FormatError("not an ANCER-MLP v1 model file", 1);

  const std::string header = reader.next("header");
  const auto h = textio::split_ws(header);
  if (h.size() != 3) throw ParseError("header must be 'L n K'", reader.line_no());
  const std::size_t depth = textio::parse_size(h[0], reader.line_no());
  const std::size_t n = textio::parse_size(h[1], reader.line_no());
  const std::size_t classes = textio::parse_size(h[2], reader.line_no());

  std::vector<DenseLayer> layers;
  for (std::size_t t = 0; t < depth; ++t) {
    const std::string shape = reader.next("layer shape");
    const auto s = textio::split_ws(shape);
    if (s.size() != 3) throw ParseError("layer line must be 'rows cols activation'", reader.line_no());
    DenseLayer l;
    l.rows = textio::parse_size(s[0], reader.line_no());
    l.cols = textio::parse_size(s[1], reader.line_no());
    try {
      l.activation = parse_activation(s[2]);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), reader.line_no());
    }
    l.weights.reserve(l.rows * l.cols);
    for (std::size_t r = 0; r < l.rows; ++r) {
      const std::string line = reader.next("weight row");
      const auto row = parse_row(line, l.cols, reader.line_no());
      l.weights.insert(l.weights.end(), row.begin(), row.end());
    }
    l.bias = parse_row(reader.next("bias row"), l.rows, reader.line_no());
    layers.push_back(std::move(l));
  }
  Classifier model;
  try {
    model = Classifier(std::move(layers));
  } catch (const InputShapeError& e) {
    throw ParseError(std::string("inconsistent layer shapes: ") + e.what(), reader.line_no());
  }
  if (model.input_dim() != n || model.num_classes() != classes)
    throw ParseError("header dimensions disagree with layer shapes", 2);
  return model;
}

}  // namespace ancer
