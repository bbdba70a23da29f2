#include <doctest.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ancer/errors.hpp"
#include "ancer/nn.hpp"
#include "ancer/rng.hpp"
#include "support.hpp"

using namespace ancer;

namespace {

Classifier identity_model() {
  DenseLayer l;
  l.rows = 2;
  l.cols = 2;
  l.weights = {1, 0, 0, 1};
  l.bias = {0, 0};
  return Classifier({l});
}

Classifier linear_model(RngStream& rng, std::size_t n, std::size_t k) {
  DenseLayer l;
  l.rows = k;
  l.cols = n;
  for (std::size_t i = 0; i < k * n; ++i) l.weights.push_back(rng.uniform_pm1());
  for (std::size_t i = 0; i < k; ++i) l.bias.push_back(rng.uniform_pm1());
  return Classifier({l});
}

}  // namespace

TEST_CASE("forward on an identity layer") {
  const Classifier m = identity_model();
  auto p = forward(m, std::vector<double>{0, 0});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-15));
  p = forward(m, std::vector<double>{std::log(3.0), 0});
  CHECK(std::abs(p[0] - 0.75) < 1e-15);
  CHECK(std::abs(p[1] - 0.25) < 1e-15);
  CHECK_THROWS_AS(forward(m, std::vector<double>{1, 2, 3}), InputShapeError);
}

TEST_CASE("forward matches the naive oracle and sums to one") {
  RngStream rng(1, 0);
  const Classifier m = init_classifier(std::vector<std::size_t>{5, 17, 9, 4}, 3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> x(5);
    for (auto& v : x) v = 3.0 * rng.uniform_pm1();
    const auto p = forward(m, x);
    const auto q = test::naive_forward(m, x);
    double total = 0.0;
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(std::abs(p[c] - q[c]) < 1e-14);
      total += p[c];
    }
    CHECK(std::abs(total - 1.0) < 1e-14);
  }
}

TEST_CASE("classifier validates layer chaining") {
  DenseLayer a;
  a.rows = 3;
  a.cols = 2;
  a.weights.assign(6, 0.0);
  a.bias.assign(3, 0.0);
  DenseLayer b = a;  // expects 2 inputs, gets 3
  CHECK_THROWS_AS(Classifier({a, b}), InputShapeError);
  CHECK_THROWS_AS(Classifier(std::vector<DenseLayer>{}), InputShapeError);
}

TEST_CASE("input gradient of a linear softmax model is the closed form") {
  RngStream rng(2, 0);
  const Classifier m = linear_model(rng, 3, 3);
  const std::vector<double> x{0.3, -0.2, 0.7};
  const auto p = forward(m, x);
  const auto& l = m.layers()[0];
  for (std::size_t head = 0; head < 3; ++head) {
    const auto g = input_gradient(m, x, head);
    for (std::size_t j = 0; j < 3; ++j) {
      double mean_w = 0.0;
      for (std::size_t c = 0; c < 3; ++c) mean_w += p[c] * l.weights[c * 3 + j];
      CHECK(std::abs(g[j] - p[head] * (l.weights[head * 3 + j] - mean_w)) < 1e-14);
    }
  }
  // symmetric point of the identity model: d p0/dx = p0 p1 (e0 - e1)
  const auto g = input_gradient(identity_model(), std::vector<double>{0, 0}, 0);
  CHECK(std::abs(g[0] - 0.25) < 1e-15);
  CHECK(std::abs(g[1] + 0.25) < 1e-15);
  CHECK_THROWS_AS(input_gradient(m, x, 3), std::out_of_range);
}

TEST_CASE("input gradient against central differences on the toy model") {
  const Classifier& m = test::toy_model();
  RngStream rng(3, 0);
  int checked = 0;
  while (checked < 20) {
    std::vector<double> x{2.5 * rng.uniform_pm1(), 2.5 * rng.uniform_pm1()};
    if (!test::away_from_kinks(m, x, 1e-2)) continue;
    const std::size_t j = rng.below(2), head = rng.below(2);
    const double h = 1e-4;
    auto xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const double fd = (test::naive_forward(m, xp)[head] - test::naive_forward(m, xm)[head]) / (2 * h);
    const double g = input_gradient(m, x, head)[j];
    if (std::abs(fd) < 1e-6) continue;  // relative error is meaningless at a flat point
    CHECK(std::abs(g - fd) / std::abs(fd) < 1e-5);
    ++checked;
  }
}

TEST_CASE("constant model has zero gradient") {
  const Classifier m = test::constant_model(3, 4, 2);
  const auto g = input_gradient(m, std::vector<double>{1, 2, 3}, 2);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("training") {
  const Dataset data = generate_radial_dataset(1000, 0.05, 1);
  const std::vector<std::size_t> arch{2, 32, 32, 2};
  TrainHyper h;
  h.lr = 0.1;
  h.seed = 7;
  SUBCASE("toy set is learned") {
    const TrainResult r = train_classifier(data, arch, h);
    CHECK(r.train_accuracy >= 0.95);
    CHECK(r.train_accuracy == accuracy(r.model, data));
  }
  SUBCASE("epochs=0 keeps the initialization") {
    h.epochs = 0;
    CHECK(train_classifier(data, arch, h).model == init_classifier(arch, h.seed));
  }
  SUBCASE("same seed, identical weights") {
    h.epochs = 5;
    CHECK(train_classifier(data, arch, h).model == train_classifier(data, arch, h).model);
    TrainHyper h2 = h;
    h2.seed = 8;
    CHECK(!(train_classifier(data, arch, h).model == train_classifier(data, arch, h2).model));
  }
  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(train_classifier(data, std::vector<std::size_t>{3, 2}, h), InvalidInputError);
    CHECK_THROWS_AS(train_classifier(Dataset{}, arch, h), InvalidInputError);
  }
}

TEST_CASE("model files") {
  const auto dir = test::temp_dir("nn");
  const Classifier m = init_classifier(std::vector<std::size_t>{3, 5, 2}, 9);
  save_model(m, dir / "m.txt");
  CHECK(load_model(dir / "m.txt") == m);

  std::ifstream in(dir / "m.txt");
  std::string text((std::istreambuf_iterator<char>(in)), {});
  {
    std::ofstream out(dir / "trunc.txt");
    out << text.substr(0, text.size() / 2);
  }
  CHECK_THROWS_AS(load_model(dir / "trunc.txt"), ParseError);
  {
    std::ofstream out(dir / "magic.txt");
    out << "NOT-A-MODEL\n" << text.substr(text.find('\n') + 1);
  }
  CHECK_THROWS_AS(load_model(dir / "magic.txt"), FormatError);
  CHECK_THROWS_AS(load_model(dir / "missing.txt"), ParseError);
}
