#include "ancer/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ancer/errors.hpp"
#include "ancer/simd.hpp"
#include "ancer/stats.hpp"
#include "ancer/textio.hpp"

namespace ancer {

double OptimizerConfig::learning_rate_for(OptimizeMode mode) const {
  if (learning_rate) return *learning_rate;
  return mode == OptimizeMode::isotropic ? 0.04 : 0.01;
}

void validate(const OptimizerConfig& cfg) {
  if (cfg.iterations < 1) throw ConfigError("iterations must be >= 1");
  if (cfg.samples_per_iter < 2) throw ConfigError("samples_per_iter must be >= 2");
  if (!(cfg.kappa > 0.0)) throw ConfigError("kappa must be positive");
  if (!(cfg.accept_z >= 0.0)) throw ConfigError("accept_z must be non-negative");
  if (cfg.learning_rate && !(*cfg.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(cfg.adam_beta1 >= 0.0 && cfg.adam_beta1 < 1.0)) throw ConfigError("adam_beta1 must lie in [0, 1)");
  if (!(cfg.adam_beta2 >= 0.0 && cfg.adam_beta2 < 1.0)) throw ConfigError("adam_beta2 must lie in [0, 1)");
  if (!(cfg.adam_eps > 0.0)) throw ConfigError("adam_eps must be positive");
}

OptimizerConfig parse_optimizer_config(const std::string& text) {
  OptimizerConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = textio::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(textio::trim(line.substr(0, eq)));
    const std::string_view value = textio::trim(line.substr(eq + 1));
    try {
      if (key == "iterations")
        cfg.iterations = textio::parse_size(value, line_no);
      else if (key == "samples_per_iter")
        cfg.samples_per_iter = textio::parse_size(value, line_no);
      else if (key == "kappa")
        cfg.kappa = textio::parse_double(value, line_no);
      else if (key == "learning_rate")
        cfg.learning_rate = textio::parse_double(value, line_no);
      else if (key == "adam_beta1")
        cfg.adam_beta1 = textio::parse_double(value, line_no);
      else if (key == "adam_beta2")
        cfg.adam_beta2 = textio::parse_double(value, line_no);
      else if (key == "adam_eps")
        cfg.adam_eps = textio::parse_double(value, line_no);
      else if (key == "seed")
        cfg.seed = textio::parse_size(value, line_no);
      else if (key == "accept_samples")
        cfg.accept_samples = textio::parse_size(value, line_no);
      else if (key == "accept_z")
        cfg.accept_z = textio::parse_double(value, line_no);
      else
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    } catch (const ParseError& e) {
      throw ConfigError(std::string("optimizer config: ") + e.what());
    }
  }
  validate(cfg);
  return cfg;
}

OptimizerConfig load_optimizer_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open optimizer config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_optimizer_config(buf.str());
}

std::string format_optimizer_config(const OptimizerConfig& cfg) {
  std::ostringstream out;
  out << "iterations=" << cfg.iterations << '\n'
      << "samples_per_iter=" << cfg.samples_per_iter << '\n'
      << "kappa=" << textio::format_double(cfg.kappa) << '\n';
  if (cfg.learning_rate) out << "learning_rate=" << textio::format_double(*cfg.learning_rate) << '\n';
  out << "adam_beta1=" << textio::format_double(cfg.adam_beta1) << '\n'
      << "adam_beta2=" << textio::format_double(cfg.adam_beta2) << '\n'
      << "adam_eps=" << textio::format_double(cfg.adam_eps) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "accept_samples=" << cfg.accept_samples << '\n'
      << "accept_z=" << textio::format_double(cfg.accept_z) << '\n';
  return out.str();
}

SoftGapEstimate soft_gap_from_noise(const Classifier& model, std::span<const double> x,
                                    SmoothingKind kind, std::span<const double> theta,
                                    std::span<const double> noise) {
  const std::size_t n = x.size();
  if (kind == SmoothingKind::gmm) throw SpecKindError("soft_gap supports gaussian and uniform specs");
  if (theta.size() != n || n != model.input_dim()) throw InputShapeError("soft_gap: dimension mismatch");
  if (n == 0 || noise.size() % n != 0) throw InputShapeError("soft_gap: noise is not a whole number of rows");
  const std::size_t m = noise.size() / n;
  if (m < 2) throw InvalidInputError("soft_gap needs at least two draws");
  const std::size_t classes = model.num_classes();
  if (classes < 2) throw InvalidInputError("soft_gap needs at least two classes");

  const auto& k = simd::kernels();
  Evaluator ev(model);
  std::vector<double> xp(n);
  std::vector<double> mean(classes, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    k.scale_add(x.data(), theta.data(), noise.data() + j * n, xp.data(), n);
    const auto p = ev.probabilities(xp);
    for (std::size_t c = 0; c < classes; ++c) mean[c] += p[c];
  }
  for (double& s : mean) s /= static_cast<double>(m);

  SoftGapEstimate est;
  est.top_class = static_cast<std::size_t>(std::max_element(mean.begin(), mean.end()) - mean.begin());
  est.runner_up = est.top_class == 0 ? 1 : 0;
  for (std::size_t c = 0; c < classes; ++c)
    if (c != est.top_class && mean[c] > mean[est.runner_up]) est.runner_up = c;

  const double sa = mean[est.top_class];
  const double sb = mean[est.runner_up];
  double coef_a = 1.0;
  double coef_b = 1.0;
  if (kind == SmoothingKind::gaussian) {
    auto branch = [](double s, double& coef) {
      const double clamped = std::clamp(s, kSoftGapClamp, 1.0 - kSoftGapClamp);
      const double z = stats::std_normal_icdf(clamped);
      // d Phi^{-1}(s) / ds = 1 / phi(Phi^{-1}(s)); zero where the clamp is active.
      coef = (s > kSoftGapClamp && s < 1.0 - kSoftGapClamp) ? 0.5 / stats::std_normal_pdf(z) : 0.0;
      return z;
    };
    const double za = branch(sa, coef_a);
    const double zb = branch(sb, coef_b);
    est.value = 0.5 * (za - zb);
  } else {
    est.value = sa - sb;
  }

  est.grad_theta.assign(n, 0.0);
  if (coef_a == 0.0 && coef_b == 0.0) return est;

  std::vector<double> upstream(classes, 0.0);
  upstream[est.top_class] = coef_a;
  upstream[est.runner_up] = -coef_b;
  std::vector<double> gx(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double* eps = noise.data() + j * n;
    k.scale_add(x.data(), theta.data(), eps, xp.data(), n);
    ev.probabilities(xp);
    ev.input_vjp(upstream, gx);
    // d/d theta_i of f(x + theta .* eps) = (grad_x f)_i * eps_i
    for (std::size_t i = 0; i < n; ++i) est.grad_theta[i] += gx[i] * eps[i] * inv_m;
  }
  return est;
}

SoftGapEstimate soft_gap(const Classifier& model, std::span<const double> x,
                         const SmoothingSpec& spec, std::size_t m, RngStream& rng) {
  if (spec.kind == SmoothingKind::gmm) throw SpecKindError("soft_gap supports gaussian and uniform specs");
  if (m < 2) throw InvalidInputError("soft_gap needs at least two draws");
  validate(spec);
  if (x.size() != spec.dim()) throw InputShapeError("soft_gap: dimension mismatch");
  std::vector<double> noise(m * x.size());
  draw_noise(spec.kind, rng, noise);
  return soft_gap_from_noise(model, x, spec.kind, spec.theta, noise);
}

AdamState::AdamState(std::size_t dim, double b1, double b2, double e)
    : m(dim, 0.0), v(dim, 0.0), beta1(b1), beta2(b2), eps(e) {}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != state.m.size() || grad.size() != state.m.size())
    throw InputShapeError("adam_step: dimension mismatch");
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grad[i] * grad[i];
    const double m_hat = state.m[i] / correction1;
    const double v_hat = state.v[i] / correction2;
    params[i] += lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

std::vector<double> projected_ascent(const Classifier& model, std::span<const double> x,
                                     SmoothingKind kind, std::vector<double> theta,
                                     const AscentObjective& objective, double learning_rate,
                                     const OptimizerConfig& cfg, RngStream& rng,
                                     const AscentObserver& observer) {
  validate(cfg);
  const std::size_t n = x.size();
  if (theta.size() != n) throw InputShapeError("projected_ascent: theta dimension mismatch");
  for (double t : theta)
    if (!(t > 0.0)) throw DomainError("projected_ascent: initial theta must be positive");
  if (objective.floor && !(*objective.floor > 0.0)) throw DomainError("projected_ascent: floor must be positive");

  const std::size_t free_dim = objective.tie_axes ? 1 : n;
  AdamState adam(free_dim, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  std::vector<double> log_theta(free_dim);
  std::vector<double> grad(free_dim);
  std::vector<double> noise(cfg.samples_per_iter * n);
  const double inv_n = 1.0 / static_cast<double>(n);

  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    draw_noise(kind, rng, noise);
    const SoftGapEstimate est = soft_gap_from_noise(model, x, kind, theta, noise);

    double sum_log = 0.0;
    for (double t : theta) sum_log += std::log(t);
    const double geomean = std::exp(sum_log * inv_n);
    const std::size_t argmin = static_cast<std::size_t>(std::min_element(theta.begin(), theta.end()) - theta.begin());
    const double theta_min = theta[argmin];
    const double scale = objective.geomean_weight * geomean + objective.kappa * theta_min;

    // d/d log theta_i of G * (w * geomean + kappa * min theta)
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double g = theta[i] * est.grad_theta[i] * scale + est.value * objective.geomean_weight * geomean * inv_n;
      if (i == argmin) g += est.value * objective.kappa * theta_min;
      grad[objective.tie_axes ? 0 : i] += g;
    }

    if (objective.tie_axes) {
      log_theta[0] = std::log(theta[0]);
    } else {
      for (std::size_t i = 0; i < n; ++i) log_theta[i] = std::log(theta[i]);
    }
    adam_step(adam, log_theta, grad, learning_rate);
    for (std::size_t i = 0; i < n; ++i) {
      theta[i] = std::exp(log_theta[objective.tie_axes ? 0 : i]);
      if (objective.floor) theta[i] = std::max(theta[i], *objective.floor);
    }
    if (observer) observer(it, theta);
  }
  return theta;
}

IsotropicSolution optimize_isotropic(const Classifier& model, std::span<const double> x,
                                     SmoothingKind kind, double init_sigma,
                                     const OptimizerConfig& cfg, std::uint64_t sample_index) {
  if (!(init_sigma > 0.0)) throw DomainError("optimize_isotropic: init_sigma must be positive");
  if (kind == SmoothingKind::gmm) throw SpecKindError("optimization supports gaussian and uniform specs");
  const AscentObjective objective{0.0, 1.0, true, std::nullopt};
  RngStream rng(cfg.seed, stream_id(sample_index, Phase::optimize_isotropic));
  const auto theta = projected_ascent(model, x, kind, std::vector<double>(x.size(), init_sigma), objective,
                                      cfg.learning_rate_for(OptimizeMode::isotropic), cfg, rng);
  RngStream fresh(cfg.seed, stream_id(sample_index, Phase::reestimate));
  const SmoothingSpec spec = SmoothingSpec::isotropic(kind, x.size(), theta[0]);
  const SoftGapEstimate est = soft_gap(model, x, spec, cfg.samples_per_iter, fresh);
  return {theta[0], theta[0] * est.value};
}

namespace {

// Paired test on common noise draws: the anisotropic enclosed-ball radius must
// beat the isotropic radius by accept_z standard errors (delta method on the
// two vote fractions). Ascent noise near an interior isotropic optimum tends to
// lift axes while losing gap, which shrinks the enclosed ball.
bool keeps_isotropic_ball(const Classifier& model, std::span<const double> x, SmoothingKind kind,
                          double iso, std::span<const double> theta, const OptimizerConfig& cfg,
                          std::uint64_t sample_index) {
  const std::size_t n = x.size(), m = cfg.accept_samples;
  const std::size_t k = model.num_classes();
  Evaluator eval(model);
  RngStream rng(cfg.seed, stream_id(sample_index, Phase::accept));
  std::vector<double> eps(n), z(n);
  std::vector<std::size_t> pred_iso(m), pred_ani(m), c_iso(k, 0);
  for (std::size_t j = 0; j < m; ++j) {
    draw_noise(kind, rng, eps);
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + iso * eps[i];
    pred_iso[j] = eval.predict(z);
    ++c_iso[pred_iso[j]];
    for (std::size_t i = 0; i < n; ++i) z[i] = x[i] + theta[i] * eps[i];
    pred_ani[j] = eval.predict(z);
  }
  const auto top = static_cast<std::size_t>(std::max_element(c_iso.begin(), c_iso.end()) - c_iso.begin());
  double hit_i = 0, hit_a = 0, hit_both = 0;
  for (std::size_t j = 0; j < m; ++j) {
    hit_i += pred_iso[j] == top;
    hit_a += pred_ani[j] == top;
    hit_both += pred_iso[j] == top && pred_ani[j] == top;
  }
  const double md = static_cast<double>(m);
  const double cap = (md - 0.5) / md;
  const double p_i = std::min(hit_i / md, cap), p_a = std::min(hit_a / md, cap);
  if (p_a <= 0.5 || p_i <= 0.5) return false;
  const bool gauss = kind == SmoothingKind::gaussian;
  const auto gap = [&](double p) { return gauss ? stats::std_normal_icdf(p) : 2.0 * p - 1.0; };
  const auto slope = [&](double p) { return gauss ? 1.0 / stats::std_normal_pdf(stats::std_normal_icdf(p)) : 2.0; };
  const double t_min = *std::min_element(theta.begin(), theta.end());
  const double da = t_min * slope(p_a), di = iso * slope(p_i);
  // Binomial variances floored at one half-count so a zero-disagreement run is not certain.
  const double floor_var = 0.5 / md * (1.0 - 0.5 / md);
  const double var_a = std::max(p_a * (1.0 - p_a), floor_var);
  const double var_i = std::max(p_i * (1.0 - p_i), floor_var);
  const double cov = hit_both / md - (hit_a / md) * (hit_i / md);
  // A perfect tie still carries the uncertainty of one disagreeing draw.
  const double tie_var = 0.25 * (da + di) * (da + di) / md;
  const double var = std::max(tie_var, da * da * var_a + di * di * var_i - 2.0 * da * di * cov) / md;
  return t_min * gap(p_a) - iso * gap(p_i) >= cfg.accept_z * std::sqrt(var);
}

}  // namespace

SmoothingSpec optimize_ancer(const Classifier& model, std::span<const double> x,
                             SmoothingKind kind, const IsotropicSolution& init,
                             const OptimizerConfig& cfg, std::uint64_t sample_index,
                             const AscentObserver& observer) {
  if (!(init.theta > 0.0)) throw DomainError("optimize_ancer: isotropic initialization must be positive");
  if (kind == SmoothingKind::gmm) throw SpecKindError("optimization supports gaussian and uniform specs");
  const AscentObjective objective{1.0, cfg.kappa, false, init.theta};
  RngStream rng(cfg.seed, stream_id(sample_index, Phase::optimize_ancer));
  auto theta = projected_ascent(model, x, kind, std::vector<double>(x.size(), init.theta), objective,
                                cfg.learning_rate_for(OptimizeMode::ancer), cfg, rng, observer);
  if (cfg.accept_samples > 0 && !keeps_isotropic_ball(model, x, kind, init.theta, theta, cfg, sample_index))
    std::fill(theta.begin(), theta.end(), init.theta);
  return kind == SmoothingKind::gaussian ? SmoothingSpec::gaussian(std::move(theta))
                                         : SmoothingSpec::uniform(std::move(theta));
}

}  // namespace ancer
