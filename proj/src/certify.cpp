#include "ancer/certify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include "ancer/errors.hpp"
#include "ancer/parallel.hpp"
#include "ancer/stats.hpp"

namespace ancer {
namespace {

std::size_t argmax_count(std::span<const std::uint64_t> counts) {
  return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void require_kind(const SmoothingSpec& spec, SmoothingKind kind, const char* op) {
  if (spec.kind != kind)
    throw SpecKindError(std::string(op) + " needs a " + std::string(to_string(kind)) + " spec, got " +
                        std::string(to_string(spec.kind)));
}

Certificate run_certify(const Classifier& model, std::span<const double> x, const SmoothingSpec& spec,
                        const CertifyConfig& cfg, RngStream& rng) {
  if (cfg.n0 == 0 || cfg.n == 0) throw InvalidInputError("certify needs n0 >= 1 and n >= 1");
  const auto selection = predict_counts(model, x, spec, cfg.n0, rng);
  const std::size_t guess = argmax_count(selection);
  const auto estimation = predict_counts(model, x, spec, cfg.n, rng);
  const std::uint64_t k = estimation[guess];
  const double p_lower = stats::clopper_pearson_lower(k, cfg.n, cfg.alpha);
  Certificate cert = certificate_from_bound(spec, guess, p_lower);
  cert.selection_counts = selection;
  cert.top_count = k;
  return cert;
}

}  // namespace

double Certificate::iso_radius() const { return max_enclosed_ball(region).scale; }

double Certificate::proxy_radius() const { return ancer::proxy_radius(region); }

std::vector<std::uint64_t> predict_counts(const Classifier& model, std::span<const double> x,
                                          const SmoothingSpec& spec, std::size_t m, RngStream& rng) {
  if (m == 0) throw InvalidInputError("predict_counts needs at least one draw");
  validate(spec);
  if (x.size() != spec.dim() || x.size() != model.input_dim())
    throw InputShapeError("predict_counts: dimension mismatch");
  Evaluator ev(model);
  std::vector<std::uint64_t> counts(model.num_classes(), 0);
  std::vector<double> eps(x.size()), xp(x.size());
  for (std::size_t j = 0; j < m; ++j) {
    detail::sample_perturbed_unchecked(spec, x, rng, eps, xp);
    ++counts[ev.predict(xp)];
  }
  return counts;
}

double gap_from_bound(SmoothingKind kind, double p_lower) {
  if (!(p_lower >= 0.0 && p_lower <= 1.0)) throw DomainError("p_lower must lie in [0, 1]");
  if (p_lower <= 0.5) return 0.0;
  switch (kind) {
    case SmoothingKind::gaussian:
      return p_lower < 1.0 ? stats::std_normal_icdf(p_lower) : std::numeric_limits<double>::infinity();
    case SmoothingKind::uniform:
      return 2.0 * p_lower - 1.0;
    case SmoothingKind::gmm:
      return (2.0 * p_lower - 1.0) / std::sqrt(2.0 * std::numbers::pi);
  }
  return 0.0;
}

Region region_for(const SmoothingSpec& spec, double gap) {
  if (gap == 0.0) return Region::empty(spec.dim());
  switch (spec.kind) {
    case SmoothingKind::gaussian:
    case SmoothingKind::gmm:
      return Region::ellipsoid(spec.theta, gap);
    case SmoothingKind::uniform:
      return Region::cross_polytope(spec.theta, gap);
  }
  return Region::empty(spec.dim());
}

Certificate certificate_from_bound(const SmoothingSpec& spec, std::size_t predicted_class,
                                   double p_lower) {
  Certificate cert;
  cert.spec = spec;
  cert.p_lower = p_lower;
  cert.gap = gap_from_bound(spec.kind, p_lower);
  if (cert.gap > 0.0) cert.predicted = predicted_class;
  cert.region = region_for(spec, cert.gap);
  return cert;
}

Certificate certify_ellipsoid(const Classifier& model, std::span<const double> x,
                              const SmoothingSpec& spec, const CertifyConfig& cfg, RngStream& rng) {
  require_kind(spec, SmoothingKind::gaussian, "certify_ellipsoid");
  return run_certify(model, x, spec, cfg, rng);
}

Certificate certify_cross_polytope(const Classifier& model, std::span<const double> x,
                                   const SmoothingSpec& spec, const CertifyConfig& cfg,
                                   RngStream& rng) {
  require_kind(spec, SmoothingKind::uniform, "certify_cross_polytope");
  return run_certify(model, x, spec, cfg, rng);
}

Certificate certify_gmm(const Classifier& model, std::span<const double> x,
                        const SmoothingSpec& spec, const CertifyConfig& cfg, RngStream& rng) {
  require_kind(spec, SmoothingKind::gmm, "certify_gmm");
  return run_certify(model, x, spec, cfg, rng);
}

Certificate certify(const Classifier& model, std::span<const double> x, const SmoothingSpec& spec,
                    const CertifyConfig& cfg, RngStream& rng) {
  return run_certify(model, x, spec, cfg, rng);
}

ReportRow make_row(std::size_t idx, std::size_t label, const Certificate& cert, double time_ms) {
  ReportRow row;
  row.idx = idx;
  row.label = label;
  row.predicted = cert.predicted;
  row.p_lower = cert.p_lower;
  row.gap = cert.gap;
  row.iso_radius = cert.iso_radius();
  row.proxy_radius = cert.proxy_radius();
  row.time_ms = time_ms;
  row.spec = cert.spec;
  return row;
}

CertificationReport certify_dataset(const Classifier& model, const Dataset& data,
                                    std::span<const SmoothingSpec> specs,
                                    const DatasetCertifyConfig& cfg) {
  if (specs.size() != data.size())
    throw InvalidInputError("certify_dataset: " + std::to_string(specs.size()) + " specs for " +
                            std::to_string(data.size()) + " samples");
  validate(data);
  CertificationReport report;
  report.rows.resize(data.size());

  parallel_for(data.size(), cfg.threads, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    RngStream rng(cfg.seed, stream_id(i, Phase::certify));
    const Certificate cert = certify(model, data.inputs[i], specs[i], cfg.certify, rng);
    const double ms =
        cfg.record_time
            ? std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count()
            : 0.0;
    report.rows[i] = make_row(i, data.labels[i], cert, ms);
  });
  return report;
}

}  // namespace ancer
