#pragma once
// Monte Carlo certification (selection with n0 draws, fresh estimation with
// n draws, one-sided Clopper-Pearson bound on the top class, runner-up bounded
// by 1 - p_lower) and the certificate built from that bound.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ancer/dataset.hpp"
#include "ancer/nn.hpp"
#include "ancer/regions.hpp"
#include "ancer/rng.hpp"
#include "ancer/smoothing.hpp"

namespace ancer {

struct CertifyConfig {
  std::size_t n0 = 100;
  std::size_t n = 100000;
  double alpha = 0.001;
};

struct Certificate {
  std::optional<std::size_t> predicted;  // nullopt = abstain
  double p_lower = 0.0;
  double gap = 0.0;
  Region region;
  std::vector<std::uint64_t> selection_counts;
  std::uint64_t top_count = 0;
  SmoothingSpec spec;

  bool abstain() const noexcept { return !predicted.has_value(); }
  // Radius of the largest isotropic ball of the region's norm inside it.
  double iso_radius() const;
  double proxy_radius() const;
};

// Per-class counts of argmax f(x + noise) over m draws.
std::vector<std::uint64_t> predict_counts(const Classifier& model, std::span<const double> x,
                                          const SmoothingSpec& spec, std::size_t m, RngStream& rng);

// Region scale for a top-class lower bound p (p > 1/2):
//   gaussian  Phi^{-1}(p)              (= (Phi^{-1}(p) - Phi^{-1}(1 - p)) / 2)
//   uniform   2p - 1
//   gmm       (2p - 1) / sqrt(2 pi)
double gap_from_bound(SmoothingKind kind, double p_lower);

// Region of scale `gap` for the spec's geometry; empty when gap is 0.
Region region_for(const SmoothingSpec& spec, double gap);

// Certificate from an already-computed bound. p_lower <= 1/2 abstains.
Certificate certificate_from_bound(const SmoothingSpec& spec, std::size_t predicted_class,
                                   double p_lower);

Certificate certify_ellipsoid(const Classifier& model, std::span<const double> x,
                              const SmoothingSpec& spec, const CertifyConfig& cfg, RngStream& rng);
Certificate certify_cross_polytope(const Classifier& model, std::span<const double> x,
                                   const SmoothingSpec& spec, const CertifyConfig& cfg,
                                   RngStream& rng);
Certificate certify_gmm(const Classifier& model, std::span<const double> x,
                        const SmoothingSpec& spec, const CertifyConfig& cfg, RngStream& rng);

// Dispatches on spec.kind.
Certificate certify(const Classifier& model, std::span<const double> x, const SmoothingSpec& spec,
                    const CertifyConfig& cfg, RngStream& rng);

struct ReportRow {
  std::size_t idx = 0;
  std::size_t label = 0;
  std::optional<std::size_t> predicted;
  double p_lower = 0.0;
  double gap = 0.0;
  double iso_radius = 0.0;
  double proxy_radius = 0.0;
  double time_ms = 0.0;
  SmoothingSpec spec;

  bool abstain() const noexcept { return !predicted.has_value(); }
  bool correct() const noexcept { return predicted.has_value() && *predicted == label; }
  Region region() const { return region_for(spec, gap); }
};

ReportRow make_row(std::size_t idx, std::size_t label, const Certificate& cert, double time_ms);

struct CertificationReport {
  std::vector<ReportRow> rows;
  std::string fingerprint;
};

struct DatasetCertifyConfig {
  CertifyConfig certify;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool record_time = true;
};

// One row per sample; sample i draws from stream (seed, stream_id(i, certify)),
// so the report does not depend on the thread count.
CertificationReport certify_dataset(const Classifier& model, const Dataset& data,
                                    std::span<const SmoothingSpec> specs,
                                    const DatasetCertifyConfig& cfg);

}  // namespace ancer
