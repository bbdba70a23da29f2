#pragma once
// Aggregate metrics over certification reports. Abstaining rows count as
// incorrect at every radius.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ancer/certify.hpp"

namespace ancer {

struct CurvePoint {
  double radius = 0.0;
  double accuracy = 0.0;
};

// Fraction of rows that are correct with radius >= R, for each R in radii.
// The radius is iso_radius, or proxy_radius when use_proxy is set.
std::vector<CurvePoint> certified_accuracy_curve(const CertificationReport& report,
                                                 std::span<const double> radii, bool use_proxy);

// Mean of radius * [correct]. Throws InvalidInputError for an empty report.
double acr(const CertificationReport& report, bool use_proxy);

struct SupersetStats {
  std::size_t rows = 0;
  // a's enclosed-ball radius >= b's.
  double radius_fraction = 0.0;
  // a's region contains b's region.
  double region_fraction = 0.0;
  // ... and strictly larger along some axis.
  double strict_fraction = 0.0;
  std::size_t undetermined = 0;
};

// Row-by-row comparison of two reports over the same samples. An abstaining
// row has the empty region.
SupersetStats superset_stats(const CertificationReport& a, const CertificationReport& b);

struct Histogram {
  double low = 0.0;
  double width = 0.0;
  std::vector<std::size_t> counts;
};

struct FactorRow {
  std::size_t idx = 0;
  double sigma_iso = 0.0;
  double sigma_min = 0.0;
  double gap_iso = 0.0;
  double gap_ancer = 0.0;
};

struct FactorData {
  std::vector<FactorRow> rows;
  Histogram sigma_iso_hist, sigma_min_hist, gap_iso_hist, gap_ancer_hist;
  double median_sigma_iso = 0.0;
  double median_sigma_min = 0.0;
  double median_gap_iso = 0.0;
  double median_gap_ancer = 0.0;
};

double median(std::vector<double> values);

// Paired sigma-factor (isotropic theta vs min_i theta_i) and gap-factor
// columns, with fixed-width histograms sharing one range per factor.
FactorData factor_histograms(const CertificationReport& iso, const CertificationReport& ancer,
                             std::size_t bins = 20);

void write_factor_csv(const FactorData& data, const std::filesystem::path& path);

// A perturbation certified by the anisotropic region but outside the
// isotropic one: 0.99 * r * theta_j along the longest axis j. nullopt when
// either certificate abstains or no such axis point exists.
std::optional<std::vector<double>> find_witness_delta(const Certificate& aniso,
                                                      const Certificate& iso);

}  // namespace ancer
