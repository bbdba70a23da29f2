#include "ancer/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "ancer/errors.hpp"
#include "ancer/textio.hpp"

namespace ancer {
namespace {

double row_radius(const ReportRow& row, bool use_proxy) {
  return use_proxy ? row.proxy_radius : row.iso_radius;
}

Histogram make_histogram(std::span<const double> a, std::span<const double> b, std::size_t bins,
                         std::span<const double> values) {
  Histogram h;
  h.counts.assign(bins, 0);
  if (a.empty() && b.empty()) return h;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (auto col : {a, b})
    for (double v : col) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  h.low = lo;
  h.width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  for (double v : values) {
    auto bin = static_cast<std::size_t>((v - lo) / h.width);
    h.counts[std::min(bin, bins - 1)]++;
  }
  return h;
}

}  // namespace

std::vector<CurvePoint> certified_accuracy_curve(const CertificationReport& report,
                                                 std::span<const double> radii, bool use_proxy) {
  std::vector<CurvePoint> curve;
  curve.reserve(radii.size());
  const double total = static_cast<double>(report.rows.size());
  for (double r : radii) {
    std::size_t hits = 0;
    for (const ReportRow& row : report.rows)
      if (row.correct() && row_radius(row, use_proxy) >= r) ++hits;
    curve.push_back({r, total > 0 ? static_cast<double>(hits) / total : 0.0});
  }
  return curve;
}

double acr(const CertificationReport& report, bool use_proxy) {
  if (report.rows.empty()) throw InvalidInputError("average certified radius of an empty report is undefined");
  double sum = 0.0;
  for (const ReportRow& row : report.rows)
    if (row.correct()) sum += row_radius(row, use_proxy);
  return sum / static_cast<double>(report.rows.size());
}

SupersetStats superset_stats(const CertificationReport& a, const CertificationReport& b) {
  if (a.rows.size() != b.rows.size()) throw InvalidInputError("superset_stats: reports have different row counts");
  SupersetStats stats;
  stats.rows = a.rows.size();
  if (stats.rows == 0) return stats;
  std::size_t radius_hits = 0, region_hits = 0, strict_hits = 0;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ReportRow& ra = a.rows[i];
    const ReportRow& rb = b.rows[i];
    if (ra.idx != rb.idx || ra.label != rb.label)
      throw InvalidInputError("superset_stats: row " + std::to_string(i) + " refers to different samples");
    const double rad_a = ra.abstain() ? 0.0 : ra.iso_radius;
    const double rad_b = rb.abstain() ? 0.0 : rb.iso_radius;
    if (rad_a >= rad_b) ++radius_hits;
    const Region region_a = ra.abstain() ? Region::empty(ra.spec.dim()) : ra.region();
    const Region region_b = rb.abstain() ? Region::empty(rb.spec.dim()) : rb.region();
    const Comparison cmp = is_superior(region_a, region_b);
    if (cmp.verdict == Containment::superset) {
      ++region_hits;
      if (cmp.strict) ++strict_hits;
    } else if (cmp.verdict == Containment::undetermined) {
      ++stats.undetermined;
    }
  }
  const double n = static_cast<double>(stats.rows);
  stats.radius_fraction = radius_hits / n;
  stats.region_fraction = region_hits / n;
  stats.strict_fraction = strict_hits / n;
  return stats;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

FactorData factor_histograms(const CertificationReport& iso, const CertificationReport& ancer,
                             std::size_t bins) {
  if (iso.rows.size() != ancer.rows.size()) throw InvalidInputError("factor_histograms: row counts differ");
  if (bins == 0) throw InvalidInputError("factor_histograms: need at least one bin");
  FactorData out;
  std::vector<double> s_iso, s_min, g_iso, g_anc;
  for (std::size_t i = 0; i < iso.rows.size(); ++i) {
    const ReportRow& a = iso.rows[i];
    const ReportRow& b = ancer.rows[i];
    if (a.idx != b.idx) throw InvalidInputError("factor_histograms: rows refer to different samples");
    FactorRow row;
    row.idx = a.idx;
    row.sigma_iso = *std::min_element(a.spec.theta.begin(), a.spec.theta.end());
    row.sigma_min = *std::min_element(b.spec.theta.begin(), b.spec.theta.end());
    row.gap_iso = a.gap;
    row.gap_ancer = b.gap;
    out.rows.push_back(row);
    s_iso.push_back(row.sigma_iso);
    s_min.push_back(row.sigma_min);
    g_iso.push_back(row.gap_iso);
    g_anc.push_back(row.gap_ancer);
  }
  out.sigma_iso_hist = make_histogram(s_iso, s_min, bins, s_iso);
  out.sigma_min_hist = make_histogram(s_iso, s_min, bins, s_min);
  out.gap_iso_hist = make_histogram(g_iso, g_anc, bins, g_iso);
  out.gap_ancer_hist = make_histogram(g_iso, g_anc, bins, g_anc);
  out.median_sigma_iso = median(s_iso);
  out.median_sigma_min = median(s_min);
  out.median_gap_iso = median(g_iso);
  out.median_gap_ancer = median(g_anc);
  return out;
}

void write_factor_csv(const FactorData& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  using textio::format_double;
  out << "idx,sigma_iso,sigma_min,gap_iso,gap_ancer\n";
  for (const FactorRow& r : data.rows)
    out << r.idx << ',' << format_double(r.sigma_iso) << ',' << format_double(r.sigma_min) << ','
        << format_double(r.gap_iso) << ',' << format_double(r.gap_ancer) << '\n';
  out << "\nfactor,bin_low,bin_high,count\n";
  auto dump = [&](const char* name, const Histogram& h) {
    for (std::size_t b = 0; b < h.counts.size(); ++b)
      out << name << ',' << format_double(h.low + b * h.width) << ',' << format_double(h.low + (b + 1) * h.width)
          << ',' << h.counts[b] << '\n';
  };
  dump("sigma_iso", data.sigma_iso_hist);
  dump("sigma_min", data.sigma_min_hist);
  dump("gap_iso", data.gap_iso_hist);
  dump("gap_ancer", data.gap_ancer_hist);
  out << "\nstatistic,value\n"
      << "median_sigma_iso," << format_double(data.median_sigma_iso) << '\n'
      << "median_sigma_min," << format_double(data.median_sigma_min) << '\n'
      << "median_gap_iso," << format_double(data.median_gap_iso) << '\n'
      << "median_gap_ancer," << format_double(data.median_gap_ancer) << '\n';
}

std::optional<std::vector<double>> find_witness_delta(const Certificate& aniso, const Certificate& iso) {
  if (aniso.abstain() || iso.abstain() || aniso.region.is_ball() || aniso.region.is_empty()) return std::nullopt;
  if (aniso.region.dim != iso.region.dim) throw InputShapeError("find_witness_delta: dimension mismatch");
  const double rho = iso.iso_radius();
  const auto& theta = aniso.region.theta;
  const std::size_t j = static_cast<std::size_t>(std::max_element(theta.begin(), theta.end()) - theta.begin());
  if (!(theta[j] * aniso.region.scale > rho)) return std::nullopt;
  std::vector<double> delta(theta.size(), 0.0);
  delta[j] = 0.99 * aniso.region.scale * theta[j];
  if (!contains(aniso.region, delta) || contains(iso.region, delta)) return std::nullopt;
  return delta;
}

}  // namespace ancer
