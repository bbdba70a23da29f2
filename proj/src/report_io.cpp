#include "ancer/report_io.hpp"

#include <fstream>
#include <sstream>

#include "ancer/errors.hpp"
#include "ancer/textio.hpp"

namespace ancer {

using textio::format_double;

std::filesystem::path thetas_path_for(const std::filesystem::path& report_path) {
  return report_path.string() + ".thetas";
}

std::filesystem::path gmm_sidecar_for(const std::filesystem::path& thetas_path) {
  return thetas_path.string() + ".gmm";
}

void write_gmm_components(std::span<const GmmComponent> components, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (const GmmComponent& c : components) {
    out << format_double(c.weight);
    for (double t : c.theta) out << ' ' << format_double(t);
    out << '\n';
  }
}

std::vector<GmmComponent> read_gmm_components(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open gmm component file '" + path.string() + "'");
  std::vector<GmmComponent> components;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto tokens = textio::split_ws(raw);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() < 2) throw ParseError("component line needs a weight and at least one theta", line_no);
    GmmComponent c;
    c.weight = textio::parse_double(tokens[0], line_no);
    for (std::size_t t = 1; t < tokens.size(); ++t) c.theta.push_back(textio::parse_double(tokens[t], line_no));
    components.push_back(std::move(c));
  }
  if (components.empty()) throw ParseError("gmm component file '" + path.string() + "' is empty");
  return components;
}

void write_thetas(std::span<const SmoothingSpec> specs, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const SmoothingSpec* gmm = nullptr;
  for (const SmoothingSpec& s : specs) {
    out << to_string(s.kind);
    for (double t : s.theta) out << ',' << format_double(t);
    out << '\n';
    if (s.kind == SmoothingKind::gmm) {
      if (gmm && (gmm->components.size() != s.components.size()))
        throw InvalidInputError("gmm specs in one theta file must share their components");
      gmm = &s;
    }
  }
  if (gmm) write_gmm_components(gmm->components, gmm_sidecar_for(path));
}

std::vector<SmoothingSpec> read_thetas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open theta file '" + path.string() + "'");
  std::vector<SmoothingSpec> specs;
  std::vector<GmmComponent> gmm_components;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = textio::trim(raw);
    if (line.empty()) continue;
    const auto fields = textio::split(line, ',');
    if (fields.size() < 2) throw ParseError("theta row needs a kind and at least one value", line_no);
    SmoothingKind kind;
    try {
      kind = parse_smoothing_kind(textio::trim(fields[0]));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    std::vector<double> theta;
    for (std::size_t f = 1; f < fields.size(); ++f) theta.push_back(textio::parse_double(fields[f], line_no));
    try {
      if (kind == SmoothingKind::gmm) {
        if (gmm_components.empty()) gmm_components = read_gmm_components(gmm_sidecar_for(path));
        specs.push_back(SmoothingSpec::gmm(gmm_components));
      } else {
        specs.push_back(SmoothingSpec{kind, std::move(theta), {}});
        validate(specs.back());
      }
    } catch (const DomainError& e) {
      throw ParseError(std::string("invalid smoothing parameters: ") + e.what(), line_no);
    }
  }
  return specs;
}

std::string format_report_csv(const CertificationReport& report) {
  std::ostringstream out;
  out << kReportHeader << '\n';
  for (const ReportRow& r : report.rows) {
    out << r.idx << ',' << r.label << ',';
    if (r.predicted)
      out << *r.predicted;
    else
      out << -1;
    out << ',' << (r.abstain() ? 1 : 0) << ',' << format_double(r.p_lower) << ',' << format_double(r.gap) << ','
        << format_double(r.iso_radius) << ',' << format_double(r.proxy_radius) << ',' << to_string(r.spec.kind)
        << ',' << format_double(r.time_ms) << '\n';
  }
  return out.str();
}

void write_report(const CertificationReport& report, const std::filesystem::path& path) {
  {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path.string() + "' for writing");
    out << format_report_csv(report);
  }
  std::vector<SmoothingSpec> specs;
  specs.reserve(report.rows.size());
  for (const ReportRow& r : report.rows) specs.push_back(r.spec);
  write_thetas(specs, thetas_path_for(path));
}

CertificationReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open report '" + path.string() + "'");
  std::string raw;
  if (!std::getline(in, raw) || textio::trim(raw) != kReportHeader)
    throw FormatError("report '" + path.string() + "' is missing the header row", 1);
  const auto specs = read_thetas(thetas_path_for(path));

  CertificationReport report;
  std::size_t line_no = 1;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = textio::trim(raw);
    if (line.empty()) continue;
    const auto f = textio::split(line, ',');
    if (f.size() != 10) throw ParseError("report row needs 10 fields", line_no);
    ReportRow row;
    row.idx = textio::parse_size(f[0], line_no);
    row.label = textio::parse_size(f[1], line_no);
    const bool abstain = textio::parse_size(f[3], line_no) != 0;
    if (!abstain) row.predicted = textio::parse_size(f[2], line_no);
    row.p_lower = textio::parse_double(f[4], line_no);
    row.gap = textio::parse_double(f[5], line_no);
    row.iso_radius = textio::parse_double(f[6], line_no);
    row.proxy_radius = textio::parse_double(f[7], line_no);
    row.time_ms = textio::parse_double(f[9], line_no);
    const std::size_t r = report.rows.size();
    if (r >= specs.size()) throw ParseError("report has more rows than its theta file", line_no);
    row.spec = specs[r];
    if (to_string(row.spec.kind) != textio::trim(f[8]))
      throw ParseError("row kind disagrees with its theta row", line_no);
    report.rows.push_back(std::move(row));
  }
  if (report.rows.size() != specs.size()) throw ParseError("theta file has more rows than the report");
  return report;
}

}  // namespace ancer
