#pragma once
// Report files.
//   <name>.csv          idx,label,predicted,abstain,p_lower,gap,iso_radius,proxy_radius,kind,time_ms
//   <name>.csv.thetas   one row per sample: kind,theta_0,...,theta_{n-1}
//   <thetas>.gmm        mixture components, one per line: alpha theta_0 ... theta_{n-1}
// `predicted` is -1 for abstaining rows.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ancer/certify.hpp"
#include "ancer/smoothing.hpp"

namespace ancer {

inline constexpr const char* kReportHeader =
    "idx,label,predicted,abstain,p_lower,gap,iso_radius,proxy_radius,kind,time_ms";

std::filesystem::path thetas_path_for(const std::filesystem::path& report_path);
std::filesystem::path gmm_sidecar_for(const std::filesystem::path& thetas_path);

void write_thetas(std::span<const SmoothingSpec> specs, const std::filesystem::path& path);
std::vector<SmoothingSpec> read_thetas(const std::filesystem::path& path);

void write_gmm_components(std::span<const GmmComponent> components, const std::filesystem::path& path);
std::vector<GmmComponent> read_gmm_components(const std::filesystem::path& path);

std::string format_report_csv(const CertificationReport& report);
void write_report(const CertificationReport& report, const std::filesystem::path& path);
CertificationReport read_report(const std::filesystem::path& path);

}  // namespace ancer
