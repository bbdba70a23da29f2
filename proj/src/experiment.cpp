#include "ancer/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ancer/datasets.hpp"
#include "ancer/errors.hpp"
#include "ancer/parallel.hpp"
#include "ancer/report_io.hpp"
#include "ancer/textio.hpp"

namespace ancer {
namespace {

bool parse_bool(std::string_view v, std::size_t line) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ParseError("expected a boolean, got '" + std::string(v) + "'", line);
}

std::vector<std::size_t> parse_arch(std::string_view v, std::size_t line) {
  std::vector<std::size_t> arch;
  for (auto tok : textio::split(v, ',')) arch.push_back(textio::parse_size(tok, line));
  if (arch.size() < 2) throw ParseError("arch needs at least input and output sizes", line);
  return arch;
}

std::string join_arch(const std::vector<std::size_t>& arch) {
  std::string s;
  for (std::size_t i = 0; i < arch.size(); ++i) s += (i ? "," : "") + std::to_string(arch[i]);
  return s;
}

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  const std::string tag = std::string("[") + name + "] ";
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(tag + e.what());
  } catch (const ParseError& e) {
    throw ParseError(tag + e.what());
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(tag + e.what());
  } catch (const InputShapeError& e) {
    throw InputShapeError(tag + e.what());
  } catch (const DomainError& e) {
    throw DomainError(tag + e.what());
  } catch (const SpecKindError& e) {
    throw SpecKindError(tag + e.what());
  } catch (const NumericError& e) {
    throw NumericError(tag + e.what());
  } catch (const Error& e) {
    throw Error(tag + e.what());
  }
}

std::pair<Dataset, Dataset> load_data(const ExperimentConfig& cfg) {
  if (cfg.data == "toy")
    return {generate_radial_dataset(cfg.train_count, cfg.noise, cfg.data_seed),
            generate_radial_dataset(cfg.test_count, cfg.noise, cfg.data_seed + 1)};
  if (cfg.data == "csv") {
    if (cfg.test_path.empty()) throw ConfigError("csv data needs test_path");
    Dataset train = cfg.train_path.empty() ? Dataset{} : load_csv(cfg.train_path);
    return {std::move(train), load_csv(cfg.test_path)};
  }
  if (cfg.data == "idx") {
    if (cfg.test_path.empty() || cfg.test_labels_path.empty())
      throw ConfigError("idx data needs test_path and test_labels_path");
    Dataset train = cfg.train_path.empty() ? Dataset{} : load_idx(cfg.train_path, cfg.train_labels_path);
    Dataset test = load_idx(cfg.test_path, cfg.test_labels_path);
    if (test.size() > cfg.test_count) {
      test.inputs.resize(cfg.test_count);
      test.labels.resize(cfg.test_count);
    }
    return {std::move(train), std::move(test)};
  }
  throw ConfigError("unknown data source '" + cfg.data + "'");
}

std::string summarize(const ExperimentConfig& cfg, const ExperimentResult& r) {
  std::ostringstream out;
  using textio::format_double;
  auto abstains = [](const CertificationReport& rep) {
    return std::count_if(rep.rows.begin(), rep.rows.end(), [](const ReportRow& row) { return row.abstain(); });
  };
  auto metric_block = [&](const char* name, const CertificationReport& rep) {
    const double zero = 0.0;
    out << "clean_accuracy_" << name << '=' << format_double(certified_accuracy_curve(rep, {&zero, 1}, false)[0].accuracy) << '\n'
        << "acr_" << name << '=' << format_double(acr(rep, false)) << '\n'
        << "ac_proxy_radius_" << name << '=' << format_double(acr(rep, true)) << '\n'
        << "abstain_" << name << '=' << abstains(rep) << '\n';
  };
  out << "fingerprint=" << config_fingerprint(cfg) << '\n'
      << "kind=" << to_string(cfg.kind) << '\n'
      << "samples=" << r.ancer.rows.size() << '\n';
  if (cfg.train) out << "train_accuracy=" << format_double(r.train_accuracy) << '\n';
  metric_block("fixed", r.fixed);
  metric_block("isotropic", r.isotropic);
  metric_block("ancer", r.ancer);
  out << "superset_radius_ancer_vs_isotropic=" << format_double(r.ancer_vs_isotropic.radius_fraction) << '\n'
      << "superset_region_ancer_vs_isotropic=" << format_double(r.ancer_vs_isotropic.region_fraction) << '\n'
      << "superset_strict_ancer_vs_isotropic=" << format_double(r.ancer_vs_isotropic.strict_fraction) << '\n'
      << "superset_radius_ancer_vs_fixed=" << format_double(r.ancer_vs_fixed.radius_fraction) << '\n'
      << "superset_region_ancer_vs_fixed=" << format_double(r.ancer_vs_fixed.region_fraction) << '\n'
      << "median_sigma_iso=" << format_double(r.factors.median_sigma_iso) << '\n'
      << "median_sigma_min=" << format_double(r.factors.median_sigma_min) << '\n'
      << "median_gap_iso=" << format_double(r.factors.median_gap_iso) << '\n'
      << "median_gap_ancer=" << format_double(r.factors.median_gap_ancer) << '\n';
  return out.str();
}

void write_curves(const ExperimentResult& r, const std::filesystem::path& path) {
  double top = 0.0;
  for (const auto* rep : {&r.fixed, &r.isotropic, &r.ancer})
    for (const ReportRow& row : rep->rows) top = std::max({top, row.iso_radius, row.proxy_radius});
  constexpr std::size_t kPoints = 101;
  std::vector<double> radii(kPoints);
  for (std::size_t i = 0; i < kPoints; ++i) radii[i] = top * static_cast<double>(i) / (kPoints - 1);
  const auto fixed = certified_accuracy_curve(r.fixed, radii, false);
  const auto iso = certified_accuracy_curve(r.isotropic, radii, false);
  const auto anc = certified_accuracy_curve(r.ancer, radii, false);
  const auto anc_proxy = certified_accuracy_curve(r.ancer, radii, true);
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  using textio::format_double;
  out << "radius,fixed,isotropic,ancer,ancer_proxy\n";
  for (std::size_t i = 0; i < kPoints; ++i)
    out << format_double(radii[i]) << ',' << format_double(fixed[i].accuracy) << ',' << format_double(iso[i].accuracy)
        << ',' << format_double(anc[i].accuracy) << ',' << format_double(anc_proxy[i].accuracy) << '\n';
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  std::string optimizer_text;
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
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key=value");
    const std::string key(textio::trim(line.substr(0, eq)));
    const std::string_view v = textio::trim(line.substr(eq + 1));
    try {
      if (key == "out_dir") cfg.out_dir = std::string(v);
      else if (key == "data") cfg.data = std::string(v);
      else if (key == "train_count") cfg.train_count = textio::parse_size(v, line_no);
      else if (key == "test_count") cfg.test_count = textio::parse_size(v, line_no);
      else if (key == "noise") cfg.noise = textio::parse_double(v, line_no);
      else if (key == "data_seed") cfg.data_seed = textio::parse_size(v, line_no);
      else if (key == "train_path") cfg.train_path = std::string(v);
      else if (key == "train_labels_path") cfg.train_labels_path = std::string(v);
      else if (key == "test_path") cfg.test_path = std::string(v);
      else if (key == "test_labels_path") cfg.test_labels_path = std::string(v);
      else if (key == "train") cfg.train = parse_bool(v, line_no);
      else if (key == "model_path") cfg.model_path = std::string(v);
      else if (key == "arch") cfg.arch = parse_arch(v, line_no);
      else if (key == "epochs") cfg.epochs = textio::parse_size(v, line_no);
      else if (key == "train_lr") cfg.train_lr = textio::parse_double(v, line_no);
      else if (key == "batch") cfg.batch = textio::parse_size(v, line_no);
      else if (key == "train_seed") cfg.train_seed = textio::parse_size(v, line_no);
      else if (key == "kind") cfg.kind = parse_smoothing_kind(v);
      else if (key == "init_sigma") cfg.init_sigma = textio::parse_double(v, line_no);
      else if (key == "n0") cfg.certify.n0 = textio::parse_size(v, line_no);
      else if (key == "n") cfg.certify.n = textio::parse_size(v, line_no);
      else if (key == "alpha") cfg.certify.alpha = textio::parse_double(v, line_no);
      else if (key == "cert_seed") cfg.cert_seed = textio::parse_size(v, line_no);
      else if (key == "threads") cfg.threads = textio::parse_size(v, line_no);
      else if (key == "record_time") cfg.record_time = parse_bool(v, line_no);
      else optimizer_text += std::string(line) + '\n';
    } catch (const ParseError& e) {
      throw ConfigError(std::string("experiment config: ") + e.what());
    }
  }
  cfg.optimizer = parse_optimizer_config(optimizer_text);
  if (cfg.kind == SmoothingKind::gmm) throw ConfigError("experiments optimize gaussian or uniform smoothing only");
  if (!(cfg.init_sigma > 0.0)) throw ConfigError("init_sigma must be positive");
  if (!(cfg.certify.alpha > 0.0 && cfg.certify.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (cfg.certify.n0 == 0 || cfg.certify.n == 0) throw ConfigError("n0 and n must be positive");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

std::string canonical_config(const ExperimentConfig& cfg) {
  using textio::format_double;
  std::ostringstream out;
  out << "data=" << cfg.data << '\n'
      << "train_count=" << cfg.train_count << '\n'
      << "test_count=" << cfg.test_count << '\n'
      << "noise=" << format_double(cfg.noise) << '\n'
      << "data_seed=" << cfg.data_seed << '\n'
      << "train_path=" << cfg.train_path.string() << '\n'
      << "train_labels_path=" << cfg.train_labels_path.string() << '\n'
      << "test_path=" << cfg.test_path.string() << '\n'
      << "test_labels_path=" << cfg.test_labels_path.string() << '\n'
      << "train=" << (cfg.train ? 1 : 0) << '\n'
      << "model_path=" << cfg.model_path.string() << '\n'
      << "arch=" << join_arch(cfg.arch) << '\n'
      << "epochs=" << cfg.epochs << '\n'
      << "train_lr=" << format_double(cfg.train_lr) << '\n'
      << "batch=" << cfg.batch << '\n'
      << "train_seed=" << cfg.train_seed << '\n'
      << "kind=" << to_string(cfg.kind) << '\n'
      << "init_sigma=" << format_double(cfg.init_sigma) << '\n'
      << "n0=" << cfg.certify.n0 << '\n'
      << "n=" << cfg.certify.n << '\n'
      << "alpha=" << format_double(cfg.certify.alpha) << '\n'
      << "cert_seed=" << cfg.cert_seed << '\n'
      << format_optimizer_config(cfg.optimizer);
  return out.str();
}

std::string config_fingerprint(const ExperimentConfig& cfg) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  stage("config", [&] {
    if (!cfg.train && cfg.model_path.empty()) throw ConfigError("model_path is required when train=0");
    if (!cfg.train && !std::filesystem::exists(cfg.model_path))
      throw ConfigError("model file '" + cfg.model_path.string() + "' does not exist and training is disabled");
    std::filesystem::create_directories(cfg.out_dir);
  });

  auto [train_set, test_set] = stage("data", [&] { return load_data(cfg); });

  const Classifier model = stage("model", [&] {
    if (!cfg.train) return load_model(cfg.model_path);
    TrainHyper hyper{cfg.train_lr, cfg.epochs, cfg.batch, cfg.train_seed};
    TrainResult trained = train_classifier(train_set, cfg.arch, hyper);
    result.train_accuracy = trained.train_accuracy;
    save_model(trained.model, cfg.out_dir / "model.txt");
    if (!cfg.model_path.empty()) save_model(trained.model, cfg.model_path);
    return trained.model;
  });

  const std::size_t count = test_set.size();
  std::vector<SmoothingSpec> fixed_specs(count), iso_specs(count), ancer_specs(count);
  stage("optimize", [&] {
    validate(test_set, model.num_classes());
    if (test_set.dim() != model.input_dim()) throw InvalidInputError("test data dimension does not match the model");
    parallel_for(count, cfg.threads, [&](std::size_t i) {
      const auto& x = test_set.inputs[i];
      fixed_specs[i] = SmoothingSpec::isotropic(cfg.kind, x.size(), cfg.init_sigma);
      const IsotropicSolution iso = optimize_isotropic(model, x, cfg.kind, cfg.init_sigma, cfg.optimizer, i);
      iso_specs[i] = SmoothingSpec::isotropic(cfg.kind, x.size(), iso.theta);
      ancer_specs[i] = optimize_ancer(model, x, cfg.kind, iso, cfg.optimizer, i);
    });
    write_thetas(iso_specs, cfg.out_dir / "isotropic_thetas.csv");
    write_thetas(ancer_specs, cfg.out_dir / "ancer_thetas.csv");
  });

  stage("certify", [&] {
    DatasetCertifyConfig dc{cfg.certify, cfg.cert_seed, cfg.threads, cfg.record_time};
    const std::string fp = config_fingerprint(cfg);
    result.fixed = certify_dataset(model, test_set, fixed_specs, dc);
    result.isotropic = certify_dataset(model, test_set, iso_specs, dc);
    result.ancer = certify_dataset(model, test_set, ancer_specs, dc);
    result.fixed.fingerprint = result.isotropic.fingerprint = result.ancer.fingerprint = fp;
  });

  stage("report", [&] {
    result.ancer_vs_isotropic = superset_stats(result.ancer, result.isotropic);
    result.ancer_vs_fixed = superset_stats(result.ancer, result.fixed);
    result.factors = factor_histograms(result.isotropic, result.ancer);
    write_report(result.fixed, cfg.out_dir / "fixed.csv");
    write_report(result.isotropic, cfg.out_dir / "isotropic.csv");
    write_report(result.ancer, cfg.out_dir / "ancer.csv");
    write_factor_csv(result.factors, cfg.out_dir / "factors.csv");
    write_curves(result, cfg.out_dir / "curves.csv");
    result.summary = summarize(cfg, result);
    std::ofstream out(cfg.out_dir / "summary.txt");
    if (!out) throw Error("cannot write summary.txt");
    out << result.summary;
  });
  return result;
}

}  // namespace ancer
