// Command-line front end. Exit codes: 0 success, 2 configuration error,
// 3 data error, 4 numeric failure, 1 anything else.
#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "ancer/certify.hpp"
#include "ancer/datasets.hpp"
#include "ancer/errors.hpp"
#include "ancer/experiment.hpp"
#include "ancer/metrics.hpp"
#include "ancer/nn.hpp"
#include "ancer/optimize.hpp"
#include "ancer/parallel.hpp"
#include "ancer/report_io.hpp"
#include "ancer/simd.hpp"
#include "ancer/textio.hpp"

namespace {

using namespace ancer;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

Dataset load_dataset(const std::string& path, const std::string& labels) {
  if (!labels.empty()) return load_idx(path, labels);
  return load_csv(path);
}

std::vector<std::size_t> parse_arch(const std::string& text) {
  std::vector<std::size_t> arch;
  for (auto tok : textio::split(text, ',')) arch.push_back(textio::parse_size(tok, 0));
  return arch;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (auto tok : textio::split(text, ',')) out.push_back(textio::parse_double(tok, 0));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anisotropic randomized-smoothing certification"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate the 2D radial toy dataset as CSV");
  std::size_t gen_count = 1000;
  double gen_noise = 0.05;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--count", gen_count, "Number of samples")->capture_default_str();
  gen->add_option("--noise", gen_noise, "Gaussian coordinate noise")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV")->required();

  // train
  auto* train = app.add_subcommand("train", "Train a classifier with minibatch SGD");
  std::string train_data, train_labels, train_arch = "2,32,32,2", train_out;
  TrainHyper hyper;
  hyper.lr = 0.1;
  train->add_option("--data", train_data, "Training CSV (or IDX images with --labels)")->required();
  train->add_option("--labels", train_labels, "IDX label file");
  train->add_option("--arch", train_arch, "Layer sizes, e.g. 2,32,32,2")->capture_default_str();
  train->add_option("--epochs", hyper.epochs)->capture_default_str();
  train->add_option("--lr", hyper.lr)->capture_default_str();
  train->add_option("--batch", hyper.batch)->capture_default_str();
  train->add_option("--seed", hyper.seed)->capture_default_str();
  train->add_option("--out", train_out, "Model file")->required();

  // optimize
  auto* opt = app.add_subcommand("optimize", "Optimize per-sample smoothing parameters");
  std::string opt_model, opt_data, opt_labels, opt_kind = "gaussian", opt_mode = "ancer", opt_config, opt_out;
  double opt_init = 0.25;
  std::size_t opt_threads = 1;
  opt->add_option("--model", opt_model)->required();
  opt->add_option("--data", opt_data)->required();
  opt->add_option("--labels", opt_labels, "IDX label file");
  opt->add_option("--kind", opt_kind)->check(CLI::IsMember({"gaussian", "uniform"}))->capture_default_str();
  opt->add_option("--mode", opt_mode)->check(CLI::IsMember({"isotropic", "ancer"}))->capture_default_str();
  opt->add_option("--init-sigma", opt_init)->capture_default_str();
  opt->add_option("--config", opt_config, "Optimizer key=value file");
  opt->add_option("--threads", opt_threads)->capture_default_str();
  opt->add_option("--out-thetas", opt_out)->required();

  // certify
  auto* cert = app.add_subcommand("certify", "Certify a dataset");
  std::string cert_model, cert_data, cert_labels, cert_thetas, cert_kind = "gaussian", cert_gmm, cert_out;
  double cert_sigma = 0.25;
  CertifyConfig ccfg;
  std::uint64_t cert_seed = 0;
  std::size_t cert_threads = 1;
  bool cert_no_time = false;
  cert->add_option("--model", cert_model)->required();
  cert->add_option("--data", cert_data)->required();
  cert->add_option("--labels", cert_labels, "IDX label file");
  cert->add_option("--thetas", cert_thetas, "Per-sample theta rows; default: isotropic --sigma");
  cert->add_option("--kind", cert_kind)->check(CLI::IsMember({"gaussian", "uniform", "gmm"}))->capture_default_str();
  cert->add_option("--sigma", cert_sigma, "Isotropic scale when --thetas is absent")->capture_default_str();
  cert->add_option("--gmm", cert_gmm, "Mixture components (alpha theta...) for --kind gmm");
  cert->add_option("--n0", ccfg.n0)->capture_default_str();
  cert->add_option("--n", ccfg.n)->capture_default_str();
  cert->add_option("--alpha", ccfg.alpha)->capture_default_str();
  cert->add_option("--seed", cert_seed)->capture_default_str();
  cert->add_option("--threads", cert_threads)->capture_default_str();
  cert->add_flag("--no-time", cert_no_time, "Write time_ms as 0 for reproducible files");
  cert->add_option("--out", cert_out)->required();

  // report
  auto* rep = app.add_subcommand("report", "Certified accuracy curve and ACR of a report");
  std::string rep_in, rep_radii = "0,0.25,0.5,0.75,1,1.25,1.5";
  bool rep_proxy = false;
  rep->add_option("--in", rep_in)->required();
  rep->add_option("--radii", rep_radii, "Comma-separated ascending radii")->capture_default_str();
  rep->add_flag("--proxy", rep_proxy, "Use the proxy radius instead of the enclosed-ball radius");

  // compare
  auto* cmp = app.add_subcommand("compare", "Superset statistics of report A over report B");
  std::string cmp_a, cmp_b, cmp_factors;
  cmp->add_option("--a", cmp_a)->required();
  cmp->add_option("--b", cmp_b)->required();
  cmp->add_option("--factors-out", cmp_factors, "Write sigma/gap factor CSV (B isotropic, A anisotropic)");

  // run
  auto* run = app.add_subcommand("run", "Run the full experiment pipeline from a config file");
  std::string run_config;
  run->add_option("--config", run_config)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      save_csv(generate_radial_dataset(gen_count, gen_noise, gen_seed), gen_out);
    } else if (*train) {
      const Dataset data = load_dataset(train_data, train_labels);
      const auto arch = parse_arch(train_arch);
      const TrainResult result = train_classifier(data, arch, hyper);
      save_model(result.model, train_out);
      std::cout << "train_accuracy=" << textio::format_double(result.train_accuracy) << '\n';
    } else if (*opt) {
      const Classifier model = load_model(opt_model);
      const Dataset data = load_dataset(opt_data, opt_labels);
      const OptimizerConfig ocfg = opt_config.empty() ? OptimizerConfig{} : load_optimizer_config(opt_config);
      const SmoothingKind kind = parse_smoothing_kind(opt_kind);
      std::vector<SmoothingSpec> specs(data.size());
      parallel_for(data.size(), opt_threads, [&](std::size_t i) {
        const IsotropicSolution iso = optimize_isotropic(model, data.inputs[i], kind, opt_init, ocfg, i);
        specs[i] = opt_mode == "isotropic" ? SmoothingSpec::isotropic(kind, data.dim(), iso.theta)
                                           : optimize_ancer(model, data.inputs[i], kind, iso, ocfg, i);
      });
      write_thetas(specs, opt_out);
    } else if (*cert) {
      const Classifier model = load_model(cert_model);
      const Dataset data = load_dataset(cert_data, cert_labels);
      const SmoothingKind kind = parse_smoothing_kind(cert_kind);
      std::vector<SmoothingSpec> specs;
      if (kind == SmoothingKind::gmm) {
        if (cert_gmm.empty()) throw ConfigError("--kind gmm needs --gmm <components file>");
        specs.assign(data.size(), SmoothingSpec::gmm(read_gmm_components(cert_gmm)));
      } else if (!cert_thetas.empty()) {
        specs = read_thetas(cert_thetas);
        for (const auto& s : specs)
          if (s.kind != kind) throw ConfigError("theta file kind does not match --kind");
      } else {
        specs.assign(data.size(), SmoothingSpec::isotropic(kind, data.dim(), cert_sigma));
      }
      DatasetCertifyConfig dc{ccfg, cert_seed, cert_threads, !cert_no_time};
      write_report(certify_dataset(model, data, specs, dc), cert_out);
    } else if (*rep) {
      const CertificationReport report = read_report(rep_in);
      const auto radii = parse_list(rep_radii);
      std::cout << "radius,certified_accuracy\n";
      for (const CurvePoint& p : certified_accuracy_curve(report, radii, rep_proxy))
        std::cout << textio::format_double(p.radius) << ',' << textio::format_double(p.accuracy) << '\n';
      std::cout << (rep_proxy ? "ac_proxy_radius=" : "acr=") << textio::format_double(acr(report, rep_proxy)) << '\n';
    } else if (*cmp) {
      const CertificationReport a = read_report(cmp_a);
      const CertificationReport b = read_report(cmp_b);
      const SupersetStats s = superset_stats(a, b);
      std::cout << "rows=" << s.rows << '\n'
                << "radius_superset=" << textio::format_double(s.radius_fraction) << '\n'
                << "region_superset=" << textio::format_double(s.region_fraction) << '\n'
                << "strict_superset=" << textio::format_double(s.strict_fraction) << '\n'
                << "undetermined=" << s.undetermined << '\n';
      if (!cmp_factors.empty()) write_factor_csv(factor_histograms(b, a), cmp_factors);
    } else if (*run) {
      const ExperimentResult result = run_experiment(load_experiment_config(run_config));
      std::cout << result.summary;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SpecKindError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const DomainError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InvalidInputError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const InputShapeError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
