#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "ancer/datasets.hpp"
#include "ancer/errors.hpp"
#include "ancer/experiment.hpp"
#include "ancer/metrics.hpp"
#include "ancer/report_io.hpp"
#include "support.hpp"

using namespace ancer;

namespace {

ReportRow row(std::size_t idx, bool correct, double radius, double theta = 1.0) {
  ReportRow r;
  r.idx = idx;
  r.label = 0;
  r.predicted = correct ? 0 : 1;
  r.spec = SmoothingSpec::isotropic(SmoothingKind::gaussian, 2, theta);
  r.gap = radius / theta;
  r.p_lower = 0.9;
  r.iso_radius = radius;
  r.proxy_radius = radius;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("radial toy dataset") {
  const Dataset clean = generate_radial_dataset(1000, 0.0, 4);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double r = std::hypot(clean.inputs[i][0], clean.inputs[i][1]);
    if (clean.labels[i] == 0) {
      ++zeros;
      CHECK(r < 1.0);
    } else {
      CHECK(r > 1.4);
      CHECK(r < 2.4);
    }
  }
  CHECK(zeros == 500);
  const Dataset odd = generate_radial_dataset(101, 0.05, 4);
  std::size_t z2 = 0;
  for (auto l : odd.labels) z2 += l == 0;
  CHECK((z2 == 50 || z2 == 51));
  const Dataset a = generate_radial_dataset(1000, 0.05, 9), b = generate_radial_dataset(1000, 0.05, 9);
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
}

TEST_CASE("csv and idx ingestion") {
  const auto dir = test::temp_dir("harness_io");
  {
    std::ofstream out(dir / "three.csv");
    out << "# x,y,label\n0.5,1.5,0\n-1,2,1\n\n3,4e-1,0\n";
  }
  const Dataset d = load_csv(dir / "three.csv");
  CHECK(d.size() == 3);
  CHECK(d.dim() == 2);
  CHECK(d.labels == std::vector<std::size_t>{0, 1, 0});
  CHECK(d.inputs[2][1] == 0.4);

  const Dataset toy = generate_radial_dataset(50, 0.05, 2);
  save_csv(toy, dir / "rt.csv");
  const Dataset back = load_csv(dir / "rt.csv");
  CHECK(back.labels == toy.labels);
  for (std::size_t i = 0; i < toy.size(); ++i)
    for (std::size_t j = 0; j < 2; ++j) CHECK(back.inputs[i][j] == toy.inputs[i][j]);

  {
    std::ofstream out(dir / "ragged.csv");
    out << "1,2,0\n1,0\n";
  }
  try {
    load_csv(dir / "ragged.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }

  // 2 images of 1x2 pixels
  write_bytes(dir / "img.idx", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 2, 0, 255, 51, 102});
  write_bytes(dir / "lab.idx", {0, 0, 8, 1, 0, 0, 0, 2, 1, 0});
  const Dataset im = load_idx(dir / "img.idx", dir / "lab.idx");
  CHECK(im.size() == 2);
  CHECK(im.inputs[0] == std::vector<double>{0.0, 1.0});
  CHECK(std::abs(im.inputs[1][0] - 0.2) < 1e-15);
  CHECK(im.labels == std::vector<std::size_t>{1, 0});
  write_bytes(dir / "bad.idx", {0, 0, 8, 4, 0, 0, 0, 2});
  CHECK_THROWS_AS(load_idx(dir / "bad.idx", dir / "lab.idx"), FormatError);
  write_bytes(dir / "short.idx", {0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0, 2, 0, 255});
  CHECK_THROWS_AS(load_idx(dir / "short.idx", dir / "lab.idx"), ParseError);
}

TEST_CASE("certified accuracy and ACR") {
  CertificationReport rep;
  rep.rows = {row(0, true, 0.5), row(1, false, 0.3), row(2, true, 1.0)};
  const std::vector<double> radii{0.0, 0.4, 2.0};
  const auto curve = certified_accuracy_curve(rep, radii, false);
  CHECK(curve[0].accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(curve[1].accuracy == doctest::Approx(2.0 / 3.0));
  CHECK(curve[2].accuracy == 0.0);
  CHECK(std::abs(acr(rep, false) - 0.5) < 1e-15);
  CHECK(acr(rep, true) == acr(rep, false));

  CertificationReport abstained;
  abstained.rows = {row(0, true, 0.0), row(1, true, 0.0)};
  for (auto& r : abstained.rows) r.predicted.reset();
  CHECK(acr(abstained, false) == 0.0);
  CHECK(certified_accuracy_curve(abstained, radii, false)[0].accuracy == 0.0);
  CHECK_THROWS_AS(acr(CertificationReport{}, false), InvalidInputError);
}

TEST_CASE("superset statistics") {
  CertificationReport a, b;
  a.rows = {row(0, true, 0.5), row(1, true, 0.3), row(2, true, 1.0)};
  const auto self = superset_stats(a, a);
  CHECK(self.region_fraction == 1.0);
  CHECK(self.radius_fraction == 1.0);
  CHECK(self.strict_fraction == 0.0);

  b = a;
  for (auto& r : b.rows) r.predicted.reset();
  CHECK(superset_stats(b, a).region_fraction == 0.0);
  CHECK(superset_stats(a, b).region_fraction == 1.0);

  // anisotropic row a0 = ellipsoid (0.4, 0.6) r=1 against balls 0.3 and 0.5
  CertificationReport an, iso;
  an.rows = {row(0, true, 0.4), row(1, true, 0.4)};
  for (auto& r : an.rows) {
    r.spec = SmoothingSpec::gaussian({0.4, 0.6});
    r.gap = 1.0;
  }
  iso.rows = {row(0, true, 0.3, 0.3), row(1, true, 0.5, 0.5)};
  const auto s = superset_stats(an, iso);
  CHECK(s.region_fraction == 0.5);
  CHECK(s.strict_fraction == 0.5);
  CHECK(s.radius_fraction == 0.5);

  CertificationReport short_rep;
  short_rep.rows = {row(0, true, 0.5)};
  CHECK_THROWS_AS(superset_stats(a, short_rep), InvalidInputError);
}

TEST_CASE("factor histograms") {
  CertificationReport a;
  a.rows = {row(0, true, 0.5, 0.2), row(1, true, 0.3, 0.4), row(2, true, 1.0, 0.3), row(3, true, 2.0, 0.7)};
  const FactorData f = factor_histograms(a, a, 5);
  for (const auto& r : f.rows) {
    CHECK(r.sigma_iso == r.sigma_min);
    CHECK(r.gap_iso == r.gap_ancer);
  }
  CHECK(f.sigma_iso_hist.counts == f.sigma_min_hist.counts);
  CHECK(f.median_sigma_iso == doctest::Approx(0.35));
  CHECK(f.median_sigma_iso == median({0.2, 0.4, 0.3, 0.7}));
  std::size_t total = 0;
  for (auto c : f.gap_iso_hist.counts) total += c;
  CHECK(total == 4);
  const auto dir = test::temp_dir("harness_factors");
  write_factor_csv(f, dir / "f.csv");
  CHECK(slurp(dir / "f.csv").find("median_gap_ancer") != std::string::npos);
}

TEST_CASE("witness perturbation") {
  Certificate an = certificate_from_bound(SmoothingSpec::gaussian({0.4, 0.6}), 0, 0.9);
  an.region = Region::ellipsoid({0.4, 0.6}, 1.0);
  Certificate iso;
  iso.predicted = 0;
  iso.region = Region::l2_ball(2, 0.5);
  const auto d = find_witness_delta(an, iso);
  REQUIRE(d.has_value());
  CHECK((*d)[0] == 0.0);
  CHECK(std::abs((*d)[1] - 0.594) < 1e-12);
  CHECK(contains(an.region, *d));
  CHECK(!contains(iso.region, *d));
  Certificate same = an;
  same.region = Region::ellipsoid({0.5, 0.5}, 1.0);
  Certificate iso_same = iso;
  CHECK(!find_witness_delta(same, iso_same).has_value());
}

TEST_CASE("report files round-trip") {
  const auto dir = test::temp_dir("harness_report");
  CertificationReport rep;
  rep.rows = {row(0, true, 0.5), row(1, false, 0.25)};
  rep.rows[1].predicted.reset();
  rep.rows[0].spec = SmoothingSpec::gaussian({0.123456789012345, 0.9});
  rep.rows[0].gap = 0.5 / 0.123456789012345;
  write_report(rep, dir / "r.csv");
  CHECK(slurp(dir / "r.csv").rfind(kReportHeader, 0) == 0);
  const auto back = read_report(dir / "r.csv");
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0].spec.theta == rep.rows[0].spec.theta);
  CHECK(back.rows[0].gap == rep.rows[0].gap);
  CHECK(back.rows[1].abstain());
  CHECK(format_report_csv(back) == format_report_csv(rep));

  const std::vector<SmoothingSpec> g{SmoothingSpec::gmm({{0.5, {1.0, 1.0}}, {0.5, {2.0, 2.0}}})};
  write_thetas(g, dir / "g.thetas");
  const auto gb = read_thetas(dir / "g.thetas");
  REQUIRE(gb.size() == 1);
  CHECK(gb[0].kind == SmoothingKind::gmm);
  CHECK(gb[0].components.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(gb[0].theta[i] - g[0].theta[i]) < 1e-15);
}

TEST_CASE("experiment configuration") {
  const auto cfg = parse_experiment_config("test_count=12\nkappa=3\nn=500\n# c\nkind=uniform\n");
  CHECK(cfg.test_count == 12);
  CHECK(cfg.optimizer.kappa == 3.0);
  CHECK(cfg.certify.n == 500);
  CHECK(cfg.kind == SmoothingKind::uniform);
  CHECK_THROWS_AS(parse_experiment_config("bogus=1\n"), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config("alpha=2\n"), ConfigError);
  CHECK(config_fingerprint(cfg) == config_fingerprint(parse_experiment_config(canonical_config(cfg))));
  CHECK(config_fingerprint(cfg) != config_fingerprint(ExperimentConfig{}));

  ExperimentConfig missing;
  missing.out_dir = test::temp_dir("harness_missing");
  missing.train = false;
  CHECK_THROWS_AS(run_experiment(missing), ConfigError);
  missing.model_path = missing.out_dir / "nope.txt";
  try {
    run_experiment(missing);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).rfind("[config]", 0) == 0);
  }
}

TEST_CASE("small experiment is reproducible") {
  const auto base = test::temp_dir("harness_run");
  const std::string text =
      "train_count=300\ntest_count=16\nepochs=40\nn=2000\niterations=10\nsamples_per_iter=32\naccept_samples=500\n";
  ExperimentConfig c1 = parse_experiment_config(text), c2 = c1;
  c1.out_dir = base / "a";
  c2.out_dir = base / "b";
  c2.threads = 2;
  const auto r1 = run_experiment(c1);
  const auto r2 = run_experiment(c2);
  CHECK(r1.summary == r2.summary);
  for (const char* f : {"fixed.csv", "isotropic.csv", "ancer.csv", "ancer.csv.thetas", "factors.csv", "curves.csv", "summary.txt", "model.txt"})
    CHECK(slurp(c1.out_dir / f) == slurp(c2.out_dir / f));
  CHECK(r1.ancer.rows.size() == 16);

  // reuse the trained model
  ExperimentConfig c3 = c1;
  c3.out_dir = base / "c";
  c3.train = false;
  c3.model_path = c1.out_dir / "model.txt";
  const auto r3 = run_experiment(c3);
  CHECK(format_report_csv(r3.ancer) == format_report_csv(r1.ancer));
}
