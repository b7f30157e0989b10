#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "nsdi/config.hpp"
#include "nsdi/report.hpp"
#include "nsdi/runner.hpp"

using namespace nsdi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nsdi_test_runner_" + name);
  fs::remove_all(p);
  return p;
}

RunConfig tiny() {
  return parse_config_text(R"([grid]
half_width = 30
points = 64
dt = 0.05
dt_imag = 0.02
relax_tol = 1e-9

[pulse]
shape = trapezoid
intensity_w_cm2 = 6e14
n_cycles = 3
ramp_cycles = 1

[trajectories]
N = 300
seed = 3

[phase]
window_cycles = 1

[tdqmc]
enabled = true
N = 100
seed = 4
)");
}

ScanRow row(double intensity, double di, std::optional<double> fwhm, int chirp = 0) {
  ScanRow r;
  r.shape = "trapezoid";
  r.intensity = intensity;
  r.chirp_sign = chirp;
  r.ok = true;
  r.status = "ok";
  r.di_yield = di;
  r.fwhm_rad = fwhm;
  r.entropy = di;
  return r;
}

}  // namespace

TEST_CASE("single runs are reproducible and checksummed") {
  const RunConfig c = tiny();
  const fs::path a = scratch("a"), b = scratch("b");
  const RunResult ra = run_single(c, a);
  run_single(c, b);
  CHECK(slurp(a / "observables.json") == slurp(b / "observables.json"));
  CHECK(slurp(a / "trajectories.csv") == slurp(b / "trajectories.csv"));
  CHECK(ra.observables.di_yield > 0.0);
  CHECK(ra.manifest.status != "failed");
  for (const char* f : {"manifest.json", "observables.json", "trajectories.csv", "phase_hist.csv", "phase_summary.json",
                        "tdqmc_entropy.csv"})
    CHECK_MESSAGE(fs::exists(a / f), f);
  const double closure = ra.observables.di_yield + ra.observables.si_yield + ra.observables.bound +
                         ra.observables.absorbed_bound;
  CHECK(std::abs(closure - 1.0) < 1e-8);

  CHECK(verify_manifest(a));
  {
    std::ofstream out(a / "observables.json", std::ios::app);
    out << " ";
  }
  CHECK_FALSE(verify_manifest(a));
  fs::remove(b / "trajectories.csv");
  CHECK_FALSE(verify_manifest(b));
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("invalid configs never reach the physics") {
  RunConfig c = tiny();
  c.pulse.intensity_w_cm2 = 0.0;
  const fs::path p = scratch("invalid");
  try {
    run_single(c, p);
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
  }
  CHECK_FALSE(fs::exists(p / "observables.json"));
  fs::remove_all(p);
}

TEST_CASE("scans do not depend on the worker count") {
  RunConfig c = tiny();
  c.trajectories.count = 200;
  c.tdqmc.enabled = false;
  c.scan.intensities = {5e14, 3e14, 7e14};
  const fs::path one = scratch("w1"), two = scratch("w2");
  ScanOptions o1;
  ScanOptions o2;
  o2.workers = 2;
  const ScanTable t = run_scan(c, one, o1);
  run_scan(c, two, o2);
  CHECK(slurp(one / "scan.csv") == slurp(two / "scan.csv"));
  CHECK(slurp(one / "yield_vs_intensity.csv") == slurp(two / "yield_vs_intensity.csv"));
  REQUIRE(t.rows.size() == 3);
  CHECK(t.failures == 0);
  CHECK(t.rows[0].intensity < t.rows[1].intensity);
  CHECK(t.rows[1].intensity < t.rows[2].intensity);

  // a point killed mid-run is redone on resume; intact points are reused
  const fs::path victim = one / "points" / point_name(5e14, 0);
  const fs::path kept = one / "points" / point_name(3e14, 0);
  fs::remove(victim / "manifest.json");
  const auto stamp = fs::last_write_time(kept / "observables.json");
  ScanOptions resume;
  resume.resume = true;
  run_scan(c, one, resume);
  CHECK(verify_manifest(victim));
  CHECK(fs::last_write_time(kept / "observables.json") == stamp);
  CHECK(slurp(one / "scan.csv") == slurp(two / "scan.csv"));

  const ScanTable back = read_scan_csv(one / "scan.csv");
  REQUIRE(back.rows.size() == 3);
  CHECK(back.rows[2].di_yield == t.rows[2].di_yield);
  fs::remove_all(one);
  fs::remove_all(two);
}

TEST_CASE("chirp scans produce one series per sign") {
  ScanTable t;
  for (int s : {-1, 0, 1})
    for (double i : {2e14, 3e14}) t.rows.push_back(row(i, 0.01 * (s + 2), 1.0, s));
  const fs::path p = scratch("csv");
  fs::create_directories(p);
  write_scan_csv(t, p / "scan.csv");
  const ScanTable back = read_scan_csv(p / "scan.csv");
  CHECK(chirp_signs(back) == std::vector<int>{-1, 0, 1});
  CHECK(series(back, 1).size() == 2);
  CHECK(series(back, -1)[1].di_yield == 0.01);
  fs::remove_all(p);
}

TEST_CASE("knee detection in reports") {
  ScanTable t;
  const double yields[] = {0.001, 0.01, 0.04, 0.06, 0.065, 0.05, 0.03, 0.035, 0.05};
  const double widths[] = {3.0, 2.5, 1.5, 1.0, 0.8, 1.5, 2.0, 2.0, 2.2};
  for (int k = 0; k < 9; ++k) t.rows.push_back(row(2e14 + 0.5e14 * k, yields[k], widths[k]));
  const auto knee = find_knee(t.rows);
  REQUIRE(knee.has_value());
  CHECK(knee->max_intensity == doctest::Approx(4e14));
  CHECK(knee->min_intensity == doctest::Approx(5e14));
  CHECK(knee->ratio == doctest::Approx(0.065 / 0.03));

  // move the dip to 6e14
  t.rows.push_back(row(6.5e14, 0.06, 2.0));
  t.rows[6].di_yield = 0.045;
  t.rows[7].di_yield = 0.04;
  t.rows[8].di_yield = 0.03;
  const auto moved = find_knee(t.rows);
  REQUIRE(moved.has_value());
  CHECK(moved->min_intensity == doctest::Approx(6e14));
  const std::string report = emit_report(t);
  CHECK(report.find("yield local min at 6.000e+14") != std::string::npos);

  const CriterionResult k = check_knee(t);
  CHECK(k.id == 2);
  CHECK(k.evaluated);
  CHECK(k.pass);
  const CriterionResult f = check_fwhm_ordering(t);
  CHECK(f.id == 3);
  CHECK(f.pass);  // 2.2 / 0.8

  ScanTable single;
  single.rows.push_back(row(6e14, 0.05, 1.0));
  CHECK(emit_report(single).find("no knee detectable") != std::string::npos);
  CHECK_FALSE(find_knee(single.rows).has_value());
  CHECK_FALSE(check_knee(single).pass);
}

TEST_CASE("report lists the acceptance criteria by id") {
  ScanTable t;
  for (int k = 0; k < 5; ++k) t.rows.push_back(row(2e14 + 1e14 * k, 0.01 * k, 1.0));
  const std::string r = emit_report(t);
  CHECK(r.find("## Acceptance checks") != std::string::npos);
  for (int id : {2, 3, 4, 5, 6, 8})
    CHECK_MESSAGE(r.find("criterion " + std::to_string(id) + " (") != std::string::npos, id);

  RunConfig c = parse_config_text("[pulse]\nn_cycles = 12\n");
  t.rows.clear();
  t.rows.push_back(row(4.5e14, 0.05, 0.5));
  t.rows.push_back(row(6e14, 0.03, 1.0));
  const std::string lp = emit_report(t, &c);
  CHECK(lp.find("criterion 8 (long-pulse robustness): PASS") != std::string::npos);
  CHECK(lp.find("criterion 2 (knee structure): NOT EVALUATED") != std::string::npos);
  CHECK(emit_report(t).find("criterion 8 (long-pulse robustness): NOT EVALUATED") != std::string::npos);
}

TEST_CASE("rank correlation") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3}, {1, 1, 2}) == doctest::Approx(std::sqrt(0.75)));
  CHECK(std::isnan(spearman({1, 2}, {2, 1})));
}

TEST_CASE("tdqmc channel ordering") {
  ScanTable t;
  for (int k = 0; k < 3; ++k) {
    ScanRow r = row(2e14 + k * 1e14, 0.01, 1.0);
    r.s_all = 1.0;
    r.s_nsdi = 1.0;
    r.s_q24 = 1.1;
    r.s_q13 = k == 0 ? 1.05 : 1.5;
    t.rows.push_back(r);
  }
  const auto c = check_tdqmc_ordering(t);
  CHECK(c.id == 6);
  CHECK(c.pass);  // 2 of 3
  t.rows[1].s_nsdi.reset();
  CHECK_FALSE(check_tdqmc_ordering(t).pass);  // undefined NSDI counts against
}

TEST_CASE("NSDI walker fraction tracks the DI yield") {
  RunConfig c = parse_config_text(R"([grid]
half_width = 50
points = 256
dt = 0.03

[pulse]
intensity_w_cm2 = 6e14

[trajectories]
N = 10000
seed = 20240611
)");
  const fs::path p = scratch("equivariance");
  const RunResult r = run_single(c, p);
  const auto& o = r.observables;
  const double n = static_cast<double>(o.walkers);
  const double frac = static_cast<double>(o.walkers_nsdi) / n;
  const double se = std::sqrt(o.di_yield * (1.0 - o.di_yield) / n);
  MESSAGE("NSDI walkers " << frac << ", DI yield " << o.di_yield << ", SE " << se);
  CHECK(o.di_yield > 0.01);
  CHECK(std::abs(frac - o.di_yield) < 2 * se);
  fs::remove_all(p);
}
