#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "nsdi/config.hpp"
#include "nsdi/report.hpp"
#include "nsdi/runner.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitPhysics = 3;
constexpr int kExitPartialScan = 4;

struct Options {
  std::string config_path;
  std::string profile;
  std::size_t workers = 1;
  std::string out;
  bool resume = false;
};

nsdi::RunConfig resolve(const Options& o) {
  nsdi::RunConfig c = nsdi::load_config(o.config_path);
  if (!o.profile.empty()) nsdi::apply_profile(c, nsdi::parse_profile(o.profile));
  if (!o.out.empty()) c.output_dir = o.out;
  nsdi::validate(c);
  return c;
}

int code_for(const nsdi::Error& e) {
  if (e.kind() == nsdi::ErrorKind::validation) return kExitValidation;
  if (const auto* s = dynamic_cast<const nsdi::StageError*>(&e); s && s->stage() == nsdi::Stage::validation)
    return kExitValidation;
  return kExitPhysics;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-electron strong-field simulation: relax, run, scan, report"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", o.config_path, "run config file")->check(CLI::ExistingFile);
    if (needs_config) opt->required();
    sub->add_option("--profile", o.profile, "grid profile")->check(CLI::IsMember({"fast", "full"}));
    sub->add_option("--out", o.out, "output directory");
  };

  auto* relax = app.add_subcommand("relax", "imaginary-time ground state");
  add_common(relax, true);
  auto* run = app.add_subcommand("run", "single pulse run");
  add_common(run, true);
  auto* scan = app.add_subcommand("scan", "intensity / chirp scan");
  add_common(scan, true);
  scan->add_option("--workers", o.workers, "parallel scan points")->check(CLI::PositiveNumber);
  scan->add_flag("--resume", o.resume, "keep points whose manifest verifies");
  auto* report = app.add_subcommand("report", "summarize a completed scan");
  report->add_option("--out", o.out, "scan output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (relax->parsed()) {
      const auto c = resolve(o);
      const auto gs = nsdi::run_relax(c, c.output_dir);
      std::cout << "ground state energy " << gs.energy << " a.u. after " << gs.iterations << " iterations\n";
      return kExitOk;
    }
    if (run->parsed()) {
      const auto c = resolve(o);
      const auto r = nsdi::run_single(c, c.output_dir);
      std::cout << "status " << r.manifest.status << ", di_yield " << r.observables.di_yield << ", fwhm_rad "
                << (r.observables.fwhm_rad ? std::to_string(*r.observables.fwhm_rad) : "undefined") << '\n';
      return kExitOk;
    }
    if (scan->parsed()) {
      const auto c = resolve(o);
      const auto table = nsdi::run_scan(c, c.output_dir, {o.workers, o.resume});
      std::cout << nsdi::emit_report(table, &c);
      if (table.failures > 0) {
        std::cerr << table.failures << " of " << table.rows.size() << " scan points failed, see "
                  << (fs::path(c.output_dir) / "scan_summary.json").string() << '\n';
        return kExitPartialScan;
      }
      return kExitOk;
    }
    if (report->parsed()) {
      const fs::path csv = fs::path(o.out) / "scan.csv";
      if (!fs::exists(csv)) {
        std::cerr << "no scan.csv in " << o.out << '\n';
        return kExitValidation;
      }
      std::optional<nsdi::RunConfig> config;
      if (fs::exists(fs::path(o.out) / "config.ini")) config = nsdi::load_config((fs::path(o.out) / "config.ini").string());
      const std::string text = nsdi::emit_report(nsdi::read_scan_csv(csv), config ? &*config : nullptr);
      std::ofstream(fs::path(o.out) / "report.md") << text;
      std::cout << text;
      return kExitOk;
    }
  } catch (const nsdi::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitPhysics;
  }
  return kExitOk;
}
