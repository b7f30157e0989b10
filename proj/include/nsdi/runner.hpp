#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nsdi/config.hpp"
#include "nsdi/errors.hpp"
#include "nsdi/propagator.hpp"
#include "nsdi/tdqmc.hpp"

namespace nsdi {

inline constexpr const char* kCodeVersion = "1.0.0";

enum class Stage { validation, relax, propagate, classify, phase, observables, tdqmc, output };

const char* to_string(Stage s);

/// A module error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(Stage stage, const Error& cause);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct HealthCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;
};

struct FileEntry {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string status;  // ok, degraded or failed
  std::optional<Stage> failed_stage;
  std::string diagnostic;
  std::string config_text;
  double wall_seconds = 0.0;
  std::vector<HealthCheck> health;
  std::vector<FileEntry> files;
};

struct TdqmcSummary {
  std::size_t count = 0;
  std::size_t dead = 0;
  std::vector<ChannelEntropy> channels;
};

struct RunObservables {
  double intensity = 0.0;
  int chirp_sign = 0;
  double ground_state_energy = 0.0;
  double di_yield = 0.0;
  double si_yield = 0.0;
  double bound = 0.0;
  double absorbed_total = 0.0;
  double absorbed_bound = 0.0;
  double final_norm = 0.0;
  std::optional<double> fwhm_rad;
  std::size_t phase_pairs = 0;
  std::size_t phase_entries = 0;
  std::size_t walkers = 0;
  std::size_t walkers_nsdi = 0;
  std::size_t walkers_single = 0;
  std::size_t walkers_bound = 0;
  std::size_t walkers_dead = 0;
  std::size_t walkers_q13 = 0;
  std::size_t walkers_q24 = 0;
  double entropy = 0.0;
  double inverse_purity = 0.0;
  std::size_t rdm_stride = 1;
  std::size_t steps = 0;
  double dt = 0.0;
  double peak_field = 0.0;
  double gaussian_T = 0.0;
  double chirp = 0.0;
  double amplitude_scale = 1.0;
  std::optional<TdqmcSummary> tdqmc;
};

struct RunResult {
  RunManifest manifest;
  RunObservables observables;
};

/// relax -> propagate with walkers -> classify -> phase statistics ->
/// observables (-> tdqmc) for the pulse in config.pulse. Writes
/// observables.json, trajectories.csv, phase_hist.csv, phase_summary.json,
/// tdqmc_entropy.csv (if enabled) and manifest.json into out_dir.
/// `ground_state` skips the relaxation. Throws StageError; the manifest on disk
/// then records the failing stage.
RunResult run_single(const RunConfig& config, const std::filesystem::path& out_dir,
                     const GroundState* ground_state = nullptr);

/// Relaxes on the config's grid and writes ground_state.wf, relax.json and a
/// manifest into out_dir.
GroundState run_relax(const RunConfig& config, const std::filesystem::path& out_dir);

struct ScanRow {
  std::string shape;  // trapezoid or gaussian
  double intensity = 0.0;
  int chirp_sign = 0;
  bool ok = false;
  std::string status;
  double di_yield = 0.0;
  double si_yield = 0.0;
  std::optional<double> fwhm_rad;
  double entropy = 0.0;
  double inverse_purity = 0.0;
  std::optional<double> s_all, s_nsdi, s_q13, s_q24;
};

struct ScanOptions {
  std::size_t workers = 1;
  bool resume = false;  // reuse points whose manifest verifies
};

struct ScanTable {
  std::vector<ScanRow> rows;  // sorted by (chirp_sign, intensity)
  std::size_t failures = 0;
};

/// One run_single per (intensity, chirp_sign) pair under out_dir/points,
/// executed by a pool of workers, then aggregated in scan-key order into
/// scan.csv and the plot-data files.
ScanTable run_scan(const RunConfig& config, const std::filesystem::path& out_dir, const ScanOptions& options = {});

std::string point_name(double intensity, int chirp_sign);

/// True if the manifest in dir lists only files whose checksums still match
/// and reports status ok or degraded.
bool verify_manifest(const std::filesystem::path& dir);

std::string sha256_file(const std::filesystem::path& path);

void write_scan_csv(const ScanTable& table, const std::filesystem::path& path);
ScanTable read_scan_csv(const std::filesystem::path& path);

}  // namespace nsdi
