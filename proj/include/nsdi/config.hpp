#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nsdi/laser.hpp"
#include "nsdi/phase_lock.hpp"

namespace nsdi {

enum class Profile { full, fast };

struct GridConfig {
  double half_width = 100.0;
  std::size_t points = 1024;
  double dt = 0.03;
  double dt_imag = 0.01;
  double relax_tol = 1e-10;
};

struct PulseConfig {
  PulseShape shape = PulseShape::trapezoid;
  double wavelength_nm = 248.0;
  double intensity_w_cm2 = 4.5e14;
  double n_cycles = 6.0;
  double ramp_cycles = 2.0;
  double gaussian_T_au = 0.0;  // 0 selects the default width
  int chirp_sign = 0;          // gamma = sign / (2 T^2)
  double window_T = 6.0;
};

struct TrajectoryConfig {
  std::size_t count = 10000;
  std::uint64_t seed = 20240611;
  std::size_t store_decimation = 10;
  std::size_t dump_stride = 10;
  std::size_t dump_walkers = 256;
};

struct PhaseConfig {
  std::size_t bins = 128;
  double sigma_h = 0.15;
  double window_cycles = 3.0;
  Pooling pooling = Pooling::time_average;
  double edge_guard = 0.05;
};

struct TdqmcConfig {
  bool enabled = false;
  std::size_t count = 2000;
  std::uint64_t seed = 7;
  double smoothing_width = 0.0;
};

struct ScanConfig {
  std::vector<double> intensities;
  std::vector<int> chirp_signs{0};
};

/// Everything a run or scan needs. Serialized as an INI-style file with one
/// section per struct; unknown sections or keys are rejected.
struct RunConfig {
  Profile profile = Profile::fast;
  GridConfig grid;
  PulseConfig pulse;
  TrajectoryConfig trajectories;
  PhaseConfig phase;
  TdqmcConfig tdqmc;
  ScanConfig scan;
  std::string output_dir = "out";
};

/// Grid defaults of a profile: full = (L 200, Nx 2048), fast = (L 100, Nx 1024).
GridConfig profile_grid(Profile profile);
void apply_profile(RunConfig& config, Profile profile);

const char* to_string(Profile p);
Profile parse_profile(const std::string& s);

/// Parses the config text. Grid keys absent from the file take the profile's
/// defaults. Throws ErrorKind::validation on syntax errors, unknown keys,
/// malformed values or failed validation.
RunConfig parse_config(std::istream& in);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

std::string serialize_config(const RunConfig& config);

/// Checks ranges; throws ErrorKind::validation naming the first bad field.
void validate(const RunConfig& config);

/// The pulse a config describes, including chirp and energy normalization.
PulseSpec make_pulse(const PulseConfig& config);
PulseSpec make_pulse(const PulseConfig& config, double intensity, int chirp_sign);

/// Start of the phase-analysis window: pulse start for the trapezoid, the
/// start of the equivalent six-cycle span (-3 Tc) for the gaussian.
double phase_window_start(const PulseSpec& pulse);

}  // namespace nsdi
