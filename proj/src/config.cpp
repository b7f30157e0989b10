#include "nsdi/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "nsdi/errors.hpp"

namespace nsdi {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorKind::validation, what); }

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"run", {"profile", "output_dir"}},
      {"grid", {"half_width", "points", "dt", "dt_imag", "relax_tol"}},
      {"pulse",
       {"shape", "wavelength_nm", "intensity_w_cm2", "n_cycles", "ramp_cycles", "gaussian_T_au", "chirp_sign",
        "window_T"}},
      {"trajectories", {"N", "seed", "store_decimation", "dump_stride", "dump_walkers"}},
      {"phase", {"bins", "sigma_h", "window_cycles", "pooling_mode", "edge_guard"}},
      {"tdqmc", {"enabled", "N", "seed", "smoothing_width"}},
      {"scan", {"intensities", "chirp_signs"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    invalid(key + ": expected a number, got '" + raw + "'");
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) invalid(key + ": expected a non-negative integer, got '" + raw + "'");
  return out;
}

int to_int(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data() + (v.starts_with('+') ? 1 : 0), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) invalid(key + ": expected an integer, got '" + raw + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  invalid(key + ": expected true/false, got '" + raw + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  if (trim(raw).empty()) return out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (raw.back() == ',') out.emplace_back();
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

const char* to_string(Profile p) { return p == Profile::full ? "full" : "fast"; }

Profile parse_profile(const std::string& s) {
  if (s == "full") return Profile::full;
  if (s == "fast") return Profile::fast;
  invalid("profile must be 'full' or 'fast', got '" + s + "'");
}

GridConfig profile_grid(Profile profile) {
  GridConfig g;
  if (profile == Profile::full) {
    g.half_width = 200.0;
    g.points = 2048;
  } else {
    g.half_width = 100.0;
    g.points = 1024;
  }
  return g;
}

void apply_profile(RunConfig& config, Profile profile) {
  const GridConfig defaults = profile_grid(profile);
  config.profile = profile;
  config.grid.half_width = defaults.half_width;
  config.grid.points = defaults.points;
}

RunConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    invalid(std::string("config syntax: ") + e.what());
  }

  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) {
      if (body.empty()) invalid("key '" + section + "' must live inside a section");
      invalid("unknown config section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) invalid("unknown key '" + key + "' in section [" + section + "]");
      (void)value;
    }
  }

  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
  };

  RunConfig c;
  if (auto v = get("run.profile")) c.profile = parse_profile(trim(*v));
  c.grid = profile_grid(c.profile);
  if (auto v = get("run.output_dir")) c.output_dir = trim(*v);

  if (auto v = get("grid.half_width")) c.grid.half_width = to_double("grid.half_width", *v);
  if (auto v = get("grid.points")) c.grid.points = to_uint("grid.points", *v);
  if (auto v = get("grid.dt")) c.grid.dt = to_double("grid.dt", *v);
  if (auto v = get("grid.dt_imag")) c.grid.dt_imag = to_double("grid.dt_imag", *v);
  if (auto v = get("grid.relax_tol")) c.grid.relax_tol = to_double("grid.relax_tol", *v);

  if (auto v = get("pulse.shape")) {
    const std::string s = trim(*v);
    if (s == "trapezoid")
      c.pulse.shape = PulseShape::trapezoid;
    else if (s == "gaussian")
      c.pulse.shape = PulseShape::gaussian;
    else
      invalid("pulse.shape must be 'trapezoid' or 'gaussian', got '" + s + "'");
  }
  if (auto v = get("pulse.wavelength_nm")) c.pulse.wavelength_nm = to_double("pulse.wavelength_nm", *v);
  if (auto v = get("pulse.intensity_w_cm2")) c.pulse.intensity_w_cm2 = to_double("pulse.intensity_w_cm2", *v);
  if (auto v = get("pulse.n_cycles")) c.pulse.n_cycles = to_double("pulse.n_cycles", *v);
  if (auto v = get("pulse.ramp_cycles")) c.pulse.ramp_cycles = to_double("pulse.ramp_cycles", *v);
  if (auto v = get("pulse.gaussian_T_au")) c.pulse.gaussian_T_au = to_double("pulse.gaussian_T_au", *v);
  if (auto v = get("pulse.chirp_sign")) c.pulse.chirp_sign = to_int("pulse.chirp_sign", *v);
  if (auto v = get("pulse.window_T")) c.pulse.window_T = to_double("pulse.window_T", *v);

  if (auto v = get("trajectories.N")) c.trajectories.count = to_uint("trajectories.N", *v);
  if (auto v = get("trajectories.seed")) c.trajectories.seed = to_uint("trajectories.seed", *v);
  if (auto v = get("trajectories.store_decimation"))
    c.trajectories.store_decimation = to_uint("trajectories.store_decimation", *v);
  if (auto v = get("trajectories.dump_stride")) c.trajectories.dump_stride = to_uint("trajectories.dump_stride", *v);
  if (auto v = get("trajectories.dump_walkers")) c.trajectories.dump_walkers = to_uint("trajectories.dump_walkers", *v);

  if (auto v = get("phase.bins")) c.phase.bins = to_uint("phase.bins", *v);
  if (auto v = get("phase.sigma_h")) c.phase.sigma_h = to_double("phase.sigma_h", *v);
  if (auto v = get("phase.window_cycles")) c.phase.window_cycles = to_double("phase.window_cycles", *v);
  if (auto v = get("phase.pooling_mode")) {
    const std::string s = trim(*v);
    if (s == "time_average")
      c.phase.pooling = Pooling::time_average;
    else if (s == "raw")
      c.phase.pooling = Pooling::raw;
    else
      invalid("phase.pooling_mode must be 'time_average' or 'raw', got '" + s + "'");
  }
  if (auto v = get("phase.edge_guard")) c.phase.edge_guard = to_double("phase.edge_guard", *v);

  if (auto v = get("tdqmc.enabled")) c.tdqmc.enabled = to_bool("tdqmc.enabled", *v);
  if (auto v = get("tdqmc.N")) c.tdqmc.count = to_uint("tdqmc.N", *v);
  if (auto v = get("tdqmc.seed")) c.tdqmc.seed = to_uint("tdqmc.seed", *v);
  if (auto v = get("tdqmc.smoothing_width")) c.tdqmc.smoothing_width = to_double("tdqmc.smoothing_width", *v);

  if (auto v = get("scan.intensities")) {
    c.scan.intensities.clear();
    for (const auto& item : split_list(*v)) c.scan.intensities.push_back(to_double("scan.intensities", item));
  }
  if (auto v = get("scan.chirp_signs")) {
    c.scan.chirp_signs.clear();
    for (const auto& item : split_list(*v)) c.scan.chirp_signs.push_back(to_int("scan.chirp_signs", item));
  }

  validate(c);
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::validation, "cannot open config file " + path);
  return parse_config(in);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  os << "[run]\nprofile = " << to_string(c.profile) << "\noutput_dir = " << c.output_dir << "\n\n";
  os << "[grid]\nhalf_width = " << fmt(c.grid.half_width) << "\npoints = " << c.grid.points
     << "\ndt = " << fmt(c.grid.dt) << "\ndt_imag = " << fmt(c.grid.dt_imag) << "\nrelax_tol = " << fmt(c.grid.relax_tol)
     << "\n\n";
  os << "[pulse]\nshape = " << (c.pulse.shape == PulseShape::trapezoid ? "trapezoid" : "gaussian")
     << "\nwavelength_nm = " << fmt(c.pulse.wavelength_nm) << "\nintensity_w_cm2 = " << fmt(c.pulse.intensity_w_cm2)
     << "\nn_cycles = " << fmt(c.pulse.n_cycles) << "\nramp_cycles = " << fmt(c.pulse.ramp_cycles)
     << "\ngaussian_T_au = " << fmt(c.pulse.gaussian_T_au) << "\nchirp_sign = " << c.pulse.chirp_sign
     << "\nwindow_T = " << fmt(c.pulse.window_T) << "\n\n";
  os << "[trajectories]\nN = " << c.trajectories.count << "\nseed = " << c.trajectories.seed
     << "\nstore_decimation = " << c.trajectories.store_decimation << "\ndump_stride = " << c.trajectories.dump_stride
     << "\ndump_walkers = " << c.trajectories.dump_walkers << "\n\n";
  os << "[phase]\nbins = " << c.phase.bins << "\nsigma_h = " << fmt(c.phase.sigma_h)
     << "\nwindow_cycles = " << fmt(c.phase.window_cycles)
     << "\npooling_mode = " << (c.phase.pooling == Pooling::raw ? "raw" : "time_average")
     << "\nedge_guard = " << fmt(c.phase.edge_guard) << "\n\n";
  os << "[tdqmc]\nenabled = " << (c.tdqmc.enabled ? "true" : "false") << "\nN = " << c.tdqmc.count
     << "\nseed = " << c.tdqmc.seed << "\nsmoothing_width = " << fmt(c.tdqmc.smoothing_width) << "\n\n";
  os << "[scan]\nintensities = ";
  for (std::size_t i = 0; i < c.scan.intensities.size(); ++i) os << (i ? ", " : "") << fmt(c.scan.intensities[i]);
  os << "\nchirp_signs = ";
  for (std::size_t i = 0; i < c.scan.chirp_signs.size(); ++i) os << (i ? ", " : "") << c.scan.chirp_signs[i];
  os << "\n";
  return os.str();
}

void validate(const RunConfig& c) {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) invalid(std::string(name) + " must be positive");
  };
  positive(c.grid.half_width, "grid.half_width");
  if (c.grid.points < 16 || (c.grid.points & (c.grid.points - 1)) != 0)
    invalid("grid.points must be a power of two >= 16");
  positive(c.grid.dt, "grid.dt");
  positive(c.grid.dt_imag, "grid.dt_imag");
  positive(c.grid.relax_tol, "grid.relax_tol");

  positive(c.pulse.wavelength_nm, "pulse.wavelength_nm");
  auto intensity_ok = [](double i) { return i >= 1e13 && i <= 1e16; };
  if (!intensity_ok(c.pulse.intensity_w_cm2)) invalid("pulse.intensity_w_cm2 must lie in [1e13, 1e16]");
  positive(c.pulse.n_cycles, "pulse.n_cycles");
  positive(c.pulse.ramp_cycles, "pulse.ramp_cycles");
  if (c.pulse.shape == PulseShape::trapezoid && 2.0 * c.pulse.ramp_cycles > c.pulse.n_cycles)
    invalid("pulse.ramp_cycles leaves no room for the flat top");
  if (c.pulse.gaussian_T_au < 0.0) invalid("pulse.gaussian_T_au must be >= 0 (0 selects the default)");
  if (c.pulse.chirp_sign < -1 || c.pulse.chirp_sign > 1) invalid("pulse.chirp_sign must be -1, 0 or +1");
  if (c.pulse.chirp_sign != 0 && c.pulse.shape != PulseShape::gaussian)
    invalid("pulse.chirp_sign needs the gaussian shape");
  positive(c.pulse.window_T, "pulse.window_T");

  if (c.trajectories.count == 0) invalid("trajectories.N must be positive");
  if (c.trajectories.store_decimation == 0) invalid("trajectories.store_decimation must be positive");
  if (c.trajectories.dump_stride == 0) invalid("trajectories.dump_stride must be positive");

  if (c.phase.bins < 8) invalid("phase.bins must be at least 8");
  positive(c.phase.sigma_h, "phase.sigma_h");
  positive(c.phase.window_cycles, "phase.window_cycles");
  if (c.pulse.shape == PulseShape::trapezoid && c.phase.window_cycles > c.pulse.n_cycles - c.pulse.ramp_cycles)
    invalid("phase.window_cycles exceeds the rise plus flat top of the pulse");
  if (!(c.phase.edge_guard >= 0.0 && c.phase.edge_guard < 0.5)) invalid("phase.edge_guard must lie in [0, 0.5)");

  if (c.tdqmc.enabled && c.tdqmc.count < 100) invalid("tdqmc.N must be at least 100");
  if (c.tdqmc.smoothing_width < 0.0) invalid("tdqmc.smoothing_width must be >= 0");

  for (double i : c.scan.intensities)
    if (!intensity_ok(i)) invalid("scan.intensities entries must lie in [1e13, 1e16]");
  for (int s : c.scan.chirp_signs)
    if (s < -1 || s > 1) invalid("scan.chirp_signs entries must be -1, 0 or +1");
  if (c.output_dir.empty()) invalid("run.output_dir must not be empty");
}

PulseSpec make_pulse(const PulseConfig& config, double intensity, int chirp_sign) {
  PulseSpec p;
  p.shape = config.shape;
  p.wavelength_nm = config.wavelength_nm;
  p.peak_intensity = intensity;
  p.n_cycles = config.n_cycles;
  p.ramp_cycles = config.ramp_cycles;
  p.gaussian_T = config.gaussian_T_au;
  p.window_T = config.window_T;
  if (p.shape == PulseShape::gaussian && chirp_sign != 0) {
    PulseSpec reference = p;
    p.chirp = chirp_sign * chirp_limit(p.gaussian_width());
    p = normalize_energy(p, reference);
  }
  return p;
}

PulseSpec make_pulse(const PulseConfig& config) {
  return make_pulse(config, config.intensity_w_cm2, config.chirp_sign);
}

double phase_window_start(const PulseSpec& pulse) {
  return pulse.shape == PulseShape::trapezoid ? 0.0 : -3.0 * pulse.cycle_period();
}

}  // namespace nsdi
