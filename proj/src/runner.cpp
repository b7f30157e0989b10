#include "nsdi/runner.hpp"

#include <omp.h>
#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "nsdi/absorber.hpp"
#include "nsdi/bohmian.hpp"
#include "nsdi/observables.hpp"
#include "nsdi/phase_lock.hpp"
#include "nsdi/potential.hpp"
#include "nsdi/tdqmc.hpp"

namespace nsdi {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNormClosureLimit = 1e-8;
constexpr double kDeadWalkerLimit = 0.01;
constexpr double kAbsorbedBoundLimit = 1e-3;
constexpr double kTdqmcDeadLimit = 0.05;

json to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> opt_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

json manifest_json(const RunManifest& m) {
  json j;
  j["status"] = m.status;
  j["failed_stage"] = m.failed_stage ? json(to_string(*m.failed_stage)) : json(nullptr);
  j["diagnostic"] = m.diagnostic;
  j["code_version"] = kCodeVersion;
  j["config"] = m.config_text;
  j["wall_seconds"] = m.wall_seconds;
  j["health"] = json::array();
  for (const auto& h : m.health)
    j["health"].push_back({{"name", h.name}, {"value", h.value}, {"limit", h.limit}, {"pass", h.pass}});
  j["files"] = json::array();
  for (const auto& f : m.files) j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  return j;
}

void finish_manifest(RunManifest& m, const fs::path& dir, const std::vector<std::string>& names) {
  m.files.clear();
  for (const auto& name : names) {
    const fs::path p = dir / name;
    if (!fs::exists(p)) continue;
    m.files.push_back({name, sha256_file(p), fs::file_size(p)});
  }
  write_text(dir / "manifest.json", manifest_json(m).dump(2) + "\n");
}

json observables_json(const RunObservables& o) {
  json j;
  j["intensity_w_cm2"] = o.intensity;
  j["chirp_sign"] = o.chirp_sign;
  j["ground_state_energy"] = o.ground_state_energy;
  j["di_yield"] = o.di_yield;
  j["si_yield"] = o.si_yield;
  j["bound"] = o.bound;
  j["absorbed_total"] = o.absorbed_total;
  j["absorbed_bound"] = o.absorbed_bound;
  j["final_norm"] = o.final_norm;
  j["fwhm_rad"] = to_json(o.fwhm_rad);
  j["phase_pairs"] = o.phase_pairs;
  j["phase_entries"] = o.phase_entries;
  j["walkers"] = {{"total", o.walkers}, {"nsdi", o.walkers_nsdi}, {"single", o.walkers_single},
                  {"bound", o.walkers_bound}, {"dead", o.walkers_dead}, {"q13", o.walkers_q13},
                  {"q24", o.walkers_q24}};
  j["entropy_nats"] = o.entropy;
  j["inverse_purity"] = o.inverse_purity;
  j["rdm_stride"] = o.rdm_stride;
  j["steps"] = o.steps;
  j["dt"] = o.dt;
  j["pulse"] = {{"peak_field", o.peak_field}, {"gaussian_T", o.gaussian_T}, {"chirp", o.chirp},
                {"amplitude_scale", o.amplitude_scale}};
  if (o.tdqmc) {
    json t;
    t["count"] = o.tdqmc->count;
    t["dead"] = o.tdqmc->dead;
    for (const auto& c : o.tdqmc->channels)
      t["channels"][to_string(c.selector)] = {{"selected", c.selected}, {"entropy_nats", to_json(c.entropy)}};
    j["tdqmc"] = t;
  } else {
    j["tdqmc"] = nullptr;
  }
  return j;
}

/// Marks the run failed on disk and rethrows as a stage-tagged error.
[[noreturn]] void fail(RunManifest& m, const fs::path& dir, const std::vector<std::string>& written, Stage stage,
                       const Error& e, std::chrono::steady_clock::time_point t0) {
  m.status = "failed";
  m.failed_stage = stage;
  m.diagnostic = std::string(to_string(stage)) + ": " + e.what();
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  try {
    finish_manifest(m, dir, written);
  } catch (const std::exception&) {
  }
  throw StageError(stage, e);
}

RelaxOptions relax_options(const RunConfig& c) {
  RelaxOptions r;
  r.dt_imag = c.grid.dt_imag;
  r.tol = c.grid.relax_tol;
  return r;
}

Grid2D config_grid(const RunConfig& c) { return Grid2D(Axis(c.grid.half_width, c.grid.points)); }

std::size_t rdm_stride(std::size_t points) { return points >= 2048 ? 4 : 1; }

}  // namespace

const char* to_string(Stage s) {
  switch (s) {
    case Stage::validation: return "validation";
    case Stage::relax: return "relax";
    case Stage::propagate: return "propagate";
    case Stage::classify: return "classify";
    case Stage::phase: return "phase";
    case Stage::observables: return "observables";
    case Stage::tdqmc: return "tdqmc";
    case Stage::output: return "output";
  }
  return "unknown";
}

StageError::StageError(Stage stage, const Error& cause)
    : Error(cause.kind(), std::string(to_string(stage)) + ": " + cause.what()), stage_(stage) {}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

bool verify_manifest(const fs::path& dir) {
  try {
    std::ifstream in(dir / "manifest.json");
    if (!in) return false;
    const json j = json::parse(in);
    const std::string status = j.at("status");
    if (status != "ok" && status != "degraded") return false;
    for (const auto& f : j.at("files")) {
      const fs::path p = dir / f.at("name").get<std::string>();
      if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

GroundState run_relax(const RunConfig& config, const fs::path& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config_text = serialize_config(config);
  fs::create_directories(out_dir);
  std::optional<GroundState> gs;
  try {
    validate(config);
  } catch (const Error& e) {
    fail(m, out_dir, {}, Stage::validation, e, t0);
  }
  try {
    gs = relax_ground_state(config_grid(config), relax_options(config));
  } catch (const Error& e) {
    fail(m, out_dir, {}, Stage::relax, e, t0);
  }
  try {
    write_snapshot(gs->psi, out_dir / "ground_state.wf");
    json r;
    r["half_width"] = config.grid.half_width;
    r["points"] = config.grid.points;
    r["dt_imag"] = config.grid.dt_imag;
    r["relax_tol"] = config.grid.relax_tol;
    r["energy"] = gs->energy;
    r["iterations"] = gs->iterations;
    r["exchange_asymmetry"] = exchange_asymmetry(gs->psi);
    write_text(out_dir / "relax.json", r.dump(2) + "\n");
    m.status = "ok";
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish_manifest(m, out_dir, {"ground_state.wf", "relax.json"});
  } catch (const Error& e) {
    fail(m, out_dir, {}, Stage::output, e, t0);
  } catch (const fs::filesystem_error& e) {
    fail(m, out_dir, {}, Stage::output, Error(ErrorKind::io, e.what()), t0);
  }
  return std::move(*gs);
}

RunResult run_single(const RunConfig& config, const fs::path& out_dir, const GroundState* ground_state) {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult result;
  RunManifest& m = result.manifest;
  RunObservables& obs = result.observables;
  m.config_text = serialize_config(config);
  fs::create_directories(out_dir);
  std::vector<std::string> written;

  try {
    validate(config);
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::validation, e, t0);
  }
  const Grid2D grid = config_grid(config);
  obs.intensity = config.pulse.intensity_w_cm2;
  obs.chirp_sign = config.pulse.chirp_sign;

  // relax
  std::optional<GroundState> own;
  if (ground_state == nullptr || !(ground_state->psi.grid() == grid)) {
    try {
      own = relax_ground_state(grid, relax_options(config));
    } catch (const Error& e) {
      fail(m, out_dir, written, Stage::relax, e, t0);
    }
    ground_state = &*own;
  }
  obs.ground_state_energy = ground_state->energy;

  // propagate
  PulseSpec pulse;
  try {
    pulse = make_pulse(config.pulse);
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::validation, e, t0);
  }
  obs.peak_field = pulse.peak_field();
  obs.gaussian_T = pulse.shape == PulseShape::gaussian ? pulse.gaussian_width() : 0.0;
  obs.chirp = pulse.chirp;
  obs.amplitude_scale = pulse.amplitude_scale;

  const double t_start = pulse.start_time();
  const auto steps = static_cast<std::size_t>(std::ceil(pulse.duration() / config.grid.dt - 1e-9));
  const double h = pulse.duration() / static_cast<double>(steps);
  obs.steps = steps;
  obs.dt = h;
  const std::size_t decimation = config.trajectories.store_decimation;

  WaveFunction2D psi = ground_state->psi;
  psi.set_time(t_start);
  AbsorberMask mask = make_absorber(grid.axis());
  std::optional<TrajectoryEnsemble> ensemble;
  std::optional<TdqmcEnsemble> tdqmc;
  std::optional<TdqmcPropagator> tdqmc_prop;
  std::size_t velocity_clamps = 0;
  GuidanceOptions guidance;
  guidance.freeze_radius = mask.inner_radius;
  try {
    SplitOperator2D prop(build_potential(grid));
    ensemble = sample_initial(psi, config.trajectories.count, config.trajectories.seed);
    ensemble->record(t_start);
    if (config.tdqmc.enabled) {
      tdqmc = tdqmc_init(ground_state->psi, config.tdqmc.count, config.tdqmc.seed);
      TdqmcOptions topt;
      topt.smoothing_width = config.tdqmc.smoothing_width;
      tdqmc_prop.emplace(grid.axis(), h, topt);
    }
    WaveFunction2D previous = psi;
    for (std::size_t n = 0; n < steps; ++n) {
      const double t = t_start + static_cast<double>(n) * h;
      const double e_mid = field_at(pulse, t + 0.5 * h);
      std::copy(psi.values().begin(), psi.values().end(), previous.values().begin());
      prop.step(psi, e_mid, h, TimeMode::real);
      apply_absorber(psi, mask);
      psi.set_time(t + h);
      velocity_clamps += advance_walkers(*ensemble, previous, psi, h, guidance).clamped;
      if ((n + 1) % decimation == 0 || n + 1 == steps) ensemble->record(t + h);
      if (tdqmc) {
        try {
          tdqmc_prop->step(*tdqmc, e_mid);
        } catch (const Error& e) {
          fail(m, out_dir, written, Stage::tdqmc, e, t0);
        }
      }
    }
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::propagate, e, t0);
  }

  // classify
  std::vector<Classification> classes;
  const double t_final = ensemble->sample_times().back();
  try {
    classes = classify(*ensemble, t_final);
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::classify, e, t0);
  }
  obs.walkers = ensemble->size();
  for (const auto& c : classes) {
    switch (c.channel) {
      case Channel::nsdi: ++obs.walkers_nsdi; break;
      case Channel::single: ++obs.walkers_single; break;
      case Channel::bound: ++obs.walkers_bound; break;
      case Channel::dead: ++obs.walkers_dead; break;
    }
    if (c.channel == Channel::nsdi && c.quadrant == Quadrant::q13) ++obs.walkers_q13;
    if (c.channel == Channel::nsdi && c.quadrant == Quadrant::q24) ++obs.walkers_q24;
  }

  // phase statistics over the NSDI walkers
  const double w_a = phase_window_start(pulse);
  const double w_b = w_a + config.phase.window_cycles * pulse.cycle_period();
  HistogramOptions hopt;
  hopt.bins = config.phase.bins;
  hopt.sigma = config.phase.sigma_h;
  hopt.pooling = config.phase.pooling;
  EnvelopeOptions eopt;
  eopt.edge_guard = config.phase.edge_guard;
  std::vector<std::vector<double>> pair_phases;
  std::size_t rejected_traces = 0;
  std::size_t degenerate_traces = 0;
  std::optional<PhaseMismatchStats> phase_stats;
  std::string phase_note;
  try {
    const std::vector<double> times = ensemble->times_in(w_a, w_b);
    if (times.size() < 16) throw Error(ErrorKind::domain, "phase window holds fewer than 16 samples");
    const double interval = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 0; k < classes.size(); ++k) {
      if (classes[k].channel != Channel::nsdi) continue;
      PhaseOnlyTrace z[2];
      bool usable = true;
      for (int e = 1; e <= 2 && usable; ++e) {
        RealTrace tr{ensemble->trace(k, e, w_a, w_b), interval, times.front()};
        try {
          z[e - 1] = normalize_by_envelope(analytic_signal(tr), eopt);
        } catch (const Error& err) {
          if (err.kind() != ErrorKind::degenerate_trace) throw;
          ++degenerate_traces;
          usable = false;
        }
        if (usable && z[e - 1].rejected) {
          ++rejected_traces;
          usable = false;
        }
      }
      if (!usable) continue;
      try {
        pair_phases.push_back(pair_phase_difference(z[0], z[1], w_a, w_b));
      } catch (const Error& err) {
        if (err.kind() != ErrorKind::domain) throw;
        ++rejected_traces;
      }
    }
    try {
      phase_stats = phase_histogram(pair_phases, hopt);
      obs.fwhm_rad = phase_stats->fwhm;
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::insufficient_statistics && err.kind() != ErrorKind::undefined_fwhm) throw;
      phase_note = err.what();
      if (err.kind() == ErrorKind::undefined_fwhm) phase_stats = smoothed_density(pair_phases, hopt);
    }
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::phase, e, t0);
  }
  obs.phase_pairs = pair_phases.size();
  for (const auto& p : pair_phases) obs.phase_entries += p.size();

  // observables
  try {
    obs.di_yield = di_yield(psi, mask.absorbed.double_ion);
    obs.si_yield = si_yield(psi, mask.absorbed.single_ion);
    obs.final_norm = psi.norm();
    obs.bound = region_probabilities(psi).bound + mask.absorbed.bound;
    obs.absorbed_total = mask.absorbed.total();
    obs.absorbed_bound = mask.absorbed.bound;
    obs.rdm_stride = rdm_stride(config.grid.points);
    const ReducedDensityMatrix rho = reduced_density_matrix(psi, 1, obs.rdm_stride);
    obs.entropy = von_neumann_entropy(rho);
    obs.inverse_purity = inverse_purity(rho);
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::observables, e, t0);
  }

  if (tdqmc) {
    try {
      tdqmc->tag_channels();
      TdqmcSummary s;
      s.count = tdqmc->size();
      s.dead = tdqmc->dead_count();
      if (static_cast<double>(s.dead) > kTdqmcDeadLimit * static_cast<double>(s.count))
        throw Error(ErrorKind::diverged, std::to_string(s.dead) + " of " + std::to_string(s.count) +
                                             " tdqmc configurations died");
      s.channels = entropy_by_channel(*tdqmc);
      obs.tdqmc = std::move(s);
    } catch (const Error& e) {
      fail(m, out_dir, written, Stage::tdqmc, e, t0);
    }
  }

  // health
  const double closure = std::abs(obs.final_norm + obs.absorbed_total - 1.0);
  m.health.push_back({"norm_closure", closure, kNormClosureLimit, closure <= kNormClosureLimit});
  const double dead_fraction = static_cast<double>(ensemble->dead_count()) / static_cast<double>(ensemble->size());
  m.health.push_back({"dead_walker_fraction", dead_fraction, kDeadWalkerLimit, dead_fraction < kDeadWalkerLimit});
  const double bound_fraction = obs.absorbed_total > 0.0 ? obs.absorbed_bound / obs.absorbed_total : 0.0;
  m.health.push_back({"absorbed_bound_fraction", bound_fraction, kAbsorbedBoundLimit,
                      bound_fraction <= kAbsorbedBoundLimit});
  m.health.push_back({"phase_fwhm_defined", obs.fwhm_rad ? 1.0 : 0.0, 1.0, obs.fwhm_rad.has_value()});
  if (obs.tdqmc) {
    const double f = static_cast<double>(obs.tdqmc->dead) / static_cast<double>(obs.tdqmc->count);
    m.health.push_back({"tdqmc_dead_fraction", f, kTdqmcDeadLimit, f <= kTdqmcDeadLimit});
  }
  const bool healthy = std::all_of(m.health.begin(), m.health.end(), [](const HealthCheck& c) { return c.pass; });
  m.status = healthy ? "ok" : "degraded";
  if (!phase_note.empty()) m.diagnostic = std::string("phase: ") + phase_note;

  // output
  try {
    write_text(out_dir / "observables.json", observables_json(obs).dump(2) + "\n");
    written.push_back("observables.json");

    {
      std::ostringstream os;
      os << "t,walker_id,x1,x2,channel\n";
      const std::size_t walkers = std::min(config.trajectories.dump_walkers, ensemble->size());
      const auto& ts = ensemble->sample_times();
      for (std::size_t s = 0; s < ts.size(); ++s) {
        if (s % config.trajectories.dump_stride != 0 && s + 1 != ts.size()) continue;
        for (std::size_t k = 0; k < walkers; ++k) {
          const Walker& w = ensemble->sample(s, k);
          os << fmt(ts[s]) << ',' << k << ',' << fmt(w.x1) << ',' << fmt(w.x2) << ','
             << to_string(classes[k].channel) << '\n';
        }
      }
      write_text(out_dir / "trajectories.csv", os.str());
      written.push_back("trajectories.csv");
    }

    {
      std::ostringstream os;
      os << "center_rad,density\n";
      if (phase_stats)
        for (std::size_t b = 0; b < phase_stats->centers.size(); ++b)
          os << fmt(phase_stats->centers[b]) << ',' << fmt(phase_stats->density[b]) << '\n';
      write_text(out_dir / "phase_hist.csv", os.str());
      written.push_back("phase_hist.csv");

      json p;
      p["fwhm_rad"] = to_json(obs.fwhm_rad);
      p["pairs"] = obs.phase_pairs;
      p["entries"] = obs.phase_entries;
      p["rejected_traces"] = rejected_traces;
      p["degenerate_traces"] = degenerate_traces;
      p["window_start"] = w_a;
      p["window_end"] = w_b;
      p["pooling_mode"] = config.phase.pooling == Pooling::raw ? "raw" : "time_average";
      p["bins"] = config.phase.bins;
      p["sigma_h"] = config.phase.sigma_h;
      p["velocity_clamps"] = velocity_clamps;
      p["note"] = phase_note;
      write_text(out_dir / "phase_summary.json", p.dump(2) + "\n");
      written.push_back("phase_summary.json");
    }

    if (obs.tdqmc) {
      std::ostringstream os;
      os << "selector,selected,entropy_nats\n";
      for (const auto& c : obs.tdqmc->channels)
        os << to_string(c.selector) << ',' << c.selected << ',' << fmt_opt(c.entropy) << '\n';
      write_text(out_dir / "tdqmc_entropy.csv", os.str());
      written.push_back("tdqmc_entropy.csv");
    }

    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish_manifest(m, out_dir, written);
  } catch (const Error& e) {
    fail(m, out_dir, written, Stage::output, e, t0);
  } catch (const fs::filesystem_error& e) {
    fail(m, out_dir, written, Stage::output, Error(ErrorKind::io, e.what()), t0);
  }
  return result;
}

std::string point_name(double intensity, int chirp_sign) {
  std::ostringstream os;
  os << "I" << std::scientific << std::setprecision(3) << intensity << "_c"
     << (chirp_sign < 0 ? "m" : chirp_sign > 0 ? "p" : "0");
  return os.str();
}

namespace {

ScanRow row_from_observables(const json& j, const std::string& shape, const std::string& status) {
  ScanRow r;
  r.shape = shape;
  r.intensity = j.at("intensity_w_cm2");
  r.chirp_sign = j.at("chirp_sign");
  r.ok = true;
  r.status = status;
  r.di_yield = j.at("di_yield");
  r.si_yield = j.at("si_yield");
  r.fwhm_rad = opt_number(j.at("fwhm_rad"));
  r.entropy = j.at("entropy_nats");
  r.inverse_purity = j.at("inverse_purity");
  if (!j.at("tdqmc").is_null()) {
    const json& ch = j.at("tdqmc").at("channels");
    auto entropy = [&](Selector s) { return opt_number(ch.at(to_string(s)).at("entropy_nats")); };
    r.s_all = entropy(Selector::all);
    r.s_nsdi = entropy(Selector::nsdi);
    r.s_q13 = entropy(Selector::q13);
    r.s_q24 = entropy(Selector::q24);
  }
  return r;
}

std::string series_label(int chirp_sign) {
  return chirp_sign < 0 ? "chirp_m1" : chirp_sign > 0 ? "chirp_p1" : "chirp_0";
}

void write_plot_data(const ScanTable& table, const fs::path& path,
                     const std::function<std::optional<double>(const ScanRow&)>& value, const std::string& what) {
  std::vector<int> signs;
  std::vector<double> intensities;
  for (const auto& r : table.rows) {
    if (std::find(signs.begin(), signs.end(), r.chirp_sign) == signs.end()) signs.push_back(r.chirp_sign);
    if (std::find(intensities.begin(), intensities.end(), r.intensity) == intensities.end())
      intensities.push_back(r.intensity);
  }
  std::sort(signs.begin(), signs.end());
  std::sort(intensities.begin(), intensities.end());
  std::ostringstream os;
  os << "intensity_w_cm2";
  for (int s : signs) os << ',' << what << '_' << series_label(s);
  os << '\n';
  for (double i : intensities) {
    os << fmt(i);
    for (int s : signs) {
      os << ',';
      for (const auto& r : table.rows)
        if (r.intensity == i && r.chirp_sign == s && r.ok) os << fmt_opt(value(r));
    }
    os << '\n';
  }
  write_text(path, os.str());
}

}  // namespace

void write_scan_csv(const ScanTable& table, const fs::path& path) {
  std::ostringstream os;
  os << "intensity_w_cm2,chirp_sign,shape,status,di_yield,si_yield,fwhm_rad,entropy_nats,inverse_purity,"
        "s_all,s_nsdi,s_q13,s_q24\n";
  for (const auto& r : table.rows) {
    os << fmt(r.intensity) << ',' << r.chirp_sign << ',' << r.shape << ',' << r.status << ',';
    if (r.ok)
      os << fmt(r.di_yield) << ',' << fmt(r.si_yield) << ',' << fmt_opt(r.fwhm_rad) << ',' << fmt(r.entropy) << ','
         << fmt(r.inverse_purity) << ',' << fmt_opt(r.s_all) << ',' << fmt_opt(r.s_nsdi) << ',' << fmt_opt(r.s_q13)
         << ',' << fmt_opt(r.s_q24);
    else
      os << ",,,,,,,,";
    os << '\n';
  }
  write_text(path, os.str());
}

ScanTable read_scan_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  ScanTable table;
  std::string line;
  std::getline(in, line);
  auto num = [](const std::string& s) -> std::optional<double> {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    f.resize(13);
    ScanRow r;
    r.intensity = std::stod(f[0]);
    r.chirp_sign = std::stoi(f[1]);
    r.shape = f[2];
    r.status = f[3];
    r.ok = r.status == "ok" || r.status == "degraded";
    if (r.ok) {
      r.di_yield = num(f[4]).value_or(0.0);
      r.si_yield = num(f[5]).value_or(0.0);
      r.fwhm_rad = num(f[6]);
      r.entropy = num(f[7]).value_or(0.0);
      r.inverse_purity = num(f[8]).value_or(0.0);
      r.s_all = num(f[9]);
      r.s_nsdi = num(f[10]);
      r.s_q13 = num(f[11]);
      r.s_q24 = num(f[12]);
    } else {
      ++table.failures;
    }
    table.rows.push_back(r);
  }
  return table;
}

ScanTable run_scan(const RunConfig& config, const fs::path& out_dir, const ScanOptions& options) {
  validate(config);
  struct Point {
    double intensity;
    int chirp_sign;
  };
  std::vector<Point> points;
  for (int s : config.scan.chirp_signs)
    for (double i : config.scan.intensities) points.push_back({i, s});
  if (points.size() < 2) throw Error(ErrorKind::validation, "a scan needs at least two points");
  for (const auto& p : points)
    if (p.chirp_sign != 0 && config.pulse.shape != PulseShape::gaussian)
      throw Error(ErrorKind::validation, "chirped scan points need the gaussian shape");
  std::sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    return a.chirp_sign != b.chirp_sign ? a.chirp_sign < b.chirp_sign : a.intensity < b.intensity;
  });
  fs::create_directories(out_dir / "points");
  write_text(out_dir / "config.ini", serialize_config(config));

  // One shared ground state, reused across invocations when the grid matches.
  std::optional<GroundState> gs;
  const fs::path gs_dir = out_dir / "ground_state";
  if (fs::exists(gs_dir / "relax.json") && verify_manifest(gs_dir)) {
    std::ifstream in(gs_dir / "relax.json");
    const json r = json::parse(in);
    if (r.at("half_width") == config.grid.half_width && r.at("points") == config.grid.points &&
        r.at("dt_imag") == config.grid.dt_imag && r.at("relax_tol") == config.grid.relax_tol) {
      WaveFunction2D psi = read_snapshot(gs_dir / "ground_state.wf");
      gs = GroundState{std::move(psi), r.at("energy").get<double>(), r.at("iterations").get<std::size_t>(), {}};
    }
  }
  if (!gs) gs = run_relax(config, gs_dir);

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, points.size()));
  const int inner = std::max(1, omp_get_max_threads() / static_cast<int>(workers));
  set_fft_threads(inner);

  std::vector<std::optional<std::string>> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    omp_set_num_threads(inner);
    for (std::size_t idx = next++; idx < points.size(); idx = next++) {
      const Point& p = points[idx];
      const fs::path dir = out_dir / "points" / point_name(p.intensity, p.chirp_sign);
      if (options.resume && verify_manifest(dir)) continue;
      RunConfig c = config;
      c.pulse.intensity_w_cm2 = p.intensity;
      c.pulse.chirp_sign = p.chirp_sign;
      try {
        run_single(c, dir, &*gs);
      } catch (const std::exception& e) {
        errors[idx] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  ScanTable table;
  const std::string shape = config.pulse.shape == PulseShape::gaussian ? "gaussian" : "trapezoid";
  for (std::size_t idx = 0; idx < points.size(); ++idx) {
    const Point& p = points[idx];
    const fs::path dir = out_dir / "points" / point_name(p.intensity, p.chirp_sign);
    ScanRow row;
    row.shape = shape;
    row.intensity = p.intensity;
    row.chirp_sign = p.chirp_sign;
    row.status = "failed";
    if (!errors[idx] && verify_manifest(dir)) {
      std::ifstream min(dir / "manifest.json");
      const json mj = json::parse(min);
      std::ifstream oin(dir / "observables.json");
      row = row_from_observables(json::parse(oin), shape, mj.at("status"));
    }
    if (!row.ok) ++table.failures;
    table.rows.push_back(row);
  }

  write_scan_csv(table, out_dir / "scan.csv");
  write_plot_data(table, out_dir / "yield_vs_intensity.csv",
                  [](const ScanRow& r) { return std::optional<double>(r.di_yield); }, "di_yield");
  write_plot_data(table, out_dir / "fwhm_vs_intensity.csv", [](const ScanRow& r) { return r.fwhm_rad; },
                  "fwhm_rad");
  write_plot_data(table, out_dir / "entropy_vs_intensity.csv",
                  [](const ScanRow& r) { return std::optional<double>(r.entropy); }, "entropy_nats");
  {
    std::ostringstream os;
    os << "intensity_w_cm2,chirp_sign,s_all,s_nsdi,s_q13,s_q24\n";
    for (const auto& r : table.rows)
      if (r.ok && r.s_all)
        os << fmt(r.intensity) << ',' << r.chirp_sign << ',' << fmt_opt(r.s_all) << ',' << fmt_opt(r.s_nsdi) << ','
           << fmt_opt(r.s_q13) << ',' << fmt_opt(r.s_q24) << '\n';
    if (config.tdqmc.enabled) write_text(out_dir / "tdqmc_entropy.csv", os.str());
  }
  {
    json s;
    s["points"] = points.size();
    s["failures"] = table.failures;
    s["failed"] = json::array();
    for (std::size_t idx = 0; idx < points.size(); ++idx)
      if (!table.rows[idx].ok)
        s["failed"].push_back({{"point", point_name(points[idx].intensity, points[idx].chirp_sign)},
                               {"error", errors[idx].value_or("manifest did not verify")}});
    write_text(out_dir / "scan_summary.json", s.dump(2) + "\n");
  }
  return table;
}

}  // namespace nsdi
