#include <doctest.h>

#include <cmath>
#include <string>

#include "nsdi/config.hpp"
#include "nsdi/errors.hpp"

using namespace nsdi;

namespace {

ErrorKind kind_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.kind();
  }
  MESSAGE("config was accepted: " << text);
  return ErrorKind::domain;
}

}  // namespace

TEST_CASE("round trip") {
  const std::string text = R"([run]
profile = full
output_dir = results/x

[grid]
half_width = 150
points = 256
dt = 0.025

[pulse]
shape = gaussian
wavelength_nm = 248
intensity_w_cm2 = 5.5e14
chirp_sign = -1
window_T = 3

[trajectories]
N = 500
seed = 99

[phase]
bins = 64
sigma_h = 0.1
pooling_mode = raw

[tdqmc]
enabled = true
N = 300
smoothing_width = 0.5

[scan]
intensities = 2e14, 3.3e14, 8e14
chirp_signs = -1, 0, 1
)";
  const RunConfig a = parse_config_text(text);
  CHECK(a.profile == Profile::full);
  CHECK(a.grid.points == 256);
  CHECK(a.pulse.shape == PulseShape::gaussian);
  CHECK(a.pulse.chirp_sign == -1);
  CHECK(a.phase.pooling == Pooling::raw);
  CHECK(a.tdqmc.enabled);
  REQUIRE(a.scan.intensities.size() == 3);
  CHECK(a.scan.intensities[1] == 3.3e14);
  CHECK(a.scan.chirp_signs == std::vector<int>{-1, 0, 1});

  const std::string once = serialize_config(a);
  const RunConfig b = parse_config_text(once);
  CHECK(serialize_config(b) == once);
  CHECK(b.grid.dt == a.grid.dt);
  CHECK(b.tdqmc.smoothing_width == a.tdqmc.smoothing_width);
  CHECK(b.output_dir == a.output_dir);

  // defaults survive as well
  const RunConfig d;
  CHECK(serialize_config(parse_config_text(serialize_config(d))) == serialize_config(d));
}

TEST_CASE("unknown keys and malformed values") {
  CHECK(kind_of("[grid]\nhalf_widht = 100\n") == ErrorKind::validation);
  CHECK(kind_of("[gird]\npoints = 512\n") == ErrorKind::validation);
  CHECK(kind_of("[grid]\npoints = lots\n") == ErrorKind::validation);
  CHECK(kind_of("[grid]\ndt = 0.03x\n") == ErrorKind::validation);
  CHECK(kind_of("[run]\nprofile = medium\n") == ErrorKind::validation);
  CHECK(kind_of("[pulse]\nshape = square\n") == ErrorKind::validation);
  CHECK(kind_of("[scan]\nintensities = 2e14,,3e14\n") == ErrorKind::validation);
  CHECK(kind_of("[scan]\nchirp_signs = 0,\n") == ErrorKind::validation);
  CHECK(kind_of("[grid\npoints = 512\n") == ErrorKind::validation);
}

TEST_CASE("validation ranges") {
  CHECK(kind_of("[pulse]\nintensity_w_cm2 = 0\n") == ErrorKind::validation);
  CHECK(kind_of("[pulse]\nintensity_w_cm2 = 1e17\n") == ErrorKind::validation);
  CHECK(kind_of("[scan]\nintensities = 2e14, 0\n") == ErrorKind::validation);
  CHECK(kind_of("[grid]\npoints = 1000\n") == ErrorKind::validation);
  CHECK(kind_of("[grid]\ndt = -0.01\n") == ErrorKind::validation);
  CHECK(kind_of("[pulse]\nchirp_sign = 1\n") == ErrorKind::validation);
  CHECK(kind_of("[pulse]\nshape = gaussian\nchirp_sign = 2\n") == ErrorKind::validation);
  CHECK(kind_of("[phase]\nwindow_cycles = 5\n") == ErrorKind::validation);
  CHECK(kind_of("[tdqmc]\nenabled = true\nN = 50\n") == ErrorKind::validation);
  CHECK(kind_of("[trajectories]\nN = 0\n") == ErrorKind::validation);
}

TEST_CASE("profiles") {
  CHECK(profile_grid(Profile::full).half_width == 200.0);
  CHECK(profile_grid(Profile::full).points == 2048);
  CHECK(profile_grid(Profile::fast).half_width == 100.0);
  CHECK(profile_grid(Profile::fast).points == 1024);
  CHECK(parse_profile("full") == Profile::full);
  CHECK_THROWS_AS(parse_profile("slow"), Error);

  const RunConfig full = parse_config_text("[run]\nprofile = full\n");
  CHECK(full.grid.points == 2048);
  const RunConfig pinned = parse_config_text("[run]\nprofile = full\n[grid]\npoints = 512\n");
  CHECK(pinned.grid.points == 512);
  CHECK(pinned.grid.half_width == 200.0);

  RunConfig c = parse_config_text("[grid]\npoints = 512\n");
  apply_profile(c, Profile::full);
  CHECK(c.profile == Profile::full);
  CHECK(c.grid.points == 2048);
}

TEST_CASE("pulses from a config") {
  RunConfig c = parse_config_text("[pulse]\nshape = gaussian\n");
  const PulseSpec flat = make_pulse(c.pulse, 6e14, 0);
  const PulseSpec up = make_pulse(c.pulse, 6e14, 1);
  const PulseSpec down = make_pulse(c.pulse, 6e14, -1);
  const double T = flat.gaussian_width();
  CHECK(up.chirp == doctest::Approx(chirp_limit(T)));
  CHECK(down.chirp == doctest::Approx(-chirp_limit(T)));
  CHECK(fluence(up) == doctest::Approx(fluence(flat)).epsilon(1e-10));
  CHECK(fluence(down) == doctest::Approx(fluence(flat)).epsilon(1e-10));
  CHECK(phase_window_start(flat) == doctest::Approx(-3 * flat.cycle_period()));

  const RunConfig t = parse_config_text("");
  CHECK(phase_window_start(make_pulse(t.pulse)) == 0.0);
  CHECK(make_pulse(t.pulse).peak_field() == doctest::Approx(intensity_to_field(4.5e14)));
}
