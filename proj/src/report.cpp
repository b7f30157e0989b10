#include "nsdi/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace nsdi {

namespace {

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(3) << v;
  return os.str();
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

std::vector<ScanRow> shape_rows(const ScanTable& t, const std::string& shape) {
  ScanTable out;
  for (const auto& r : t.rows)
    if (r.shape == shape) out.rows.push_back(r);
  return out.rows;
}

ScanTable only(const ScanTable& t, const std::string& shape) {
  ScanTable out;
  out.rows = shape_rows(t, shape);
  return out;
}

double scan_step(const std::vector<ScanRow>& rows) {
  double step = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) step = std::min(step, rows[i].intensity - rows[i - 1].intensity);
  return step;
}

std::optional<double> fwhm_argmin(const std::vector<ScanRow>& rows) {
  std::optional<double> where;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& r : rows)
    if (r.fwhm_rad && *r.fwhm_rad < best) {
      best = *r.fwhm_rad;
      where = r.intensity;
    }
  return where;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

std::vector<ScanRow> series(const ScanTable& table, int chirp_sign) {
  std::vector<ScanRow> out;
  for (const auto& r : table.rows)
    if (r.chirp_sign == chirp_sign && r.ok) out.push_back(r);
  std::sort(out.begin(), out.end(), [](const ScanRow& a, const ScanRow& b) { return a.intensity < b.intensity; });
  return out;
}

std::vector<int> chirp_signs(const ScanTable& table) {
  std::set<int> s;
  for (const auto& r : table.rows) s.insert(r.chirp_sign);
  return {s.begin(), s.end()};
}

std::optional<Knee> find_knee(const std::vector<ScanRow>& rows) {
  std::optional<Knee> best;
  const std::size_t n = rows.size();
  if (n < 3) return best;
  auto y = [&](std::size_t i) { return rows[i].di_yield; };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y(i) > y(i - 1) && y(i) > y(i + 1))) continue;
    for (std::size_t j = i + 1; j + 1 < n; ++j) {
      if (!(y(j) < y(j - 1) && y(j) < y(j + 1))) continue;
      const double ratio = y(j) > 0.0 ? y(i) / y(j) : std::numeric_limits<double>::infinity();
      if (!best || ratio > best->ratio) best = Knee{i, j, rows[i].intensity, rows[j].intensity, ratio};
    }
  }
  return best;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 3) return std::numeric_limits<double>::quiet_NaN();
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

CriterionResult check_knee(const ScanTable& trapezoid) {
  CriterionResult c{2, "knee structure", false, false, ""};
  const auto rows = series(trapezoid, 0);
  if (rows.size() < 3) {
    c.detail = "needs an unchirped trapezoid scan with at least three points";
    return c;
  }
  c.evaluated = true;
  const auto knee = find_knee(rows);
  if (!knee) {
    c.detail = "no knee detectable (no local maximum followed by a local minimum)";
    return c;
  }
  const bool max_ok = knee->max_intensity >= 4.0e14 - 1e9 && knee->max_intensity <= 5.5e14 + 1e9;
  const bool min_ok = knee->min_intensity >= 5.5e14 - 1e9 && knee->min_intensity <= 6.5e14 + 1e9;
  c.pass = max_ok && min_ok && knee->ratio > 1.5;
  c.detail = "max at " + sci(knee->max_intensity) + ", min at " + sci(knee->min_intensity) + ", ratio " +
             num(knee->ratio) + " (need max in [4.0,5.5]e14, min in [5.5,6.5]e14, ratio > 1.5)";
  return c;
}

CriterionResult check_fwhm_ordering(const ScanTable& trapezoid) {
  CriterionResult c{3, "phase-mismatch ordering", false, false, ""};
  const auto rows = series(trapezoid, 0);
  const auto knee = find_knee(rows);
  if (!knee) {
    c.detail = rows.size() < 3 ? "needs an unchirped trapezoid scan" : "no knee detectable, so no max/min pair";
    c.evaluated = rows.size() >= 3;
    return c;
  }
  c.evaluated = true;
  const auto& fmax = rows[knee->max_index].fwhm_rad;
  const auto& fmin = rows[knee->min_index].fwhm_rad;
  if (!fmax || !fmin) {
    c.detail = "FWHM undefined at a knee point";
    return c;
  }
  const double ratio = *fmin / *fmax;
  c.pass = ratio >= 1.5;
  c.detail = "FWHM " + num(*fmax) + " rad at yield max, " + num(*fmin) + " rad at yield min, ratio " + num(ratio) +
             " (need >= 1.5)";
  return c;
}

CriterionResult check_chirp_shift(const ScanTable& gaussian) {
  CriterionResult c{4, "chirp control", false, false, ""};
  const auto base = series(gaussian, 0);
  const auto up = series(gaussian, 1);
  const auto down = series(gaussian, -1);
  if (base.size() < 3 || up.size() < 3 || down.size() < 3) {
    c.detail = "needs gaussian series for chirp signs -1, 0 and +1";
    return c;
  }
  c.evaluated = true;
  const auto k0 = find_knee(base);
  const auto f0 = fwhm_argmin(base);
  const double step = scan_step(base);
  bool pass = k0 && f0;
  std::ostringstream d;
  if (!k0) d << "no yield minimum in the unchirped series; ";
  for (const auto& [label, rows] : {std::pair{"+1", &up}, std::pair{"-1", &down}}) {
    const auto k = find_knee(*rows);
    const auto f = fwhm_argmin(*rows);
    if (!k || !f || !k0 || !f0) {
      d << "chirp " << label << ": knee or FWHM minimum missing; ";
      pass = false;
      continue;
    }
    const double dy = k->min_intensity - k0->min_intensity;
    const double df = *f - *f0;
    const bool moved = std::abs(dy) >= step * (1.0 - 1e-6);
    const bool follows = df != 0.0 && (df > 0.0) == (dy > 0.0);
    pass = pass && moved && follows;
    d << "chirp " << label << ": yield min shift " << sci(dy) << ", FWHM min shift " << sci(df) << "; ";
  }
  c.pass = pass;
  c.detail = d.str() + "step " + sci(step);
  return c;
}

CriterionResult check_entropy_comovement(const ScanTable& gaussian) {
  CriterionResult c{5, "entropy co-movement", false, false, ""};
  std::ostringstream d;
  bool pass = true;
  std::size_t evaluated = 0;
  for (int s : chirp_signs(gaussian)) {
    const auto rows = series(gaussian, s);
    if (rows.size() < 3) continue;
    std::vector<double> e, y;
    for (const auto& r : rows) {
      e.push_back(r.entropy);
      y.push_back(r.di_yield);
    }
    const double rho = spearman(e, y);
    ++evaluated;
    pass = pass && rho > 0.7;
    d << "chirp " << s << ": spearman " << num(rho) << "; ";
  }
  c.evaluated = evaluated > 0;
  c.pass = c.evaluated && pass;
  c.detail = c.evaluated ? d.str() + "need > 0.7 in every series" : "needs scan series with at least three points";
  return c;
}

CriterionResult check_tdqmc_ordering(const ScanTable& table) {
  CriterionResult c{6, "TDQMC channel ordering", false, false, ""};
  std::size_t points = 0, closer = 0, undefined = 0;
  for (const auto& r : table.rows) {
    if (!r.ok || !r.s_all) continue;
    ++points;
    if (!r.s_nsdi || !r.s_q13 || !r.s_q24) {
      ++undefined;
      continue;
    }
    if (std::abs(*r.s_nsdi - *r.s_q24) < std::abs(*r.s_nsdi - *r.s_q13)) ++closer;
  }
  if (points == 0) {
    c.detail = "needs a scan with tdqmc enabled";
    return c;
  }
  c.evaluated = true;
  c.pass = 2 * closer > points;
  c.detail = std::to_string(closer) + " of " + std::to_string(points) + " points have S_NSDI closer to S_Q24 (" +
             std::to_string(undefined) + " with an undefined channel)";
  return c;
}

CriterionResult check_long_pulse(const ScanTable& long_pulse) {
  CriterionResult c{8, "long-pulse robustness", false, false, ""};
  std::optional<double> f45, f60;
  for (const auto& r : series(long_pulse, 0)) {
    if (std::abs(r.intensity - 4.5e14) < 1e9) f45 = r.fwhm_rad;
    if (std::abs(r.intensity - 6.0e14) < 1e9) f60 = r.fwhm_rad;
  }
  if (!f45 || !f60) {
    c.detail = "needs FWHM at 4.5e14 and 6e14 from a 12-cycle run";
    return c;
  }
  c.evaluated = true;
  const double ratio = *f60 / *f45;
  c.pass = ratio >= 1.5;
  c.detail = "FWHM " + num(*f45) + " rad at 4.5e14, " + num(*f60) + " rad at 6e14, ratio " + num(ratio) +
             " (need >= 1.5)";
  return c;
}

std::string emit_report(const ScanTable& table, const RunConfig* config) {
  std::ostringstream os;
  os << "# Scan report\n\n";
  os << table.rows.size() << " points, " << table.failures << " failed.\n\n";
  for (int s : chirp_signs(table)) {
    const auto rows = series(table, s);
    os << "## Series chirp_sign = " << s << "\n\n";
    os << "| intensity (W/cm^2) | DI yield | FWHM (rad) | S (nats) |\n|---|---|---|---|\n";
    for (const auto& r : rows)
      os << "| " << sci(r.intensity) << " | " << sci(r.di_yield) << " | "
         << (r.fwhm_rad ? num(*r.fwhm_rad) : std::string("undefined")) << " | " << num(r.entropy) << " |\n";
    os << '\n';
    const auto knee = find_knee(rows);
    if (!knee) {
      os << "no knee detectable\n\n";
      continue;
    }
    auto f = [&](std::size_t i) { return rows[i].fwhm_rad ? num(*rows[i].fwhm_rad) : std::string("undefined"); };
    os << "yield local max at " << sci(knee->max_intensity) << " (FWHM " << f(knee->max_index) << " rad)\n";
    os << "yield local min at " << sci(knee->min_intensity) << " (FWHM " << f(knee->min_index) << " rad)\n";
    os << "max/min yield ratio " << num(knee->ratio) << "\n\n";
  }
  const ScanTable trap = only(table, "trapezoid");
  const ScanTable gauss = only(table, "gaussian");
  const bool long_pulse =
      config != nullptr && config->pulse.shape == PulseShape::trapezoid && config->pulse.n_cycles >= 12.0;
  auto skipped = [](int id, const char* name, const char* why) { return CriterionResult{id, name, false, false, why}; };
  std::vector<CriterionResult> checks;
  if (long_pulse) {
    checks.push_back(skipped(2, "knee structure", "evaluated on the 6-cycle scan, not the long pulse"));
    checks.push_back(skipped(3, "phase-mismatch ordering", "evaluated on the 6-cycle scan, not the long pulse"));
  } else {
    checks.push_back(check_knee(trap));
    checks.push_back(check_fwhm_ordering(trap));
  }
  checks.push_back(check_chirp_shift(gauss));
  checks.push_back(check_entropy_comovement(gauss));
  checks.push_back(check_tdqmc_ordering(table));
  checks.push_back(long_pulse ? check_long_pulse(trap)
                              : skipped(8, "long-pulse robustness", "needs a scan with a 12-cycle trapezoid"));
  os << "## Acceptance checks\n\n";
  for (const auto& c : checks) {
    os << "- criterion " << c.id << " (" << c.name << "): "
       << (!c.evaluated ? "NOT EVALUATED" : c.pass ? "PASS" : "FAIL") << " - " << c.detail << '\n';
  }
  return os.str();
}

}  // namespace nsdi
