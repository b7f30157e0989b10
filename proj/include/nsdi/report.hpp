#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nsdi/runner.hpp"

namespace nsdi {

/// One series of a scan: rows sharing a chirp sign, sorted by intensity.
std::vector<ScanRow> series(const ScanTable& table, int chirp_sign);
std::vector<int> chirp_signs(const ScanTable& table);

/// A local maximum of the DI yield followed (at higher intensity) by a local
/// minimum; indices into the series. Among all such pairs the one with the
/// largest yield ratio is kept.
struct Knee {
  std::size_t max_index = 0;
  std::size_t min_index = 0;
  double max_intensity = 0.0;
  double min_intensity = 0.0;
  double ratio = 0.0;
};

std::optional<Knee> find_knee(const std::vector<ScanRow>& rows);

/// Spearman rank correlation with average ranks for ties; NaN for fewer than
/// three points or a constant input.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool evaluated = false;  // false when the needed data is missing
  bool pass = false;
  std::string detail;
};

/// Criterion 2: knee with max in [4.0, 5.5]e14, min in [5.5, 6.5]e14, ratio > 1.5.
CriterionResult check_knee(const ScanTable& trapezoid);
/// Criterion 3: FWHM(min) / FWHM(max) >= 1.5 at the knee of the same scan.
CriterionResult check_fwhm_ordering(const ScanTable& trapezoid);
/// Criterion 4: for both chirp signs the knee minimum moves by at least one
/// scan step from the unchirped one, and the FWHM minimum moves the same way.
CriterionResult check_chirp_shift(const ScanTable& gaussian);
/// Criterion 5: Spearman(S, DI) > 0.7 in every chirp series.
CriterionResult check_entropy_comovement(const ScanTable& gaussian);
/// Criterion 6: |S_NSDI - S_Q24| < |S_NSDI - S_Q13| at a majority of points.
CriterionResult check_tdqmc_ordering(const ScanTable& table);
/// Criterion 8: FWHM(6e14) / FWHM(4.5e14) >= 1.5 in the long-pulse table.
CriterionResult check_long_pulse(const ScanTable& long_pulse);

/// Markdown summary of a scan: knee location, FWHM there, and the criterion
/// checks that can be evaluated from this table. With the scan's config, a
/// 12-cycle trapezoid scan is checked as the long-pulse run instead.
std::string emit_report(const ScanTable& table, const RunConfig* config = nullptr);

}  // namespace nsdi
