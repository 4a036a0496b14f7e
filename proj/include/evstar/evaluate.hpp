#pragma once

#include "evstar/attitude.hpp"

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

namespace evstar {

struct Alignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (estimate, ground truth)
  std::vector<double> dt;                                  // seconds, est - gt
  std::size_t unpaired = 0;
};

/// Pairs every estimate with the nearest ground-truth sample within max_dt
/// seconds (earlier sample on exact ties). Throws Errc::empty_alignment when
/// nothing pairs.
Alignment align_series(const std::vector<AttitudeEstimate>& est,
                       const std::vector<AttitudeEstimate>& gt, double max_dt);

/// All angles in arcsec.
struct ErrorSample {
  UtcInstant t;
  double ra_err = 0.0;  // scaled by cos(dec of truth)
  double dec_err = 0.0;
  double roll_err = 0.0;
  double across = 0.0;
  double about = 0.0;
};

/// Error of est relative to gt: q_err = gt^-1 * est, split about the
/// camera-frame `boresight`.
ErrorSample error_sample(const UnitQuaternion& est_q, const UnitQuaternion& gt_q,
                         const Vec3& boresight = Vec3::UnitZ());

std::vector<ErrorSample> error_series(const std::vector<AttitudeEstimate>& est,
                                      const std::vector<AttitudeEstimate>& gt,
                                      const Alignment& alignment,
                                      const Vec3& boresight = Vec3::UnitZ());

struct AxisStats {
  double mean = 0.0;  // signed
  double mean_abs = 0.0;
  double max_abs = 0.0;
};

struct Report {
  std::size_t samples = 0;
  double rmse_across = 0.0;
  double rmse_about = 0.0;
  AxisStats ra, dec, roll, across, about;
  // least-squares fit of dec_err against hours since the first sample
  std::optional<double> dec_drift_rate;  // arcsec / hour
  std::optional<double> dec_drift_residual_rms;
  std::optional<double> solve_success_rate;
  std::size_t unpaired = 0;
};

struct TimeWindow {
  UtcInstant begin;
  UtcInstant end;  // inclusive
};

/// Throws Errc::insufficient_data when no sample falls in the window. The
/// drift fit is left empty with fewer than two samples.
Report summarize(const std::vector<ErrorSample>& samples,
                 const std::optional<TimeWindow>& window = std::nullopt);

/// `utc_iso8601,ra_err_as,dec_err_as,roll_err_as,across_as,about_as`
void write_errors_csv(const std::vector<ErrorSample>& samples, std::ostream& out);
/// One `key=value` per line.
void write_report_text(const Report& r, std::ostream& out);
/// Header line plus one data row.
void write_report_csv(const Report& r, std::ostream& out);

}  // namespace evstar
