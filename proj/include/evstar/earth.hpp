#pragma once

#include "evstar/geometry.hpp"
#include "evstar/utc.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace evstar {

struct EopRecord {
  double mjd_utc = 0.0;
  double pm_x = 0.0;     // arcsec
  double pm_y = 0.0;     // arcsec
  double ut1_utc = 0.0;  // s
  double dx = 0.0;       // mas, celestial pole offset
  double dy = 0.0;       // mas

  bool operator==(const EopRecord&) const = default;
};

/// Earth orientation parameters, strictly ascending in MJD.
class EopTable {
public:
  EopTable() = default;
  /// Throws Errc::ordering on non-increasing MJD, Errc::out_of_range on
  /// implausible values, Errc::empty_table on no records.
  explicit EopTable(std::vector<EopRecord> records);

  const std::vector<EopRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  UtcInstant first() const { return UtcInstant::from_mjd(records_.front().mjd_utc); }
  UtcInstant last() const { return UtcInstant::from_mjd(records_.back().mjd_utc); }

  /// Lines skipped while parsing (missing UT1-UTC, truncated, ...).
  std::size_t skipped_lines = 0;

  bool operator==(const EopTable& o) const { return records_ == o.records_; }

private:
  std::vector<EopRecord> records_;
};

/// IERS finals2000A fixed-width reader (Bulletin A columns).
EopTable parse_finals2000A(const std::filesystem::path& path);
EopTable parse_finals2000A(std::istream& in, const std::string& source = "<stream>");
/// One finals2000A line carrying the Bulletin A fields of `r` (flags 'I').
std::string format_finals2000A_line(const EopRecord& r);

/// Canonical CSV: mjd_utc,pm_x_arcsec,pm_y_arcsec,ut1_utc_s,dx_mas,dy_mas
EopTable parse_eop_csv(const std::filesystem::path& path);
EopTable parse_eop_csv(std::istream& in, const std::string& source = "<stream>");
void write_eop_csv(const EopTable& table, std::ostream& out);

/// Linear interpolation between bracketing records; exact at nodes.
/// Throws Errc::out_of_range outside the table span.
EopRecord eop_at(const EopTable& table, const UtcInstant& t);

/// Earth Rotation Angle in [0, 2 pi) for the UT1 instant t + ut1_utc.
double era(const UtcInstant& t, double ut1_utc);

/// Earth rotation angle rate, rad per UT1 second.
inline constexpr double kEraRate = 2.0 * kPi * 1.00273781191135448 / kSecondsPerDay;

/// ITRF-in-ICRF attitude: celestial-pole offset * ERA spin * polar motion.
/// Full precession-nutation is deliberately not modelled.
UnitQuaternion earth_attitude(const EopTable& table, const UtcInstant& t);
UnitQuaternion earth_attitude(const EopRecord& eop, const UtcInstant& t);

}  // namespace evstar
