#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace evstar {

inline constexpr double kSecondsPerDay = 86400.0;

/// A UTC instant as (MJD day, seconds of day). Every day is 86400 s; leap
/// seconds are out of scope and inputs must not straddle one.
class UtcInstant {
public:
  UtcInstant() = default;
  /// Normalizes sec_of_day into [0, 86400) by carrying whole days.
  UtcInstant(std::int64_t mjd_day, double sec_of_day);

  static UtcInstant from_mjd(double mjd);

  std::int64_t mjd_day() const { return mjd_day_; }
  double sec_of_day() const { return sec_of_day_; }
  double mjd() const { return static_cast<double>(mjd_day_) + sec_of_day_ / kSecondsPerDay; }

  UtcInstant plus_seconds(double s) const;

  /// Seconds from rhs to *this.
  double operator-(const UtcInstant& rhs) const {
    return static_cast<double>(mjd_day_ - rhs.mjd_day_) * kSecondsPerDay +
           (sec_of_day_ - rhs.sec_of_day_);
  }

  auto operator<=>(const UtcInstant&) const = default;
  bool operator==(const UtcInstant&) const = default;

private:
  std::int64_t mjd_day_ = 0;
  double sec_of_day_ = 0.0;
};

/// Days since 1858-11-17 for a proleptic Gregorian date.
std::int64_t mjd_from_civil(int year, int month, int day);
void civil_from_mjd(std::int64_t mjd, int& year, int& month, int& day);

/// "YYYY-MM-DDThh:mm:ss[.ffffff]Z"; throws Errc::parse on malformed text.
UtcInstant parse_iso8601(std::string_view text);
/// Always prints six fractional digits, rounded to the microsecond.
std::string format_iso8601(const UtcInstant& t);

}  // namespace evstar
