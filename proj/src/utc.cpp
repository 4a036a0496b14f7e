#include "evstar/utc.hpp"

#include "evstar/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <cstdio>

namespace evstar {

namespace {
// 1970-01-01 is MJD 40587.
constexpr std::int64_t kMjdUnixEpoch = 40587;

// Howard Hinnant's days_from_civil / civil_from_days, relative to 1970-01-01.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}
}  // namespace

UtcInstant::UtcInstant(std::int64_t mjd_day, double sec_of_day) {
  const double carry = std::floor(sec_of_day / kSecondsPerDay);
  mjd_day_ = mjd_day + static_cast<std::int64_t>(carry);
  sec_of_day_ = sec_of_day - carry * kSecondsPerDay;
  if (sec_of_day_ >= kSecondsPerDay) {  // rounding at the boundary
    sec_of_day_ -= kSecondsPerDay;
    ++mjd_day_;
  }
}

UtcInstant UtcInstant::from_mjd(double mjd) {
  const double day = std::floor(mjd);
  return {static_cast<std::int64_t>(day), (mjd - day) * kSecondsPerDay};
}

UtcInstant UtcInstant::plus_seconds(double s) const { return {mjd_day_, sec_of_day_ + s}; }

std::int64_t mjd_from_civil(int year, int month, int day) {
  return days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day)) +
         kMjdUnixEpoch;
}

void civil_from_mjd(std::int64_t mjd, int& year, int& month, int& day) {
  std::int64_t z = mjd - kMjdUnixEpoch + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  day = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  month = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  year = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (month <= 2));
}

UtcInstant parse_iso8601(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0;
  double s = 0.0;
  int consumed = 0;
  const std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2dT%2d:%2d:%lf%n", &y, &mo, &d, &h, &mi, &s, &consumed) != 6) {
    throw Error(Errc::parse, "malformed ISO-8601 timestamp '" + buf + "'");
  }
  const std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!(rest.empty() || rest == "Z") || mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 ||
      s < 0.0 || s >= 60.0) {
    throw Error(Errc::parse, "malformed ISO-8601 timestamp '" + buf + "'");
  }
  return {mjd_from_civil(y, mo, d), h * 3600.0 + mi * 60.0 + s};
}

std::string format_iso8601(const UtcInstant& t) {
  auto micros = static_cast<std::int64_t>(std::llround(t.sec_of_day() * 1e6));
  std::int64_t mjd = t.mjd_day();
  constexpr std::int64_t kMicrosPerDay = 86'400'000'000;
  if (micros >= kMicrosPerDay) {
    micros -= kMicrosPerDay;
    ++mjd;
  }
  int y, mo, d;
  civil_from_mjd(mjd, y, mo, d);
  const std::int64_t secs = micros / 1'000'000;
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:06d}Z", y, mo, d, secs / 3600,
                     (secs / 60) % 60, secs % 60, micros % 1'000'000);
}

}  // namespace evstar
