#include "evstar/earth.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>

namespace evstar {

namespace {

// Bulletin A columns of finals2000A.all, 1-based inclusive as printed in the
// IERS readme.finals2000A.
struct Column {
  int first;
  int last;
};
constexpr Column kColYear{1, 2};
constexpr Column kColMonth{3, 4};
constexpr Column kColDay{5, 6};
constexpr Column kColMjd{8, 15};        // F8.2
constexpr Column kColPmFlag{17, 17};    // I/P
constexpr Column kColPmX{19, 27};       // F9.6 arcsec
constexpr Column kColPmY{38, 46};       // F9.6 arcsec
constexpr Column kColUt1Flag{58, 58};   // I/P
constexpr Column kColUt1Utc{59, 68};    // F10.7 s
constexpr Column kColNutFlag{96, 96};   // I/P
constexpr Column kColDx{98, 106};       // F9.3 mas
constexpr Column kColDy{117, 125};      // F9.3 mas

std::string_view field(std::string_view line, Column c) {
  const auto first = static_cast<std::size_t>(c.first - 1);
  if (line.size() < first) return {};
  return csv::trim(line.substr(first, static_cast<std::size_t>(c.last - c.first + 1)));
}

bool optional_number(std::string_view text, double& out) {
  if (text.empty()) return false;
  out = csv::to_double(text, "finals2000A field");
  return true;
}

void check_plausible(const EopRecord& r) {
  if (!(std::abs(r.ut1_utc) < 1.0) || !(std::abs(r.pm_x) < 2.0) || !(std::abs(r.pm_y) < 2.0)) {
    throw Error(Errc::out_of_range,
                fmt::format("implausible EOP values at MJD {:.2f}", r.mjd_utc));
  }
}

double lerp(double a, double b, double s) { return a + (b - a) * s; }

}  // namespace

EopTable::EopTable(std::vector<EopRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw Error(Errc::empty_table, "EOP table has no records");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    check_plausible(records_[i]);
    if (i > 0 && !(records_[i].mjd_utc > records_[i - 1].mjd_utc)) {
      throw Error(Errc::ordering, fmt::format("EOP records not strictly ascending at MJD {:.5f}",
                                              records_[i].mjd_utc));
    }
  }
}

EopTable parse_finals2000A(std::istream& in, const std::string& source) {
  std::vector<EopRecord> records;
  std::size_t skipped = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (csv::trim(line).empty()) continue;
    try {
      const std::string_view l = line;
      EopRecord r;
      double mjd = 0.0;
      if (!optional_number(field(l, kColMjd), mjd) || !optional_number(field(l, kColPmX), r.pm_x) ||
          !optional_number(field(l, kColPmY), r.pm_y) ||
          !optional_number(field(l, kColUt1Utc), r.ut1_utc)) {
        ++skipped;
        continue;
      }
      r.mjd_utc = mjd;
      optional_number(field(l, kColDx), r.dx);
      optional_number(field(l, kColDy), r.dy);
      records.push_back(r);
    } catch (const Error&) {
      ++skipped;
    }
  }
  if (records.empty()) {
    throw Error(Errc::empty_table,
                fmt::format("{}: no parseable finals2000A lines ({} read)", source, line_no));
  }
  EopTable table(std::move(records));
  table.skipped_lines = skipped;
  return table;
}

EopTable parse_finals2000A(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_finals2000A(in, path.string());
}

std::string format_finals2000A_line(const EopRecord& r) {
  int y, m, d;
  civil_from_mjd(static_cast<std::int64_t>(std::floor(r.mjd_utc)), y, m, d);
  std::string line(185, ' ');
  auto put = [&](Column c, const std::string& text) {
    const auto width = static_cast<std::size_t>(c.last - c.first + 1);
    const std::string padded = text.size() >= width ? text.substr(text.size() - width)
                                                    : std::string(width - text.size(), ' ') + text;
    line.replace(static_cast<std::size_t>(c.first - 1), width, padded);
  };
  put(kColYear, fmt::format("{:02d}", y % 100));
  put(kColMonth, fmt::format("{:2d}", m));
  put(kColDay, fmt::format("{:2d}", d));
  put(kColMjd, fmt::format("{:8.2f}", r.mjd_utc));
  put(kColPmFlag, "I");
  put(kColPmX, fmt::format("{:9.6f}", r.pm_x));
  put(kColPmY, fmt::format("{:9.6f}", r.pm_y));
  put(kColUt1Flag, "I");
  put(kColUt1Utc, fmt::format("{:10.7f}", r.ut1_utc));
  put(kColNutFlag, "I");
  put(kColDx, fmt::format("{:9.3f}", r.dx));
  put(kColDy, fmt::format("{:9.3f}", r.dy));
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

EopTable parse_eop_csv(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header("mjd_utc,pm_x_arcsec,pm_y_arcsec,ut1_utc_s,dx_mas,dy_mas");
  std::vector<EopRecord> records;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const std::string where = reader.where();
    if (f.size() != 6) {
      throw Error(Errc::parse, fmt::format("{}: expected 6 fields, got {}", where, f.size()));
    }
    EopRecord r{csv::to_double(f[0], where), csv::to_double(f[1], where),
                csv::to_double(f[2], where), csv::to_double(f[3], where),
                csv::to_double(f[4], where), csv::to_double(f[5], where)};
    if (!records.empty() && !(r.mjd_utc > records.back().mjd_utc)) {
      throw Error(Errc::ordering, where + ": mjd_utc not strictly ascending");
    }
    records.push_back(r);
  }
  if (records.empty()) throw Error(Errc::empty_table, source + ": no EOP rows");
  return EopTable(std::move(records));
}

EopTable parse_eop_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_eop_csv(in, path.string());
}

void write_eop_csv(const EopTable& table, std::ostream& out) {
  out << "mjd_utc,pm_x_arcsec,pm_y_arcsec,ut1_utc_s,dx_mas,dy_mas\n";
  // Enough fixed digits to reproduce every finals2000A field exactly.
  for (const EopRecord& r : table.records()) {
    out << fmt::format("{:.6f},{:.6f},{:.6f},{:.7f},{:.3f},{:.3f}\n", r.mjd_utc, r.pm_x, r.pm_y,
                       r.ut1_utc, r.dx, r.dy);
  }
}

EopRecord eop_at(const EopTable& table, const UtcInstant& t) {
  const auto& recs = table.records();
  if (recs.empty()) throw Error(Errc::empty_table, "EOP table is empty");
  const double mjd = t.mjd();
  if (mjd < recs.front().mjd_utc || mjd > recs.back().mjd_utc) {
    throw Error(Errc::out_of_range,
                fmt::format("{} outside EOP span [{:.2f}, {:.2f}]", format_iso8601(t),
                            recs.front().mjd_utc, recs.back().mjd_utc));
  }
  const auto it = std::lower_bound(recs.begin(), recs.end(), mjd,
                                   [](const EopRecord& r, double v) { return r.mjd_utc < v; });
  if (it->mjd_utc == mjd) return *it;
  const EopRecord& hi = *it;
  const EopRecord& lo = *(it - 1);
  // Interpolate in whole-day + seconds form to keep sub-microsecond resolution.
  const double lo_day = std::floor(lo.mjd_utc);
  const double offset = static_cast<double>(t.mjd_day() - static_cast<std::int64_t>(lo_day)) +
                        t.sec_of_day() / kSecondsPerDay - (lo.mjd_utc - lo_day);
  const double s = offset / (hi.mjd_utc - lo.mjd_utc);
  return {mjd,
          lerp(lo.pm_x, hi.pm_x, s),
          lerp(lo.pm_y, hi.pm_y, s),
          lerp(lo.ut1_utc, hi.ut1_utc, s),
          lerp(lo.dx, hi.dx, s),
          lerp(lo.dy, hi.dy, s)};
}

double era(const UtcInstant& t, double ut1_utc) {
  // Tu = JD(UT1) - 2451545.0 = (mjd_day - 51545) + frac_part
  const double whole = static_cast<double>(t.mjd_day() - 51545);
  const double frac_part = 0.5 + (t.sec_of_day() + ut1_utc) / kSecondsPerDay;
  const double turns = 0.7790572732640 + 0.00273781191135448 * (whole + frac_part) + frac_part;
  double angle = 2.0 * kPi * (turns - std::floor(turns));
  if (angle >= 2.0 * kPi) angle -= 2.0 * kPi;
  return angle;
}

UnitQuaternion earth_attitude(const EopRecord& eop, const UtcInstant& t) {
  const double xp = arcsec_to_rad(eop.pm_x);
  const double yp = arcsec_to_rad(eop.pm_y);
  // W = R2(xp) R1(yp) in the passive IERS convention.
  const UnitQuaternion polar = quat_from_axis_angle(Vec3::UnitY(), -xp) *
                               quat_from_axis_angle(Vec3::UnitX(), -yp);
  const UnitQuaternion spin = quat_from_axis_angle(Vec3::UnitZ(), era(t, eop.ut1_utc));
  // Small-angle CIP offset: Q ~ I + [(-dY, dX, 0)]x
  const double dx = arcsec_to_rad(eop.dx * 1e-3);
  const double dy = arcsec_to_rad(eop.dy * 1e-3);
  const UnitQuaternion pole = quat_from_rotation_vector(Vec3(-dy, dx, 0.0));
  return pole * spin * polar;
}

UnitQuaternion earth_attitude(const EopTable& table, const UtcInstant& t) {
  return earth_attitude(eop_at(table, t), t);
}

}  // namespace evstar
