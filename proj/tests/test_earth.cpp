#include "doctest.h"
#include "support.hpp"

#include "evstar/earth.hpp"

#include <fstream>
#include <sstream>

using namespace evstar;
using testing::fixture;

namespace {

const auto kFinals = testing::source_dir() / "data/eop/finals2000A_2024-10-25.txt";

EopRecord zero_eop(double mjd) { return {mjd, 0, 0, 0, 0, 0}; }

double wrap_2pi(double a) {
  a = std::fmod(a, 2 * kPi);
  return a < 0 ? a + 2 * kPi : a;
}

}  // namespace

TEST_CASE("finals2000A fixture values read by hand") {
  const EopTable t = parse_finals2000A(fixture("finals_excerpt.txt"));
  REQUIRE(t.size() == 3);
  const EopRecord& r = t.records()[0];
  CHECK(r.mjd_utc == 60615.0);
  CHECK(r.pm_x == 0.215325);
  CHECK(r.pm_y == 0.364850);
  CHECK(r.ut1_utc == 0.0536234);
  CHECK(r.dx == 0.401);
  CHECK(r.dy == 0.040);
  CHECK(t.records()[1].pm_x == 0.214604);
}

TEST_CASE("bundled finals2000A file") {
  const EopTable t = parse_finals2000A(kFinals);
  CHECK(t.size() == 21);
  CHECK(t.skipped_lines == 3);  // trailing lines with no Bulletin A values
  CHECK(t.records().front().mjd_utc == 60608.0);
  CHECK(t.records().back().mjd_utc == 60628.0);
}

TEST_CASE("formatted line round-trips") {
  const EopRecord r{60700.0, -0.123456, 0.456789, -0.1234567, 0.123, -0.456};
  std::istringstream in(format_finals2000A_line(r) + "\n");
  const EopTable t = parse_finals2000A(in);
  REQUIRE(t.size() == 1);
  CHECK(t.records()[0] == r);
}

TEST_CASE("truncated lines are skipped and counted") {
  std::ifstream f(fixture("finals_excerpt.txt"));
  std::string l1, l2, l3;
  std::getline(f, l1);
  std::getline(f, l2);
  std::getline(f, l3);
  std::istringstream in(l1 + "\n" + l2.substr(0, 40) + "\n" + l3 + "\n");
  const EopTable t = parse_finals2000A(in);
  CHECK(t.size() == 2);
  CHECK(t.skipped_lines == 1);

  std::istringstream junk("not an eop line\n");
  CHECK_THROWS_ERRC(parse_finals2000A(junk), Errc::empty_table);
  CHECK_THROWS_ERRC(parse_finals2000A(fixture("missing.txt")), Errc::io);
}

TEST_CASE("EOP CSV") {
  const EopTable t = parse_eop_csv(fixture("eop_two_rows.csv"));
  CHECK(t.size() == 2);
  CHECK_THROWS_ERRC(parse_eop_csv(fixture("eop_unsorted.csv")), Errc::ordering);

  // cross-format: export a parsed finals file and read it back
  const EopTable fin = parse_finals2000A(kFinals);
  std::stringstream ss;
  write_eop_csv(fin, ss);
  CHECK(parse_eop_csv(ss) == fin);
}

TEST_CASE("table validation") {
  CHECK_THROWS_ERRC(EopTable(std::vector<EopRecord>{}), Errc::empty_table);
  CHECK_THROWS_ERRC(EopTable({zero_eop(2), zero_eop(1)}), Errc::ordering);
  CHECK_THROWS_ERRC(EopTable({zero_eop(1), zero_eop(1)}), Errc::ordering);
  EopRecord wild = zero_eop(3);
  wild.ut1_utc = 1.5;
  CHECK_THROWS_ERRC(EopTable({zero_eop(1), wild}), Errc::out_of_range);
}

TEST_CASE("interpolation") {
  const EopTable t = parse_finals2000A(kFinals);
  const auto& r = t.records();
  CHECK(eop_at(t, UtcInstant::from_mjd(r[4].mjd_utc)) == r[4]);

  const EopRecord mid = eop_at(t, UtcInstant(static_cast<std::int64_t>(r[4].mjd_utc), 43200.0));
  CHECK(mid.pm_x == doctest::Approx((r[4].pm_x + r[5].pm_x) / 2).epsilon(1e-14));
  CHECK(mid.ut1_utc == doctest::Approx((r[4].ut1_utc + r[5].ut1_utc) / 2).epsilon(1e-14));
  CHECK(mid.dy == doctest::Approx((r[4].dy + r[5].dy) / 2).epsilon(1e-14));

  testing::Gen g(21);
  for (int i = 0; i < 100; ++i) {
    const double mjd = g.uniform(r.front().mjd_utc, r.back().mjd_utc);
    const UtcInstant at = UtcInstant::from_mjd(mjd);
    std::size_t k = 0;
    while (r[k + 1].mjd_utc < at.mjd()) ++k;
    const double w = (at.mjd() - r[k].mjd_utc) / (r[k + 1].mjd_utc - r[k].mjd_utc);
    const EopRecord e = eop_at(t, at);
    CHECK(std::abs(e.pm_x - (r[k].pm_x + w * (r[k + 1].pm_x - r[k].pm_x))) < 1e-12);
    CHECK(std::abs(e.pm_y - (r[k].pm_y + w * (r[k + 1].pm_y - r[k].pm_y))) < 1e-12);
    CHECK(std::abs(e.ut1_utc - (r[k].ut1_utc + w * (r[k + 1].ut1_utc - r[k].ut1_utc))) < 1e-12);
    CHECK(std::abs(e.dx - (r[k].dx + w * (r[k + 1].dx - r[k].dx))) < 1e-12);
  }
  CHECK_THROWS_ERRC(eop_at(t, UtcInstant::from_mjd(60600)), Errc::out_of_range);
  CHECK_THROWS_ERRC(eop_at(t, UtcInstant::from_mjd(60628.5)), Errc::out_of_range);
}

TEST_CASE("earth rotation angle") {
  const UtcInstant j2000(51544, 43200.0);  // JD 2451545.0
  CHECK(era(j2000, 0.0) == doctest::Approx(2 * kPi * 0.7790572732640).epsilon(1e-14));

  const double d = wrap_2pi(era(j2000.plus_seconds(86400.0), 0.0) - era(j2000, 0.0));
  CHECK(d == doctest::Approx(wrap_2pi(2 * kPi * 0.00273781191135448)).epsilon(1e-10));

  // UT1 - UTC shifts the argument
  CHECK(era(j2000, 0.5) == doctest::Approx(era(j2000.plus_seconds(0.5), 0.0)).epsilon(1e-13));

  const double expected_deg_per_day = 360.0 * 1.00273781191135448;
  testing::Gen g(22);
  for (int i = 0; i < 50; ++i) {
    const UtcInstant t(g.integer(50000, 70000), g.uniform(0, 86400));
    const double dt = g.uniform(10.0, 3000.0);
    const double rate = wrap_2pi(era(t.plus_seconds(dt), 0.0) - era(t, 0.0)) / dt;
    CHECK(std::abs(rad_to_deg(rate) * 86400.0 / expected_deg_per_day - 1.0) < 1e-9);
    CHECK(std::abs(rate / kEraRate - 1.0) < 1e-9);
  }
}

TEST_CASE("earth attitude") {
  // zero EOP at an instant where ERA = 0: identity
  const double tu = (1.0 - 0.7790572732640) / 1.00273781191135448;
  const UtcInstant t0 = UtcInstant(51544, 43200.0).plus_seconds(tu * 86400.0);
  CHECK(earth_attitude(zero_eop(t0.mjd()), t0).angle() < 1e-9);

  // spin only: one hour moves the equatorial x axis by the ERA rate
  const EopTable t = parse_finals2000A(kFinals);
  const UtcInstant a = parse_iso8601("2024-11-02T03:00:00Z");
  const UtcInstant b = a.plus_seconds(3600);
  const double sep = angular_separation(earth_attitude(t, a).rotate(Vec3::UnitX()),
                                        earth_attitude(t, b).rotate(Vec3::UnitX()));
  CHECK(rad_to_deg(sep) == doctest::Approx(360.98561228808 / 24.0).epsilon(1e-6));
  CHECK(rad_to_deg(sep) == doctest::Approx(15.04).epsilon(1e-3));

  // polar motion x of 0.1 arcsec tilts the pole by 0.1 arcsec
  EopRecord pm = zero_eop(a.mjd());
  pm.pm_x = 0.1;
  const double tilt = angular_separation(earth_attitude(pm, a).rotate(Vec3::UnitZ()),
                                         earth_attitude(zero_eop(a.mjd()), a).rotate(Vec3::UnitZ()));
  CHECK(rad_to_arcsec(tilt) == doctest::Approx(0.1).epsilon(1e-6));

  EopRecord off = zero_eop(a.mjd());
  off.dx = 1.0;
  const double pole = angular_separation(earth_attitude(off, a).rotate(Vec3::UnitZ()), Vec3::UnitZ());
  CHECK(rad_to_arcsec(pole) == doctest::Approx(1e-3).epsilon(1e-6));
  // dX moves the pole toward +x of the celestial frame
  CHECK(earth_attitude(off, a).rotate(Vec3::UnitZ()).x() > 0);

  CHECK_THROWS_ERRC(earth_attitude(t, UtcInstant::from_mjd(60000)), Errc::out_of_range);
}
