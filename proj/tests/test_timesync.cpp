#include "doctest.h"
#include "support.hpp"

#include "evstar/timesync.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

using namespace evstar;

namespace {

const UtcInstant kT0 = parse_iso8601("2024-11-02T03:00:00Z");

// Device clock running (1 + ppm 1e-6) fast with a slow sinusoidal wander; the
// UTC second k is latched at device time device_of(k).
struct DriftClock {
  double ppm = 50.0;
  double offset_us = 123456.0;
  double device_of(double utc_s) const {
    return offset_us + utc_s * 1e6 * (1.0 + ppm * 1e-6) + 3.0 * std::sin(utc_s / 97.0);
  }
};

std::vector<PpsAnchor> anchors_for(const DriftClock& c, int seconds) {
  std::vector<PpsAnchor> a;
  for (int k = 0; k <= seconds; ++k) {
    a.push_back({std::llround(c.device_of(k)), kT0.plus_seconds(k)});
  }
  return a;
}

}  // namespace

TEST_CASE("two-anchor map") {
  const TimeMap m = build_time_map({{1'000'000, kT0.plus_seconds(1)}, {2'000'000, kT0.plus_seconds(2)}});
  CHECK(m.to_utc(1'000'000) == kT0.plus_seconds(1));
  CHECK(m.to_utc(2'000'000) == kT0.plus_seconds(2));
  CHECK(m.to_utc(1'500'000) - kT0 == doctest::Approx(1.5));
  // extrapolation uses the nearest segment
  CHECK(m.to_utc(0) - kT0 == doctest::Approx(0.0));
  CHECK(m.to_utc(3'000'000) - kT0 == doctest::Approx(3.0));
  CHECK(m.to_device_us(kT0.plus_seconds(1.25)) == doctest::Approx(1'250'000.0));
}

TEST_CASE("map construction errors") {
  CHECK_THROWS_ERRC(build_time_map({{1'000'000, kT0}}), Errc::insufficient_data);
  CHECK_THROWS_ERRC(build_time_map({}), Errc::insufficient_data);
  CHECK_THROWS_ERRC(build_time_map({{2'000'000, kT0}, {2'000'000, kT0.plus_seconds(1)}}), Errc::ordering);
  CHECK_THROWS_ERRC(build_time_map({{1'000'000, kT0.plus_seconds(1)}, {2'000'000, kT0}}), Errc::ordering);
  CHECK_THROWS_ERRC(build_time_map({{0, kT0}, {2'000'000, kT0.plus_seconds(1)}}), Errc::clock_skew);
}

TEST_CASE("constructed 50 ppm drift") {
  const DriftClock clock;
  const auto anchors = anchors_for(clock, 600);
  const TimeMap m = build_time_map(anchors);
  for (double s : m.slopes()) CHECK(std::abs(s - 1.0) < 5e-5 + 1e-5);

  for (const auto& a : anchors) CHECK(m.to_utc(static_cast<double>(a.t_event_us)) == a.t_utc);

  testing::Gen g(31);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double utc_s = g.uniform(0.0, 600.0);
    // the constructed clock is nearly linear between pulses, so the map must
    // recover UTC to well under a microsecond
    const double dev = clock.device_of(utc_s);
    worst = std::max(worst, std::abs((m.to_utc(dev) - kT0) - utc_s));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("monotone and invertible") {
  const auto anchors = anchors_for(DriftClock{}, 30);
  const TimeMap m = build_time_map(anchors);
  testing::Gen g(32);
  std::vector<double> ts;
  for (int i = 0; i < 2000; ++i) ts.push_back(g.uniform(-1e6, 32e6));
  std::sort(ts.begin(), ts.end());
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] > ts[i - 1] + 1e-3) CHECK(m.to_utc(ts[i - 1]) < m.to_utc(ts[i]));
    CHECK(std::abs(m.to_device_us(m.to_utc(ts[i])) - ts[i]) < 1.0);
  }
}

TEST_CASE("PPS files") {
  auto anchors = anchors_for(DriftClock{}, 5);
  std::stringstream trig, utc;
  write_trigger_csv(anchors, trig);
  write_utc_log_csv(anchors, utc);
  CHECK(trig.str().rfind("t_event_us\n", 0) == 0);
  CHECK(utc.str().rfind("utc_iso8601\n", 0) == 0);

  const auto dir = std::filesystem::temp_directory_path() / "evstar_test_pps";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "trig.csv") << trig.str();
  std::ofstream(dir / "utc.csv") << utc.str();
  const auto back = read_pps_files(dir / "trig.csv", dir / "utc.csv");
  REQUIRE(back.size() == anchors.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].t_event_us == anchors[i].t_event_us);
    CHECK(back[i].t_utc == anchors[i].t_utc);
  }

  // paired after sorting each list independently
  std::vector<std::int64_t> t{3, 1, 2};
  std::vector<UtcInstant> u{kT0.plus_seconds(2), kT0, kT0.plus_seconds(1)};
  const auto p = pair_pps(t, u);
  CHECK(p[0].t_event_us == 1);
  CHECK(p[0].t_utc == kT0);
  CHECK(p[2].t_utc == kT0.plus_seconds(2));
  CHECK_THROWS_ERRC(pair_pps({1, 2}, {kT0}), Errc::insufficient_data);

  std::ofstream(dir / "short.csv") << "t_event_us\n1000000\n";
  CHECK_THROWS_ERRC(read_pps_files(dir / "short.csv", dir / "utc.csv"), Errc::insufficient_data);
  std::ofstream(dir / "bad.csv") << "utc_iso8601\nyesterday\n";
  CHECK_THROWS_ERRC(read_pps_files(dir / "short.csv", dir / "bad.csv"), Errc::parse);
  std::filesystem::remove_all(dir);
}
