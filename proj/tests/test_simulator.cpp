#include "doctest.h"
#include "support.hpp"

#include "evstar/simulator.hpp"

#include <sstream>

using namespace evstar;

namespace {

const UtcInstant kT0 = parse_iso8601("2024-11-02T03:00:00Z");

const EopTable& finals() {
  static const EopTable t = parse_finals2000A(testing::source_dir() / "data/eop/finals2000A_2024-10-25.txt");
  return t;
}

SimConfig quiet() {
  SimConfig c;
  c.noise_rate = 0.0;
  return c;
}

Catalog lone_star(const SkyCoord& where, double mag) {
  return Catalog(std::vector<Star>{{1, skycoord_to_unit(where), mag}}, 20.0);
}

// least-squares slope of y against x
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("image plane speed examples") {
  CHECK(image_plane_speed(0.035, 15.0 / 3600.0, 4.86e-6) == doctest::Approx(0.52).epsilon(0.005 / 0.52));
  CHECK(std::abs(image_plane_speed(0.035, 1.8, 4.86e-6) - 226.32) < 0.005);
  CHECK(image_plane_speed(0.2, 0.0, 1e-5) == 0.0);
  CHECK(std::abs(focal_length_for_speed(226.32, 15.0 / 3600.0, 4.86e-6) - 15.125) < 0.001);
  CHECK(std::abs(focal_length_for_speed(0.52, 15.0 / 3600.0, 4.86e-6) - 0.035) < 0.0005);
  CHECK_THROWS_ERRC(focal_length_for_speed(1.0, 0.0, 4.86e-6), Errc::invalid_argument);
  CHECK_THROWS_ERRC(image_plane_speed(0.0, 1.0, 4.86e-6), Errc::invalid_argument);

  testing::Gen g(51);
  for (int i = 0; i < 200; ++i) {
    const double f = g.uniform(0.01, 20.0), s = g.uniform(1e-4, 5.0), x = g.uniform(1e-6, 2e-5);
    const double p = image_plane_speed(f, s, x);
    CHECK(std::abs(focal_length_for_speed(p, s, x) / f - 1.0) < 1e-12);
  }
}

TEST_CASE("static site trajectory") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  CHECK(rotation_distance(traj(kT0), cam0) == 0.0);

  const SkyCoord a = unit_to_skycoord(cam0.rotate(Vec3::UnitZ()));
  const SkyCoord b = unit_to_skycoord(traj(kT0.plus_seconds(3600)).rotate(Vec3::UnitZ()));
  // fixed to the ground, the boresight stays at constant declination and moves east in RA
  CHECK(std::abs(b.dec_deg - a.dec_deg) * 3600.0 < 0.5);
  CHECK(b.ra_deg - a.ra_deg == doctest::Approx(15.041).epsilon(1e-3));
  const double sweep = rad_to_deg(angular_separation(cam0.rotate(Vec3::UnitZ()),
                                                     traj(kT0.plus_seconds(3600)).rotate(Vec3::UnitZ())));
  CHECK(sweep == doctest::Approx(15.04 * std::cos(deg_to_rad(20.0))).epsilon(2e-3));

  const auto drifting = static_site_trajectory(cam0, kT0, finals(), 49.15);
  const SkyCoord c = unit_to_skycoord(drifting(kT0.plus_seconds(3600)).rotate(Vec3::UnitZ()));
  CHECK((c.dec_deg - b.dec_deg) * 3600.0 == doctest::Approx(49.15).epsilon(1e-3));
  CHECK(std::abs(c.ra_deg - b.ra_deg) * 3600.0 < 0.5);

  CHECK_THROWS_ERRC(static_site_trajectory(cam0, UtcInstant::from_mjd(60000), finals()), Errc::out_of_range);
}

TEST_CASE("empty field without noise is silent") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const SimOutput out = generate_events(traj, lone_star({240, -20}, 3.0), CameraModel(), quiet(), kT0, 5.0);
  CHECK(out.events.empty());
  CHECK(out.fov_always_empty);
}

TEST_CASE("PPS and truth timing") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const Catalog none = lone_star({240, -20}, 3.0);

  const SimOutput whole = generate_events(traj, none, CameraModel(), quiet(), kT0, 10.0);
  CHECK(whole.pps.size() >= 10);
  CHECK(whole.pps.size() <= 11);
  const SimOutput off = generate_events(traj, none, CameraModel(), quiet(), kT0.plus_seconds(0.25), 10.0);
  CHECK(off.pps.size() >= 10);
  CHECK(off.pps.size() <= 11);
  for (const PpsAnchor& a : off.pps) CHECK(a.t_utc.sec_of_day() == std::floor(a.t_utc.sec_of_day()));

  REQUIRE(whole.truth.size() == 201);
  for (std::size_t k = 0; k < whole.truth.size(); ++k) {
    CHECK(whole.truth[k].t == kT0.plus_seconds(static_cast<double>(k) / 20.0));
    CHECK(whole.truth[k].source == EstimateSource::simulator_truth);
  }

  SimConfig skewed = quiet();
  skewed.clock_skew_ppm = 40.0;
  skewed.device_t0_us = 5'000'000;
  const SimOutput s = generate_events(traj, none, CameraModel(), skewed, kT0, 10.0);
  const TimeMap m = build_time_map(s.pps);
  // UTC seconds per device second
  for (double sl : m.slopes()) CHECK(std::abs(sl - 1.0 / (1.0 + 40e-6)) < 2e-6);
  CHECK(s.pps.front().t_event_us == 5'000'000);
}

TEST_CASE("a star at 0.52 px/s moves at the rate of the image plane equation") {
  // 35 mm lens on the equator: the field drifts at the sidereal rate
  const CameraModel cam = CameraModel::make(0.035, 4.86e-6, 1280, 720);
  const UnitQuaternion cam0 = attitude_from_pointing({60, 0}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const SimOutput out = generate_events(traj, lone_star({60, 0}, 5.0), cam, quiet(), kT0, 60.0);
  REQUIRE(out.events.size() > 100);

  std::vector<double> t, u, v;
  for (int sec = 0; sec < 60; ++sec) {
    double su = 0, sv = 0;
    int n = 0;
    for (const Event& e : out.events) {
      if (e.polarity < 0 || e.t_us / 1'000'000 != sec) continue;
      su += e.x;
      sv += e.y;
      ++n;
    }
    if (n == 0) continue;
    t.push_back(sec + 0.5);
    u.push_back(su / n);
    v.push_back(sv / n);
  }
  REQUIRE(t.size() > 50);
  const double speed = std::hypot(slope(t, u), slope(t, v));
  CHECK(speed == doctest::Approx(0.52).epsilon(0.05 / 0.52));
  const double expected = image_plane_speed(0.035, rad_to_deg(kEraRate), 4.86e-6);
  CHECK(std::abs(speed - expected) < 0.05);
}

TEST_CASE("noiseless events lie near a star path") {
  const CameraModel cam;
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const Catalog cat = synthesize_field(59.5, 60.5, 19.7, 20.3, 60, 7, 10.5, 17);
  const SimConfig cfg = quiet();
  const double duration = 4.0;
  const SimOutput out = generate_events(traj, cat, cam, cfg, kT0, duration);
  REQUIRE(out.events.size() > 100);

  // star paths sampled every 10 ms
  std::vector<std::vector<PixelPos>> paths;
  for (const StarInView& s : stars_near_fov(cat, cam0, cam, 50.0)) {
    std::vector<PixelPos> p;
    for (int k = 0; k <= 400; ++k) {
      if (auto px = project_star(cam, traj(kT0.plus_seconds(k * 0.01)), s.star.dir)) p.push_back(*px);
    }
    paths.push_back(p);
  }
  testing::Gen g(52);
  const double limit = 5.0 * cfg.psf_sigma;
  for (int i = 0; i < 2000; ++i) {
    const Event& e = out.events[static_cast<std::size_t>(g.integer(0, static_cast<int>(out.events.size()) - 1))];
    double best = 1e9;
    for (const auto& p : paths) {
      for (const PixelPos& q : p) best = std::min(best, std::hypot(q.u - e.x, q.v - e.y));
    }
    CHECK(best <= limit);
  }
}

TEST_CASE("determinism and event counts") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const Catalog sparse = synthesize_field(59.5, 60.5, 19.7, 20.3, 15, 7, 10.5, 17);
  const Catalog dense = synthesize_field(59.5, 60.5, 19.7, 20.3, 60, 7, 10.5, 17);
  SimConfig cfg;
  cfg.seed = 9;
  const SimOutput a = generate_events(traj, dense, CameraModel(), cfg, kT0, 3.0);
  const SimOutput b = generate_events(traj, dense, CameraModel(), cfg, kT0, 3.0);
  CHECK(a.events == b.events);
  CHECK(std::is_sorted(a.events.begin(), a.events.end(),
                       [](const Event& x, const Event& y) { return x.t_us < y.t_us; }));
  cfg.seed = 10;
  const SimOutput c = generate_events(traj, dense, CameraModel(), cfg, kT0, 3.0);
  CHECK(c.events != a.events);

  const SimOutput few = generate_events(traj, sparse, CameraModel(), quiet(), kT0, 3.0);
  const SimOutput many = generate_events(traj, dense, CameraModel(), quiet(), kT0, 3.0);
  CHECK(many.events.size() > few.events.size());
}

TEST_CASE("noise only") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  SimConfig cfg;
  cfg.noise_rate = 0.01;
  const SimOutput out = generate_events(traj, lone_star({240, -20}, 3.0), CameraModel(), cfg, kT0, 2.0);
  CHECK(out.fov_always_empty);
  // Poisson count around rate * pixels * seconds
  const double expected = 0.01 * 1280 * 720 * 2.0;
  CHECK(std::abs(static_cast<double>(out.events.size()) - expected) < 5.0 * std::sqrt(expected));
}

TEST_CASE("config validation") {
  const UnitQuaternion cam0 = attitude_from_pointing({60, 20}, 0.0);
  const auto traj = static_site_trajectory(cam0, kT0, finals());
  const Catalog cat = lone_star({60, 20}, 5.0);
  SimConfig bad;
  bad.contrast_threshold = 0.0;
  CHECK_THROWS_ERRC(generate_events(traj, cat, CameraModel(), bad, kT0, 1.0), Errc::invalid_argument);
  bad = SimConfig{};
  bad.psf_sigma = -1.0;
  CHECK_THROWS_ERRC(bad.validate(), Errc::invalid_argument);
  bad = SimConfig{};
  bad.tick_us = 0.0;
  CHECK_THROWS_ERRC(bad.validate(), Errc::invalid_argument);
  CHECK_THROWS_ERRC(generate_events(traj, cat, CameraModel(), SimConfig{}, kT0, 0.0), Errc::invalid_argument);
}

TEST_CASE("events CSV") {
  const std::vector<Event> ev{{0, 1, 2, 1}, {5, 1279, 719, -1}, {5, 3, 3, 1}};
  std::stringstream ss;
  write_events_csv(ev, ss);
  CHECK(ss.str() == "t_us,x,y,p\n0,1,2,1\n5,1279,719,-1\n5,3,3,1\n");
  CHECK(read_events_csv(ss, "mem") == ev);

  std::istringstream unsorted("t_us,x,y,p\n5,1,1,1\n4,1,1,1\n");
  CHECK_THROWS_ERRC(read_events_csv(unsorted, "mem"), Errc::ordering);
  std::istringstream pol("t_us,x,y,p\n5,1,1,0\n");
  CHECK_THROWS_ERRC(read_events_csv(pol, "mem"), Errc::parse);
  std::istringstream neg("t_us,x,y,p\n5,-1,1,1\n");
  CHECK_THROWS_ERRC(read_events_csv(neg, "mem"), Errc::parse);
  std::istringstream header("t,x,y,p\n");
  CHECK_THROWS_ERRC(read_events_csv(header, "mem"), Errc::parse);
  CHECK_THROWS_ERRC(read_events_csv(testing::fixture("missing_events.csv")), Errc::io);
}
