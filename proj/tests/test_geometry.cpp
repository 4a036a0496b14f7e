#include "doctest.h"
#include "support.hpp"

#include "evstar/geometry.hpp"

using namespace evstar;
using testing::Gen;

namespace {

// Rodrigues' formula built directly, independent of the quaternion code.
Mat3 rodrigues(const Vec3& k, double a) {
  Mat3 K;
  K << 0, -k.z(), k.y(), k.z(), 0, -k.x(), -k.y(), k.x(), 0;
  return Mat3::Identity() + std::sin(a) * K + (1 - std::cos(a)) * K * K;
}

double quat_gap(const UnitQuaternion& a, const UnitQuaternion& b) {
  const auto x = a.wxyz(), y = b.wxyz();
  double plus = 0, minus = 0;
  for (int i = 0; i < 4; ++i) {
    plus = std::max(plus, std::abs(x[i] - y[i]));
    minus = std::max(minus, std::abs(x[i] + y[i]));
  }
  return std::min(plus, minus);
}

}  // namespace

TEST_CASE("axis-angle basics") {
  const UnitQuaternion id = quat_from_axis_angle(Vec3::UnitZ(), 0.0);
  CHECK(id.w() == 1.0);
  CHECK(id.vec().norm() == 0.0);

  const Vec3 r = quat_from_axis_angle(Vec3::UnitZ(), kPi).rotate(Vec3::UnitX());
  CHECK((r - Vec3(-1, 0, 0)).norm() < 1e-15);

  const Vec3 y = quat_from_axis_angle(Vec3::UnitZ(), kPi / 2).rotate(Vec3::UnitX());
  CHECK((y - Vec3::UnitY()).norm() < 1e-15);
  CHECK((UnitQuaternion::identity().rotate(Vec3(1, 2, 3)) - Vec3(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("axis-angle agrees with Rodrigues matrix") {
  Gen g(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 k = g.unit_vector();
    const UnitQuaternion q = quat_from_axis_angle(k, 0.3);
    const Mat3 R = rodrigues(k, 0.3);
    for (int i = 0; i < 10; ++i) {
      const Vec3 v = g.unit_vector() * g.uniform(0.1, 10.0);
      CHECK((q.rotate(v) - R * v).norm() < 1e-12 * v.norm());
    }
  }
}

TEST_CASE("rotate equals matrix form for random rotations") {
  Gen g(12);
  for (int i = 0; i < 200; ++i) {
    const UnitQuaternion q = g.quaternion();
    const Vec3 v = g.unit_vector();
    CHECK((q.rotate(v) - q.matrix() * v).norm() < 1e-12);
    CHECK(std::abs(q.matrix().determinant() - 1.0) < 1e-12);
  }
}

TEST_CASE("constructor and axis validation") {
  CHECK_THROWS_ERRC(UnitQuaternion(0, 0, 0, 0), Errc::invalid_argument);
  CHECK_THROWS_ERRC(quat_from_axis_angle(Vec3(1, 1, 0), 0.2), Errc::invalid_argument);
  const UnitQuaternion q(2, 0, 0, 0);
  CHECK(q.w() == 1.0);
}

TEST_CASE("composition applies the right factor first") {
  const UnitQuaternion a = quat_from_axis_angle(Vec3::UnitZ(), kPi / 2);
  const UnitQuaternion b = quat_from_axis_angle(Vec3::UnitX(), kPi / 2);
  // b takes y to z; a leaves z alone
  CHECK(((a * b).rotate(Vec3::UnitY()) - Vec3::UnitZ()).norm() < 1e-15);
  Gen g(13);
  for (int i = 0; i < 100; ++i) {
    const UnitQuaternion p = g.quaternion(), r = g.quaternion();
    const Vec3 v = g.unit_vector();
    CHECK(((p * r).rotate(v) - p.rotate(r.rotate(v))).norm() < 1e-12);
    CHECK(((p * p.inverse()).angle()) < 1e-7);
  }
}

TEST_CASE("exponential and logarithm maps round-trip") {
  Gen g(14);
  for (int i = 0; i < 500; ++i) {
    const Vec3 phi = g.unit_vector() * g.uniform(0.0, kPi - 1e-6);
    CHECK((rotation_vector(quat_from_rotation_vector(phi)) - phi).norm() < 1e-10);
    const UnitQuaternion q = g.quaternion();
    CHECK(quat_gap(quat_from_rotation_vector(rotation_vector(q)), q) < 1e-12);
  }
  CHECK(rotation_vector(UnitQuaternion()).norm() == 0.0);
  const Vec3 tiny(1e-14, -2e-14, 3e-14);
  CHECK((rotation_vector(quat_from_rotation_vector(tiny)) - tiny).norm() < 1e-26);
}

TEST_CASE("rotation distance and angle") {
  const UnitQuaternion a = quat_from_axis_angle(Vec3::UnitY(), 0.25);
  CHECK(std::abs(rotation_distance(UnitQuaternion(), a) - 0.25) < 1e-15);
  const UnitQuaternion flipped(-a.w(), -a.x(), -a.y(), -a.z());
  CHECK(rotation_distance(a, flipped) < 1e-7);
  CHECK(std::abs(quat_from_axis_angle(Vec3::UnitX(), 3.0).angle() - 3.0) < 1e-14);
}

TEST_CASE("canonical sign") {
  const UnitQuaternion q(-0.5, 0.5, -0.5, 0.5);
  const auto c = q.canonical();
  CHECK(c.w() > 0);
  CHECK(quat_gap(q, c) < 1e-16);
  const UnitQuaternion half(0, -1, 0, 0);
  CHECK(half.canonical().x() == 1.0);
  const UnitQuaternion half_y(0, 0, -1, 0);
  CHECK(half_y.canonical().y() == 1.0);
}

TEST_CASE("swing-twist examples") {
  const SwingTwist id = swing_twist_decompose(UnitQuaternion(), Vec3::UnitZ());
  CHECK(id.across == 0.0);
  CHECK(id.about == 0.0);

  const SwingTwist t = swing_twist_decompose(quat_from_axis_angle(Vec3::UnitZ(), deg_to_rad(10)), Vec3::UnitZ());
  CHECK(std::abs(t.across) < 1e-15);
  CHECK(std::abs(t.about - deg_to_rad(10)) < 1e-15);

  const SwingTwist neg = swing_twist_decompose(quat_from_axis_angle(Vec3::UnitZ(), -0.3), Vec3::UnitZ());
  CHECK(std::abs(neg.about + 0.3) < 1e-15);

  const SwingTwist s = swing_twist_decompose(quat_from_axis_angle(Vec3::UnitX(), 0.01), Vec3::UnitZ());
  CHECK(std::abs(s.across - 0.01) < 1e-15);
  CHECK(std::abs(s.about) < 1e-15);

  CHECK_THROWS_ERRC(swing_twist_decompose(quat_from_axis_angle(Vec3::UnitX(), kPi), Vec3::UnitZ()),
                    Errc::degenerate);
}

TEST_CASE("swing-twist reconstructs random rotations") {
  Gen g(15);
  for (int i = 0; i < 1000; ++i) {
    const UnitQuaternion q = g.quaternion();
    const Vec3 axis = i % 2 ? Vec3::UnitZ() : g.unit_vector();
    const auto [swing, twist] = swing_twist_factors(q, axis);
    CHECK(quat_gap(swing * twist, q) < 1e-10);
    // twist is about the axis, swing moves the axis without spinning about it
    CHECK(twist.vec().cross(axis).norm() < 1e-10);
    CHECK(std::abs(swing.vec().dot(axis)) < 1e-10);

    const SwingTwist st = swing_twist_decompose(q, axis);
    CHECK(std::abs(st.across - angular_separation(q.rotate(axis), axis)) < 1e-10);
    CHECK(st.about > -kPi);
    CHECK(st.about <= kPi);
  }
}

TEST_CASE("sky coordinates") {
  CHECK((skycoord_to_unit({0, 0}) - Vec3::UnitX()).norm() < 1e-16);
  CHECK((skycoord_to_unit({90, 0}) - Vec3::UnitY()).norm() < 1e-16);
  CHECK((skycoord_to_unit({0, 90}) - Vec3::UnitZ()).norm() < 1e-16);
  CHECK_THROWS_ERRC(skycoord_to_unit({0, 90.5}), Errc::invalid_argument);
  CHECK(unit_to_skycoord(Vec3::UnitZ()).ra_deg == 0.0);
  CHECK(unit_to_skycoord(-Vec3::UnitZ()).dec_deg == -90.0);

  Gen g(16);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const SkyCoord c{g.uniform(0.0, 360.0), g.uniform(-89.999, 89.999)};
    const SkyCoord back = unit_to_skycoord(skycoord_to_unit(c));
    CHECK(back.ra_deg >= 0.0);
    CHECK(back.ra_deg < 360.0);
    const double dra = std::remainder(back.ra_deg - c.ra_deg, 360.0) * std::cos(deg_to_rad(c.dec_deg));
    worst = std::max({worst, std::abs(dra) * 3600.0, std::abs(back.dec_deg - c.dec_deg) * 3600.0});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("angular separation") {
  CHECK(angular_separation(Vec3::UnitX(), Vec3::UnitX()) == 0.0);
  CHECK(std::abs(angular_separation(Vec3::UnitX(), Vec3::UnitY()) - kPi / 2) < 1e-16);
  Gen g(17);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = g.unit_vector();
    const Vec3 b = testing::offset_direction(a, g.unit_vector(), arcsec_to_rad(2.52));
    CHECK(std::abs(rad_to_arcsec(angular_separation(a, b)) / 2.52 - 1.0) < 1e-6);
  }
}

TEST_CASE("skew matrix is the cross product") {
  Gen g(18);
  const Vec3 a = g.unit_vector(), b = g.unit_vector();
  CHECK((skew(a) * b - a.cross(b)).norm() < 1e-16);
}

TEST_CASE("pointing attitude") {
  Gen g(19);
  for (int i = 0; i < 200; ++i) {
    const SkyCoord c{g.uniform(0, 360), g.uniform(-85, 85)};
    const double roll = g.uniform(-kPi, kPi);
    const UnitQuaternion q = attitude_from_pointing(c, roll);
    CHECK(angular_separation(q.rotate(Vec3::UnitZ()), skycoord_to_unit(c)) < 1e-12);
    if (roll == 0.0) continue;
    const UnitQuaternion q0 = attitude_from_pointing(c, 0.0);
    const SwingTwist st = swing_twist_decompose(q0.inverse() * q, Vec3::UnitZ());
    CHECK(std::abs(std::remainder(st.about - roll, 2 * kPi)) < 1e-12);
  }
  // roll 0: image +y points to celestial north, +x east
  const UnitQuaternion q = attitude_from_pointing({30, 10}, 0.0);
  const SkyCoord up = unit_to_skycoord(testing::offset_direction(q.rotate(Vec3::UnitZ()), q.rotate(Vec3::UnitY()), 1e-4));
  CHECK(up.dec_deg > 10.0);
  const SkyCoord right = unit_to_skycoord(testing::offset_direction(q.rotate(Vec3::UnitZ()), q.rotate(Vec3::UnitX()), 1e-4));
  CHECK(right.ra_deg > 30.0);
}
