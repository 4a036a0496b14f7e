#include "evstar/geometry.hpp"

#include "evstar/error.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace evstar {

namespace {

// Shepperd's method; input must be a proper rotation matrix.
UnitQuaternion quat_from_matrix(const Mat3& m) {
  const double tr = m.trace();
  if (tr > 0.0) {
    const double s = 2.0 * std::sqrt(1.0 + tr);
    return {0.25 * s, (m(2, 1) - m(1, 2)) / s, (m(0, 2) - m(2, 0)) / s, (m(1, 0) - m(0, 1)) / s};
  }
  if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2));
    return {(m(2, 1) - m(1, 2)) / s, 0.25 * s, (m(0, 1) + m(1, 0)) / s, (m(0, 2) + m(2, 0)) / s};
  }
  if (m(1, 1) > m(2, 2)) {
    const double s = 2.0 * std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2));
    return {(m(0, 2) - m(2, 0)) / s, (m(0, 1) + m(1, 0)) / s, 0.25 * s, (m(1, 2) + m(2, 1)) / s};
  }
  const double s = 2.0 * std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1));
  return {(m(1, 0) - m(0, 1)) / s, (m(0, 2) + m(2, 0)) / s, (m(1, 2) + m(2, 1)) / s, 0.25 * s};
}

}  // namespace

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 1e-300) || !std::isfinite(n)) {
    throw Error(Errc::invalid_argument, "quaternion has zero or non-finite norm");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

UnitQuaternion UnitQuaternion::inverse() const {
  UnitQuaternion q;
  q.w_ = w_;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& r) const {
  return {w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
          w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
          w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
          w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_};
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  // v' = v + 2 w (u x v) + 2 u x (u x v)
  const Vec3 u(x_, y_, z_);
  const Vec3 t = 2.0 * u.cross(v);
  return v + w_ * t + u.cross(t);
}

Mat3 UnitQuaternion::matrix() const {
  const double ww = w_ * w_, xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  Mat3 m;
  m << ww + xx - yy - zz, 2 * (xy - wz), 2 * (xz + wy),
       2 * (xy + wz), ww - xx + yy - zz, 2 * (yz - wx),
       2 * (xz - wy), 2 * (yz + wx), ww - xx - yy + zz;
  return m;
}

double UnitQuaternion::angle() const {
  return 2.0 * std::atan2(vec().norm(), std::abs(w_));
}

UnitQuaternion UnitQuaternion::canonical() const {
  bool flip = w_ < 0.0;
  if (w_ == 0.0) {
    for (double c : {x_, y_, z_}) {
      if (c != 0.0) {
        flip = c < 0.0;
        break;
      }
    }
  }
  if (!flip) return *this;
  UnitQuaternion q;
  q.w_ = -w_;
  q.x_ = -x_;
  q.y_ = -y_;
  q.z_ = -z_;
  return q;
}

UnitQuaternion quat_from_axis_angle(const Vec3& axis, double angle) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw Error(Errc::invalid_argument, "rotation axis is not unit length");
  }
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), axis.x() * s, axis.y() * s, axis.z() * s};
}

UnitQuaternion quat_from_rotation_vector(const Vec3& phi) {
  const double theta = phi.norm();
  const double h = 0.5 * theta;
  // sin(h)/theta with a series fallback near zero
  const double k = theta > 1e-8 ? std::sin(h) / theta : 0.5 - theta * theta / 48.0;
  return {std::cos(h), phi.x() * k, phi.y() * k, phi.z() * k};
}

Vec3 rotation_vector(const UnitQuaternion& q) {
  const UnitQuaternion c = q.w() < 0.0 ? UnitQuaternion(-q.w(), -q.x(), -q.y(), -q.z()) : q;
  const Vec3 u = c.vec();
  const double s = u.norm();
  if (s < 1e-12) return 2.0 * u / c.w();
  const double theta = 2.0 * std::atan2(s, c.w());
  return u * (theta / s);
}

double rotation_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return (a.inverse() * b).angle();
}

std::pair<UnitQuaternion, UnitQuaternion> swing_twist_factors(const UnitQuaternion& q,
                                                              const Vec3& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-9) {
    throw Error(Errc::invalid_argument, "swing-twist axis is not unit length");
  }
  const double proj = q.vec().dot(axis);
  const double n = std::hypot(q.w(), proj);
  if (n < 1e-12) {
    throw Error(Errc::degenerate, "twist undefined for a half-turn perpendicular to the axis");
  }
  const UnitQuaternion twist(q.w(), proj * axis.x(), proj * axis.y(), proj * axis.z());
  const UnitQuaternion swing = q * twist.inverse();
  return {swing, twist};
}

SwingTwist swing_twist_decompose(const UnitQuaternion& q, const Vec3& axis) {
  const auto [swing, twist] = swing_twist_factors(q, axis);
  double about = 2.0 * std::atan2(twist.vec().dot(axis), twist.w());
  if (about > kPi) about -= 2.0 * kPi;
  if (about <= -kPi) about += 2.0 * kPi;
  return {swing.angle(), about};
}

Vec3 skycoord_to_unit(const SkyCoord& c) {
  if (!(std::abs(c.dec_deg) <= 90.0)) {
    throw Error(Errc::invalid_argument, "declination outside [-90, 90]");
  }
  const double ra = deg_to_rad(c.ra_deg);
  const double dec = deg_to_rad(c.dec_deg);
  return {std::cos(dec) * std::cos(ra), std::cos(dec) * std::sin(ra), std::sin(dec)};
}

SkyCoord unit_to_skycoord(const Vec3& v) {
  const double rho = std::hypot(v.x(), v.y());
  double ra = rho == 0.0 ? 0.0 : rad_to_deg(std::atan2(v.y(), v.x()));
  if (ra < 0.0) ra += 360.0;
  if (ra >= 360.0) ra -= 360.0;
  return {ra, rad_to_deg(std::atan2(v.z(), rho))};
}

double angular_separation(const Vec3& a, const Vec3& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

UnitQuaternion attitude_from_pointing(const SkyCoord& boresight, double roll_rad) {
  const Vec3 b = skycoord_to_unit(boresight);
  const double ra = deg_to_rad(boresight.ra_deg);
  const Vec3 east(-std::sin(ra), std::cos(ra), 0.0);
  const Vec3 north = b.cross(east);
  Mat3 m;
  m.col(0) = east;
  m.col(1) = north;
  m.col(2) = b;
  return quat_from_matrix(m) * quat_from_axis_angle(Vec3::UnitZ(), roll_rad);
}

}  // namespace evstar
