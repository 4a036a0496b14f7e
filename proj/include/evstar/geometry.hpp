#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <numbers>

namespace evstar {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kArcsecPerRad = 180.0 * 3600.0 / kPi;
inline constexpr double kRadPerArcsec = 1.0 / kArcsecPerRad;
inline constexpr double kRadPerDeg = kPi / 180.0;

inline constexpr double arcsec_to_rad(double as) { return as * kRadPerArcsec; }
inline constexpr double rad_to_arcsec(double rad) { return rad * kArcsecPerRad; }
inline constexpr double deg_to_rad(double deg) { return deg * kRadPerDeg; }
inline constexpr double rad_to_deg(double rad) { return rad / kRadPerDeg; }

/// Hamilton unit quaternion (w, x, y, z).
///
/// Attitudes throughout the library are passive "frame F in ICRF" rotations:
/// the quaternion of frame F maps F-coordinates into ICRF coordinates, so
/// `v_icrf = q.rotate(v_f)`. Composition `a * b` applies `b` first.
/// Every constructor and product renormalizes; q and -q are the same
/// rotation and are only canonicalized when serialized.
class UnitQuaternion {
public:
  UnitQuaternion() = default;  // identity

  /// Normalizes its input; throws Errc::invalid_argument on a (near) zero norm.
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {}; }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }
  Vec3 vec() const { return {x_, y_, z_}; }

  UnitQuaternion inverse() const;
  UnitQuaternion operator*(const UnitQuaternion& rhs) const;

  Vec3 rotate(const Vec3& v) const;
  Mat3 matrix() const;

  /// Rotation angle in [0, pi].
  double angle() const;

  /// Sign-canonical copy: w >= 0, ties broken by the first nonzero of x, y, z >= 0.
  UnitQuaternion canonical() const;

  std::array<double, 4> wxyz() const { return {w_, x_, y_, z_}; }

private:
  double w_ = 1.0, x_ = 0.0, y_ = 0.0, z_ = 0.0;
};

/// Throws Errc::invalid_argument unless |axis| = 1 within 1e-9.
UnitQuaternion quat_from_axis_angle(const Vec3& axis, double angle);

/// Exponential map: rotation about phi/|phi| by |phi| radians.
UnitQuaternion quat_from_rotation_vector(const Vec3& phi);

/// Logarithm map, inverse of quat_from_rotation_vector; |result| <= pi.
Vec3 rotation_vector(const UnitQuaternion& q);

inline Vec3 rotate_vector(const UnitQuaternion& q, const Vec3& v) { return q.rotate(v); }

/// Rotation angle between two attitudes.
double rotation_distance(const UnitQuaternion& a, const UnitQuaternion& b);

struct SwingTwist {
  double across = 0.0;  // swing angle, [0, pi]
  double about = 0.0;   // signed twist angle, (-pi, pi]
};

/// Factors q = swing * twist with twist about `axis`. The sign of `about`
/// follows the right-hand rule around `axis`. Throws Errc::degenerate when q
/// is within 1e-12 of a half-turn perpendicular to the axis.
SwingTwist swing_twist_decompose(const UnitQuaternion& q, const Vec3& axis);

/// The two factors themselves; swing * twist == q.
std::pair<UnitQuaternion, UnitQuaternion> swing_twist_factors(const UnitQuaternion& q,
                                                              const Vec3& axis);

struct SkyCoord {
  double ra_deg = 0.0;   // [0, 360)
  double dec_deg = 0.0;  // [-90, 90]
};

/// (0,0) -> +x, RA toward +y, Dec toward +z. Throws when |dec| > 90.
Vec3 skycoord_to_unit(const SkyCoord& c);
/// Exact poles return ra = 0.
SkyCoord unit_to_skycoord(const Vec3& v);

/// atan2(|a x b|, a . b), stable at tiny separations.
double angular_separation(const Vec3& a, const Vec3& b);

Mat3 skew(const Vec3& v);

/// Camera attitude looking at (ra, dec) with the given roll. Roll 0 puts image
/// +y toward celestial north; roll rotates the image frame about the boresight.
UnitQuaternion attitude_from_pointing(const SkyCoord& boresight, double roll_rad);

}  // namespace evstar
