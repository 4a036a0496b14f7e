#pragma once

#include "evstar/geometry.hpp"

#include <optional>

namespace evstar {

struct PixelPos {
  double u = 0.0;
  double v = 0.0;
};

/// Pinhole camera. Pixel (i, j) has its center at (u, v) = (i, j); the camera
/// frame has +z along the boresight, +x along increasing u and +y along
/// increasing v.
struct CameraModel {
  double focal_length = 0.4;     // m
  double pixel_pitch = 4.86e-6;  // m
  int width = 1280;
  int height = 720;
  double cx = 639.5;
  double cy = 359.5;

  /// Centered principal point; throws Errc::invalid_argument on bad parameters.
  static CameraModel make(double focal_length, double pixel_pitch, int width, int height);
  void validate() const;

  double focal_px() const { return focal_length / pixel_pitch; }
  double pixel_scale_arcsec() const;
  double fov_x_deg() const;
  double fov_y_deg() const;
  /// Half-angle of the cone that contains the whole sensor.
  double half_diagonal_rad() const;

  bool contains(const PixelPos& p) const {
    return p.u >= 0.0 && p.u < width && p.v >= 0.0 && p.v < height;
  }
};

/// Gnomonic projection of an ICRF direction; nullopt when behind the camera.
std::optional<PixelPos> project_star(const CameraModel& cam, const UnitQuaternion& attitude,
                                     const Vec3& dir);
/// Same, for a direction already expressed in the camera frame.
std::optional<PixelPos> project_body(const CameraModel& cam, const Vec3& body_dir);

/// Unit camera-frame direction through a pixel position.
Vec3 unproject(const CameraModel& cam, const PixelPos& p);

}  // namespace evstar
