#include "evstar/camera.hpp"

#include "evstar/error.hpp"

#include <cmath>

namespace evstar {

CameraModel CameraModel::make(double focal_length, double pixel_pitch, int width, int height) {
  CameraModel cam;
  cam.focal_length = focal_length;
  cam.pixel_pitch = pixel_pitch;
  cam.width = width;
  cam.height = height;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  cam.validate();
  return cam;
}

void CameraModel::validate() const {
  if (!(focal_length > 0.0) || !(pixel_pitch > 0.0) || width <= 0 || height <= 0) {
    throw Error(Errc::invalid_argument,
                "camera needs positive focal length, pixel pitch and resolution");
  }
}

double CameraModel::pixel_scale_arcsec() const {
  return rad_to_arcsec(std::atan(pixel_pitch / focal_length));
}

double CameraModel::fov_x_deg() const {
  return rad_to_deg(2.0 * std::atan(0.5 * width * pixel_pitch / focal_length));
}

double CameraModel::fov_y_deg() const {
  return rad_to_deg(2.0 * std::atan(0.5 * height * pixel_pitch / focal_length));
}

double CameraModel::half_diagonal_rad() const {
  const double du = std::max(cx + 0.5, width - 0.5 - cx);
  const double dv = std::max(cy + 0.5, height - 0.5 - cy);
  return std::atan(std::hypot(du, dv) / focal_px());
}

std::optional<PixelPos> project_body(const CameraModel& cam, const Vec3& b) {
  if (!(b.z() > 0.0)) return std::nullopt;
  const double k = cam.focal_px() / b.z();
  return PixelPos{cam.cx + k * b.x(), cam.cy + k * b.y()};
}

std::optional<PixelPos> project_star(const CameraModel& cam, const UnitQuaternion& attitude,
                                     const Vec3& dir) {
  return project_body(cam, attitude.inverse().rotate(dir));
}

Vec3 unproject(const CameraModel& cam, const PixelPos& p) {
  const double f = cam.focal_px();
  return Vec3((p.u - cam.cx) / f, (p.v - cam.cy) / f, 1.0).normalized();
}

}  // namespace evstar
