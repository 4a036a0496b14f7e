#pragma once

#include "evstar/attitude.hpp"
#include "evstar/camera.hpp"
#include "evstar/catalog.hpp"
#include "evstar/earth.hpp"
#include "evstar/timesync.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace evstar {

struct Event {
  std::int64_t t_us = 0;  // device clock
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t polarity = 1;  // +1 / -1

  bool operator==(const Event&) const = default;
};

struct SimConfig {
  double contrast_threshold = 0.3;  // log-intensity step per event
  double psf_sigma = 0.8;           // px
  double refractory_us = 100.0;
  double noise_rate = 0.001;        // events / pixel / s
  double mag_zero_flux = 3.0e5;     // total flux of a magnitude-0 star
  double background = 1.0;          // flux per pixel
  std::uint64_t seed = 1;
  double drift_dec_rate = 0.0;      // arcsec / hour, mount declination drift
  double tick_us = 1000.0;          // internal simulation tick
  double clock_skew_ppm = 0.0;      // device clock runs (1 + skew) fast
  std::int64_t device_t0_us = 0;    // device timestamp at the start time
  double truth_rate_hz = 20.0;

  void validate() const;
};

using Trajectory = std::function<UnitQuaternion(const UtcInstant&)>;

/// Camera rigidly attached to the ground: C(t) = E(t) * D(t) * (E(t0)^-1 * C(t0)),
/// where E is the Earth attitude and D an optional slow rotation about the
/// mount's declination axis (positive rate raises the boresight declination).
class StaticSiteTrajectory {
public:
  StaticSiteTrajectory(const UnitQuaternion& cam0, const UtcInstant& t0,
                       std::shared_ptr<const EopTable> earth, double drift_dec_rate_arcsec_per_hour = 0.0);

  UnitQuaternion operator()(const UtcInstant& t) const;

  /// Camera frame in ITRF.
  const UnitQuaternion& mount() const { return mount_; }

private:
  UnitQuaternion cam0_;
  UtcInstant t0_;
  std::shared_ptr<const EopTable> earth_;
  UnitQuaternion mount_;
  Vec3 dec_axis_itrf_;
  double drift_rate_rad_per_s_ = 0.0;
};

/// Throws Errc::out_of_range when t0 is outside the EOP span.
StaticSiteTrajectory static_site_trajectory(const UnitQuaternion& cam0, const UtcInstant& t0,
                                            const EopTable& earth,
                                            double drift_dec_rate_arcsec_per_hour = 0.0);

/// Image-plane speed p = f * tan(s) / x, with s the angle swept in one second.
double image_plane_speed(double focal_length_m, double deg_per_s, double pixel_pitch_m);
/// Inverse: f = p * x / tan(s). Throws Errc::invalid_argument for s = 0.
double focal_length_for_speed(double px_per_s, double deg_per_s, double pixel_pitch_m);

struct SimOutput {
  std::vector<Event> events;
  std::vector<PpsAnchor> pps;
  std::vector<AttitudeEstimate> truth;
  bool fov_always_empty = false;  // no star ever rendered; events are noise only
};

/// Renders the star field through `traj` on a fixed tick and emits events
/// where per-pixel log intensity crosses the contrast threshold. PPS anchors
/// fall on whole UTC seconds in [t0, t0 + duration]; truth is sampled at
/// truth_rate_hz from t0. Deterministic for a given config and seed.
SimOutput generate_events(const Trajectory& traj, const Catalog& cat, const CameraModel& cam,
                          const SimConfig& cfg, const UtcInstant& t0, double duration_s);

/// `t_us,x,y,p`
void write_events_csv(const std::vector<Event>& events, std::ostream& out);
std::vector<Event> read_events_csv(const std::filesystem::path& path);
std::vector<Event> read_events_csv(std::istream& in, const std::string& source);

}  // namespace evstar
