#pragma once

#include "evstar/attitude.hpp"
#include "evstar/camera.hpp"
#include "evstar/catalog.hpp"
#include "evstar/simulator.hpp"
#include "evstar/timesync.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <vector>

namespace evstar {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

struct TrackerConfig {
  double gate_radius = 10.0;                 // px
  double process_noise_attitude = 1e-14;     // rad^2 / s
  double process_noise_rate = 1e-18;         // rad^2 / s^3
  double measurement_noise = 0.25;           // px^2, per centroid coordinate
  double output_rate = 20.0;                 // Hz
  int min_batch = 8;                         // positive events per centroid update
  double prior_attitude_sigma = 1.5e-4;      // rad (~31 arcsec)
  double prior_rate_sigma = 1.5e-4;          // rad / s
  double fov_refresh_s = 0.25;               // track table refresh period

  void validate() const;
};

/// Per-star association state: positive events gathered since the last update.
struct StarTrack {
  std::int64_t star_id = 0;
  Vec3 dir = Vec3::UnitX();
  double mag = 0.0;
  double sum_u = 0.0;
  double sum_v = 0.0;
  double sum_t_us = 0.0;
  int count = 0;
  double last_event_us = -std::numeric_limits<double>::infinity();
};

struct EkfDiagnostics {
  std::size_t events = 0;
  std::size_t associated = 0;
  std::size_t updates = 0;
  std::size_t psd_repairs = 0;
  // smallest covariance eigenvalue seen after an update, before any flooring
  double min_eigenvalue = std::numeric_limits<double>::infinity();
};

/// Error-state EKF: nominal attitude q (camera in ICRF) and body rate w, with
/// a 6x6 covariance over (attitude error, rate error). Attitude errors are
/// right-multiplied body-frame rotation vectors: q_true = q * exp(dtheta).
struct EkfState {
  UnitQuaternion q;
  Vec3 w = Vec3::Zero();
  Mat6 P = Mat6::Zero();
  double t_us = 0.0;
  std::vector<StarTrack> track_table;  // brightest first
  double last_refresh_us = 0.0;
  EkfDiagnostics diag;
};

/// Throws Errc::lost_in_space if no catalog star projects into the initial view.
EkfState ekf_init(const Catalog& cat, const CameraModel& cam, const UnitQuaternion& q0,
                  const TrackerConfig& cfg, double t0_us);

void ekf_predict_in_place(EkfState& s, double t_us, const TrackerConfig& cfg);
EkfState ekf_predict(const EkfState& s, double t_us, const TrackerConfig& cfg);

/// One centroid measurement of the star along `star_dir`, observed at
/// `centroid` as the mean of events whose mean time is `t_mean_us`.
/// Returns the innovation (observed minus predicted), px.
Eigen::Vector2d ekf_update(EkfState& s, const Vec3& star_dir, const PixelPos& centroid,
                           double t_mean_us, const CameraModel& cam, const TrackerConfig& cfg);

/// Predicts to the event time, associates positive events with the nearest
/// tracked star inside the gate (ties go to the brighter star) and runs a
/// measurement update whenever a star has gathered min_batch events.
/// Throws Errc::ordering for an event older than the state.
void ekf_process_event_in_place(EkfState& s, const Event& e, const CameraModel& cam,
                                const Catalog& cat, const TrackerConfig& cfg);
EkfState ekf_process_event(const EkfState& s, const Event& e, const CameraModel& cam,
                           const Catalog& cat, const TrackerConfig& cfg);

struct TrackResult {
  std::vector<AttitudeEstimate> estimates;
  EkfDiagnostics diag;
  std::size_t skipped_events = 0;  // before the first PPS anchor
};

/// Runs the filter over a sorted stream from the first PPS anchor and emits an
/// estimate every 1/output_rate device seconds, stamped through the PPS map.
TrackResult track_stream_detailed(const std::vector<Event>& events, const std::vector<PpsAnchor>& pps,
                                  const Catalog& cat, const CameraModel& cam,
                                  const TrackerConfig& cfg, const UnitQuaternion& q0);

std::vector<AttitudeEstimate> track_stream(const std::vector<Event>& events,
                                           const std::vector<PpsAnchor>& pps, const Catalog& cat,
                                           const CameraModel& cam, const TrackerConfig& cfg,
                                           const UnitQuaternion& q0);

}  // namespace evstar
