#include "evstar/tracker.hpp"

#include "evstar/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace evstar {

void TrackerConfig::validate() const {
  if (!(gate_radius > 0.0) || !(process_noise_attitude > 0.0) || !(process_noise_rate > 0.0) ||
      !(measurement_noise > 0.0) || !(output_rate > 0.0) || min_batch < 1 ||
      !(prior_attitude_sigma > 0.0) || !(prior_rate_sigma > 0.0) || !(fov_refresh_s > 0.0)) {
    throw Error(Errc::invalid_argument, "tracker parameters must be positive");
  }
  if (output_rate > 1000.0) throw Error(Errc::invalid_argument, "output_rate must be <= 1000 Hz");
}

namespace {

void refresh_tracks(EkfState& s, const Catalog& cat, const CameraModel& cam, const TrackerConfig& cfg) {
  std::vector<StarTrack> next;
  for (const StarInView& v : stars_near_fov(cat, s.q, cam, cfg.gate_radius)) {
    StarTrack t;
    t.star_id = v.star.id;
    t.dir = v.star.dir;
    t.mag = v.star.mag;
    const auto old = std::find_if(s.track_table.begin(), s.track_table.end(),
                                  [&](const StarTrack& o) { return o.star_id == t.star_id; });
    if (old != s.track_table.end()) t = *old;
    next.push_back(t);
  }
  s.track_table = std::move(next);
  s.last_refresh_us = s.t_us;
}

void keep_psd(EkfState& s) {
  s.P = 0.5 * (s.P + s.P.transpose());
  Eigen::SelfAdjointEigenSolver<Mat6> eig(s.P);
  Vec6 vals = eig.eigenvalues();
  s.diag.min_eigenvalue = std::min(s.diag.min_eigenvalue, vals.minCoeff());
  if (Eigen::LLT<Mat6>(s.P).info() == Eigen::Success && vals.minCoeff() > 0.0) return;
  vals = vals.cwiseMax(1e-24);
  s.P = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();
  ++s.diag.psd_repairs;
}

}  // namespace

EkfState ekf_init(const Catalog& cat, const CameraModel& cam, const UnitQuaternion& q0,
                  const TrackerConfig& cfg, double t0_us) {
  cfg.validate();
  EkfState s;
  s.q = q0;
  s.t_us = t0_us;
  const double pa = cfg.prior_attitude_sigma * cfg.prior_attitude_sigma;
  const double pw = cfg.prior_rate_sigma * cfg.prior_rate_sigma;
  s.P.diagonal() << pa, pa, pa, pw, pw, pw;
  if (stars_in_fov(cat, q0, cam).empty()) {
    throw Error(Errc::lost_in_space, "no catalog stars in the initial field of view");
  }
  refresh_tracks(s, cat, cam, cfg);
  return s;
}

void ekf_predict_in_place(EkfState& s, double t_us, const TrackerConfig& cfg) {
  const double dt = (t_us - s.t_us) * 1e-6;
  if (dt < 0.0) throw Error(Errc::ordering, "cannot predict backwards in time");
  if (dt == 0.0) return;
  const Vec3 phi = s.w * dt;
  s.q = s.q * quat_from_rotation_vector(phi);

  Mat6 F = Mat6::Identity();
  F.topLeftCorner<3, 3>() = quat_from_rotation_vector(-phi).matrix();
  F.topRightCorner<3, 3>() = Mat3::Identity() * dt;

  const double qa = cfg.process_noise_attitude;
  const double qr = cfg.process_noise_rate;
  Mat6 Q = Mat6::Zero();
  Q.topLeftCorner<3, 3>().diagonal().setConstant(qa * dt + qr * dt * dt * dt / 3.0);
  Q.topRightCorner<3, 3>().diagonal().setConstant(qr * dt * dt / 2.0);
  Q.bottomLeftCorner<3, 3>().diagonal().setConstant(qr * dt * dt / 2.0);
  Q.bottomRightCorner<3, 3>().diagonal().setConstant(qr * dt);

  s.P = F * s.P * F.transpose() + Q;
  s.t_us = t_us;
}

EkfState ekf_predict(const EkfState& s, double t_us, const TrackerConfig& cfg) {
  EkfState out = s;
  ekf_predict_in_place(out, t_us, cfg);
  return out;
}

Eigen::Vector2d ekf_update(EkfState& s, const Vec3& star_dir, const PixelPos& centroid,
                           double t_mean_us, const CameraModel& cam, const TrackerConfig& cfg) {
  const double tau = (s.t_us - t_mean_us) * 1e-6;  // how long ago the centroid was observed
  const UnitQuaternion q_obs = s.q * quat_from_rotation_vector(-s.w * tau);
  const Vec3 b = q_obs.inverse().rotate(star_dir);
  const auto pred = project_body(cam, b);
  if (!pred) return Eigen::Vector2d::Zero();

  const double f = cam.focal_px();
  Eigen::Matrix<double, 2, 3> J;
  J << f / b.z(), 0.0, -f * b.x() / (b.z() * b.z()),
       0.0, f / b.z(), -f * b.y() / (b.z() * b.z());
  const Eigen::Matrix<double, 2, 3> Ht = J * skew(b);
  Eigen::Matrix<double, 2, 6> H;
  H.leftCols<3>() = Ht;
  H.rightCols<3>() = -tau * Ht;

  const Eigen::Vector2d innovation(centroid.u - pred->u, centroid.v - pred->v);
  const Eigen::Matrix2d R = Eigen::Matrix2d::Identity() * cfg.measurement_noise;
  const Eigen::Matrix2d S = H * s.P * H.transpose() + R;
  const Eigen::Matrix<double, 6, 2> K = s.P * H.transpose() * S.inverse();
  const Vec6 dx = K * innovation;

  s.q = s.q * quat_from_rotation_vector(dx.head<3>());
  s.w += dx.tail<3>();
  const Mat6 IKH = Mat6::Identity() - K * H;
  s.P = IKH * s.P * IKH.transpose() + K * R * K.transpose();
  keep_psd(s);
  ++s.diag.updates;
  return innovation;
}

void ekf_process_event_in_place(EkfState& s, const Event& e, const CameraModel& cam,
                                const Catalog& cat, const TrackerConfig& cfg) {
  const auto t = static_cast<double>(e.t_us);
  if (t < s.t_us) {
    throw Error(Errc::ordering, fmt::format("event at {} us precedes filter time {:.0f} us", e.t_us, s.t_us));
  }
  ekf_predict_in_place(s, t, cfg);
  ++s.diag.events;
  if ((s.t_us - s.last_refresh_us) * 1e-6 >= cfg.fov_refresh_s) refresh_tracks(s, cat, cam, cfg);
  if (e.polarity <= 0) return;

  const UnitQuaternion to_body = s.q.inverse();
  const double gate2 = cfg.gate_radius * cfg.gate_radius;
  StarTrack* best = nullptr;
  double best_d2 = gate2;
  for (StarTrack& tr : s.track_table) {  // brightest first, strict < keeps it on ties
    const auto p = project_body(cam, to_body.rotate(tr.dir));
    if (!p) continue;
    const double du = p->u - e.x;
    const double dv = p->v - e.y;
    const double d2 = du * du + dv * dv;
    if (d2 < best_d2 || (best == nullptr && d2 <= gate2)) {
      best = &tr;
      best_d2 = d2;
    }
  }
  if (best == nullptr) return;
  ++s.diag.associated;
  best->sum_u += e.x;
  best->sum_v += e.y;
  best->sum_t_us += t;
  best->last_event_us = t;
  if (++best->count < cfg.min_batch) return;

  const double n = best->count;
  const PixelPos centroid{best->sum_u / n, best->sum_v / n};
  const double t_mean = best->sum_t_us / n;
  const Vec3 dir = best->dir;
  best->sum_u = best->sum_v = best->sum_t_us = 0.0;
  best->count = 0;
  ekf_update(s, dir, centroid, t_mean, cam, cfg);
}

EkfState ekf_process_event(const EkfState& s, const Event& e, const CameraModel& cam,
                           const Catalog& cat, const TrackerConfig& cfg) {
  EkfState out = s;
  ekf_process_event_in_place(out, e, cam, cat, cfg);
  return out;
}

TrackResult track_stream_detailed(const std::vector<Event>& events, const std::vector<PpsAnchor>& pps,
                                  const Catalog& cat, const CameraModel& cam,
                                  const TrackerConfig& cfg, const UnitQuaternion& q0) {
  cfg.validate();
  const TimeMap map = build_time_map(pps);
  const auto start_us = static_cast<double>(map.anchors().front().t_event_us);
  double end_us = static_cast<double>(map.anchors().back().t_event_us);
  if (!events.empty()) end_us = std::max(end_us, static_cast<double>(events.back().t_us));

  TrackResult result;
  EkfState s = ekf_init(cat, cam, q0, cfg, start_us);
  const double period_us = 1e6 / cfg.output_rate;
  std::int64_t k = 0;
  double next_tick = start_us;

  auto emit = [&]() {
    ekf_predict_in_place(s, next_tick, cfg);
    AttitudeEstimate est;
    est.t = map.to_utc(next_tick);
    est.q = s.q;
    est.source = EstimateSource::ekf;
    est.cov = s.P.topLeftCorner<3, 3>();
    result.estimates.push_back(est);
    ++k;
    next_tick = start_us + static_cast<double>(k) * period_us;
  };

  for (const Event& e : events) {
    const auto t = static_cast<double>(e.t_us);
    if (t < start_us) {
      ++result.skipped_events;
      continue;
    }
    while (next_tick <= t) emit();
    ekf_process_event_in_place(s, e, cam, cat, cfg);
  }
  while (next_tick <= end_us) emit();
  result.diag = s.diag;
  return result;
}

std::vector<AttitudeEstimate> track_stream(const std::vector<Event>& events,
                                           const std::vector<PpsAnchor>& pps, const Catalog& cat,
                                           const CameraModel& cam, const TrackerConfig& cfg,
                                           const UnitQuaternion& q0) {
  return track_stream_detailed(events, pps, cat, cam, cfg, q0).estimates;
}

}  // namespace evstar
