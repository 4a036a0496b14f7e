#include "evstar/simulator.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

namespace evstar {

void SimConfig::validate() const {
  if (!(contrast_threshold > 0.0)) {
    throw Error(Errc::invalid_argument, "contrast_threshold must be positive");
  }
  for (double v : {psf_sigma, refractory_us, noise_rate, mag_zero_flux, background}) {
    if (!(v >= 0.0)) throw Error(Errc::invalid_argument, "simulation parameters must be nonnegative");
  }
  if (!(psf_sigma > 0.0) || !(background > 0.0) || !(tick_us > 0.0) || !(truth_rate_hz > 0.0)) {
    throw Error(Errc::invalid_argument, "psf_sigma, background, tick_us and truth_rate_hz must be positive");
  }
  if (!(std::abs(clock_skew_ppm) < 1e5)) {
    throw Error(Errc::invalid_argument, "clock_skew_ppm out of range");
  }
}

StaticSiteTrajectory::StaticSiteTrajectory(const UnitQuaternion& cam0, const UtcInstant& t0,
                                           std::shared_ptr<const EopTable> earth,
                                           double drift_dec_rate_arcsec_per_hour)
    : cam0_(cam0), t0_(t0), earth_(std::move(earth)) {
  mount_ = earth_attitude(*earth_, t0_).inverse() * cam0_;
  const Vec3 boresight = mount_.rotate(Vec3::UnitZ());
  const Vec3 axis = boresight.cross(Vec3::UnitZ());  // rotating about it raises declination
  dec_axis_itrf_ = axis.norm() > 1e-12 ? axis.normalized() : Vec3::UnitX();
  drift_rate_rad_per_s_ = arcsec_to_rad(drift_dec_rate_arcsec_per_hour) / 3600.0;
}

UnitQuaternion StaticSiteTrajectory::operator()(const UtcInstant& t) const {
  if (t == t0_) return cam0_;
  const UnitQuaternion e = earth_attitude(*earth_, t);
  if (drift_rate_rad_per_s_ == 0.0) return e * mount_;
  const UnitQuaternion drift =
      quat_from_axis_angle(dec_axis_itrf_, drift_rate_rad_per_s_ * (t - t0_));
  return e * drift * mount_;
}

StaticSiteTrajectory static_site_trajectory(const UnitQuaternion& cam0, const UtcInstant& t0,
                                            const EopTable& earth,
                                            double drift_dec_rate_arcsec_per_hour) {
  return StaticSiteTrajectory(cam0, t0, std::make_shared<const EopTable>(earth),
                              drift_dec_rate_arcsec_per_hour);
}

double image_plane_speed(double focal_length_m, double deg_per_s, double pixel_pitch_m) {
  if (!(focal_length_m > 0.0) || !(pixel_pitch_m > 0.0)) {
    throw Error(Errc::invalid_argument, "focal length and pixel pitch must be positive");
  }
  return focal_length_m * std::tan(deg_to_rad(deg_per_s)) / pixel_pitch_m;
}

double focal_length_for_speed(double px_per_s, double deg_per_s, double pixel_pitch_m) {
  if (deg_per_s == 0.0) throw Error(Errc::invalid_argument, "angular rate must be nonzero");
  if (!(px_per_s >= 0.0) || !(deg_per_s > 0.0) || !(pixel_pitch_m > 0.0)) {
    throw Error(Errc::invalid_argument, "speed, rate and pixel pitch must be positive");
  }
  return px_per_s * pixel_pitch_m / std::tan(deg_to_rad(deg_per_s));
}

namespace {

struct RenderStar {
  Vec3 dir;
  double flux = 0.0;
  double radius = 0.0;  // px, PSF truncation
};

class PixelField {
public:
  PixelField(const CameraModel& cam, const SimConfig& cfg)
      : width_(cam.width),
        height_(cam.height),
        cfg_(cfg),
        log_bg_(std::log(cfg.background)),
        flux_(static_cast<std::size_t>(width_) * height_, 0.0),
        stamp_(flux_.size(), -1),
        log_ref_(flux_.size(), log_bg_),
        log_prev_(flux_.size(), log_bg_),
        last_event_us_(flux_.size(), std::numeric_limits<std::int64_t>::min() / 2) {}

  // Adds a pixel-integrated Gaussian of total `flux` centred at (u, v).
  void splat(std::int64_t tick, double u, double v, double flux, double radius) {
    const int i0 = std::max(0, static_cast<int>(std::ceil(u - radius)));
    const int i1 = std::min(width_ - 1, static_cast<int>(std::floor(u + radius)));
    const int j0 = std::max(0, static_cast<int>(std::ceil(v - radius)));
    const int j1 = std::min(height_ - 1, static_cast<int>(std::floor(v + radius)));
    if (i0 > i1 || j0 > j1) return;
    const double k = 1.0 / (std::sqrt(2.0) * cfg_.psf_sigma);
    wx_.resize(static_cast<std::size_t>(i1 - i0 + 1));
    wy_.resize(static_cast<std::size_t>(j1 - j0 + 1));
    double prev = std::erf((i0 - 0.5 - u) * k);
    for (int i = i0; i <= i1; ++i) {
      const double next = std::erf((i + 0.5 - u) * k);
      wx_[static_cast<std::size_t>(i - i0)] = 0.5 * (next - prev);
      prev = next;
    }
    prev = std::erf((j0 - 0.5 - v) * k);
    for (int j = j0; j <= j1; ++j) {
      const double next = std::erf((j + 0.5 - v) * k);
      wy_[static_cast<std::size_t>(j - j0)] = 0.5 * (next - prev) * flux;
      prev = next;
    }
    for (int j = j0; j <= j1; ++j) {
      const double fy = wy_[static_cast<std::size_t>(j - j0)];
      const std::size_t row = static_cast<std::size_t>(j) * static_cast<std::size_t>(width_);
      for (int i = i0; i <= i1; ++i) {
        const std::size_t p = row + static_cast<std::size_t>(i);
        const double add = fy * wx_[static_cast<std::size_t>(i - i0)];
        if (stamp_[p] != tick) {
          stamp_[p] = tick;
          flux_[p] = add;
          touched_.push_back(static_cast<std::uint32_t>(p));
        } else {
          flux_[p] += add;
        }
      }
    }
  }

  // Evaluates every pixel lit now or on the previous tick and appends the
  // threshold crossings in (t_prev, t_now] to `out`.
  void step(std::int64_t tick, double t_prev_s, double tick_s, bool emit,
            const std::function<std::int64_t(double)>& device_us, std::vector<Event>& out) {
    for (std::uint32_t p : prev_touched_) {
      if (stamp_[p] != tick) {
        stamp_[p] = tick;
        flux_[p] = 0.0;
        pending_bg_.push_back(p);
      }
    }
    auto update = [&](std::uint32_t p) {
      const double l_new = flux_[p] > 0.0 ? std::log(cfg_.background + flux_[p]) : log_bg_;
      if (!emit) {
        log_ref_[p] = l_new;
        log_prev_[p] = l_new;
        return;
      }
      const double l_old = log_prev_[p];
      const double c = cfg_.contrast_threshold;
      double& ref = log_ref_[p];
      const auto x = static_cast<std::uint16_t>(p % static_cast<std::uint32_t>(width_));
      const auto y = static_cast<std::uint16_t>(p / static_cast<std::uint32_t>(width_));
      auto fire = [&](double level, std::int8_t pol) {
        double frac = (level - l_old) / (l_new - l_old);
        frac = std::clamp(frac, 0.0, 1.0);
        const std::int64_t t_us = device_us(t_prev_s + frac * tick_s);
        if (static_cast<double>(t_us - last_event_us_[p]) >= cfg_.refractory_us) {
          out.push_back({t_us, x, y, pol});
          last_event_us_[p] = t_us;
        }
      };
      while (l_new - ref >= c) {
        ref += c;
        fire(ref, 1);
      }
      while (ref - l_new >= c) {
        ref -= c;
        fire(ref, -1);
      }
      log_prev_[p] = l_new;
    };
    for (std::uint32_t p : touched_) update(p);
    for (std::uint32_t p : pending_bg_) update(p);
    pending_bg_.clear();
    prev_touched_.swap(touched_);
    touched_.clear();
  }

private:
  int width_;
  int height_;
  const SimConfig& cfg_;
  double log_bg_;
  std::vector<double> flux_;
  std::vector<std::int64_t> stamp_;
  std::vector<double> log_ref_;
  std::vector<double> log_prev_;
  std::vector<std::int64_t> last_event_us_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> prev_touched_;
  std::vector<std::uint32_t> pending_bg_;
  std::vector<double> wx_, wy_;
};

}  // namespace

SimOutput generate_events(const Trajectory& traj, const Catalog& cat, const CameraModel& cam,
                          const SimConfig& cfg, const UtcInstant& t0, double duration_s) {
  cfg.validate();
  cam.validate();
  if (!(duration_s > 0.0)) throw Error(Errc::invalid_argument, "duration must be positive");
  if (cam.width > 65535 || cam.height > 65535) {
    throw Error(Errc::invalid_argument, "sensor too large for 16-bit event coordinates");
  }

  SimOutput out;
  const double clock_rate = 1.0 + cfg.clock_skew_ppm * 1e-6;
  const auto device_us = [&](double t_rel_s) {
    return cfg.device_t0_us + static_cast<std::int64_t>(std::llround(t_rel_s * 1e6 * clock_rate));
  };

  // PPS on whole UTC seconds.
  {
    double first = std::ceil(t0.sec_of_day());
    for (double s = first; s - t0.sec_of_day() <= duration_s + 1e-9; s += 1.0) {
      const UtcInstant u(t0.mjd_day(), s);
      out.pps.push_back({device_us(u - t0), u});
    }
  }
  // Truth at exactly t0 + k / rate.
  {
    const auto n = static_cast<std::int64_t>(std::floor(duration_s * cfg.truth_rate_hz + 1e-9));
    out.truth.reserve(static_cast<std::size_t>(n + 1));
    for (std::int64_t k = 0; k <= n; ++k) {
      const UtcInstant t = t0.plus_seconds(static_cast<double>(k) / cfg.truth_rate_hz);
      out.truth.push_back({t, traj(t), EstimateSource::simulator_truth, std::nullopt});
    }
  }

  const double tick_s = cfg.tick_us * 1e-6;
  const auto n_ticks = static_cast<std::int64_t>(std::ceil(duration_s / tick_s - 1e-9));
  const double refresh_s = 1.0;
  const double sigma = cfg.psf_sigma;

  PixelField field(cam, cfg);
  std::mt19937_64 rng(cfg.seed);
  std::poisson_distribution<long> noise_count(cfg.noise_rate * cam.width * cam.height * tick_s);
  std::uniform_int_distribution<int> pick_x(0, cam.width - 1);
  std::uniform_int_distribution<int> pick_y(0, cam.height - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<RenderStar> candidates;
  double next_refresh = 0.0;
  bool any_rendered = false;
  std::vector<Event> batch;
  auto by_time = [](const Event& a, const Event& b) {
    if (a.t_us != b.t_us) return a.t_us < b.t_us;
    if (a.y != b.y) return a.y < b.y;
    if (a.x != b.x) return a.x < b.x;
    return a.polarity < b.polarity;
  };

  for (std::int64_t n = 0; n <= n_ticks; ++n) {
    const double t_rel = std::min(static_cast<double>(n) * tick_s, duration_s);
    const double t_prev = n == 0 ? 0.0 : std::min(static_cast<double>(n - 1) * tick_s, duration_s);
    const UtcInstant t = t0.plus_seconds(t_rel);
    const UnitQuaternion q = traj(t);

    if (t_rel >= next_refresh) {
      const double horizon = std::min(refresh_s, duration_s - t_rel) + tick_s;
      const UnitQuaternion q_next = traj(t0.plus_seconds(t_rel + horizon));
      const double sweep_px = 1.2 * rotation_distance(q, q_next) * cam.focal_px();
      const double margin = 5.0 * sigma + 2.0 + sweep_px;
      candidates.clear();
      for (const StarInView& s : stars_near_fov(cat, q, cam, margin)) {
        RenderStar r;
        r.dir = s.star.dir;
        r.flux = cfg.mag_zero_flux * std::pow(10.0, -0.4 * s.star.mag);
        // Truncate where the PSF adds < 1% of the background, capped at 5 sigma.
        const double peak = r.flux / (2.0 * kPi * sigma * sigma);
        const double ratio = peak / (0.01 * cfg.background);
        if (ratio <= 1.0) continue;
        r.radius = std::min(5.0 * sigma, sigma * std::sqrt(2.0 * std::log(ratio)));
        candidates.push_back(r);
      }
      next_refresh = t_rel + refresh_s;
    }

    const UnitQuaternion to_body = q.inverse();
    for (const RenderStar& s : candidates) {
      const auto p = project_body(cam, to_body.rotate(s.dir));
      if (!p) continue;
      if (p->u < -s.radius || p->u > cam.width - 1 + s.radius || p->v < -s.radius ||
          p->v > cam.height - 1 + s.radius) {
        continue;
      }
      any_rendered = true;
      field.splat(n, p->u, p->v, s.flux, s.radius);
    }

    batch.clear();
    field.step(n, t_prev, t_rel - t_prev, n > 0, device_us, batch);
    if (n > 0 && cfg.noise_rate > 0.0) {
      const long k = noise_count(rng);
      for (long i = 0; i < k; ++i) {
        const int x = pick_x(rng);
        const int y = pick_y(rng);
        const double ts = t_prev + unit(rng) * (t_rel - t_prev);
        const std::int8_t pol = unit(rng) < 0.5 ? std::int8_t{1} : std::int8_t{-1};
        batch.push_back({device_us(ts), static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), pol});
      }
    }
    std::sort(batch.begin(), batch.end(), by_time);
    out.events.insert(out.events.end(), batch.begin(), batch.end());
  }
  // Sub-tick times from adjacent ticks can tie or interleave at boundaries.
  if (!std::is_sorted(out.events.begin(), out.events.end(), by_time)) {
    std::stable_sort(out.events.begin(), out.events.end(), by_time);
  }
  out.fov_always_empty = !any_rendered;
  return out;
}

void write_events_csv(const std::vector<Event>& events, std::ostream& out) {
  out << "t_us,x,y,p\n";
  fmt::memory_buffer buf;
  for (const Event& e : events) {
    fmt::format_to(std::back_inserter(buf), "{},{},{},{}\n", e.t_us, e.x, e.y, static_cast<int>(e.polarity));
    if (buf.size() > (1u << 16)) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<Event> read_events_csv(std::istream& in, const std::string& source) {
  csv::Reader r(in, source);
  r.expect_header("t_us,x,y,p");
  std::vector<Event> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    if (f.size() != 4) {
      throw Error(Errc::parse, fmt::format("{}: expected 4 fields, got {}", r.where(), f.size()));
    }
    const std::string where = r.where();
    const std::int64_t x = csv::to_int(f[1], where);
    const std::int64_t y = csv::to_int(f[2], where);
    const std::int64_t p = csv::to_int(f[3], where);
    if (x < 0 || x > 65535 || y < 0 || y > 65535 || (p != 1 && p != -1)) {
      throw Error(Errc::parse, where + ": event field out of range");
    }
    Event e{csv::to_int(f[0], where), static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y),
            static_cast<std::int8_t>(p)};
    if (!out.empty() && e.t_us < out.back().t_us) {
      throw Error(Errc::ordering, where + ": events not sorted by t_us");
    }
    out.push_back(e);
  }
  return out;
}

std::vector<Event> read_events_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return read_events_csv(in, path.string());
}

}  // namespace evstar
