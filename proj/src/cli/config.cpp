#include "evstar/cli.hpp"

#include "evstar/error.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <initializer_list>
#include <string_view>

namespace evstar::cli {

namespace {

class Section {
public:
  Section(const YAML::Node& node, std::string name, std::string file)
      : node_(node), name_(std::move(name)), file_(std::move(file)) {}

  bool present() const { return node_.IsDefined() && !node_.IsNull(); }

  void allow(std::initializer_list<std::string_view> keys) const {
    if (!present()) return;
    if (!node_.IsMap()) fail(node_, fmt::format("'{}' must be a mapping", name_));
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail(kv.first, fmt::format("unknown key '{}{}'", prefix(), key));
      }
    }
  }

  Section sub(const std::string& key) const {
    return Section(present() ? node_[key] : YAML::Node(), prefix() + key, file_);
  }

  template <class T>
  void get(const std::string& key, T& out) const {
    if (!present()) return;
    const YAML::Node v = node_[key];
    if (!v.IsDefined() || v.IsNull()) return;
    try {
      out = v.as<T>();
    } catch (const YAML::Exception&) {
      fail(v, fmt::format("bad value for '{}{}'", prefix(), key));
    }
  }

  void get_opt(const std::string& key, std::optional<double>& out) const {
    double x = 0.0;
    if (present() && node_[key].IsDefined() && !node_[key].IsNull()) {
      get(key, x);
      out = x;
    }
  }

  [[noreturn]] void fail(const YAML::Node& at, const std::string& what) const {
    throw Error(Errc::config, fmt::format("{}:{}: {}", file_, at.Mark().line + 1, what));
  }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const YAML::Node at = present() ? node_[key] : node_;
    fail(at, what);
  }

private:
  std::string prefix() const { return name_.empty() ? "" : name_ + "."; }

  YAML::Node node_;
  std::string name_;
  std::string file_;
};

template <class E>
E pick(const Section& s, const std::string& key, E dflt,
       std::initializer_list<std::pair<std::string_view, E>> options) {
  std::string text;
  s.get(key, text);
  if (text.empty()) return dflt;
  for (const auto& [name, value] : options) {
    if (name == text) return value;
  }
  s.fail(key, fmt::format("unsupported value '{}' for '{}'", text, key));
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw Error(Errc::io, fmt::format("cannot open config '{}'", path.string()));
  } catch (const YAML::ParserException& e) {
    throw Error(Errc::config, fmt::format("{}:{}: {}", path.string(), e.mark.line + 1, e.msg));
  }

  const std::string file = path.string();
  const Section top(root, "", file);
  top.allow({"output_dir", "catalog", "eop", "camera", "scenario", "simulator", "tracker",
             "astrometry", "groundtruth", "evaluate"});
  const auto base = std::filesystem::absolute(path).parent_path();

  RunConfig c;
  c.config_path = path;
  std::string s = "out";
  top.get("output_dir", s);
  c.output_dir = resolve(base, s);

  const Section cat = top.sub("catalog");
  cat.allow({"path", "mag_limit"});
  s.clear();
  cat.get("path", s);
  c.catalog_path = resolve(base, s);
  cat.get("mag_limit", c.mag_limit);

  const Section eop = top.sub("eop");
  eop.allow({"path"});
  s.clear();
  eop.get("path", s);
  c.eop_path = resolve(base, s);

  const Section cam = top.sub("camera");
  cam.allow({"focal_length_m", "pixel_pitch_m", "width_px", "height_px"});
  double f = c.camera.focal_length, pitch = c.camera.pixel_pitch;
  int w = c.camera.width, h = c.camera.height;
  cam.get("focal_length_m", f);
  cam.get("pixel_pitch_m", pitch);
  cam.get("width_px", w);
  cam.get("height_px", h);
  try {
    c.camera = CameraModel::make(f, pitch, w, h);
  } catch (const Error& e) {
    throw Error(Errc::config, fmt::format("{}: camera: {}", file, e.what()));
  }

  const Section sc = top.sub("scenario");
  sc.allow({"start_utc", "duration_s", "boresight_ra_deg", "boresight_dec_deg", "roll_deg"});
  s.clear();
  sc.get("start_utc", s);
  if (s.empty()) throw Error(Errc::config, fmt::format("{}: scenario.start_utc is required", file));
  try {
    c.start_utc = parse_iso8601(s);
  } catch (const Error& e) {
    sc.fail("start_utc", e.what());
  }
  sc.get("duration_s", c.duration_s);
  sc.get("boresight_ra_deg", c.boresight_ra_deg);
  sc.get("boresight_dec_deg", c.boresight_dec_deg);
  sc.get("roll_deg", c.roll_deg);
  if (!(c.duration_s > 0.0)) sc.fail("duration_s", "scenario.duration_s must be positive");
  if (std::abs(c.boresight_dec_deg) > 90.0) sc.fail("boresight_dec_deg", "declination outside [-90, 90]");

  const Section sim = top.sub("simulator");
  sim.allow({"contrast_threshold", "psf_sigma_px", "refractory_us", "noise_rate", "mag_zero_flux",
             "background", "seed", "drift_dec_rate_as_per_h", "tick_us", "clock_skew_ppm",
             "device_t0_us", "truth_rate_hz"});
  sim.get("contrast_threshold", c.sim.contrast_threshold);
  sim.get("psf_sigma_px", c.sim.psf_sigma);
  sim.get("refractory_us", c.sim.refractory_us);
  sim.get("noise_rate", c.sim.noise_rate);
  sim.get("mag_zero_flux", c.sim.mag_zero_flux);
  sim.get("background", c.sim.background);
  sim.get("seed", c.sim.seed);
  sim.get("drift_dec_rate_as_per_h", c.sim.drift_dec_rate);
  sim.get("tick_us", c.sim.tick_us);
  sim.get("clock_skew_ppm", c.sim.clock_skew_ppm);
  sim.get("device_t0_us", c.sim.device_t0_us);
  sim.get("truth_rate_hz", c.sim.truth_rate_hz);

  const Section tr = top.sub("tracker");
  tr.allow({"gate_radius_px", "process_noise_attitude", "process_noise_rate", "measurement_noise_px2",
            "output_rate_hz", "min_batch", "prior_attitude_sigma_rad", "prior_rate_sigma_rad",
            "fov_refresh_s", "init", "init_offset_arcsec"});
  tr.get("gate_radius_px", c.tracker.gate_radius);
  tr.get("process_noise_attitude", c.tracker.process_noise_attitude);
  tr.get("process_noise_rate", c.tracker.process_noise_rate);
  tr.get("measurement_noise_px2", c.tracker.measurement_noise);
  tr.get("output_rate_hz", c.tracker.output_rate);
  tr.get("min_batch", c.tracker.min_batch);
  tr.get("prior_attitude_sigma_rad", c.tracker.prior_attitude_sigma);
  tr.get("prior_rate_sigma_rad", c.tracker.prior_rate_sigma);
  tr.get("fov_refresh_s", c.tracker.fov_refresh_s);
  c.init = pick(tr, "init", InitMode::pointing,
                {{"pointing", InitMode::pointing}, {"truth", InitMode::truth},
                 {"astrometry", InitMode::astrometry}});
  tr.get("init_offset_arcsec", c.init_offset_arcsec);

  const Section as = top.sub("astrometry");
  as.allow({"window_us", "min_weight", "merge_radius_px", "max_centroids", "match_radius_px",
            "side_tolerance_px", "min_match_fraction", "accept_fraction", "max_candidates",
            "index_quantization_arcsec"});
  as.get("window_us", c.astrometry.window_us);
  as.get("min_weight", c.astrometry.min_weight);
  as.get("merge_radius_px", c.astrometry.merge_radius);
  as.get("max_centroids", c.astrometry.max_centroids);
  as.get("match_radius_px", c.astrometry.match_radius);
  as.get("side_tolerance_px", c.astrometry.side_tolerance);
  as.get("min_match_fraction", c.astrometry.min_match_fraction);
  as.get("accept_fraction", c.astrometry.accept_fraction);
  as.get("max_candidates", c.astrometry.max_candidates);
  as.get("index_quantization_arcsec", c.index_quantization_arcsec);

  const Section gt = top.sub("groundtruth");
  gt.allow({"anchor", "anchor_index"});
  c.anchor_source = pick(gt, "anchor", AnchorSource::ekf,
                         {{"ekf", AnchorSource::ekf}, {"astrometry", AnchorSource::astrometry}});
  gt.get("anchor_index", c.anchor_index);

  const Section ev = top.sub("evaluate");
  ev.allow({"max_dt_s", "window_start_s", "window_end_s"});
  ev.get("max_dt_s", c.max_dt_s);
  ev.get_opt("window_start_s", c.window_start_s);
  ev.get_opt("window_end_s", c.window_end_s);

  try {
    c.sim.validate();
    c.tracker.validate();
    c.astrometry.validate();
  } catch (const Error& e) {
    throw Error(Errc::config, fmt::format("{}: {}", file, e.what()));
  }
  if (!(c.index_quantization_arcsec > 0.0)) {
    throw Error(Errc::config, fmt::format("{}: astrometry.index_quantization_arcsec must be positive", file));
  }
  return c;
}

}  // namespace evstar::cli
