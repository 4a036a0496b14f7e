#pragma once

#include "evstar/astrometry.hpp"
#include "evstar/camera.hpp"
#include "evstar/simulator.hpp"
#include "evstar/tracker.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace evstar::cli {

enum class InitMode { pointing, truth, astrometry };
enum class AnchorSource { ekf, astrometry };

/// One declarative run. Relative paths are resolved against the config file.
struct RunConfig {
  std::filesystem::path config_path;
  std::filesystem::path output_dir = "out";

  std::filesystem::path catalog_path;
  double mag_limit = 99.0;
  std::filesystem::path eop_path;  // finals2000A text, or the eop CSV when it ends in .csv

  CameraModel camera;

  UtcInstant start_utc;
  double duration_s = 60.0;
  double boresight_ra_deg = 0.0;
  double boresight_dec_deg = 0.0;
  double roll_deg = 0.0;

  SimConfig sim;

  TrackerConfig tracker;
  InitMode init = InitMode::pointing;
  double init_offset_arcsec = 0.0;

  AstrometryConfig astrometry;
  double index_quantization_arcsec = 10.0;

  AnchorSource anchor_source = AnchorSource::ekf;
  std::size_t anchor_index = 0;

  double max_dt_s = 0.026;
  std::optional<double> window_start_s;  // relative to start_utc
  std::optional<double> window_end_s;
};

/// Throws Errc::config (unknown key, bad value) or Errc::io.
RunConfig load_run_config(const std::filesystem::path& path);

/// SHA-256 of a file's bytes, lowercase hex.
std::string sha256_file(const std::filesystem::path& path);

struct Manifest {
  std::string subcommand;
  std::filesystem::path config_path;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
};

/// JSON manifest with tool version, config hash, input/output digests and a
/// creation timestamp (the only field that changes between identical runs).
void write_manifest(const Manifest& m, const std::filesystem::path& path);

/// Process entry point; returns the exit code (0 ok, 1 data error, 2 usage).
int run(int argc, const char* const* argv);

}  // namespace evstar::cli
