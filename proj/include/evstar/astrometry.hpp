#pragma once

#include "evstar/attitude.hpp"
#include "evstar/camera.hpp"
#include "evstar/catalog.hpp"
#include "evstar/simulator.hpp"
#include "evstar/timesync.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace evstar {

inline constexpr double kDefaultWindowUs = 1e6 / 6.0;

/// Positive-event counts over [t_start, t_end) on the sensor grid.
struct BatchFrame {
  std::int64_t t_start = 0;  // device us
  std::int64_t t_end = 0;
  int width = 0;
  int height = 0;
  std::vector<std::uint32_t> counts;   // row-major, width * height
  std::vector<std::uint32_t> touched;  // pixel indices with nonzero count, first-hit order

  std::uint32_t at(int x, int y) const { return counts[static_cast<std::size_t>(y) * width + x]; }
};

/// Streams complete windows to `sink` one at a time (frames are large). Windows
/// start at the first event; boundary k sits at round(k * window_us). The last
/// partial window is dropped.
void for_each_frame(const std::vector<Event>& events, int width, int height, double window_us,
                    const std::function<void(const BatchFrame&)>& sink);

std::vector<BatchFrame> accumulate_frames(const std::vector<Event>& events, int width, int height,
                                          double window_us = kDefaultWindowUs);

struct Centroid {
  double u = 0.0;
  double v = 0.0;
  double weight = 0.0;  // event count
};

/// 8-connected blobs, merged when their centroids lie within `radius` px,
/// then filtered by min_weight. Heaviest first.
std::vector<Centroid> extract_centroids(const BatchFrame& frame, double min_weight, double radius);

struct AstrometryConfig {
  double window_us = kDefaultWindowUs;
  double min_weight = 3.0;
  double merge_radius = 3.0;        // px
  int max_centroids = 12;           // brightest centroids used for triangles
  double match_radius = 2.5;        // px, verification
  double side_tolerance = 3.0;      // px-equivalent tolerance on interstar angles
  double min_match_fraction = 0.6;
  double accept_fraction = 0.9;     // stop searching once a candidate verifies this well
  int max_candidates = 5000;        // verification budget per frame

  void validate() const;
};

enum class SolveFailure { insufficient_stars, no_match, verification_failed };
std::string_view to_string(SolveFailure f);

struct PlateSolution {
  UnitQuaternion q;
  int matched = 0;    // centroids with a catalog star inside match_radius
  int centroids = 0;
  double mean_residual_px = 0.0;
};

struct SolveOutcome {
  std::optional<PlateSolution> solution;
  SolveFailure failure = SolveFailure::no_match;  // meaningful only without a solution
};

SolveOutcome plate_solve(const std::vector<Centroid>& centroids, const TriangleIndex& index,
                         const CameraModel& cam, const AstrometryConfig& cfg);

struct FrameFailure {
  std::int64_t t_start_us = 0;
  SolveFailure reason = SolveFailure::no_match;
};

struct SolveStreamResult {
  std::vector<AttitudeEstimate> solutions;  // stamped at window midpoints
  std::vector<FrameFailure> failures;
  std::size_t frames = 0;

  double success_rate() const {
    return frames == 0 ? 0.0 : static_cast<double>(solutions.size()) / static_cast<double>(frames);
  }
};

/// Frames the stream, solves each frame and stamps solutions through the PPS map.
SolveStreamResult solve_stream(const std::vector<Event>& events, const std::vector<PpsAnchor>& pps,
                               const TriangleIndex& index, const CameraModel& cam,
                               const AstrometryConfig& cfg);

/// Sidecar `t_start_us,reason`.
void write_failures_csv(const std::vector<FrameFailure>& failures, std::ostream& out);
std::vector<FrameFailure> read_failures_csv(const std::filesystem::path& path);

}  // namespace evstar
