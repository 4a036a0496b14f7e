#pragma once

#include "evstar/geometry.hpp"
#include "evstar/utc.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

namespace evstar {

enum class EstimateSource { ekf, astrometry, groundtruth, simulator_truth };

std::string_view to_string(EstimateSource s);
EstimateSource parse_source(std::string_view text);

struct AttitudeEstimate {
  UtcInstant t;
  UnitQuaternion q;
  EstimateSource source = EstimateSource::ekf;
  std::optional<Mat3> cov;  // attitude covariance, rad^2 (not serialized)
};

/// `utc_iso8601,qw,qx,qy,qz,source`, quaternions sign-canonicalized.
void write_attitude_csv(const std::vector<AttitudeEstimate>& series, std::ostream& out);
std::vector<AttitudeEstimate> read_attitude_csv(const std::filesystem::path& path);
std::vector<AttitudeEstimate> read_attitude_csv(std::istream& in, const std::string& source);

}  // namespace evstar
