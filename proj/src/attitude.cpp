#include "evstar/attitude.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>

#include <ostream>

namespace evstar {

std::string_view to_string(EstimateSource s) {
  switch (s) {
    case EstimateSource::ekf: return "ekf";
    case EstimateSource::astrometry: return "astrometry";
    case EstimateSource::groundtruth: return "groundtruth";
    case EstimateSource::simulator_truth: return "simulator-truth";
  }
  return "ekf";
}

EstimateSource parse_source(std::string_view text) {
  for (auto s : {EstimateSource::ekf, EstimateSource::astrometry, EstimateSource::groundtruth,
                 EstimateSource::simulator_truth}) {
    if (to_string(s) == text) return s;
  }
  throw Error(Errc::parse, "unknown attitude source '" + std::string(text) + "'");
}

void write_attitude_csv(const std::vector<AttitudeEstimate>& series, std::ostream& out) {
  out << "utc_iso8601,qw,qx,qy,qz,source\n";
  for (const auto& e : series) {
    const UnitQuaternion q = e.q.canonical();
    out << fmt::format("{},{:.15f},{:.15f},{:.15f},{:.15f},{}\n", format_iso8601(e.t), q.w(), q.x(),
                       q.y(), q.z(), to_string(e.source));
  }
}

std::vector<AttitudeEstimate> read_attitude_csv(std::istream& in, const std::string& source) {
  csv::Reader r(in, source);
  r.expect_header("utc_iso8601,qw,qx,qy,qz,source");
  std::vector<AttitudeEstimate> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const std::string where = r.where();
    if (f.size() != 6) {
      throw Error(Errc::parse, fmt::format("{}: expected 6 fields, got {}", where, f.size()));
    }
    AttitudeEstimate e;
    try {
      e.t = parse_iso8601(f[0]);
      e.source = parse_source(f[5]);
    } catch (const Error& err) {
      throw Error(Errc::parse, where + ": " + err.what());
    }
    e.q = UnitQuaternion(csv::to_double(f[1], where), csv::to_double(f[2], where),
                         csv::to_double(f[3], where), csv::to_double(f[4], where));
    if (!out.empty() && e.t < out.back().t) {
      throw Error(Errc::ordering, where + ": attitude series not sorted by time");
    }
    out.push_back(e);
  }
  return out;
}

std::vector<AttitudeEstimate> read_attitude_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return read_attitude_csv(in, path.string());
}

}  // namespace evstar
