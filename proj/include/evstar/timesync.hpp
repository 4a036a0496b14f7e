#pragma once

#include "evstar/utc.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace evstar {

/// One PPS rising edge: device timestamp and the UTC second it marks.
struct PpsAnchor {
  std::int64_t t_event_us = 0;
  UtcInstant t_utc;
};

/// Piecewise-linear device-clock -> UTC map through consecutive PPS anchors.
/// Outside the anchor span the nearest segment is extended.
class TimeMap {
public:
  const std::vector<PpsAnchor>& anchors() const { return anchors_; }

  UtcInstant to_utc(double t_event_us) const;
  /// Inverse map (UTC -> device microseconds), same piecewise construction.
  double to_device_us(const UtcInstant& t) const;

  /// UTC seconds per device second on each segment.
  std::vector<double> slopes() const;

  friend TimeMap build_time_map(std::vector<PpsAnchor> anchors);

private:
  std::vector<PpsAnchor> anchors_;
  std::vector<double> utc_offset_s_;  // anchor UTC relative to anchors_[0]
};

/// Throws Errc::insufficient_data (< 2 anchors), Errc::ordering (not strictly
/// increasing in both clocks) or Errc::clock_skew (slope outside [0.9, 1.1]).
TimeMap build_time_map(std::vector<PpsAnchor> anchors);

inline UtcInstant to_utc(const TimeMap& map, double t_event_us) { return map.to_utc(t_event_us); }

/// Trigger CSV (`t_event_us`) and UTC log CSV (`utc_iso8601`); rows are
/// paired by index after sorting each file.
std::vector<PpsAnchor> read_pps_files(const std::filesystem::path& trigger_csv,
                                      const std::filesystem::path& utc_csv);
std::vector<PpsAnchor> pair_pps(std::vector<std::int64_t> triggers, std::vector<UtcInstant> utc);
void write_trigger_csv(const std::vector<PpsAnchor>& anchors, std::ostream& out);
void write_utc_log_csv(const std::vector<PpsAnchor>& anchors, std::ostream& out);

}  // namespace evstar
