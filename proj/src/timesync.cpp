#include "evstar/timesync.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <ostream>

namespace evstar {

TimeMap build_time_map(std::vector<PpsAnchor> anchors) {
  if (anchors.size() < 2) {
    throw Error(Errc::insufficient_data,
                fmt::format("time map needs at least 2 PPS anchors, got {}", anchors.size()));
  }
  TimeMap map;
  map.utc_offset_s_.reserve(anchors.size());
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    map.utc_offset_s_.push_back(anchors[i].t_utc - anchors[0].t_utc);
    if (i == 0) continue;
    const double de = static_cast<double>(anchors[i].t_event_us - anchors[i - 1].t_event_us) * 1e-6;
    const double du = map.utc_offset_s_[i] - map.utc_offset_s_[i - 1];
    if (!(de > 0.0) || !(du > 0.0)) {
      throw Error(Errc::ordering, fmt::format("PPS anchor {} not strictly after anchor {}", i, i - 1));
    }
    const double slope = du / de;
    if (slope < 0.9 || slope > 1.1) {
      throw Error(Errc::clock_skew, fmt::format("PPS segment {} has implausible slope {:.6f}", i, slope));
    }
  }
  map.anchors_ = std::move(anchors);
  return map;
}

UtcInstant TimeMap::to_utc(double t_event_us) const {
  const auto it = std::lower_bound(anchors_.begin(), anchors_.end(), t_event_us,
                                   [](const PpsAnchor& a, double t) {
                                     return static_cast<double>(a.t_event_us) < t;
                                   });
  if (it != anchors_.end() && static_cast<double>(it->t_event_us) == t_event_us) return it->t_utc;
  std::size_t hi = static_cast<std::size_t>(it - anchors_.begin());
  hi = std::clamp<std::size_t>(hi, 1, anchors_.size() - 1);
  const std::size_t lo = hi - 1;
  const double e0 = static_cast<double>(anchors_[lo].t_event_us);
  const double e1 = static_cast<double>(anchors_[hi].t_event_us);
  const double u0 = utc_offset_s_[lo];
  const double u1 = utc_offset_s_[hi];
  const double s = (t_event_us - e0) / (e1 - e0);
  // offset relative to the segment's own anchor keeps the addend small
  return anchors_[lo].t_utc.plus_seconds((u1 - u0) * s);
}

double TimeMap::to_device_us(const UtcInstant& t) const {
  const double off = t - anchors_[0].t_utc;
  const auto it = std::lower_bound(utc_offset_s_.begin(), utc_offset_s_.end(), off);
  std::size_t hi = static_cast<std::size_t>(it - utc_offset_s_.begin());
  if (hi < utc_offset_s_.size() && utc_offset_s_[hi] == off) {
    return static_cast<double>(anchors_[hi].t_event_us);
  }
  hi = std::clamp<std::size_t>(hi, 1, anchors_.size() - 1);
  const std::size_t lo = hi - 1;
  const double e0 = static_cast<double>(anchors_[lo].t_event_us);
  const double e1 = static_cast<double>(anchors_[hi].t_event_us);
  const double s = (t - anchors_[lo].t_utc) / (utc_offset_s_[hi] - utc_offset_s_[lo]);
  return e0 + (e1 - e0) * s;
}

std::vector<double> TimeMap::slopes() const {
  std::vector<double> out;
  for (std::size_t i = 1; i < anchors_.size(); ++i) {
    out.push_back((utc_offset_s_[i] - utc_offset_s_[i - 1]) /
                  (static_cast<double>(anchors_[i].t_event_us - anchors_[i - 1].t_event_us) * 1e-6));
  }
  return out;
}

std::vector<PpsAnchor> pair_pps(std::vector<std::int64_t> triggers, std::vector<UtcInstant> utc) {
  if (triggers.size() != utc.size()) {
    throw Error(Errc::insufficient_data,
                fmt::format("PPS trigger count {} does not match UTC log count {}", triggers.size(),
                            utc.size()));
  }
  std::sort(triggers.begin(), triggers.end());
  std::sort(utc.begin(), utc.end());
  std::vector<PpsAnchor> out;
  out.reserve(triggers.size());
  for (std::size_t i = 0; i < triggers.size(); ++i) out.push_back({triggers[i], utc[i]});
  return out;
}

std::vector<PpsAnchor> read_pps_files(const std::filesystem::path& trigger_csv,
                                      const std::filesystem::path& utc_csv) {
  std::vector<std::int64_t> triggers;
  {
    auto in = csv::open_input(trigger_csv);
    csv::Reader r(in, trigger_csv.string());
    r.expect_header("t_event_us");
    std::vector<std::string_view> f;
    while (r.next(f)) {
      if (f.size() != 1) throw Error(Errc::parse, r.where() + ": expected 1 field");
      triggers.push_back(csv::to_int(f[0], r.where()));
    }
  }
  std::vector<UtcInstant> utc;
  {
    auto in = csv::open_input(utc_csv);
    csv::Reader r(in, utc_csv.string());
    r.expect_header("utc_iso8601");
    std::vector<std::string_view> f;
    while (r.next(f)) {
      if (f.size() != 1) throw Error(Errc::parse, r.where() + ": expected 1 field");
      try {
        utc.push_back(parse_iso8601(f[0]));
      } catch (const Error& e) {
        throw Error(Errc::parse, r.where() + ": " + e.what());
      }
    }
  }
  return pair_pps(std::move(triggers), std::move(utc));
}

void write_trigger_csv(const std::vector<PpsAnchor>& anchors, std::ostream& out) {
  out << "t_event_us\n";
  for (const auto& a : anchors) out << a.t_event_us << '\n';
}

void write_utc_log_csv(const std::vector<PpsAnchor>& anchors, std::ostream& out) {
  out << "utc_iso8601\n";
  for (const auto& a : anchors) out << format_iso8601(a.t_utc) << '\n';
}

}  // namespace evstar
