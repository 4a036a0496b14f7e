#include "evstar/groundtruth.hpp"

#include "evstar/error.hpp"

#include <fmt/format.h>

namespace evstar {

MountTransform virtual_telescope(const UnitQuaternion& earth0, const UnitQuaternion& cam0) {
  return {earth0.inverse() * cam0};
}

MountTransform anchor_mount(const EopTable& earth, const std::vector<AttitudeEstimate>& est,
                            std::size_t anchor_index) {
  if (anchor_index >= est.size()) {
    throw Error(Errc::out_of_range,
                fmt::format("anchor index {} outside a series of {} estimates", anchor_index, est.size()));
  }
  const AttitudeEstimate& a = est[anchor_index];
  return virtual_telescope(earth_attitude(earth, a.t), a.q);
}

std::vector<AttitudeEstimate> gt_series(const EopTable& earth, const MountTransform& mount,
                                        const std::vector<UtcInstant>& times) {
  std::vector<AttitudeEstimate> out;
  out.reserve(times.size());
  for (const UtcInstant& t : times) {
    out.push_back({t, earth_attitude(earth, t) * mount.q_mount, EstimateSource::groundtruth, std::nullopt});
  }
  return out;
}

}  // namespace evstar
