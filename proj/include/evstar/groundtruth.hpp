#pragma once

#include "evstar/attitude.hpp"
#include "evstar/earth.hpp"

#include <vector>

namespace evstar {

/// Camera frame in ITRF, fixed by one anchoring estimate.
struct MountTransform {
  UnitQuaternion q_mount;
};

/// q_mount = earth0^-1 * cam0
MountTransform virtual_telescope(const UnitQuaternion& earth0, const UnitQuaternion& cam0);

/// Anchors on est[anchor_index]: the camera attitude there is taken as exact.
/// Throws Errc::out_of_range for a bad index or an anchor outside the EOP span.
MountTransform anchor_mount(const EopTable& earth, const std::vector<AttitudeEstimate>& est,
                            std::size_t anchor_index = 0);

/// G(t) = E(t) * q_mount for every t, source = groundtruth.
std::vector<AttitudeEstimate> gt_series(const EopTable& earth, const MountTransform& mount,
                                        const std::vector<UtcInstant>& times);

}  // namespace evstar
