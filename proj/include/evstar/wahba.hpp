#pragma once

#include "evstar/geometry.hpp"

#include <vector>

namespace evstar {

/// Rotation q minimizing sum w_i |ref_i - q.rotate(body_i)|^2 (quaternion
/// eigen-method). Throws Errc::insufficient_data for fewer than 2 pairs or
/// mismatched sizes, Errc::degenerate when the pairs are all collinear.
UnitQuaternion solve_wahba(const std::vector<Vec3>& body, const std::vector<Vec3>& ref,
                           const std::vector<double>& weights = {});

}  // namespace evstar
