#include "evstar/wahba.hpp"

#include "evstar/error.hpp"

#include <Eigen/Eigenvalues>

namespace evstar {

UnitQuaternion solve_wahba(const std::vector<Vec3>& body, const std::vector<Vec3>& ref,
                           const std::vector<double>& weights) {
  if (body.size() != ref.size() || (!weights.empty() && weights.size() != body.size())) {
    throw Error(Errc::invalid_argument, "wahba: mismatched input sizes");
  }
  if (body.size() < 2) throw Error(Errc::insufficient_data, "wahba: need at least two vector pairs");

  Mat3 B = Mat3::Zero();
  for (std::size_t i = 0; i < body.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    B += w * ref[i] * body[i].transpose();
  }
  // Davenport's K; its top eigenvector is the optimal (w, x, y, z) quaternion
  const double sigma = B.trace();
  const Mat3 S = B + B.transpose();
  const Vec3 z(B(1, 2) - B(2, 1), B(2, 0) - B(0, 2), B(0, 1) - B(1, 0));
  Eigen::Matrix4d K;
  K(0, 0) = sigma;
  K.block<1, 3>(0, 1) = z.transpose();
  K.block<3, 1>(1, 0) = z;
  K.block<3, 3>(1, 1) = S - sigma * Mat3::Identity();

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(K);
  const Eigen::Vector4d lambda = eig.eigenvalues();
  const double scale = std::max(1.0, std::abs(lambda(3)));
  if (lambda(3) - lambda(2) < 1e-12 * scale) {
    throw Error(Errc::degenerate, "wahba: observation geometry does not fix the rotation");
  }
  const Eigen::Vector4d q = eig.eigenvectors().col(3);
  // K was built for the ref <- body convention with the vector part negated
  return UnitQuaternion(q(0), -q(1), -q(2), -q(3));
}

}  // namespace evstar
