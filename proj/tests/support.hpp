#pragma once

#include "evstar/error.hpp"
#include "evstar/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

// Fails the current test unless `expr` throws evstar::Error with `errc`.
#define CHECK_THROWS_ERRC(expr, errc)                                   \
  do {                                                                  \
    bool thrown_ = false;                                               \
    try {                                                               \
      (void)(expr);                                                     \
    } catch (const evstar::Error& e_) {                                 \
      thrown_ = true;                                                   \
      CHECK_MESSAGE(e_.code() == (errc), "unexpected code: ", e_.what()); \
    }                                                                   \
    CHECK_MESSAGE(thrown_, "expected an evstar::Error from " #expr);    \
  } while (0)

namespace testing {

inline std::filesystem::path source_dir() { return EVSTAR_SOURCE_DIR; }
inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(EVSTAR_FIXTURES) / name;
}

// Small deterministic generator for property tests.
class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double normal(double sigma = 1.0) { return std::normal_distribution<double>(0.0, sigma)(rng_); }

  evstar::Vec3 unit_vector() {
    for (;;) {
      const evstar::Vec3 v(normal(), normal(), normal());
      if (v.norm() > 1e-6) return v.normalized();
    }
  }

  evstar::UnitQuaternion quaternion() {
    return evstar::UnitQuaternion(normal(), normal(), normal(), normal());
  }

  // Random rotation of at most max_angle radians.
  evstar::UnitQuaternion small_rotation(double max_angle) {
    return evstar::quat_from_rotation_vector(unit_vector() * uniform(0.0, max_angle));
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

// Direction `sep` radians from `dir`, toward `toward` projected off `dir`.
inline evstar::Vec3 offset_direction(const evstar::Vec3& dir, const evstar::Vec3& toward, double sep) {
  const evstar::Vec3 t = (toward - toward.dot(dir) * dir).normalized();
  return (std::cos(sep) * dir + std::sin(sep) * t).normalized();
}

}  // namespace testing
