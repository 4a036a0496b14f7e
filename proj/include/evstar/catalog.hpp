#pragma once

#include "evstar/camera.hpp"
#include "evstar/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <unordered_map>
#include <vector>

namespace evstar {

struct Star {
  std::int64_t id = 0;
  Vec3 dir = Vec3::UnitX();  // ICRF unit vector
  double mag = 0.0;
};

struct StarInView {
  Star star;
  PixelPos pixel;
};

/// Immutable star list sorted by id, plus a ~1 degree RA/Dec bucket grid.
class Catalog {
public:
  Catalog() = default;
  /// Throws Errc::duplicate on repeated ids. Stars fainter than mag_limit are dropped.
  Catalog(std::vector<Star> stars, double mag_limit);

  const std::vector<Star>& stars() const { return stars_; }
  std::size_t size() const { return stars_.size(); }
  bool empty() const { return stars_.empty(); }
  double mag_limit() const { return mag_limit_; }

  /// Index into stars() of the star with this id, or -1.
  std::ptrdiff_t find(std::int64_t id) const;

  /// Indices of stars within `radius` of `center` (exact test, grid-accelerated).
  std::vector<std::size_t> cone(const Vec3& center, double radius) const;

private:
  static constexpr int kDecBands = 180;
  static constexpr int kRaCells = 360;
  static int cell_of(const Vec3& dir);

  std::vector<Star> stars_;
  double mag_limit_ = 99.0;
  // bucket -> indices into stars_; every star appears exactly once
  std::vector<std::vector<std::uint32_t>> grid_;
};

/// Reads the `id,ra_deg,dec_deg,mag` CSV. Errors name the offending line.
Catalog load_catalog(const std::filesystem::path& path, double mag_limit);
Catalog parse_catalog_csv(std::istream& in, double mag_limit, const std::string& source = "<stream>");
void write_catalog_csv(const Catalog& cat, std::ostream& out);

/// Stars whose projection lands in [0,width) x [0,height), brightest first.
std::vector<StarInView> stars_in_fov(const Catalog& cat, const UnitQuaternion& attitude,
                                     const CameraModel& cam);

/// Same, but keeps stars up to `margin_px` outside the sensor edges.
std::vector<StarInView> stars_near_fov(const Catalog& cat, const UnitQuaternion& attitude,
                                       const CameraModel& cam, double margin_px);

/// Deterministic synthetic star field uniformly filling an RA/Dec box; star
/// counts per magnitude grow as 10^(0.4 m). Ids start at `first_id`.
Catalog synthesize_field(double ra_min_deg, double ra_max_deg, double dec_min_deg,
                         double dec_max_deg, double stars_per_sq_deg, double mag_bright,
                         double mag_faint, std::uint64_t seed, std::int64_t first_id = 1);

/// Three catalog stars ordered so that ids[0] is opposite the longest side,
/// ids[1] opposite the middle side and ids[2] opposite the shortest.
struct IndexedTriangle {
  std::array<std::uint32_t, 3> star{};  // indices into the owning catalog
};

/// Triangle lookup table keyed by the quantized two longest sides of every
/// catalog triangle whose sides are all <= max_separation.
class TriangleIndex {
public:
  TriangleIndex() = default;

  const Catalog& catalog() const { return catalog_; }
  double max_separation() const { return max_separation_; }
  double quantization() const { return quantization_; }
  std::size_t triangle_count() const { return triangle_count_; }

  /// Triangles whose key is within +/- `neighbor_steps` of the quantized
  /// (longest, middle) side pair. Angles in radians.
  std::vector<IndexedTriangle> lookup(double longest, double middle, int neighbor_steps = 1) const;

  friend TriangleIndex build_triangle_index(const Catalog&, double, double);

private:
  struct KeyHash {
    std::size_t operator()(std::uint64_t k) const noexcept { return std::hash<std::uint64_t>{}(k); }
  };
  static std::uint64_t key(std::int64_t a, std::int64_t b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
  }

  Catalog catalog_;
  double max_separation_ = 0.0;  // rad
  double quantization_ = 0.0;    // rad
  std::size_t triangle_count_ = 0;
  std::unordered_map<std::uint64_t, std::vector<IndexedTriangle>, KeyHash> table_;
};

/// max_separation_deg must cover the camera diagonal; quantization in arcsec.
/// Throws Errc::insufficient_data for fewer than 3 stars.
TriangleIndex build_triangle_index(const Catalog& cat, double max_separation_deg,
                                   double quantization_arcsec);

/// Sides of the triangle (a, b, c) as (longest, middle, shortest), and the
/// permutation of vertices that matches IndexedTriangle's ordering.
struct TriangleShape {
  std::array<double, 3> sides{};      // descending
  std::array<int, 3> vertex_order{};  // vertex opposite sides[k]
};
TriangleShape triangle_shape(const Vec3& a, const Vec3& b, const Vec3& c);

}  // namespace evstar
