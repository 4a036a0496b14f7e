#include "evstar/catalog.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>

namespace evstar {

Catalog::Catalog(std::vector<Star> stars, double mag_limit) : mag_limit_(mag_limit) {
  std::sort(stars.begin(), stars.end(), [](const Star& a, const Star& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < stars.size(); ++i) {
    if (stars[i].id == stars[i - 1].id) {
      throw Error(Errc::duplicate, fmt::format("duplicate star id {}", stars[i].id));
    }
  }
  stars_.reserve(stars.size());
  for (auto& s : stars) {
    if (s.mag > mag_limit) continue;
    s.dir.normalize();
    stars_.push_back(s);
  }
  grid_.assign(static_cast<std::size_t>(kDecBands) * kRaCells, {});
  for (std::size_t i = 0; i < stars_.size(); ++i) {
    grid_[static_cast<std::size_t>(cell_of(stars_[i].dir))].push_back(static_cast<std::uint32_t>(i));
  }
}

int Catalog::cell_of(const Vec3& dir) {
  const SkyCoord c = unit_to_skycoord(dir);
  const int band = std::clamp(static_cast<int>(std::floor(c.dec_deg + 90.0)), 0, kDecBands - 1);
  const int cell = std::clamp(static_cast<int>(std::floor(c.ra_deg)), 0, kRaCells - 1);
  return band * kRaCells + cell;
}

std::ptrdiff_t Catalog::find(std::int64_t id) const {
  const auto it = std::lower_bound(stars_.begin(), stars_.end(), id,
                                   [](const Star& s, std::int64_t v) { return s.id < v; });
  if (it == stars_.end() || it->id != id) return -1;
  return it - stars_.begin();
}

std::vector<std::size_t> Catalog::cone(const Vec3& center, double radius) const {
  std::vector<std::size_t> out;
  if (stars_.empty()) return out;
  const Vec3 c = center.normalized();
  const SkyCoord sc = unit_to_skycoord(c);
  const double r_deg = rad_to_deg(radius);
  const double lo = sc.dec_deg - r_deg;
  const double hi = sc.dec_deg + r_deg;
  const int band_lo = std::clamp(static_cast<int>(std::floor(lo + 90.0)), 0, kDecBands - 1);
  const int band_hi = std::clamp(static_cast<int>(std::floor(hi + 90.0)), 0, kDecBands - 1);

  bool all_ra = lo <= -90.0 || hi >= 90.0 || r_deg >= 90.0;
  double half_width = 180.0;
  if (!all_ra) {
    const double max_abs_dec = std::max(std::abs(lo), std::abs(hi));
    half_width = r_deg / std::cos(deg_to_rad(max_abs_dec)) + 1.0;
    all_ra = half_width >= 180.0;
  }
  const double cos_r = std::cos(radius);
  auto scan = [&](int band, int cell) {
    for (std::uint32_t i : grid_[static_cast<std::size_t>(band * kRaCells + cell)]) {
      if (stars_[i].dir.dot(c) >= cos_r && angular_separation(stars_[i].dir, c) <= radius) {
        out.push_back(i);
      }
    }
  };
  for (int band = band_lo; band <= band_hi; ++band) {
    if (all_ra) {
      for (int cell = 0; cell < kRaCells; ++cell) scan(band, cell);
      continue;
    }
    const int first = static_cast<int>(std::floor(sc.ra_deg - half_width));
    const int last = static_cast<int>(std::floor(sc.ra_deg + half_width));
    for (int k = first; k <= last; ++k) scan(band, ((k % kRaCells) + kRaCells) % kRaCells);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Catalog parse_catalog_csv(std::istream& in, double mag_limit, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header("id,ra_deg,dec_deg,mag");
  std::vector<Star> stars;
  std::unordered_set<std::int64_t> seen;
  std::vector<std::string_view> f;
  while (reader.next(f)) {
    const std::string where = reader.where();
    if (f.size() != 4) {
      throw Error(Errc::parse, fmt::format("{}: expected 4 fields, got {}", where, f.size()));
    }
    Star s;
    s.id = csv::to_int(f[0], where);
    const double ra = csv::to_double(f[1], where);
    const double dec = csv::to_double(f[2], where);
    s.mag = csv::to_double(f[3], where);
    if (!(ra >= 0.0 && ra < 360.0) || !(dec >= -90.0 && dec <= 90.0)) {
      throw Error(Errc::parse, where + ": ra/dec outside [0,360) x [-90,90]");
    }
    if (!seen.insert(s.id).second) {
      throw Error(Errc::duplicate, fmt::format("{}: duplicate star id {}", where, s.id));
    }
    s.dir = skycoord_to_unit({ra, dec});
    stars.push_back(s);
  }
  return Catalog(std::move(stars), mag_limit);
}

Catalog load_catalog(const std::filesystem::path& path, double mag_limit) {
  auto in = csv::open_input(path);
  return parse_catalog_csv(in, mag_limit, path.string());
}

void write_catalog_csv(const Catalog& cat, std::ostream& out) {
  out << "id,ra_deg,dec_deg,mag\n";
  for (const Star& s : cat.stars()) {
    const SkyCoord c = unit_to_skycoord(s.dir);
    out << fmt::format("{},{:.7f},{:.7f},{:.3f}\n", s.id, c.ra_deg, c.dec_deg, s.mag);
  }
}

std::vector<StarInView> stars_near_fov(const Catalog& cat, const UnitQuaternion& attitude,
                                       const CameraModel& cam, double margin_px) {
  const Vec3 boresight = attitude.rotate(Vec3::UnitZ());
  const double radius = cam.half_diagonal_rad() + std::max(0.0, margin_px) / cam.focal_px() + 1e-6;
  const UnitQuaternion to_body = attitude.inverse();
  std::vector<StarInView> out;
  for (std::size_t i : cat.cone(boresight, radius)) {
    const Star& s = cat.stars()[i];
    const auto p = project_body(cam, to_body.rotate(s.dir));
    if (!p) continue;
    if (p->u >= -margin_px && p->u < cam.width + margin_px && p->v >= -margin_px &&
        p->v < cam.height + margin_px) {
      out.push_back({s, *p});
    }
  }
  std::sort(out.begin(), out.end(), [](const StarInView& a, const StarInView& b) {
    return a.star.mag != b.star.mag ? a.star.mag < b.star.mag : a.star.id < b.star.id;
  });
  return out;
}

std::vector<StarInView> stars_in_fov(const Catalog& cat, const UnitQuaternion& attitude,
                                     const CameraModel& cam) {
  return stars_near_fov(cat, attitude, cam, 0.0);
}

Catalog synthesize_field(double ra_min_deg, double ra_max_deg, double dec_min_deg,
                         double dec_max_deg, double stars_per_sq_deg, double mag_bright,
                         double mag_faint, std::uint64_t seed, std::int64_t first_id) {
  if (!(ra_max_deg > ra_min_deg) || !(dec_max_deg > dec_min_deg) || dec_min_deg < -90.0 ||
      dec_max_deg > 90.0 || !(mag_faint >= mag_bright) || stars_per_sq_deg < 0.0) {
    throw Error(Errc::invalid_argument, "bad synthetic field bounds");
  }
  const double s_lo = std::sin(deg_to_rad(dec_min_deg));
  const double s_hi = std::sin(deg_to_rad(dec_max_deg));
  const double area_sq_deg = deg_to_rad(ra_max_deg - ra_min_deg) * (s_hi - s_lo) /
                             (kRadPerDeg * kRadPerDeg);
  const auto count = static_cast<std::size_t>(std::llround(area_sq_deg * stars_per_sq_deg));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double f_lo = std::pow(10.0, 0.4 * mag_bright);
  const double f_hi = std::pow(10.0, 0.4 * mag_faint);
  std::vector<Star> stars;
  stars.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    double ra = ra_min_deg + (ra_max_deg - ra_min_deg) * unit(rng);
    ra = std::fmod(std::fmod(ra, 360.0) + 360.0, 360.0);
    const double dec = rad_to_deg(std::asin(s_lo + (s_hi - s_lo) * unit(rng)));
    const double mag = std::log10(f_lo + (f_hi - f_lo) * unit(rng)) / 0.4;
    // round like the CSV does so written and in-memory catalogs agree
    const double ra_r = std::round(ra * 1e7) / 1e7;
    const double dec_r = std::round(dec * 1e7) / 1e7;
    const double mag_r = std::round(mag * 1e3) / 1e3;
    stars.push_back({first_id + static_cast<std::int64_t>(i),
                     skycoord_to_unit({ra_r >= 360.0 ? 0.0 : ra_r, dec_r}), mag_r});
  }
  return Catalog(std::move(stars), mag_faint);
}

TriangleShape triangle_shape(const Vec3& a, const Vec3& b, const Vec3& c) {
  // side k is opposite vertex k
  std::array<std::pair<double, int>, 3> s{{{angular_separation(b, c), 0},
                                           {angular_separation(a, c), 1},
                                           {angular_separation(a, b), 2}}};
  std::sort(s.begin(), s.end(), [](const auto& x, const auto& y) {
    return x.first != y.first ? x.first > y.first : x.second < y.second;
  });
  TriangleShape t;
  for (int k = 0; k < 3; ++k) {
    t.sides[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)].first;
    t.vertex_order[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k)].second;
  }
  return t;
}

TriangleIndex build_triangle_index(const Catalog& cat, double max_separation_deg,
                                   double quantization_arcsec) {
  if (cat.size() < 3) {
    throw Error(Errc::insufficient_data, "triangle index needs at least 3 stars");
  }
  if (!(max_separation_deg > 0.0) || !(quantization_arcsec > 0.0)) {
    throw Error(Errc::invalid_argument, "triangle index needs positive separation and quantization");
  }
  TriangleIndex idx;
  idx.catalog_ = cat;
  idx.max_separation_ = deg_to_rad(max_separation_deg);
  idx.quantization_ = arcsec_to_rad(quantization_arcsec);

  const auto& stars = idx.catalog_.stars();
  for (std::size_t i = 0; i < stars.size(); ++i) {
    std::vector<std::size_t> nbrs;
    for (std::size_t j : idx.catalog_.cone(stars[i].dir, idx.max_separation_)) {
      if (j > i) nbrs.push_back(j);
    }
    for (std::size_t a = 0; a < nbrs.size(); ++a) {
      for (std::size_t b = a + 1; b < nbrs.size(); ++b) {
        const std::size_t j = nbrs[a], k = nbrs[b];
        if (angular_separation(stars[j].dir, stars[k].dir) > idx.max_separation_) continue;
        const std::array<std::size_t, 3> v{i, j, k};
        const TriangleShape shape = triangle_shape(stars[i].dir, stars[j].dir, stars[k].dir);
        IndexedTriangle tri;
        for (std::size_t m = 0; m < 3; ++m) {
          tri.star[m] = static_cast<std::uint32_t>(v[static_cast<std::size_t>(shape.vertex_order[m])]);
        }
        const auto ka = static_cast<std::int64_t>(std::floor(shape.sides[0] / idx.quantization_));
        const auto kb = static_cast<std::int64_t>(std::floor(shape.sides[1] / idx.quantization_));
        idx.table_[TriangleIndex::key(ka, kb)].push_back(tri);
        ++idx.triangle_count_;
      }
    }
  }
  return idx;
}

std::vector<IndexedTriangle> TriangleIndex::lookup(double longest, double middle,
                                                   int neighbor_steps) const {
  std::vector<IndexedTriangle> out;
  if (quantization_ <= 0.0) return out;
  const auto ka = static_cast<std::int64_t>(std::floor(longest / quantization_));
  const auto kb = static_cast<std::int64_t>(std::floor(middle / quantization_));
  for (std::int64_t da = -neighbor_steps; da <= neighbor_steps; ++da) {
    for (std::int64_t db = -neighbor_steps; db <= neighbor_steps; ++db) {
      if (ka + da < 0 || kb + db < 0) continue;
      const auto it = table_.find(key(ka + da, kb + db));
      if (it != table_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

}  // namespace evstar
