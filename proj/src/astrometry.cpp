#include "evstar/astrometry.hpp"

#include "evstar/csv.hpp"
#include "evstar/error.hpp"
#include "evstar/wahba.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

namespace evstar {

void for_each_frame(const std::vector<Event>& events, int width, int height, double window_us,
                    const std::function<void(const BatchFrame&)>& sink) {
  if (width <= 0 || height <= 0 || !(window_us >= 1.0)) {
    throw Error(Errc::invalid_argument, "frame size and window must be positive");
  }
  if (events.empty()) return;
  const std::int64_t first = events.front().t_us;
  const std::int64_t last = events.back().t_us;

  BatchFrame f;
  f.width = width;
  f.height = height;
  f.counts.assign(static_cast<std::size_t>(width) * height, 0);
  std::int64_t k = 0;
  auto open = [&](std::int64_t idx) {
    for (std::uint32_t p : f.touched) f.counts[p] = 0;
    f.touched.clear();
    f.t_start = first + std::llround(static_cast<double>(idx) * window_us);
    f.t_end = first + std::llround(static_cast<double>(idx + 1) * window_us);
  };
  open(0);
  for (const Event& e : events) {
    while (e.t_us >= f.t_end) {
      sink(f);
      open(++k);
    }
    if (e.polarity <= 0 || e.x >= width || e.y >= height) continue;
    const std::uint32_t p = static_cast<std::uint32_t>(e.y) * static_cast<std::uint32_t>(width) + e.x;
    if (f.counts[p]++ == 0) f.touched.push_back(p);
  }
  if (f.t_end <= last + 1) sink(f);
}

std::vector<BatchFrame> accumulate_frames(const std::vector<Event>& events, int width, int height,
                                          double window_us) {
  std::vector<BatchFrame> out;
  for_each_frame(events, width, height, window_us, [&](const BatchFrame& f) { out.push_back(f); });
  return out;
}

std::vector<Centroid> extract_centroids(const BatchFrame& frame, double min_weight, double radius) {
  const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
  if (frame.counts.size() != n) throw Error(Errc::invalid_argument, "frame counts do not match its size");

  std::vector<std::uint32_t> seeds = frame.touched;
  if (seeds.empty()) {
    for (std::size_t p = 0; p < n; ++p) {
      if (frame.counts[p] > 0) seeds.push_back(static_cast<std::uint32_t>(p));
    }
  }
  std::sort(seeds.begin(), seeds.end());

  struct Blob {
    double w = 0, su = 0, sv = 0;
  };
  std::vector<Blob> blobs;
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s : seeds) {
    if (seen[s]) continue;
    Blob b;
    seen[s] = 1;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::uint32_t p = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(p % frame.width);
      const int y = static_cast<int>(p / frame.width);
      const double c = frame.counts[p];
      b.w += c;
      b.su += c * x;
      b.sv += c * y;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= frame.width || ny >= frame.height) continue;
          const auto q = static_cast<std::uint32_t>(ny * frame.width + nx);
          if (!seen[q] && frame.counts[q] > 0) {
            seen[q] = 1;
            stack.push_back(q);
          }
        }
      }
    }
    blobs.push_back(b);
  }

  // merge fragments of one star until every pair is farther apart than radius
  const double r2 = radius * radius;
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < blobs.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < blobs.size(); ++j) {
        const double du = blobs[i].su / blobs[i].w - blobs[j].su / blobs[j].w;
        const double dv = blobs[i].sv / blobs[i].w - blobs[j].sv / blobs[j].w;
        if (du * du + dv * dv <= r2) {
          blobs[i].w += blobs[j].w;
          blobs[i].su += blobs[j].su;
          blobs[i].sv += blobs[j].sv;
          blobs.erase(blobs.begin() + static_cast<std::ptrdiff_t>(j));
          merged = true;
          break;
        }
      }
    }
  }

  std::vector<Centroid> out;
  for (const Blob& b : blobs) {
    if (b.w >= min_weight) out.push_back({b.su / b.w, b.sv / b.w, b.w});
  }
  std::sort(out.begin(), out.end(), [](const Centroid& a, const Centroid& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.v != b.v ? a.v < b.v : a.u < b.u;
  });
  return out;
}

void AstrometryConfig::validate() const {
  if (!(window_us >= 1.0) || !(min_weight > 0.0) || !(merge_radius >= 0.0) || max_centroids < 3 ||
      !(match_radius > 0.0) || !(side_tolerance > 0.0) || !(min_match_fraction > 0.0) ||
      min_match_fraction > 1.0 || !(accept_fraction > 0.0) || max_candidates < 1) {
    throw Error(Errc::invalid_argument, "invalid astrometry parameters");
  }
}

std::string_view to_string(SolveFailure f) {
  switch (f) {
    case SolveFailure::insufficient_stars: return "insufficient-stars";
    case SolveFailure::no_match: return "no-match";
    case SolveFailure::verification_failed: return "verification-failed";
  }
  return "no-match";
}

namespace {

struct Verification {
  int matched = 0;
  double residual_sum = 0.0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // centroid, catalog index
};

Verification verify(const UnitQuaternion& q, const std::vector<Centroid>& centroids,
                    const Catalog& cat, const CameraModel& cam, double match_radius) {
  Verification v;
  const auto visible = stars_near_fov(cat, q, cam, match_radius);
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    double best = match_radius * match_radius;
    std::ptrdiff_t hit = -1;
    for (const StarInView& s : visible) {
      const double du = s.pixel.u - centroids[i].u;
      const double dv = s.pixel.v - centroids[i].v;
      const double d2 = du * du + dv * dv;
      if (d2 <= best) {
        best = d2;
        hit = cat.find(s.star.id);
      }
    }
    if (hit >= 0) {
      ++v.matched;
      v.residual_sum += std::sqrt(best);
      v.pairs.emplace_back(i, static_cast<std::size_t>(hit));
    }
  }
  return v;
}

double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

}  // namespace

SolveOutcome plate_solve(const std::vector<Centroid>& centroids, const TriangleIndex& index,
                         const CameraModel& cam, const AstrometryConfig& cfg) {
  cfg.validate();
  SolveOutcome out;
  if (centroids.size() < 3) {
    out.failure = SolveFailure::insufficient_stars;
    return out;
  }
  const Catalog& cat = index.catalog();
  const auto& stars = cat.stars();
  const double tol = cfg.side_tolerance * std::atan(1.0 / cam.focal_px());
  const int steps = std::max(1, static_cast<int>(std::ceil(tol / index.quantization())));
  const std::size_t n = std::min(centroids.size(), static_cast<std::size_t>(cfg.max_centroids));
  std::vector<Vec3> body(n);
  for (std::size_t i = 0; i < n; ++i) body[i] = unproject(cam, {centroids[i].u, centroids[i].v});

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  const auto total = static_cast<double>(centroids.size());
  int candidates = 0;
  bool any_shape_match = false;
  std::optional<Verification> best;
  UnitQuaternion best_q;

  for (std::size_t i = 0; i < n && candidates < cfg.max_candidates; ++i) {
    for (std::size_t j = i + 1; j < n && candidates < cfg.max_candidates; ++j) {
      for (std::size_t k = j + 1; k < n && candidates < cfg.max_candidates; ++k) {
        const TriangleShape shape = triangle_shape(body[i], body[j], body[k]);
        if (shape.sides[0] > index.max_separation() + tol || shape.sides[2] < 4.0 * tol) continue;
        const std::array<std::size_t, 3> ids{i, j, k};
        std::array<Vec3, 3> b;
        for (int m = 0; m < 3; ++m) b[m] = body[ids[shape.vertex_order[m]]];
        const double b_hand = triple(b[0], b[1], b[2]);

        for (const IndexedTriangle& tri : index.lookup(shape.sides[0], shape.sides[1], steps)) {
          for (const auto& perm : kPerms) {
            std::array<Vec3, 3> c;
            for (int m = 0; m < 3; ++m) c[m] = stars[tri.star[perm[m]]].dir;
            bool ok = (triple(c[0], c[1], c[2]) > 0) == (b_hand > 0);
            for (int m = 0; m < 3 && ok; ++m) {
              const double cs = angular_separation(c[(m + 1) % 3], c[(m + 2) % 3]);
              const double bs = angular_separation(b[(m + 1) % 3], b[(m + 2) % 3]);
              ok = std::abs(cs - bs) <= tol;
            }
            if (!ok) continue;
            any_shape_match = true;
            const UnitQuaternion q = solve_wahba({b[0], b[1], b[2]}, {c[0], c[1], c[2]});
            Verification v = verify(q, centroids, cat, cam, cfg.match_radius);
            ++candidates;
            const bool better = !best || v.matched > best->matched ||
                                (v.matched == best->matched && v.residual_sum < best->residual_sum);
            if (better) {
              best = std::move(v);
              best_q = q;
            }
            if (best->matched >= cfg.accept_fraction * total) goto done;
            if (candidates >= cfg.max_candidates) goto done;
          }
        }
      }
    }
  }
done:
  if (!best || best->matched < 3 || best->matched < cfg.min_match_fraction * total) {
    out.failure = any_shape_match ? SolveFailure::verification_failed : SolveFailure::no_match;
    return out;
  }

  std::vector<Vec3> bd, rd;
  for (const auto& [ci, si] : best->pairs) {
    bd.push_back(unproject(cam, {centroids[ci].u, centroids[ci].v}));
    rd.push_back(stars[si].dir);
  }
  UnitQuaternion q = solve_wahba(bd, rd);
  Verification fin = verify(q, centroids, cat, cam, cfg.match_radius);
  if (fin.matched < best->matched) {
    q = best_q;
    fin = *best;
  }
  PlateSolution sol;
  sol.q = q;
  sol.matched = fin.matched;
  sol.centroids = static_cast<int>(centroids.size());
  sol.mean_residual_px = fin.residual_sum / fin.matched;
  out.solution = sol;
  return out;
}

SolveStreamResult solve_stream(const std::vector<Event>& events, const std::vector<PpsAnchor>& pps,
                               const TriangleIndex& index, const CameraModel& cam,
                               const AstrometryConfig& cfg) {
  cfg.validate();
  const TimeMap map = build_time_map(pps);
  SolveStreamResult r;
  for_each_frame(events, cam.width, cam.height, cfg.window_us, [&](const BatchFrame& f) {
    ++r.frames;
    const auto cents = extract_centroids(f, cfg.min_weight, cfg.merge_radius);
    const SolveOutcome o = plate_solve(cents, index, cam, cfg);
    if (o.solution) {
      const double mid = 0.5 * static_cast<double>(f.t_start + f.t_end);
      r.solutions.push_back({map.to_utc(mid), o.solution->q, EstimateSource::astrometry, std::nullopt});
    } else {
      r.failures.push_back({f.t_start, o.failure});
    }
  });
  return r;
}

void write_failures_csv(const std::vector<FrameFailure>& failures, std::ostream& out) {
  out << "t_start_us,reason\n";
  for (const auto& f : failures) out << fmt::format("{},{}\n", f.t_start_us, to_string(f.reason));
}

std::vector<FrameFailure> read_failures_csv(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  csv::Reader r(in, path.string());
  r.expect_header("t_start_us,reason");
  std::vector<FrameFailure> out;
  std::vector<std::string_view> f;
  while (r.next(f)) {
    const std::string where = r.where();
    if (f.size() != 2) throw Error(Errc::parse, where + ": expected 2 fields");
    FrameFailure ff;
    ff.t_start_us = csv::to_int(f[0], where);
    bool known = false;
    for (auto reason : {SolveFailure::insufficient_stars, SolveFailure::no_match,
                        SolveFailure::verification_failed}) {
      if (to_string(reason) == f[1]) {
        ff.reason = reason;
        known = true;
      }
    }
    if (!known) throw Error(Errc::parse, fmt::format("{}: unknown reason '{}'", where, f[1]));
    out.push_back(ff);
  }
  return out;
}

}  // namespace evstar
