#include "evstar/evaluate.hpp"

#include "evstar/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace evstar {

Alignment align_series(const std::vector<AttitudeEstimate>& est,
                       const std::vector<AttitudeEstimate>& gt, double max_dt) {
  if (!(max_dt >= 0.0)) throw Error(Errc::invalid_argument, "max_dt must be nonnegative");
  Alignment a;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const UtcInstant& t = est[i].t;
    const auto it = std::lower_bound(gt.begin(), gt.end(), t,
                                     [](const AttitudeEstimate& g, const UtcInstant& x) { return g.t < x; });
    std::ptrdiff_t best = -1;
    double best_dt = 0.0;
    if (it != gt.begin()) {
      best = std::prev(it) - gt.begin();
      best_dt = t - std::prev(it)->t;
    }
    if (it != gt.end()) {
      const double d = t - it->t;
      if (best < 0 || std::abs(d) < std::abs(best_dt)) {
        best = it - gt.begin();
        best_dt = d;
      }
    }
    if (best >= 0 && std::abs(best_dt) <= max_dt) {
      a.pairs.emplace_back(i, static_cast<std::size_t>(best));
      a.dt.push_back(best_dt);
    } else {
      ++a.unpaired;
    }
  }
  if (a.pairs.empty()) throw Error(Errc::empty_alignment, "no estimate has ground truth within max_dt");
  return a;
}

ErrorSample error_sample(const UnitQuaternion& est_q, const UnitQuaternion& gt_q, const Vec3& boresight) {
  ErrorSample s;
  const SwingTwist st = swing_twist_decompose(gt_q.inverse() * est_q, boresight);
  s.across = rad_to_arcsec(st.across);
  s.about = rad_to_arcsec(st.about);
  s.roll_err = s.about;

  const SkyCoord e = unit_to_skycoord(est_q.rotate(boresight));
  const SkyCoord g = unit_to_skycoord(gt_q.rotate(boresight));
  double dra = std::remainder(e.ra_deg - g.ra_deg, 360.0);
  s.ra_err = dra * 3600.0 * std::cos(deg_to_rad(g.dec_deg));
  s.dec_err = (e.dec_deg - g.dec_deg) * 3600.0;
  return s;
}

std::vector<ErrorSample> error_series(const std::vector<AttitudeEstimate>& est,
                                      const std::vector<AttitudeEstimate>& gt,
                                      const Alignment& alignment, const Vec3& boresight) {
  std::vector<ErrorSample> out;
  out.reserve(alignment.pairs.size());
  for (const auto& [i, j] : alignment.pairs) {
    ErrorSample s = error_sample(est[i].q, gt[j].q, boresight);
    s.t = est[i].t;
    out.push_back(s);
  }
  return out;
}

namespace {

struct Acc {
  double sum = 0, sum_abs = 0, max_abs = 0, sum_sq = 0;
  void add(double x) {
    sum += x;
    sum_abs += std::abs(x);
    max_abs = std::max(max_abs, std::abs(x));
    sum_sq += x * x;
  }
  AxisStats stats(double n) const { return {sum / n, sum_abs / n, max_abs}; }
};

}  // namespace

Report summarize(const std::vector<ErrorSample>& samples, const std::optional<TimeWindow>& window) {
  std::vector<const ErrorSample*> use;
  for (const auto& s : samples) {
    if (!window || (!(s.t < window->begin) && !(window->end < s.t))) use.push_back(&s);
  }
  if (use.empty()) throw Error(Errc::insufficient_data, "no error samples in the evaluation window");

  Acc ra, dec, roll, across, about;
  for (const ErrorSample* s : use) {
    ra.add(s->ra_err);
    dec.add(s->dec_err);
    roll.add(s->roll_err);
    across.add(s->across);
    about.add(s->about);
  }
  Report r;
  const auto n = static_cast<double>(use.size());
  r.samples = use.size();
  r.rmse_across = std::sqrt(across.sum_sq / n);
  r.rmse_about = std::sqrt(about.sum_sq / n);
  r.ra = ra.stats(n);
  r.dec = dec.stats(n);
  r.roll = roll.stats(n);
  r.across = across.stats(n);
  r.about = about.stats(n);

  if (use.size() >= 2) {
    // centered sums keep the fit well conditioned over long series
    const UtcInstant t0 = use.front()->t;
    double mx = 0, my = 0;
    for (const ErrorSample* s : use) {
      mx += (s->t - t0) / 3600.0;
      my += s->dec_err;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (const ErrorSample* s : use) {
      const double x = (s->t - t0) / 3600.0 - mx;
      sxx += x * x;
      sxy += x * (s->dec_err - my);
    }
    if (sxx > 0.0) {
      const double slope = sxy / sxx;
      double ss = 0;
      for (const ErrorSample* s : use) {
        const double x = (s->t - t0) / 3600.0 - mx;
        const double res = s->dec_err - my - slope * x;
        ss += res * res;
      }
      r.dec_drift_rate = slope;
      r.dec_drift_residual_rms = std::sqrt(ss / n);
    }
  }
  return r;
}

void write_errors_csv(const std::vector<ErrorSample>& samples, std::ostream& out) {
  out << "utc_iso8601,ra_err_as,dec_err_as,roll_err_as,across_as,about_as\n";
  for (const auto& s : samples) {
    out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", format_iso8601(s.t), s.ra_err,
                       s.dec_err, s.roll_err, s.across, s.about);
  }
}

namespace {

std::vector<std::pair<std::string, std::string>> report_fields(const Report& r) {
  auto num = [](double x) { return fmt::format("{:.6f}", x); };
  auto opt = [&](const std::optional<double>& x) { return x ? num(*x) : std::string("nan"); };
  std::vector<std::pair<std::string, std::string>> f{
      {"samples", std::to_string(r.samples)},
      {"unpaired", std::to_string(r.unpaired)},
      {"rmse_across_as", num(r.rmse_across)},
      {"rmse_about_as", num(r.rmse_about)},
  };
  const std::pair<const char*, const AxisStats*> axes[] = {
      {"ra", &r.ra}, {"dec", &r.dec}, {"roll", &r.roll}, {"across", &r.across}, {"about", &r.about}};
  for (const auto& [name, a] : axes) {
    f.emplace_back(fmt::format("mean_{}_as", name), num(a->mean));
    f.emplace_back(fmt::format("mean_abs_{}_as", name), num(a->mean_abs));
    f.emplace_back(fmt::format("max_abs_{}_as", name), num(a->max_abs));
  }
  f.emplace_back("dec_drift_rate_as_per_h", opt(r.dec_drift_rate));
  f.emplace_back("dec_drift_residual_rms_as", opt(r.dec_drift_residual_rms));
  f.emplace_back("solve_success_rate", opt(r.solve_success_rate));
  return f;
}

}  // namespace

void write_report_text(const Report& r, std::ostream& out) {
  for (const auto& [k, v] : report_fields(r)) out << k << '=' << v << '\n';
}

void write_report_csv(const Report& r, std::ostream& out) {
  const auto f = report_fields(r);
  for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i].first;
  out << '\n';
  for (std::size_t i = 0; i < f.size(); ++i) out << (i ? "," : "") << f[i].second;
  out << '\n';
}

}  // namespace evstar
