#include "evstar/cli.hpp"

#include "evstar/csv.hpp"
#include "evstar/earth.hpp"
#include "evstar/error.hpp"
#include "evstar/evaluate.hpp"
#include "evstar/groundtruth.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

namespace evstar::cli {

namespace {

namespace fs = std::filesystem;

struct Files {
  fs::path dir;
  fs::path events() const { return dir / "events.csv"; }
  fs::path pps_trigger() const { return dir / "pps_trigger.csv"; }
  fs::path pps_utc() const { return dir / "pps_utc.csv"; }
  fs::path truth() const { return dir / "truth.csv"; }
  fs::path ekf() const { return dir / "ekf.csv"; }
  fs::path astrometry() const { return dir / "astrometry.csv"; }
  fs::path failures() const { return dir / "astrometry_failures.csv"; }
  fs::path groundtruth() const { return dir / "groundtruth.csv"; }
  fs::path manifest(const std::string& cmd) const { return dir / fmt::format("manifest_{}.json", cmd); }
};

// Collects what a run read and wrote, for the manifest.
struct Trace {
  std::vector<fs::path> inputs;
  std::vector<fs::path> outputs;

  void in(const fs::path& p) {
    if (std::find(inputs.begin(), inputs.end(), p) == inputs.end()) inputs.push_back(p);
  }
  void out(const fs::path& p) {
    if (std::find(outputs.begin(), outputs.end(), p) == outputs.end()) outputs.push_back(p);
  }
};

void note(const std::string& msg) { std::fprintf(stderr, "evstar: %s\n", msg.c_str()); }

template <class F>
void write_file(Trace& tr, const fs::path& path, F&& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  csv::write_atomically(path, std::forward<F>(body));
  tr.out(path);
}

Catalog catalog_of(const RunConfig& c, Trace& tr) {
  if (c.catalog_path.empty()) throw Error(Errc::config, "catalog.path is required");
  tr.in(c.catalog_path);
  return load_catalog(c.catalog_path, c.mag_limit);
}

EopTable eop_of(const RunConfig& c, Trace& tr) {
  if (c.eop_path.empty()) throw Error(Errc::config, "eop.path is required");
  tr.in(c.eop_path);
  if (c.eop_path.extension() == ".csv") return parse_eop_csv(c.eop_path);
  return parse_finals2000A(c.eop_path);
}

UnitQuaternion scenario_pointing(const RunConfig& c) {
  return attitude_from_pointing({c.boresight_ra_deg, c.boresight_dec_deg}, deg_to_rad(c.roll_deg));
}

// Carries an attitude known at t_from to t_to assuming the camera is fixed to the ground.
UnitQuaternion carry(const EopTable& eop, const UnitQuaternion& q, const UtcInstant& t_from,
                     const UtcInstant& t_to) {
  return earth_attitude(eop, t_to) * earth_attitude(eop, t_from).inverse() * q;
}

std::vector<PpsAnchor> pps_of(const Files& f, Trace& tr) {
  tr.in(f.pps_trigger());
  tr.in(f.pps_utc());
  return read_pps_files(f.pps_trigger(), f.pps_utc());
}

std::vector<AttitudeEstimate> attitudes_of(const fs::path& p, Trace& tr) {
  tr.in(p);
  return read_attitude_csv(p);
}

void do_simulate(const RunConfig& c, const Files& f, Trace& tr) {
  const Catalog cat = catalog_of(c, tr);
  const EopTable eop = eop_of(c, tr);
  const auto traj = static_site_trajectory(scenario_pointing(c), c.start_utc, eop, c.sim.drift_dec_rate);
  const SimOutput sim = generate_events(traj, cat, c.camera, c.sim, c.start_utc, c.duration_s);
  if (sim.fov_always_empty) note("warning: no catalog star entered the field of view; events are noise only");

  write_file(tr, f.events(), [&](std::ostream& o) { write_events_csv(sim.events, o); });
  write_file(tr, f.pps_trigger(), [&](std::ostream& o) { write_trigger_csv(sim.pps, o); });
  write_file(tr, f.pps_utc(), [&](std::ostream& o) { write_utc_log_csv(sim.pps, o); });
  write_file(tr, f.truth(), [&](std::ostream& o) { write_attitude_csv(sim.truth, o); });
  note(fmt::format("simulate: {} events, {} PPS anchors, {} truth samples", sim.events.size(),
                   sim.pps.size(), sim.truth.size()));
}

UnitQuaternion initial_attitude(const RunConfig& c, const Files& f, const EopTable& eop,
                                const UtcInstant& t_first, Trace& tr) {
  UnitQuaternion q0;
  switch (c.init) {
    case InitMode::pointing:
      q0 = carry(eop, scenario_pointing(c), c.start_utc, t_first);
      break;
    case InitMode::truth: {
      const auto truth = attitudes_of(f.truth(), tr);
      const std::vector<AttitudeEstimate> at{{t_first, UnitQuaternion(), EstimateSource::ekf, std::nullopt}};
      const Alignment a = align_series(at, truth, 0.026);
      const AttitudeEstimate& s = truth[a.pairs.front().second];
      q0 = carry(eop, s.q, s.t, t_first);
      break;
    }
    case InitMode::astrometry: {
      const auto sol = attitudes_of(f.astrometry(), tr);
      if (sol.empty()) throw Error(Errc::lost_in_space, "no astrometry solution to initialize from");
      q0 = carry(eop, sol.front().q, sol.front().t, t_first);
      break;
    }
  }
  if (c.init_offset_arcsec != 0.0) {
    const Vec3 axis = Vec3(1.0, 1.0, 0.0).normalized();
    q0 = q0 * quat_from_rotation_vector(axis * arcsec_to_rad(c.init_offset_arcsec));
  }
  return q0;
}

void do_track(const RunConfig& c, const Files& f, Trace& tr) {
  const Catalog cat = catalog_of(c, tr);
  const EopTable eop = eop_of(c, tr);
  tr.in(f.events());
  const auto events = read_events_csv(f.events());
  const auto pps = pps_of(f, tr);
  const TimeMap map = build_time_map(pps);
  const UtcInstant t_first = map.anchors().front().t_utc;
  const UnitQuaternion q0 = initial_attitude(c, f, eop, t_first, tr);

  const TrackResult r = track_stream_detailed(events, pps, cat, c.camera, c.tracker, q0);
  write_file(tr, f.ekf(), [&](std::ostream& o) { write_attitude_csv(r.estimates, o); });
  note(fmt::format("track: {} estimates, {} updates, {}/{} events associated, {} skipped before first PPS",
                   r.estimates.size(), r.diag.updates, r.diag.associated, r.diag.events, r.skipped_events));
}

void do_solve(const RunConfig& c, const Files& f, Trace& tr) {
  const Catalog cat = catalog_of(c, tr);
  tr.in(f.events());
  const auto events = read_events_csv(f.events());
  const auto pps = pps_of(f, tr);
  const double max_sep_deg = rad_to_deg(2.0 * c.camera.half_diagonal_rad()) * 1.02;
  const TriangleIndex index = build_triangle_index(cat, max_sep_deg, c.index_quantization_arcsec);
  const SolveStreamResult r = solve_stream(events, pps, index, c.camera, c.astrometry);
  write_file(tr, f.astrometry(), [&](std::ostream& o) { write_attitude_csv(r.solutions, o); });
  write_file(tr, f.failures(), [&](std::ostream& o) { write_failures_csv(r.failures, o); });
  note(fmt::format("solve: {}/{} frames solved ({} index triangles)", r.solutions.size(), r.frames,
                   index.triangle_count()));
}

void do_groundtruth(const RunConfig& c, const Files& f, const fs::path& anchor_path,
                    const fs::path& times_path, const fs::path& out, Trace& tr) {
  const EopTable eop = eop_of(c, tr);
  const auto anchors = attitudes_of(anchor_path, tr);
  const MountTransform mount = anchor_mount(eop, anchors, c.anchor_index);
  std::vector<UtcInstant> times;
  for (const auto& e : times_path.empty() ? anchors : attitudes_of(times_path, tr)) times.push_back(e.t);
  const auto gt = gt_series(eop, mount, times);
  write_file(tr, out, [&](std::ostream& o) { write_attitude_csv(gt, o); });
  note(fmt::format("groundtruth: {} samples anchored at {}", gt.size(),
                   format_iso8601(anchors[c.anchor_index].t)));
  (void)f;
}

void do_evaluate(const RunConfig& c, const fs::path& est_path, const fs::path& gt_path,
                 const fs::path& failures_path, const fs::path& dir, const std::string& suffix,
                 Trace& tr) {
  const auto est = attitudes_of(est_path, tr);
  const auto gt = attitudes_of(gt_path, tr);
  const Alignment a = align_series(est, gt, c.max_dt_s);
  const auto samples = error_series(est, gt, a);

  std::optional<TimeWindow> window;
  if (c.window_start_s || c.window_end_s) {
    window = TimeWindow{c.start_utc.plus_seconds(c.window_start_s.value_or(-1e12)),
                        c.start_utc.plus_seconds(c.window_end_s.value_or(1e12))};
  }
  Report r = summarize(samples, window);
  r.unpaired = a.unpaired;
  if (!failures_path.empty()) {
    tr.in(failures_path);
    const auto failed = read_failures_csv(failures_path).size();
    const double total = static_cast<double>(est.size() + failed);
    if (total > 0) r.solve_success_rate = static_cast<double>(est.size()) / total;
  }
  write_file(tr, dir / fmt::format("errors{}.csv", suffix), [&](std::ostream& o) { write_errors_csv(samples, o); });
  write_file(tr, dir / fmt::format("report{}.txt", suffix), [&](std::ostream& o) { write_report_text(r, o); });
  write_file(tr, dir / fmt::format("report{}.csv", suffix), [&](std::ostream& o) { write_report_csv(r, o); });
  note(fmt::format("evaluate{}: {} samples, across RMSE {:.3f} arcsec, about RMSE {:.3f} arcsec", suffix,
                   r.samples, r.rmse_across, r.rmse_about));
}

fs::path anchor_series(const RunConfig& c, const Files& f) {
  return c.anchor_source == AnchorSource::ekf ? f.ekf() : f.astrometry();
}

void do_pipeline(const RunConfig& c, const Files& f, Trace& tr) {
  do_simulate(c, f, tr);
  do_solve(c, f, tr);
  do_track(c, f, tr);
  do_groundtruth(c, f, anchor_series(c, f), f.ekf(), f.groundtruth(), tr);
  do_evaluate(c, f.ekf(), f.groundtruth(), {}, f.dir, "", tr);
  if (!read_attitude_csv(f.astrometry()).empty()) {
    const fs::path gt_ast = f.dir / "groundtruth_astrometry.csv";
    do_groundtruth(c, f, anchor_series(c, f), f.astrometry(), gt_ast, tr);
    do_evaluate(c, f.astrometry(), gt_ast, f.failures(), f.dir, "_astrometry", tr);
  } else {
    note("pipeline: no astrometry solutions; skipping the astrometry evaluation");
  }
  // intermediate files are outputs of this run, not inputs
  std::erase_if(tr.inputs, [&](const fs::path& p) {
    return std::find(tr.outputs.begin(), tr.outputs.end(), p) != tr.outputs.end();
  });
}

int fail(int code, const std::string& msg) {
  std::fprintf(stderr, "evstar: error: %s\n", msg.c_str());
  return code;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Event-camera star tracker: simulate, track, plate-solve and evaluate against Earth rotation"};
  app.set_version_flag("--version", std::string("evstar ") + EVSTAR_VERSION);
  app.require_subcommand(1);

  std::string config, out_dir;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config, "Run configuration (YAML)")->required()->check(CLI::ExistingFile);
    sub->add_option("-o,--out", out_dir, "Override output_dir from the config");
  };

  auto* simulate = app.add_subcommand("simulate", "Render events, PPS logs and truth attitudes");
  auto* track = app.add_subcommand("track", "Run the EKF over events -> ekf.csv");
  auto* solve = app.add_subcommand("solve", "Plate-solve 1/6 s batch frames -> astrometry.csv");
  auto* groundtruth = app.add_subcommand("groundtruth", "Virtual-telescope ground truth from an anchor estimate");
  auto* evaluate = app.add_subcommand("evaluate", "Compare an estimate series with ground truth");
  auto* pipeline = app.add_subcommand("pipeline", "simulate, solve, track, groundtruth and evaluate");
  auto* synth = app.add_subcommand("synth-catalog", "Write a deterministic synthetic star field CSV");
  for (auto* s : {simulate, track, solve, groundtruth, evaluate, pipeline}) with_config(s);

  std::string anchor_file, times_file, gt_out, est_file, truth_file, failures_file, suffix;
  groundtruth->add_option("--anchor", anchor_file, "Attitude CSV holding the anchor estimate");
  groundtruth->add_option("--times", times_file, "Attitude CSV whose timestamps to sample (default: anchor series)");
  groundtruth->add_option("--output", gt_out, "Output CSV (default: <out>/groundtruth.csv)");
  evaluate->add_option("--estimate", est_file, "Estimate attitude CSV (default: <out>/ekf.csv)");
  evaluate->add_option("--truth", truth_file, "Ground-truth attitude CSV (default: <out>/groundtruth.csv)");
  evaluate->add_option("--failures", failures_file, "Astrometry failure sidecar, for the solve success rate");
  evaluate->add_option("--suffix", suffix, "Suffix for errors/report file names");

  double ra_min = 0, ra_max = 0, dec_min = 0, dec_max = 0, density = 0, mag_bright = 0, mag_faint = 0;
  std::uint64_t seed = 1;
  std::string synth_out;
  synth->add_option("--ra-min", ra_min, "deg")->required();
  synth->add_option("--ra-max", ra_max, "deg")->required();
  synth->add_option("--dec-min", dec_min, "deg")->required();
  synth->add_option("--dec-max", dec_max, "deg")->required();
  synth->add_option("--density", density, "stars per square degree")->required();
  synth->add_option("--mag-bright", mag_bright)->required();
  synth->add_option("--mag-faint", mag_faint)->required();
  synth->add_option("--seed", seed);
  synth->add_option("--output", synth_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      const Catalog cat = synthesize_field(ra_min, ra_max, dec_min, dec_max, density, mag_bright,
                                           mag_faint, seed);
      const fs::path p(synth_out);
      if (p.has_parent_path()) fs::create_directories(p.parent_path());
      csv::write_atomically(p, [&](std::ostream& o) { write_catalog_csv(cat, o); });
      note(fmt::format("synth-catalog: {} stars", cat.size()));
      return 0;
    }

    RunConfig c = load_run_config(config);
    if (!out_dir.empty()) c.output_dir = fs::absolute(out_dir);
    const Files f{c.output_dir};
    fs::create_directories(f.dir);
    Trace tr;
    std::string cmd;

    if (simulate->parsed()) {
      cmd = "simulate";
      do_simulate(c, f, tr);
    } else if (track->parsed()) {
      cmd = "track";
      do_track(c, f, tr);
    } else if (solve->parsed()) {
      cmd = "solve";
      do_solve(c, f, tr);
    } else if (groundtruth->parsed()) {
      cmd = "groundtruth";
      const fs::path anchor = anchor_file.empty() ? anchor_series(c, f) : fs::path(anchor_file);
      do_groundtruth(c, f, anchor, times_file, gt_out.empty() ? f.groundtruth() : fs::path(gt_out), tr);
    } else if (evaluate->parsed()) {
      cmd = "evaluate";
      do_evaluate(c, est_file.empty() ? f.ekf() : fs::path(est_file),
                  truth_file.empty() ? f.groundtruth() : fs::path(truth_file), failures_file, f.dir,
                  suffix, tr);
    } else {
      cmd = "pipeline";
      do_pipeline(c, f, tr);
    }
    write_manifest({cmd, c.config_path, tr.inputs, tr.outputs}, f.manifest(cmd));
    return 0;
  } catch (const Error& e) {
    return fail(1, fmt::format("{} ({})", e.what(), to_string(e.code())));
  } catch (const fs::filesystem_error& e) {
    return fail(1, e.what());
  }
}

}  // namespace evstar::cli
