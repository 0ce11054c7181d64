#include "superarrival/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <string_view>

#include <nlohmann/json.hpp>

#include "superarrival/errors.hpp"
#include "superarrival/kernels.hpp"

namespace superarrival {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const char* header)
      : path_(path), file_(std::fopen(path.c_str(), "w")) {
    if (!file_) throw IoError("cannot open '" + path.string() + "' for writing");
    line(header);
  }

  void line(const std::string& text) {
    if (std::fputs(text.c_str(), file_.get()) < 0 || std::fputc('\n', file_.get()) == EOF)
      throw IoError("write failed on '" + path_.string() + "'");
  }

  void close() {
    if (std::fclose(file_.release()) != 0) throw IoError("cannot close '" + path_.string() + "'");
  }

 private:
  struct Closer {
    void operator()(std::FILE* f) const { std::fclose(f); }
  };
  fs::path path_;
  std::unique_ptr<std::FILE, Closer> file_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void write_series(const fs::path& path, const ProbabilitySeries& s) {
  CsvWriter csv(path, "step,t,probability");
  for (std::size_t k = 0; k < s.values.size(); ++k)
    csv.line(std::to_string(s.steps[k]) + ',' + fmt17(s.times[k]) + ',' + fmt17(s.values[k]));
  csv.close();
}

void write_qpotential(const fs::path& path, const Grid& grid, std::span<const double> q,
                      std::span<const std::uint8_t> mask) {
  CsvWriter csv(path, "x,Q");
  for (std::size_t i = 0; i < grid.n_points(); ++i)
    if (!mask[i]) csv.line(fmt17(grid.x(i)) + ',' + fmt17(q[i]));
  csv.close();
}

void write_trajectories(const fs::path& path, const std::vector<Trajectory>& paths,
                        const VelocityField& field, const std::vector<bool>& selected) {
  CsvWriter csv(path, "particle,step,t,x");
  for (std::size_t p = 0; p < paths.size(); ++p) {
    if (!selected[p]) continue;
    const auto& x = paths[p].x;
    for (std::size_t k = 0; k < x.size(); ++k)
      csv.line(std::to_string(p) + ',' + std::to_string(field.steps[k]) + ',' +
               fmt17(field.times[k]) + ',' + fmt17(x[k]));
  }
  csv.close();
}

void write_betas(const fs::path& path, const std::vector<ParticleBeta>& betas) {
  CsvWriter csv(path, "particle,x_init,t_ip,t_i,beta");
  for (const auto& b : betas)
    csv.line(std::to_string(b.particle) + ',' + fmt17(b.x_init) + ',' + fmt17(b.t_ip) + ',' +
             fmt17(b.t_i) + ',' + fmt17(b.beta));
  csv.close();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path, std::string_view header,
                                               std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw IoError("unexpected header in '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != columns) throw IoError("malformed row in '" + path.string() + "'");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::size_t nearest_frame(const std::vector<std::size_t>& steps, std::size_t step) {
  const auto it = std::lower_bound(steps.begin(), steps.end(), step);
  if (it == steps.end()) return steps.size() - 1;
  if (it == steps.begin()) return 0;
  const auto hi = static_cast<std::size_t>(it - steps.begin());
  return (*it - step) <= (step - steps[hi - 1]) ? hi : hi - 1;
}

std::vector<std::size_t> probe_frames(const std::vector<std::size_t>& steps, std::size_t n_steps) {
  std::vector<std::size_t> frames;
  for (std::size_t k = 1; k <= 3; ++k) frames.push_back(nearest_frame(steps, k * n_steps / 4));
  return frames;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double m = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    m = 0.5 * (m + lower);
  }
  return m;
}

double q_at(const Grid& grid, std::span<const Complex> psi, double node_floor, double x) {
  std::vector<double> q(grid.n_points());
  std::vector<std::uint8_t> mask(grid.n_points());
  quantum_potential_row(grid, psi, node_floor, q, mask);
  const double s = (x - grid.x_min()) / grid.dx();
  const auto i = std::min(static_cast<std::size_t>(s), grid.n_points() - 2);
  const double f = s - static_cast<double>(i);
  if (mask[i] || mask[i + 1]) return std::numeric_limits<double>::quiet_NaN();
  return (1.0 - f) * q[i] + f * q[i + 1];
}

/// Q snapshots of `record` at `steps` that it holds, plus the tracked
/// leftmost well left of the barrier.
void emit_snapshots(const ResolvedConfig& rc, const PropagationRecord& record,
                    const std::vector<std::size_t>& steps, const fs::path& out, RunReport& report) {
  const Grid& g = rc.grid;
  const double x_upper = rc.perturbed.center - 0.5 * rc.perturbed.width;
  std::vector<std::vector<double>> wells;
  std::vector<std::size_t> tracked_steps;
  for (auto step : steps) {
    const auto k = record.frame_of_step(step);
    if (k == record.size()) {
      report.warnings.push_back("step " + std::to_string(step) + " not recorded; no Q snapshot");
      continue;
    }
    std::vector<double> q(g.n_points());
    std::vector<std::uint8_t> mask(g.n_points());
    quantum_potential_row(g, record.frames[k], rc.config.node_floor, q, mask);
    const auto name = "qpotential_step" + std::to_string(step) + ".csv";
    write_qpotential(out / name, g, q, mask);
    report.files.push_back(name);
    auto found = quantum_potential_wells(g, record.frames[k], q, mask, x_upper);
    if (found.empty()) continue;  // e.g. the initial Gaussian, whose Q has no minimum
    wells.push_back(std::move(found));
    tracked_steps.push_back(step);
  }
  if (wells.empty()) return;
  const auto track = track_leftmost_well(wells);
  for (std::size_t k = 0; k < track.size(); ++k)
    report.diagnostics.leftmost_well.push_back({tracked_steps[k], track[k]});
}

void fill_header(const ResolvedConfig& rc, const BarrierSchedule& perturbed, RunReport& r) {
  r.experiment = rc.config.experiment;
  r.config = config_entries(rc.config);
  r.energy = rc.energy;
  r.barrier_height = rc.barrier_height;
  r.t_p = perturbed.onset;
  r.epsilon = perturbed.duration;
  r.detector_kind = rc.detector_kind;
  r.detector_position = rc.detector_position;
  r.distance = rc.distance;
  r.n_steps = rc.n_steps;
  r.boundary_tail = rc.boundary_tail;
}

/// The unperturbed half of a paired run, shared across a sweep.
struct Reference {
  PropagationRecord record;
  ProbabilitySeries series;
  std::optional<VelocityField> field;
  double seconds_propagation = 0.0;
  double seconds_fields = 0.0;
};

Reference make_reference(const ResolvedConfig& rc, bool with_field) {
  auto start = Clock::now();
  auto record = propagate(rc.psi0, rc.reference, rc.n_steps, rc.plan);
  const double propagation_s = seconds_since(start);
  auto series = detector_series(record, rc.detector_kind, rc.detector_position);
  std::optional<VelocityField> field;
  start = Clock::now();
  if (with_field) field = velocity_field(record, rc.config.node_floor);
  return {std::move(record), std::move(series), std::move(field), propagation_s,
          seconds_since(start)};
}

void add_window(const ResolvedConfig& rc, const BarrierSchedule& perturbed,
                const ProbabilitySeries& sp, const ProbabilitySeries& ss, RunReport& r) {
  r.window = detect_window(sp, ss, {rc.config.threshold, rc.config.persistence});
  if (!r.window) {
    r.warnings.push_back("no superarrival detected");
    return;
  }
  r.ordering_holds = ordering_holds(*r.window, perturbed.onset);
  try {
    r.signal = signal_velocity(*r.window, perturbed, rc.distance);
  } catch (const DegenerateTiming& e) {
    r.warnings.push_back(e.what());
  }
}

void write_report(const fs::path& out, RunReport& report) {
  report.files.push_back("report.json");
  write_text(out / "report.json", report_json(report));
}

RunReport reflection_pipeline(const ResolvedConfig& rc, const BarrierSchedule& perturbed,
                              const Reference& ref, const fs::path& out, bool extended) {
  const auto start = Clock::now();
  const Grid& g = rc.grid;
  const auto& cfg = rc.config;
  RunReport r;
  fill_header(rc, perturbed, r);
  if (rc.boundary_tail > 1e-12)
    r.warnings.push_back("initial packet tail outside the box is " + fmt17(rc.boundary_tail));
  ensure_directory(out);

  auto t0 = Clock::now();
  const auto rec = propagate(rc.psi0, perturbed, rc.n_steps, rc.plan);
  r.timing.propagation_s = ref.seconds_propagation + seconds_since(t0);
  r.frames = rec.size();
  r.norm_drift_static = ref.record.norm_drift;
  r.norm_drift_perturbed = rec.norm_drift;

  const auto sp = detector_series(rec, rc.detector_kind, rc.detector_position);
  write_series(out / "series_static.csv", ref.series);
  write_series(out / "series_perturbed.csv", sp);
  r.files.insert(r.files.end(), {"series_static.csv", "series_perturbed.csv"});
  add_window(rc, perturbed, sp, ref.series, r);
  r.diagnostics.final_static_probability = ref.series.values.back();
  r.diagnostics.final_perturbed_probability = sp.values.back();

  emit_snapshots(rc, rec, cfg.snapshot_steps, out, r);
  r.diagnostics.q_at_x0_initial = q_at(g, rc.psi0.amplitudes, cfg.node_floor, rc.packet.x0);

  t0 = Clock::now();
  const auto vp = velocity_field(rec, cfg.node_floor);
  r.timing.fields_s = ref.seconds_fields + seconds_since(t0);

  t0 = Clock::now();
  const auto init = sample_initial_positions(rc.packet, cfg.N, cfg.sampling, cfg.seed, &g);
  const auto ens = superarrival_betas(*ref.field, vp, r.window, init.positions,
                                      rc.detector_position, ArrivalSide::left);
  r.timing.trajectories_s = seconds_since(t0);

  BetaSummary beta;
  beta.particles = ens.size();
  beta.rejected_samples = init.rejected;
  beta.flagged = ens.flagged;
  if (r.window) {
    beta.mean = ens.beta_mean;
    beta.kept = ens.betas.size();
    beta.excluded = ens.excluded.size();
    beta.negative_outside_window = ens.negative_outside_window;
    beta.all_kept_positive = ens.all_kept_positive;
  } else {
    beta.mean = std::numeric_limits<double>::quiet_NaN();
  }
  r.beta = beta;
  write_betas(out / "betas.csv", r.window ? ens.betas : std::vector<ParticleBeta>{});
  r.files.push_back("betas.csv");

  std::vector<bool> selected(ens.size(), false);
  for (std::size_t p = 0; p < ens.size(); p += cfg.trajectory_stride) selected[p] = true;
  if (r.window)
    for (const auto& b : ens.betas) selected[b.particle] = true;
  write_trajectories(out / "trajectories_static.csv", ens.reference, *ref.field, selected);
  write_trajectories(out / "trajectories_perturbed.csv", ens.perturbed, vp, selected);
  r.files.insert(r.files.end(), {"trajectories_static.csv", "trajectories_perturbed.csv"});

  auto& d = r.diagnostics;
  d.no_crossing_static = ordering_preserved(ens.reference);
  d.no_crossing_perturbed = ordering_preserved(ens.perturbed);
  const auto probes = probe_frames(rec.steps, rc.n_steps);
  for (auto k : probes) {
    std::vector<double> xs;
    for (const auto& t : ens.perturbed)
      if (t.x.size() > k) xs.push_back(t.x[k]);
    d.ks_distance.push_back({rec.steps[k], ks_distance(xs, g, rec.frames[k])});
  }

  // Newton-form check on the reference trajectories of the written particles
  // (every stride-th one plus the contributing ones).
  const auto qs = quantum_potential(ref.record, cfg.node_floor);
  std::vector<double> residuals;
  for (std::size_t p = 0; p < ens.size(); ++p) {
    if (!selected[p]) continue;
    for (const auto& s : newton_residual(*ref.field, qs, ens.reference[p], rc.reference))
      if (!s.skipped) residuals.push_back(s.residual);
  }
  d.newton_samples = residuals.size();
  if (!residuals.empty()) d.newton_residual_median = median(std::move(residuals));

  if (extended) {
    double worst = 0.0;
    std::vector<double> v(g.n_points());
    std::vector<std::uint8_t> mask(g.n_points());
    for (auto k : probes) {
      velocity_row(g, rec.frames[k], cfg.node_floor, v, mask);
      const auto vphase = phase_gradient_velocity(g, rec.frames[k], cfg.node_floor);
      for (std::size_t i = 0; i < g.n_points(); ++i)
        if (!mask[i] && !std::isnan(vphase[i]))
          worst = std::max(worst, std::abs(v[i] - vphase[i]) / (std::abs(v[i]) + 1.0));
      if (k > 0 && k + 1 < rec.size()) {
        const auto c = continuity_residual(rec, k);
        d.continuity_relative.push_back({rec.steps[k], c.residual_l2 / c.drho_dt_l2});
      }
    }
    d.velocity_consistency_max = worst;
  }

  r.timing.total_s = ref.seconds_propagation + ref.seconds_fields + seconds_since(start);
  r.timing.threads = kernels::max_threads();
  write_report(out, r);
  return r;
}

std::string epsilon_label(const TimeValue& eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps.amount);
  return eps.in_steps ? std::string(buf) : "t" + std::string(buf);
}

bool strictly_decreasing(const std::vector<std::optional<double>>& v) {
  if (v.size() < 2) return false;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!v[i] || std::isnan(*v[i])) return false;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(*v[i] < *v[i - 1])) return false;
  return true;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json config_json(const std::vector<std::pair<std::string, std::string>>& entries) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : entries) j[k] = v;
  return j;
}

ordered_json step_values(const std::vector<StepValue>& values) {
  ordered_json j = ordered_json::array();
  for (const auto& s : values) j.push_back({{"step", s.step}, {"value", s.value}});
  return j;
}

ordered_json timing_json(const Timing& t) {
  return {{"propagation_s", t.propagation_s},
          {"fields_s", t.fields_s},
          {"trajectories_s", t.trajectories_s},
          {"total_s", t.total_s},
          {"threads", t.threads}};
}

ordered_json run_json(const RunReport& r) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = std::string(to_string(r.experiment));
  j["config"] = config_json(r.config);
  j["derived"] = {{"energy", r.energy},
                  {"barrier_height", r.barrier_height},
                  {"t_p", r.t_p},
                  {"epsilon", r.epsilon},
                  {"detector_kind", std::string(to_string(r.detector_kind))},
                  {"detector_position", r.detector_position},
                  {"distance", r.distance},
                  {"n_steps", r.n_steps},
                  {"frames", r.frames},
                  {"boundary_tail", r.boundary_tail}};
  j["superarrival_detected"] = r.superarrival_detected();
  if (r.window) {
    const auto& w = *r.window;
    j["window"] = {{"t_d", w.t_d}, {"t_c", w.t_c}, {"delta_t", w.delta_t}, {"eta", w.eta},
                   {"I_p", w.I_p}, {"I_s", w.I_s}, {"onset_index", w.onset_index},
                   {"crossing_index", w.crossing_index}, {"source", "series_static.csv, series_perturbed.csv"}};
  } else {
    j["window"] = nullptr;
  }
  j["ordering_holds"] = r.ordering_holds;
  if (r.signal) {
    j["signal_velocity"] = {{"v_e", r.signal->v_e}, {"distance", r.signal->distance},
                            {"t_d", r.signal->t_d}, {"t_p", r.signal->t_p},
                            {"epsilon", r.signal->epsilon}};
  } else {
    j["signal_velocity"] = nullptr;
  }
  if (r.beta) {
    const auto& b = *r.beta;
    j["beta"] = {{"mean", b.mean}, {"kept", b.kept}, {"excluded", b.excluded},
                 {"flagged", b.flagged}, {"negative_outside_window", b.negative_outside_window},
                 {"all_kept_positive", b.all_kept_positive}, {"particles", b.particles},
                 {"rejected_samples", b.rejected_samples}, {"source", "betas.csv"}};
  } else {
    j["beta"] = nullptr;
  }
  j["norm_drift"] = {{"static", r.norm_drift_static}, {"perturbed", r.norm_drift_perturbed}};

  const auto& d = r.diagnostics;
  ordered_json dj;
  dj["no_crossing_static"] = d.no_crossing_static ? ordered_json(*d.no_crossing_static) : ordered_json(nullptr);
  dj["no_crossing_perturbed"] =
      d.no_crossing_perturbed ? ordered_json(*d.no_crossing_perturbed) : ordered_json(nullptr);
  dj["ks_distance"] = step_values(d.ks_distance);
  dj["newton_residual_median"] = optional_number(d.newton_residual_median);
  dj["newton_samples"] = d.newton_samples;
  dj["leftmost_well"] = step_values(d.leftmost_well);
  dj["q_at_x0_initial"] = optional_number(d.q_at_x0_initial);
  dj["velocity_consistency_max"] = optional_number(d.velocity_consistency_max);
  dj["continuity_relative"] = step_values(d.continuity_relative);
  dj["final_static_probability"] = optional_number(d.final_static_probability);
  dj["final_perturbed_probability"] = optional_number(d.final_perturbed_probability);
  j["diagnostics"] = dj;
  j["files"] = r.files;
  j["warnings"] = r.warnings;
  j["timing"] = timing_json(r.timing);
  return j;
}

}  // namespace

RunReport run_reflection_lowering(const ResolvedConfig& rc, const fs::path& out) {
  const auto ref = make_reference(rc, true);
  return reflection_pipeline(rc, rc.perturbed, ref, out, false);
}

RunReport run_trajectories(const ResolvedConfig& rc, const fs::path& out) {
  const auto ref = make_reference(rc, true);
  return reflection_pipeline(rc, rc.perturbed, ref, out, true);
}

RunReport run_transmission_raising(const ResolvedConfig& rc, const fs::path& out) {
  const auto start = Clock::now();
  RunReport r;
  fill_header(rc, rc.perturbed, r);
  if (rc.boundary_tail > 1e-12)
    r.warnings.push_back("initial packet tail outside the box is " + fmt17(rc.boundary_tail));
  ensure_directory(out);

  const auto ref = make_reference(rc, false);
  const auto t0 = Clock::now();
  const auto rec = propagate(rc.psi0, rc.perturbed, rc.n_steps, rc.plan);
  r.timing.propagation_s = ref.seconds_propagation + seconds_since(t0);
  r.frames = rec.size();
  r.norm_drift_static = ref.record.norm_drift;
  r.norm_drift_perturbed = rec.norm_drift;

  const auto sp = detector_series(rec, rc.detector_kind, rc.detector_position);
  write_series(out / "series_static.csv", ref.series);
  write_series(out / "series_perturbed.csv", sp);
  r.files.insert(r.files.end(), {"series_static.csv", "series_perturbed.csv"});
  add_window(rc, rc.perturbed, sp, ref.series, r);
  r.diagnostics.final_static_probability = ref.series.values.back();
  r.diagnostics.final_perturbed_probability = sp.values.back();

  r.timing.total_s = seconds_since(start);
  r.timing.threads = kernels::max_threads();
  write_report(out, r);
  return r;
}

RunReport run_qpotential_snapshots(const ResolvedConfig& rc,
                                   const std::vector<std::size_t>& snapshot_steps,
                                   const fs::path& out) {
  if (snapshot_steps.empty()) throw ArgumentError("no snapshot steps requested");
  for (auto s : snapshot_steps)
    if (s > rc.n_steps)
      throw ArgumentError("snapshot step " + std::to_string(s) + " beyond n_steps = " +
                          std::to_string(rc.n_steps));
  const auto start = Clock::now();
  RunReport r;
  fill_header(rc, rc.perturbed, r);
  ensure_directory(out);

  auto steps = snapshot_steps;
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());

  // Step the perturbed state directly and keep only the requested frames.
  PropagationRecord rec{rc.grid, {}, {}, {}, {}, 0.0};
  CayleyStepper stepper(rc.grid, rc.perturbed);
  auto amps = rc.psi0.amplitudes;
  const double dt = rc.grid.dt();
  std::size_t next = 0;
  for (std::size_t n = 0; next < steps.size(); ++n) {
    const double t = rc.psi0.t + static_cast<double>(n) * dt;
    if (steps[next] == n) {
      rec.steps.push_back(n);
      rec.times.push_back(t);
      rec.frames.push_back(amps);
      rec.potential_heights.push_back(height_at(rc.perturbed, t));
      double norm = 0.0;
      for (std::size_t i = 0; i + 1 < amps.size(); ++i)
        norm += 0.5 * (std::norm(amps[i]) + std::norm(amps[i + 1])) * rc.grid.dx();
      rec.norm_drift = std::max(rec.norm_drift, std::abs(norm - 1.0));
      ++next;
      if (next == steps.size()) break;
    }
    stepper.advance(amps, t);
  }
  r.timing.propagation_s = seconds_since(start);
  r.frames = rec.size();
  r.norm_drift_perturbed = rec.norm_drift;

  emit_snapshots(rc, rec, snapshot_steps, out, r);
  r.diagnostics.q_at_x0_initial =
      q_at(rc.grid, rc.psi0.amplitudes, rc.config.node_floor, rc.packet.x0);
  r.timing.total_s = seconds_since(start);
  r.timing.threads = kernels::max_threads();
  write_report(out, r);
  return r;
}

SweepReport run_epsilon_sweep(const ResolvedConfig& rc, const std::vector<TimeValue>& epsilons,
                              const fs::path& out) {
  if (epsilons.size() < 2) throw ArgumentError("an epsilon sweep needs at least two values");
  const auto start = Clock::now();
  SweepReport sweep;
  sweep.config = config_entries(rc.config);
  ensure_directory(out);
  const auto ref = make_reference(rc, true);

  const auto n = static_cast<std::ptrdiff_t>(epsilons.size());
  sweep.rows.resize(epsilons.size());
  sweep.runs.resize(epsilons.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    auto& row = sweep.rows[idx];
    row.epsilon = epsilons[idx].resolve(rc.grid.dt());
    row.epsilon_label = epsilons[idx].str();
    row.directory = "eps_" + epsilon_label(epsilons[idx]);
    try {
      auto sched = rc.perturbed;
      sched.duration = row.epsilon;
      validate(sched, rc.grid);
      auto run = reflection_pipeline(rc, sched, ref, out / row.directory, false);
      if (run.window) row.eta = run.window->eta;
      if (run.signal) row.v_e = run.signal->v_e;
      if (run.beta && run.window) row.beta_mean = run.beta->mean;
      sweep.runs[idx] = std::move(run);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  std::vector<std::optional<double>> eta, beta, ve;
  for (const auto& row : sweep.rows) {
    eta.push_back(row.eta);
    beta.push_back(row.beta_mean);
    ve.push_back(row.v_e);
  }
  sweep.eta_strictly_decreasing = strictly_decreasing(eta);
  sweep.beta_strictly_decreasing = strictly_decreasing(beta);
  sweep.v_e_decreasing = strictly_decreasing(ve);

  CsvWriter csv(out / "sweep.csv", "epsilon,eta,v_e,beta_mean");
  const auto cell = [](const std::optional<double>& v) { return v ? fmt17(*v) : std::string("nan"); };
  for (const auto& row : sweep.rows)
    csv.line(fmt17(row.epsilon) + ',' + cell(row.eta) + ',' + cell(row.v_e) + ',' +
             cell(row.beta_mean));
  csv.close();
  sweep.files.push_back("sweep.csv");
  for (const auto& row : sweep.rows) sweep.files.push_back(row.directory + "/report.json");
  sweep.files.push_back("report.json");

  sweep.timing.propagation_s = ref.seconds_propagation;
  sweep.timing.total_s = seconds_since(start);
  sweep.timing.threads = kernels::max_threads();
  write_text(out / "report.json", report_json(sweep));
  return sweep;
}

void run_experiment(const ResolvedConfig& rc) {
  const fs::path out = rc.config.output_dir;
  switch (rc.config.experiment) {
    case ExperimentKind::reflection_lowering: run_reflection_lowering(rc, out); break;
    case ExperimentKind::transmission_raising: run_transmission_raising(rc, out); break;
    case ExperimentKind::trajectories: run_trajectories(rc, out); break;
    case ExperimentKind::qpotential: run_qpotential_snapshots(rc, rc.config.snapshot_steps, out); break;
    case ExperimentKind::sweep: run_epsilon_sweep(rc, rc.config.epsilon_list, out); break;
  }
}

std::string report_json(const RunReport& report) { return run_json(report).dump(2) + "\n"; }

std::string report_json(const SweepReport& s) {
  ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["experiment"] = "sweep";
  j["config"] = config_json(s.config);
  ordered_json rows = ordered_json::array();
  for (const auto& row : s.rows) {
    ordered_json rj;
    rj["epsilon"] = row.epsilon;
    rj["epsilon_label"] = row.epsilon_label;
    rj["directory"] = row.directory;
    rj["eta"] = optional_number(row.eta);
    rj["v_e"] = optional_number(row.v_e);
    rj["beta_mean"] = optional_number(row.beta_mean);
    rj["error"] = row.error ? ordered_json(*row.error) : ordered_json(nullptr);
    rows.push_back(rj);
  }
  j["rows"] = rows;
  j["eta_strictly_decreasing"] = s.eta_strictly_decreasing;
  j["beta_strictly_decreasing"] = s.beta_strictly_decreasing;
  j["v_e_decreasing"] = s.v_e_decreasing;
  j["files"] = s.files;
  j["timing"] = timing_json(s.timing);
  return j.dump(2) + "\n";
}

ProbabilitySeries read_series_csv(const fs::path& path, DetectorKind kind, double detector_position) {
  ProbabilitySeries s;
  s.kind = kind;
  s.detector_position = detector_position;
  for (const auto& row : read_csv(path, "step,t,probability", 3)) {
    s.steps.push_back(std::stoull(row[0]));
    s.times.push_back(std::stod(row[1]));
    s.values.push_back(std::stod(row[2]));
  }
  return s;
}

std::vector<ParticleBeta> read_betas_csv(const fs::path& path) {
  std::vector<ParticleBeta> out;
  for (const auto& row : read_csv(path, "particle,x_init,t_ip,t_i,beta", 5))
    out.push_back({std::stoull(row[0]), std::stod(row[1]), std::stod(row[2]), std::stod(row[3]),
                   std::stod(row[4])});
  return out;
}

}  // namespace superarrival
