#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "superarrival/bohmian.hpp"
#include "superarrival/config.hpp"
#include "superarrival/observables.hpp"

namespace superarrival {

inline constexpr int kReportSchemaVersion = 1;

struct StepValue {
  std::size_t step = 0;
  double value = 0.0;
};

/// Bohmian and solver diagnostics. Fields that a run does not compute stay
/// empty.
struct Diagnostics {
  std::optional<bool> no_crossing_static;
  std::optional<bool> no_crossing_perturbed;
  std::vector<StepValue> ks_distance;  // perturbed ensemble vs |psi|^2
  std::optional<double> newton_residual_median;
  std::size_t newton_samples = 0;
  std::vector<StepValue> leftmost_well;  // tracked Q-well position
  std::optional<double> q_at_x0_initial;
  std::optional<double> velocity_consistency_max;  // |v_ratio - v_phase| / (|v| + 1)
  std::vector<StepValue> continuity_relative;      // residual / |drho/dt|, L2
  std::optional<double> final_static_probability;
  std::optional<double> final_perturbed_probability;
};

struct BetaSummary {
  double mean = 0.0;  // NaN when nothing was kept
  std::size_t kept = 0;
  std::size_t excluded = 0;
  std::size_t flagged = 0;
  std::size_t negative_outside_window = 0;
  bool all_kept_positive = false;
  std::size_t particles = 0;
  std::size_t rejected_samples = 0;
};

struct Timing {
  double propagation_s = 0.0;
  double fields_s = 0.0;
  double trajectories_s = 0.0;
  double total_s = 0.0;
  int threads = 1;
};

struct RunReport {
  ExperimentKind experiment = ExperimentKind::reflection_lowering;
  std::vector<std::pair<std::string, std::string>> config;
  double energy = 0.0;
  double barrier_height = 0.0;
  double t_p = 0.0;
  double epsilon = 0.0;
  DetectorKind detector_kind = DetectorKind::reflection;
  double detector_position = 0.0;
  double distance = 0.0;
  std::size_t n_steps = 0;
  std::size_t frames = 0;
  double boundary_tail = 0.0;

  std::optional<SuperarrivalWindow> window;
  bool ordering_holds = false;
  std::optional<SignalVelocity> signal;
  std::optional<BetaSummary> beta;

  double norm_drift_static = 0.0;
  double norm_drift_perturbed = 0.0;

  Diagnostics diagnostics;
  std::vector<std::string> files;
  std::vector<std::string> warnings;
  Timing timing;

  bool superarrival_detected() const noexcept { return window.has_value(); }
};

struct SweepRow {
  double epsilon = 0.0;
  std::string epsilon_label;
  std::string directory;
  std::optional<double> eta;
  std::optional<double> v_e;
  std::optional<double> beta_mean;
  std::optional<std::string> error;
};

struct SweepReport {
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<SweepRow> rows;
  std::vector<RunReport> runs;  // one per row; empty placeholder for failed rows
  bool eta_strictly_decreasing = false;
  bool beta_strictly_decreasing = false;
  bool v_e_decreasing = false;
  std::vector<std::string> files;
  Timing timing;
};

/// Static vs lowering barrier, reflection detector at x'. Writes both
/// series, Q snapshots, trajectories, betas and report.json to `out`.
RunReport run_reflection_lowering(const ResolvedConfig& config, const std::filesystem::path& out);

/// Free vs raising barrier, transmission detector at x''.
RunReport run_transmission_raising(const ResolvedConfig& config, const std::filesystem::path& out);

/// The reflection pipeline plus continuity and velocity cross-checks.
RunReport run_trajectories(const ResolvedConfig& config, const std::filesystem::path& out);

/// Q(x) rows of the perturbed run at the requested steps. Throws
/// ArgumentError if a step lies beyond n_steps.
RunReport run_qpotential_snapshots(const ResolvedConfig& config,
                                   const std::vector<std::size_t>& snapshot_steps,
                                   const std::filesystem::path& out);

/// One reflection-lowering run per epsilon, each in its own eps_<label>
/// subdirectory, sharing the static reference. A failing epsilon is recorded
/// in its row and the sweep goes on. Throws ArgumentError for fewer than two
/// values.
SweepReport run_epsilon_sweep(const ResolvedConfig& config, const std::vector<TimeValue>& epsilons,
                              const std::filesystem::path& out);

/// Dispatches on config.experiment, writing to config.output_dir.
void run_experiment(const ResolvedConfig& config);

std::string report_json(const RunReport& report);
std::string report_json(const SweepReport& report);

/// CSV readers for the files written above (used for round-trip checks).
ProbabilitySeries read_series_csv(const std::filesystem::path& path, DetectorKind kind,
                                  double detector_position);
std::vector<ParticleBeta> read_betas_csv(const std::filesystem::path& path);

}  // namespace superarrival
