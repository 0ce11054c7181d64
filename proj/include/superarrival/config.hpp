#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "superarrival/bohmian.hpp"
#include "superarrival/grid.hpp"
#include "superarrival/observables.hpp"
#include "superarrival/potentials.hpp"
#include "superarrival/tdse_solver.hpp"

namespace superarrival {

enum class ExperimentKind { reflection_lowering, transmission_raising, trajectories, qpotential, sweep };

std::string_view to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(std::string_view name);

/// An instant or duration, either in time units or in solver steps
/// ("8e-4" or "400 steps").
struct TimeValue {
  double amount = 0.0;
  bool in_steps = false;

  double resolve(double dt) const noexcept {
    return in_steps ? amount * dt : amount;
  }
  static TimeValue parse(const std::string& field, std::string_view text);
  std::string str() const;
};

/// Barrier height, absolute ("70000") or a multiple of the packet energy ("2E").
struct HeightValue {
  double amount = 2.0;
  bool in_units_of_energy = true;

  double resolve(double energy) const noexcept {
    return in_units_of_energy ? amount * energy : amount;
  }
  static HeightValue parse(const std::string& field, std::string_view text);
  std::string str() const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::reflection_lowering;

  double x_min = -1.0;
  double x_max = 1.0;
  std::size_t n_points = 8193;
  double dt = 2e-6;

  double x0 = -0.3;
  double sigma = 0.05 / 1.4142135623730951;
  double k0 = 150.0;

  std::optional<RampMode> mode;  // lowering or raising per experiment when unset
  double x_c = 0.0;
  double w = 0.016;
  HeightValue V0{2.0, true};
  TimeValue t_p{400.0, true};
  TimeValue epsilon{10.0, true};

  double x_prime = -0.5;
  double x_double_prime = 0.5;

  double threshold = 1e-4;
  std::size_t persistence = 3;
  double node_floor = kDefaultNodeFloor;
  std::size_t N = 1000;
  SamplingScheme sampling = SamplingScheme::quantile;
  std::uint64_t seed = 20021;
  std::optional<double> D;  // |x_c - detector| when unset

  std::string output_dir = "superarrival_out";

  std::size_t n_steps = 0;  // 1500, or 2000 for transmission, when 0
  std::size_t record_every = 10;
  std::optional<std::size_t> dense_from;
  std::optional<std::size_t> dense_to;

  std::vector<TimeValue> epsilon_list{{5, true}, {10, true}, {20, true}, {40, true}};
  std::vector<std::size_t> snapshot_steps{420, 425, 430};
  std::size_t trajectory_stride = 10;
};

/// Config keys, in canonical order.
const std::vector<std::string>& config_keys();

/// Applies one `key = value` assignment; throws ConfigError on unknown keys or
/// malformed values.
void set_value(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines ('#' starts a comment) on top of `base`.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
/// Throws IoError if the file cannot be read.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Every key with its current value, as it would be written to a config file.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);

/// Mean energy <H> of a state under zero potential (discrete Hamiltonian).
double mean_free_energy(const WaveFunction& psi);

/// Fully validated, derived run parameters.
struct ResolvedConfig {
  ExperimentConfig config;
  Grid grid;
  GaussianPacketSpec packet;
  WaveFunction psi0;
  double energy = 0.0;
  double barrier_height = 0.0;
  BarrierSchedule reference;  // static barrier (reflection) or free (transmission)
  BarrierSchedule perturbed;
  DetectorKind detector_kind = DetectorKind::reflection;
  double detector_position = 0.0;
  double distance = 0.0;
  std::size_t n_steps = 0;
  RecordPlan plan;
  double boundary_tail = 0.0;
};

/// Validates every cross-field constraint before any computation. Throws
/// ConfigError naming the offending key.
ResolvedConfig resolve(const ExperimentConfig& config);

}  // namespace superarrival
