#include "superarrival/bohmian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "superarrival/errors.hpp"
#include "superarrival/kernels.hpp"

namespace superarrival {

namespace {

constexpr double kVelocityScale = Units::hbar / Units::mass;

Complex derivative(std::span<const Complex> psi, std::size_t i, double dx) {
  const std::size_t n = psi.size();
  if (i == 0) return (-3.0 * psi[0] + 4.0 * psi[1] - psi[2]) / (2.0 * dx);
  if (i + 1 == n) return (3.0 * psi[n - 1] - 4.0 * psi[n - 2] + psi[n - 3]) / (2.0 * dx);
  if (i == 1 || i + 2 == n) return (psi[i + 1] - psi[i - 1]) / (2.0 * dx);
  return (-psi[i + 2] + 8.0 * psi[i + 1] - 8.0 * psi[i - 1] + psi[i - 2]) / (12.0 * dx);
}

void check_row(const Grid& grid, std::size_t psi_size, std::size_t out_size,
               std::size_t mask_size) {
  if (psi_size != grid.n_points() || out_size != grid.n_points() || mask_size != grid.n_points())
    throw ArgumentError("row length does not match grid");
}

}  // namespace

void velocity_row(const Grid& grid, std::span<const Complex> psi, double node_floor,
                  std::span<double> v, std::span<std::uint8_t> mask) {
  check_row(grid, psi.size(), v.size(), mask.size());
  const double dx = grid.dx();
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double rho = std::norm(psi[i]);
    if (!(rho >= node_floor)) {
      mask[i] = 1;
      v[i] = 0.0;
      continue;
    }
    mask[i] = 0;
    v[i] = kVelocityScale * std::imag(std::conj(psi[i]) * derivative(psi, i, dx)) / rho;
  }
}

void quantum_potential_row(const Grid& grid, std::span<const Complex> psi, double node_floor,
                           std::span<double> q, std::span<std::uint8_t> mask) {
  check_row(grid, psi.size(), q.size(), mask.size());
  const std::size_t n = psi.size();
  const double inv_dx2 = 1.0 / (grid.dx() * grid.dx());
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = std::norm(psi[i]);
    if (i == 0 || i + 1 == n || !(rho >= node_floor)) {
      mask[i] = 1;
      q[i] = 0.0;
      continue;
    }
    mask[i] = 0;
    const double r = std::abs(psi[i]);
    const double r_xx = (std::abs(psi[i + 1]) - 2.0 * r + std::abs(psi[i - 1])) * inv_dx2;
    q[i] = -Units::kinetic_prefactor * r_xx / r;
  }
}

std::vector<double> phase_gradient_velocity(const Grid& grid, std::span<const Complex> psi,
                                            double node_floor) {
  if (psi.size() != grid.n_points()) throw ArgumentError("row length does not match grid");
  const std::size_t n = psi.size();
  std::vector<double> v(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 2; i + 2 < n; ++i) {
    bool resolved = true;
    for (std::size_t j = i - 2; j <= i + 2; ++j) resolved &= std::norm(psi[j]) >= node_floor;
    if (!resolved) continue;
    // phase of psi[i + k] relative to psi[i], unwrapped outward step by step
    const double up1 = std::arg(psi[i + 1] * std::conj(psi[i]));
    const double up2 = up1 + std::arg(psi[i + 2] * std::conj(psi[i + 1]));
    const double dn1 = std::arg(psi[i - 1] * std::conj(psi[i]));
    const double dn2 = dn1 + std::arg(psi[i - 2] * std::conj(psi[i - 1]));
    const double ds = (-up2 + 8.0 * up1 - 8.0 * dn1 + dn2) / (12.0 * grid.dx());
    v[i] = kVelocityScale * ds;
  }
  return v;
}

std::vector<double> quantum_potential_wells(const Grid& grid, std::span<const Complex> psi,
                                            std::span<const double> q,
                                            std::span<const std::uint8_t> mask, double x_upper,
                                            double relative_density_floor) {
  const std::size_t n = grid.n_points();
  if (psi.size() != n || q.size() != n || mask.size() != n)
    throw ArgumentError("quantum_potential_wells: row length does not match grid");
  double peak = 0.0;
  for (const auto& a : psi) peak = std::max(peak, std::norm(a));
  const double floor = relative_density_floor * peak;

  std::vector<double> wells;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(grid.x(i) < x_upper)) break;
    if (mask[i - 1] || mask[i] || mask[i + 1] || std::norm(psi[i]) < floor) continue;
    if (!(q[i] < q[i - 1] && q[i] <= q[i + 1])) continue;
    const double curvature = q[i - 1] - 2.0 * q[i] + q[i + 1];
    const double offset = curvature > 0.0 ? 0.5 * (q[i - 1] - q[i + 1]) / curvature : 0.0;
    wells.push_back(grid.x(i) + offset * grid.dx());
  }
  return wells;
}

std::vector<double> track_leftmost_well(const std::vector<std::vector<double>>& wells) {
  std::vector<double> track;
  for (const auto& snapshot : wells) {
    if (snapshot.empty()) return {};
    if (track.empty()) {
      track.push_back(*std::min_element(snapshot.begin(), snapshot.end()));
      continue;
    }
    const double prev = track.back();
    track.push_back(*std::min_element(snapshot.begin(), snapshot.end(), [&](double a, double b) {
      return std::abs(a - prev) < std::abs(b - prev);
    }));
  }
  return track;
}

VelocityField velocity_field(const PropagationRecord& record, double node_floor) {
  if (!(node_floor > 0.0)) throw ArgumentError("velocity_field: node_floor must be > 0");
  return kernels::omp::velocity_field(record, node_floor);
}

QuantumPotentialField quantum_potential(const PropagationRecord& record, double node_floor) {
  if (!(node_floor > 0.0)) throw ArgumentError("quantum_potential: node_floor must be > 0");
  return kernels::omp::quantum_potential(record, node_floor);
}

Trajectory integrate_trajectory(const VelocityField& field, double x_init,
                                const TrajectoryOptions& options) {
  return kernels::integrate_one(field, x_init, options);
}

std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options) {
  return kernels::omp::integrate_ensemble(field, initial_positions, options);
}

std::optional<double> arrival_time(std::span<const double> times, std::span<const double> path,
                                   double detector, ArrivalSide side) {
  const std::size_t n = std::min(times.size(), path.size());
  auto beyond = [&](double x) {
    return side == ArrivalSide::left ? x <= detector : x >= detector;
  };
  if (n == 0) return std::nullopt;
  if (beyond(path[0])) return times[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (!beyond(path[k])) continue;
    const double frac = (path[k - 1] - detector) / (path[k - 1] - path[k]);
    return times[k - 1] + frac * (times[k] - times[k - 1]);
  }
  return std::nullopt;
}

std::string_view to_string(SamplingScheme scheme) {
  return scheme == SamplingScheme::quantile ? "quantile" : "random";
}

SamplingScheme sampling_scheme_from_string(std::string_view name) {
  if (name == "quantile") return SamplingScheme::quantile;
  if (name == "random") return SamplingScheme::random;
  throw ConfigError("sampling", "unknown sampling scheme '" + std::string(name) + "'");
}

InitialPositions sample_initial_positions(const GaussianPacketSpec& spec, std::size_t n,
                                          SamplingScheme scheme, std::uint64_t seed,
                                          const Grid* grid) {
  if (n == 0) throw ArgumentError("sample_initial_positions: N must be >= 1");
  if (!(spec.sigma > 0.0)) throw ArgumentError("sample_initial_positions: sigma must be > 0");
  auto inside = [&](double x) { return grid == nullptr || grid->strictly_inside(x); };

  InitialPositions out;
  out.positions.reserve(n);
  if (scheme == SamplingScheme::quantile) {
    const boost::math::normal_distribution<double> normal(spec.x0, spec.sigma);
    for (std::size_t i = 1; i <= n; ++i) {
      const double p = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
      // the median is x0 exactly
      const double x = 2 * i - 1 == n ? spec.x0 : boost::math::quantile(normal, p);
      if (inside(x)) {
        out.positions.push_back(x);
      } else {
        ++out.rejected;
      }
    }
    return out;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(spec.x0, spec.sigma);
  while (out.positions.size() < n) {
    const double x = normal(rng);
    if (inside(x)) {
      out.positions.push_back(x);
    } else {
      ++out.rejected;
    }
  }
  return out;
}

TrajectoryEnsemble superarrival_betas(const VelocityField& static_field,
                                      const VelocityField& perturbed_field,
                                      const std::optional<SuperarrivalWindow>& window,
                                      std::span<const double> initial_positions,
                                      double detector_position, ArrivalSide side,
                                      const TrajectoryOptions& options) {
  if (!(static_field.grid == perturbed_field.grid) || static_field.times != perturbed_field.times)
    throw ArgumentError("superarrival_betas: fields differ in grid or cadence");

  TrajectoryEnsemble ens;
  ens.initial_positions.assign(initial_positions.begin(), initial_positions.end());
  ens.times = static_field.times;
  ens.perturbed = kernels::omp::integrate_ensemble(perturbed_field, initial_positions, options);
  ens.reference = kernels::omp::integrate_ensemble(static_field, initial_positions, options);

  const std::size_t n = initial_positions.size();
  ens.arrival_perturbed.resize(n);
  ens.arrival_reference.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    ens.arrival_perturbed[p] = arrival_time(ens.times, ens.perturbed[p].x, detector_position, side);
    ens.arrival_reference[p] = arrival_time(ens.times, ens.reference[p].x, detector_position, side);
    if (ens.perturbed[p].flagged() || ens.reference[p].flagged()) ++ens.flagged;
  }

  for (std::size_t p = 0; p < n; ++p) {
    const auto& t_ip = ens.arrival_perturbed[p];
    const auto& t_i = ens.arrival_reference[p];
    const bool selected =
        t_ip.has_value() && (!window || (*t_ip >= window->t_d && *t_ip <= window->t_c));
    if (!selected) {
      if (t_ip && t_i && (*t_i - *t_ip) / *t_i < 0.0) ++ens.negative_outside_window;
      continue;
    }
    if (!t_i) {
      ens.excluded.push_back(p);
      continue;
    }
    ens.betas.push_back({p, initial_positions[p], *t_ip, *t_i, (*t_i - *t_ip) / *t_i});
  }

  if (!ens.betas.empty()) {
    double sum = 0.0;
    for (const auto& b : ens.betas) sum += b.beta;
    ens.beta_mean = sum / static_cast<double>(ens.betas.size());
    ens.all_kept_positive = std::all_of(ens.betas.begin(), ens.betas.end(),
                                        [](const ParticleBeta& b) { return b.t_i > b.t_ip; });
  }
  return ens;
}

TrajectoryEnsemble superarrival_betas(const VelocityField& static_field,
                                      const VelocityField& perturbed_field,
                                      const SuperarrivalWindow& window,
                                      const GaussianPacketSpec& spec, std::size_t n,
                                      double detector_position) {
  const auto initial =
      sample_initial_positions(spec, n, SamplingScheme::quantile, 0, &static_field.grid);
  return superarrival_betas(static_field, perturbed_field, window, initial.positions,
                            detector_position);
}

namespace {

struct Interpolated {
  double value = 0.0;
  bool valid = false;
};

// Linear interpolation in x of a per-site quantity at frame k; invalid if
// either bracketing site (or a neighbour used by `gradient`) is masked.
Interpolated q_gradient(const QuantumPotentialField& qf, std::size_t k, double x) {
  const Grid& g = qf.grid;
  const std::size_t n = g.n_points();
  const double s = (x - g.x_min()) / g.dx();
  if (!(s >= 2.0 && s <= static_cast<double>(n) - 3.0)) return {};
  const auto j = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(j);
  const auto& q = qf.q_frames[k];
  const auto& m = qf.node_mask[k];
  for (std::size_t i = j - 1; i <= j + 2; ++i)
    if (m[i] != 0) return {};
  const double g0 = (q[j + 1] - q[j - 1]) / (2.0 * g.dx());
  const double g1 = (q[j + 2] - q[j]) / (2.0 * g.dx());
  return {(1.0 - w) * g0 + w * g1, true};
}

Interpolated velocity_at(const VelocityField& f, std::size_t k, double x) {
  const Grid& g = f.grid;
  const double s = (x - g.x_min()) / g.dx();
  if (!(s >= 0.0 && s <= static_cast<double>(g.n_points()) - 1.0)) return {};
  const auto j = std::min(static_cast<std::size_t>(std::floor(s)), g.n_points() - 2);
  const double w = s - static_cast<double>(j);
  if (f.node_mask[k][j] != 0 || f.node_mask[k][j + 1] != 0) return {};
  return {(1.0 - w) * f.v_frames[k][j] + w * f.v_frames[k][j + 1], true};
}

}  // namespace

std::vector<NewtonSample> newton_residual(const VelocityField& field,
                                          const QuantumPotentialField& qfield,
                                          const Trajectory& trajectory,
                                          const BarrierSchedule& schedule) {
  if (!(field.grid == qfield.grid) || field.times != qfield.times)
    throw ArgumentError("newton_residual: fields differ in grid or cadence");
  const Grid& g = field.grid;
  const double left_edge = schedule.center - 0.5 * schedule.width;
  const double right_edge = schedule.center + 0.5 * schedule.width;
  const double edge_margin = 3.0 * g.dx();

  const std::size_t len = std::min(trajectory.x.size(), field.times.size());
  std::vector<NewtonSample> out;
  if (len < 3) return out;
  out.reserve(len - 2);
  for (std::size_t k = 1; k + 1 < len; ++k) {
    NewtonSample s;
    s.frame = k;
    s.t = field.times[k];
    s.x = trajectory.x[k];
    const auto v_prev = velocity_at(field, k - 1, trajectory.x[k - 1]);
    const auto v_next = velocity_at(field, k + 1, trajectory.x[k + 1]);
    const auto v_here = velocity_at(field, k, s.x);
    const auto dq = q_gradient(qfield, k, s.x);
    const bool near_edge = std::abs(s.x - left_edge) < edge_margin ||
                           std::abs(s.x - right_edge) < edge_margin;
    if (!v_prev.valid || !v_next.valid || !v_here.valid || !dq.valid || near_edge) {
      s.skipped = true;
      out.push_back(s);
      continue;
    }
    // three-point derivative on a possibly non-uniform time grid
    const double h0 = field.times[k] - field.times[k - 1];
    const double h1 = field.times[k + 1] - field.times[k];
    const double dvdt = (-h1 / (h0 * (h0 + h1))) * v_prev.value +
                        ((h1 - h0) / (h0 * h1)) * v_here.value +
                        (h0 / (h1 * (h0 + h1))) * v_next.value;
    s.lhs = Units::mass * dvdt;
    s.rhs = -dq.value;  // V is piecewise constant away from the barrier edges
    s.residual = std::abs(s.lhs - s.rhs) / (std::abs(s.rhs) + 1.0);
    out.push_back(s);
  }
  return out;
}

bool ordering_preserved(std::span<const Trajectory> trajectories) {
  std::vector<std::size_t> order(trajectories.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return trajectories[a].x_init < trajectories[b].x_init;
  });
  std::size_t frames = 0;
  for (const auto& t : trajectories) frames = std::max(frames, t.x.size());
  for (std::size_t k = 0; k < frames; ++k) {
    bool have_prev = false;
    double prev = 0.0;
    for (std::size_t idx : order) {
      const auto& path = trajectories[idx].x;
      if (k >= path.size()) continue;
      if (have_prev && !(path[k] - prev > 1e-12)) return false;
      prev = path[k];
      have_prev = true;
    }
  }
  return true;
}

double ks_distance(std::span<const double> positions, const Grid& grid,
                   std::span<const Complex> amplitudes) {
  if (positions.empty()) throw ArgumentError("ks_distance: no positions");
  const auto rho = density(amplitudes);
  const std::size_t n = rho.size();
  std::vector<double> cumulative(n, 0.0);
  for (std::size_t i = 1; i < n; ++i)
    cumulative[i] = cumulative[i - 1] + 0.5 * (rho[i - 1] + rho[i]) * grid.dx();
  const double total = cumulative.back();

  auto cdf = [&](double x) {
    if (x <= grid.x_min()) return 0.0;
    if (x >= grid.x_max()) return 1.0;
    const auto j = std::min(
        static_cast<std::size_t>(std::floor((x - grid.x_min()) / grid.dx())), n - 2);
    const double u = x - grid.x(j);
    const double slope = (rho[j + 1] - rho[j]) / grid.dx();
    return (cumulative[j] + rho[j] * u + 0.5 * slope * u * u) / total;
  };

  std::vector<double> sorted(positions.begin(), positions.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

ContinuityResidual continuity_residual(const PropagationRecord& record, std::size_t frame) {
  if (frame == 0 || frame + 1 >= record.frames.size())
    throw ArgumentError("continuity_residual: need neighbouring frames on both sides");
  const Grid& g = record.grid;
  const std::size_t n = g.n_points();
  const auto& prev = record.frames[frame - 1];
  const auto& here = record.frames[frame];
  const auto& next = record.frames[frame + 1];
  const double span = record.times[frame + 1] - record.times[frame - 1];

  std::vector<double> flux(n);
  for (std::size_t i = 0; i < n; ++i)
    flux[i] = kVelocityScale * std::imag(std::conj(here[i]) * derivative(here, i, g.dx()));

  double s_rho = 0.0;
  double s_div = 0.0;
  double s_res = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double drho = (std::norm(next[i]) - std::norm(prev[i])) / span;
    const double div =
        (-flux[i + 2] + 8.0 * flux[i + 1] - 8.0 * flux[i - 1] + flux[i - 2]) / (12.0 * g.dx());
    s_rho += drho * drho;
    s_div += div * div;
    s_res += (drho + div) * (drho + div);
  }
  const double dx = g.dx();
  return {std::sqrt(s_rho * dx), std::sqrt(s_div * dx), std::sqrt(s_res * dx)};
}

}  // namespace superarrival
