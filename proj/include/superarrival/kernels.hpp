#pragma once

// Data-parallel kernels. Each kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp; both produce
// bit-identical results (every output element is computed independently).

#include <span>
#include <vector>

#include "superarrival/bohmian.hpp"
#include "superarrival/tdse_solver.hpp"

namespace superarrival::kernels {

Trajectory integrate_one(const VelocityField& field, double x_init,
                         const TrajectoryOptions& options);

namespace serial {

std::vector<double> region_probabilities(const PropagationRecord& record, double a, double b);
VelocityField velocity_field(const PropagationRecord& record, double node_floor);
QuantumPotentialField quantum_potential(const PropagationRecord& record, double node_floor);
std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options);

}  // namespace serial

namespace omp {

std::vector<double> region_probabilities(const PropagationRecord& record, double a, double b);
VelocityField velocity_field(const PropagationRecord& record, double node_floor);
QuantumPotentialField quantum_potential(const PropagationRecord& record, double node_floor);
std::vector<Trajectory> integrate_ensemble(const VelocityField& field,
                                           std::span<const double> initial_positions,
                                           const TrajectoryOptions& options);

}  // namespace omp

int max_threads();

}  // namespace superarrival::kernels
