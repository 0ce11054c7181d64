// Times the serial and OpenMP kernels on a default reflection record.
// Usage: kernel_bench [repeats]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "superarrival/bohmian.hpp"
#include "superarrival/kernels.hpp"

namespace sa = superarrival;
namespace k = superarrival::kernels;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

void report(const char* name, double serial_s, double omp_s) {
  std::printf("%-22s serial %9.4f s   omp %9.4f s   speedup %5.2fx\n", name, serial_s, omp_s,
              serial_s / omp_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int repeats = argc > 1 ? std::max(1, std::atoi(argv[1])) : 3;
  const sa::Grid grid(-1.0, 1.0, 8193, 2e-6);
  const sa::GaussianPacketSpec spec{-0.3, 0.05 / std::sqrt(2.0), 150.0};
  const auto psi0 = sa::init_gaussian(grid, spec);
  const sa::BarrierSchedule schedule{0.0, 0.016, 45400.0, sa::RampMode::lowering, 8e-4, 2e-5};
  const auto record = sa::propagate(psi0, schedule, 1500, sa::RecordPlan{10, 200, 1501});
  std::printf("threads %d, frames %zu, points %zu, repeats %d\n", k::max_threads(), record.size(),
              grid.n_points(), repeats);

  report("region_probabilities",
         best_of(repeats, [&] { k::serial::region_probabilities(record, -1.0, -0.5); }),
         best_of(repeats, [&] { k::omp::region_probabilities(record, -1.0, -0.5); }));
  report("velocity_field",
         best_of(repeats, [&] { k::serial::velocity_field(record, sa::kDefaultNodeFloor); }),
         best_of(repeats, [&] { k::omp::velocity_field(record, sa::kDefaultNodeFloor); }));
  report("quantum_potential",
         best_of(repeats, [&] { k::serial::quantum_potential(record, sa::kDefaultNodeFloor); }),
         best_of(repeats, [&] { k::omp::quantum_potential(record, sa::kDefaultNodeFloor); }));

  const auto field = k::omp::velocity_field(record, sa::kDefaultNodeFloor);
  const auto init = sa::sample_initial_positions(spec, 1000, sa::SamplingScheme::quantile, 0, &grid);
  report("integrate_ensemble",
         best_of(repeats, [&] { k::serial::integrate_ensemble(field, init.positions, {}); }),
         best_of(repeats, [&] { k::omp::integrate_ensemble(field, init.positions, {}); }));
  return 0;
}
