#include <omp.h>

#include <cstring>

#include "doctest.h"
#include "superarrival/kernels.hpp"

using namespace superarrival;

namespace {

const PropagationRecord& record() {
  static const auto rec = [] {
    const Grid grid(-1.0, 1.0, 8193, 2e-6);
    const BarrierSchedule lowering{0.0, 0.016, 45400.0, RampMode::lowering, 400 * 2e-6, 10 * 2e-6};
    return propagate(init_gaussian(grid, GaussianPacketSpec{}), lowering, 700, RecordPlan{10, 390, 430});
  }();
  return rec;
}

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

template <class T>
bool same_bits(const std::vector<std::vector<T>>& a, const std::vector<std::vector<T>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k)
    if (!same_bits(a[k], b[k])) return false;
  return true;
}

struct ThreadCount {
  int saved = omp_get_max_threads();
  explicit ThreadCount(int n) { omp_set_num_threads(n); }
  ~ThreadCount() { omp_set_num_threads(saved); }
};

}  // namespace

TEST_CASE("region probabilities match the serial reference bit for bit") {
  const auto ref = kernels::serial::region_probabilities(record(), -1.0, -0.5);
  for (int threads : {1, 2, 4, 7}) {
    ThreadCount guard(threads);
    CHECK(same_bits(kernels::omp::region_probabilities(record(), -1.0, -0.5), ref));
  }
}

TEST_CASE("velocity and quantum potential fields match the serial reference") {
  const auto v_ref = kernels::serial::velocity_field(record(), 1e-14);
  const auto q_ref = kernels::serial::quantum_potential(record(), 1e-14);
  for (int threads : {1, 3, 4}) {
    ThreadCount guard(threads);
    const auto v = kernels::omp::velocity_field(record(), 1e-14);
    const auto q = kernels::omp::quantum_potential(record(), 1e-14);
    CHECK(same_bits(v.v_frames, v_ref.v_frames));
    CHECK(same_bits(v.node_mask, v_ref.node_mask));
    CHECK(v.times == v_ref.times);
    CHECK(same_bits(q.q_frames, q_ref.q_frames));
    CHECK(same_bits(q.node_mask, q_ref.node_mask));
  }
}

TEST_CASE("ensemble integration matches the serial reference") {
  const auto field = kernels::serial::velocity_field(record(), 1e-14);
  const auto start = sample_initial_positions(GaussianPacketSpec{}, 64, SamplingScheme::quantile, 0,
                                              &record().grid);
  const auto ref = kernels::serial::integrate_ensemble(field, start.positions, {});
  for (int threads : {1, 2, 5}) {
    ThreadCount guard(threads);
    const auto out = kernels::omp::integrate_ensemble(field, start.positions, {});
    REQUIRE(out.size() == ref.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].x_init == ref[i].x_init);
      CHECK(same_bits(out[i].x, ref[i].x));
      CHECK(out[i].flagged() == ref[i].flagged());
    }
  }
}

TEST_CASE("public entry points agree with the kernels") {
  const auto field = velocity_field(record());
  CHECK(same_bits(field.v_frames, kernels::serial::velocity_field(record(), 1e-14).v_frames));
  const auto one = integrate_trajectory(field, -0.3);
  const double start[] = {-0.3};
  const auto batch = integrate_ensemble(field, start);
  CHECK(same_bits(one.x, batch.at(0).x));
}
