// Copyright 2026 The qfeedback Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parallel kernels against their serial references.

#include <benchmark/benchmark.h>

#include "qfb/common/parallel.hpp"
#include "qfb/loop_spectra/loop_filter.hpp"
#include "qfb/loop_spectra/spectra.hpp"
#include "qfb/quantum_core/operators.hpp"
#include "qfb/trajectories/ensemble.hpp"

namespace {

using qfb::core::Complex;
using qfb::core::Matrix;
using qfb::core::Operator;

qfb::traj::SmeConfig feedback_atom() {
  const qfb::core::LindbladModel atom(Complex(0.75) * qfb::core::sigma_x(), {{1.0, qfb::core::sigma_minus()}});
  return {atom,
          qfb::core::fock_state(2, 0),
          qfb::traj::HomodyneDiffusive{0.8},
          qfb::traj::FeedbackSpec{Complex(-0.3) * qfb::core::sigma_y(), qfb::traj::Markovian{}},
          1e-3,
          2000,
          1,
          100};
}

qfb::traj::SmeConfig counting_cavity() {
  const Eigen::Index n = 8;
  const qfb::core::LindbladModel cav(Operator(Matrix::Zero(n, n)), {{1.0, qfb::core::annihilation(n)}});
  return {cav, qfb::core::fock_state(n, 3), qfb::traj::PhotonCounting{}, std::nullopt, 1e-3, 2000, 2, 100};
}

qfb::traj::EnsembleOptions options() {
  qfb::traj::EnsembleOptions opt;
  opt.observables.push_back(qfb::traj::expectation("sz", qfb::core::sigma_z()));
  return opt;
}

void BM_EnsembleParallel(benchmark::State& state) {
  const auto cfg = feedback_atom();
  const auto opt = options();
  qfb::set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qfb::traj::run_ensemble(cfg, 64, opt));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EnsembleParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_EnsembleSerial(benchmark::State& state) {
  const auto cfg = feedback_atom();
  const auto opt = options();
  for (auto _ : state) benchmark::DoNotOptimize(qfb::traj::run_ensemble_serial(cfg, 64, opt));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_EnsembleSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CountingParallel(benchmark::State& state) {
  const auto cfg = counting_cavity();
  qfb::set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qfb::traj::run_ensemble(cfg, 64));
}
BENCHMARK(BM_CountingParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_CountingSerial(benchmark::State& state) {
  const auto cfg = counting_cavity();
  for (auto _ : state) benchmark::DoNotOptimize(qfb::traj::run_ensemble_serial(cfg, 64));
}
BENCHMARK(BM_CountingSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

// Stability classification over a gain grid, one Nyquist contour per point.
std::vector<double> gain_grid() { return qfb::loop::linear_grid(-10.0, 0.9, 64); }

bool classify(double g) { return qfb::loop::is_stable(qfb::loop::LoopFilter(g, qfb::loop::SinglePole{1.0}, 0.3)); }

void BM_StabilityGridParallel(benchmark::State& state) {
  const auto grid = gain_grid();
  qfb::set_threads(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qfb::parallel_map(grid, classify));
}
BENCHMARK(BM_StabilityGridParallel)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_StabilityGridSerial(benchmark::State& state) {
  const auto grid = gain_grid();
  for (auto _ : state) benchmark::DoNotOptimize(qfb::serial_map(grid, classify));
}
BENCHMARK(BM_StabilityGridSerial)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
