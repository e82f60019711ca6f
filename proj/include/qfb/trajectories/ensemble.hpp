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

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qfb/common/spectrum.hpp"
#include "qfb/trajectories/sme.hpp"

namespace qfb::traj {

// Scalar functional of a conditioned state, tracked at every snapshot.
struct Observable {
  std::string name;
  std::function<double(const Matrix&)> value;
};

// <O>_c
Observable expectation(std::string name, const core::Operator& op);
// <O^2>_c - <O>_c^2
Observable conditioned_variance(std::string name, const core::Operator& op);

struct EnsembleOptions {
  std::vector<Observable> observables;
  bool mean_state = true;
  // Welch segment length for the pooled photocurrent spectrum; 0 disables it.
  std::size_t psd_segment_length = 0;
  std::size_t psd_burn_in_steps = 0;
  // Trajectories run concurrently per merge block.
  std::size_t block = 64;
};

struct TrajectoryFailure {
  std::size_t index;
  std::string message;
};

struct EnsembleSummary {
  std::size_t requested = 0;
  std::size_t succeeded = 0;
  std::vector<TrajectoryFailure> failures;
  std::vector<double> times;
  std::vector<Matrix> mean_state;
  // [observable][snapshot]: mean over trajectories and the sample variance
  // across trajectories.
  std::vector<std::vector<double>> observable_mean;
  std::vector<std::vector<double>> observable_variance;
  std::optional<Spectrum> psd;
  // Mean record value per step (photocurrent, or count rate times dt).
  double record_mean = 0.0;
  std::size_t total_jumps = 0;
  std::size_t refined = 0;
};

// Trajectory k runs on RNG stream k of config.seed. Results are merged in
// trajectory order, so the summary is identical for any thread count.
// Trajectories that fail numerically are listed; fewer than 90% successes
// throws EnsembleFailure.
EnsembleSummary run_ensemble(const SmeConfig& config, std::size_t n_traj, const EnsembleOptions& options = {});

// Single-threaded reference with the same merge order.
EnsembleSummary run_ensemble_serial(const SmeConfig& config, std::size_t n_traj,
                                    const EnsembleOptions& options = {});

}  // namespace qfb::traj
