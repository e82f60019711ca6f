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

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qfb/common/philox.hpp"
#include "qfb/quantum_core/lindblad.hpp"

namespace qfb::traj {

using core::Complex;
using core::Matrix;

// Direct detection of the principal channel.
struct PhotonCounting {};
// Detection after mixing with a local oscillator of real amplitude beta.
struct HomodyneJump {
  double beta;
};
// Strong local-oscillator limit with detection efficiency eta.
struct HomodyneDiffusive {
  double eta = 1.0;
};
using Detection = std::variant<PhotonCounting, HomodyneJump, HomodyneDiffusive>;

// Feedback Hamiltonian I(t - T) F / sqrt(eta). Markovian applies it
// immediately after the measurement of the same interval.
struct Markovian {};
struct Delayed {
  double delay;
};
using FeedbackMode = std::variant<Markovian, Delayed>;

struct FeedbackSpec {
  core::Operator f;
  FeedbackMode mode = Markovian{};
};

// The first collapse of `model` is the monitored channel; c = sqrt(rate) L.
// The others are unmonitored.
struct SmeConfig {
  core::LindbladModel model;
  core::DensityMatrix rho0;
  Detection detection = HomodyneDiffusive{};
  std::optional<FeedbackSpec> feedback;
  double dt = 1e-3;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  // Store the state every this many steps, including t = 0; 0 stores none.
  std::size_t snapshot_every = 0;

  void validate() const;
};

struct TrajectoryDiagnostics {
  // Set when the positivity guard tripped and the run was repeated at dt/2.
  bool refined = false;
  double max_top_level_population = 0.0;
  bool truncation_warning = false;
};

struct TrajectoryResult {
  double dt = 0.0;
  // Per step: photocurrent I = dY/dt (diffusive) or count dN (jump detection).
  std::vector<double> record;
  std::vector<double> jump_times;
  std::vector<double> snapshot_times;
  std::vector<Matrix> snapshots;
  Matrix final_state;
  TrajectoryDiagnostics diagnostics;
};

// Holds past measurement increments dY for delayed feedback. Until `lag`
// increments have been recorded the output is zero.
class DelayLine {
 public:
  explicit DelayLine(std::size_t lag) : buf_(lag + 1, 0.0) {}
  std::size_t lag() const { return buf_.size() - 1; }
  bool filled() const { return count_ > lag(); }
  // Records dY for the current step and returns dY from `lag` steps ago
  // (the current one when lag = 0).
  double push(double dy);

 private:
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

// Precomputed single-step maps. Each step is a normalized Kraus update
// M rho M^dagger + sum_k w_k L_k rho L_k^dagger dt, positive by
// construction. M carries the drift to second order in dt and, for
// diffusive detection, the term A^2 (dW^2 - dt) / 2.
class SmeStepper {
 public:
  SmeStepper(const core::LindbladModel& model, const Detection& detection,
             const std::optional<FeedbackSpec>& feedback, double dt);

  double dt() const { return dt_; }
  bool is_jump() const { return jump_; }
  std::size_t delay_steps() const { return delay_steps_; }

  // Advances rho in place and returns the record sample: I for diffusive
  // detection, dN for jump detection. Delayed feedback reads and feeds
  // `line`, which must then be non-null with lag delay_steps().
  double step(Matrix& rho, Philox& rng, DelayLine* line = nullptr);

  // Principal operator c.
  const Matrix& monitored() const { return c_; }

 private:
  void add_unmonitored(const Matrix& rho);

  double dt_;
  bool jump_ = false;
  double sqrt_eta_ = 1.0;
  Matrix c_;
  Matrix x_;
  Matrix x_t_;
  Matrix jdj_t_;
  Matrix m0_;
  Matrix a_;
  Matrix a2_;
  Matrix jump_op_;
  std::vector<std::pair<double, Matrix>> unmonitored_;
  bool delayed_ = false;
  std::size_t delay_steps_ = 0;
  Matrix f_vectors_;
  Eigen::VectorXd f_values_;
  Matrix m_, scratch_, next_, extra_;
};

struct StepOutcome {
  Matrix rho;
  double sample;
};

// Single steps for callers that do not hold a stepper.
StepOutcome step_photon_counting(const Matrix& rho, const core::LindbladModel& model, double dt, Philox& rng);
StepOutcome step_homodyne_jump(const Matrix& rho, const core::LindbladModel& model, double beta, double dt,
                               Philox& rng);
StepOutcome step_homodyne_diffusive(const Matrix& rho, const core::LindbladModel& model, double eta, double dt,
                                    Philox& rng);
// Markovian feedback when `delay` is null; otherwise the feedback is driven
// by the increment `delay` returns.
StepOutcome step_homodyne_feedback(const Matrix& rho, const core::LindbladModel& model, const core::Operator& f,
                                   double eta, double dt, Philox& rng, DelayLine* delay = nullptr);

// One trajectory on RNG stream `stream` of config.seed. If the state loses
// positivity the run is repeated once at dt/2 and the record re-binned to
// the requested grid; a second failure throws PositivityViolation.
TrajectoryResult run_trajectory(const SmeConfig& config, std::uint64_t stream = 0);

}  // namespace qfb::traj
