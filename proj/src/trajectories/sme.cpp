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

#include "qfb/trajectories/sme.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "qfb/errors.hpp"
#include "qfb/quantum_core/evolve.hpp"

namespace qfb::traj {

namespace {

constexpr double kMaxJumpProbability = 0.1;
constexpr double kPositivityShift = 1e-8;

Matrix principal(const core::LindbladModel& model) {
  if (model.collapses().empty()) throw ValidationError("SME model needs a monitored collapse");
  const auto& c0 = model.collapses().front();
  return std::sqrt(c0.rate) * c0.op.matrix();
}

double largest_eigenvalue(const Matrix& hermitian) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double jump_beta(const Detection& d) {
  if (const auto* h = std::get_if<HomodyneJump>(&d)) return h->beta;
  return 0.0;
}

std::size_t delay_steps_for(double delay, double dt) {
  const double r = delay / dt;
  const double n = std::round(r);
  if (!(delay >= 0.0) || std::abs(r - n) > 1e-9 * std::max(1.0, r))
    throw ValidationError("feedback delay must be a non-negative integer multiple of dt");
  return static_cast<std::size_t>(n);
}

// Coefficient-based products beat the blocked kernel for small states.
constexpr Eigen::Index kLazyProductMaxDim = 8;

void mul_into(Matrix& dst, const Matrix& a, const Matrix& b) {
  if (a.rows() <= kLazyProductMaxDim)
    dst.noalias() = a.lazyProduct(b);
  else
    dst.noalias() = a * b;
}

template <class B>
void mul_adjoint_into(Matrix& dst, const Matrix& a, const B& b_adjoint) {
  if (a.rows() <= kLazyProductMaxDim)
    dst.noalias() = a.lazyProduct(b_adjoint);
  else
    dst.noalias() = a * b_adjoint;
}

// Tr(A rho) without forming the product; `at` is A transposed.
double trace_product(const Matrix& at, const Matrix& rho) { return at.cwiseProduct(rho).sum().real(); }

// Cholesky test of rho + 1e-8 I with buffers reused across steps.
class PositivityCheck {
 public:
  explicit PositivityCheck(Eigen::Index d) : shifted_(d, d), llt_(d) {}
  bool operator()(const Matrix& rho) {
    shifted_ = rho;
    shifted_.diagonal().array() += kPositivityShift;
    llt_.compute(shifted_);
    return llt_.info() == Eigen::Success;
  }

 private:
  Matrix shifted_;
  Eigen::LLT<Matrix> llt_;
};

bool positive_enough(const Matrix& rho) { return PositivityCheck(rho.rows())(rho); }

// Divides by the trace and restores exact hermiticity in place.
void normalize(Matrix& rho) {
  const double tr = rho.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw PositivityViolation("conditioned state lost its trace");
  const double s = 0.5 / tr;
  const auto d = rho.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    rho(j, j) = Complex(rho(j, j).real() / tr, 0.0);
    for (Eigen::Index i = j + 1; i < d; ++i) {
      const Complex v = s * (rho(i, j) + std::conj(rho(j, i)));
      rho(i, j) = v;
      rho(j, i) = std::conj(v);
    }
  }
}

}  // namespace

void SmeConfig::validate() const {
  core::require_same_dim(model.dim(), rho0.dim(), "SME model and initial state");
  if (model.collapses().empty()) throw ValidationError("SME model needs a monitored collapse");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (steps == 0) throw ValidationError("steps must be at least 1");
  const Matrix c = principal(model);
  const Matrix id = Matrix::Identity(model.dim(), model.dim());
  if (const auto* h = std::get_if<HomodyneDiffusive>(&detection)) {
    if (!(h->eta > 0.0 && h->eta <= 1.0)) throw ValidationError("eta must lie in (0, 1], got " + std::to_string(h->eta));
  } else {
    const double beta = jump_beta(detection);
    if (std::holds_alternative<HomodyneJump>(detection)) {
      if (!(beta > 0.0) || !std::isfinite(beta)) throw ValidationError("local-oscillator amplitude beta must be > 0");
      if (beta * beta * dt >= kMaxJumpProbability) throw ValidationError("beta^2 dt must be below 0.1");
    }
    const Matrix j = c + beta * id;
    const double rate = largest_eigenvalue(j.adjoint() * j);
    if (rate * dt >= kMaxJumpProbability)
      throw ValidationError("dt times the largest jump rate (" + std::to_string(rate) + ") must be below 0.1");
  }
  if (feedback) {
    if (!std::holds_alternative<HomodyneDiffusive>(detection))
      throw ValidationError("feedback requires diffusive homodyne detection");
    core::require_same_dim(feedback->f.dim(), model.dim(), "feedback operator");
    if (!feedback->f.is_hermitian()) throw ValidationError("feedback operator F must be Hermitian");
    if (const auto* d = std::get_if<Delayed>(&feedback->mode)) delay_steps_for(d->delay, dt);
  }
}

double DelayLine::push(double dy) {
  buf_[head_] = dy;
  head_ = (head_ + 1) % buf_.size();
  ++count_;
  // After the write, head_ points at the slot written lag steps ago.
  return count_ > lag() ? buf_[head_] : 0.0;
}

SmeStepper::SmeStepper(const core::LindbladModel& model, const Detection& detection,
                       const std::optional<FeedbackSpec>& feedback, double dt)
    : dt_(dt), c_(principal(model)) {
  const auto d = model.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Complex i(0.0, 1.0);
  Matrix h = model.hamiltonian().matrix();
  Matrix decay = Matrix::Zero(d, d);
  for (std::size_t k = 1; k < model.collapses().size(); ++k) {
    const auto& col = model.collapses()[k];
    if (col.rate == 0.0) continue;
    unmonitored_.emplace_back(col.rate, col.op.matrix());
    decay += col.rate * col.op.matrix().adjoint() * col.op.matrix();
  }
  x_ = c_ + c_.adjoint();
  x_t_ = x_.transpose();
  const Matrix cdc = c_.adjoint() * c_;

  if (const auto* hd = std::get_if<HomodyneDiffusive>(&detection)) {
    const double eta = hd->eta;
    sqrt_eta_ = std::sqrt(eta);
    a_ = sqrt_eta_ * c_;
    if (feedback) {
      const Matrix& f = feedback->f.matrix();
      if (std::holds_alternative<Markovian>(feedback->mode)) {
        a_ -= (i / sqrt_eta_) * f;
        h += 0.5 * (c_.adjoint() * f + f * c_);
      } else {
        delayed_ = true;
        delay_steps_ = delay_steps_for(std::get<Delayed>(feedback->mode).delay, dt);
        Eigen::SelfAdjointEigenSolver<Matrix> es(f);
        f_vectors_ = es.eigenvectors();
        f_values_ = es.eigenvalues();
      }
    }
    decay += a_.adjoint() * a_;
    if (eta < 1.0) {
      unmonitored_.emplace_back(1.0 - eta, c_);
      decay += (1.0 - eta) * cdc;
    }
    const Matrix k = (-i * h - 0.5 * decay) * dt;
    m0_ = id + k + 0.5 * k * k;
    a2_ = 0.5 * a_ * a_;
  } else {
    jump_ = true;
    const double beta = jump_beta(detection);
    jump_op_ = c_ + beta * id;
    jdj_t_ = (jump_op_.adjoint() * jump_op_).transpose();
    const Matrix k = (-i * h - beta * c_ - 0.5 * cdc - 0.5 * beta * beta * id - 0.5 * decay) * dt;
    m0_ = id + k + 0.5 * k * k;
  }
}

void SmeStepper::add_unmonitored(const Matrix& rho) {
  for (const auto& [w, l] : unmonitored_) {
    mul_into(scratch_, l, rho);
    mul_adjoint_into(extra_, scratch_, l.adjoint());
    next_ += (w * dt_) * extra_;
  }
}

double SmeStepper::step(Matrix& rho, Philox& rng, DelayLine* line) {
  if (jump_) {
    const double p = trace_product(jdj_t_, rho) * dt_;
    const bool click = rng.uniform() < p;
    if (click) {
      mul_into(scratch_, jump_op_, rho);
      mul_adjoint_into(next_, scratch_, jump_op_.adjoint());
    } else {
      mul_into(scratch_, m0_, rho);
      mul_adjoint_into(next_, scratch_, m0_.adjoint());
      add_unmonitored(rho);
    }
    normalize(next_);
    rho.swap(next_);
    return click ? 1.0 : 0.0;
  }

  const double mean_x = trace_product(x_t_, rho);
  const double dw = std::sqrt(dt_) * rng.normal();
  const double dy = sqrt_eta_ * mean_x * dt_ + dw;
  m_ = m0_ + dy * a_ + (dw * dw - dt_) * a2_;
  mul_into(scratch_, m_, rho);
  mul_adjoint_into(next_, scratch_, m_.adjoint());
  add_unmonitored(rho);
  normalize(next_);
  if (delayed_) {
    if (!line) throw ValidationError("delayed feedback needs a delay line");
    const double fb = line->push(dy);
    if (fb != 0.0) {
      const Eigen::VectorXcd phase =
          (f_values_.cast<Complex>() * Complex(0.0, -fb / sqrt_eta_)).array().exp().matrix();
      m_.noalias() = f_vectors_ * phase.asDiagonal() * f_vectors_.adjoint();
      mul_into(scratch_, m_, next_);
      mul_adjoint_into(next_, scratch_, m_.adjoint());
      scratch_ = next_.adjoint();
      next_ = 0.5 * (next_ + scratch_);
    }
  }
  rho.swap(next_);
  return dy / dt_;
}

namespace {

StepOutcome single_step(const Matrix& rho, const core::LindbladModel& model, const Detection& det,
                        const std::optional<FeedbackSpec>& fb, double dt, Philox& rng, DelayLine* line) {
  core::require_same_dim(model.dim(), rho.rows(), "SME model and state");
  SmeStepper s(model, det, fb, dt);
  StepOutcome out{rho, 0.0};
  out.sample = s.step(out.rho, rng, line);
  if (!positive_enough(out.rho)) throw PositivityViolation("conditioned state is no longer positive");
  return out;
}

}  // namespace

StepOutcome step_photon_counting(const Matrix& rho, const core::LindbladModel& model, double dt, Philox& rng) {
  return single_step(rho, model, PhotonCounting{}, std::nullopt, dt, rng, nullptr);
}

StepOutcome step_homodyne_jump(const Matrix& rho, const core::LindbladModel& model, double beta, double dt,
                               Philox& rng) {
  return single_step(rho, model, HomodyneJump{beta}, std::nullopt, dt, rng, nullptr);
}

StepOutcome step_homodyne_diffusive(const Matrix& rho, const core::LindbladModel& model, double eta, double dt,
                                    Philox& rng) {
  return single_step(rho, model, HomodyneDiffusive{eta}, std::nullopt, dt, rng, nullptr);
}

StepOutcome step_homodyne_feedback(const Matrix& rho, const core::LindbladModel& model, const core::Operator& f,
                                   double eta, double dt, Philox& rng, DelayLine* delay) {
  FeedbackSpec spec{f, Markovian{}};
  if (delay) spec.mode = Delayed{static_cast<double>(delay->lag()) * dt};
  return single_step(rho, model, HomodyneDiffusive{eta}, spec, dt, rng, delay);
}

namespace {

TrajectoryResult run_once(const SmeConfig& cfg, std::uint64_t stream, double dt, std::size_t steps,
                          std::size_t snapshot_every) {
  Philox rng(cfg.seed, stream);
  SmeStepper stepper(cfg.model, cfg.detection, cfg.feedback, dt);
  DelayLine line(stepper.delay_steps());
  const auto d = cfg.model.dim();
  const bool monitor = cfg.model.monitors_truncation() && d >= 3;
  PositivityCheck positive(d);

  TrajectoryResult r;
  r.dt = dt;
  r.record.reserve(steps);
  Matrix rho = cfg.rho0.matrix();
  if (snapshot_every) {
    r.snapshot_times.push_back(0.0);
    r.snapshots.push_back(rho);
  }
  for (std::size_t n = 0; n < steps; ++n) {
    const double sample = stepper.step(rho, rng, &line);
    r.record.push_back(sample);
    const double t = static_cast<double>(n + 1) * dt;
    if (stepper.is_jump() && sample > 0.0) r.jump_times.push_back(t);
    if (!positive(rho))
      throw PositivityViolation("conditioned state lost positivity at t = " + std::to_string(t));
    if (monitor) {
      const double top = rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
      r.diagnostics.max_top_level_population = std::max(r.diagnostics.max_top_level_population, top);
    }
    if (snapshot_every && (n + 1) % snapshot_every == 0) {
      r.snapshot_times.push_back(t);
      r.snapshots.push_back(rho);
    }
  }
  r.diagnostics.truncation_warning = r.diagnostics.max_top_level_population > core::kTruncationThreshold;
  r.final_state = std::move(rho);
  return r;
}

}  // namespace

TrajectoryResult run_trajectory(const SmeConfig& config, std::uint64_t stream) {
  config.validate();
  try {
    return run_once(config, stream, config.dt, config.steps, config.snapshot_every);
  } catch (const PositivityViolation&) {
  }
  TrajectoryResult fine = run_once(config, stream, 0.5 * config.dt, 2 * config.steps, 2 * config.snapshot_every);
  const bool jump = !std::holds_alternative<HomodyneDiffusive>(config.detection);
  std::vector<double> coarse(config.steps);
  for (std::size_t k = 0; k < config.steps; ++k) {
    const double a = fine.record[2 * k], b = fine.record[2 * k + 1];
    coarse[k] = jump ? a + b : 0.5 * (a + b);
  }
  fine.record = std::move(coarse);
  fine.dt = config.dt;
  fine.diagnostics.refined = true;
  return fine;
}

}  // namespace qfb::traj
