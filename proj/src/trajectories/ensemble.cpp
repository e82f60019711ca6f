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

#include "qfb/trajectories/ensemble.hpp"

#include <numeric>
#include <span>

#include "qfb/common/parallel.hpp"
#include "qfb/errors.hpp"
#include "qfb/semiclassical/psd.hpp"

namespace qfb::traj {

Observable expectation(std::string name, const core::Operator& op) {
  Matrix m = op.matrix();
  return {std::move(name), [m](const Matrix& rho) { return (m * rho).trace().real(); }};
}

Observable conditioned_variance(std::string name, const core::Operator& op) {
  Matrix m = op.matrix();
  Matrix m2 = m * m;
  return {std::move(name), [m, m2](const Matrix& rho) {
            const double mean = (m * rho).trace().real();
            return (m2 * rho).trace().real() - mean * mean;
          }};
}

namespace {

struct Partial {
  bool ok = false;
  std::string error;
  std::vector<Matrix> states;
  std::vector<std::vector<double>> obs;
  std::optional<semiclassical::WelchAccumulator> welch;
  double record_sum = 0.0;
  std::size_t record_count = 0;
  std::size_t jumps = 0;
  bool refined = false;
  std::vector<double> times;
};

Partial run_partial(const SmeConfig& cfg, std::size_t index, const EnsembleOptions& opt) {
  Partial p;
  try {
    TrajectoryResult r = run_trajectory(cfg, index);
    p.times = std::move(r.snapshot_times);
    p.obs.resize(opt.observables.size());
    for (std::size_t k = 0; k < opt.observables.size(); ++k)
      for (const auto& s : r.snapshots) p.obs[k].push_back(opt.observables[k].value(s));
    if (opt.mean_state) p.states = std::move(r.snapshots);
    const std::size_t burn = std::min(opt.psd_burn_in_steps, r.record.size());
    std::span<const double> tail(r.record.data() + burn, r.record.size() - burn);
    p.record_sum = std::accumulate(tail.begin(), tail.end(), 0.0);
    p.record_count = tail.size();
    if (opt.psd_segment_length) {
      p.welch.emplace(opt.psd_segment_length, cfg.dt);
      const double mean = p.record_count ? p.record_sum / static_cast<double>(p.record_count) : 0.0;
      p.welch->add(tail, mean);
    }
    p.jumps = r.jump_times.size();
    p.refined = r.diagnostics.refined;
    p.ok = true;
  } catch (const NumericalError& e) {
    p.error = e.what();
  }
  return p;
}

class Merger {
 public:
  Merger(const EnsembleOptions& opt, std::size_t n) : opt_(opt) { s_.requested = n; }

  void add(std::size_t index, Partial&& p) {
    if (!p.ok) {
      s_.failures.push_back({index, std::move(p.error)});
      return;
    }
    if (s_.succeeded == 0) {
      s_.times = p.times;
      sum_obs_.assign(p.obs.size(), std::vector<double>(p.times.size(), 0.0));
      sum_sq_.assign(p.obs.size(), std::vector<double>(p.times.size(), 0.0));
      if (opt_.mean_state) s_.mean_state.assign(p.states.size(), Matrix::Zero(0, 0));
    }
    ++s_.succeeded;
    for (std::size_t k = 0; k < p.obs.size(); ++k)
      for (std::size_t j = 0; j < p.obs[k].size(); ++j) {
        sum_obs_[k][j] += p.obs[k][j];
        sum_sq_[k][j] += p.obs[k][j] * p.obs[k][j];
      }
    for (std::size_t j = 0; j < p.states.size(); ++j) {
      if (s_.mean_state[j].size() == 0)
        s_.mean_state[j] = p.states[j];
      else
        s_.mean_state[j] += p.states[j];
    }
    if (p.welch) {
      if (!welch_)
        welch_ = std::move(p.welch);
      else
        welch_->merge(*p.welch);
    }
    record_sum_ += p.record_sum;
    record_count_ += p.record_count;
    s_.total_jumps += p.jumps;
    s_.refined += p.refined ? 1 : 0;
  }

  EnsembleSummary finish() {
    if (10 * s_.succeeded < 9 * s_.requested) {
      std::string msg = std::to_string(s_.failures.size()) + " of " + std::to_string(s_.requested) +
                        " trajectories failed";
      if (!s_.failures.empty()) msg += "; first (index " + std::to_string(s_.failures.front().index) + "): " +
                                       s_.failures.front().message;
      throw EnsembleFailure(msg);
    }
    const double n = static_cast<double>(s_.succeeded);
    for (auto& m : s_.mean_state) m /= n;
    s_.observable_mean.resize(sum_obs_.size());
    s_.observable_variance.resize(sum_obs_.size());
    for (std::size_t k = 0; k < sum_obs_.size(); ++k) {
      for (std::size_t j = 0; j < sum_obs_[k].size(); ++j) {
        const double mean = sum_obs_[k][j] / n;
        s_.observable_mean[k].push_back(mean);
        s_.observable_variance[k].push_back(n > 1.0 ? std::max(0.0, (sum_sq_[k][j] - n * mean * mean) / (n - 1.0))
                                                    : 0.0);
      }
    }
    if (welch_) s_.psd = welch_->result();
    s_.record_mean = record_count_ ? record_sum_ / static_cast<double>(record_count_) : 0.0;
    return std::move(s_);
  }

 private:
  const EnsembleOptions& opt_;
  EnsembleSummary s_;
  std::vector<std::vector<double>> sum_obs_, sum_sq_;
  std::optional<semiclassical::WelchAccumulator> welch_;
  double record_sum_ = 0.0;
  std::size_t record_count_ = 0;
};

template <class Map>
EnsembleSummary run_blocks(const SmeConfig& config, std::size_t n_traj, const EnsembleOptions& opt, Map&& map) {
  if (n_traj == 0) throw ValidationError("ensemble needs at least one trajectory");
  config.validate();
  if (opt.psd_segment_length && opt.psd_burn_in_steps + opt.psd_segment_length > config.steps)
    throw TooShort("record after burn-in is shorter than one PSD segment");
  Merger merger(opt, n_traj);
  const std::size_t block = std::max<std::size_t>(1, opt.block);
  for (std::size_t start = 0; start < n_traj; start += block) {
    std::vector<std::size_t> idx(std::min(block, n_traj - start));
    std::iota(idx.begin(), idx.end(), start);
    auto parts = map(idx, [&](std::size_t k) { return run_partial(config, k, opt); });
    for (std::size_t j = 0; j < idx.size(); ++j) merger.add(idx[j], std::move(parts[j]));
  }
  return merger.finish();
}

}  // namespace

EnsembleSummary run_ensemble(const SmeConfig& config, std::size_t n_traj, const EnsembleOptions& options) {
  return run_blocks(config, n_traj, options, [](const auto& g, auto&& f) { return parallel_map(g, f); });
}

EnsembleSummary run_ensemble_serial(const SmeConfig& config, std::size_t n_traj, const EnsembleOptions& options) {
  return run_blocks(config, n_traj, options, [](const auto& g, auto&& f) { return serial_map(g, f); });
}

}  // namespace qfb::traj
