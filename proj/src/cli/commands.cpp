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

#include "qfb/cli/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "qfb/atom_squash/atom_squash.hpp"
#include "qfb/errors.hpp"
#include "qfb/intracavity/intracavity.hpp"
#include "qfb/loop_spectra/spectra.hpp"
#include "qfb/qnd_cavity/qnd_cavity.hpp"
#include "qfb/quantum_core/evolve.hpp"
#include "qfb/semiclassical/psd.hpp"
#include "qfb/semiclassical/simulate.hpp"
#include "qfb/trajectories/ensemble.hpp"

#ifndef QFB_VERSION
#define QFB_VERSION "unknown"
#endif

namespace qfb::cli {

const char* version() { return QFB_VERSION; }

namespace {

using P = ParamType;

ParamSpec real(std::string name, std::string def, std::string help) {
  return {std::move(name), P::Real, std::move(def), std::move(help)};
}
ParamSpec integer(std::string name, std::string def, std::string help) {
  return {std::move(name), P::Integer, std::move(def), std::move(help)};
}
ParamSpec flag(std::string name, std::string help) { return {std::move(name), P::Boolean, "false", std::move(help)}; }
ParamSpec text(std::string name, std::string def, std::string help) {
  return {std::move(name), P::Text, std::move(def), std::move(help)};
}

// Output location; not part of the physics, so left out of the CSV header.
bool is_output_param(const std::string& name) { return name == "out-dir" || name == "name" || name == "stdout"; }

std::vector<ParamSpec> with_output(std::vector<ParamSpec> specs) {
  specs.push_back(text("out-dir", "", std::string("output directory (default $") + kOutputDirEnv +
                                          " or the working directory)"));
  specs.push_back(text("name", "", "output file stem (default: subcommand name)"));
  specs.push_back(flag("stdout", "write the CSV to standard output instead of the output directory"));
  return specs;
}

std::vector<double> grid(const RunConfig& c, const std::string& lo, const std::string& hi, const std::string& n) {
  const std::size_t points = c.count(n);
  if (points == 0) throw ValidationError("parameter '" + n + "' must be at least 1");
  return loop::linear_grid(c.real(lo), c.real(hi), points);
}

loop::FeedbackBeamline beamline(const RunConfig& c) {
  loop::FeedbackBeamline b;
  b.beta = c.real("beta");
  b.eta1 = c.real("eta1");
  b.eta2 = c.real("eta2");
  const double sx = c.real("s0x"), sy = c.real("s0y");
  b.s0x = [sx](double) { return sx; };
  b.s0y = [sy](double) { return sy; };
  b.validate();
  return b;
}

// ---------------------------------------------------------------- spectra

CsvTable cmd_spectra(const RunConfig& c) {
  const loop::LoopFilter f(c.real("g"), loop::SinglePole{c.real("gamma")}, c.real("T"));
  const auto b = beamline(c);
  const auto w = grid(c, "wmin", "wmax", "n");
  const auto in = loop::in_loop_spectrum(f, b, w);
  const auto out = loop::out_of_loop_spectrum(f, b, w);
  CsvTable t({"omega", "s2x", "s3x", "s2y", "s3y"});
  t.comment("max_bandwidth: " + format_number(loop::max_bandwidth(f)));
  for (std::size_t k = 0; k < w.size(); ++k)
    t.add_row(std::vector<double>{w[k], in.x.value[k], out.x.value[k], in.y.value[k], out.y.value[k]});
  return t;
}

// -------------------------------------------------------------- stability

CsvTable cmd_stability(const RunConfig& c) {
  const auto gs = grid(c, "g-min", "g-max", "g-n");
  const auto rates = grid(c, "gamma-min", "gamma-max", "gamma-n");
  const auto delays = grid(c, "T-min", "T-max", "T-n");
  const bool time_domain = c.boolean("time-domain");
  std::vector<std::string> cols{"g", "gamma", "T", "unstable_roots", "stable", "marginal", "max_bandwidth"};
  if (time_domain) cols.push_back("diverges");
  CsvTable t(cols);
  std::uint64_t point = 0;
  for (double g : gs)
    for (double gamma : rates)
      for (double delay : delays) {
        const loop::LoopFilter f(g, loop::SinglePole{gamma}, delay);
        double roots = NAN, stable = NAN, marginal = 0.0;
        try {
          const int n = loop::unstable_root_count(f);
          roots = n;
          stable = n == 0 ? 1.0 : 0.0;
        } catch (const MarginalStability&) {
          marginal = 1.0;
        }
        std::vector<double> row{g, gamma, delay, roots, stable, marginal, loop::max_bandwidth(f)};
        if (time_domain) {
          const bool d = semiclassical::diverges_in_time_domain(f, c.real("dt"), c.real("duration"),
                                                                static_cast<std::uint64_t>(c.integer("seed")) + point);
          row.push_back(d ? 1.0 : 0.0);
        }
        t.add_row(row);
        ++point;
      }
  return t;
}

// ---------------------------------------------------------- semiclassical

CsvTable cmd_semiclassical(const RunConfig& c) {
  semiclassical::SemiclassicalSim sim{loop::LoopFilter(c.real("g"), loop::SinglePole{c.real("gamma")}, c.real("T")),
                                      c.real("eta1"),
                                      c.real("eta2"),
                                      c.real("dt"),
                                      c.real("duration"),
                                      static_cast<std::uint64_t>(c.integer("seed")),
                                      std::nullopt};
  if (c.real("excess") != 0.0) sim.classical_noise = semiclassical::ClassicalNoise{c.real("excess"), c.real("corner")};
  semiclassical::validate(sim);
  const auto series = semiclassical::simulate(sim);
  const std::size_t segments = c.count("segments");
  const auto s2 = semiclassical::estimate_psd(series.i2, series.dt, segments);
  const auto s3 = semiclassical::estimate_psd(series.i3, series.dt, segments);
  const auto b = sim.beamline();
  CsvTable t({"omega", "s2x", "s2x_se", "s3x", "s3x_se", "s2x_theory", "s3x_theory"});
  t.comment("samples: " + std::to_string(series.i2.size()) + " after " + std::to_string(series.burn_in_steps) +
            " burn-in steps");
  for (std::size_t k = 0; k < s2.size(); ++k) {
    const double w = s2.omega[k];
    t.add_row(std::vector<double>{w, s2.value[k], s2.standard_error[k], s3.value[k], s3.standard_error[k],
                                  loop::s2x_at(sim.filter, b, w), loop::s3x_at(sim.filter, b, w)});
  }
  return t;
}

// -------------------------------------------------------------------- qnd

CsvTable cmd_qnd(const RunConfig& c) {
  qnd::QndFeedbackParams p{qnd::QndParams{c.real("kappa"), c.real("gamma"), c.real("chi")},
                           loop::LoopFilter(c.real("g"), loop::SinglePole{c.real("filter-rate")}, c.real("T"))};
  p.qnd.validate();
  const auto w = grid(c, "wmin", "wmax", "n");
  const auto s = qnd::qnd_feedback_output_spectra(p, w);
  CsvTable t({"omega", "sx_out", "sy_out", "product"});
  t.comment("Q: " + format_number(p.qnd.q_factor()));
  for (std::size_t k = 0; k < w.size(); ++k)
    t.add_row(std::vector<double>{w[k], s.x.value[k], s.y.value[k], s.x.value[k] * s.y.value[k]});
  return t;
}

// ------------------------------------------------------------- trajectory

struct Prepared {
  traj::SmeConfig config;
  std::vector<traj::Observable> observables;
};

traj::Detection detection_for(const RunConfig& c, const std::string& fallback) {
  std::string d = c.text("detection");
  if (d == "auto") d = fallback;
  if (d == "counting") return traj::PhotonCounting{};
  if (d == "homodyne-jump") return traj::HomodyneJump{c.real("beta")};
  if (d == "homodyne") return traj::HomodyneDiffusive{c.real("eta")};
  throw ValidationError("parameter 'detection' must be one of auto, counting, homodyne-jump, homodyne; got '" + d +
                        "'");
}

Prepared prepare_trajectory(const RunConfig& c) {
  using namespace qfb::core;
  const std::string preset = c.text("preset");
  const double lambda = c.real("lambda");
  const std::size_t cutoff_flag = c.count("cutoff");
  std::optional<LindbladModel> model;
  std::optional<DensityMatrix> rho0;
  std::optional<Operator> f;
  std::vector<traj::Observable> obs;
  std::string fallback;
  if (preset == "damped-cavity") {
    const Eigen::Index n = cutoff_flag ? static_cast<Eigen::Index>(cutoff_flag) : 4;
    if (n < 2) throw ValidationError("parameter 'cutoff' must be at least 2");
    model = LindbladModel(Operator(Matrix::Zero(n, n)), {{1.0, annihilation(n)}});
    rho0 = fock_state(n, std::min<Eigen::Index>(1, n - 1));
    if (lambda != 0.0) f = intracavity::feedback_operator(lambda, n);
    obs = {traj::expectation("n", number(n))};
    fallback = "counting";
  } else if (preset == "atom") {
    model = LindbladModel(Complex(0.5 * c.real("rabi")) * sigma_x(), {{1.0, sigma_minus()}});
    rho0 = fock_state(2, c.boolean("excited") ? 1 : 0);
    if (lambda != 0.0) f = Complex(0.5 * lambda) * sigma_y();
    obs = {traj::expectation("sx", sigma_x()), traj::expectation("sy", sigma_y()),
           traj::expectation("sz", sigma_z())};
    fallback = "homodyne";
  } else if (preset == "linear-cavity") {
    const intracavity::IntracavityParams p{c.real("l"), c.real("theta"), c.real("eta"),
                                           intracavity::Measurement::Homodyne, 1.0};
    p.validate();
    const Eigen::Index n = cutoff_flag ? static_cast<Eigen::Index>(cutoff_flag) : 16;
    model = intracavity::linear_cavity_model(p, n);
    rho0 = steady_state(*model);
    if (lambda != 0.0) f = intracavity::feedback_operator(lambda, n);
    const Operator x = quadrature_x(annihilation(n));
    obs = {traj::expectation("x", x), traj::conditioned_variance("vx", x)};
    fallback = "homodyne";
  } else {
    throw ValidationError("parameter 'preset' must be one of damped-cavity, atom, linear-cavity; got '" + preset +
                          "'");
  }
  const double duration = c.real("t"), dt = c.real("dt");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("parameter 'dt' must be positive");
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("parameter 't' must be positive");
  traj::SmeConfig cfg{*model,
                      *rho0,
                      detection_for(c, fallback),
                      std::nullopt,
                      dt,
                      static_cast<std::size_t>(std::llround(duration / dt)),
                      static_cast<std::uint64_t>(c.integer("seed")),
                      c.count("snapshot-every")};
  if (f) {
    const double delay = c.real("delay");
    cfg.feedback = traj::FeedbackSpec{*f, delay > 0.0 ? traj::FeedbackMode{traj::Delayed{delay}}
                                                      : traj::FeedbackMode{traj::Markovian{}}};
  }
  if (cfg.snapshot_every == 0) throw ValidationError("parameter 'snapshot-every' must be at least 1");
  cfg.validate();
  return {std::move(cfg), std::move(obs)};
}

CsvTable cmd_trajectory(const RunConfig& c) {
  auto [cfg, obs] = prepare_trajectory(c);
  traj::EnsembleOptions opt;
  opt.observables = obs;
  opt.mean_state = false;
  const std::size_t n = c.count("n-traj");
  const auto s = traj::run_ensemble(cfg, n, opt);
  std::vector<std::string> cols{"t"};
  for (const auto& o : obs) {
    cols.push_back(o.name + "_mean");
    cols.push_back(o.name + "_se");
  }
  CsvTable t(cols);
  t.comment("trajectories: " + std::to_string(s.succeeded) + " of " + std::to_string(s.requested) + " succeeded");
  for (const auto& f : s.failures)
    t.comment("failed trajectory " + std::to_string(f.index) + ": " + f.message);
  t.comment("total_jumps: " + std::to_string(s.total_jumps) + ", refined: " + std::to_string(s.refined));
  t.comment("record_mean_per_step: " + format_number(s.record_mean));
  const double ns = static_cast<double>(s.succeeded);
  for (std::size_t j = 0; j < s.times.size(); ++j) {
    std::vector<double> row{s.times[j]};
    for (std::size_t k = 0; k < obs.size(); ++k) {
      row.push_back(s.observable_mean[k][j]);
      row.push_back(std::sqrt(s.observable_variance[k][j] / ns));
    }
    t.add_row(row);
  }
  return t;
}

// ------------------------------------------------------------ intracavity

CsvTable cmd_intracavity(const RunConfig& c) {
  using namespace qfb::intracavity;
  const std::string mode = c.text("mode");
  if (mode != "homodyne" && mode != "qnd")
    throw ValidationError("parameter 'mode' must be homodyne or qnd; got '" + mode + "'");
  const IntracavityParams p{c.real("l"), c.real("theta"), c.real("eta"),
                            mode == "qnd" ? Measurement::Qnd : Measurement::Homodyne, c.real("strength")};
  p.validate();
  const std::string sweep = c.text("sweep");
  const double uc = conditioned_variance(p), lopt = optimal_lambda(p);
  auto header = [&](CsvTable& t) {
    t.comment("k0: " + format_number(p.k0()) + ", u0: " + format_number(p.u0()));
    t.comment("conditioned_variance: " + format_number(uc) + ", optimal_lambda: " + format_number(lopt) +
              ", u_min: " + format_number(u_min(p)));
  };
  if (sweep == "lambda") {
    const double delay = c.real("delay");
    std::vector<std::string> cols{"lambda", "u_lambda"};
    if (delay > 0.0) cols.push_back("u_lambda_delayed");
    CsvTable t(cols);
    header(t);
    for (double lam : grid(c, "lambda-min", "lambda-max", "n")) {
      std::vector<double> row{lam, unconditioned_variance(p, lam)};
      if (delay > 0.0) row.push_back(unconditioned_variance_delayed(p, lam, delay));
      t.add_row(row);
    }
    return t;
  }
  if (sweep == "eta") {
    CsvTable t({"eta", "conditioned_variance", "optimal_lambda", "u_min"});
    header(t);
    for (double eta : grid(c, "eta-min", "eta-max", "n")) {
      IntracavityParams q = p;
      q.eta = eta;
      q.validate();
      t.add_row(std::vector<double>{eta, conditioned_variance(q), optimal_lambda(q), u_min(q)});
    }
    return t;
  }
  if (sweep == "riccati") {
    const double init = !std::isnan(c.real("initial")) ? c.real("initial") : (mode == "qnd" ? p.u0() + 1.0 : p.u0());
    const auto times = grid(c, "t-min", "t-max", "n");
    const auto u = conditioned_variance_trajectory(p, init, times);
    CsvTable t({"t", mode == "qnd" ? "v_c" : "u_c"});
    header(t);
    for (std::size_t k = 0; k < times.size(); ++k) t.add_row(std::vector<double>{times[k], u[k]});
    return t;
  }
  throw ValidationError("parameter 'sweep' must be lambda, eta or riccati; got '" + sweep + "'");
}

// ------------------------------------------------------------------- atom

void rate_rows(CsvTable& t, const char* prefix, const atom::BlochRates& r) {
  const std::string p(prefix);
  t.add_row(std::vector<Cell>{p + "gamma_x", r.gamma_x});
  t.add_row(std::vector<Cell>{p + "gamma_y", r.gamma_y});
  t.add_row(std::vector<Cell>{p + "gamma_z", r.gamma_z});
  t.add_row(std::vector<Cell>{p + "c", r.c});
}

CsvTable cmd_atom(const RunConfig& c) {
  const double eta = c.real("eta"), eps = c.real("eps");
  const double lambda = c.boolean("lambda-opt") ? -eta * eps : c.real("lambda");
  const auto p = atom::AtomLoopParams::from_lambda(eta, eps, lambda);
  p.validate();
  const std::string output = c.text("output");
  if (output == "rates") {
    CsvTable t({"quantity", "value"});
    const auto r = atom::decay_rates(p);
    const auto b = atom::steady_state_bloch(p);
    t.add_row(std::vector<Cell>{"lambda", p.lambda()});
    t.add_row(std::vector<Cell>{"g", p.g});
    t.add_row(std::vector<Cell>{"in_loop_spectrum", atom::in_loop_spectrum(p)});
    rate_rows(t, "", r);
    t.add_row(std::vector<Cell>{"bloch_sx", b.sx});
    t.add_row(std::vector<Cell>{"bloch_sy", b.sy});
    t.add_row(std::vector<Cell>{"bloch_sz", b.sz});
    return t;
  }
  const auto w = grid(c, "wmin", "wmax", "n");
  if (output == "spectrum") {
    const auto s = atom::fluorescence_spectrum(p, w);
    CsvTable t({"omega", "p"});
    t.comment("lambda: " + format_number(p.lambda()));
    for (std::size_t k = 0; k < w.size(); ++k) t.add_row(std::vector<double>{w[k], s.value[k]});
    return t;
  }
  if (output == "compare") {
    const auto cmp = atom::compare_inloop_free(eta, atom::in_loop_spectrum(p), eps, w);
    CsvTable t({"omega", "p_in_loop", "p_free"});
    t.comment("lambda: " + format_number(cmp.lambda) + ", squeezing L: " + format_number(atom::in_loop_spectrum(p)));
    t.comment("in_loop gamma_x, gamma_y: " + format_number(cmp.in_loop.gamma_x) + ", " +
              format_number(cmp.in_loop.gamma_y));
    t.comment("free gamma_x, gamma_y: " + format_number(cmp.free.gamma_x) + ", " + format_number(cmp.free.gamma_y));
    for (std::size_t k = 0; k < w.size(); ++k)
      t.add_row(std::vector<double>{w[k], cmp.p_in_loop.value[k], cmp.p_free.value[k]});
    return t;
  }
  throw ValidationError("parameter 'output' must be rates, spectrum or compare; got '" + output + "'");
}

std::vector<Command> build_commands() {
  const auto loop_params = [](std::vector<ParamSpec> extra) {
    std::vector<ParamSpec> v{real("g", "-1", "loop gain"), real("gamma", "1", "detector response rate"),
                             real("T", "0", "loop delay"), real("beta", "1", "beamsplitter amplitude ratio"),
                             real("eta1", "1", "in-loop detector efficiency"),
                             real("eta2", "1", "beamsplitter transmission to the in-loop detector"),
                             real("s0x", "1", "input amplitude-quadrature spectrum (constant)"),
                             real("s0y", "1", "input phase-quadrature spectrum (constant)")};
    v.insert(v.end(), extra.begin(), extra.end());
    return v;
  };
  std::vector<Command> cmds;
  cmds.push_back({"spectra", "in-loop and out-of-loop photocurrent spectra of the linear feedback loop",
                  with_output(loop_params({real("wmin", "0", "lowest frequency"),
                                           real("wmax", "5", "highest frequency"),
                                           integer("n", "256", "frequency points")})),
                  false, cmd_spectra});
  cmds.push_back({"stability", "Nyquist stability map over (g, gamma, T)",
                  with_output({real("g-min", "-4", ""), real("g-max", "1", ""), integer("g-n", "5", ""),
                               real("gamma-min", "0.5", ""), real("gamma-max", "2", ""), integer("gamma-n", "2", ""),
                               real("T-min", "0", ""), real("T-max", "1", ""), integer("T-n", "5", ""),
                               flag("time-domain", "also simulate each loop and report divergence"),
                               real("dt", "1e-3", "time-domain step"), real("duration", "50", "time-domain span"),
                               integer("seed", "0", "base seed; point k uses seed + k")}),
                  true, cmd_stability});
  cmds.push_back({"semiclassical", "Monte Carlo photocurrents, Welch spectra and closed-form overlay",
                  with_output({real("g", "-1", "loop gain"), real("gamma", "10", "detector response rate"),
                               real("T", "0", "loop delay"), real("eta1", "1", "in-loop detector efficiency"),
                               real("eta2", "0.5", "beamsplitter transmission to the in-loop detector"),
                               real("dt", "1e-3", "sample interval"), real("duration", "1000", "simulated time"),
                               real("excess", "0", "classical input excess noise"),
                               real("corner", "1", "corner frequency of the excess noise"),
                               integer("segments", "106", "Welch segments"), integer("seed", "1", "RNG seed")}),
                  true, cmd_semiclassical});
  cmds.push_back({"qnd", "output spectra of the QND cavity pair with feedback",
                  with_output({real("kappa", "1", "signal mode decay"), real("gamma", "1", "meter mode decay"),
                               real("chi", "1", "QND coupling"), real("g", "0", "feedback gain"),
                               real("filter-rate", "100", "feedback response rate"), real("T", "0", "loop delay"),
                               real("wmin", "0", ""), real("wmax", "5", ""), integer("n", "256", "")}),
                  false, cmd_qnd});
  cmds.push_back({"trajectory", "ensembles of conditioned quantum trajectories",
                  with_output({text("preset", "damped-cavity", "damped-cavity, atom or linear-cavity"),
                               text("detection", "auto", "auto, counting, homodyne-jump or homodyne"),
                               real("beta", "4", "local-oscillator amplitude for homodyne-jump"),
                               real("eta", "1", "homodyne efficiency"),
                               real("lambda", "0", "feedback strength (0 disables feedback)"),
                               real("delay", "0", "feedback delay (0 is Markovian)"),
                               real("rabi", "1", "atom Rabi frequency"),
                               flag("excited", "start the atom in the excited state"),
                               real("l", "0", "linear cavity extra x diffusion"),
                               real("theta", "0.3", "linear cavity parametric drive"),
                               integer("cutoff", "0", "Fock cutoff (0 chooses per preset)"),
                               real("dt", "1e-3", "time step"), real("t", "2", "duration"),
                               integer("n-traj", "100", "trajectories"),
                               integer("snapshot-every", "100", "steps between output rows"),
                               integer("seed", "0", "RNG seed")}),
                  true, cmd_trajectory});
  cmds.push_back({"intracavity", "intracavity squeezing: lambda and eta sweeps, Riccati series",
                  with_output({text("mode", "homodyne", "homodyne or qnd"), text("sweep", "lambda", "lambda, eta or riccati"),
                               real("l", "0", "extra x diffusion"), real("theta", "0.5", "parametric drive"),
                               real("eta", "1", "homodyne efficiency"), real("strength", "1", "QND strength H"),
                               real("lambda-min", "0", ""), real("lambda-max", "2", ""),
                               real("delay", "0", "feedback delay for the lambda sweep"),
                               real("eta-min", "0.05", ""), real("eta-max", "1", ""),
                               real("t-min", "0", ""), real("t-max", "10", ""),
                               real("initial", "nan", "Riccati initial value (nan: no-measurement value)"),
                               integer("n", "101", "sweep points")}),
                  false, cmd_intracavity});
  cmds.push_back({"atom", "two-level atom in a homodyne feedback loop",
                  with_output({real("eta", "0.8", "mode matching"), real("eps", "0.95", "detector efficiency"),
                               real("lambda", "0", "feedback strength"),
                               flag("lambda-opt", "use lambda = -eta eps"),
                               text("output", "rates", "rates, spectrum or compare"), real("wmin", "-5", ""),
                               real("wmax", "5", ""), integer("n", "201", "")}),
                  false, cmd_atom});
  return cmds;
}

std::vector<std::string> command_names() {
  std::vector<std::string> n;
  for (const auto& c : commands()) n.push_back(c.name);
  return n;
}

std::string header(const Command& cmd, const RunConfig& c) {
  std::ostringstream os;
  os << "# qfb " << version() << "\n";
  os << "# subcommand: " << cmd.name << "\n";
  for (const auto& v : c.values())
    if (!is_output_param(v.spec.name))
      os << "# config: " << v.spec.name << " = " << v.value << " (" << to_string(v.source) << ")\n";
  os << "# seed: " << (cmd.stochastic ? c.text("seed") : std::string("none")) << "\n";
  return os.str();
}

int execute(const Command& cmd, const std::string& config_path, const std::map<std::string, std::string>& flags,
            std::ostream& out) {
  RunConfig cfg(cmd.name, cmd.params);
  if (!config_path.empty()) cfg.apply_file(load_ini(config_path), command_names());
  for (const auto& [k, v] : flags) cfg.apply_flag(k, v);
  const CsvTable table = cmd.execute(cfg);
  std::ostringstream body;
  body << header(cmd, cfg);
  table.write(body);
  if (cfg.boolean("stdout")) {
    out << body.str();
    return 0;
  }
  const char* env = std::getenv(kOutputDirEnv);
  const std::filesystem::path dir = !cfg.text("out-dir").empty() ? cfg.text("out-dir") : env && *env ? env : ".";
  const std::string stem = cfg.text("name").empty() ? cmd.name : cfg.text("name");
  std::filesystem::create_directories(dir);
  const auto csv = dir / (stem + ".csv");
  const auto ini = dir / (stem + ".config.ini");
  {
    std::ofstream f(csv, std::ios::binary);
    f << body.str();
    if (!f) throw Error("cannot write " + csv.string());
  }
  {
    std::ofstream f(ini, std::ios::binary);
    f << "# effective configuration (qfb " << version() << ")\n" << cfg.echo();
    if (!f) throw Error("cannot write " + ini.string());
  }
  out << csv.string() << "\n";
  return 0;
}

}  // namespace

const std::vector<Command>& commands() {
  static const std::vector<Command> cmds = build_commands();
  return cmds;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Quantum feedback spectra, stability maps and trajectory ensembles", "qfb");
  app.set_version_flag("--version", version());
  app.require_subcommand(1);
  struct Bound {
    const Command* cmd;
    CLI::App* app;
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  std::vector<Bound> bound;
  bound.reserve(commands().size());
  for (const auto& c : commands()) {
    bound.push_back({&c, app.add_subcommand(c.name, c.description), {}, {}, {}});
    auto& b = bound.back();
    b.app->add_option("--config", b.config, "flat INI file; flags override its values");
    for (const auto& p : c.params) {
      const std::string help = p.help + " [default: " + p.default_value + "]";
      if (p.type == ParamType::Boolean)
        b.options[p.name] = b.app->add_flag("--" + p.name, help);
      else
        b.options[p.name] = b.app->add_option("--" + p.name, b.values[p.name], help);
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  for (auto& b : bound) {
    if (!b.app->parsed()) continue;
    std::map<std::string, std::string> flags;
    for (const auto& [name, opt] : b.options) {
      if (opt->count() == 0) continue;
      flags[name] = b.values.count(name) ? b.values[name] : "true";
    }
    try {
      return execute(*b.cmd, b.config, flags, out);
    } catch (const ValidationError& e) {
      err << "qfb " << b.cmd->name << ": invalid input: " << e.what() << "\n";
      return 2;
    } catch (const NumericalError& e) {
      err << "qfb " << b.cmd->name << ": numerical failure: " << e.what() << "\n";
      return 3;
    } catch (const std::exception& e) {
      err << "qfb " << b.cmd->name << ": error: " << e.what() << "\n";
      return 1;
    }
  }
  return 2;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace qfb::cli
