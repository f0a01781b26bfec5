#include "consensusflow/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "consensusflow/certify.hpp"
#include "consensusflow/csvio.hpp"
#include "consensusflow/oracle.hpp"
#include "consensusflow/svg.hpp"

namespace consensusflow {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void apply_overrides(ExperimentConfig& cfg, const CommonOverrides& o) {
  if (o.h) {
    if (!(*o.h > 0.0)) throw ConfigError("step size must be positive", "/params/h");
    cfg.params.h = *o.h;
  }
  if (o.alpha) {
    if (!(*o.alpha > 0.0)) throw ConfigError("alpha must be positive", "/params/alpha");
    cfg.params.alpha = *o.alpha;
  }
  if (o.t_end) {
    if (!(*o.t_end > 0.0)) throw ConfigError("time horizon must be positive", "/params/t_end");
    cfg.params.t_end = *o.t_end;
  }
  if (o.stop_tol) {
    if (*o.stop_tol < 0.0)
      throw ConfigError("stop tolerance must be nonnegative", "/params/stop_tol");
    cfg.params.stop_tol = *o.stop_tol;
  }
  if (o.scheme) cfg.params.scheme = parse_scheme(*o.scheme);  // throws Error on bad name
  if (o.seed) cfg.params.seed = *o.seed;
  if (o.out_dir) cfg.outputs.dir = *o.out_dir;
}

// CONSENSUS_FLOW_OUT wins over the flag, which won over the config inside
// apply_overrides.
fs::path resolve_out_dir(const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("CONSENSUS_FLOW_OUT"); env != nullptr && *env != '\0')
    return fs::path(env);
  return fs::path(cfg.outputs.dir);
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot open output file '" + p.string() + "'");
  return out;
}

RunOptions run_options(const RunParams& p) {
  RunOptions o;
  o.h = p.h;
  o.t_end = p.t_end;
  o.stop_tol = p.stop_tol;
  o.scheme = p.scheme;
  o.record_stride = p.record_stride;
  o.seed = p.seed;
  return o;
}

void write_trace_csv(std::ostream& out, const TrajectoryTrace& trace, Eigen::Index nq) {
  std::vector<std::string> cells;
  cells.push_back("t");
  for (Eigen::Index j = 0; j < nq; ++j) cells.push_back("x_" + std::to_string(j + 1));
  for (Eigen::Index j = 0; j < nq; ++j) cells.push_back("lambda_" + std::to_string(j + 1));
  cells.push_back("residual");
  cells.push_back("consensus_gap");
  write_csv_row(out, cells);

  for (const auto& [state, rep] : trace.samples) {
    cells.clear();
    cells.push_back(format_double(state.t));
    for (Eigen::Index j = 0; j < nq; ++j) cells.push_back(format_double(state.x(j)));
    for (Eigen::Index j = 0; j < nq; ++j) cells.push_back(format_double(state.lambda(j)));
    cells.push_back(format_double(rep.residual));
    cells.push_back(format_double(rep.consensus_gap));
    write_csv_row(out, cells);
  }
}

// One stacked-component family (x or lambda) as t-indexed CSV plus chart
// series. `prefix` names the columns prefix_1..prefix_nq.
void write_component_csv(std::ostream& out, const TrajectoryTrace& trace, Eigen::Index nq,
                         const std::string& prefix, bool lambda) {
  std::vector<std::string> cells;
  cells.push_back("t");
  for (Eigen::Index j = 0; j < nq; ++j)
    cells.push_back(prefix + "_" + std::to_string(j + 1));
  write_csv_row(out, cells);
  for (const auto& [state, rep] : trace.samples) {
    (void)rep;
    cells.clear();
    cells.push_back(format_double(state.t));
    const Eigen::VectorXd& v = lambda ? state.lambda : state.x;
    for (Eigen::Index j = 0; j < nq; ++j) cells.push_back(format_double(v(j)));
    write_csv_row(out, cells);
  }
}

std::vector<ChartSeries> component_series(const TrajectoryTrace& trace, Eigen::Index nq,
                                          const std::string& prefix, bool lambda) {
  std::vector<ChartSeries> series(static_cast<std::size_t>(nq));
  for (Eigen::Index j = 0; j < nq; ++j)
    series[static_cast<std::size_t>(j)].label = prefix + "_" + std::to_string(j + 1);
  for (const auto& [state, rep] : trace.samples) {
    (void)rep;
    const Eigen::VectorXd& v = lambda ? state.lambda : state.x;
    for (Eigen::Index j = 0; j < nq; ++j) {
      series[static_cast<std::size_t>(j)].x.push_back(state.t);
      series[static_cast<std::size_t>(j)].y.push_back(v(j));
    }
  }
  return series;
}

void write_lyapunov_csv(std::ostream& out, const LyapunovReport& report) {
  write_csv_row(out, {"t", "V1", "V2", "Vstar", "W", "consensus_gap"});
  std::vector<std::string> cells;
  for (const LyapunovSample& s : report.samples) {
    cells = {format_double(s.t), format_double(s.V1), format_double(s.V2),
             format_double(s.Vstar), format_double(s.W), format_double(s.consensus_gap)};
    write_csv_row(out, cells);
  }
}

std::vector<ChartSeries> lyapunov_series(const LyapunovReport& report) {
  std::vector<ChartSeries> series(4);
  series[0].label = "V1";
  series[1].label = "V2";
  series[2].label = "Vstar";
  series[3].label = "W";
  for (const LyapunovSample& s : report.samples) {
    series[0].x.push_back(s.t);
    series[0].y.push_back(s.V1);
    series[1].x.push_back(s.t);
    series[1].y.push_back(s.V2);
    series[2].x.push_back(s.t);
    series[2].y.push_back(s.Vstar);
    series[3].x.push_back(s.t);
    series[3].y.push_back(s.W);
  }
  return series;
}

ordered_json vector_json(const Eigen::VectorXd& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void write_summary_json(std::ostream& out, const ProblemInstance& p,
                        const TrajectoryTrace& trace, const ExperimentConfig& cfg,
                        const std::string& initial_note) {
  const SystemState& final_state = trace.samples.back().first;
  const StepReport& final_rep = trace.samples.back().second;
  ordered_json j;
  j["final_consensus"] = vector_json(consensus_mean(p, final_state.x));
  j["final_x"] = vector_json(final_state.x);
  j["final_lambda"] = vector_json(final_state.lambda);
  j["residual"] = final_rep.residual;
  j["consensus_gap"] = final_rep.consensus_gap;
  j["steps"] = trace.meta.steps;
  j["t_final"] = final_state.t;
  j["stop_reason"] = trace.meta.stop_reason;
  j["params"] = {{"alpha", p.alpha()},
                 {"h", trace.meta.h},
                 {"t_end", cfg.params.t_end},
                 {"stop_tol", trace.meta.stop_tol},
                 {"scheme", scheme_name(trace.meta.scheme)},
                 {"k_fraction", cfg.params.k_fraction},
                 {"record_stride", cfg.params.record_stride},
                 {"seed", trace.meta.seed}};
  j["initial_conditions"] = {{"x0", vector_json(p.stacked_x0())},
                             {"lambda0", vector_json(p.stacked_lambda0())},
                             {"note", initial_note}};
  j["wall_ms"] = trace.meta.wall_ms;
  out << j.dump(2) << "\n";
}

// A Lyapunov reference for the trace: a certified optimal pair when one can
// be built (bounded scalar instances via the grid oracle, otherwise the
// run's own consensus value if it certifies), else the run's final state.
LyapunovRef make_lyapunov_ref(const ProblemInstance& p, const TrajectoryTrace& trace) {
  const SystemState& final_state = trace.samples.back().first;
  if (p.q() == 1) {
    std::vector<double> candidates;
    try {
      candidates.push_back(grid_solve_1d(p, 1e-3).x_opt(0));
    } catch (const Error&) {
      // Unbounded or non-interval feasible set; fall through to the
      // consensus candidate.
    }
    candidates.push_back(consensus_mean(p, final_state.x)(0));
    for (double c : candidates) {
      try {
        const OptimalityCertificate cert = reconstruct_lambda_star(p, c);
        if (!cert.verified) continue;
        LyapunovRef ref;
        ref.x_ref = Eigen::VectorXd::Constant(p.n(), c);
        ref.lambda_ref = cert.lambda_star;
        ref.certified_optimum = true;
        return ref;
      } catch (const Error&) {
        continue;
      }
    }
  }
  return LyapunovRef{final_state.x, final_state.lambda, false};
}

int input_error(std::ostream& err, const std::exception& e) {
  err << "error: " << e.what() << "\n";
  return kExitInputError;
}

bool parse_double_strict(const std::string& s, double& out) {
  try {
    std::size_t pos = 0;
    out = std::stod(s, &pos);
    return pos == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

}  // namespace

ExperimentConfig builtin_experiment_config(bool unconstrained) {
  ExperimentConfig cfg;
  for (int i = 1; i <= 5; ++i) {
    const double lo = static_cast<double>(i) - 12.0;
    const double hi = static_cast<double>(i) - 2.0;
    Eigen::VectorXd x0(1);
    x0(0) = 0.5 * (lo + hi);
    ConvexSet set = unconstrained
                        ? ConvexSet(WholeSpace{1})
                        : ConvexSet(Box{Eigen::VectorXd::Constant(1, lo),
                                        Eigen::VectorXd::Constant(1, hi)});
    cfg.agents.push_back(AgentSpec{ConvexFunction(Deadzone{static_cast<double>(i), 5.0}),
                                   std::move(set), x0, Eigen::VectorXd::Zero(1)});
  }
  cfg.adjacency.resize(5, 5);
  cfg.adjacency << 0, 1, 0, 0, 1,
                   1, 0, 1, 0, 1,
                   0, 1, 0, 1, 0,
                   0, 0, 1, 0, 1,
                   1, 1, 0, 1, 0;
  cfg.params.alpha = 1.0;
  cfg.params.h = 1e-3;
  cfg.params.t_end = 60.0;
  cfg.params.stop_tol = 1e-6;
  cfg.params.scheme = Scheme::ProjectedEuler;
  cfg.params.k_fraction = 0.5;
  cfg.params.record_stride = 10;
  cfg.params.seed = 0;
  cfg.outputs.emit_svg = true;
  cfg.outputs.emit_lyapunov = true;
  return cfg;
}

int cmd_run(const RunCommand& cmd, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  TrajectoryTrace trace;
  std::optional<ProblemInstance> instance;
  try {
    cfg = load_config(cmd.config_path);
    apply_overrides(cfg, cmd.common);
    if (cmd.set_override) {
      if (*cmd.set_override != "whole")
        throw ConfigError("unknown set override '" + *cmd.set_override +
                              "' (supported: whole)",
                          "/agents");
      for (AgentSpec& a : cfg.agents) a.constraint = ConvexSet(WholeSpace{a.constraint.dim()});
    }
    instance.emplace(build_instance(cfg));
    for (std::size_t i = 0; i < cfg.agents.size(); ++i) {
      if (!probably_has_interior(cfg.agents[i].constraint))
        err << "warning: agent " << i
            << ": no sampled point lies strictly inside every member of its "
               "intersection set; the common-interior assumption may fail\n";
    }
    trace = run(*instance, run_options(cfg.params));
  } catch (const std::exception& e) {
    return input_error(err, e);
  }

  try {
    const fs::path dir = resolve_out_dir(cfg);
    const Eigen::Index nq = instance->n() * instance->q();
    {
      auto f = open_out(dir, "trace.csv");
      write_trace_csv(f, trace, nq);
    }
    {
      auto f = open_out(dir, "summary.json");
      write_summary_json(f, *instance, trace, cfg, "from config");
    }
    if (cfg.outputs.emit_svg) {
      auto f = open_out(dir, "trace.svg");
      write_line_chart(f, "Primal trajectories", "t", "x",
                       component_series(trace, nq, "x", false));
    }
    if (cfg.outputs.emit_lyapunov) {
      const GainSchedule sched =
          build_gain_schedule(instance->network(), instance->alpha(), cfg.params.k_fraction);
      const LyapunovRef ref = make_lyapunov_ref(*instance, trace);
      const LyapunovReport report = lyapunov_audit(*instance, trace, ref, sched);
      {
        auto f = open_out(dir, "lyapunov.csv");
        write_lyapunov_csv(f, report);
      }
      if (cfg.outputs.emit_svg) {
        auto f = open_out(dir, "lyapunov.svg");
        write_line_chart(f, "Lyapunov series", "t", "value", lyapunov_series(report));
      }
      out << "lyapunov reference: " << (report.certified ? "certified optimum" : "final state")
          << "\n";
    }
  } catch (const std::exception& e) {
    return input_error(err, e);
  }

  const SystemState& final_state = trace.samples.back().first;
  const Eigen::VectorXd consensus = consensus_mean(*instance, final_state.x);
  out << "stop_reason=" << trace.meta.stop_reason << " steps=" << trace.meta.steps
      << " t_final=" << format_double(final_state.t) << " residual="
      << format_double(trace.samples.back().second.residual) << " consensus=";
  for (Eigen::Index i = 0; i < consensus.size(); ++i)
    out << (i ? ";" : "") << format_double(consensus(i));
  out << "\n";
  return trace.meta.stop_reason == "converged" ? kExitOk : kExitNotConverged;
}

int cmd_repro(const ReproCommand& cmd, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  TrajectoryTrace trace;
  std::optional<ProblemInstance> instance;
  try {
    cfg = builtin_experiment_config(cmd.unconstrained);
    apply_overrides(cfg, cmd.common);
    instance.emplace(build_instance(cfg));
    trace = run(*instance, run_options(cfg.params));
  } catch (const std::exception& e) {
    return input_error(err, e);
  }

  bool pass = false;
  try {
    const fs::path dir = resolve_out_dir(cfg);
    const Eigen::Index nq = instance->n() * instance->q();

    {
      auto f = open_out(dir, "fig1.csv");
      write_component_csv(f, trace, nq, "x", false);
    }
    {
      auto f = open_out(dir, "fig2.csv");
      write_component_csv(f, trace, nq, "lambda", true);
    }
    const GainSchedule sched =
        build_gain_schedule(instance->network(), instance->alpha(), cfg.params.k_fraction);
    const LyapunovRef ref = make_lyapunov_ref(*instance, trace);
    const LyapunovReport report = lyapunov_audit(*instance, trace, ref, sched);
    {
      auto f = open_out(dir, "fig3.csv");
      write_lyapunov_csv(f, report);
    }
    if (cfg.outputs.emit_svg) {
      {
        auto f = open_out(dir, "fig1.svg");
        write_line_chart(f, "Primal trajectories", "t", "x",
                         component_series(trace, nq, "x", false));
      }
      {
        auto f = open_out(dir, "fig2.svg");
        write_line_chart(f, "Multiplier trajectories", "t", "lambda",
                         component_series(trace, nq, "lambda", true));
      }
      {
        auto f = open_out(dir, "fig3.svg");
        write_line_chart(f, "Lyapunov series", "t", "value", lyapunov_series(report));
      }
    }
    {
      auto f = open_out(dir, "summary.json");
      write_summary_json(f, *instance, trace, cfg,
                         "built-in experiment defaults: x0 at the constraint interval "
                         "midpoints, lambda0 = 0");
    }

    // A decrease audit that needs no certificate: distance to the run's own
    // final state. Reported so step-size studies can compare slack sizes.
    const LyapunovRef final_ref{trace.samples.back().first.x,
                                trace.samples.back().first.lambda, false};
    const LyapunovReport vbar = lyapunov_audit(*instance, trace, final_ref, sched);
    out << "lyapunov reference: " << (report.certified ? "certified optimum" : "final state")
        << "\n";
    out << "vbar_max_step_increase=" << format_double(vbar.v1_audit.max_step_increase) << "\n";

    const SystemState& final_state = trace.samples.back().first;
    const StepReport& final_rep = trace.samples.back().second;
    double lambda_sup = 0.0;
    for (const auto& [state, rep] : trace.samples) {
      (void)rep;
      lambda_sup = std::max(lambda_sup, state.lambda.cwiseAbs().maxCoeff());
    }
    const double final_lambdadot = final_rep.lambdadot.norm();
    const Eigen::VectorXd consensus = consensus_mean(*instance, final_state.x);

    std::string reason;
    if (cmd.unconstrained) {
      const double c = consensus(0);
      pass = final_rep.consensus_gap <= 1e-6 && c >= -0.01 && c <= 6.01 &&
             std::isfinite(lambda_sup);
      reason = "consensus=" + format_double(c) +
               " gap=" + format_double(final_rep.consensus_gap) +
               " lambda_sup=" + format_double(lambda_sup);
    } else {
      bool endpoints_ok = true;
      for (Eigen::Index i = 0; i < nq; ++i)
        endpoints_ok = endpoints_ok && std::abs(final_state.x(i) + 1.0) <= 1e-2;
      pass = endpoints_ok && std::isfinite(lambda_sup) && final_lambdadot <= cfg.params.stop_tol;
      reason = "final_x=";
      for (Eigen::Index i = 0; i < nq; ++i)
        reason += (i ? ";" : "") + format_double(final_state.x(i));
      reason += " lambda_sup=" + format_double(lambda_sup) +
                " final_lambdadot=" + format_double(final_lambdadot);
    }
    out << (pass ? "PASS" : "FAIL") << ": " << reason << "\n";
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
  return pass ? kExitOk : kExitNotConverged;
}

int cmd_check(const CheckCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(cmd.config_path);
    const ProblemInstance p = build_instance(cfg);
    const Optimality1D result = check_optimal_1d(p, cmd.at);

    const auto show = [](const Interval& iv) {
      return "[" + format_double(iv.lo) + ", " + format_double(iv.hi) + "]";
    };
    out << "subdifferential: " << show(result.subdifferential) << "\n";
    out << "normal_cone: " << show(result.normal_cone) << "\n";
    out << "verdict: " << (result.optimal ? "optimal" : "not optimal") << "\n";
    if (!result.optimal) return kExitNotOptimal;

    const OptimalityCertificate cert = reconstruct_lambda_star(p, cmd.at);
    out << "lambda_star=";
    for (Eigen::Index i = 0; i < cert.lambda_star.size(); ++i)
      out << (i ? ";" : "") << format_double(cert.lambda_star(i));
    out << "\n";
    out << "membership_residual=" << format_double(cert.residual) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
}

int cmd_oracle(const OracleCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    if (!(cmd.resolution > 0.0)) throw Error("resolution must be positive");
    ExperimentConfig cfg = load_config(cmd.config_path);
    const ProblemInstance p = build_instance(cfg);

    std::optional<OracleResult> result;
    if (p.q() == 1) {
      try {
        result = grid_solve_1d(p, cmd.resolution);
      } catch (const UnboundedFeasibleSet&) {
        // Fall through to the iterative method.
      } catch (const UnsupportedSet&) {
        // Non-interval sets in 1-D; same fallback.
      }
    }
    if (!result) result = centralized_solve(p, 300000, 0.5);

    ordered_json j;
    j["x_opt"] = vector_json(result->x_opt);
    j["f_opt"] = result->f_opt;
    j["method"] = result->method;
    if (result->method == "grid-1d") {
      j["resolution"] = result->resolution;
      j["unique_minimizer"] = result->unique_minimizer;
    } else {
      j["iterations"] = result->iterations;
    }
    out << j.dump(2) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
}

int cmd_sweep(const SweepCommand& cmd, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig cfg = load_config(cmd.config_path);
    apply_overrides(cfg, cmd.common);
    if (cmd.jobs < 1) throw Error("--jobs must be at least 1");
    const ProblemInstance p = build_instance(cfg);

    std::vector<double> alphas{cfg.params.alpha};
    std::vector<double> hs{cfg.params.h};
    std::vector<Scheme> schemes{cfg.params.scheme};
    std::vector<std::uint64_t> seeds{cfg.params.seed};
    if (!cmd.grid_spec.empty()) {
      for (const std::string& entry : split(cmd.grid_spec, ';')) {
        if (entry.empty()) continue;
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
          throw Error("grid entry '" + entry + "' is not of the form key=v1,v2,...");
        const std::string key = entry.substr(0, eq);
        const std::vector<std::string> values = split(entry.substr(eq + 1), ',');
        if (values.empty() || (values.size() == 1 && values[0].empty()))
          throw Error("grid entry '" + entry + "' has no values");
        if (key == "alpha" || key == "h") {
          std::vector<double> parsed;
          for (const std::string& v : values) {
            double d = 0.0;
            if (!parse_double_strict(v, d) || !(d > 0.0))
              throw Error("grid value '" + v + "' for " + key + " is not a positive number");
            parsed.push_back(d);
          }
          (key == "alpha" ? alphas : hs) = parsed;
        } else if (key == "scheme") {
          schemes.clear();
          for (const std::string& v : values) schemes.push_back(parse_scheme(v));
        } else if (key == "seed") {
          seeds.clear();
          for (const std::string& v : values) {
            try {
              std::size_t pos = 0;
              const unsigned long long u = std::stoull(v, &pos);
              if (pos != v.size()) throw std::invalid_argument(v);
              seeds.push_back(u);
            } catch (const std::exception&) {
              throw Error("grid value '" + v + "' for seed is not a nonnegative integer");
            }
          }
        } else {
          throw Error("unknown grid key '" + key + "' (expected alpha, h, scheme, or seed)");
        }
      }
    }

    std::vector<SweepCell> cells;
    for (double a : alphas)
      for (double h : hs)
        for (Scheme s : schemes)
          for (std::uint64_t seed : seeds) cells.push_back(SweepCell{a, h, s, seed});

    RunOptions base = run_options(cfg.params);
    // Sweeps keep only endpoint summaries; skip intermediate recording.
    base.record_stride = std::numeric_limits<std::size_t>::max();
    const std::vector<RunSummary> results = sweep(p, cells, base, cmd.jobs);

    const fs::path dir = resolve_out_dir(cfg);
    auto f = open_out(dir, "sweep.csv");
    write_csv_row(f, {"index", "alpha", "h", "scheme", "seed", "final_consensus", "residual",
                      "steps", "stop_reason", "error"});
    std::size_t ok = 0;
    for (const RunSummary& r : results) {
      std::string consensus;
      for (Eigen::Index i = 0; i < r.final_consensus.size(); ++i)
        consensus += (i ? ";" : "") + format_double(r.final_consensus(i));
      const bool failed = !r.error.empty();
      if (!failed) ++ok;
      write_csv_row(f, {std::to_string(r.index), format_double(r.cell.alpha),
                        format_double(r.cell.h), scheme_name(r.cell.scheme),
                        std::to_string(r.cell.seed), consensus,
                        failed ? "" : format_double(r.residual),
                        failed ? "" : std::to_string(r.steps), r.stop_reason, r.error});
    }
    out << "cells=" << results.size() << " succeeded=" << ok << "\n";
    return ok > 0 ? kExitOk : kExitInputError;
  } catch (const std::exception& e) {
    return input_error(err, e);
  }
}

}  // namespace consensusflow
