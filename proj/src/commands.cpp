#include <cmath>
#include <functional>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "hessflow/io.hpp"
#include "hessflow/operators.hpp"
#include "hessflow/subsolutions.hpp"

namespace hessflow::io {

namespace {

namespace fs = std::filesystem;

class RunFailure : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string vec(const std::vector<double>& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + num(v[i]);
  return s + ")";
}

const OperatorSpec& need_operator(const RunConfig& cfg) {
  if (!cfg.op) throw ConfigError("this command needs an [operator] section", 0);
  return *cfg.op;
}

const ProblemSpec& need_problem(const RunConfig& cfg) {
  if (!cfg.problem) throw ConfigError("this command needs [grid], [problem] and [step] sections", 0);
  return *cfg.problem;
}

fs::path prepare_out(const Command& cmd) {
  fs::path dir(cmd.out_dir.empty() ? "." : cmd.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw RunFailure("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

std::string snapshot_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "snapshot_%06zu.hfld", index);
  return buf;
}

/// Writes rows[1..] as the monitor CSV and the selected states as snapshots.
void write_run(const fs::path& dir, const std::vector<MonitorRow>& rows,
               const std::vector<FlowState>& states, int snapshot_every, std::ostream& out,
               bool quiet) {
  const std::vector<MonitorRow> body(rows.begin() + (rows.empty() ? 0 : 1), rows.end());
  write_monitor_csv((dir / "monitor.csv").string(), body);
  int written = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const bool ends = i == 0 || i + 1 == states.size();
    if (!ends && (snapshot_every == 0 || i % static_cast<std::size_t>(snapshot_every) != 0)) continue;
    write_snapshot((dir / snapshot_name(i)).string(), states[i].u);
    ++written;
  }
  if (!quiet)
    out << "wrote " << (dir / "monitor.csv").string() << " (" << body.size() << " rows) and "
        << written << " snapshot(s)\n";
}

int cmd_check_operator(const RunConfig& cfg, std::ostream& out, bool quiet) {
  const auto& op = need_operator(cfg);
  const auto r = check_structure(op, cfg.structure.budget, cfg.seed, cfg.structure.band_lo,
                                 cfg.structure.band_hi);
  if (!quiet) {
    out << "operator " << op.name() << "  seed = " << cfg.seed << "\n";
    out << std::left << std::setw(28) << "condition" << std::setw(7) << "holds" << std::setw(16)
        << "margin" << std::setw(16) << "constant" << "note\n";
    for (const auto& e : r.entries)
      out << std::left << std::setw(28) << e.id << std::setw(7) << (e.holds ? "yes" : "NO")
          << std::setw(16) << num(e.margin) << std::setw(16) << num(e.constant) << e.note << "\n";
    out << "K1 = " << num(r.at(condition::kEulerLowerBound).constant) << "\n";
    out << (r.all_hold() ? "all conditions hold\n" : "some conditions fail\n");
  }
  return r.all_hold() ? kSuccess : kCertificationViolation;
}

int cmd_certify(const RunConfig& cfg, std::ostream& out, bool quiet) {
  const auto& op = need_operator(cfg);
  const auto& c = cfg.certify;
  bool violated = false;
  if (c.concavity) {
    const auto r = verify_concavity_gap(op, c.K, c.beta, c.budget, cfg.seed);
    violated |= r.violations > 0;
    if (!quiet) {
      out << "record concavity_gap\n";
      out << "  operator = " << op.name() << "\n  beta = " << num(c.beta)
          << "\n  budget = " << c.budget << "\n  sampled = " << r.sampled
          << "\n  constrained = " << r.constrained << "\n  violations = " << r.violations << "\n";
      if (r.epsilon_hat)
        out << "  epsilon_hat = " << num(*r.epsilon_hat) << "\n  worst_mu = " << vec(r.worst_mu)
            << "\n  worst_lambda = " << vec(r.worst_lambda) << "\n";
      else
        out << "  epsilon_hat = empty-constraint\n";
    }
  }
  if (c.parabolic) {
    std::vector<LiftedPoint> K;
    for (const auto& mu : c.K) K.push_back({mu, eval_f(op, mu) - c.slack - c.sigma});
    const auto r = verify_parabolic_gap(op, c.sigma, K, c.eps, c.budget, cfg.seed, c.eta);
    violated |= r.violations > 0 || !r.certified;
    if (!quiet) {
      out << "record parabolic_gap\n";
      out << "  operator = " << op.name() << "\n  sigma = " << num(c.sigma)
          << "\n  eps = " << num(c.eps) << "\n  budget = " << c.budget
          << "\n  certified = " << (r.certified ? "yes" : "no") << "\n  theta_K = "
          << num(r.theta_k) << "\n  R_K = " << num(r.radius_k) << "\n  sampled = " << r.sampled
          << "\n  violations = " << r.violations << "\n  p_band = [" << num(r.band_lo) << ", "
          << num(r.band_hi) << "]\n";
      if (r.violations > 0)
        out << "  worst_lambda = " << vec(r.worst_lambda.lambda)
            << "  p = " << num(r.worst_lambda.p) << "  value = " << num(r.worst_value) << "\n";
    }
  }
  return violated ? kCertificationViolation : kSuccess;
}

int cmd_verify_subsolution(const RunConfig& cfg, std::ostream& out, bool quiet) {
  const auto& p = need_problem(cfg);
  if (!cfg.subsolution) throw ConfigError("verify-subsolution needs a [subsolution] section", 0);
  const auto& s = *cfg.subsolution;
  const auto times = sample_times(p, s.times);
  FunctionPtr usub = s.expression;
  if (s.safety) usub = construct_linear_subsolution(p, *s.safety, times);
  const auto r = verify_subsolution(p, *usub, times, s.delta);
  const bool ok = r.satisfied && (s.delta <= 0.0 || r.strict);
  if (!quiet) {
    out << "candidate = " << usub->describe() << "\n";
    out << "satisfied = " << (r.satisfied ? "yes" : "no") << "\nstrict = "
        << (r.strict ? "yes" : "no") << "\nadmissible = " << (r.admissible ? "yes" : "no")
        << "\nmin_slack = " << num(r.min_slack) << "  at node " << r.min_node << ", t = "
        << num(r.min_time) << "\nboundary_slack = " << num(r.boundary_slack)
        << "\ninitial_slack = " << num(r.initial_slack) << "\ndelta = " << num(r.delta)
        << "\nsamples = " << r.samples << "\n";
    if (!r.admissible)
      out << "inadmissible at node " << r.bad_node << ", t = " << num(r.bad_time) << "\n";
  }
  return ok ? kSuccess : kCertificationViolation;
}

int cmd_solve(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const auto& p = need_problem(cfg);
  const auto dir = prepare_out(cmd);
  MonitorOptions opt = cfg.monitors;
  opt.keep_states = true;
  const auto traj = solve(p, opt);
  write_run(dir, traj.rows, traj.states, cfg.output.snapshot_every, out, cmd.quiet);
  if (!cmd.quiet) {
    const auto& last = traj.rows.back();
    out << "stop = " << traj.stop_reason << "  t = " << num(last.t)
        << "  sup|u_t| = " << num(last.sup_ut) << "  sup|Du| = " << num(last.sup_grad_u) << "\n";
  }
  return kSuccess;
}

int cmd_steady(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const auto& p = need_problem(cfg);
  const auto dir = prepare_out(cmd);
  std::vector<MonitorRow> rows;
  std::vector<FlowState> states;
  const int every = cfg.monitors.every;
  int count = 0;
  SteadyOptions so = cfg.steady;
  so.on_step = [&](const FlowState& s) {
    if (count++ % every == 0 || states.empty()) {
      rows.push_back(record(s, p, cfg.monitors));
      states.push_back(s);
    }
  };
  const FlowState final_state = steady_state(p, so);
  if (states.empty() || states.back().t != final_state.t) {
    rows.push_back(record(final_state, p, cfg.monitors));
    states.push_back(final_state);
  }
  write_run(dir, rows, states, cfg.output.snapshot_every, out, cmd.quiet);
  if (!cmd.quiet)
    out << "steady at t = " << num(final_state.t) << "  sup|u_t| = " << num(rows.back().sup_ut)
        << "\n";
  return kSuccess;
}

int cmd_report(const RunConfig& cfg, const Command& cmd, std::ostream& out) {
  const auto dir = prepare_out(cmd);
  const fs::path csv = cfg.report_csv.empty() ? dir / "monitor.csv" : fs::path(cfg.report_csv);
  std::ifstream in(csv);
  if (!in) throw ConfigError("cannot open monitor csv '" + csv.string() + "'", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto table = parse_csv(ss.str());
  const fs::path svg = dir / "report.svg";
  std::ofstream os(svg);
  os << render_svg_report(table);
  if (!os) throw RunFailure("cannot write '" + svg.string() + "'");
  if (!cmd.quiet)
    out << "wrote " << svg.string() << " (" << table.columns.size() - 1 << " series, "
        << table.rows.size() << " rows)\n";
  return kSuccess;
}

int dispatch(const Command& cmd, const std::function<RunConfig()>& load, std::ostream& out,
             std::ostream& err) {
  try {
    const RunConfig cfg = load();
    if (cmd.name == "check-operator") return cmd_check_operator(cfg, out, cmd.quiet);
    if (cmd.name == "certify-cones") return cmd_certify(cfg, out, cmd.quiet);
    if (cmd.name == "verify-subsolution") return cmd_verify_subsolution(cfg, out, cmd.quiet);
    if (cmd.name == "solve") return cmd_solve(cfg, cmd, out);
    if (cmd.name == "steady") return cmd_steady(cfg, cmd, out);
    if (cmd.name == "report") return cmd_report(cfg, cmd, out);
    err << "error: unknown command '" << cmd.name << "'\n";
    return kValidationError;
  } catch (const StepFailure& e) {
    err << "run failure: " << e.what() << " (t = " << num(e.time()) << ", node " << e.node()
        << ")\n";
    return kRunFailure;
  } catch (const RunTimeout& e) {
    err << "run failure: " << e.what() << "\n";
    return kRunFailure;
  } catch (const RunFailure& e) {
    err << "run failure: " << e.what() << "\n";
    return kRunFailure;
  } catch (const ConeViolation& e) {
    err << "run failure: " << e.what() << "\n";
    return kRunFailure;
  } catch (const FormViolation& e) {
    err << "run failure: " << e.what() << "\n";
    return kRunFailure;
  } catch (const std::invalid_argument& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "run failure: " << e.what() << "\n";
    return kRunFailure;
  }
}

}  // namespace

int run_command(const Command& cmd, std::ostream& out, std::ostream& err) {
  return dispatch(
      cmd,
      [&] {
        if (cmd.config_path.empty()) {
          if (cmd.name == "report") return parse_config("", cmd.seed);
          throw ConfigError("--config is required for '" + cmd.name + "'", 0);
        }
        return load_config(cmd.config_path, cmd.seed);
      },
      out, err);
}

int run_command_text(const Command& cmd, const std::string& config_text, std::ostream& out,
                     std::ostream& err) {
  return dispatch(cmd, [&] { return parse_config(config_text, cmd.seed); }, out, err);
}

}  // namespace hessflow::io
