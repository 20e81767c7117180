#include "hessflow/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hessflow/common.hpp"
#include "hessflow/parallel.hpp"

namespace hessflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double grad_norm(const VectorField& g, std::size_t p) {
  double s = 0.0;
  for (int a = 0; a < g.grid.n; ++a) s += g(p, a) * g(p, a);
  return std::sqrt(s);
}

}  // namespace

MonitorRow record(const FlowState& state, const ProblemSpec& problem,
                  const MonitorOptions& options) {
  const Grid& g = problem.grid;
  const std::size_t N = g.size();
  const int n = g.n;
  MonitorRow row;
  row.t = state.t;
  row.sup_u = max_abs(state.u);
  row.sup_ut = max_abs(state.ut);

  const auto grad = gradient(state.u);
  const auto eig = eigenvalue_field(hessian(state.u));
  for (std::size_t p = 0; p < N; ++p) {
    row.sup_grad_u = std::max(row.sup_grad_u, grad_norm(grad, p));
    row.sup_hess_u =
        std::max({row.sup_hess_u, std::abs(eig[p * n]), std::abs(eig[p * n + n - 1])});
  }
  if (g.topology == Topology::DirichletBox)
    for (std::size_t p : g.boundary_nodes())
      row.sup_ut_boundary = std::max(row.sup_ut_boundary, std::abs(state.ut[p]));

  if (problem.psi->time_dependent()) {
    std::vector<double> psi_t(N);
    problem.psi->sample_dt(g, state.t, psi_t);
    for (double v : psi_t) row.sup_psi_t = std::max(row.sup_psi_t, std::abs(v));
  }

  if (options.usub) {
    const double t = state.t;
    row.slack = verify_subsolution(problem, *options.usub, std::span<const double>(&t, 1)).min_slack;
    if (options.track_w)
      row.w = quantity_W(state, problem, *options.usub, options.w_a, options.w_b, options.w_delta)
                  .value;
  }
  return row;
}

Trajectory solve(const ProblemSpec& problem, const MonitorOptions& options) {
  if (options.every < 1) throw InvalidConfiguration("monitors: every must be >= 1");
  Trajectory traj;
  traj.stop_reason = "horizon";
  long step = 0;
  long last_recorded = -1;
  auto keep = [&](const FlowState& s, MonitorRow row) {
    traj.rows.push_back(std::move(row));
    if (options.keep_states) traj.states.push_back(s);
    last_recorded = step;
  };
  const FlowState final = integrate(problem, [&](const FlowState& s) {
    bool stop = false;
    if (options.steady_tol > 0.0 && max_abs(s.ut) < options.steady_tol) {
      traj.stop_reason = "steady";
      stop = true;
    }
    if (stop || step % options.every == 0) {
      keep(s, record(s, problem, options));
      if (options.stop_on_blowup && traj.rows.size() >= static_cast<std::size_t>(options.blowup_window) &&
          blowup_detector(traj, options.grad_threshold, options.blowup_window).verdict ==
              BlowupVerdict::GradientBlowup) {
        traj.stop_reason = "blowup";
        stop = true;
      }
    }
    ++step;
    return !stop;
  });
  if (last_recorded != step - 1) keep(final, record(final, problem, options));
  return traj;
}

MaxPrincipleCheck ut_maximum_principle_check(const Trajectory& traj, const ProblemSpec& problem,
                                             double tol) {
  if (traj.rows.empty()) throw std::invalid_argument("ut_maximum_principle_check: empty trajectory");
  const bool lateral = problem.grid.topology == Topology::DirichletBox;
  MaxPrincipleCheck out;
  out.worst_violation = -kInf;
  double boundary = traj.rows.front().sup_ut;
  double psi_t = 0.0;
  for (std::size_t i = 0; i < traj.rows.size(); ++i) {
    const auto& r = traj.rows[i];
    if (lateral) boundary = std::max(boundary, r.sup_ut_boundary);
    psi_t = std::max(psi_t, r.sup_psi_t);
    const double violation = r.sup_ut - (boundary + r.t * psi_t);
    if (violation > out.worst_violation) {
      out.worst_violation = violation;
      out.worst_row = i;
    }
  }
  out.holds = out.worst_violation <= tol;
  return out;
}

GrowthFit growth_fit(const Trajectory& traj) {
  const std::size_t n = traj.rows.size();
  if (n < 10)
    throw std::invalid_argument("growth_fit: needs at least 10 rows, got " + std::to_string(n));
  const std::size_t first = n / 2;
  const std::size_t m = n - first;
  double st = 0, sy = 0;
  std::vector<double> t(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    t[i] = traj.rows[first + i].t;
    y[i] = std::log(std::max(traj.rows[first + i].sup_hess_u, 1e-300));
    st += t[i];
    sy += y[i];
  }
  const double tm = st / m, ym = sy / m;
  double stt = 0, sty = 0;
  for (std::size_t i = 0; i < m; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  GrowthFit fit;
  fit.rows_used = m;
  fit.B = stt > 0 ? sty / stt : 0.0;
  const double log_c = ym - fit.B * tm;
  fit.C = std::exp(log_c);
  double ss = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (log_c + fit.B * t[i]);
    ss += e * e;
  }
  fit.residual = std::sqrt(ss / m);
  if (fit.B <= kBoundedRate && fit.residual < kFitTolerance)
    fit.verdict = GrowthVerdict::Bounded;
  else if (fit.B >= kExponentialRate && fit.residual < kFitTolerance)
    fit.verdict = GrowthVerdict::ExponentialGrowth;
  else
    fit.verdict = GrowthVerdict::Inconclusive;
  return fit;
}

std::string to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::Bounded: return "Bounded";
    case GrowthVerdict::ExponentialGrowth: return "ExponentialGrowth";
    case GrowthVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

std::string to_string(BlowupVerdict v) {
  return v == BlowupVerdict::GradientBlowup ? "GradientBlowup" : "NoBlowup";
}

BlowupReport blowup_detector(const Trajectory& traj, double grad_threshold, int window) {
  if (window < 3) throw std::invalid_argument("blowup_detector: window must be >= 3");
  const auto& rows = traj.rows;
  const std::size_t w = static_cast<std::size_t>(window);
  BlowupReport out;
  auto log_rate = [&](std::size_t j) {
    return (std::log(rows[j + 1].sup_grad_u) - std::log(rows[j].sup_grad_u)) /
           (rows[j + 1].t - rows[j].t);
  };
  double peak = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    peak = std::max(peak, rows[i].sup_grad_u);
    if (out.verdict == BlowupVerdict::GradientBlowup || i + 1 < w) continue;
    if (!(rows[i].sup_grad_u > grad_threshold)) continue;
    bool positive = true;
    for (std::size_t j = i + 1 - w; j <= i; ++j) positive = positive && rows[j].sup_grad_u > 0.0;
    if (!positive) continue;
    bool increasing = true;
    for (std::size_t j = i + 1 - w; j + 2 <= i; ++j)
      increasing = increasing && log_rate(j) < log_rate(j + 1);
    if (increasing) {
      out.verdict = BlowupVerdict::GradientBlowup;
      out.flagged_row = i;
    }
  }
  if (peak > grad_threshold) {
    out.note = "gradient passed the threshold; contrapositive not applicable";
  } else if (rows.size() < 10) {
    out.note = "fewer than 10 rows; contrapositive not tested";
  } else {
    out.fit = growth_fit(traj);
    out.contrapositive_holds = out.fit->verdict != GrowthVerdict::ExponentialGrowth;
    if (!out.contrapositive_holds)
      out.note = "contrapositive check failed: bounded gradient with exponential Hessian growth";
  }
  return out;
}

GradientQuantity interior_gradient_quantity(const FlowState& state, const GradientMode& mode) {
  const Grid& g = state.u.grid;
  const std::size_t N = g.size();
  const auto grad = gradient(state.u);
  std::vector<double> phi(N);

  if (mode.kind == GradientMode::CaseIII) {
    const double inf_u =
        mode.inf_u ? *mode.inf_u : *std::min_element(state.u.values.begin(), state.u.values.end());
    for (std::size_t p = 0; p < N; ++p) {
      const double s = state.u[p] - inf_u + 1.0;
      phi[p] = s * s;
    }
  } else {
    if (!mode.usub) throw InvalidConfiguration("gradient quantity: subsolution mode needs usub");
    std::vector<double> under(N), w(N, 0.0);
    mode.usub->sample(g, state.t, under);
    if (mode.w) mode.w->sample(g, state.t, w);
    double shift = -kInf;
    if (mode.sup_shift)
      shift = *mode.sup_shift;
    else
      for (std::size_t p = 0; p < N; ++p) shift = std::max(shift, state.u[p] - under[p]);
    double v_max = 0.0;
    for (std::size_t p = 0; p < N; ++p) v_max = std::max(v_max, under[p] - state.u[p] + shift + 1.0);
    if (mode.b < 0.0 || 14.0 * mode.b * v_max * v_max > 1.0 + 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "gradient quantity: 14 b v^2 = " << 14.0 * mode.b * v_max * v_max
         << " > 1 with measured sup v = " << v_max;
      throw ConstraintViolation(os.str(), v_max);
    }
    for (std::size_t p = 0; p < N; ++p) {
      const double v = under[p] - state.u[p] + shift + 1.0;
      phi[p] = -std::log1p(-mode.b * v * v) + mode.A * (under[p] + w[p] - mode.B * state.t);
    }
  }

  GradientQuantity out{-kInf, 0};
  for (std::size_t p = 0; p < N; ++p) {
    const double q = grad_norm(grad, p) * std::exp(phi[p]);
    if (q > out.value) out = {q, p};
  }
  return out;
}

}  // namespace hessflow
