#include "hessflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hessflow/common.hpp"
#include "hessflow/linalg.hpp"
#include "hessflow/parallel.hpp"

namespace hessflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNoNode = std::numeric_limits<std::size_t>::max();

std::string at_time(double t) {
  std::ostringstream os;
  os.precision(17);
  os << t;
  return os.str();
}

double sup_active(const ProblemSpec& problem, std::span<const double> v) {
  double m = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p)
    if (problem.active(p)) m = std::max(m, std::abs(v[p]));
  return m;
}

double dot_seq(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_seq(const std::vector<double>& a) { return std::sqrt(dot_seq(a, a)); }

// w / dt - F^{ij} D_ij w on active nodes, identity elsewhere, assembled
// row by row from the stencil taps.
class ShiftedOperator {
 public:
  ShiftedOperator(const ProblemSpec& problem, const SymTensorField& coeff, double dt)
      : stride_(problem.grid.n == 2 ? 16 : 40) {
    const Grid& g = problem.grid;
    const int n = g.n;
    const std::size_t N = g.size();
    count_.assign(N, 0);
    col_.assign(N * stride_, 0);
    val_.assign(N * stride_, 0.0);
    diag_.resize(N);
    parallel_for(N, [&](std::size_t p) {
      std::size_t* col = col_.data() + p * stride_;
      double* val = val_.data() + p * stride_;
      int used = 1;
      col[0] = p;
      val[0] = problem.active(p) ? 1.0 / dt : 1.0;
      if (problem.active(p)) {
        StencilTap taps[9];
        for (int i = 0; i < n; ++i)
          for (int j = i; j < n; ++j) {
            const double c = (i == j ? 1.0 : 2.0) * coeff.get(p, i, j);
            const int m = second_derivative_taps(g, p, i, j, taps);
            for (int q = 0; q < m; ++q) {
              int e = 0;
              while (e < used && col[e] != taps[q].node) ++e;
              if (e == used) {
                col[used] = taps[q].node;
                val[used++] = 0.0;
              }
              val[e] -= c * taps[q].weight;
            }
          }
      }
      count_[p] = used;
      diag_[p] = val[0];
    });
  }

  void apply(const std::vector<double>& w, std::vector<double>& out) const {
    parallel_for(w.size(), [&](std::size_t p) {
      double s = 0.0;
      const std::size_t base = p * stride_;
      for (int e = 0; e < count_[p]; ++e) s += val_[base + e] * w[col_[base + e]];
      out[p] = s;
    });
  }

  void precondition(const std::vector<double>& r, std::vector<double>& z) const {
    for (std::size_t p = 0; p < r.size(); ++p) z[p] = r[p] / diag_[p];
  }

 private:
  std::size_t stride_;
  std::vector<int> count_;
  std::vector<std::size_t> col_;
  std::vector<double> val_, diag_;
};

// Right-preconditioned BiCGSTAB from x = 0. Returns iterations used.
int bicgstab(const ShiftedOperator& A, const std::vector<double>& b, std::vector<double>& x, double tol,
             int max_iters) {
  const std::size_t N = b.size();
  x.assign(N, 0.0);
  const double bnorm = norm_seq(b);
  if (bnorm == 0.0) return 0;
  std::vector<double> r = b, rhat = b, p(N, 0.0), v(N, 0.0), y(N), s(N), z(N), t(N);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  for (int it = 1; it <= max_iters; ++it) {
    const double rho_new = dot_seq(rhat, r);
    if (rho_new == 0.0) return -it;
    const double beta = (rho_new / rho) * (alpha / omega);
    for (std::size_t i = 0; i < N; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    A.precondition(p, y);
    A.apply(y, v);
    alpha = rho_new / dot_seq(rhat, v);
    for (std::size_t i = 0; i < N; ++i) s[i] = r[i] - alpha * v[i];
    if (norm_seq(s) <= tol * bnorm) {
      for (std::size_t i = 0; i < N; ++i) x[i] += alpha * y[i];
      return it;
    }
    A.precondition(s, z);
    A.apply(z, t);
    const double tt = dot_seq(t, t);
    omega = tt > 0.0 ? dot_seq(t, s) / tt : 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      x[i] += alpha * y[i] + omega * z[i];
      r[i] = s[i] - omega * t[i];
    }
    if (norm_seq(r) <= tol * bnorm) return it;
    if (omega == 0.0) return -it;
    rho = rho_new;
  }
  return -max_iters;
}

void pin_boundary(const ProblemSpec& problem, ScalarField& u, double t) {
  if (problem.grid.topology != Topology::DirichletBox) return;
  const auto bc = problem.phi_s->field(problem.grid, t);
  for (std::size_t p = 0; p < u.values.size(); ++p)
    if (!problem.active(p)) u[p] = bc[p];
}

bool acceptable(const NodeEvaluation& ev, double margin) {
  return ev.admissible && ev.min_margin >= margin;
}

std::string worst_node_text(const ProblemSpec& problem, std::size_t node) {
  if (node == kNoNode) return "unknown node";
  const auto idx = problem.grid.multi_index(node);
  std::ostringstream os;
  os << "node " << node << " (" << idx[0] << ", " << idx[1];
  if (problem.grid.n == 3) os << ", " << idx[2];
  os << ")";
  return os.str();
}

}  // namespace

void NewtonConfig::validate() const {
  if (!(residual_tol > 0.0)) throw InvalidConfiguration("newton: residual_tol must be > 0");
  if (!(linear_tol > 0.0)) throw InvalidConfiguration("newton: linear_tol must be > 0");
  if (max_iters < 1) throw InvalidConfiguration("newton: max_iters must be >= 1");
  if (linear_max_iters < 1) throw InvalidConfiguration("newton: linear_max_iters must be >= 1");
  if (!(damping_floor > 0.0 && damping_floor <= 1.0))
    throw InvalidConfiguration("newton: damping_floor must lie in (0, 1]");
  if (!(admissibility_margin >= 0.0))
    throw InvalidConfiguration("newton: admissibility_margin must be >= 0");
}

bool ProblemSpec::active(std::size_t node) const {
  return grid.topology == Topology::Periodic || !grid.is_boundary(node);
}

void ProblemSpec::validate() const {
  grid.validate();
  op.validate();
  if (op.n != grid.n) throw InvalidConfiguration("problem: operator dimension differs from grid");
  if (!(chi.grid == grid)) throw InvalidConfiguration("problem: chi grid mismatch");
  if (!(phi_b.grid == grid)) throw InvalidConfiguration("problem: phi_b grid mismatch");
  phi_b.validate();
  if (!psi) throw InvalidConfiguration("problem: psi missing");
  if (!(horizon >= 0.0)) throw InvalidConfiguration("problem: horizon must be >= 0");
  if (!(step.dt > 0.0)) throw InvalidConfiguration("problem: dt must be > 0");
  step.newton.validate();
  const auto report = admissibility_check(hessian(phi_b, chi), op.cone());
  if (!report.all_admissible)
    throw InvalidConfiguration("problem: phi_b is not admissible; worst " +
                               worst_node_text(*this, report.worst_node) + ", margin " +
                               at_time(report.min_margin));
  if (grid.topology == Topology::DirichletBox) {
    if (!phi_s) throw InvalidConfiguration("problem: phi_s required on a Dirichlet box");
    const auto bc = phi_s->field(grid, 0.0);
    for (std::size_t p : grid.boundary_nodes())
      if (std::abs(bc[p] - phi_b[p]) > 1e-10 * (1.0 + std::abs(bc[p])))
        throw InvalidConfiguration("problem: phi_b differs from phi_s at t = 0 at " +
                                   worst_node_text(*this, p));
  }
  if (form == Form::Exponential) {
    const auto ev = evaluate_nodes(*this, phi_b, false);
    for (std::size_t p = 0; p < ev.F.size(); ++p)
      if (active(p) && !std::isfinite(ev.F[p]))
        throw InvalidConfiguration("problem: exponential form needs f > 0; fails at " +
                                   worst_node_text(*this, p));
  }
}

NodeEvaluation evaluate_nodes(const ProblemSpec& problem, const ScalarField& u, bool with_coeff) {
  const Grid& g = problem.grid;
  const int n = g.n;
  const std::size_t N = g.size();
  const auto U = hessian(u, problem.chi);
  const ConeId cone = problem.op.cone();
  const bool exponential = problem.form == Form::Exponential;

  NodeEvaluation ev;
  ev.F.assign(N, 0.0);
  if (with_coeff) ev.coeff = SymTensorField(g);
  std::vector<double> margins(N, kInf), traces(N, 0.0);

  parallel_for(N, [&](std::size_t p) {
    if (!problem.active(p)) return;
    const auto e = eigen_sym(U.at(p));
    const std::span<const double> lam(e.values.data(), n);
    margins[p] = cone_margin(cone, lam);
    if (!(margins[p] > 0.0)) return;
    double grad[3] = {0, 0, 0};
    const double f = eval_f_grad_unchecked(problem.op, lam, std::span<double>(grad, n));
    if (exponential && !(f > 0.0)) {
      ev.F[p] = std::numeric_limits<double>::quiet_NaN();
      margins[p] = -kInf;
      return;
    }
    ev.F[p] = exponential ? std::log(f) : f;
    if (!with_coeff) return;
    const double scale = exponential ? 1.0 / f : 1.0;
    Sym3 c;
    c.n = n;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += e.vectors[3 * i + k] * grad[k] * e.vectors[3 * j + k];
        c.set(i, j, s * scale);
      }
    ev.coeff.set(p, c);
    double tr = 0.0;
    for (int k = 0; k < n; ++k) tr += grad[k] * scale;
    traces[p] = tr;
  });

  ev.min_margin = kInf;
  ev.worst_node = kNoNode;
  for (std::size_t p = 0; p < N; ++p) {
    if (!problem.active(p)) continue;
    if (margins[p] < ev.min_margin || ev.worst_node == kNoNode) {
      ev.min_margin = margins[p];
      ev.worst_node = p;
    }
    ev.max_coeff_trace = std::max(ev.max_coeff_trace, traces[p]);
  }
  ev.admissible = ev.min_margin > 0.0;
  return ev;
}

ScalarField rhs(const ScalarField& u, double t, const ProblemSpec& problem) {
  const auto ev = evaluate_nodes(problem, u, false);
  if (!ev.admissible) {
    if (ev.min_margin == -kInf)
      throw FormViolation("rhs: exponential form needs f > 0 at " +
                              worst_node_text(problem, ev.worst_node) + ", t = " + at_time(t),
                          ev.worst_node);
    throw ConeViolation("rhs: inadmissible at " + worst_node_text(problem, ev.worst_node) +
                            ", t = " + at_time(t),
                        ev.min_margin);
  }
  ScalarField out(problem.grid, 0.0, t);
  const auto psi = problem.psi->field(problem.grid, t);
  std::vector<double> bdt;
  if (problem.grid.topology == Topology::DirichletBox) {
    bdt.resize(problem.grid.size());
    problem.phi_s->sample_dt(problem.grid, t, bdt);
  }
  for (std::size_t p = 0; p < out.values.size(); ++p)
    out[p] = problem.active(p) ? ev.F[p] - psi[p] : bdt[p];
  return out;
}

ScalarField rhs(const FlowState& state, const ProblemSpec& problem) {
  return rhs(state.u, state.t, problem);
}

ScalarField linearized_apply(const FlowState& state, const ProblemSpec& problem,
                             const ScalarField& w) {
  const auto ev = evaluate_nodes(problem, state.u, true);
  if (!ev.admissible)
    throw ConeViolation("linearized_apply: inadmissible at " +
                            worst_node_text(problem, ev.worst_node),
                        ev.min_margin);
  const int n = problem.grid.n;
  ScalarField out(problem.grid, 0.0, state.t);
  parallel_for(out.values.size(), [&](std::size_t p) {
    if (!problem.active(p)) return;
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j)
        s += (i == j ? 1.0 : 2.0) * ev.coeff.get(p, i, j) * second_derivative(w, p, i, j);
    out[p] = s;
  });
  return out;
}

FlowState initial_state(const ProblemSpec& problem) {
  FlowState s;
  s.u = problem.phi_b;
  s.u.time = 0.0;
  s.t = 0.0;
  s.ut = rhs(s.u, 0.0, problem);
  const auto ev = evaluate_nodes(problem, s.u, false);
  s.last.min_admissibility_margin = ev.min_margin;
  return s;
}

FlowState step_explicit(const FlowState& state, const ProblemSpec& problem, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_explicit: dt must be > 0");
  const auto ev = evaluate_nodes(problem, state.u, true);
  if (!ev.admissible)
    throw StepFailure("explicit step: state inadmissible at " +
                          worst_node_text(problem, ev.worst_node),
                      state.t, ev.worst_node, state.last);
  const double h = problem.grid.h_min();
  double dt_try = dt;
  if (ev.max_coeff_trace > 0.0) dt_try = std::min(dt_try, 0.2 * h * h / ev.max_coeff_trace);
  const auto r = rhs(state.u, state.t, problem);
  const double margin = problem.step.newton.admissibility_margin;

  StepDiagnostics diag;
  std::size_t worst = kNoNode;
  for (int halving = 0; halving <= 30; ++halving) {
    FlowState next;
    next.t = state.t + dt_try;
    next.u = state.u;
    for (std::size_t p = 0; p < next.u.values.size(); ++p) next.u[p] += dt_try * r[p];
    pin_boundary(problem, next.u, next.t);
    next.u.time = next.t;
    const auto check = evaluate_nodes(problem, next.u, false);
    if (acceptable(check, margin)) {
      next.ut = ScalarField(problem.grid, 0.0, next.t);
      for (std::size_t p = 0; p < next.u.values.size(); ++p)
        next.ut[p] = (next.u[p] - state.u[p]) / dt_try;
      diag.dt_used = dt_try;
      diag.halvings = halving;
      diag.min_admissibility_margin = check.min_margin;
      diag.residual_norm = 0.0;
      next.last = diag;
      return next;
    }
    worst = check.worst_node;
    dt_try *= 0.5;
  }
  diag.dt_used = dt_try;
  diag.halvings = 30;
  throw StepFailure("explicit step: dt underflow after 30 halvings at t = " + at_time(state.t) +
                        ", worst " + worst_node_text(problem, worst),
                    state.t, worst, diag);
}

FlowState step_implicit(const FlowState& state, const ProblemSpec& problem, double dt,
                        const NewtonConfig& cfg) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_implicit: dt must be > 0");
  const Grid& g = problem.grid;
  const std::size_t N = g.size();
  const double t_new = state.t + dt;
  const auto psi = problem.psi->field(g, t_new);

  StepDiagnostics diag;
  diag.dt_used = dt;

  ScalarField v = state.u;
  pin_boundary(problem, v, t_new);
  v.time = t_new;

  auto residual = [&](const ScalarField& w, const NodeEvaluation& ev, std::vector<double>& G) {
    G.assign(N, 0.0);
    for (std::size_t p = 0; p < N; ++p)
      if (problem.active(p)) G[p] = (w[p] - state.u[p]) / dt - (ev.F[p] - psi[p]);
    return sup_active(problem, G);
  };

  auto ev = evaluate_nodes(problem, v, true);
  if (!ev.admissible)
    throw StepFailure("implicit step: initial guess inadmissible at " +
                          worst_node_text(problem, ev.worst_node) + ", t = " + at_time(t_new),
                      state.t, ev.worst_node, diag);
  std::vector<double> G, delta, neg(N);
  double rnorm = residual(v, ev, G);
  diag.residual_history.push_back(rnorm);

  while (rnorm > cfg.residual_tol) {
    if (diag.newton_iters >= cfg.max_iters) {
      diag.residual_norm = rnorm;
      throw StepFailure("implicit step: Newton exceeded " + std::to_string(cfg.max_iters) +
                            " iterations at t = " + at_time(t_new) + ", residual " + at_time(rnorm),
                        state.t, ev.worst_node, diag);
    }
    ShiftedOperator A(problem, ev.coeff, dt);
    for (std::size_t p = 0; p < N; ++p) neg[p] = -G[p];
    const int its = bicgstab(A, neg, delta, cfg.linear_tol, cfg.linear_max_iters);
    diag.linear_iters += std::abs(its);
    ++diag.newton_iters;

    double alpha = 1.0;
    bool accepted = false;
    std::size_t worst = ev.worst_node;
    while (alpha >= cfg.damping_floor) {
      ScalarField w = v;
      for (std::size_t p = 0; p < N; ++p) w[p] += alpha * delta[p];
      auto trial = evaluate_nodes(problem, w, true);
      if (acceptable(trial, cfg.admissibility_margin)) {
        std::vector<double> Gt;
        const double rt = residual(w, trial, Gt);
        if (rt < rnorm) {
          v = std::move(w);
          ev = std::move(trial);
          G = std::move(Gt);
          rnorm = rt;
          accepted = true;
          break;
        }
      } else {
        worst = trial.worst_node;
      }
      alpha *= 0.5;
    }
    diag.residual_history.push_back(rnorm);
    if (!accepted) {
      diag.residual_norm = rnorm;
      throw StepFailure("implicit step: Newton stalled (damping below floor) at t = " +
                            at_time(t_new) + ", residual " + at_time(rnorm) + ", worst " +
                            worst_node_text(problem, worst),
                        state.t, worst, diag);
    }
  }

  FlowState next;
  next.t = t_new;
  next.u = std::move(v);
  next.ut = ScalarField(g, 0.0, t_new);
  for (std::size_t p = 0; p < N; ++p) next.ut[p] = (next.u[p] - state.u[p]) / dt;
  diag.residual_norm = rnorm;
  diag.min_admissibility_margin = ev.min_margin;
  next.last = diag;
  return next;
}

FlowState step(const FlowState& state, const ProblemSpec& problem, double dt) {
  return problem.step.kind == StepKind::Explicit
             ? step_explicit(state, problem, dt)
             : step_implicit(state, problem, dt, problem.step.newton);
}

FlowState integrate(const ProblemSpec& problem,
                    const std::function<bool(const FlowState&)>& observer) {
  problem.validate();
  FlowState state = initial_state(problem);
  if (observer && !observer(state)) return state;
  const double T = problem.horizon;
  const double eps = 1e-12 * std::max(1.0, T);
  while (state.t < T - eps) {
    double dt = std::min(problem.step.dt, T - state.t);
    if (problem.step.kind == StepKind::Explicit) {
      state = step_explicit(state, problem, dt);
    } else {
      for (int retry = 0;; ++retry) {
        try {
          auto next = step_implicit(state, problem, dt, problem.step.newton);
          next.last.halvings = retry;
          state = std::move(next);
          break;
        } catch (const StepFailure&) {
          if (retry >= 10) throw;
          dt *= 0.5;
        }
      }
    }
    if (std::abs(state.t - T) <= eps) state.t = T;
    state.u.time = state.ut.time = state.t;
    if (observer && !observer(state)) break;
  }
  return state;
}

FlowState steady_state(const ProblemSpec& problem, const SteadyOptions& options) {
  problem.validate();
  if (problem.psi->time_dependent())
    throw InvalidConfiguration("steady_state: psi must be time-independent");
  if (problem.grid.topology == Topology::DirichletBox && problem.phi_s->time_dependent())
    throw InvalidConfiguration("steady_state: phi_s must be time-independent");
  FlowState state = initial_state(problem);
  if (options.on_step) options.on_step(state);
  double sup_ut = sup_active(problem, state.ut.values);
  double dt = problem.step.dt;
  int steps = 0;
  while (sup_ut >= options.tol) {
    if (steps >= options.max_steps)
      throw RunTimeout("steady_state: no convergence within " + std::to_string(options.max_steps) +
                           " steps; sup|u_t| = " + at_time(sup_ut),
                       sup_ut);
    try {
      state = step_implicit(state, problem, dt, problem.step.newton);
      if (options.on_step) options.on_step(state);
      sup_ut = sup_active(problem, state.ut.values);
      dt = std::min(2.0 * dt, options.dt_max);
    } catch (const StepFailure&) {
      dt *= 0.5;
      if (dt < 1e-14) throw;
    }
    ++steps;
  }
  return state;
}

double elliptic_residual(const ScalarField& u, double t, const ProblemSpec& problem) {
  const auto r = rhs(u, t, problem);
  return sup_active(problem, r.values);
}

}  // namespace hessflow
