#include "hessflow/subsolutions.hpp"

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

ScalarField sample_field(const SpaceTimeFunction& f, const Grid& g, double t) {
  ScalarField out(g, 0.0, t);
  f.sample(g, t, out.values);
  return out;
}

ScalarField sample_dt_field(const SpaceTimeFunction& f, const Grid& g, double t) {
  ScalarField out(g, 0.0, t);
  f.sample_dt(g, t, out.values);
  return out;
}

class Accumulator {
 public:
  Accumulator(const ProblemSpec& problem, double delta) : problem_(problem) {
    report_.delta = delta;
    report_.min_slack = kInf;
  }

  void add(const ScalarField& u, const ScalarField& ut, double t) {
    ++report_.samples;
    const Grid& g = problem_.grid;
    if (g.topology == Topology::DirichletBox && t > 0.0) {
      const auto phi = problem_.phi_s->field(g, t);
      for (std::size_t p : g.boundary_nodes())
        report_.boundary_slack = std::min(report_.boundary_slack, -std::abs(u[p] - phi[p]));
    }
    const auto ev = evaluate_nodes(problem_, u, false);
    if (!ev.admissible) {
      if (report_.admissible) {
        report_.bad_node = ev.worst_node;
        report_.bad_time = t;
      }
      report_.admissible = false;
      return;
    }
    const auto psi = problem_.psi->field(g, t);
    for (std::size_t p = 0; p < u.values.size(); ++p) {
      if (!problem_.active(p)) continue;
      const double slack = ev.F[p] - ut[p] - psi[p];
      if (slack < report_.min_slack) {
        report_.min_slack = slack;
        report_.min_node = p;
        report_.min_time = t;
      }
    }
  }

  void initial(const ScalarField& u0) {
    report_.initial_slack = kInf;
    for (std::size_t p = 0; p < u0.values.size(); ++p)
      report_.initial_slack = std::min(report_.initial_slack, problem_.phi_b[p] - u0[p]);
  }

  SubsolutionReport finish() {
    auto& r = report_;
    if (r.min_slack == kInf) r.min_slack = r.admissible ? 0.0 : -kInf;
    r.satisfied = r.admissible && r.min_slack >= 0.0 && r.boundary_slack >= -kConditionTolerance &&
                  r.initial_slack >= -kConditionTolerance;
    r.strict = r.satisfied && r.min_slack >= r.delta;
    return r;
  }

 private:
  const ProblemSpec& problem_;
  SubsolutionReport report_;
};

// Face axis of a boundary node, or -1 for a node on several faces.
int single_face_axis(const Grid& g, std::size_t node) {
  const auto idx = g.multi_index(node);
  int axis = -1;
  for (int a = 0; a < g.n; ++a) {
    if (idx[a] == 0 || idx[a] == g.shape[a] - 1) {
      if (axis >= 0) return -1;
      axis = a;
    }
  }
  return axis;
}

double face_distance(const Grid& g, const std::array<double, 3>& x, int axis) {
  return std::min(x[axis] - g.origin[axis], g.origin[axis] + g.length(axis) - x[axis]);
}

struct BarrierPieces {
  std::vector<std::size_t> nodes;
  std::vector<double> w, d, rho2, tangential;
};

BarrierPieces barrier_pieces(const ProblemSpec& problem, const FlowState& state,
                             const SpaceTimeFunction& usub, std::size_t x0, double delta) {
  const Grid& g = problem.grid;
  if (g.topology != Topology::DirichletBox)
    throw InvalidConfiguration("barrier: needs a DirichletBox grid");
  if (x0 >= g.size() || !g.is_boundary(x0))
    throw InvalidConfiguration("barrier: x0 = " + std::to_string(x0) + " is not a boundary node");
  const int face = single_face_axis(g, x0);
  if (face < 0)
    throw InvalidConfiguration("barrier: x0 = " + std::to_string(x0) + " lies on a corner");
  const auto c0 = g.coords(x0);
  for (int a = 0; a < g.n; ++a) {
    const double dist = a == face ? g.length(a) : face_distance(g, c0, a);
    if (dist < delta)
      throw InvalidConfiguration("barrier: x0 = " + std::to_string(x0) +
                                 " is closer than delta to another face (axis " +
                                 std::to_string(a) + ")");
  }

  const auto under = sample_field(usub, g, state.t);
  auto diff = state.u;
  const auto phi = problem.phi_s->field(g, state.t);
  for (std::size_t p = 0; p < diff.values.size(); ++p) diff[p] -= phi[p];
  const auto grad = gradient(diff);

  BarrierPieces out;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.coords(p);
    double rho2 = 0.0;
    for (int a = 0; a < g.n; ++a) rho2 += (x[a] - c0[a]) * (x[a] - c0[a]);
    if (rho2 > delta * delta * (1 + 1e-12)) continue;
    double d = kInf;
    for (int a = 0; a < g.n; ++a) d = std::min(d, face_distance(g, x, a));
    double tang = 0.0;
    for (int a = 0; a < g.n; ++a)
      if (a != face) tang += grad(p, a) * grad(p, a);
    out.nodes.push_back(p);
    out.w.push_back(state.u[p] - under[p]);
    out.d.push_back(d);
    out.rho2.push_back(rho2);
    out.tangential.push_back(tang);
  }
  return out;
}

double barrier_value(const BarrierPieces& b, std::size_t i, const BarrierParams& q) {
  const double d = b.d[i];
  const double v = b.w[i] + q.s * d - q.N * d * d / 2;
  return q.A1 * v + q.A2 * b.rho2[i] - q.A3 * b.tangential[i];
}

double barrier_margin(const BarrierPieces& b, const BarrierParams& q, std::size_t* arg) {
  double m = kInf;
  for (std::size_t i = 0; i < b.nodes.size(); ++i) {
    const double r = barrier_value(b, i, q) - q.K * (b.d[i] + b.rho2[i]);
    if (r < m) {
      m = r;
      if (arg) *arg = b.nodes[i];
    }
  }
  return m;
}

}  // namespace

std::vector<double> sample_times(const ProblemSpec& problem, int count) {
  if (count < 2 || problem.horizon <= 0.0) return {0.0};
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = problem.horizon * i / (count - 1);
  return t;
}

SubsolutionReport verify_subsolution(const ProblemSpec& problem, const SpaceTimeFunction& usub,
                                     std::span<const double> times, double delta) {
  Accumulator acc(problem, delta);
  acc.initial(sample_field(usub, problem.grid, 0.0));
  for (double t : times)
    acc.add(sample_field(usub, problem.grid, t), sample_dt_field(usub, problem.grid, t), t);
  return acc.finish();
}

SubsolutionReport verify_subsolution(const ProblemSpec& problem,
                                     std::span<const FlowState> states, double delta) {
  if (states.empty()) throw std::invalid_argument("verify_subsolution: no states");
  Accumulator acc(problem, delta);
  acc.initial(states.front().u);
  for (const auto& s : states) acc.add(s.u, s.ut, s.t);
  return acc.finish();
}

LinearSubsolution::LinearSubsolution(ScalarField base, double rate, FunctionPtr boundary)
    : base_(std::move(base)), rate_(rate), boundary_(std::move(boundary)) {
  if (base_.grid.topology != Topology::DirichletBox) boundary_.reset();
}

void LinearSubsolution::sample(const Grid& g, double t, std::span<double> out) const {
  if (!(g == base_.grid)) throw std::invalid_argument("LinearSubsolution: grid mismatch");
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = base_[p] + rate_ * t;
  if (!boundary_) return;
  std::vector<double> b(g.size());
  boundary_->sample(g, t, b);
  for (std::size_t p : g.boundary_nodes()) out[p] = b[p];
}

void LinearSubsolution::sample_dt(const Grid& g, double t, std::span<double> out) const {
  if (!(g == base_.grid)) throw std::invalid_argument("LinearSubsolution: grid mismatch");
  std::fill(out.begin(), out.end(), rate_);
  if (!boundary_) return;
  std::vector<double> b(g.size());
  boundary_->sample_dt(g, t, b);
  for (std::size_t p : g.boundary_nodes()) out[p] = b[p];
}

std::string LinearSubsolution::describe() const {
  std::ostringstream os;
  os.precision(17);
  os << "phi_b + " << rate_ << " t";
  if (boundary_) os << " (boundary: " << boundary_->describe() << ")";
  return os.str();
}

std::shared_ptr<LinearSubsolution> construct_linear_subsolution(
    const ProblemSpec& problem, double safety, std::span<const double> times) {
  if (!(safety >= 0.0)) throw std::invalid_argument("construct_linear_subsolution: safety < 0");
  const auto ev = evaluate_nodes(problem, problem.phi_b, false);
  if (!ev.admissible)
    throw InvalidConfiguration("construct_linear_subsolution: phi_b inadmissible at node " +
                               std::to_string(ev.worst_node));
  double inf_f = kInf, sup_psi = -kInf;
  for (std::size_t p = 0; p < ev.F.size(); ++p)
    if (problem.active(p)) inf_f = std::min(inf_f, ev.F[p]);
  for (double t : times) {
    const auto psi = problem.psi->field(problem.grid, t);
    for (std::size_t p = 0; p < psi.values.size(); ++p)
      if (problem.active(p)) sup_psi = std::max(sup_psi, psi[p]);
  }
  double rate = inf_f - sup_psi - safety;
  if (problem.grid.topology == Topology::DirichletBox) rate = std::min(rate, 0.0);
  return std::make_shared<LinearSubsolution>(problem.phi_b, rate, problem.phi_s);
}

std::shared_ptr<LinearSubsolution> construct_linear_subsolution(const ProblemSpec& problem,
                                                                double safety) {
  return construct_linear_subsolution(problem, safety, sample_times(problem));
}

namespace {

VectorField difference_gradient(const FlowState& state, const SpaceTimeFunction& usub) {
  auto diff = state.u;
  const auto under = sample_field(usub, state.u.grid, state.t);
  for (std::size_t p = 0; p < diff.values.size(); ++p) diff[p] -= under[p];
  return gradient(diff);
}

double grad_sq(const VectorField& g, std::size_t p) {
  double s = 0.0;
  for (int a = 0; a < g.grid.n; ++a) s += g(p, a) * g(p, a);
  return s;
}

}  // namespace

double eta_b_bound(const FlowState& state, const SpaceTimeFunction& usub) {
  const auto g = difference_gradient(state, usub);
  double b1 = 0.0;
  for (std::size_t p = 0; p < state.u.values.size(); ++p) b1 = std::max(b1, grad_sq(g, p));
  b1 += 1.0;
  return 1.0 / (8 * b1 * b1);
}

ScalarField eta_test_function(const FlowState& state, const SpaceTimeFunction& usub, double a,
                              double b, int delta01) {
  if (delta01 != 0 && delta01 != 1) throw std::invalid_argument("eta: delta must be 0 or 1");
  if (b < 0.0) throw std::invalid_argument("eta: b must be >= 0");
  const auto grad = difference_gradient(state, usub);
  const std::size_t N = state.u.values.size();
  double b1 = 0.0;
  for (std::size_t p = 0; p < N; ++p) b1 = std::max(b1, grad_sq(grad, p));
  b1 += 1.0;
  if (b > (1 + 1e-12) / (8 * b1 * b1)) {
    std::ostringstream os;
    os.precision(17);
    os << "eta: b = " << b << " exceeds 1/(8 b1^2) with measured b1 = " << b1;
    throw ConstraintViolation(os.str(), b1);
  }
  const auto under = sample_field(usub, state.u.grid, state.t);
  ScalarField eta(state.u.grid, 0.0, state.t);
  for (std::size_t p = 0; p < N; ++p) {
    const double s = 1.0 + grad_sq(grad, p);
    eta[p] = -std::log1p(-b * s * s) + a * (under[p] - state.u[p] - delta01 * state.t);
  }
  return eta;
}

WValue quantity_W(const FlowState& state, const ProblemSpec& problem,
                  const SpaceTimeFunction& usub, double a, double b, int delta01) {
  const auto eta = eta_test_function(state, usub, a, b, delta01);
  const auto eig = eigenvalue_field(hessian(state.u, problem.chi));
  const int n = problem.grid.n;
  WValue w{-kInf, 0, state.t};
  for (std::size_t p = 0; p < eta.values.size(); ++p) {
    const double v = eig[p * n + n - 1] * std::exp(eta[p]);
    if (v > w.value) w = {v, p, state.t};
  }
  return w;
}

void BarrierParams::validate() const {
  for (double c : {A1, A2, A3, s, N})
    if (!(c >= 0.0) || !std::isfinite(c))
      throw InvalidConfiguration("barrier: constants must be finite and >= 0");
  if (!(delta > 0.0)) throw InvalidConfiguration("barrier: delta must be > 0");
  if (!(K > 0.0)) throw InvalidConfiguration("barrier: K must be > 0");
}

BarrierResult barrier_psi(const ProblemSpec& problem, const FlowState& state,
                          const SpaceTimeFunction& usub, const BarrierParams& params) {
  params.validate();
  const auto pieces = barrier_pieces(problem, state, usub, params.x0, params.delta);
  BarrierResult out;
  out.field = ScalarField(problem.grid, std::numeric_limits<double>::quiet_NaN(), state.t);
  for (std::size_t i = 0; i < pieces.nodes.size(); ++i)
    out.field[pieces.nodes[i]] = barrier_value(pieces, i, params);
  out.neighborhood = pieces.nodes;
  out.min_over_kdrho = barrier_margin(pieces, params, &out.min_node);
  return out;
}

BarrierSearch search_barrier(const ProblemSpec& problem, const FlowState& state,
                             const SpaceTimeFunction& usub, std::size_t x0, double delta,
                             double K, int max_exponent) {
  BarrierParams base;
  base.x0 = x0;
  base.delta = delta;
  base.K = K;
  base.validate();
  const auto pieces = barrier_pieces(problem, state, usub, x0, delta);

  BarrierSearch out;
  out.best_margin = -kInf;
  const int E = max_exponent;
  // Best trial of one exponent-sum level; stops at the first success.
  auto scan = [&](int total, BarrierTrial& level) {
    for (int e1 = 0; e1 <= std::min(E, total); ++e1)
      for (int e2 = 0; e2 <= std::min(E, total - e1); ++e2)
        for (int e3 = 0; e3 <= std::min(E, total - e1 - e2); ++e3) {
          const int e4 = total - e1 - e2 - e3;
          if (e4 > E) continue;
          for (int si = 0; si <= 10; ++si) {
            BarrierParams q = base;
            q.A1 = std::ldexp(1.0, e1);
            q.A2 = std::ldexp(1.0, e2);
            q.A3 = std::ldexp(1.0, e3);
            q.N = std::ldexp(1.0, e4);
            q.s = std::ldexp(1.0, -si);
            const double m = barrier_margin(pieces, q, nullptr);
            if (m > level.margin) level = {q, m};
            if (m >= 0.0) return true;
          }
        }
    return false;
  };
  for (int total = 0; total <= 4 * E && !out.found; ++total) {
    BarrierTrial level{base, -kInf};
    out.found = scan(total, level);
    out.trials.push_back(level);
    if (level.margin > out.best_margin) {
      out.best_margin = level.margin;
      out.best = level.params;
    }
  }
  return out;
}

}  // namespace hessflow
