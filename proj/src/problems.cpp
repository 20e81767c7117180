#include "hessflow/problems.hpp"

#include <cmath>
#include <numbers>

#include "hessflow/common.hpp"

namespace hessflow::problems {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

ProblemSpec base(const Grid& g, OperatorSpec op, const Sym3& chi, double dt, double horizon,
                 StepKind kind) {
  ProblemSpec p;
  p.grid = g;
  p.op = std::move(op);
  p.chi = SymTensorField::constant(g, chi);
  p.horizon = horizon;
  p.step.kind = kind;
  p.step.dt = dt;
  return p;
}

}  // namespace

ExprPtr decaying_manufactured_solution() { return expr::sin_product(0.1, {1, 1}, 1.0); }

ProblemSpec decaying_manufactured(int N, double dt, double horizon, StepKind kind) {
  const auto g = Grid::periodic({N, N}, {kTwoPi, kTwoPi});
  const auto op = OperatorSpec::sigma_root(2, 2);
  const auto chi = scaled_identity(2, 2.0);
  auto p = base(g, op, chi, dt, horizon, kind);
  const auto target = decaying_manufactured_solution();
  p.psi = std::make_shared<AnalyticManufactured>(op, Form::Additive, target, chi);
  p.phi_b = target->field(g, 0.0);
  return p;
}

ExprPtr steady_torus_target() { return expr::sin_product(0.1, {1, 0}); }

ProblemSpec steady_torus(int N, double dt, double horizon) {
  const auto g = Grid::periodic({N, N}, {kTwoPi, kTwoPi});
  const auto op = OperatorSpec::sigma_root(2, 2);
  const auto chi = scaled_identity(2, 2.0);
  auto p = base(g, op, chi, dt, horizon, StepKind::Implicit);
  p.psi = std::make_shared<DiscreteManufactured>(op, Form::Additive, steady_torus_target(), chi);
  p.phi_b = expr::sum({steady_torus_target(), expr::cos_product(0.05, {1, 1})})->field(g, 0.0);
  return p;
}

ProblemSpec heat_torus(int N, double dt, double horizon, std::uint64_t seed) {
  const auto g = Grid::periodic({N, N}, {kTwoPi, kTwoPi});
  auto p = base(g, OperatorSpec::sigma_root(1, 2), scaled_identity(2, 1.0), dt, horizon,
                StepKind::Implicit);
  Rng rng(seed);
  std::vector<ExprPtr> modes;
  for (int m = 0; m < 3; ++m) {
    const double amp = rng.uniform(-0.05, 0.05);
    const double kx = 1 + std::floor(rng.uniform(0, 2)), ky = 1 + std::floor(rng.uniform(0, 2));
    modes.push_back(rng.uniform() < 0.5 ? expr::sin_product(amp, {kx, ky})
                                        : expr::cos_product(amp, {kx, ky}));
  }
  p.phi_b = expr::sum(modes)->field(g, 0.0);
  p.psi = expr::sum({expr::constant(2.0), expr::cos_product(rng.uniform(-0.1, 0.1), {1, 0})});
  return p;
}

ExprPtr heat_box_harmonic() { return expr::quadratic(0.0, {2.0, -2.0}); }

ProblemSpec heat_box(int N, double dt, double horizon) {
  const auto g = Grid::box({N, N}, {1.0, 1.0});
  auto p = base(g, OperatorSpec::sigma_root(1, 2), scaled_identity(2, 1.0), dt, horizon,
                StepKind::Implicit);
  p.phi_s = heat_box_harmonic();
  p.psi = expr::constant(2.0);
  const double pi = std::numbers::pi;
  p.phi_b = expr::sum({heat_box_harmonic(), expr::sin_product(0.05, {pi, pi})})->field(g, 0.0);
  // Exact zeros of the bump on the faces.
  const auto faces = p.phi_s->field(g, 0.0);
  for (std::size_t node : g.boundary_nodes()) p.phi_b[node] = faces[node];
  return p;
}

std::vector<Named> regression_suite() {
  std::vector<Named> out;
  out.push_back({"decaying_manufactured", decaying_manufactured(32, 0.02, 0.5)});
  out.push_back({"steady_torus", steady_torus(32, 0.1, 5.0)});
  out.push_back({"heat_torus", heat_torus(32, 0.02, 0.5, 1)});
  out.push_back({"heat_box", heat_box(17, 0.01, 0.5)});
  return out;
}

}  // namespace hessflow::problems
