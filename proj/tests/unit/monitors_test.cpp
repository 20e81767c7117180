#include "hessflow/monitors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hessflow/problems.hpp"

namespace hessflow {
namespace {

Trajectory synthetic(int rows, double t_end, double (*grad)(double), double (*hess)(double)) {
  Trajectory traj;
  for (int i = 0; i < rows; ++i) {
    MonitorRow r;
    r.t = t_end * i / (rows - 1);
    r.sup_grad_u = grad(r.t);
    r.sup_hess_u = hess(r.t);
    traj.rows.push_back(r);
  }
  return traj;
}

double one(double) { return 1.0; }
double five(double) { return 5.0; }
double exp_half(double t) { return 2.0 * std::exp(0.5 * t); }
double pole(double t) { return 1.0 / (1.0 - t); }

TEST(Record, SteadyStateHasZeroUt) {
  auto p = problems::steady_torus(32, 0.1, 1.0);
  p.phi_b = problems::steady_torus_target()->field(p.grid, 0.0);
  const auto traj = solve(p);
  for (const auto& r : traj.rows) EXPECT_LT(r.sup_ut, 1e-10);
}

TEST(Record, HalfSquaredNormHasUnitHessian) {
  const auto g = Grid::box({9, 9}, {2, 2}, {-1, -1});
  ProblemSpec p;
  p.grid = g;
  p.op = OperatorSpec::sigma_root(1, 2);
  p.chi = SymTensorField(g);
  p.phi_s = expr::quadratic(0.0, {1.0, 1.0});
  p.phi_b = p.phi_s->field(g, 0.0);
  p.psi = expr::constant(0.0);
  const auto row = record(initial_state(p), p);
  EXPECT_NEAR(row.sup_hess_u, 1.0, 1e-12);
  EXPECT_NEAR(row.sup_u, 1.0, 1e-15);
  EXPECT_NEAR(row.sup_grad_u, std::sqrt(2.0), 1e-12);
}

TEST(Record, ManufacturedGradientTracksAnalyticDecay) {
  const auto p = problems::decaying_manufactured(64, 0.01, 0.5);
  const auto traj = solve(p, {.every = 10});
  const double h = p.grid.spacing[0];
  ASSERT_GE(traj.rows.size(), 5u);
  for (const auto& r : traj.rows)
    EXPECT_NEAR(r.sup_grad_u, 0.1 * std::exp(-r.t), 0.1 * h * h) << "t = " << r.t;
}

TEST(Solve, ZeroHorizonAndSampling) {
  auto p = problems::decaying_manufactured(16, 0.1, 0.0);
  EXPECT_EQ(solve(p).rows.size(), 1u);

  p.horizon = 1.0;
  const auto traj = solve(p, {.every = 3});
  ASSERT_EQ(traj.rows.size(), 5u);  // steps 0, 3, 6, 9 and the final one
  EXPECT_DOUBLE_EQ(traj.rows.back().t, 1.0);
  for (std::size_t i = 1; i < traj.rows.size(); ++i)
    EXPECT_GT(traj.rows[i].t, traj.rows[i - 1].t);
  EXPECT_EQ(traj.states.size(), traj.rows.size());
  EXPECT_EQ(traj.stop_reason, "horizon");
}

TEST(Solve, StopsAtSteadyState) {
  const auto p = problems::steady_torus(32, 0.5, 100.0);
  const auto traj = solve(p, {.steady_tol = 1e-6});
  EXPECT_EQ(traj.stop_reason, "steady");
  EXPECT_LT(traj.rows.back().sup_ut, 1e-6);
  EXPECT_LT(traj.rows.back().t, 100.0);
}

TEST(Solve, RowsCarrySlackAndW) {
  const auto p = problems::steady_torus(32, 0.1, 1.0);
  MonitorOptions opt;
  opt.usub = construct_linear_subsolution(p, 0.1);
  opt.track_w = true;
  opt.w_b = 1e-3;
  const auto traj = solve(p, opt);
  for (const auto& r : traj.rows) {
    ASSERT_TRUE(r.slack && r.w);
    EXPECT_GE(*r.slack, 0.1 - 1e-12);
    EXPECT_GT(*r.w, 0.0);
  }
}

TEST(MaxPrinciple, HoldsForHeatFlow) {
  for (std::uint64_t seed : {1u, 2u}) {
    const auto p = problems::heat_torus(32, 0.02, 0.5, seed);
    const auto check = ut_maximum_principle_check(solve(p), p);
    EXPECT_TRUE(check.holds) << check.worst_violation;
  }
  const auto box = problems::heat_box(17, 0.01, 0.3);
  EXPECT_TRUE(ut_maximum_principle_check(solve(box), box).holds);
}

TEST(MaxPrinciple, SteadyStartIsTrivial) {
  auto p = problems::steady_torus(16, 0.1, 1.0);
  p.phi_b = problems::steady_torus_target()->field(p.grid, 0.0);
  const auto check = ut_maximum_principle_check(solve(p), p);
  EXPECT_TRUE(check.holds);
  EXPECT_LT(check.worst_violation, 1e-10);
}

TEST(MaxPrinciple, DetectsInjectedViolation) {
  const auto p = problems::heat_torus(16, 0.05, 0.5, 3);
  auto traj = solve(p);
  const double bound = traj.rows.front().sup_ut;
  traj.rows[4].sup_ut = bound + 0.25;
  const auto check = ut_maximum_principle_check(traj, p);
  EXPECT_FALSE(check.holds);
  EXPECT_EQ(check.worst_row, 4u);
  EXPECT_NEAR(check.worst_violation, 0.25, 1e-15);
  EXPECT_THROW(ut_maximum_principle_check(Trajectory{}, p), std::invalid_argument);
}

TEST(GrowthFitTest, ConstantIsBounded) {
  const auto fit = growth_fit(synthetic(20, 5.0, one, five));
  EXPECT_NEAR(fit.B, 0.0, 1e-15);
  EXPECT_NEAR(fit.C, 5.0, 1e-12);
  EXPECT_EQ(fit.verdict, GrowthVerdict::Bounded);
}

TEST(GrowthFitTest, RecoversExponential) {
  const auto fit = growth_fit(synthetic(40, 4.0, one, exp_half));
  EXPECT_NEAR(fit.C, 2.0, 2e-6);
  EXPECT_NEAR(fit.B, 0.5, 5e-7);
  EXPECT_LT(fit.residual, 1e-12);
  EXPECT_EQ(fit.verdict, GrowthVerdict::ExponentialGrowth);
  EXPECT_THROW(growth_fit(synthetic(9, 1.0, one, five)), std::invalid_argument);
}

TEST(Blowup, BoundedSeriesIsQuiet) {
  const auto r = blowup_detector(synthetic(30, 3.0, one, five), 10.0, 5);
  EXPECT_EQ(r.verdict, BlowupVerdict::NoBlowup);
  EXPECT_TRUE(r.contrapositive_holds);
  ASSERT_TRUE(r.fit.has_value());
  EXPECT_THROW(blowup_detector(synthetic(30, 3.0, one, five), 10.0, 2), std::invalid_argument);
}

TEST(Blowup, FlagsPoleBeforeFinalRow) {
  const auto traj = synthetic(100, 0.99, pole, five);
  const auto r = blowup_detector(traj, 10.0, 5);
  EXPECT_EQ(r.verdict, BlowupVerdict::GradientBlowup);
  EXPECT_LT(r.flagged_row, traj.rows.size() - 1);
  EXPECT_GT(traj.rows[r.flagged_row].sup_grad_u, 10.0);
}

TEST(Blowup, ContrapositiveFailureIsReported) {
  const auto r = blowup_detector(synthetic(30, 4.0, one, exp_half), 10.0, 5);
  EXPECT_EQ(r.verdict, BlowupVerdict::NoBlowup);
  EXPECT_FALSE(r.contrapositive_holds);
}

TEST(Blowup, RegressionSuiteSatisfiesContrapositive) {
  for (const auto& named : problems::regression_suite()) {
    const auto r = blowup_detector(solve(named.problem), 1e3, 5);
    EXPECT_EQ(r.verdict, BlowupVerdict::NoBlowup) << named.name;
    EXPECT_TRUE(r.contrapositive_holds) << named.name;
  }
}

TEST(GradientQuantity, ConstantFieldIsZero) {
  auto p = problems::steady_torus(16, 0.1, 1.0);
  FlowState s;
  s.u = ScalarField(p.grid, 0.7);
  EXPECT_EQ(interior_gradient_quantity(s, {}).value, 0.0);
}

TEST(GradientQuantity, CaseIIIFormula) {
  const auto p = problems::heat_torus(16, 0.1, 1.0, 1);
  FlowState s = initial_state(p);
  const double lo = *std::min_element(s.u.values.begin(), s.u.values.end());
  for (double& v : s.u.values) v -= lo;
  const auto grad = gradient(s.u);
  double expect = 0.0;
  for (std::size_t i = 0; i < s.u.values.size(); ++i) {
    const double g = std::hypot(grad(i, 0), grad(i, 1));
    expect = std::max(expect, g * std::exp((s.u[i] + 1) * (s.u[i] + 1)));
  }
  EXPECT_DOUBLE_EQ(interior_gradient_quantity(s, {}).value, expect);
}

TEST(GradientQuantity, SubsolutionModeChecksB) {
  const auto p = problems::decaying_manufactured(16, 0.1, 1.0);
  const auto s = initial_state(p);
  GradientMode mode;
  mode.kind = GradientMode::Subsolution;
  mode.usub = construct_linear_subsolution(p, 0.1);
  mode.b = 1.0;
  EXPECT_THROW(interior_gradient_quantity(s, mode), ConstraintViolation);
  mode.b = 1.0 / 14.0 / 1.5;
  EXPECT_GT(interior_gradient_quantity(s, mode).value, 0.0);
}

TEST(GradientQuantity, DecaysOnManufacturedRun) {
  const auto p = problems::decaying_manufactured(32, 0.05, 1.0);
  const auto traj = solve(p, {.every = 4});
  double prev = 1e300;
  for (const auto& s : traj.states) {
    const double q = interior_gradient_quantity(s, {}).value;
    EXPECT_LT(q, prev);
    prev = q;
  }
}

}  // namespace
}  // namespace hessflow
