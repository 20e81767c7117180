#pragma once

// Subsolution checks and constructions, and the test functions eta, W and
// the boundary barrier Psi evaluated on grid fields.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hessflow/flow.hpp"

namespace hessflow {

struct SubsolutionReport {
  bool satisfied = false;
  bool strict = false;
  bool admissible = true;
  /// min over active nodes and sampled times of F(U[usub]) - usub_t - psi.
  double min_slack = 0.0;
  std::size_t min_node = 0;
  double min_time = 0.0;
  /// -max |usub - phi_s| over the lateral boundary at t > 0 (0 on a torus).
  double boundary_slack = 0.0;
  /// min of phi_b - usub(., 0).
  double initial_slack = 0.0;
  double delta = 0.0;
  std::size_t bad_node = 0;  // first inadmissible node when !admissible
  double bad_time = 0.0;
  int samples = 0;
};

/// Boundary and initial conditions are accepted within this tolerance.
inline constexpr double kConditionTolerance = 1e-10;

/// `count` equally spaced times on [0, horizon]; a single 0 when the horizon is 0.
std::vector<double> sample_times(const ProblemSpec& problem, int count = 33);

/// Slack of a space-time function at the given times; usub_t comes from
/// its sample_dt. strict means satisfied with min_slack >= delta.
SubsolutionReport verify_subsolution(const ProblemSpec& problem, const SpaceTimeFunction& usub,
                                     std::span<const double> times, double delta = 0.0);

/// Same check on computed states, using each state's u_t.
SubsolutionReport verify_subsolution(const ProblemSpec& problem,
                                     std::span<const FlowState> states, double delta = 0.0);

/// phi_b + A t on active nodes and phi_s on the lateral boundary.
class LinearSubsolution : public SpaceTimeFunction {
 public:
  LinearSubsolution(ScalarField base, double rate, FunctionPtr boundary);
  double rate() const { return rate_; }
  void sample(const Grid& g, double t, std::span<double> out) const override;
  void sample_dt(const Grid& g, double t, std::span<double> out) const override;
  bool time_dependent() const override { return rate_ != 0.0 || boundary_; }
  std::string describe() const override;

 private:
  ScalarField base_;
  double rate_;
  FunctionPtr boundary_;
};

/// A = inf F(U[phi_b]) - sup psi - safety, the sup taken over active nodes
/// and `times`. On a box A is capped at 0 and the boundary follows phi_s.
/// Throws std::invalid_argument when phi_b is inadmissible.
std::shared_ptr<LinearSubsolution> construct_linear_subsolution(
    const ProblemSpec& problem, double safety, std::span<const double> times);
std::shared_ptr<LinearSubsolution> construct_linear_subsolution(const ProblemSpec& problem,
                                                                double safety);

/// eta = -log(1 - b s^2) + a (usub - u - delta01 t) with s = 1 + |grad(u - usub)|^2.
/// Requires 0 <= b <= 1 / (8 b1^2), b1 = 1 + sup |grad(u - usub)|^2, and
/// throws ConstraintViolation (carrying b1) otherwise.
ScalarField eta_test_function(const FlowState& state, const SpaceTimeFunction& usub, double a,
                              double b, int delta01);

/// Largest b allowed by eta_test_function for this state.
double eta_b_bound(const FlowState& state, const SpaceTimeFunction& usub);

struct WValue {
  double value = 0.0;
  std::size_t node = 0;
  double time = 0.0;
};

/// max over nodes of lambda_max(U) e^eta.
WValue quantity_W(const FlowState& state, const ProblemSpec& problem,
                  const SpaceTimeFunction& usub, double a, double b, int delta01);

struct BarrierParams {
  double A1 = 1, A2 = 1, A3 = 1;
  double s = 1, N = 1;
  double delta = 0.1;
  std::size_t x0 = 0;
  double K = 1;

  void validate() const;
};

struct BarrierResult {
  ScalarField field;  // Psi on the neighborhood, NaN elsewhere
  std::vector<std::size_t> neighborhood;
  double min_over_kdrho = 0.0;  // min of Psi - K (d + rho^2)
  std::size_t min_node = 0;
};

/// Psi = A1 v + A2 rho^2 - A3 sum_tangential |D_l (u - phi_s)|^2 with
/// v = u - usub + s d - N d^2 / 2, on the nodes with rho <= delta. d is the
/// distance to the nearest face and rho the distance to x0. x0 must be a
/// boundary node at distance >= delta from every other face; otherwise
/// InvalidConfiguration.
BarrierResult barrier_psi(const ProblemSpec& problem, const FlowState& state,
                          const SpaceTimeFunction& usub, const BarrierParams& params);

struct BarrierTrial {
  BarrierParams params;
  double margin = 0.0;
};

struct BarrierSearch {
  bool found = false;
  BarrierParams best;
  double best_margin = 0.0;
  std::vector<BarrierTrial> trials;
};

/// Enumerates A1, A2, A3, N over {2^0, ..., 2^max_exponent} in order of
/// increasing exponent sum, with s over {1, 1/2, ..., 2^-10} innermost,
/// and stops at the first constants with min_over_kdrho >= 0.
BarrierSearch search_barrier(const ProblemSpec& problem, const FlowState& state,
                             const SpaceTimeFunction& usub, std::size_t x0, double delta,
                             double K = 1.0, int max_exponent = 20);

}  // namespace hessflow
