#pragma once

// Time integration of u_t = F(U) - psi, U = D^2 u + chi, with F = f
// (additive form) or F = log f (exponential form).

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hessflow/expressions.hpp"
#include "hessflow/grid.hpp"
#include "hessflow/operators.hpp"

namespace hessflow {

struct NewtonConfig {
  double residual_tol = 1e-10;
  int max_iters = 25;
  double damping_floor = 1.0 / 1024;
  double linear_tol = 1e-10;  // relative to the Newton residual
  int linear_max_iters = 2000;
  /// Relative cone margin every accepted iterate keeps at every active node.
  double admissibility_margin = 1e-8;

  void validate() const;
};

enum class StepKind { Explicit, Implicit };

struct StepPolicy {
  StepKind kind = StepKind::Implicit;
  double dt = 1e-2;
  NewtonConfig newton;
};

struct ProblemSpec {
  Grid grid;
  OperatorSpec op;
  SymTensorField chi;
  FunctionPtr psi;
  ScalarField phi_b;
  FunctionPtr phi_s;  // required on a DirichletBox grid, ignored on a torus
  Form form = Form::Additive;
  double horizon = 1.0;
  StepPolicy step;

  /// Shapes, initial admissibility (all nodes, positive margin) and
  /// compatibility of phi_b with phi_s at t = 0. Throws InvalidConfiguration.
  void validate() const;
  /// Nodes where the equation is solved: all of a torus, the interior of a box.
  bool active(std::size_t node) const;
};

struct StepDiagnostics {
  int newton_iters = 0;
  int linear_iters = 0;
  double residual_norm = 0.0;
  double dt_used = 0.0;
  double min_admissibility_margin = 0.0;
  int halvings = 0;
  std::vector<double> residual_history;
};

struct FlowState {
  ScalarField u;
  ScalarField ut;  // difference quotient of the last accepted step
  double t = 0.0;
  StepDiagnostics last;
};

class StepFailure : public std::runtime_error {
 public:
  StepFailure(const std::string& what, double time, std::size_t node, StepDiagnostics diag)
      : std::runtime_error(what), time_(time), node_(node), diag_(std::move(diag)) {}
  double time() const { return time_; }
  std::size_t node() const { return node_; }
  const StepDiagnostics& diagnostics() const { return diag_; }

 private:
  double time_;
  std::size_t node_;
  StepDiagnostics diag_;
};

class RunTimeout : public std::runtime_error {
 public:
  RunTimeout(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

/// Per-node F(U) and, optionally, the linearization coefficients F^{ij}
/// (divided by f in the exponential form), packed as a SymTensorField.
struct NodeEvaluation {
  std::vector<double> F;
  SymTensorField coeff;
  bool admissible = true;
  double min_margin = 0.0;
  std::size_t worst_node = 0;
  double max_coeff_trace = 0.0;
};

NodeEvaluation evaluate_nodes(const ProblemSpec& problem, const ScalarField& u, bool with_coeff);

FlowState initial_state(const ProblemSpec& problem);

/// F(U[u]) - psi(t) on active nodes; phi_s_t on box boundary nodes.
/// Throws ConeViolation at an inadmissible node, FormViolation for f <= 0
/// in the exponential form.
ScalarField rhs(const ScalarField& u, double t, const ProblemSpec& problem);
ScalarField rhs(const FlowState& state, const ProblemSpec& problem);

/// F^{ij} D_ij w on active nodes, 0 elsewhere.
ScalarField linearized_apply(const FlowState& state, const ProblemSpec& problem,
                             const ScalarField& w);

/// Forward Euler with dt capped by 0.2 h^2 / max sum f_i and halved (up
/// to 30 times) until the result is admissible.
FlowState step_explicit(const FlowState& state, const ProblemSpec& problem, double dt);

/// Backward Euler solved by damped Newton with matrix-free BiCGSTAB.
FlowState step_implicit(const FlowState& state, const ProblemSpec& problem, double dt,
                        const NewtonConfig& cfg);

FlowState step(const FlowState& state, const ProblemSpec& problem, double dt);

/// Steps from the initial state to the horizon. The observer sees every
/// accepted state (the initial one included) and may stop the run by
/// returning false. Failed implicit steps are retried with dt halved up
/// to 10 times before the failure propagates.
FlowState integrate(const ProblemSpec& problem,
                    const std::function<bool(const FlowState&)>& observer);

struct SteadyOptions {
  double tol = 1e-8;
  double dt_max = 100.0;
  int max_steps = 5000;
  /// Sees the initial state and every accepted step.
  std::function<void(const FlowState&)> on_step;
};

/// Implicit stepping with dt doubling after each success until sup|u_t|
/// < tol. Requires time-independent data; throws RunTimeout on budget.
FlowState steady_state(const ProblemSpec& problem, const SteadyOptions& options = {});

/// Largest |F(U[u]) - psi| over active nodes at time t.
double elliptic_residual(const ScalarField& u, double t, const ProblemSpec& problem);

}  // namespace hessflow
