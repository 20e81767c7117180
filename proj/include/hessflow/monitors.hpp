#pragma once

// Per-step diagnostics of a run: sup-norms, the u_t maximum principle,
// exponential growth fits and a windowed gradient blow-up detector.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hessflow/flow.hpp"
#include "hessflow/subsolutions.hpp"

namespace hessflow {

struct MonitorOptions {
  /// When set, rows carry the subsolution slack and, with track_w, W.
  FunctionPtr usub;
  bool track_w = false;
  double w_a = 0.0;
  double w_b = 0.0;
  int w_delta = 0;
  /// Record every k-th accepted step (the first and last are always kept).
  int every = 1;
  /// Keep full states alongside the rows.
  bool keep_states = true;
  /// Stop once sup|u_t| < steady_tol (0 disables).
  double steady_tol = 0.0;
  /// Stop on a GradientBlowup verdict over the rows so far.
  bool stop_on_blowup = false;
  double grad_threshold = 1e6;
  int blowup_window = 5;
};

struct MonitorRow {
  double t = 0.0;
  double sup_u = 0.0;
  double sup_grad_u = 0.0;
  /// Largest spectral radius of D^2 u (U - chi); one-sided stencils on box faces.
  double sup_hess_u = 0.0;
  double sup_ut = 0.0;
  std::optional<double> w;
  std::optional<double> slack;
  /// sup |u_t| over the lateral boundary (0 on a torus).
  double sup_ut_boundary = 0.0;
  /// sup |psi_t| over the grid at t.
  double sup_psi_t = 0.0;
};

struct Trajectory {
  std::vector<FlowState> states;
  std::vector<MonitorRow> rows;
  std::string stop_reason;  // "horizon", "steady", "blowup"
};

MonitorRow record(const FlowState& state, const ProblemSpec& problem,
                  const MonitorOptions& options = {});

/// integrate() with a row per recorded step. StepFailure propagates.
Trajectory solve(const ProblemSpec& problem, const MonitorOptions& options = {});

struct MaxPrincipleCheck {
  bool holds = true;
  /// max over rows of sup|u_t| minus its bound; <= tol when holds.
  double worst_violation = 0.0;
  std::size_t worst_row = 0;
};

/// sup|u_t(t)| <= max(sup|u_t(0)|, sup over s <= t of the lateral boundary
/// |u_t|) + t sup_{s<=t} |psi_t| + tol, row by row.
MaxPrincipleCheck ut_maximum_principle_check(const Trajectory& traj, const ProblemSpec& problem,
                                             double tol = 1e-7);

enum class GrowthVerdict { Bounded, ExponentialGrowth, Inconclusive };

struct GrowthFit {
  double C = 0.0;
  double B = 0.0;
  double residual = 0.0;  // RMS misfit of log supHessU
  GrowthVerdict verdict = GrowthVerdict::Inconclusive;
  std::size_t rows_used = 0;
};

inline constexpr double kBoundedRate = 1e-3;
inline constexpr double kExponentialRate = 0.1;
inline constexpr double kFitTolerance = 0.1;

/// Least squares of log supHessU = log C + B t over the trailing half of
/// the rows. Throws std::invalid_argument with fewer than 10 rows.
GrowthFit growth_fit(const Trajectory& traj);

std::string to_string(GrowthVerdict v);

enum class BlowupVerdict { NoBlowup, GradientBlowup };

struct BlowupReport {
  BlowupVerdict verdict = BlowupVerdict::NoBlowup;
  std::size_t flagged_row = 0;
  /// When supGradU never passed the threshold, the Hessian growth must not
  /// be classified ExponentialGrowth.
  bool contrapositive_holds = true;
  std::optional<GrowthFit> fit;
  std::string note;
};

/// GradientBlowup at the first row where supGradU > threshold and the
/// discrete log-derivative of supGradU increases strictly over the last
/// `window` rows. Throws std::invalid_argument for window < 3.
BlowupReport blowup_detector(const Trajectory& traj, double grad_threshold, int window);

std::string to_string(BlowupVerdict v);

struct GradientMode {
  enum Kind { CaseIII, Subsolution } kind = CaseIII;
  /// CaseIII: inf u over the run; the state's own minimum when unset.
  std::optional<double> inf_u;
  /// Subsolution: phi = -log(1 - b v^2) + A (usub + w - B t) with
  /// v = usub - u + sup(u - usub) + 1.
  FunctionPtr usub;
  FunctionPtr w;  // zero when unset
  double A = 0.0, B = 0.0, b = 0.0;
  /// sup(u - usub) over the run; the state's own when unset.
  std::optional<double> sup_shift;
};

struct GradientQuantity {
  double value = 0.0;
  std::size_t node = 0;
};

/// max over nodes of |grad u| e^phi. Subsolution mode throws
/// ConstraintViolation unless 14 b v^2 <= 1 everywhere.
GradientQuantity interior_gradient_quantity(const FlowState& state, const GradientMode& mode);

}  // namespace hessflow
