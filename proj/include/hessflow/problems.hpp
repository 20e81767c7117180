#pragma once

// Named problems with known behavior, used by the regression suite.

#include <cstdint>
#include <string>
#include <vector>

#include "hessflow/flow.hpp"

namespace hessflow::problems {

/// u* = 0.1 e^{-t} sin x sin y on the 2-torus of side 2 pi, chi = 2I,
/// f = sigma_2^{1/2}, psi manufactured from the analytic Hessian.
ProblemSpec decaying_manufactured(int N, double dt, double horizon = 1.0,
                                  StepKind kind = StepKind::Implicit);
ExprPtr decaying_manufactured_solution();

/// Time-independent psi manufactured from the grid Hessian of
/// u* = 0.1 sin x, so u* + c are the discrete steady states; the run starts
/// from u* + 0.05 cos x cos y. f = sigma_2^{1/2}, chi = 2I.
ProblemSpec steady_torus(int N, double dt, double horizon);
ExprPtr steady_torus_target();

/// Heat flow (f = sigma_1, chi = I) on the 2-torus with seeded smooth
/// initial data and a seeded time-independent psi.
ProblemSpec heat_torus(int N, double dt, double horizon, std::uint64_t seed);

/// Heat flow on the box [0,1]^2 with chi = I, psi = 2 and boundary data
/// the trace of the harmonic polynomial x^3 - 3 x y^2; the initial data
/// adds a bump vanishing on the boundary.
ProblemSpec heat_box(int N, double dt, double horizon);
ExprPtr heat_box_harmonic();

struct Named {
  std::string name;
  ProblemSpec problem;
};

/// Small, fast instances of every problem above.
std::vector<Named> regression_suite();

}  // namespace hessflow::problems
