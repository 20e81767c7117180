#pragma once

// Space-time data functions: a small catalog of smooth closed-form
// expressions with exact derivatives, sums of them, and manufactured
// right-hand sides built from a target solution.

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hessflow/grid.hpp"
#include "hessflow/linalg.hpp"
#include "hessflow/operators.hpp"

namespace hessflow {

using Point = std::array<double, 3>;

enum class Form { Additive, Exponential };

/// Value, time derivative, spatial gradient and Hessian at one point.
struct Jet {
  double value = 0.0;
  double dt = 0.0;
  std::array<double, 3> grad{};
  std::array<double, 9> hess{};  // row-major 3 x 3
};

/// Anything the solver can sample on a grid at a given time.
class SpaceTimeFunction {
 public:
  virtual ~SpaceTimeFunction() = default;
  virtual void sample(const Grid& g, double t, std::span<double> out) const = 0;
  virtual void sample_dt(const Grid& g, double t, std::span<double> out) const = 0;
  virtual bool time_dependent() const = 0;
  virtual std::string describe() const = 0;

  ScalarField field(const Grid& g, double t) const;
};

using FunctionPtr = std::shared_ptr<const SpaceTimeFunction>;

/// Closed-form expression with pointwise derivatives.
class Expression : public SpaceTimeFunction {
 public:
  virtual Jet jet(const Point& x, double t) const = 0;
  double value(const Point& x, double t) const { return jet(x, t).value; }

  void sample(const Grid& g, double t, std::span<double> out) const override;
  void sample_dt(const Grid& g, double t, std::span<double> out) const override;
};

using ExprPtr = std::shared_ptr<const Expression>;

namespace expr {

ExprPtr constant(double c);
/// c + a . x
ExprPtr affine(double c, std::vector<double> a);
/// c + 1/2 sum a_i x_i^2
ExprPtr quadratic(double c, std::vector<double> a);
/// amp * exp(-rate t) * prod_a sin(k_a x_a); axes with k_a = 0 are left out.
ExprPtr sin_product(double amp, std::vector<double> k, double rate = 0.0);
ExprPtr cos_product(double amp, std::vector<double> k, double rate = 0.0);
/// amp * exp(-|x - center|^2 / (2 width^2))
ExprPtr gaussian(double amp, double width, std::vector<double> center);
/// rate * t
ExprPtr time_linear(double rate);
ExprPtr sum(std::vector<ExprPtr> terms);

}  // namespace expr

/// psi := F(D^2 u* + chi) - u*_t, with F = f (Additive) or log f
/// (Exponential), from the analytic Hessian of u*. Time derivatives of the
/// result are central differences in t.
class AnalyticManufactured : public SpaceTimeFunction {
 public:
  AnalyticManufactured(OperatorSpec op, Form form, ExprPtr target, Sym3 chi);
  double value(const Point& x, double t) const;
  void sample(const Grid& g, double t, std::span<double> out) const override;
  void sample_dt(const Grid& g, double t, std::span<double> out) const override;
  bool time_dependent() const override { return target_->time_dependent(); }
  std::string describe() const override;

 private:
  OperatorSpec op_;
  Form form_;
  ExprPtr target_;
  Sym3 chi_;
};

/// Same construction with the grid Hessian of u*, so u* solves the
/// discrete equation exactly.
class DiscreteManufactured : public SpaceTimeFunction {
 public:
  DiscreteManufactured(OperatorSpec op, Form form, ExprPtr target, Sym3 chi);
  void sample(const Grid& g, double t, std::span<double> out) const override;
  void sample_dt(const Grid& g, double t, std::span<double> out) const override;
  bool time_dependent() const override { return target_->time_dependent(); }
  std::string describe() const override;

 private:
  OperatorSpec op_;
  Form form_;
  ExprPtr target_;
  Sym3 chi_;
};

/// f or log f of given eigenvalues; throws FormViolation(node) when the
/// Exponential form meets f <= 0.
double apply_form(Form form, double f, std::size_t node);

Sym3 scaled_identity(int n, double c);
Sym3 diagonal(std::vector<double> d);

}  // namespace hessflow
