#include "hessflow/expressions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hessflow/common.hpp"
#include "hessflow/parallel.hpp"

namespace hessflow {

namespace {

std::string list(const std::vector<double>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os.str();
}

void require_axes(const std::vector<double>& v, const char* who) {
  if (v.empty() || v.size() > 3)
    throw std::invalid_argument(std::string(who) + ": expected 1 to 3 axis coefficients");
}

class Constant final : public Expression {
 public:
  explicit Constant(double c) : c_(c) {}
  Jet jet(const Point&, double) const override { return {c_, 0.0, {}, {}}; }
  bool time_dependent() const override { return false; }
  std::string describe() const override {
    std::ostringstream os;
    os << "constant(" << c_ << ")";
    return os.str();
  }

 private:
  double c_;
};

class Affine final : public Expression {
 public:
  Affine(double c, std::vector<double> a) : c_(c), a_(std::move(a)) { require_axes(a_, "affine"); }
  Jet jet(const Point& x, double) const override {
    Jet j;
    j.value = c_;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      j.value += a_[i] * x[i];
      j.grad[i] = a_[i];
    }
    return j;
  }
  bool time_dependent() const override { return false; }
  std::string describe() const override { return "affine(" + list(std::vector{c_}) + ", " + list(a_) + ")"; }

 private:
  double c_;
  std::vector<double> a_;
};

class Quadratic final : public Expression {
 public:
  Quadratic(double c, std::vector<double> a) : c_(c), a_(std::move(a)) {
    require_axes(a_, "quadratic");
  }
  Jet jet(const Point& x, double) const override {
    Jet j;
    j.value = c_;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      j.value += 0.5 * a_[i] * x[i] * x[i];
      j.grad[i] = a_[i] * x[i];
      j.hess[4 * i] = a_[i];
    }
    return j;
  }
  bool time_dependent() const override { return false; }
  std::string describe() const override { return "quadratic(" + list(std::vector{c_}) + ", " + list(a_) + ")"; }

 private:
  double c_;
  std::vector<double> a_;
};

class TrigProduct final : public Expression {
 public:
  TrigProduct(bool cosine, double amp, std::vector<double> k, double rate)
      : cos_(cosine), amp_(amp), k_(std::move(k)), rate_(rate) {
    require_axes(k_, cosine ? "cos_product" : "sin_product");
  }

  Jet jet(const Point& x, double t) const override {
    const int m = static_cast<int>(k_.size());
    double g[3] = {1, 1, 1}, d[3] = {0, 0, 0};
    for (int a = 0; a < m; ++a) {
      if (k_[a] == 0.0) continue;
      const double s = std::sin(k_[a] * x[a]), c = std::cos(k_[a] * x[a]);
      g[a] = cos_ ? c : s;
      d[a] = cos_ ? -k_[a] * s : k_[a] * c;
    }
    const double scale = amp_ * std::exp(-rate_ * t);
    Jet j;
    j.value = scale * g[0] * g[1] * g[2];
    j.dt = -rate_ * j.value;
    for (int a = 0; a < m; ++a) {
      if (k_[a] == 0.0) continue;
      double others = 1.0;
      for (int b = 0; b < 3; ++b)
        if (b != a) others *= g[b];
      j.grad[a] = scale * d[a] * others;
      j.hess[4 * a] = -k_[a] * k_[a] * j.value;
      for (int b = a + 1; b < m; ++b) {
        if (k_[b] == 0.0) continue;
        double rest = 1.0;
        for (int c = 0; c < 3; ++c)
          if (c != a && c != b) rest *= g[c];
        j.hess[3 * a + b] = j.hess[3 * b + a] = scale * d[a] * d[b] * rest;
      }
    }
    return j;
  }
  bool time_dependent() const override { return rate_ != 0.0; }
  std::string describe() const override {
    std::ostringstream os;
    os << (cos_ ? "cos_product(" : "sin_product(") << amp_ << ", " << list(k_) << ")";
    if (rate_ != 0.0) os << " * exp(-" << rate_ << " t)";
    return os.str();
  }

 private:
  bool cos_;
  double amp_;
  std::vector<double> k_;
  double rate_;
};

class Gaussian final : public Expression {
 public:
  Gaussian(double amp, double width, std::vector<double> center)
      : amp_(amp), w_(width), c_(std::move(center)) {
    require_axes(c_, "gaussian");
    if (!(width > 0.0)) throw std::invalid_argument("gaussian: width must be positive");
  }
  Jet jet(const Point& x, double) const override {
    const int m = static_cast<int>(c_.size());
    const double w2 = w_ * w_;
    double r2 = 0.0, y[3] = {0, 0, 0};
    for (int a = 0; a < m; ++a) {
      y[a] = x[a] - c_[a];
      r2 += y[a] * y[a];
    }
    Jet j;
    j.value = amp_ * std::exp(-0.5 * r2 / w2);
    for (int a = 0; a < m; ++a) {
      j.grad[a] = -j.value * y[a] / w2;
      for (int b = 0; b < m; ++b)
        j.hess[3 * a + b] = j.value * (y[a] * y[b] / (w2 * w2) - (a == b ? 1.0 / w2 : 0.0));
    }
    return j;
  }
  bool time_dependent() const override { return false; }
  std::string describe() const override {
    std::ostringstream os;
    os << "gaussian(" << amp_ << ", " << w_ << ", " << list(c_) << ")";
    return os.str();
  }

 private:
  double amp_, w_;
  std::vector<double> c_;
};

class TimeLinear final : public Expression {
 public:
  explicit TimeLinear(double rate) : rate_(rate) {}
  Jet jet(const Point&, double t) const override { return {rate_ * t, rate_, {}, {}}; }
  bool time_dependent() const override { return rate_ != 0.0; }
  std::string describe() const override {
    std::ostringstream os;
    os << "time_linear(" << rate_ << ")";
    return os.str();
  }

 private:
  double rate_;
};

class Sum final : public Expression {
 public:
  explicit Sum(std::vector<ExprPtr> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw std::invalid_argument("sum: no terms");
  }
  Jet jet(const Point& x, double t) const override {
    Jet out;
    for (const auto& term : terms_) {
      const Jet j = term->jet(x, t);
      out.value += j.value;
      out.dt += j.dt;
      for (int i = 0; i < 3; ++i) out.grad[i] += j.grad[i];
      for (int i = 0; i < 9; ++i) out.hess[i] += j.hess[i];
    }
    return out;
  }
  bool time_dependent() const override {
    for (const auto& term : terms_)
      if (term->time_dependent()) return true;
    return false;
  }
  std::string describe() const override {
    std::string s;
    for (std::size_t i = 0; i < terms_.size(); ++i) s += (i ? " + " : "") + terms_[i]->describe();
    return s;
  }

 private:
  std::vector<ExprPtr> terms_;
};

double lambda_value(const OperatorSpec& op, Form form, const Sym3& U, std::size_t node) {
  const auto e = eigen_sym(U);
  const std::span<const double> lam(e.values.data(), op.n);
  return apply_form(form, eval_f(op, lam), node);
}

// Fourth-order central difference in t of a sampled quantity.
template <class Sampler>
void time_difference(const Grid& g, double t, std::span<double> out, Sampler&& sampler) {
  const double h = 1e-3 * (1.0 + std::abs(t));
  std::vector<double> a(g.size()), b(g.size()), c(g.size()), d(g.size());
  sampler(t + 2 * h, a);
  sampler(t + h, b);
  sampler(t - h, c);
  sampler(t - 2 * h, d);
  for (std::size_t p = 0; p < g.size(); ++p) out[p] = (-a[p] + 8 * b[p] - 8 * c[p] + d[p]) / (12 * h);
}

}  // namespace

ScalarField SpaceTimeFunction::field(const Grid& g, double t) const {
  ScalarField f(g, 0.0, t);
  sample(g, t, f.values);
  return f;
}

void Expression::sample(const Grid& g, double t, std::span<double> out) const {
  parallel_for(g.size(), [&](std::size_t p) { out[p] = jet(g.coords(p), t).value; });
}

void Expression::sample_dt(const Grid& g, double t, std::span<double> out) const {
  parallel_for(g.size(), [&](std::size_t p) { out[p] = jet(g.coords(p), t).dt; });
}

namespace expr {

ExprPtr constant(double c) { return std::make_shared<Constant>(c); }
ExprPtr affine(double c, std::vector<double> a) { return std::make_shared<Affine>(c, std::move(a)); }
ExprPtr quadratic(double c, std::vector<double> a) {
  return std::make_shared<Quadratic>(c, std::move(a));
}
ExprPtr sin_product(double amp, std::vector<double> k, double rate) {
  return std::make_shared<TrigProduct>(false, amp, std::move(k), rate);
}
ExprPtr cos_product(double amp, std::vector<double> k, double rate) {
  return std::make_shared<TrigProduct>(true, amp, std::move(k), rate);
}
ExprPtr gaussian(double amp, double width, std::vector<double> center) {
  return std::make_shared<Gaussian>(amp, width, std::move(center));
}
ExprPtr time_linear(double rate) { return std::make_shared<TimeLinear>(rate); }
ExprPtr sum(std::vector<ExprPtr> terms) { return std::make_shared<Sum>(std::move(terms)); }

}  // namespace expr

double apply_form(Form form, double f, std::size_t node) {
  if (form == Form::Additive) return f;
  if (!(f > 0.0))
    throw FormViolation("exponential form requires f > 0 (node " + std::to_string(node) + ")", node);
  return std::log(f);
}

Sym3 scaled_identity(int n, double c) {
  Sym3 m;
  m.n = n;
  for (int i = 0; i < n; ++i) m.set(i, i, c);
  return m;
}

Sym3 diagonal(std::vector<double> d) {
  if (d.size() < 2 || d.size() > 3) throw std::invalid_argument("diagonal: dimension must be 2 or 3");
  Sym3 m;
  m.n = static_cast<int>(d.size());
  for (int i = 0; i < m.n; ++i) m.set(i, i, d[i]);
  return m;
}

AnalyticManufactured::AnalyticManufactured(OperatorSpec op, Form form, ExprPtr target, Sym3 chi)
    : op_(std::move(op)), form_(form), target_(std::move(target)), chi_(chi) {
  op_.validate();
  if (chi_.n != op_.n) throw std::invalid_argument("manufactured: chi dimension mismatch");
}

double AnalyticManufactured::value(const Point& x, double t) const {
  const Jet j = target_->jet(x, t);
  Sym3 U;
  U.n = op_.n;
  for (int a = 0; a < op_.n; ++a)
    for (int b = a; b < op_.n; ++b) U.set(a, b, j.hess[3 * a + b] + chi_(a, b));
  return lambda_value(op_, form_, U, 0) - j.dt;
}

void AnalyticManufactured::sample(const Grid& g, double t, std::span<double> out) const {
  parallel_for(g.size(), [&](std::size_t p) { out[p] = value(g.coords(p), t); });
}

void AnalyticManufactured::sample_dt(const Grid& g, double t, std::span<double> out) const {
  if (!time_dependent()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  time_difference(g, t, out, [&](double s, std::span<double> o) { sample(g, s, o); });
}

std::string AnalyticManufactured::describe() const {
  return "manufactured(" + op_.name() + ", " + target_->describe() + ")";
}

DiscreteManufactured::DiscreteManufactured(OperatorSpec op, Form form, ExprPtr target, Sym3 chi)
    : op_(std::move(op)), form_(form), target_(std::move(target)), chi_(chi) {
  op_.validate();
  if (chi_.n != op_.n) throw std::invalid_argument("manufactured: chi dimension mismatch");
}

void DiscreteManufactured::sample(const Grid& g, double t, std::span<double> out) const {
  if (g.n != op_.n) throw std::invalid_argument("manufactured: grid dimension mismatch");
  const auto u = target_->field(g, t);
  const auto U = hessian(u, SymTensorField::constant(g, chi_));
  std::vector<double> ut(g.size());
  target_->sample_dt(g, t, ut);
  parallel_for(g.size(), [&](std::size_t p) { out[p] = lambda_value(op_, form_, U.at(p), p) - ut[p]; });
}

void DiscreteManufactured::sample_dt(const Grid& g, double t, std::span<double> out) const {
  if (!time_dependent()) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  time_difference(g, t, out, [&](double s, std::span<double> o) { sample(g, s, o); });
}

std::string DiscreteManufactured::describe() const {
  return "discrete_manufactured(" + op_.name() + ", " + target_->describe() + ")";
}

}  // namespace hessflow
