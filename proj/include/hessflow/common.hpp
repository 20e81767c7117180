#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hessflow {

/// Raised when a point lies outside (or on the boundary of) the cone an
/// operator is defined on. Carries the measured relative margin.
class ConeViolation : public std::domain_error {
 public:
  ConeViolation(const std::string& what, double margin)
      : std::domain_error(what), margin_(margin) {}
  double margin() const { return margin_; }

 private:
  double margin_;
};

/// A user-chosen constant breaks a constraint the construction depends on.
class ConstraintViolation : public std::domain_error {
 public:
  ConstraintViolation(const std::string& what, double measured)
      : std::domain_error(what), measured_(measured) {}
  double measured() const { return measured_; }

 private:
  double measured_;
};

class InvalidConfiguration : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exponential-form evaluation hit f <= 0.
class FormViolation : public std::domain_error {
 public:
  FormViolation(const std::string& what, std::size_t node)
      : std::domain_error(what), node_(node) {}
  std::size_t node() const { return node_; }

 private:
  std::size_t node_;
};

/// Seeded random source. Distributions are built from raw 64-bit draws so
/// samples are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform direction on the unit sphere in R^n.
  std::vector<double> direction(int n);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

double norm2(std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);

}  // namespace hessflow
