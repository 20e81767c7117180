#pragma once

// Uniform grids on flat tori and boxes, finite-difference derivatives and
// per-node admissibility of the augmented Hessian.

#include <array>
#include <cstddef>
#include <vector>

#include "hessflow/linalg.hpp"
#include "hessflow/operators.hpp"

namespace hessflow {

enum class Topology { Periodic = 0, DirichletBox = 1 };

/// Row-major node numbering with x varying slowest: node = (i * ny + j) * nz + k.
struct Grid {
  int n = 2;
  std::array<int, 3> shape{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  Topology topology = Topology::Periodic;

  /// Periodic grid of `shape[a]` nodes over [origin, origin + length), h = L / N.
  static Grid periodic(std::vector<int> shape, std::vector<double> length,
                       std::vector<double> origin = {});
  /// Box grid including both faces, h = L / (N - 1).
  static Grid box(std::vector<int> shape, std::vector<double> length,
                  std::vector<double> origin = {});

  void validate() const;
  std::size_t size() const;
  std::size_t index(int i, int j, int k = 0) const;
  std::array<int, 3> multi_index(std::size_t node) const;
  std::array<double, 3> coords(std::size_t node) const;
  double length(int axis) const;
  bool is_boundary(std::size_t node) const;
  std::vector<std::size_t> boundary_nodes() const;
  std::vector<std::size_t> interior_nodes() const;
  /// Smallest spacing over the active axes.
  double h_min() const;
  bool operator==(const Grid&) const = default;
};

/// Packed upper triangle size.
constexpr int sym_size(int n) { return n * (n + 1) / 2; }
/// Packed position of (i, j), i <= j.
int sym_slot(int n, int i, int j);

struct ScalarField {
  Grid grid;
  std::vector<double> values;
  double time = 0.0;

  ScalarField() = default;
  explicit ScalarField(const Grid& g, double fill = 0.0, double t = 0.0)
      : grid(g), values(g.size(), fill), time(t) {}

  double& operator[](std::size_t node) { return values[node]; }
  double operator[](std::size_t node) const { return values[node]; }
  /// Throws invalid_argument on a size mismatch or a non-finite value.
  void validate() const;
};

/// n components per node.
struct VectorField {
  Grid grid;
  std::vector<double> values;

  VectorField() = default;
  explicit VectorField(const Grid& g) : grid(g), values(g.size() * g.n, 0.0) {}
  double operator()(std::size_t node, int a) const { return values[node * grid.n + a]; }
  double& operator()(std::size_t node, int a) { return values[node * grid.n + a]; }
};

/// Upper triangle stored once per node.
struct SymTensorField {
  Grid grid;
  std::vector<double> values;

  SymTensorField() = default;
  explicit SymTensorField(const Grid& g) : grid(g), values(g.size() * sym_size(g.n), 0.0) {}
  static SymTensorField constant(const Grid& g, const Sym3& m);

  Sym3 at(std::size_t node) const;
  void set(std::size_t node, const Sym3& m);
  double get(std::size_t node, int i, int j) const;
};

/// Second-order first derivatives; boundary nodes of a box use one-sided stencils.
VectorField gradient(const ScalarField& u);

/// D^2 u + chi. Diagonal entries use the 3-point second difference (4-point
/// one-sided on box faces); mixed entries compose first-derivative stencils,
/// which is the 4-corner cross in the interior.
SymTensorField hessian(const ScalarField& u, const SymTensorField& chi);
SymTensorField hessian(const ScalarField& u);

/// One second-derivative entry at one node, same stencils as hessian().
double second_derivative(const ScalarField& u, std::size_t node, int a, int b);

struct StencilTap {
  std::size_t node;
  double weight;
};

/// Taps of the (a, b) second-derivative stencil at `node`, spacing
/// included; at most 9. Returns the tap count.
int second_derivative_taps(const Grid& g, std::size_t node, int a, int b, StencilTap* out);

struct AdmissibilityReport {
  bool all_admissible = false;
  double min_margin = 0.0;
  std::size_t worst_node = 0;
  double eigen_min = 0.0;
  double eigen_max = 0.0;
};

/// Eigenvalues of U at every node checked against `cone`. A node counts as
/// admissible when its relative cone margin exceeds `margin`; min_margin is
/// reported relative to that threshold, so it is positive iff all nodes pass.
AdmissibilityReport admissibility_check(const SymTensorField& U, const ConeId& cone,
                                        double margin = 0.0);

/// Ascending eigenvalues per node, n per node.
std::vector<double> eigenvalue_field(const SymTensorField& U);

double max_abs(const ScalarField& u);

}  // namespace hessflow
