#include "hessflow/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "hessflow/parallel.hpp"

namespace hessflow {

namespace {

Grid make_grid(Topology topo, const std::vector<int>& shape, const std::vector<double>& length,
               const std::vector<double>& origin) {
  const int n = static_cast<int>(shape.size());
  if (n < 2 || n > 3) throw std::invalid_argument("Grid: dimension must be 2 or 3");
  if (length.size() != shape.size())
    throw std::invalid_argument("Grid: one length per axis required");
  if (!origin.empty() && origin.size() != shape.size())
    throw std::invalid_argument("Grid: one origin coordinate per axis required");
  Grid g;
  g.n = n;
  g.topology = topo;
  for (int a = 0; a < n; ++a) {
    if (shape[a] < 4) throw std::invalid_argument("Grid: every extent must be >= 4");
    if (!(length[a] > 0.0) || !std::isfinite(length[a]))
      throw std::invalid_argument("Grid: lengths must be positive");
    g.shape[a] = shape[a];
    g.spacing[a] = topo == Topology::Periodic ? length[a] / shape[a] : length[a] / (shape[a] - 1);
    g.origin[a] = origin.empty() ? 0.0 : origin[a];
  }
  return g;
}

struct Tap {
  int offset;
  double weight;
};

// First-derivative stencil along one axis at position i; weights exclude 1/h.
int first_taps(const Grid& g, int axis, int i, Tap* out) {
  const int N = g.shape[axis];
  if (g.topology == Topology::DirichletBox) {
    if (i == 0) {
      out[0] = {0, -1.5};
      out[1] = {1, 2.0};
      out[2] = {2, -0.5};
      return 3;
    }
    if (i == N - 1) {
      out[0] = {0, 1.5};
      out[1] = {-1, -2.0};
      out[2] = {-2, 0.5};
      return 3;
    }
  }
  out[0] = {1, 0.5};
  out[1] = {-1, -0.5};
  return 2;
}

// Second-derivative stencil; weights exclude 1/h^2.
int second_taps(const Grid& g, int axis, int i, Tap* out) {
  const int N = g.shape[axis];
  if (g.topology == Topology::DirichletBox && (i == 0 || i == N - 1)) {
    const int s = i == 0 ? 1 : -1;
    out[0] = {0, 2.0};
    out[1] = {s, -5.0};
    out[2] = {2 * s, 4.0};
    out[3] = {3 * s, -1.0};
    return 4;
  }
  out[0] = {-1, 1.0};
  out[1] = {0, -2.0};
  out[2] = {1, 1.0};
  return 3;
}

std::size_t shifted(const Grid& g, std::array<int, 3> idx, int axis, int offset) {
  int v = idx[axis] + offset;
  if (g.topology == Topology::Periodic) {
    const int N = g.shape[axis];
    v = ((v % N) + N) % N;
  }
  idx[axis] = v;
  return g.index(idx[0], idx[1], idx[2]);
}

double first_at(const ScalarField& u, const std::array<int, 3>& idx, int a) {
  const Grid& g = u.grid;
  Tap t[3];
  const int m = first_taps(g, a, idx[a], t);
  double s = 0.0;
  for (int p = 0; p < m; ++p) s += t[p].weight * u.values[shifted(g, idx, a, t[p].offset)];
  return s / g.spacing[a];
}

int taps_at(const Grid& g, const std::array<int, 3>& idx, int a, int b, StencilTap* out) {
  if (a == b) {
    Tap t[4];
    const int m = second_taps(g, a, idx[a], t);
    const double scale = 1.0 / (g.spacing[a] * g.spacing[a]);
    for (int p = 0; p < m; ++p) out[p] = {shifted(g, idx, a, t[p].offset), t[p].weight * scale};
    return m;
  }
  Tap ta[3], tb[3];
  const int ma = first_taps(g, a, idx[a], ta);
  const int mb = first_taps(g, b, idx[b], tb);
  const double scale = 1.0 / (g.spacing[a] * g.spacing[b]);
  int count = 0;
  for (int p = 0; p < ma; ++p) {
    auto moved = idx;
    int v = idx[a] + ta[p].offset;
    if (g.topology == Topology::Periodic) v = ((v % g.shape[a]) + g.shape[a]) % g.shape[a];
    moved[a] = v;
    for (int q = 0; q < mb; ++q)
      out[count++] = {shifted(g, moved, b, tb[q].offset), ta[p].weight * tb[q].weight * scale};
  }
  return count;
}

double second_at(const ScalarField& u, const std::array<int, 3>& idx, int a, int b) {
  StencilTap taps[9];
  const int m = taps_at(u.grid, idx, a, b, taps);
  double s = 0.0;
  for (int p = 0; p < m; ++p) s += taps[p].weight * u.values[taps[p].node];
  return s;
}

void require_same_grid(const Grid& a, const Grid& b, const char* who) {
  if (!(a == b)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

}  // namespace

Grid Grid::periodic(std::vector<int> shape, std::vector<double> length, std::vector<double> origin) {
  return make_grid(Topology::Periodic, shape, length, origin);
}

Grid Grid::box(std::vector<int> shape, std::vector<double> length, std::vector<double> origin) {
  return make_grid(Topology::DirichletBox, shape, length, origin);
}

void Grid::validate() const {
  if (n < 2 || n > 3) throw std::invalid_argument("Grid: dimension must be 2 or 3");
  for (int a = 0; a < n; ++a) {
    if (shape[a] < 4) throw std::invalid_argument("Grid: every extent must be >= 4");
    if (!(spacing[a] > 0.0)) throw std::invalid_argument("Grid: spacing must be positive");
  }
  for (int a = n; a < 3; ++a)
    if (shape[a] != 1) throw std::invalid_argument("Grid: unused axes must have extent 1");
}

std::size_t Grid::size() const {
  return static_cast<std::size_t>(shape[0]) * shape[1] * shape[2];
}

std::size_t Grid::index(int i, int j, int k) const {
  return (static_cast<std::size_t>(i) * shape[1] + j) * shape[2] + k;
}

std::array<int, 3> Grid::multi_index(std::size_t node) const {
  const int k = static_cast<int>(node % shape[2]);
  node /= shape[2];
  const int j = static_cast<int>(node % shape[1]);
  return {static_cast<int>(node / shape[1]), j, k};
}

std::array<double, 3> Grid::coords(std::size_t node) const {
  const auto idx = multi_index(node);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) x[a] = origin[a] + idx[a] * spacing[a];
  return x;
}

double Grid::length(int axis) const {
  return topology == Topology::Periodic ? shape[axis] * spacing[axis]
                                        : (shape[axis] - 1) * spacing[axis];
}

bool Grid::is_boundary(std::size_t node) const {
  if (topology == Topology::Periodic) return false;
  const auto idx = multi_index(node);
  for (int a = 0; a < n; ++a)
    if (idx[a] == 0 || idx[a] == shape[a] - 1) return true;
  return false;
}

std::vector<std::size_t> Grid::boundary_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < size(); ++p)
    if (is_boundary(p)) out.push_back(p);
  return out;
}

std::vector<std::size_t> Grid::interior_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < size(); ++p)
    if (!is_boundary(p)) out.push_back(p);
  return out;
}

double Grid::h_min() const { return *std::min_element(spacing.begin(), spacing.begin() + n); }

int sym_slot(int n, int i, int j) {
  if (i > j) std::swap(i, j);
  return i * n - i * (i - 1) / 2 + (j - i);
}

void ScalarField::validate() const {
  if (values.size() != grid.size())
    throw std::invalid_argument("ScalarField: value count does not match node count");
  for (std::size_t p = 0; p < values.size(); ++p)
    if (!std::isfinite(values[p]))
      throw std::invalid_argument("ScalarField: non-finite value at node " + std::to_string(p));
}

SymTensorField SymTensorField::constant(const Grid& g, const Sym3& m) {
  SymTensorField f(g);
  for (std::size_t p = 0; p < g.size(); ++p) f.set(p, m);
  return f;
}

Sym3 SymTensorField::at(std::size_t node) const {
  const int n = grid.n;
  const double* v = values.data() + node * sym_size(n);
  Sym3 m;
  m.n = n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) m.set(i, j, v[sym_slot(n, i, j)]);
  return m;
}

void SymTensorField::set(std::size_t node, const Sym3& m) {
  const int n = grid.n;
  double* v = values.data() + node * sym_size(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) v[sym_slot(n, i, j)] = m(i, j);
}

double SymTensorField::get(std::size_t node, int i, int j) const {
  return values[node * sym_size(grid.n) + sym_slot(grid.n, i, j)];
}

VectorField gradient(const ScalarField& u) {
  VectorField out(u.grid);
  const int n = u.grid.n;
  parallel_for(u.grid.size(), [&](std::size_t p) {
    const auto idx = u.grid.multi_index(p);
    for (int a = 0; a < n; ++a) out(p, a) = first_at(u, idx, a);
  });
  return out;
}

double second_derivative(const ScalarField& u, std::size_t node, int a, int b) {
  return second_at(u, u.grid.multi_index(node), a, b);
}

int second_derivative_taps(const Grid& g, std::size_t node, int a, int b, StencilTap* out) {
  return taps_at(g, g.multi_index(node), a, b, out);
}

SymTensorField hessian(const ScalarField& u, const SymTensorField& chi) {
  require_same_grid(u.grid, chi.grid, "hessian");
  const Grid& g = u.grid;
  SymTensorField out(g);
  const int n = g.n;
  const int m = sym_size(n);
  const std::array<long, 3> stride{static_cast<long>(g.shape[1]) * g.shape[2], g.shape[2], 1};
  const double* v = u.values.data();
  parallel_for(g.size(), [&](std::size_t p) {
    const auto idx = g.multi_index(p);
    double* o = out.values.data() + p * m;
    const double* c = chi.values.data() + p * m;
    if (g.is_boundary(p)) {
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) o[sym_slot(n, i, j)] = second_at(u, idx, i, j) + c[sym_slot(n, i, j)];
      return;
    }
    // Central stencils; offsets wrap on a torus.
    long plus[3], minus[3];
    for (int a = 0; a < n; ++a) {
      const int N = g.shape[a];
      plus[a] = idx[a] + 1 == N ? -(N - 1) * stride[a] : stride[a];
      minus[a] = idx[a] == 0 ? (N - 1) * stride[a] : -stride[a];
    }
    const long q = static_cast<long>(p);
    int slot = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++slot) {
        double d;
        if (i == j) {
          d = (v[q + plus[i]] - 2.0 * v[q] + v[q + minus[i]]) / (g.spacing[i] * g.spacing[i]);
        } else {
          d = (v[q + plus[i] + plus[j]] - v[q + plus[i] + minus[j]] - v[q + minus[i] + plus[j]] +
               v[q + minus[i] + minus[j]]) /
              (4.0 * g.spacing[i] * g.spacing[j]);
        }
        o[slot] = d + c[slot];
      }
  });
  return out;
}

SymTensorField hessian(const ScalarField& u) { return hessian(u, SymTensorField(u.grid)); }

std::vector<double> eigenvalue_field(const SymTensorField& U) {
  const int n = U.grid.n;
  std::vector<double> out(U.grid.size() * n);
  parallel_for(U.grid.size(), [&](std::size_t p) {
    const auto e = eigen_sym(U.at(p));
    for (int i = 0; i < n; ++i) out[p * n + i] = e.values[i];
  });
  return out;
}

AdmissibilityReport admissibility_check(const SymTensorField& U, const ConeId& cone,
                                        double margin) {
  if (cone.n != U.grid.n) throw std::invalid_argument("admissibility_check: cone dimension mismatch");
  if (margin < 0.0) throw std::invalid_argument("admissibility_check: margin must be >= 0");
  const int n = U.grid.n;
  const auto eig = eigenvalue_field(U);
  std::vector<double> margins(U.grid.size());
  parallel_for(U.grid.size(), [&](std::size_t p) {
    margins[p] = cone_margin(cone, std::span<const double>(eig.data() + p * n, n)) - margin;
  });
  AdmissibilityReport r;
  r.min_margin = std::numeric_limits<double>::infinity();
  r.eigen_min = std::numeric_limits<double>::infinity();
  r.eigen_max = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < margins.size(); ++p) {
    if (margins[p] < r.min_margin) {
      r.min_margin = margins[p];
      r.worst_node = p;
    }
    r.eigen_min = std::min(r.eigen_min, eig[p * n]);
    r.eigen_max = std::max(r.eigen_max, eig[p * n + n - 1]);
  }
  r.all_admissible = r.min_margin > 0.0;
  return r;
}

double max_abs(const ScalarField& u) {
  double m = 0.0;
  for (double v : u.values) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace hessflow
