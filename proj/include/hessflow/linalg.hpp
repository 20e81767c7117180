#pragma once

#include <array>
#include <span>
#include <vector>

namespace hessflow {

/// Square matrix with row-major dense storage; used for operator Hessians
/// whose dimension is not bounded.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<double> data() { return a_; }
  std::span<const double> data() const { return a_; }

  double frobenius() const;
  std::vector<double> apply(std::span<const double> x) const;

 private:
  int n_ = 0;
  std::vector<double> a_;
};

/// Symmetric matrix of dimension 2 or 3, the per-node type on grids.
struct Sym3 {
  int n = 0;
  std::array<double, 9> a{};

  double operator()(int i, int j) const { return a[3 * i + j]; }
  void set(int i, int j, double v) {
    a[3 * i + j] = v;
    a[3 * j + i] = v;
  }
};

/// Ascending eigenvalues with matching orthonormal eigenvectors;
/// vectors[3 * i + k] is component i of eigenvector k.
struct Eigen3 {
  int n = 0;
  std::array<double, 3> values{};
  std::array<double, 9> vectors{};
};

/// Symmetric eigen-decomposition for n in {2, 3}: closed form for n = 2,
/// cyclic Jacobi for n = 3. Throws std::invalid_argument on non-finite
/// entries or unsupported dimension.
Eigen3 eigen_sym(const Sym3& m);

/// Cyclic Jacobi on a dense symmetric n x n matrix stored row-major in `a`
/// (destroyed). Stops when the off-diagonal Frobenius mass drops below
/// 1e-13 |m| or after 32 sweeps. Outputs are sorted ascending. `vectors`
/// may be empty when eigenvectors are not wanted.
void jacobi_eigen(std::span<double> a, int n, std::span<double> values,
                  std::span<double> vectors);

std::vector<double> symmetric_eigenvalues(const Matrix& m);

}  // namespace hessflow
