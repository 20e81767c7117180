#include "hessflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hessflow {

double Matrix::frobenius() const {
  double s = 0.0;
  for (double x : a_) s += x * x;
  return std::sqrt(s);
}

std::vector<double> Matrix::apply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) y[i] += (*this)(i, j) * x[j];
  return y;
}

namespace {

void sort_ascending(int n, std::span<double> values, std::span<double> vectors) {
  std::array<int, 64> order_buf{};
  std::vector<int> order_dyn;
  int* order = order_buf.data();
  if (n > 64) {
    order_dyn.resize(n);
    order = order_dyn.data();
  }
  std::iota(order, order + n, 0);
  std::stable_sort(order, order + n, [&](int a, int b) { return values[a] < values[b]; });

  std::vector<double> v(values.begin(), values.begin() + n);
  for (int k = 0; k < n; ++k) values[k] = v[order[k]];
  if (vectors.empty()) return;
  std::vector<double> p(vectors.begin(), vectors.begin() + static_cast<std::ptrdiff_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) vectors[i * n + k] = p[i * n + order[k]];
}

}  // namespace

void jacobi_eigen(std::span<double> a, int n, std::span<double> values,
                  std::span<double> vectors) {
  const bool want_vectors = !vectors.empty();
  if (want_vectors) {
    std::fill(vectors.begin(), vectors.begin() + static_cast<std::ptrdiff_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) vectors[i * n + i] = 1.0;
  }
  double total = 0.0;
  for (int i = 0; i < n * n; ++i) total += a[i] * a[i];
  total = std::sqrt(total);

  for (int sweep = 0; sweep < 32 && total > 0.0; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) off += a[i * n + j] * a[i * n + j];
    if (std::sqrt(off) < 1e-13 * total) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        if (want_vectors) {
          for (int k = 0; k < n; ++k) {
            const double vkp = vectors[k * n + p];
            const double vkq = vectors[k * n + q];
            vectors[k * n + p] = c * vkp - s * vkq;
            vectors[k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) values[i] = a[i * n + i];
  sort_ascending(n, values, vectors);
}

Eigen3 eigen_sym(const Sym3& m) {
  if (m.n != 2 && m.n != 3) throw std::invalid_argument("eigen_sym: dimension must be 2 or 3");
  for (int i = 0; i < m.n; ++i)
    for (int j = 0; j < m.n; ++j)
      if (!std::isfinite(m(i, j))) throw std::invalid_argument("eigen_sym: non-finite entry");

  Eigen3 out;
  out.n = m.n;
  if (m.n == 2) {
    const double a = m(0, 0), b = m(0, 1), d = m(1, 1);
    const double mean = 0.5 * (a + d);
    const double r = std::hypot(0.5 * (a - d), b);
    out.values[0] = mean - r;
    out.values[1] = mean + r;
    if (r == 0.0) {
      out.vectors = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
      return out;
    }
    // Eigenvector of the smaller eigenvalue from whichever row is better
    // conditioned.
    double x1 = b, y1 = out.values[0] - a;
    const double x2 = out.values[0] - d, y2 = b;
    if (std::hypot(x2, y2) > std::hypot(x1, y1)) {
      x1 = x2;
      y1 = y2;
    }
    const double len = std::hypot(x1, y1);
    x1 /= len;
    y1 /= len;
    // vectors[3*i + k]: component i of eigenvector k.
    out.vectors = {x1, -y1, 0.0, y1, x1, 0.0, 0.0, 0.0, 0.0};
    return out;
  }

  std::array<double, 9> work = m.a;
  std::array<double, 3> values{};
  std::array<double, 9> vectors{};
  jacobi_eigen(work, 3, values, vectors);
  out.values = values;
  out.vectors = vectors;
  return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  std::vector<double> work(m.data().begin(), m.data().end());
  std::vector<double> values(m.dim());
  jacobi_eigen(work, m.dim(), values, {});
  return values;
}

}  // namespace hessflow
