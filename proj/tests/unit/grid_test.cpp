#include "hessflow/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>

namespace hessflow {
namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

ScalarField sample(const Grid& g, const std::function<double(double, double, double)>& fn) {
  ScalarField u(g);
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.coords(p);
    u[p] = fn(x[0], x[1], x[2]);
  }
  return u;
}

TEST(Grid, SpacingAndIndexing) {
  const auto t = Grid::periodic({8, 4}, {kTwoPi, 1.0});
  EXPECT_DOUBLE_EQ(t.spacing[0], kTwoPi / 8);
  EXPECT_DOUBLE_EQ(t.spacing[1], 0.25);
  EXPECT_EQ(t.size(), 32u);
  EXPECT_TRUE(t.boundary_nodes().empty());
  EXPECT_EQ(t.index(2, 3), 11u);
  EXPECT_EQ(t.multi_index(11), (std::array<int, 3>{2, 3, 0}));

  const auto b = Grid::box({5, 6, 4}, {1.0, 1.0, 3.0}, {-1, 0, 0});
  EXPECT_DOUBLE_EQ(b.spacing[0], 0.25);
  EXPECT_DOUBLE_EQ(b.spacing[2], 1.0);
  EXPECT_DOUBLE_EQ(b.coords(b.index(4, 0, 0))[0], 0.0);
  EXPECT_EQ(b.interior_nodes().size(), 3u * 4u * 2u);
  EXPECT_EQ(b.boundary_nodes().size() + b.interior_nodes().size(), b.size());
  EXPECT_DOUBLE_EQ(b.length(2), 3.0);
}

TEST(Grid, RejectsInvalid) {
  EXPECT_THROW(Grid::periodic({3, 8}, {1, 1}), std::invalid_argument);
  EXPECT_THROW(Grid::box({8}, {1}), std::invalid_argument);
  EXPECT_THROW(Grid::box({8, 8}, {1, 0}), std::invalid_argument);
  EXPECT_THROW(Grid::box({8, 8}, {1}), std::invalid_argument);
}

TEST(SymTensorField, PackedStorageIsSymmetric) {
  EXPECT_EQ(sym_size(3), 6);
  EXPECT_EQ(sym_slot(3, 0, 2), 2);
  EXPECT_EQ(sym_slot(3, 2, 1), 4);
  EXPECT_EQ(sym_slot(3, 2, 2), 5);
  EXPECT_EQ(sym_slot(2, 1, 1), 2);
  SymTensorField f(Grid::periodic({4, 4, 4}, {1, 1, 1}));
  EXPECT_EQ(f.values.size(), 64u * 6u);
  Sym3 m;
  m.n = 3;
  m.set(0, 1, 7.0);
  m.set(2, 0, -1.0);
  f.set(5, m);
  EXPECT_EQ(f.at(5)(1, 0), 7.0);
  EXPECT_EQ(f.get(5, 0, 2), -1.0);
}

TEST(ScalarField, ValidateFindsNonFinite) {
  ScalarField u(Grid::periodic({4, 4}, {1, 1}));
  EXPECT_NO_THROW(u.validate());
  u[3] = NAN;
  EXPECT_THROW(u.validate(), std::invalid_argument);
}

TEST(Gradient, ConstantAndLinear) {
  const auto b = Grid::box({6, 7}, {1.0, 2.0});
  const auto c = gradient(ScalarField(b, 3.0));
  for (double v : c.values) EXPECT_EQ(v, 0.0);
  const auto g = gradient(sample(b, [](double x, double, double) { return x; }));
  for (std::size_t p = 0; p < b.size(); ++p) {
    EXPECT_NEAR(g(p, 0), 1.0, 1e-13);
    EXPECT_NEAR(g(p, 1), 0.0, 1e-13);
  }
}

TEST(Gradient, SineOnTorusIsSecondOrder) {
  const auto t = Grid::periodic({64, 8}, {kTwoPi, 1.0});
  const auto g = gradient(sample(t, [](double x, double, double) { return std::sin(x); }));
  double err = 0;
  for (std::size_t p = 0; p < t.size(); ++p)
    err = std::max(err, std::abs(g(p, 0) - std::cos(t.coords(p)[0])));
  const double h = t.spacing[0];
  // Leading term h^2/6 |u'''|.
  EXPECT_LT(err, h * h / 6 * 1.01);
  EXPECT_GT(err, h * h / 6 * 0.9);
}

TEST(Hessian, QuadraticExactEverywhere) {
  for (const auto& g : {Grid::box({7, 9}, {1.3, 0.7}, {-0.5, 0.2}),
                        Grid::box({5, 6, 7}, {1.0, 2.0, 0.5}, {0.1, -1.0, 0.3})}) {
    const double a[3][3] = {{1.5, -0.3, 0.7}, {-0.3, 2.0, 0.25}, {0.7, 0.25, -0.4}};
    const auto u = sample(g, [&](double x, double y, double z) {
      const double v[3] = {x, y, z};
      double s = 0.3 * x - y + 2;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s += 0.5 * a[i][j] * v[i] * v[j];
      return s;
    });
    const auto H = hessian(u);
    for (std::size_t p = 0; p < g.size(); ++p)
      for (int i = 0; i < g.n; ++i)
        for (int j = i; j < g.n; ++j) EXPECT_NEAR(H.get(p, i, j), a[i][j], 1e-10);
  }
}

TEST(Hessian, Examples) {
  const auto b = Grid::box({8, 8}, {2.0, 2.0}, {-1, -1});
  const auto id = hessian(sample(b, [](double x, double y, double) { return 0.5 * (x * x + y * y); }));
  const auto xy = hessian(sample(b, [](double x, double y, double) { return x * y; }));
  for (std::size_t p : b.interior_nodes()) {
    EXPECT_NEAR(id.get(p, 0, 0), 1.0, 1e-12);
    EXPECT_NEAR(id.get(p, 1, 1), 1.0, 1e-12);
    EXPECT_NEAR(id.get(p, 0, 1), 0.0, 1e-12);
    EXPECT_NEAR(xy.get(p, 0, 1), 1.0, 1e-12);
    EXPECT_NEAR(xy.get(p, 0, 0), 0.0, 1e-12);
  }
}

TEST(Hessian, ManufacturedTorusEigenvalues) {
  const auto t = Grid::periodic({32, 32}, {kTwoPi, kTwoPi});
  Sym3 two;
  two.n = 2;
  two.set(0, 0, 2.0);
  two.set(1, 1, 2.0);
  const auto U = hessian(sample(t, [](double x, double y, double) { return 0.1 * std::sin(x) * std::sin(y); }),
                         SymTensorField::constant(t, two));
  const auto eig = eigenvalue_field(U);
  const double h = t.spacing[0];
  for (std::size_t p = 0; p < t.size(); ++p) {
    const auto x = t.coords(p);
    const double s = std::sin(x[0]) * std::sin(x[1]), c = std::cos(x[0]) * std::cos(x[1]);
    // Analytic eigenvalues of 2I + 0.1 [[-s, c], [c, -s]].
    const double lo = 2 - 0.1 * s - 0.1 * std::abs(c), hi = 2 - 0.1 * s + 0.1 * std::abs(c);
    EXPECT_NEAR(eig[2 * p], lo, 0.1 * h * h);
    EXPECT_NEAR(eig[2 * p + 1], hi, 0.1 * h * h);
    EXPECT_GT(eig[2 * p], 1.79);
    EXPECT_LT(eig[2 * p + 1], 2.21);
  }
  EXPECT_TRUE(admissibility_check(U, ConeId::gamma_k(2, 2)).all_admissible);
}

double sin_product_hessian_error(int N, Topology topo) {
  const double L = topo == Topology::Periodic ? kTwoPi : 2.0;
  const auto g = topo == Topology::Periodic ? Grid::periodic({N, N}, {L, L})
                                            : Grid::box({N + 1, N + 1}, {L, L}, {0.3, 0.1});
  const auto H = hessian(sample(g, [](double x, double y, double) { return std::sin(x) * std::sin(y); }));
  double err = 0;
  for (std::size_t p = 0; p < g.size(); ++p) {
    const auto x = g.coords(p);
    const double s = std::sin(x[0]) * std::sin(x[1]), c = std::cos(x[0]) * std::cos(x[1]);
    err = std::max({err, std::abs(H.get(p, 0, 0) + s), std::abs(H.get(p, 1, 1) + s),
                    std::abs(H.get(p, 0, 1) - c)});
  }
  return err;
}

TEST(Hessian, SecondOrderConvergence) {
  for (auto topo : {Topology::Periodic, Topology::DirichletBox}) {
    const double e1 = sin_product_hessian_error(32, topo);
    const double e2 = sin_product_hessian_error(64, topo);
    const double e3 = sin_product_hessian_error(128, topo);
    EXPECT_GE(e1 / e2, 3.6);
    EXPECT_LE(e1 / e2, 4.4);
    EXPECT_GE(e2 / e3, 3.6);
    EXPECT_LE(e2 / e3, 4.4);
  }
}

TEST(Hessian, RejectsGridMismatch) {
  EXPECT_THROW(hessian(ScalarField(Grid::periodic({4, 4}, {1, 1})),
                       SymTensorField(Grid::periodic({5, 4}, {1, 1}))),
               std::invalid_argument);
}

TEST(Admissibility, Examples) {
  const auto g = Grid::periodic({4, 5}, {1, 1});
  Sym3 id;
  id.n = 2;
  id.set(0, 0, 1);
  id.set(1, 1, 1);
  auto U = SymTensorField::constant(g, id);
  for (int k = 1; k <= 2; ++k) {
    const auto r = admissibility_check(U, ConeId::gamma_k(k, 2));
    EXPECT_TRUE(r.all_admissible);
    EXPECT_GT(r.min_margin, 0.0);
    EXPECT_EQ(r.eigen_min, 1.0);
  }
  Sym3 bad;
  bad.n = 2;
  bad.set(0, 0, -1);
  bad.set(1, 1, 0.1);
  U.set(7, bad);
  const auto r = admissibility_check(U, ConeId::gamma_k(2, 2));
  EXPECT_FALSE(r.all_admissible);
  EXPECT_LE(r.min_margin, 0.0);
  EXPECT_EQ(r.worst_node, 7u);
  EXPECT_EQ(r.eigen_min, -1.0);
  EXPECT_EQ(r.eigen_max, 1.0);
  EXPECT_THROW(admissibility_check(U, ConeId::gamma_k(2, 3)), std::invalid_argument);
}

}  // namespace
}  // namespace hessflow
