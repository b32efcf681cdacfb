#include <doctest.h>

#include <random>

#include "charlap/errors.hpp"
#include "charlap/exterior.hpp"

using namespace charlap;

namespace {

Form random_form(std::mt19937& rng, const Coframe& cf, int grade, const Chart& chart) {
  std::uniform_int_distribution<int> small(-3, 3);
  std::uniform_int_distribution<int> coord(0, chart.real_dim() - 1);
  Form f(cf);
  for (unsigned m : lam::masks_of_grade(cf.dim, grade)) {
    Expr c = Expr(Rational(small(rng), 2)) + Expr(Rational(small(rng))) * Expr::coord(coord(rng)) *
                                                 Expr::coord(coord(rng));
    f.add(m, CExpr(c));
  }
  return f;
}

RMat random_spd(std::mt19937& rng, int n) {
  std::normal_distribution<double> g;
  RMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng);
  return a * a.transpose() + RMat::Identity(n, n);
}

}  // namespace

TEST_CASE("wedge basics") {
  const Chart c = Chart::real({"p", "q", "t"});
  const Coframe cf = Coframe::coordinate(c);
  Form a(cf);
  a.add(1, CExpr(Expr::coord(1)));
  a.add(4, CExpr(1));
  CHECK(wedge(a, a).is_zero_structural());
  Form e1 = Form::basis(cf, {0}), e2 = Form::basis(cf, {1});
  CHECK(wedge(e1, e2) == -wedge(e2, e1));
  // (dt - q/2 dp + p/2 dq) ∧ dp = dt∧dp + p/2 dq∧dp
  Form theta(cf);
  theta.add(4, CExpr(1));
  theta.add(1, CExpr(parse_expr("-q/2", c)));
  theta.add(2, CExpr(parse_expr("p/2", c)));
  Form expect = Form::basis(cf, {2, 0}) + Form::basis(cf, {1, 0}, CExpr(parse_expr("p/2", c)));
  CHECK(wedge(theta, e1) == expect);
  Form other(Coframe::frame("alpha", 3));
  CHECK_THROWS_AS(wedge(e1, other), CoframeMismatch);
}

TEST_CASE("interior product") {
  const Coframe cf = Coframe::frame("e", 2);
  Form e12 = Form::basis(cf, {0, 1});
  CHECK(interior({CExpr(1), CExpr()}, e12) == Form::basis(cf, {1}));
  CHECK(interior({CExpr(1), CExpr(1)}, Form::scalar(cf, CExpr(5))).is_zero_structural());
}

TEST_CASE("wedge associativity, graded commutativity and the antiderivation rule") {
  const Chart c = Chart::real({"x", "y", "z", "w"});
  const Coframe cf = Coframe::coordinate(c);
  std::mt19937 rng(3);
  for (int trial = 0; trial < 15; ++trial) {
    const int ga = trial % 2 + 1, gb = trial % 3, gc = 1;
    Form a = random_form(rng, cf, ga, c), b = random_form(rng, cf, gb, c),
         d = random_form(rng, cf, gc, c);
    CHECK(wedge(wedge(a, b), d) == wedge(a, wedge(b, d)));
    Form ab = wedge(a, b), ba = wedge(b, a);
    CHECK(((ga * gb) % 2 ? ab + ba : ab - ba).is_zero_structural());
    std::vector<CExpr> v{CExpr(parse_expr("x", c)), CExpr(1), CExpr(), CExpr(parse_expr("y^2", c))};
    Form lhs = interior(v, ab);
    Form rhs = wedge(interior(v, a), b) + (ga % 2 ? -wedge(a, interior(v, b)) : wedge(a, interior(v, b)));
    CHECK((lhs - rhs).is_zero_structural());
  }
}

TEST_CASE("interior and exterior multiplication anticommute to |xi|^2") {
  std::mt19937 rng(9);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    RMat gram = random_spd(rng, n);
    CVec xi(n);
    for (int i = 0; i < n; ++i) xi[i] = cd(g(rng), g(rng));
    // ξ* has components gram * conj(ξ) along the dual frame
    CVec sharp = gram.cast<cd>() * xi.conjugate();
    CMat lhs = lam::interior_matrix(sharp) * lam::wedge_matrix(xi) +
               lam::wedge_matrix(xi) * lam::interior_matrix(sharp);
    const cd norm2 = xi.conjugate().dot(gram.cast<cd>() * xi.conjugate()).real();
    CHECK((lhs - norm2 * CMat::Identity(lhs.rows(), lhs.cols())).norm() < 1e-10 * (1 + lhs.norm()));
  }
}

TEST_CASE("adjunction of wedge and interior at random fibers") {
  std::mt19937 rng(21);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 5;
    MetricFiber m{random_spd(rng, n), 1};
    const CMat M = m.lambda_gram();
    CVec xi(n), a(1 << n), b(1 << n);
    for (int i = 0; i < n; ++i) xi[i] = cd(g(rng), g(rng));
    for (int i = 0; i < (1 << n); ++i) {
      a[i] = cd(g(rng), g(rng));
      b[i] = cd(g(rng), g(rng));
    }
    CVec sharp = m.gram.cast<cd>() * xi.conjugate();
    // <u, v> = v^H M u
    const cd lhs = b.dot(M * (lam::wedge_matrix(xi) * a));
    const cd rhs = (lam::interior_matrix(sharp) * b).dot(M * a);
    CHECK(std::abs(lhs - rhs) < 1e-10 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("Hodge star on flat R3") {
  const Chart c = Chart::real({"x", "y", "z"});
  const Coframe cf = Coframe::coordinate(c);
  const MetricFiber m = MetricFiber::euclidean(3);
  CHECK(hodge_star(Form::scalar(cf, CExpr(1)), m) == Form::basis(cf, {0, 1, 2}));
  CHECK(hodge_star(Form::basis(cf, {0, 1, 2}), m) == Form::scalar(cf, CExpr(1)));
  CHECK(hodge_star(Form::basis(cf, {0}), m) == Form::basis(cf, {1, 2}));
}

TEST_CASE("Hodge star sign law and a ∧ ⋆a = |a|^2 dvol") {
  std::mt19937 rng(33);
  std::normal_distribution<double> g;
  for (int n = 2; n <= 6; ++n) {
    for (int rep = 0; rep < 3; ++rep) {
      MetricFiber m{random_spd(rng, n), 1};
      const CMat s = hodge_star_matrix(m);
      const CMat ss = s * s;
      for (unsigned k = 0; k < (1u << n); ++k) {
        const int p = lam::grade(k);
        const double sign = (p * (n - p)) % 2 ? -1.0 : 1.0;
        for (unsigned j = 0; j < (1u << n); ++j)
          CHECK(std::abs(ss(j, k) - (j == k ? sign : 0.0)) < 1e-9);
      }
      const int p = rep % (n + 1);
      CVec a = CVec::Zero(1 << n);
      for (unsigned mask : lam::masks_of_grade(n, p)) a[mask] = g(rng);
      const CVec star = s * a;
      // top coefficient of a ∧ ⋆a
      cd top = 0.0;
      const unsigned full = (1u << n) - 1u;
      for (unsigned mask : lam::masks_of_grade(n, p))
        top += double(lam::complement_sign(mask, n)) * a[mask] * star[full ^ mask];
      const cd norm2 = a.transpose() * m.lambda_gram() * a;
      CHECK(std::abs(top - norm2 * m.volume_coefficient()) < 1e-10 * (1 + std::abs(top)));
    }
  }
  MetricFiber bad{RMat::Zero(2, 2), 1};
  CHECK_THROWS_AS(hodge_star_matrix(bad), DegenerateMetric);
}

TEST_CASE("bidegree split") {
  const Chart c = Chart::complex({"z"});
  const Coframe cc = Coframe::complex_coordinate(c);
  auto s1 = bidegree_split(Form::basis(cc, {0, 1}));
  CHECK(s1.size() == 1);
  CHECK(s1.at({1, 1}) == Form::basis(cc, {0, 1}));
  const Coframe real = Coframe::coordinate(c);
  auto s2 = bidegree_split(Form::basis(real, {0, 1}));
  CHECK(s2.size() == 1);
  Form expect(s2.at({1, 1}).coframe());
  expect.add(3, CExpr(Expr(), Expr(Rational(1, 2))));
  CHECK(s2.at({1, 1}) == expect);
  auto s3 = bidegree_split(Form::scalar(cc, CExpr(parse_cexpr("z", c))));
  CHECK(s3.at({0, 0}) == Form::scalar(cc, CExpr(parse_cexpr("z", c))));
  const Chart r = Chart::real({"x"});
  CHECK_THROWS_AS(bidegree_split(Form::basis(Coframe::coordinate(r), {0})), NotComplexScenario);
}

TEST_CASE("split parts reconstruct random complex forms") {
  const Chart c = Chart::complex({"z", "w"});
  const Coframe cc = Coframe::complex_coordinate(c);
  std::mt19937 rng(4);
  for (int k = 0; k <= 4; ++k) {
    Form a = random_form(rng, cc, k, c);
    Form sum(cc);
    for (const auto& [pq, part] : bidegree_split(a)) {
      CHECK(pq.first + pq.second == k);
      sum += part;
    }
    CHECK(sum == a);
  }
}

TEST_CASE("coordinate d squares to zero") {
  const Chart c = Chart::complex({"z", "w"});
  const Coframe cc = Coframe::complex_coordinate(c);
  std::mt19937 rng(8);
  for (int k = 0; k <= 2; ++k) {
    Form a = random_form(rng, cc, k, c);
    CHECK(coordinate_d(coordinate_d(a, c), c).is_zero() == Tri::Yes);
  }
  Form f = Form::scalar(cc, parse_cexpr("z*conj(z)", c));
  CHECK(coordinate_d(f, c) ==
        Form::basis(cc, {0}, parse_cexpr("conj(z)", c)) + Form::basis(cc, {2}, parse_cexpr("z", c)));
}

TEST_CASE("compound of jets matches numeric compound at the base point") {
  auto sp = JetSpace::get(2, 2);
  JetMat a(sp, 3, 3);
  std::mt19937 rng(1);
  std::normal_distribution<double> g;
  for (int m = 0; m < sp->size(); ++m)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a[m](i, j) = cd(g(rng), g(rng));
  JetMat c = lam::compound(a);
  CHECK((c.value() - lam::compound(a.value())).norm() < 1e-12);
  // derivative: finite difference along variable 0 at first order
  const double h = 1e-6;
  CMat shifted = a.value() + h * a[sp->variable_index(0)];
  CMat fd = (lam::compound(shifted) - lam::compound(a.value())) / h;
  CHECK((fd - c[sp->variable_index(0)]).norm() < 1e-4);
}
