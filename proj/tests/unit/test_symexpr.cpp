#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "charlap/errors.hpp"
#include "charlap/symexpr.hpp"

using namespace charlap;

namespace {

Chart chart3() { return Chart::real({"x", "u", "p"}); }

Expr random_tree(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth > 0 ? 6 : 1);
  std::uniform_int_distribution<int> coord(0, 2);
  std::uniform_int_distribution<int> small(-3, 3);
  switch (pick(rng)) {
    case 0: return Expr::coord(coord(rng));
    case 1: return Expr(Rational(small(rng), 2));
    case 2: return random_tree(rng, depth - 1) + random_tree(rng, depth - 1);
    case 3: return random_tree(rng, depth - 1) * random_tree(rng, depth - 1);
    case 4: return random_tree(rng, depth - 1).pow(2);
    case 5: return Expr::sin(random_tree(rng, depth - 1));
    default: return Expr::exp(random_tree(rng, depth - 1) * Expr(Rational(1, 4)));
  }
}

}  // namespace

TEST_CASE("differentiate polynomial rule") {
  const Chart c = chart3();
  Expr e = parse_expr("x^2*u", c);
  CHECK(differentiate(e, 0) == parse_expr("2*x*u", c));
  CHECK(differentiate(parse_expr("p", c), 2) == Expr(1));
}

TEST_CASE("non-smooth leaf rejects differentiation along its argument") {
  const Chart c = chart3();
  Expr e = parse_expr("absRe(x)", c);
  CHECK_THROWS_AS(differentiate(e, 0), NonSmoothDerivative);
  CHECK(differentiate(e, 1).is_zero_structural());
}

TEST_CASE("evaluate basics") {
  const Chart c = chart3();
  CHECK(evaluate(parse_expr("x^2 + 1", c), {2, 0, 0}) == 5.0);
  CHECK(evaluate(parse_expr("exp(0)", c), {0, 0, 0}) == 1.0);
  CHECK(evaluate(parse_expr("absRe(x)", c), {-3, 0, 0}) == 3.0);
  LeafRegistry empty;
  CHECK_THROWS_AS(evaluate(parse_expr("absRe(x)", c), {1, 0, 0}, empty), UnboundLeaf);
  CHECK_THROWS_AS(evaluate(parse_expr("exp(x)", c), {1e5, 0, 0}), NonFinite);
}

TEST_CASE("evaluation is deterministic") {
  const Chart c = chart3();
  Expr e = parse_expr("sin(x*u)^3 + exp(p/3) - 1/(x^2 + u^2 + 1)", c);
  const double a = evaluate(e, {0.1, 0.2, 0.3});
  const double b = evaluate(e, {0.1, 0.2, 0.3});
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("is_zero tri-state") {
  const Chart c = chart3();
  CHECK(is_zero(parse_expr("x*u - u*x", c)) == Tri::Yes);
  CHECK(is_zero(parse_expr("x", c)) == Tri::No);
  CHECK(is_zero(parse_expr("sin(x)^2 + cos(x)^2 - 1", c)) != Tri::No);
  CHECK(is_zero(parse_expr("x/(x + 1) + 1/(x + 1) - 1", c)) == Tri::Yes);
  CHECK(is_zero(parse_expr("exp(x)*exp(-x) - 1", c)) == Tri::Yes);
}

TEST_CASE("exact decimal literals") {
  const Chart c = chart3();
  CHECK(parse_expr("0.125*x", c) == parse_expr("1/8*x", c));
  CHECK_THROWS_AS(parse_expr("x + * u", c), ParseError);
  CHECK_THROWS_AS(parse_expr("y", c), ParseError);
}

TEST_CASE("printer round-trips canonical forms") {
  const Chart c = chart3();
  std::mt19937 rng(7);
  for (int i = 0; i < 60; ++i) {
    Expr e = random_tree(rng, 3) / (Expr::coord(0).pow(2) + Expr(2));
    const std::string s = to_string(e, c);
    CHECK_MESSAGE(parse_expr(s, c) == e, s);
  }
}

TEST_CASE("linearity, Leibniz and idempotent canonicalization on random trees") {
  std::mt19937 rng(11);
  for (int i = 0; i < 40; ++i) {
    Expr a = random_tree(rng, 3), b = random_tree(rng, 3);
    const Expr two(Rational(2, 3)), three(Rational(-5, 7));
    for (int k = 0; k < 3; ++k) {
      CHECK(differentiate(two * a + three * b, k) ==
            two * differentiate(a, k) + three * differentiate(b, k));
      const Expr lhs = differentiate(a * b, k);
      const Expr rhs = differentiate(a, k) * b + a * differentiate(b, k);
      CHECK(is_zero(lhs - rhs) != Tri::No);
    }
    CHECK(Expr::from_terms(a.terms()) == a);
  }
}

TEST_CASE("evaluate of derivative agrees with central differences") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    Expr e = random_tree(rng, 3);
    std::vector<double> p{u(rng), u(rng), u(rng)};
    const int k = i % 3;
    const double h = 1e-5;
    auto pp = p, pm = p;
    pp[k] += h;
    pm[k] -= h;
    const double fd = (evaluate(e, pp) - evaluate(e, pm)) / (2 * h);
    const double ex = evaluate(differentiate(e, k), p);
    CHECK(std::fabs(fd - ex) <= 1e-6 * std::max(1.0, std::fabs(ex)));
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("compiled evaluation and jets agree with the tree evaluator") {
  const Chart c = chart3();
  Expr e = parse_expr("sin(x*u)^3 + exp(p/3)*x - 1/(x^2 + u^2 + 1)", c);
  CompiledExpr ce(e);
  const double p[3] = {0.3, -0.4, 0.8};
  CHECK(std::fabs(ce(p) - evaluate(e, {0.3, -0.4, 0.8})) < 1e-15);
  auto sp = JetSpace::get(3, 2);
  std::vector<Jet> v{Jet::variable(sp, 0, 0.3), Jet::variable(sp, 1, -0.4),
                     Jet::variable(sp, 2, 0.8)};
  Jet j = ce.jet(v);
  const double dx = evaluate(differentiate(e, 0), {0.3, -0.4, 0.8});
  const double dxu = evaluate(differentiate(differentiate(e, 0), 1), {0.3, -0.4, 0.8});
  CHECK(std::abs(j.derivative(0).value() - dx) < 1e-12);
  CHECK(std::abs(j.derivative(0).derivative(1).value() - dxu) < 1e-12);
}

TEST_CASE("complex expressions and Wirtinger derivatives") {
  const Chart c = Chart::complex({"z", "w"});
  CExpr z = parse_cexpr("z", c);
  CHECK(z.conj().conj() == z);
  CHECK(is_zero(d_dzbar(parse_cexpr("z^3*w + exp(2*z)", c), 0)) == Tri::Yes);
  CHECK(d_dzbar(parse_cexpr("conj(z)", c), 0) == CExpr(1));
  CHECK(d_dz(parse_cexpr("z*conj(z)", c), 0) == parse_cexpr("conj(z)", c));
  const auto v = evaluate(parse_cexpr("I*z", c), {1.0, 2.0, 0.0, 0.0});
  CHECK(v.real() == -2.0);
  CHECK(v.imag() == 1.0);
  CHECK(evaluate(parse_cexpr("absRe(z)", c), {-0.5, 3.0, 0, 0}).real() == 0.5);
}
