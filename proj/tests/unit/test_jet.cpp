#include <doctest.h>

#include <cmath>

#include "charlap/jet.hpp"

using namespace charlap;

TEST_CASE("jet product and derivative of polynomials") {
  auto sp = JetSpace::get(2, 3);
  Jet x = Jet::variable(sp, 0, 0.5);
  Jet y = Jet::variable(sp, 1, -1.0);
  Jet f = x * x * y;  // x^2 y
  CHECK(f.value().real() == doctest::Approx(-0.25));
  Jet fx = f.derivative(0);  // 2xy
  CHECK(fx.value().real() == doctest::Approx(-1.0));
  CHECK(fx.valid() == 2);
  Jet fxy = fx.derivative(1);  // 2x
  CHECK(fxy.value().real() == doctest::Approx(1.0));
}

TEST_CASE("jet transcendental composition matches closed form derivatives") {
  auto sp = JetSpace::get(1, 4);
  Jet x = Jet::variable(sp, 0, 0.3);
  Jet e = (x * cd(2.0)).exp();
  CHECK(std::abs(e.derivative(0).derivative(0).value() - 4.0 * std::exp(0.6)) < 1e-12);
  Jet s = x.sin();
  CHECK(std::abs(s.derivative(0).derivative(0).derivative(0).value() + std::cos(0.3)) < 1e-12);
  Jet r = (x + Jet(sp, 1.0)).inverse();
  CHECK(std::abs(r.derivative(0).value() + 1.0 / (1.3 * 1.3)) < 1e-12);
  Jet q = (x + Jet(sp, 1.0)).sqrt();
  CHECK(std::abs(q.derivative(0).value() - 0.5 / std::sqrt(1.3)) < 1e-12);
}

TEST_CASE("derivative past the valid order is rejected") {
  auto sp = JetSpace::get(1, 1);
  Jet x = Jet::variable(sp, 0, 0.0);
  CHECK_THROWS(x.derivative(0).derivative(0));
}

TEST_CASE("matrix jet inverse") {
  auto sp = JetSpace::get(2, 3);
  JetMat a(sp, 2, 2);
  Jet x = Jet::variable(sp, 0, 0.2);
  Jet y = Jet::variable(sp, 1, 0.7);
  a.set_entry(0, 0, Jet(sp, 1.0) + x * x);
  a.set_entry(0, 1, y);
  a.set_entry(1, 0, x * y);
  a.set_entry(1, 1, Jet(sp, 2.0));
  JetMat prod = a * a.inverse();
  for (int m = 0; m < sp->size(); ++m) {
    CMat expect = CMat::Zero(2, 2);
    if (m == 0) expect.setIdentity();
    CHECK((prod[m] - expect).norm() < 1e-12);
  }
}
