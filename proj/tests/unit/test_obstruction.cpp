#include <doctest.h>

#include <Eigen/SVD>

#include "charlap/errors.hpp"
#include "charlap/hermitian.hpp"
#include "charlap/scenarios.hpp"

using namespace charlap;

namespace {

// Contact distribution on C^4 with a metric that couples ∂p and ∂y
// antiholomorphically, so both B-terms are nonzero.
const char* kContactC4 = R"J({
  "name": "contact-c4",
  "coordinates": ["x", "p", "y", "u"],
  "complex": true,
  "frame": [["0", "1", "0", "0"], ["1", "0", "0", "p"], ["0", "0", "1", "0"], ["0", "0", "0", "1"]],
  "metric": {"coordinate_gram": [["1", "0", "0", "0"], ["0", "1", "conj(x)/4", "0"], ["0", "x/4", "1", "0"], ["0", "0", "0", "1"]]},
  "distribution": [0, 1, 2]
})J";

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / (1.0 + b.norm()); }

Eigen::VectorXd singular_values(const CMat& a) { return Eigen::JacobiSVD<CMat>(a).singularValues(); }

}  // namespace

TEST_CASE("obstruction symbol matches the commutator oracle") {
  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant",
                           "involutive-product", "flat-kaehler", "nonkaehler-hermitian"}) {
    CAPTURE(name);
    const Scenario s = load_scenario(name, 20);
    const HermitianData h = hermitian_data(s);
    const CharacteristicOps ops = build_characteristic_ops(s);
    const OperatorField p = anticommutator(ops.delQ, ops.delbarQstar);
    for (int k = 1; k <= 3; ++k) {
      const LocalGeometry g(s, halton_point(s, k, 7), 2);
      const RVec xi = RVec::Random(g.n());
      const CMat a = obstruction_symbol(g, h, xi);
      CHECK(rel(a, symbol_oracle(g, p, 1, xi)) < 1e-9);
      // Zeroth-order in ξ scaling: order 2 coefficient vanishes.
      CHECK(symbol_oracle(g, p, 2, xi).norm() < 1e-9);
      CHECK(rel(obstruction_symbol(g, h, 2.0 * xi), 2.0 * a) < 1e-12);
    }
  }
}

TEST_CASE("obstruction B-terms on a contact distribution") {
  Scenario s = parse_scenario(kContactC4);
  s.phi_ranks = constant_rank_audit(s, 4).majority;
  const HermitianData h = hermitian_data(s);
  const CharacteristicOps ops = build_characteristic_ops(s);
  const LocalGeometry g(s, halton_point(s, 2, 3), 2, false);
  const RVec xi = RVec::Random(g.n());
  const CMat full = obstruction_symbol(g, h, xi);
  const CMat bracket = obstruction_bracket_term(g, h, xi);
  const CMat o = symbol_oracle(g, anticommutator(ops.delQ, ops.delbarQstar), 1, xi);
  CHECK((full - bracket).norm() > 1e-2);
  CHECK(rel(full, o) < 1e-9);
}

TEST_CASE("obstruction reduces to brackets on normal covectors") {
  const Scenario s = load_scenario("complex-heisenberg-standard", 20);
  const HermitianData h = hermitian_data(s);
  for (int k = 1; k <= 3; ++k) {
    const LocalGeometry g(s, halton_point(s, k), 1);
    const HermitianFiber f = hermitian_fiber(g, h);
    const auto normals = normal_covectors(g);
    REQUIRE(normals.size() == 2);
    for (const RVec& xi : normals) {
      const CMat op = obstruction_symbol_ambient(g, h, xi);
      double total = 0.0;
      for (int j = 0; j < f.n; ++j) {
        const CVec wbar = f.coframe.row(f.m + j).transpose();
        CVec e = CVec::Zero(lam::size(g.n()));
        for (int a = 0; a < g.n(); ++a) e[1 << a] = wbar[a];
        const CVec got = op * e;
        const CVec want = bracket_obstruction(g, f, xi, j);
        CHECK((g.piQ.value() * (got - want)).norm() < 1e-12);
        total += want.norm();
      }
      CHECK(total > 1e-3);
    }
  }
}

TEST_CASE("obstruction on N* ignores the metric on N") {
  auto with_gram = [](const std::string& g33) {
    Scenario s = parse_scenario(R"J({
      "coordinates": ["x", "p", "u"],
      "complex": true,
      "frame": [["0", "1", "0"], ["1", "0", "p"], ["0", "0", "1"]],
      "metric": {"frame_gram": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", ")J" +
                                 g33 + R"J("]]},
      "distribution": [0, 1]
    })J");
    s.phi_ranks = constant_rank_audit(s, 4).majority;
    return s;
  };
  const Scenario a = with_gram("1"), b = with_gram("4 + x*conj(x)");
  const HermitianData ha = hermitian_data(a), hb = hermitian_data(b);
  for (int k = 1; k <= 3; ++k) {
    const auto x = halton_point(a, k);
    const LocalGeometry ga(a, x, 1), gb(b, x, 1);
    for (const RVec& xi : normal_covectors(ga)) {
      const auto sa = singular_values(obstruction_symbol(ga, ha, xi));
      const auto sb = singular_values(obstruction_symbol(gb, hb, xi));
      CHECK((sa - sb).norm() < 1e-10 * (1.0 + sa.norm()));
      CHECK(sa.norm() > 1e-3);
    }
  }
}

TEST_CASE("involutivity verdict") {
  const InvolutivityVerdict heis = involutivity_verdict(load_scenario("complex-heisenberg-standard", 20), 3);
  CHECK_FALSE(heis.involutive);
  CHECK_FALSE(heis.bigrading_preserved);
  CHECK(heis.max_obstruction > 1e-3);
  CHECK(heis.witness_point.size() == 6);
  CHECK(heis.witness_xi.size() == 6);
  CHECK(heis.witness_j >= 0);

  const InvolutivityVerdict inv = involutivity_verdict(load_scenario("involutive-product", 20), 3);
  CHECK(inv.involutive);
  CHECK(inv.bigrading_preserved);
  CHECK(inv.max_obstruction < 1e-9);

  const InvolutivityVerdict flat = involutivity_verdict(load_scenario("flat-kaehler", 20), 2);
  CHECK(flat.involutive);
  CHECK(flat.bigrading_preserved);

  CHECK_THROWS_AS(involutivity_verdict(load_scenario("real-heisenberg-contact", 0), 1),
                  NotComplexScenario);
}
