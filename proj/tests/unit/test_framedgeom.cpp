#include <doctest.h>

#include <random>

#include "charlap/errors.hpp"
#include "charlap/framedgeom.hpp"
#include "charlap/scenarios.hpp"

using namespace charlap;

namespace {

Scenario real_scenario(const std::string& frame_json, const std::string& dist) {
  return parse_scenario(R"({"name": "t", "coordinates": ["x", "y", "z"], "frame": )" +
                        frame_json + R"(, "distribution": )" + dist + "}");
}

VectorField field(const Scenario& s, std::vector<std::string> comps) {
  VectorField v;
  for (const auto& c : comps) v.push_back(CExpr(parse_expr(c, s.chart)));
  return v;
}

bool all_zero(const VectorField& v) {
  for (const auto& c : v)
    if (is_zero(c) != Tri::Yes) return false;
  return true;
}

double herm_err(const CMat& p, const CMat& m) {
  return (m * p - p.adjoint() * m).norm();
}

}  // namespace

TEST_CASE("lie bracket examples") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto f = full_frame(h);
  const VectorField br = lie_bracket(h, f[0], f[1]);
  CHECK(is_zero(br[0]) == Tri::Yes);
  CHECK(is_zero(br[1]) == Tri::Yes);
  CHECK(is_zero(br[2] + CExpr(1)) == Tri::Yes);

  const Scenario flat = real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,1]");
  const auto ff = full_frame(flat);
  CHECK(all_zero(lie_bracket(flat, ff[0], ff[1])));

  const Scenario c = load_scenario("complex-heisenberg-standard", 0);
  const auto cf = full_frame(c);
  CHECK(all_zero(lie_bracket(c, cf[0], cf[3])));
}

TEST_CASE("structure functions") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto sf = structure_functions(h);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const bool special = k == 2 && ((i == 0 && j == 1) || (i == 1 && j == 0));
        const CExpr expect = special ? CExpr(i == 0 ? -1 : 1) : CExpr(0);
        CHECK(is_zero(sf.c[k][i][j] - expect) == Tri::Yes);
      }

  const Scenario flat = real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,1]");
  for (const auto& a : structure_functions(flat).c)
    for (const auto& b : a)
      for (const auto& e : b) CHECK(is_zero(e) == Tri::Yes);

  Scenario doubled = h;
  for (auto& row : doubled.frame)
    for (auto& e : row) e = CExpr(2) * e;
  const auto sf2 = structure_functions(doubled);
  CHECK(is_zero(sf2.c[2][0][1] + CExpr(2)) == Tri::Yes);

  Scenario singular = h;
  singular.frame[1] = singular.frame[0];
  CHECK_THROWS_AS(structure_functions(singular), FrameNotInvertible);
}

TEST_CASE("jacobi identity on random polynomial fields") {
  const Scenario s = real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,1]");
  std::mt19937 rng(7);
  std::uniform_int_distribution<int> coef(-3, 3), expo(0, 2);
  auto random_poly = [&]() {
    Expr p;
    for (int t = 0; t < 3; ++t) {
      Expr mono(coef(rng));
      for (int v = 0; v < 3; ++v) mono = mono * Expr::coord(v).pow(expo(rng));
      p = p + mono;
    }
    return CExpr(p);
  };
  for (int trial = 0; trial < 10; ++trial) {
    VectorField x(3), y(3), z(3);
    for (int a = 0; a < 3; ++a) {
      x[a] = random_poly();
      y[a] = random_poly();
      z[a] = random_poly();
    }
    const auto j1 = lie_bracket(s, x, lie_bracket(s, y, z));
    const auto j2 = lie_bracket(s, y, lie_bracket(s, z, x));
    const auto j3 = lie_bracket(s, z, lie_bracket(s, x, y));
    VectorField sum(3);
    for (int a = 0; a < 3; ++a) sum[a] = j1[a] + j2[a] + j3[a];
    CHECK(all_zero(sum));
  }
}

TEST_CASE("lie bracket rejects non-smooth coefficients") {
  const Scenario s = real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,1]");
  const VectorField x = field(s, {"absRe(y)", "0", "0"});
  const VectorField y = field(s, {"0", "1", "0"});
  CHECK_THROWS_AS(lie_bracket(s, x, y), NonSmoothDerivative);
}

TEST_CASE("phi map two ways and tensoriality") {
  for (const char* name : {"real-heisenberg-contact", "pfaff-chart", "complex-heisenberg-standard",
                           "complex-heisenberg-invariant"}) {
    const Scenario s = load_scenario(name, 0);
    for (int i = 1; i <= 50; ++i) {
      const auto x = halton_point(s, i, 3);
      for (int k = 0; k <= 1; ++k) {
        const CMat a = phi_map(s, x, k, false);
        const CMat b = phi_map(s, x, k, true);
        CHECK((a - b).norm() < 1e-10);
      }
    }
  }

  // φ(fθ) = f φ(θ): rescale the annihilator direction of the frame dual.
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  Scenario scaled = h;
  const Expr f = parse_expr("2 + p^2 + sin(q)*t", h.chart);
  // θ^3 -> θ^3 / f when e3 -> f e3, the W part of the frame is unchanged.
  for (auto& e : scaled.frame[2]) e = CExpr(f) * e;
  for (int i = 1; i <= 50; ++i) {
    const auto x = halton_point(h, i, 5);
    const CMat a = phi_map(h, x, 0, false);
    const CMat b = phi_map(scaled, x, 0, false);
    CHECK((a - evaluate(f, x) * b).norm() < 1e-10);
  }
}

TEST_CASE("phi map values") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const CMat phi0 = phi_map(h, {0.3, -0.2, 0.7}, 0, false);
  REQUIRE(phi0.rows() == 1);
  REQUIRE(phi0.cols() == 1);
  CHECK(std::abs(phi0(0, 0) - 1.0) < 1e-12);

  const Scenario inv = load_scenario("involutive-product", 0);
  for (int i = 1; i <= 20; ++i) CHECK(phi_map(inv, halton_point(inv, i), 0, false).norm() == 0.0);
}

TEST_CASE("fiber projectors") {
  for (const char* name : {"real-heisenberg-contact", "pfaff-chart", "complex-heisenberg-standard",
                           "complex-heisenberg-invariant", "involutive-product", "flat-kaehler",
                           "nonkaehler-hermitian"}) {
    const Scenario s = load_scenario(name, 50);
    for (int i = 1; i <= 10; ++i) {
      const FiberData fd = fiber_projectors(s, halton_point(s, i, 9));
      const CMat& m = fd.lambda_gram;
      for (const CMat* p : {&fd.pi_W, &fd.pi_Fphi, &fd.pi_Q}) {
        CHECK(((*p) * (*p) - *p).norm() < 1e-12);
        CHECK(herm_err(*p, m) < 1e-12);
      }
      CHECK((fd.pi_W * fd.pi_Fphi - fd.pi_Fphi).norm() < 1e-12);
      CHECK((fd.pi_Q * fd.pi_Fphi).norm() < 1e-12);
      CHECK((fd.pi_Fphi + fd.pi_Fperp - fd.pi_W).norm() < 1e-12);
      // conj(F_φ) = F_φ
      const Ambient amb = Ambient::of(s);
      const CMat conj_f = amb.Kc * fd.pi_Fphi.conjugate() * amb.Kc.transpose();
      CHECK((conj_f - fd.pi_Fphi).norm() < 1e-10);
      CHECK(fd.q_basis.cols() == static_cast<int>(fd.q_grade.size()));
      const CMat gq = fd.q_basis.adjoint() * m * fd.q_basis;
      CHECK((gq - CMat::Identity(gq.rows(), gq.cols())).norm() < 1e-12);
    }
  }
}

TEST_CASE("Q fiber dimensions") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto fd = fiber_projectors(h, {0.1, 0.2, 0.3});
  CHECK(fd.q_dims() == std::vector<int>{1, 2, 0, 0});

  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant"}) {
    const Scenario c = load_scenario(name, 0);
    const auto cd = fiber_projectors(c, halton_point(c, 4));
    std::map<std::pair<int, int>, int> bideg;
    for (const auto& b : cd.q_bidegree) ++bideg[b];
    const std::map<std::pair<int, int>, int> expect = {
        {{0, 0}, 1}, {{1, 0}, 2}, {{0, 1}, 2}, {{1, 1}, 4}};
    CHECK(bideg == expect);
    CHECK(cd.phi_rank[0] == 2);
  }

  const Scenario flat = load_scenario("flat-kaehler", 0);
  const auto ff = fiber_projectors(flat, {0.1, 0.2, 0.3, 0.4});
  CHECK((ff.pi_Q - CMat::Identity(16, 16)).norm() < 1e-12);
  CHECK(ff.pi_Fphi.norm() < 1e-12);
}

TEST_CASE("bracket generation") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto bg = bracket_generating(h, {0.2, 0.1, -0.3}, 5);
  CHECK(bg.is_bg);
  CHECK(bg.step == 2);

  const Scenario inv = real_scenario(R"([["1","0","0"],["0","0","1"],["0","1","0"]])", "[0,1]");
  const auto bi = bracket_generating(inv, {0.2, 0.1, -0.3}, 5);
  CHECK_FALSE(bi.is_bg);
  CHECK(bi.ranks.back() == 2);

  const Scenario full = real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,1,2]");
  const auto bf = bracket_generating(full, {0.0, 0.0, 0.0}, 5);
  CHECK(bf.is_bg);
  CHECK(bf.step == 1);

  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant"}) {
    const Scenario c = load_scenario(name, 0);
    CHECK(bracket_generating(c, halton_point(c, 2), 5).is_bg);
  }
  const Scenario ip = load_scenario("involutive-product", 0);
  CHECK_FALSE(bracket_generating(ip, halton_point(ip, 2), 5).is_bg);

  // Engel-type growth 2, 3, 4 needs depth 3.
  const Scenario engel = parse_scenario(
      R"J({"coordinates": ["a", "b", "c", "d"],
          "frame": [["1","0","0","0"],["0","1","a","a^2/2"],["0","0","1","0"],["0","0","0","1"]],
          "distribution": [0, 1]})J");
  CHECK_THROWS_AS(bracket_generating(engel, {0.1, 0.2, 0.3, 0.4}, 2), MaxDepthExceeded);
  const auto be = bracket_generating(engel, {0.1, 0.2, 0.3, 0.4}, 5);
  CHECK(be.step == 3);
}

TEST_CASE("constant rank audit") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto a = constant_rank_audit(h, 200);
  CHECK(a.pass());
  CHECK(a.majority == std::vector<int>{1});

  const Scenario inv = load_scenario("involutive-product", 0);
  const auto ai = constant_rank_audit(inv, 50);
  CHECK(ai.pass());
  CHECK(ai.majority[0] == 0);

  const Scenario deg = load_scenario("degenerate-pfaff", 0);
  const auto ad = constant_rank_audit(deg, 200);
  CHECK_FALSE(ad.pass());
  REQUIRE(!ad.outliers.empty());
  for (const auto& x : ad.outliers) CHECK(std::abs(x[0]) < 1e-12);
  CHECK(ad.majority == std::vector<int>{1});

  Scenario loaded = load_scenario("degenerate-pfaff", 200);
  CHECK_THROWS_AS(LocalGeometry(loaded, {0.0, 0.3, 0.2}, 0), RankDrop);
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(parse_scenario("{ \"coordinates\": [\"x\", "), ParseError);
  CHECK_THROWS_AS(real_scenario(R"([["1","0","0"],["1","0","0"],["0","0","1"]])", "[0,1]"),
                  ValidationError);
  CHECK_THROWS_AS(real_scenario(R"([["1","0","0"],["0","1","0"],["0","0","1"]])", "[0,5]"),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"J({"coordinates": ["z"], "complex": true,
                                     "frame": [["conj(z)"]], "distribution": [0]})J"),
                  ValidationError);
  CHECK_THROWS_AS(parse_scenario(R"J({"coordinates": ["x"], "frame": [["1 +"]],
                                     "distribution": [0]})J"),
                  ParseError);
  CHECK(builtin_names().size() == 8);
}
