#include <doctest.h>

#include <random>

#include "charlap/charops.hpp"
#include "charlap/errors.hpp"
#include "charlap/scenarios.hpp"
#include "helpers.hpp"

using namespace charlap;

namespace {

Scenario flat_real(int n, const std::string& dist) {
  std::string names = "[", frame = "[";
  for (int i = 0; i < n; ++i) {
    names += std::string(i ? "," : "") + "\"x" + std::to_string(i) + "\"";
    frame += i ? ",[" : "[";
    for (int j = 0; j < n; ++j) frame += std::string(j ? "," : "") + (i == j ? "\"1\"" : "\"0\"");
    frame += "]";
  }
  return parse_scenario(R"({"coordinates": )" + names + R"(], "frame": )" + frame +
                        R"(], "distribution": )" + dist + "}");
}

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / (1.0 + b.norm()); }

}  // namespace

TEST_CASE("exterior d examples") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const Coframe cc = Coframe::coordinate(h.chart);
  Form theta = Form::basis(cc, {2}) + Form::basis(cc, {0}, CExpr(parse_expr("-q/2", h.chart))) +
               Form::basis(cc, {1}, CExpr(parse_expr("p/2", h.chart)));
  CHECK(exterior_d(theta, h) == Form::basis(cc, {0, 1}));
  CHECK(exterior_d(Form::scalar(cc, CExpr(5)), h).is_zero_structural());

  const Scenario pf = load_scenario("pfaff-chart", 0);
  const Coframe pc = Coframe::coordinate(pf.chart);
  Form t2 = Form::basis(pc, {2}) + Form::basis(pc, {0}, CExpr(parse_expr("-p", pf.chart)));
  CHECK(exterior_d(t2, pf) == Form::basis(pc, {0, 1}));

  // Frame coframe: dθ^3 = -c^3_12 θ^1∧θ^2 = θ^1∧θ^2.
  const Coframe fc = frame_coframe(h);
  CHECK(exterior_d(Form::basis(fc, {2}), h) == Form::basis(fc, {0, 1}));
}

TEST_CASE("d squared vanishes symbolically") {
  std::mt19937 rng(11);
  for (const char* name : {"real-heisenberg-contact", "pfaff-chart", "degenerate-pfaff",
                           "complex-heisenberg-invariant", "complex-heisenberg-standard",
                           "involutive-product", "nonkaehler-hermitian"}) {
    const Scenario s = load_scenario(name, 0);
    const auto sf = structure_functions(s);
    const int forms = s.is_complex() ? 6 : 20;
    for (int t = 0; t < forms; ++t) {
      for (const Coframe& cf : {frame_coframe(s), Coframe::coordinate(s.chart)}) {
        const Form a = testutil::random_form(rng, cf, s.real_dim(), s.is_complex());
        const Form dd = exterior_d(exterior_d(a, s, sf), s, sf);
        CHECK(dd.is_zero() == Tri::Yes);
      }
    }
  }
}

TEST_CASE("frame d agrees with coordinate d numerically") {
  std::mt19937 rng(12);
  for (const char* name : {"real-heisenberg-contact", "complex-heisenberg-standard"}) {
    const Scenario s = load_scenario(name, 0);
    const Form a = testutil::random_form(rng, frame_coframe(s), s.real_dim(), s.is_complex());
    const Form da = exterior_d(a, s);
    for (int i = 1; i <= 5; ++i) {
      const LocalGeometry g(s, halton_point(s, i, 2), 1, false);
      const JetMat u = section_from_form(g, a);
      const CMat lhs = apply_dpart(g, u, DPart::Full).value();
      const CMat rhs = section_from_form(g, da).value();
      CHECK(rel(lhs, rhs) < 1e-12);
    }
  }
}

TEST_CASE("codifferential") {
  const Scenario r2 = flat_real(2, "[0,1]");
  const Coframe fc = frame_coframe(r2);
  const Expr f = parse_expr("x0^2*x1 + 3*x0", r2.chart);
  const Form star = codifferential(Form::basis(fc, {0}, CExpr(f)), r2);
  CHECK(star == Form::scalar(fc, CExpr(-differentiate(f, 0))));
  CHECK(codifferential(Form::scalar(fc, CExpr(f)), r2).is_zero_structural());

  // Symbolic ⋆d⋆ against the jet formal adjoint.
  std::mt19937 rng(13);
  for (const char* name : {"real-heisenberg-contact", "pfaff-chart"}) {
    const Scenario s = load_scenario(name, 0);
    for (int t = 0; t < 5; ++t) {
      const Form a = testutil::random_form(rng, frame_coframe(s), 3, false);
      const Form da = codifferential(a, s);
      for (int i = 1; i <= 5; ++i) {
        const LocalGeometry g(s, halton_point(s, i, 4), 1, false);
        const CMat lhs = apply_dpart_adjoint(g, section_from_form(g, a), DPart::Full).value();
        CHECK(rel(lhs, section_from_form(g, da).value()) < 1e-11);
      }
    }
  }
  CHECK_THROWS_AS(codifferential(Form(frame_coframe(load_scenario("flat-kaehler", 0))),
                                 load_scenario("flat-kaehler", 0)),
                  DegenerateMetric);
}

TEST_CASE("characteristic operators on examples") {
  std::mt19937 rng(14);
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto ops = build_characteristic_ops(h);
  const auto frame = full_frame(h);
  for (int i = 1; i <= 10; ++i) {
    const auto x = halton_point(h, i, 6);
    const LocalGeometry g(h, x, 2);
    const CExpr f = testutil::random_cpoly(rng, 3, false);
    // d_Q f = X1(f) α¹ + X2(f) α²
    const CMat dqf = ops.dQ(g, section_from_form(g, Form::scalar(Coframe::coordinate(h.chart), f)))
                         .value();
    CVec expect = CVec::Zero(8);
    for (int k : h.w_indices())
      expect += evaluate(apply_field(h, frame[k], f), x) *
                g.one_form_to_lambda(g.w_coframe(k)).value().col(0);
    CHECK(rel(dqf, expect) < 1e-12);
    // d_Q* μ = -div(μ1 X1 + μ2 X2), both fields divergence free
    const CExpr m1 = testutil::random_cpoly(rng, 3, false);
    const CExpr m2 = testutil::random_cpoly(rng, 3, false);
    Form mu = Form::basis(frame_coframe(h), {0}, m1) + Form::basis(frame_coframe(h), {1}, m2);
    const CMat dqs = ops.dQstar(g, section_from_form(g, mu)).value();
    const cd div = evaluate(apply_field(h, frame[0], m1) + apply_field(h, frame[1], m2), x);
    CHECK(std::abs(dqs(0, 0) + div) < 1e-11 * (1.0 + std::abs(div)));
    CHECK(dqs.norm() - std::abs(dqs(0, 0)) < 1e-11);
  }

  // W = TX on flat R^2: Δ_Q sin(x0) = sin(x0)
  const Scenario r2 = flat_real(2, "[0,1]");
  const auto ops2 = build_characteristic_ops(r2);
  const Form sinx = Form::scalar(Coframe::coordinate(r2.chart), CExpr(parse_expr("sin(x0)", r2.chart)));
  for (int i = 1; i <= 5; ++i) {
    const auto x = halton_point(r2, i);
    const LocalGeometry g(r2, x, 2);
    const CMat lap = ops2.lapQ(g, section_from_form(g, sinx)).value();
    CHECK(std::abs(lap(0, 0) - std::sin(x[0])) < 1e-12);
  }
}

TEST_CASE("complex d_Q on Q^{1,0}") {
  std::mt19937 rng(15);
  for (const char* name : {"complex-heisenberg-invariant", "complex-heisenberg-standard"}) {
    const Scenario s = load_scenario(name, 0);
    const auto ops = build_characteristic_ops(s);
    const auto frame = full_frame(s);
    const int m = s.frame_size();
    for (int i = 1; i <= 5; ++i) {
      const auto x = halton_point(s, i, 8);
      const LocalGeometry g(s, x, 1);
      std::vector<CExpr> mu = {testutil::random_cpoly(rng, 6, true),
                               testutil::random_cpoly(rng, 6, true)};
      JetMat sec = CompiledCExpr(mu[0]).jet(g.coords()) * g.one_form_to_lambda(g.w_coframe(0));
      sec += CompiledCExpr(mu[1]).jet(g.coords()) * g.one_form_to_lambda(g.w_coframe(1));
      const CMat got = ops.dQ(g, sec).value();
      CVec expect = CVec::Zero(lam::size(g.n()));
      for (int a = 0; a < 2; ++a)
        for (int j = 0; j < 2; ++j) {
          const cd c = evaluate(apply_field(s, frame[j + m], mu[a]), x);
          const CVec bar = g.w_coframe(j + m).value().col(0);
          const CVec al = g.one_form_to_lambda(g.w_coframe(a)).value().col(0);
          expect += c * lam::wedge_matrix(bar) * al;
        }
      CHECK(rel(got, expect) < 1e-11);
    }
  }
}

TEST_CASE("projection identities and d_Q squared") {
  std::mt19937 rng(16);
  for (const char* name : {"real-heisenberg-contact", "pfaff-chart", "complex-heisenberg-standard",
                           "complex-heisenberg-invariant"}) {
    const Scenario s = load_scenario(name, 0);
    const auto ops = build_characteristic_ops(s);
    for (int i = 1; i <= 4; ++i) {
      const LocalGeometry g(s, halton_point(s, i, 10), 2);
      const Form a = testutil::random_form(rng, Coframe::coordinate(s.chart), s.real_dim(),
                                           s.is_complex());
      const JetMat u = section_from_form(g, a);
      const JetMat pu = g.piQ * u;
      const CMat p = g.piQ.value();
      const CMat du = apply_dpart(g, u, DPart::Full).value();
      const CMat dpu = apply_dpart(g, pu, DPart::Full).value();
      CHECK(rel(p * dpu, p * du) < 1e-9);
      const CMat su = apply_dpart_adjoint(g, pu, DPart::Full).value();
      const CMat spu = p * su;
      CHECK(rel(spu, su) < 1e-9);
      const CMat dq2 = ops.dQ(g, ops.dQ(g, u)).value();
      CHECK(dq2.norm() < 1e-9 * (1.0 + u.value().norm() * 10));
    }
  }
}

TEST_CASE("symbols") {
  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto ops = build_characteristic_ops(h);
  std::mt19937 rng(17);
  std::normal_distribution<double> nd;
  for (int i = 1; i <= 10; ++i) {
    const LocalGeometry g(h, halton_point(h, i, 12), 2);
    const RVec xi = RVec::NullaryExpr(3, [&](Eigen::Index) { return nd(rng); });
    const auto cf = closed_form_symbols(g, xi);
    CHECK(rel(symbol_oracle(g, ops.lapQ, 2, xi), cf.q_lapQ) < 1e-10);
    CHECK(rel(symbol_oracle(g, ops.dQ, 1, xi), cf.q_dQ) < 1e-10);
    CHECK(rel(symbol_oracle(g, ops.dQstar, 1, xi), cf.q_dQstar) < 1e-10);
    CHECK(rel(cf.s2_lapQ, cf.s1_dQ * cf.s1_dQstar + cf.s1_dQstar * cf.s1_dQ) < 1e-9);
    // d on functions: i ξ∧
    const CMat dsym = symbol_oracle_ambient(g, ops.d, 1, xi, CVec::Unit(8, 0));
    const CMat expect = cd(0.0, 1.0) * lam::wedge_matrix(ambient_covector(g, xi)) * CVec::Unit(8, 0);
    CHECK(rel(dsym, expect) < 1e-12);
  }

  // Explicit contact matrix on Q^1 at rational covectors.
  const LocalGeometry g(h, {0.25, -0.5, 0.75}, 0);
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{1, 0}, {0.5, -1.5}, {3, 2}}) {
    const RVec xi = covector_from_frame(g, RVec((RVec(3) << a, b, 0.7).finished()));
    const CMat q = closed_form_symbols(g, xi).q_lapQ;
    REQUIRE(q.rows() == 3);
    CMat expect = CMat::Zero(3, 3);
    expect(0, 0) = a * a + b * b;
    expect(1, 1) = a * a;
    expect(1, 2) = expect(2, 1) = a * b;
    expect(2, 2) = b * b;
    CHECK((q - expect).norm() < 1e-12);
  }

  OperatorField wrong = ops.lapQ;
  wrong.order = 1;
  const LocalGeometry g2(h, {0.1, 0.2, 0.3}, 2);
  CHECK_THROWS_AS(symbol_oracle(g2, wrong, 2, RVec::Ones(3)), OrderExceedsOperator);
}

TEST_CASE("holomorphic covectors do not leave Q through its complement") {
  std::mt19937 rng(18);
  std::normal_distribution<double> nd;
  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant",
                           "nonkaehler-hermitian"}) {
    const Scenario s = load_scenario(name, 0);
    for (int i = 1; i <= 100; ++i) {
      const LocalGeometry g(s, halton_point(s, 1 + i % 7, 3), 0);
      const RVec xi = RVec::NullaryExpr(6, [&](Eigen::Index) { return nd(rng); }).head(s.real_dim());
      const CMat p = g.piQ.value();
      const CMat id = CMat::Identity(p.rows(), p.cols());
      const CMat z = p * xi_w_interior(g, xi, DPart::Antiholomorphic) * (id - p) *
                     xi_w_wedge(g, xi, DPart::Holomorphic) * p;
      CHECK(z.norm() < 1e-10);
    }
  }
}

TEST_CASE("hoermander applicability") {
  const Scenario r2 = flat_real(3, "[0,1,2]");
  CHECK(hoermander_applicability(r2, {0.1, 0.2, 0.3}, 20).componentwise);

  const Scenario h = load_scenario("real-heisenberg-contact", 0);
  const auto rep = hoermander_applicability(h, {0.1, 0.2, 0.3}, 20, 1);
  CHECK_FALSE(rep.componentwise);
  CHECK((rep.witness_xi - RVec::Unit(3, 0)).norm() < 1e-14);
  CHECK(std::abs(rep.witness_symbol(0, 0) - 1.0) < 1e-12);
  CHECK(std::abs(rep.witness_symbol(1, 1)) < 1e-12);
  CHECK(hoermander_applicability(h, {0.1, 0.2, 0.3}, 20, 0).componentwise);

  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant"}) {
    const Scenario c = load_scenario(name, 0);
    CHECK_FALSE(hoermander_applicability(c, halton_point(c, 3), 20, -1, {1, 1}).componentwise);
  }
}

TEST_CASE("complex symbol oracle agrees with the closed form") {
  std::mt19937 rng(19);
  std::normal_distribution<double> nd;
  for (const char* name : {"complex-heisenberg-standard", "complex-heisenberg-invariant"}) {
    const Scenario s = load_scenario(name, 0);
    const auto ops = build_characteristic_ops(s);
    for (int i = 1; i <= 3; ++i) {
      const LocalGeometry g(s, halton_point(s, i, 14), 2);
      const RVec xi = RVec::NullaryExpr(6, [&](Eigen::Index) { return nd(rng); });
      CHECK(rel(symbol_oracle(g, ops.lapQ, 2, xi), closed_form_symbols(g, xi).q_lapQ) < 1e-10);
    }
  }
}
