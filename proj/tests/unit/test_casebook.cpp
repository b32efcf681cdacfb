#include <doctest.h>

#include <cmath>

#include "charlap/casebook.hpp"
#include "charlap/errors.hpp"
#include "charlap/quadrature.hpp"
#include "charlap/scenarios.hpp"

using namespace charlap;

namespace {

// Heisenberg frame with a stretched third field, so det F and div X_1 are
// not constant.
const char* kStretched = R"J({
  "coordinates": ["p", "q", "t"],
  "frame": [["1", "0", "q/2"], ["0", "1", "-p/2"], ["0", "0", "1 + p*p/4"]],
  "metric": "frame-orthonormal",
  "distribution": [0, 1],
  "box": [[-1, 1], [-1, 1], [-1, 1]]
})J";

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::complex<double> brute(const TensorGrid& grid, const CExpr& a, const CExpr& b) {
  const CompiledCExpr fa(a), fb(b);
  std::complex<double> sum = 0.0;
  std::vector<double> x;
  double w = 0.0;
  for (long k = 0; k < grid.size(); ++k) {
    grid.node(k, x, w);
    sum += w * fa(x.data()) * std::conj(fb(x.data()));
  }
  return sum;
}

}  // namespace

TEST_CASE("axis-by-axis rule equals the tensor grid") {
  const std::vector<std::pair<double, double>> box = {{-0.5, 0.7}, {0.1, 0.9}, {-1.0, 1.0}};
  const Expr x = Expr::coord(0), y = Expr::coord(1), z = Expr::coord(2);
  const CExpr a(Expr::exp(x + Expr(2) * y) * Expr::sin(z) + x * x * y,
                Expr::leaf("absRe", x - Expr(Rational(1, 4))) * Expr::cos(y));
  const CExpr b(bump_expr({0.1, 0.5, 0.0}, 0.4) * (Expr(1) + z), x * y * z);
  for (int n : {3, 5, 8}) {
    CAPTURE(n);
    SeparableRule rule(box, n);
    const auto sa = rule.split(a), sb = rule.split(b);
    REQUIRE(sa);
    REQUIRE(sb);
    const TensorGrid grid(box, n);
    const auto want = brute(grid, a, b);
    CHECK(std::abs(rule.inner(*sa, *sb) - want) < 1e-12 * (1.0 + std::abs(want)));
    const auto one = rule.split(CExpr(1));
    REQUIRE(one);
    const auto ia = brute(grid, a, CExpr(1));
    CHECK(std::abs(rule.integrate(*sa) - ia) < 1e-12 * (1.0 + std::abs(ia)));
  }
  SeparableRule rule(box, 4);
  CHECK_FALSE(rule.split(CExpr(Expr::sin(x * y))).has_value());
  CHECK_FALSE(rule.split(CExpr(Expr::exp(x * y))).has_value());
}

TEST_CASE("witness recipes") {
  const Scenario real = load_scenario("real-heisenberg-contact", 20);
  const WeakHarmonicWitness r = build_witness(real, WitnessKind::RealDegree1);
  CHECK(r.degree == 1);
  CHECK(r.tests.degree == 0);
  CHECK(r.invariant == "q");
  CHECK(r.flow_axis == 0);
  CHECK(r.divergence.is_zero_structural());
  CHECK(transport_weight(r, {0.3, -0.2, 0.1}) == doctest::Approx(1.0));

  const Scenario std_s = load_scenario("complex-heisenberg-standard", 20);
  const WeakHarmonicWitness c = build_witness(std_s, WitnessKind::ComplexDegree2Standard);
  CHECK(c.degree == 2);
  CHECK(c.invariant == "x");
  CHECK(std::abs(c.combination[0] - 1.0) < 1e-14);
  CHECK(std::abs(c.combination[1]) < 1e-14);

  const Scenario inv_s = load_scenario("complex-heisenberg-invariant", 20);
  const WeakHarmonicWitness v = build_witness(inv_s, WitnessKind::ComplexDegree2Invariant);
  CHECK(v.invariant == "q");
  CHECK(v.flow_axis == 0);

  CHECK_THROWS_AS(build_witness(std_s, WitnessKind::RealDegree1), KindMismatch);
  CHECK_THROWS_AS(build_witness(real, WitnessKind::ComplexDegree2Standard), KindMismatch);
  CHECK_THROWS_AS(build_witness(inv_s, WitnessKind::ComplexDegree2Standard), KindMismatch);
  CHECK_THROWS_AS(build_witness(load_scenario("flat-kaehler", 20),
                                WitnessKind::ComplexDegree2Invariant),
                  KindMismatch);
  CHECK_THROWS_AS(witness_kind_from_string("quadratic"), KindMismatch);
  CHECK(witness_kind_from_string(to_string(WitnessKind::ComplexDegree2Invariant)) ==
        WitnessKind::ComplexDegree2Invariant);
}

TEST_CASE("axis-by-axis pairings equal both node kernels") {
  struct Case {
    const char* name;
    WitnessKind kind;
    int nodes;
  };
  for (const Case& k : {Case{"real-heisenberg-contact", WitnessKind::RealDegree1, 5},
                        Case{"complex-heisenberg-standard", WitnessKind::ComplexDegree2Standard, 3}}) {
    CAPTURE(k.name);
    const Scenario s = load_scenario(k.name, 20);
    for (WeakHarmonicWitness w : {build_witness(s, k.kind)}) {
      for (int control = 0; control < 2; ++control) {
        if (control) w = control_witness(w);
        w.quadrature.nodes = w.quadrature.check_nodes = k.nodes;
        const int trials = s.is_complex() ? 1 : 5;
        const auto r = weak_harmonicity_verify(w, s, trials, 3, 1.0);
        CHECK(r.separable);
        const auto serial = weak_pairings_pointwise(w, s, trials, k.nodes, Kernel::Serial, 3);
        const auto omp = weak_pairings_pointwise(w, s, trials, k.nodes, Kernel::OpenMP, 3);
        CHECK(max_diff(r.pairings, serial) < 1e-10);
        CHECK(max_diff(serial, omp) < 1e-12);
      }
    }
  }
}

TEST_CASE("witnesses are weakly harmonic and controls are not") {
  struct Case {
    const char* name;
    WitnessKind kind;
  };
  for (const Case& k : {Case{"real-heisenberg-contact", WitnessKind::RealDegree1},
                        Case{"complex-heisenberg-standard", WitnessKind::ComplexDegree2Standard},
                        Case{"complex-heisenberg-invariant", WitnessKind::ComplexDegree2Invariant}}) {
    CAPTURE(k.name);
    const Scenario s = load_scenario(k.name, 20);
    const WeakHarmonicWitness w = build_witness(s, k.kind);
    const auto r = weak_harmonicity_verify(w, s, 8);
    CHECK(r.separable);
    CHECK(r.pairings.size() == 8);
    CHECK(r.max_pairing < 1e-6);
    CHECK(r.q_residual < 1e-10);
    const auto c = weak_harmonicity_verify(control_witness(w), s, 8);
    CHECK(c.max_pairing > 1e-2);
    const auto z = weak_harmonicity_verify(zero_witness(w), s, 4);
    CHECK(z.max_pairing == 0.0);
  }
}

TEST_CASE("pairings are deterministic in the seed") {
  const Scenario s = load_scenario("real-heisenberg-contact", 20);
  const WeakHarmonicWitness w = control_witness(build_witness(s, WitnessKind::RealDegree1));
  const auto a = weak_harmonicity_verify(w, s, 6, 11);
  const auto b = weak_harmonicity_verify(w, s, 6, 11);
  const auto c = weak_harmonicity_verify(w, s, 6, 12);
  CHECK(a.pairings == b.pairings);
  CHECK(max_diff(a.pairings, c.pairings) > 1e-6);
}

TEST_CASE("unstable node counts are reported") {
  const Scenario s = load_scenario("real-heisenberg-contact", 20);
  WeakHarmonicWitness w = control_witness(build_witness(s, WitnessKind::RealDegree1));
  w.quadrature.nodes = 3;
  w.quadrature.check_nodes = 6;
  CHECK_THROWS_AS(weak_harmonicity_verify(w, s, 4, 1, 1e-6), QuadratureUnstable);
}

TEST_CASE("transported witness with a non-constant volume") {
  Scenario s = parse_scenario(kStretched);
  s.phi_ranks = constant_rank_audit(s, 4).majority;
  WeakHarmonicWitness w = build_witness(s, WitnessKind::RealDegree1);
  CHECK(w.invariant == "q");
  CHECK_FALSE(w.divergence.is_zero_structural());
  // div X_1 = -(p/2) / (1 + p²/4): the weight is 1 + p²/4 up to a
  // factor constant along orbits.
  const double r0 = transport_weight(w, {0.0, 0.3, 0.2});
  for (double p : {-0.8, -0.3, 0.4, 0.9})
    CHECK(transport_weight(w, {p, 0.3, 0.2}) / r0 == doctest::Approx(1 + p * p / 4).epsilon(1e-8));
  w.quadrature.nodes = w.quadrature.check_nodes = 16;
  const auto r = weak_harmonicity_verify(w, s, 4, 1, 1.0);
  CHECK_FALSE(r.separable);
  CHECK(r.max_pairing < 1e-4);
  CHECK(r.q_residual < 1e-10);
  const auto c = weak_harmonicity_verify(control_witness(w), s, 4, 1, 1.0);
  CHECK(c.max_pairing > 1e-2);
}

TEST_CASE("reports are reproducible") {
  const Scenario s = load_scenario("pfaff-chart", 20);
  ReportOptions opt;
  opt.audit_samples = 20;
  opt.symbol_points = 5;
  opt.checks = {"rank_audit", "structural", "symbol"};
  const std::string a = report_text(run_report(s, opt));
  CHECK(a == report_text(run_report(s, opt)));
  const auto j = nlohmann::json::parse(a);
  CHECK(j["scenario"] == "pfaff-chart");
  CHECK(j["pass"].get<bool>());
  opt.checks = {"no-such-check"};
  CHECK_THROWS_AS(run_report(s, opt), std::invalid_argument);
}
