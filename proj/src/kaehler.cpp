#include <cmath>
#include <random>

#include "charlap/errors.hpp"
#include "charlap/hermitian.hpp"
#include "charlap/quadrature.hpp"

namespace charlap {

namespace {

RVec random_unit(std::mt19937& rng, int n) {
  std::normal_distribution<double> nd;
  RVec v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v / v.norm();
}

/// Pure-type bump form with a random polynomial factor.
Form bump_form(const Scenario& s, std::mt19937& rng, std::pair<int, int> type,
               const std::vector<double>& center, double radius) {
  const Coframe cf = Coframe::complex_coordinate(s.chart);
  const int m = s.chart.complex_dim();
  std::vector<unsigned> masks;
  for (unsigned mask = 0; mask < (1u << cf.dim); ++mask)
    if (lam::bidegree(mask, m) == type) masks.push_back(mask);
  std::uniform_int_distribution<int> coef(-3, 3);
  const Expr bump = bump_expr(center, radius);
  Form u(cf);
  for (unsigned mask : masks) {
    const int c0 = coef(rng);
    Expr p(c0 == 0 ? 1 : c0);
    for (int v = 0; v < s.real_dim(); ++v)
      if (coef(rng) > 1) p = p + Expr(coef(rng)) * Expr::coord(v);
    u.add(mask, CExpr(bump * p, Expr(coef(rng)) * bump));
  }
  return u;
}

}  // namespace

double bigrading_defect(const Scenario& s, const Form& u, const std::vector<double>& center,
                        double radius, int nodes) {
  const auto types = bidegree_split(u.coframe().real_of_complex ? to_complex_coordinates(u) : u);
  if (types.size() != 1) throw std::invalid_argument("bigrading_defect needs a pure-type form");
  const auto type = types.begin()->first;
  const int m = s.chart.complex_dim();
  std::vector<std::pair<double, double>> box;
  for (double c : center) box.emplace_back(c - radius, c + radius);
  const TensorGrid grid(box, nodes);
  double off = 0.0, total = 0.0;
#pragma omp parallel for reduction(+ : off, total) schedule(dynamic)
  for (long k = 0; k < grid.size(); ++k) {
    std::vector<double> x;
    double w = 0.0;
    grid.node(k, x, w);
    const LocalGeometry g(s, x, 2, false);
    const JetMat uj = section_from_form(g, u);
    const JetMat lap = apply_dpart(g, apply_dpart_adjoint(g, uj, DPart::Full), DPart::Full) +
                       apply_dpart_adjoint(g, apply_dpart(g, uj, DPart::Full), DPart::Full);
    CVec v = lap.value().col(0);
    const CMat& mm = g.M.value();
    const double weight = w * g.rho.value().real();
    total += weight * v.dot(mm * v).real();
    for (int a = 0; a < v.size(); ++a)
      if (lam::bidegree(static_cast<unsigned>(a), m) == type) v[a] = 0.0;
    off += weight * v.dot(mm * v).real();
  }
  if (total <= 0.0) return 0.0;
  return std::sqrt(off / total);
}

KaehlerReport kaehler_check(const Scenario& s, int sample_forms, int sample_points,
                            int quadrature_nodes, unsigned seed) {
  if (!s.is_complex()) throw NotComplexScenario(s.name + " is not a complex scenario");
  if (static_cast<int>(s.distribution.size()) != s.frame_size())
    throw WrongDistribution("the Kähler diagnostic needs W = TX");
  KaehlerReport r;
  const HermitianData h = hermitian_data(s);
  r.del_theta_zero = h.del_theta.is_zero();

  std::mt19937 rng(seed);
  const int dim = s.real_dim();
  for (int p = 1; p <= sample_points; ++p) {
    const auto x = halton_point(s, p, seed);
    const LocalGeometry g(s, x, 1, false);
    const HermitianFiber f = hermitian_fiber(g, h);
    std::vector<RVec> xis;
    for (int i = 0; i < dim; ++i) xis.push_back(RVec::Unit(dim, i));
    for (int i = 0; i < 8; ++i) xis.push_back(random_unit(rng, dim));
    for (const RVec& xi : xis) {
      const double v = torsion_symbol(f, ambient_covector(g, xi)).norm();
      if (v > r.torsion_symbol_residual || r.symbol_witness_point.empty()) {
        r.torsion_symbol_residual = std::max(v, r.torsion_symbol_residual);
        r.symbol_witness_point = x;
        r.symbol_witness_xi = xi;
      }
    }
  }

  const int m = s.chart.complex_dim();
  std::vector<std::pair<int, int>> types;
  for (int q = 1; q <= m; ++q)
    for (int p = 0; p < m; ++p) types.emplace_back(p, q);
  double width = 1e300;
  for (const auto& [lo, hi] : s.box) width = std::min(width, hi - lo);
  const double radius = 0.25 * width;
  for (int k = 0; k < sample_forms; ++k) {
    auto center = halton_point(s, k + 1, seed + 1);
    for (int i = 0; i < dim; ++i) {
      const double lo = s.box[i].first + radius, hi = s.box[i].second - radius;
      center[i] = lo + (hi - lo) * (center[i] - s.box[i].first) /
                           (s.box[i].second - s.box[i].first);
    }
    const auto type = types[k % types.size()];
    const Form u = bump_form(s, rng, type, center, radius);
    const double v = bigrading_defect(s, u, center, radius, quadrature_nodes);
    if (v > r.bigrading_residual || r.bigrading_witness_center.empty()) {
      r.bigrading_residual = std::max(v, r.bigrading_residual);
      r.bigrading_witness_center = center;
      r.bigrading_witness_type = type;
    }
  }

  r.is_kaehler = r.del_theta_zero;
  const bool a = r.del_theta_zero == Tri::Yes;
  const bool b = r.torsion_symbol_residual < 1e-9;
  const bool c = r.bigrading_residual < 1e-8;
  r.consistent = r.del_theta_zero != Tri::Unknown && a == b && b == c;
  return r;
}

}  // namespace charlap
