#include <cmath>
#include <random>

#include "charlap/errors.hpp"
#include "charlap/hermitian.hpp"

namespace charlap {

namespace {

CMat holomorphic_vector_projector(int dim) {
  CMat p = CMat::Zero(dim, dim);
  for (int a = 0; a < dim / 2; ++a) p(a, a) = 1.0;
  return p;
}

CMat holomorphic_form_projector(int dim) {
  const int size = lam::size(dim);
  CMat p = CMat::Zero(size, size);
  for (int a = 0; a < size; ++a)
    if (lam::bidegree(static_cast<unsigned>(a), dim / 2).second == 0) p(a, a) = 1.0;
  return p;
}

CMat directional(const LocalGeometry& g, const JetMat& field, const CVec& v) {
  CMat out = CMat::Zero(field.rows(), field.cols());
  for (int a = 0; a < v.size(); ++a)
    if (v[a] != 0.0) out += v[a] * g.E(a, field).value();
  return out;
}

JetMat lambda_jet(const LocalGeometry& g, const Form& theta) {
  const JetMat th = section_from_form(g, theta);
  const int size = lam::size(g.n());
  JetMat l(g.space(), size, size);
  l.set_valid(th.valid());
  for (int k = 0; k < g.space()->size(); ++k) l[k] = form_wedge_matrix(th[k].col(0));
  return g.Minv * (l.adjoint() * g.M);
}

}  // namespace

SecondFundamentalForms second_fundamental(const LocalGeometry& g, const CVec& vbar) {
  if (!g.scenario().is_complex()) throw NotComplexScenario("second fundamental forms");
  const int dim = g.n();
  SecondFundamentalForms r;
  const CMat p10 = holomorphic_vector_projector(dim);
  const CMat pw = g.PW.value();
  const CMat pn = CMat::Identity(dim, dim) - pw;
  const CMat dpw = directional(g, g.PW, vbar);
  r.A = p10 * (pw * (-dpw) * pn) * p10;
  const CMat& hv = g.Hv.value();
  r.Astar = hv.inverse() * r.A.adjoint() * hv;

  const CMat hol = holomorphic_form_projector(dim);
  const CMat pf = g.PFphi.value();
  const JetMat fperp = g.piW - g.PFphi;
  r.B = hol * (pf * directional(g, fperp, vbar) * fperp.value()) * hol;
  r.Bstar = fiber_adjoint(g, r.B);
  return r;
}

CMat projector_derivative_fd(const Scenario& s, const std::vector<double>& x, const CVec& vbar,
                             double h) {
  const LocalGeometry g0(s, x, 0, false);
  const CVec c = g0.ambient().D * vbar;
  const int dim = s.real_dim();
  CMat out = CMat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (c[i] == 0.0) continue;
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    const LocalGeometry gp(s, xp, 0, false), gm(s, xm, 0, false);
    out += c[i] * (gp.PW.value() - gm.PW.value()) / (2.0 * h);
  }
  return out;
}

SubKaehlerReport sub_kaehler_residual(const Scenario& s, int sample_points, int sample_forms,
                                      unsigned seed) {
  if (!s.is_complex()) throw NotComplexScenario(s.name + " is not a complex scenario");
  const HermitianData h = hermitian_data(s);
  const cd i(0.0, 1.0);
  const Coframe cf = Coframe::complex_coordinate(s.chart);
  const int dim = s.real_dim();
  SubKaehlerReport r;
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3);
  auto poly = [&]() {
    Expr p(coef(rng));
    for (int v = 0; v < dim; ++v) p = p + Expr(coef(rng)) * Expr::coord(v);
    for (int v = 0; v < dim; ++v)
      if (coef(rng) > 1) p = p + Expr(coef(rng)) * Expr::coord(v) * Expr::coord((v + 1) % dim);
    return p;
  };
  for (int pt = 1; pt <= sample_points; ++pt) {
    const auto x = halton_point(s, pt, seed);
    const LocalGeometry g(s, x, 1);
    const HermitianFiber f = hermitian_fiber(g, h);
    const int m = f.m, n = f.n;
    const JetMat lam_w = lambda_jet(g, h.theta) * g.piW;

    // Correction coefficients c_j = h(w_j, A(w̄_α)w_α) − ⟨T(w_j, w_α), w̄_α⟩.
    const CMat& hv = g.Hv.value();
    std::vector<cd> c(n, 0.0);
    for (int a = n; a < m; ++a) {
      const CMat amat = second_fundamental(g, f.frame.col(m + a)).A;
      const CVec y = amat * f.frame.col(a);
      for (int j = 0; j < n; ++j)
        c[j] += y.dot(hv * f.frame.col(j)) - f.torsion[j][a][a];
    }
    const int size = lam::size(dim);
    CMat corr = CMat::Zero(size, size);
    for (int j = 0; j < n; ++j) corr += c[j] * lam::interior_matrix(f.frame.col(m + j));
    corr = corr * g.piW.value();
    r.correction = std::max(r.correction, corr.norm());
    const CMat tbar_star = fiber_adjoint(g, conj_operator(g, f.TW));

    for (int k = 0; k < sample_forms; ++k) {
      Form a(cf);
      for (unsigned mask = 0; mask < static_cast<unsigned>(size); ++mask)
        if (coef(rng) > 0) a.add(mask, CExpr(poly(), poly()));
      const JetMat u = g.piW * section_from_form(g, a);
      const JetMat del_u = g.piW * apply_dpart(g, u, DPart::Holomorphic);
      const JetMat lam_u = lam_w * u;
      const CVec lhs = (lam_w * del_u).value().col(0) -
                       (g.piW * apply_dpart(g, lam_u, DPart::Holomorphic)).value().col(0);
      const CVec u0 = u.value().col(0);
      const CVec dbs = (g.piW * apply_dpart_adjoint(g, u, DPart::Antiholomorphic)).value().col(0);
      const CVec rhs = i * (dbs + tbar_star * u0) - i * (corr * u0);
      const double res = (lhs - rhs).norm();
      if (res > r.residual || r.worst_point.empty()) {
        r.residual = std::max(res, r.residual);
        r.worst_point = x;
      }
    }
  }
  return r;
}

}  // namespace charlap
