#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include <Eigen/SVD>

#include "charlap/errors.hpp"
#include "charlap/hermitian.hpp"

namespace charlap {

namespace {

/// π_N[w_j, w_k] for the W part of the orthonormal frame (ambient vectors).
std::vector<std::vector<CVec>> normal_brackets(const LocalGeometry& g, const HermitianFiber& f) {
  const Scenario& s = g.scenario();
  const int dim = g.n();
  std::vector<int> dist(s.distribution.begin(), s.distribution.end());
  std::sort(dist.begin(), dist.end());
  const int n = static_cast<int>(dist.size());
  std::vector<CMat> dv(dim);
  for (int d = 0; d < dim; ++d) dv[d] = g.E(d, g.V).value();
  const CMat& v = g.V.value();
  auto bracket = [&](int a, int b) {
    CVec r = CVec::Zero(dim);
    for (int d = 0; d < dim; ++d) r += v(d, a) * dv[d].col(b) - v(d, b) * dv[d].col(a);
    return r;
  };
  const CMat pn = CMat::Identity(dim, dim) - g.PW.value();
  CMat vw(dim, n);
  for (int a = 0; a < n; ++a) vw.col(a) = v.col(dist[a]);
  const CMat coef = vw.completeOrthogonalDecomposition().solve(f.frame.leftCols(n));
  std::vector<std::vector<CVec>> xb(n, std::vector<CVec>(n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) xb[a][b] = pn * bracket(dist[a], dist[b]);
  std::vector<std::vector<CVec>> out(n, std::vector<CVec>(n, CVec::Zero(dim)));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) out[j][k] += coef(a, j) * coef(b, k) * xb[a][b];
  return out;
}

/// Graded tensor product X ⊗̂ Y in the frame basis (w first, then w̄), X on
/// the holomorphic factor and Y on the antiholomorphic one, both given as
/// operators on the full frame-basis Λ.
CMat graded_tensor(const CMat& x, const CMat& y, int parity_y, int m) {
  const int size = static_cast<int>(x.rows());
  const unsigned hol = (1u << m) - 1;
  CMat out = CMat::Zero(size, size);
  for (unsigned c = 0; c < static_cast<unsigned>(size); ++c) {
    const unsigned h = c & hol, a = c >> m;
    const double sign = (parity_y & std::popcount(h) & 1) ? -1.0 : 1.0;
    for (unsigned h2 = 0; h2 <= hol; ++h2) {
      const cd xv = x(h2, h);
      if (xv == 0.0) continue;
      for (unsigned a2 = 0; a2 <= hol; ++a2) {
        const cd yv = y(a2 << m, a << m);
        if (yv == 0.0) continue;
        out(h2 | (a2 << m), c) += sign * xv * yv;
      }
    }
  }
  return out;
}

}  // namespace

CVec bracket_obstruction(const LocalGeometry& g, const HermitianFiber& f, const RVec& xi, int j) {
  const CVec eta = ambient_covector(g, xi);
  const auto br = normal_brackets(g, f);
  const cd i(0.0, 1.0);
  CVec out = CVec::Zero(lam::size(g.n()));
  for (int k = 0; k < f.n; ++k) {
    const cd c = (eta.transpose() * br[j][k])(0, 0);
    for (int a = 0; a < g.n(); ++a) out[1 << a] += i * c * f.coframe(k, a);
  }
  return out;
}

CMat obstruction_symbol_ambient(const LocalGeometry& g, const HermitianData& h, const RVec& xi,
                                bool with_b_terms) {
  const Scenario& s = g.scenario();
  if (!s.is_complex()) throw NotComplexScenario(s.name + " is not a complex scenario");
  const HermitianFiber f = hermitian_fiber(g, h);
  const int m = f.m, n = f.n, dim = g.n();
  const int size = lam::size(dim);
  const CVec eta = ambient_covector(g, xi);
  const auto br = normal_brackets(g, f);
  std::vector<cd> xw(m);
  for (int l = 0; l < m; ++l) xw[l] = (eta.transpose() * f.frame.col(l))(0, 0);
  std::vector<CMat> wed(2 * m), in(2 * m);
  for (int a = 0; a < 2 * m; ++a) {
    wed[a] = lam::wedge_matrix(f.coframe.row(a).transpose());
    in[a] = lam::interior_matrix(f.frame.col(a));
  }

  CMat k1 = CMat::Zero(size, size);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) {
      cd c = -(eta.transpose() * br[j][k])(0, 0);
      for (int l = 0; l < n; ++l) c += xw[l] * f.torsion[j][k][l];
      if (c != 0.0) k1 += c * in[m + j] * wed[k];
    }
  CMat total = k1;

  if (with_b_terms) {
    const CMat to_frame = lam::compound(CMat(f.frame.transpose()));
    const CMat from_frame = to_frame.inverse();
    auto fr = [&](const CMat& p) { return CMat(to_frame * p * from_frame); };
    CMat xi_w_wedge = CMat::Zero(size, size);
    CVec xi_dual = CVec::Zero(dim);
    for (int l = 0; l < n; ++l) {
      xi_w_wedge += xw[l] * wed[l];
      xi_dual += xw[l] * f.frame.col(m + l);
    }
    const CMat i_xi = lam::interior_matrix(xi_dual);
    const CMat pf = g.PFphi.value();
    CMat k23 = CMat::Zero(size, size);
    for (int j = 0; j < n; ++j) {
      const SecondFundamentalForms sff = second_fundamental(g, f.frame.col(m + j));
      k23 += graded_tensor(fr(sff.Bstar * pf * xi_w_wedge), fr(in[m + j]), 1, m);
      k23 -= graded_tensor(fr(wed[j]), fr(i_xi * conj_operator(g, sff.B)), 1, m);
    }
    total += from_frame * k23 * to_frame;
  }
  const CMat pq = g.piQ.value();
  return cd(0.0, 1.0) * pq * total * pq;
}

CMat obstruction_symbol(const LocalGeometry& g, const HermitianData& h, const RVec& xi) {
  return to_q_basis(g, obstruction_symbol_ambient(g, h, xi, true));
}

CMat obstruction_bracket_term(const LocalGeometry& g, const HermitianData& h, const RVec& xi) {
  return to_q_basis(g, obstruction_symbol_ambient(g, h, xi, false));
}

std::vector<RVec> normal_covectors(const LocalGeometry& g) {
  const Scenario& s = g.scenario();
  const auto wi = s.w_indices();
  const int dim = g.n();
  const CMat dw = g.ambient().D * g.V.value()(Eigen::all, wi);
  Eigen::MatrixXd sys(2 * dw.cols(), dim);
  sys << dw.real().transpose(), dw.imag().transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int k = 0; k < sv.size(); ++k)
    if (sv[k] > 1e-9 * std::max(1.0, sv[0])) ++rank;
  std::vector<RVec> out;
  for (int k = rank; k < dim; ++k) out.push_back(svd.matrixV().col(k));
  return out;
}

InvolutivityVerdict involutivity_verdict(const Scenario& s, int sample_points, unsigned seed) {
  if (!s.is_complex()) throw NotComplexScenario(s.name + " is not a complex scenario");
  InvolutivityVerdict r;
  const StructureFunctions sf = structure_functions(s);
  const auto wi = s.w_indices();
  for (int a : s.distribution)
    for (int b : s.distribution)
      for (int k = 0; k < static_cast<int>(sf.c.size()); ++k) {
        if (std::find(wi.begin(), wi.end(), k) != wi.end()) continue;
        if (is_zero(sf.c[k][a][b]) != Tri::Yes) r.involutive = false;
      }

  const HermitianData h = hermitian_data(s);
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (int p = 1; p <= sample_points; ++p) {
    const auto x = halton_point(s, p, seed);
    const LocalGeometry g(s, x, 1);
    const auto basis = normal_covectors(g);
    if (basis.empty()) continue;
    std::vector<RVec> xis = basis;
    for (int t = 0; t < 8; ++t) {
      RVec v = RVec::Zero(g.n());
      for (const RVec& b : basis) v += nd(rng) * b;
      xis.push_back(v / v.norm());
    }
    const HermitianFiber f = hermitian_fiber(g, h);
    for (const RVec& xi : xis) {
      const double v = obstruction_symbol(g, h, xi).norm();
      if (v <= r.max_obstruction) continue;
      r.max_obstruction = v;
      r.witness_point = x;
      r.witness_xi = xi;
      double best = -1.0;
      for (int j = 0; j < f.n; ++j) {
        const double bj = bracket_obstruction(g, f, xi, j).norm();
        if (bj > best) {
          best = bj;
          r.witness_j = j;
        }
      }
    }
  }
  r.bigrading_preserved = r.max_obstruction < 1e-9;
  return r;
}

}  // namespace charlap
