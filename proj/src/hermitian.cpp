#include "charlap/hermitian.hpp"

#include <algorithm>
#include <bit>
#include <map>

#include "charlap/errors.hpp"

namespace charlap {

namespace {

void require_complex(const Scenario& s) {
  if (!s.is_complex()) throw NotComplexScenario(s.name + " is not a complex scenario");
}

}  // namespace

std::vector<std::vector<CExpr>> frame_gram(const Scenario& s) {
  const int m = s.frame_size();
  std::vector<std::vector<CExpr>> h(m, std::vector<CExpr>(m));
  switch (s.metric) {
    case MetricKind::FrameOrthonormal:
      for (int j = 0; j < m; ++j) h[j][j] = CExpr(1);
      break;
    case MetricKind::FrameGram:
      h = s.gram;
      break;
    case MetricKind::CoordinateGram:
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) {
              if (s.frame[j][a].is_zero_structural() || s.frame[k][b].is_zero_structural() ||
                  s.gram[a][b].is_zero_structural())
                continue;
              h[j][k] += s.frame[j][a] * s.gram[a][b] * s.frame[k][b].conj();
            }
      break;
  }
  return h;
}

DolbeaultPair dolbeault_split(const Form& a, const Scenario& s) {
  require_complex(s);
  const Form f = a.coframe().real_of_complex ? to_complex_coordinates(a) : a;
  if (f.coframe().holomorphic < 0)
    throw CoframeMismatch("Dolbeault split needs a bigraded coframe, got " + f.coframe().name);
  DolbeaultPair r{Form(f.coframe()), Form(f.coframe())};
  for (const auto& [type, part] : bidegree_split(f)) {
    for (const auto& [t, piece] : bidegree_split(exterior_d(part, s))) {
      if (t == std::make_pair(type.first + 1, type.second)) {
        r.del += piece;
      } else if (t == std::make_pair(type.first, type.second + 1)) {
        r.delbar += piece;
      } else {
        throw std::logic_error("exterior derivative left the (p+1,q) + (p,q+1) types");
      }
    }
  }
  return r;
}

HermitianData hermitian_data(const Scenario& s) {
  require_complex(s);
  const int m = s.frame_size();
  const Coframe cf = frame_coframe(s);
  const auto h = frame_gram(s);
  const auto wi = s.w_indices();
  auto in_w = [&](int k) { return std::find(wi.begin(), wi.end(), k) != wi.end(); };
  HermitianData r{Form(cf), Form(cf), Form(cf), {}};
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k) {
      if (h[j][k].is_zero_structural()) continue;
      const Form t = Form::basis(cf, {j, m + k}, CExpr::i() * h[j][k]);
      r.theta += t;
      if (in_w(j) && in_w(m + k)) r.theta_w += t;
    }
  const auto split = bidegree_split(exterior_d(r.theta, s));
  auto it = split.find({2, 1});
  if (it != split.end()) r.del_theta = it->second;
  r.torsion.assign(m, std::vector<std::vector<CExpr>>(m, std::vector<CExpr>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const CExpr c = r.del_theta.coef((1u << i) | (1u << j) | (1u << (m + k)));
        if (c.is_zero_structural()) continue;
        r.torsion[i][j][k] = CExpr(Expr(static_cast<long>(kTorsionScale.real())),
                                    Expr(static_cast<long>(kTorsionScale.imag()))) *
                              c;
        r.torsion[j][i][k] = -r.torsion[i][j][k];
      }
  return r;
}

// ---------------------------------------------------------------- fiber algebra

CMat form_wedge_matrix(const CVec& a) {
  const int size = static_cast<int>(a.size());
  const int n = std::countr_zero(static_cast<unsigned>(size));
  CMat out = CMat::Zero(size, size);
  for (unsigned am = 0; am < static_cast<unsigned>(size); ++am) {
    if (a[am] == 0.0) continue;
    for (unsigned c = 0; c < static_cast<unsigned>(size); ++c) {
      if (am & c) continue;
      // Sign of e^{am} ∧ e^{c} against the sorted basis e^{am|c}.
      int swaps = 0;
      for (int i = 0; i < n; ++i)
        if (am & (1u << i)) swaps += std::popcount(c & ((1u << i) - 1));
      out(am | c, c) += (swaps & 1 ? -1.0 : 1.0) * a[am];
    }
  }
  return out;
}

cd evaluate_form(const CVec& a, const std::vector<CVec>& vectors) {
  CVec v = a;
  for (const CVec& u : vectors) v = lam::interior_matrix(u) * v;
  return v[0];
}

CMat conj_operator(const LocalGeometry& g, const CMat& p) {
  const CMat& kc = g.ambient().Kc;
  return kc * p.conjugate() * kc.inverse();
}

CMat fiber_adjoint(const LocalGeometry& g, const CMat& p) {
  return g.Minv.value() * p.adjoint() * g.M.value();
}

CMat supercommutator(const CMat& a, int parity_a, const CMat& b, int parity_b) {
  return a * b - ((parity_a * parity_b) & 1 ? -1.0 : 1.0) * (b * a);
}

HermitianFiber hermitian_fiber(const LocalGeometry& g, const HermitianData& h) {
  const Scenario& s = g.scenario();
  require_complex(s);
  HermitianFiber f;
  f.m = s.frame_size();
  f.n = static_cast<int>(s.distribution.size());
  const int m = f.m;
  const int dim = g.n();
  // Holomorphic frame fields, W first, orthonormalized for <u,v> = vᴴ Hv u.
  std::vector<int> order(s.distribution.begin(), s.distribution.end());
  std::sort(order.begin(), order.end());
  for (int k = 0; k < m; ++k)
    if (std::find(order.begin(), order.end(), k) == order.end()) order.push_back(k);
  CMat cols(dim, m);
  for (int c = 0; c < m; ++c) cols.col(c) = g.V.value().col(order[c]);
  const CMat w = gram_schmidt(cols, g.Hv.value());
  if (w.cols() != m) throw DegenerateMetric("holomorphic frame degenerate at a sample point");
  const auto& sigma = g.ambient().sigma;
  f.frame = CMat(dim, 2 * m);
  for (int j = 0; j < m; ++j) {
    f.frame.col(j) = w.col(j);
    CVec wb(dim);
    for (int a = 0; a < dim; ++a) wb[sigma[a]] = std::conj(w(a, j));
    f.frame.col(m + j) = wb;
  }
  f.coframe = f.frame.inverse();

  f.del_theta = section_from_form(g, h.del_theta).value().col(0);
  const int size = lam::size(dim);
  const cd i(0.0, 1.0);
  f.L = CMat::Zero(size, size);
  f.Lambda = CMat::Zero(size, size);
  f.LW = CMat::Zero(size, size);
  f.LambdaW = CMat::Zero(size, size);
  for (int j = 0; j < m; ++j) {
    const CMat l = i * lam::wedge_matrix(f.coframe.row(j).transpose()) *
                   lam::wedge_matrix(f.coframe.row(m + j).transpose());
    const CMat lam_j = -i * lam::interior_matrix(f.frame.col(m + j)) *
                       lam::interior_matrix(f.frame.col(j));
    f.L += l;
    f.Lambda += lam_j;
    if (j < f.n) {
      f.LW += l;
      f.LambdaW += lam_j;
    }
  }
  const CMat piw = g.piW.value();
  f.LW = f.LW * piw;
  f.LambdaW = f.LambdaW * piw;
  const CMat dt = form_wedge_matrix(f.del_theta);
  f.T = supercommutator(f.Lambda, 0, dt, 1);
  const CMat dtw = form_wedge_matrix(piw * f.del_theta) * piw;
  f.TW = supercommutator(f.LambdaW, 0, dtw, 1);

  f.torsion.assign(m, std::vector<std::vector<cd>>(m, std::vector<cd>(m)));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        f.torsion[a][b][c] =
            kTorsionScale *
            evaluate_form(f.del_theta, {f.frame.col(a), f.frame.col(b), f.frame.col(m + c)});
  return f;
}

CMat torsion_operator_expansion(const HermitianFiber& f) {
  const int m = f.m;
  const int size = static_cast<int>(f.L.rows());
  const cd i(0.0, 1.0);
  std::vector<CMat> wed(2 * m), in(2 * m);
  for (int a = 0; a < 2 * m; ++a) {
    wed[a] = lam::wedge_matrix(f.coframe.row(a).transpose());
    in[a] = lam::interior_matrix(f.frame.col(a));
  }
  CMat t = CMat::Zero(size, size);
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) {
        const cd c = evaluate_form(f.del_theta, {f.frame.col(j), f.frame.col(k),
                                                 f.frame.col(m + l)});
        if (std::abs(c) < 1e-300) continue;
        CMat term = 2.0 * wed[k] * wed[m + l] * in[m + j] - wed[j] * wed[k] * in[l];
        if (j == l) term -= 2.0 * wed[k];
        t += c * term;
      }
  return -0.5 * i * t;
}

CMat torsion_symbol(const HermitianFiber& f, const CVec& eta) {
  const cd i(0.0, 1.0);
  CMat out = CMat::Zero(f.T.rows(), f.T.cols());
  for (int j = 0; j < f.m; ++j) {
    const cd xw = (eta.transpose() * f.frame.col(j))(0, 0);
    if (xw == 0.0) continue;
    out += xw * supercommutator(lam::interior_matrix(f.frame.col(f.m + j)), 1, f.T, 1);
  }
  return -i * out;
}

CMat torsion_symbol_expansion(const HermitianFiber& f, const CVec& eta) {
  const int m = f.m;
  const cd i(0.0, 1.0);
  CMat out = CMat::Zero(f.T.rows(), f.T.cols());
  for (int a = 0; a < m; ++a) {
    const cd xw = (eta.transpose() * f.frame.col(a))(0, 0);
    if (xw == 0.0) continue;
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        const cd c = evaluate_form(f.del_theta, {f.frame.col(j), f.frame.col(k),
                                                 f.frame.col(m + a)});
        if (c == 0.0) continue;
        out += xw * c * lam::wedge_matrix(f.coframe.row(k).transpose()) *
               lam::interior_matrix(f.frame.col(m + j));
      }
  }
  // σ = −i Σ ξ(w_a) [i_{w̄_a}, 𝒯] with the bracket expanded.
  return -i * i * out;
}

OperatorField torsion_operator_field(const HermitianData& h) {
  OperatorField r;
  r.name = "T";
  r.order = 0;
  r.provenance = "[Lambda, del Theta]";
  r.action = [h](const LocalGeometry& g, const JetMat& u) {
    const JetMat theta = section_from_form(g, h.theta);
    const JetMat dtheta = section_from_form(g, h.del_theta);
    const int size = lam::size(g.n());
    const auto& sp = g.space();
    auto wedge_op = [&](const JetMat& a) {
      JetMat out(sp, size, size);
      out.set_valid(a.valid());
      for (int k = 0; k < sp->size(); ++k) out[k] = form_wedge_matrix(a[k].col(0));
      return out;
    };
    const JetMat l = wedge_op(theta);
    const JetMat lam_op = g.Minv * (l.adjoint() * g.M);
    const JetMat dt = wedge_op(dtheta);
    const JetMat t = lam_op * dt - dt * lam_op;
    return t * u;
  };
  return r;
}

}  // namespace charlap
