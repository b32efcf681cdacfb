#include "charlap/framedgeom.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>

#include "charlap/errors.hpp"

namespace charlap {

// ---------------------------------------------------------------- scenario

std::vector<int> Scenario::w_indices() const {
  std::vector<int> out = distribution;
  std::sort(out.begin(), out.end());
  if (is_complex()) {
    const int m = frame_size();
    const std::size_t k = out.size();
    for (std::size_t i = 0; i < k; ++i) out.push_back(out[i] + m);
  }
  return out;
}

std::vector<int> Scenario::f_indices() const {
  const std::vector<int> w = w_indices();
  std::vector<int> out;
  for (int k = 0; k < ambient_dim(); ++k)
    if (std::find(w.begin(), w.end(), k) == w.end()) out.push_back(k);
  return out;
}

Ambient Ambient::of(const Scenario& s) {
  Ambient a;
  const int n = s.ambient_dim();
  a.sigma.resize(n);
  if (!s.is_complex()) {
    a.C = CMat::Identity(n, n);
    a.D = CMat::Identity(n, n);
    for (int i = 0; i < n; ++i) a.sigma[i] = i;
    a.Kc = CMat::Identity(lam::size(n), lam::size(n));
    return a;
  }
  const int m = n / 2;
  a.D = CMat::Zero(n, n);
  for (int j = 0; j < m; ++j) {
    a.D(2 * j, j) = 0.5;
    a.D(2 * j + 1, j) = cd(0.0, -0.5);
    a.D(2 * j, m + j) = 0.5;
    a.D(2 * j + 1, m + j) = cd(0.0, 0.5);
    a.sigma[j] = m + j;
    a.sigma[m + j] = j;
  }
  a.C = a.D.inverse();
  a.Kc = CMat::Zero(lam::size(n), lam::size(n));
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> img;
    for (int i : lam::indices(mask)) img.push_back(a.sigma[i]);
    int inv = 0;
    unsigned target = 0;
    for (std::size_t p = 0; p < img.size(); ++p) {
      target |= 1u << img[p];
      for (std::size_t q = p + 1; q < img.size(); ++q)
        if (img[p] > img[q]) ++inv;
    }
    a.Kc(target, mask) = (inv & 1) ? -1.0 : 1.0;
  }
  return a;
}

std::vector<VectorField> full_frame(const Scenario& s) {
  const int n = s.ambient_dim();
  std::vector<VectorField> out;
  if (!s.is_complex()) {
    for (const auto& row : s.frame) out.push_back(row);
    return out;
  }
  const int m = s.frame_size();
  for (int k = 0; k < m; ++k) {
    VectorField v(n);
    for (int a = 0; a < m; ++a) v[a] = s.frame[k][a];
    out.push_back(v);
  }
  for (int k = 0; k < m; ++k) {
    VectorField v(n);
    for (int a = 0; a < m; ++a) v[m + a] = s.frame[k][a].conj();
    out.push_back(v);
  }
  return out;
}

namespace {

CExpr ambient_derivative(const Scenario& s, int a, const CExpr& f) {
  if (!s.is_complex()) return differentiate(f, a);
  const int m = s.frame_size();
  return a < m ? d_dz(f, a) : d_dzbar(f, a - m);
}

}  // namespace

CExpr apply_field(const Scenario& s, const VectorField& x, const CExpr& f) {
  CExpr out;
  for (int a = 0; a < static_cast<int>(x.size()); ++a) {
    if (x[a].is_zero_structural()) continue;
    out += x[a] * ambient_derivative(s, a, f);
  }
  return out;
}

VectorField lie_bracket(const Scenario& s, const VectorField& x, const VectorField& y) {
  VectorField out(x.size());
  for (std::size_t a = 0; a < x.size(); ++a)
    out[a] = apply_field(s, x, y[a]) - apply_field(s, y, x[a]);
  return out;
}

std::vector<std::vector<CExpr>> symbolic_inverse(const std::vector<std::vector<CExpr>>& m) {
  const int n = static_cast<int>(m.size());
  std::vector<std::vector<CExpr>> a = m;
  std::vector<std::vector<CExpr>> inv(n, std::vector<CExpr>(n));
  for (int i = 0; i < n; ++i) inv[i][i] = CExpr(1);
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r) {
      if (a[r][col].is_zero_structural()) continue;
      if (pivot < 0) pivot = r;
      const auto cv = a[r][col].re().constant_value();
      if (cv && a[r][col].im().is_zero_structural()) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) throw FrameNotInvertible("symbolic frame matrix is singular");
    std::swap(a[pivot], a[col]);
    std::swap(inv[pivot], inv[col]);
    const CExpr p = a[col][col];
    for (int c = 0; c < n; ++c) {
      a[col][c] = a[col][c] / p;
      inv[col][c] = inv[col][c] / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || a[r][col].is_zero_structural()) continue;
      const CExpr f = a[r][col];
      for (int c = 0; c < n; ++c) {
        a[r][c] = a[r][c] - f * a[col][c];
        inv[r][c] = inv[r][c] - f * inv[col][c];
      }
    }
  }
  return inv;
}

StructureFunctions structure_functions(const Scenario& s) {
  const auto frame = full_frame(s);
  const int n = static_cast<int>(frame.size());
  std::vector<std::vector<CExpr>> v(n, std::vector<CExpr>(n));
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k) v[a][k] = frame[k][a];
  for (int i = 1; i <= 16; ++i) {
    const auto x = halton_point(s, i);
    CMat vn(n, n);
    for (int a = 0; a < n; ++a)
      for (int k = 0; k < n; ++k) vn(a, k) = evaluate(v[a][k], x);
    if (std::abs(vn.determinant()) < 1e-8)
      throw FrameNotInvertible("frame determinant vanishes near a sampled point");
  }
  const auto vinv = symbolic_inverse(v);
  StructureFunctions out;
  out.c.assign(n, std::vector<std::vector<CExpr>>(n, std::vector<CExpr>(n)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const VectorField br = lie_bracket(s, frame[i], frame[j]);
      for (int k = 0; k < n; ++k) {
        CExpr c;
        for (int a = 0; a < n; ++a)
          if (!br[a].is_zero_structural()) c += vinv[k][a] * br[a];
        out.c[k][i][j] = c;
        out.c[k][j][i] = -c;
      }
    }
  return out;
}

// ---------------------------------------------------------------- jets helpers

namespace {

Jet jet_det(const JetMat& a) {
  const int n = a.rows();
  std::vector<std::vector<Jet>> m(n, std::vector<Jet>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m[r][c] = a.entry(r, c);
  Jet det(a.space(), cd(1.0));
  det = det.truncated(a.valid());
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(m[r][col].value()) > std::abs(m[piv][col].value())) piv = r;
    if (std::abs(m[piv][col].value()) == 0.0) throw DegenerateMetric("singular metric matrix");
    if (piv != col) {
      std::swap(m[piv], m[col]);
      det = -det;
    }
    det = det * m[col][col];
    const Jet inv = m[col][col].inverse();
    for (int r = col + 1; r < n; ++r) {
      const Jet f = m[r][col] * inv;
      for (int c = col; c < n; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return det;
}

int wedge_sign(unsigned i, unsigned j) {
  int inv = 0;
  for (unsigned rest = i; rest; rest &= rest - 1) {
    const int x = std::countr_zero(rest);
    inv += std::popcount(j & ((1u << x) - 1u));
  }
  return (inv & 1) ? -1 : 1;
}

std::vector<int> nonzero_rows(const JetMat& a) {
  std::vector<int> out;
  for (int r = 0; r < a.rows(); ++r) {
    for (int m = 0; m < a.space()->size_upto(a.valid()); ++m)
      if (a[m](r, 0) != 0.0) {
        out.push_back(r);
        break;
      }
  }
  return out;
}

}  // namespace

JetMat wedge_jet(const JetMat& a, const JetMat& b) {
  const JetSpacePtr& sp = a.space();
  JetMat out(sp, a.rows(), 1);
  out.set_valid(std::min(a.valid(), b.valid()));
  const auto ra = nonzero_rows(a), rb = nonzero_rows(b);
  const int n = sp->size_upto(out.valid());
  for (int m = 0; m < n; ++m)
    for (const auto& t : sp->products_into(m))
      for (int i : ra) {
        const cd ai = a[t.left](i, 0);
        if (ai == 0.0) continue;
        for (int j : rb) {
          if (static_cast<unsigned>(i) & static_cast<unsigned>(j)) continue;
          const cd bj = b[t.right](j, 0);
          if (bj == 0.0) continue;
          out[m](i | j, 0) += double(wedge_sign(i, j)) * ai * bj;
        }
      }
  return out;
}

JetMat constant_section(const JetSpacePtr& sp, const CVec& v) {
  return JetMat(sp, CMat(v));
}

// ---------------------------------------------------------------- local geometry

LocalGeometry::LocalGeometry(const Scenario& s, std::vector<double> x, int lam_order,
                             bool enforce_rank)
    : s_(&s), x_(std::move(x)), n_(s.ambient_dim()), lam_order_(lam_order) {
  if (static_cast<int>(x_.size()) != s.real_dim())
    throw std::invalid_argument("point dimension does not match the chart");
  sp_ = JetSpace::get(s.real_dim(), lam_order + 1);
  amb_ = Ambient::of(s);
  for (int i = 0; i < s.real_dim(); ++i) coords_.push_back(Jet::variable(sp_, i, x_[i]));
  build_frame();
  build_metric();
  build_projectors(enforce_rank);
  build_q_basis();
}

Jet LocalGeometry::E(int a, const Jet& u) const {
  Jet out(sp_, cd(0.0));
  out = out.truncated(u.valid() - 1);
  for (int i = 0; i < s_->real_dim(); ++i) {
    const cd d = amb_.D(i, a);
    if (d == 0.0) continue;
    out += u.derivative(i) * d;
  }
  return out;
}

JetMat LocalGeometry::E(int a, const JetMat& u) const {
  JetMat out(sp_, u.rows(), u.cols());
  out.set_valid(u.valid() - 1);
  for (int i = 0; i < s_->real_dim(); ++i) {
    const cd d = amb_.D(i, a);
    if (d == 0.0) continue;
    out += u.derivative(i) * d;
  }
  return out;
}

void LocalGeometry::build_frame() {
  const auto frame = full_frame(*s_);
  V = JetMat(sp_, n_, n_);
  for (int k = 0; k < n_; ++k)
    for (int a = 0; a < n_; ++a) {
      if (frame[k][a].is_zero_structural()) continue;
      V.set_entry(a, k, CompiledCExpr(frame[k][a]).jet(coords_));
    }
  try {
    Vinv = V.inverse();
  } catch (const DegenerateMetric&) {
    throw FrameNotInvertible("frame is singular at the point");
  }
  if (std::abs(V.value().determinant()) < 1e-8)
    throw FrameNotInvertible("frame determinant below 1e-8 at the point");
}

void LocalGeometry::build_metric() {
  const int m = s_->is_complex() ? s_->frame_size() : n_;
  auto gram_jet = [&]() {
    JetMat g(sp_, m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        if (!s_->gram[i][j].is_zero_structural())
          g.set_entry(i, j, CompiledCExpr(s_->gram[i][j]).jet(coords_));
    return g;
  };
  auto hermitian_block = [&](const JetMat& h) {
    JetMat full(sp_, n_, n_);
    for (int k = 0; k < sp_->size(); ++k) {
      full[k].block(0, m, m, m) = h[k];
      full[k].block(m, 0, m, m) = h[k].transpose();
    }
    full.set_valid(h.valid());
    return full;
  };
  JetMat gamma;
  switch (s_->metric) {
    case MetricKind::FrameOrthonormal:
      if (s_->is_complex()) {
        gamma = hermitian_block(JetMat(sp_, CMat(CMat::Identity(m, m))));
      } else {
        gamma = JetMat(sp_, CMat(CMat::Identity(n_, n_)));
      }
      G = Vinv.transpose() * gamma * Vinv;
      break;
    case MetricKind::FrameGram:
      gamma = s_->is_complex() ? hermitian_block(gram_jet()) : gram_jet();
      G = Vinv.transpose() * gamma * Vinv;
      break;
    case MetricKind::CoordinateGram:
      G = s_->is_complex() ? hermitian_block(gram_jet()) : gram_jet();
      break;
  }
  CMat swap = CMat::Zero(n_, n_);
  for (int a = 0; a < n_; ++a) swap(a, amb_.sigma[a]) = 1.0;
  Hv = swap.transpose() * G;
  const CMat h0 = Hv.value();
  if ((h0 - h0.adjoint()).norm() > 1e-9 * (1.0 + h0.norm()))
    throw DegenerateMetric("metric is not Hermitian at the point");
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (h0 + h0.adjoint()));
  if (es.eigenvalues().minCoeff() <= 1e-12)
    throw DegenerateMetric("metric is not positive definite at the point");
  M1 = Hv.conj().inverse();
  const JetMat coord_metric = amb_.C.transpose() * G * amb_.C;
  rho = jet_det(coord_metric).sqrt();
}

JetMat LocalGeometry::coframe_form(int k) const {
  JetMat out(sp_, n_, 1);
  for (int m = 0; m < sp_->size(); ++m) out[m] = Vinv[m].row(k).transpose();
  out.set_valid(Vinv.valid());
  return out;
}

JetMat LocalGeometry::w_coframe(int k) const { return pW * coframe_form(k); }

JetMat LocalGeometry::one_form_to_lambda(const JetMat& alpha) const {
  JetMat out(sp_, lam::size(n_), 1);
  for (int m = 0; m < sp_->size(); ++m)
    for (int a = 0; a < n_; ++a) out[m](1u << a, 0) = alpha[m](a, 0);
  out.set_valid(alpha.valid());
  return out;
}

JetMat LocalGeometry::d_one_form(const JetMat& alpha) const {
  JetMat out(sp_, lam::size(n_), 1);
  out.set_valid(alpha.valid() - 1);
  std::vector<Jet> comp(n_);
  for (int a = 0; a < n_; ++a) comp[a] = alpha.entry(a, 0);
  for (int a = 0; a < n_; ++a)
    for (int b = a + 1; b < n_; ++b) {
      const Jet c = E(a, comp[b]) - E(b, comp[a]);
      for (int m = 0; m < sp_->size(); ++m) out[m]((1u << a) | (1u << b), 0) = c[m];
    }
  return out;
}

void LocalGeometry::build_projectors(bool enforce_rank) {
  const auto w = s_->w_indices();
  const auto f = s_->f_indices();
  const JetMat vs = V.cols_subset(w);
  const JetMat vsh = vs.adjoint();
  PW = vs * (vsh * Hv * vs).inverse() * vsh * Hv;
  pW = PW.transpose();
  piW = lam::compound(pW.truncated(lam_order_));
  M = lam::compound(M1.truncated(lam_order_));
  Minv = lam::compound(Hv.conj().truncated(lam_order_));

  const int r = static_cast<int>(w.size());
  std::vector<JetMat> alpha;
  for (int k : w) alpha.push_back(one_form_to_lambda(w_coframe(k)));
  std::vector<JetMat> omega(1u << r);
  std::vector<int> omega_grade(1u << r);
  omega[0] = constant_section(sp_, CVec::Unit(lam::size(n_), 0));
  for (unsigned j = 1; j < (1u << r); ++j) {
    const int i = std::countr_zero(j);
    omega[j] = wedge_jet(alpha[i], omega[j ^ (1u << i)]);
    omega_grade[j] = std::popcount(j);
  }
  std::vector<JetMat> cols;
  std::vector<int> col_grade;
  for (int fk : f) {
    const JetMat gamma = piW * d_one_form(coframe_form(fk)).truncated(lam_order_);
    for (unsigned j = 0; j < (1u << r); ++j) {
      cols.push_back(wedge_jet(gamma, omega[j].truncated(lam_order_)));
      col_grade.push_back(omega_grade[j]);
    }
  }
  phi_rank.assign(std::max(r - 1, 1), 0);
  const CMat m0 = M.value();
  Eigen::LLT<CMat> llt(0.5 * (m0 + m0.adjoint()));
  const CMat lh = llt.matrixL().adjoint();
  int rank = 0;
  std::vector<int> selected;
  if (!cols.empty()) {
    CMat s0(lam::size(n_), cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) s0.col(c) = cols[c].value().col(0);
    const CMat t = lh * s0;
    for (int k = 0; k < static_cast<int>(phi_rank.size()); ++k) {
      std::vector<int> idx;
      for (std::size_t c = 0; c < cols.size(); ++c)
        if (col_grade[c] == k) idx.push_back(static_cast<int>(c));
      CMat sub(t.rows(), idx.size());
      for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = t.col(idx[c]);
      phi_rank[k] = idx.empty() ? 0 : numeric_rank(sub);
    }
    rank = numeric_rank(t);
    Eigen::ColPivHouseholderQR<CMat> qr(t);
    for (int c = 0; c < rank; ++c) selected.push_back(qr.colsPermutation().indices()[c]);
    std::sort(selected.begin(), selected.end());
  }
  if (enforce_rank && !s_->phi_ranks.empty() && phi_rank != s_->phi_ranks)
    throw RankDrop("φ-rank at the point differs from the scenario majority rank");
  if (rank == 0) {
    PFphi = JetMat(sp_, lam::size(n_), lam::size(n_));
    PFphi.set_valid(lam_order_);
    Bphi = JetMat(sp_, lam::size(n_), 0);
  } else {
    std::vector<JetMat> chosen;
    for (int c : selected) chosen.push_back(cols[c]);
    Bphi = JetMat::hcat(chosen);
    const JetMat bh = Bphi.adjoint();
    const JetMat bhm = bh * M;
    PFphi = Bphi * (bhm * Bphi).inverse() * bhm;
  }
  piQ = piW - PFphi;
}

void LocalGeometry::build_q_basis() {
  const auto w = s_->w_indices();
  const int r = static_cast<int>(w.size());
  const CMat pw = pW.value();
  const CMat vinv = Vinv.value();
  std::vector<CVec> alpha;
  for (int k : w) {
    CVec a = CVec::Zero(lam::size(n_));
    const CVec one = pw * vinv.row(k).transpose();
    for (int b = 0; b < n_; ++b) a[1u << b] = one[b];
    alpha.push_back(a);
  }
  std::vector<std::pair<int, unsigned>> order;
  for (unsigned j = 0; j < (1u << r); ++j) order.push_back({std::popcount(j), j});
  std::sort(order.begin(), order.end());
  CMat cand(lam::size(n_), order.size());
  std::vector<int> grade;
  std::vector<std::pair<int, int>> bideg;
  const int m = s_->is_complex() ? s_->frame_size() : -1;
  for (std::size_t c = 0; c < order.size(); ++c) {
    const unsigned j = order[c].second;
    CVec v = CVec::Unit(lam::size(n_), 0);
    int p = 0, q = 0;
    for (int i = r - 1; i >= 0; --i)
      if (j & (1u << i)) {
        CVec one(n_);
        for (int b = 0; b < n_; ++b) one[b] = alpha[i][1u << b];
        v = lam::wedge_matrix(one) * v;
        if (m >= 0 && w[i] >= m) ++q;
        else ++p;
      }
    cand.col(c) = piQ.value() * v;
    grade.push_back(order[c].first);
    bideg.push_back({p, q});
  }
  std::vector<int> kept;
  q_basis = gram_schmidt(cand, M.value(), 1e-9, &kept);
  q_grade.clear();
  q_bidegree.clear();
  for (int k : kept) {
    q_grade.push_back(grade[k]);
    q_bidegree.push_back(bideg[k]);
  }
}

// ---------------------------------------------------------------- fiber data

std::vector<int> FiberData::q_dims() const {
  const int n = static_cast<int>(std::log2(pi_Q.rows()) + 0.5);
  std::vector<int> d(n + 1, 0);
  for (int g : q_grade) ++d[g];
  return d;
}

FiberData fiber_projectors(const Scenario& s, const std::vector<double>& x) {
  LocalGeometry g(s, x, 0);
  FiberData fd;
  fd.point = x;
  const auto w = s.w_indices();
  const auto f = s.f_indices();
  const CMat hv = g.Hv.value();
  const CMat v = g.V.value();
  CMat vs(v.rows(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) vs.col(i) = v.col(w[i]);
  fd.w_basis = gram_schmidt(vs, hv);
  const CMat pn = CMat::Identity(v.rows(), v.cols()) - g.PW.value();
  CMat ns(v.rows(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) ns.col(i) = pn * v.col(f[i]);
  fd.n_basis = gram_schmidt(ns, hv);
  const CMat vinv = g.Vinv.value();
  CMat fs(v.rows(), f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fs.col(i) = vinv.row(f[i]).transpose();
  fd.f_basis = gram_schmidt(fs, g.M1.value());
  fd.phi_rank = g.phi_rank;
  fd.pi_W = g.piW.value();
  fd.pi_Fphi = g.PFphi.value();
  fd.pi_Fperp = g.piQ.value();
  fd.pi_Q = g.piQ.value();
  fd.lambda_gram = g.M.value();
  fd.q_basis = g.q_basis;
  fd.q_grade = g.q_grade;
  fd.q_bidegree = g.q_bidegree;
  return fd;
}

// ---------------------------------------------------------------- φ map

namespace {

// Wedge in Λ(C^r) over bitmask bases.
CVec small_wedge(const CVec& a, const CVec& b) {
  CVec out = CVec::Zero(a.size());
  for (unsigned i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (unsigned j = 0; j < b.size(); ++j) {
      if ((i & j) || b[j] == 0.0) continue;
      out[i | j] += double(wedge_sign(i, j)) * a[i] * b[j];
    }
  }
  return out;
}

}  // namespace

CMat phi_map(const Scenario& s, const std::vector<double>& x, int k, bool via_brackets) {
  LocalGeometry g(s, x, 0, false);
  const auto w = s.w_indices();
  const auto f = s.f_indices();
  const int r = static_cast<int>(w.size());
  const int n = s.ambient_dim();
  const auto in_masks = lam::masks_of_grade(r, k);
  const auto out_masks = lam::masks_of_grade(r, k + 2);
  CMat out = CMat::Zero(out_masks.size(), f.size() * in_masks.size());
  if (out_masks.empty() || f.empty()) return out;
  const CMat v = g.V.value();
  const CMat vinv = g.Vinv.value();
  std::vector<std::vector<CExpr>> brackets;
  std::vector<VectorField> frame;
  if (via_brackets) frame = full_frame(s);
  for (std::size_t fi = 0; fi < f.size(); ++fi) {
    // 2-form dθ restricted to W, in the basis α^{ab} of Λ^2(C^r)
    CVec c2 = CVec::Zero(lam::size(r));
    if (via_brackets) {
      for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
          const VectorField br = lie_bracket(s, frame[w[a]], frame[w[b]]);
          cd val = 0.0;
          for (int e = 0; e < n; ++e)
            if (!br[e].is_zero_structural()) val += vinv(f[fi], e) * evaluate(br[e], x);
          c2[(1u << a) | (1u << b)] = -val;
        }
    } else {
      const CVec dtheta = g.d_one_form(g.coframe_form(f[fi])).value().col(0);
      for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
          const CVec once = lam::interior_matrix(v.col(w[a])) * dtheta;
          c2[(1u << a) | (1u << b)] = (lam::interior_matrix(v.col(w[b])) * once)[0];
        }
    }
    for (std::size_t ji = 0; ji < in_masks.size(); ++ji) {
      CVec beta = CVec::Zero(lam::size(r));
      beta[in_masks[ji]] = 1.0;
      const CVec img = small_wedge(c2, beta);
      for (std::size_t oi = 0; oi < out_masks.size(); ++oi)
        out(oi, fi * in_masks.size() + ji) = img[out_masks[oi]];
    }
  }
  return out;
}

// ---------------------------------------------------------------- brackets

BracketGeneration bracket_generating(const Scenario& s, const std::vector<double>& x,
                                     int max_depth) {
  const auto frame = full_frame(s);
  const int n = s.ambient_dim();
  std::vector<VectorField> level1;
  for (int k : s.w_indices()) level1.push_back(frame[k]);
  auto numeric = [&](const VectorField& v) {
    CVec out(n);
    for (int a = 0; a < n; ++a) out[a] = evaluate(v[a], x);
    return out;
  };
  BracketGeneration res;
  std::vector<CVec> span;
  for (const auto& v : level1) span.push_back(numeric(v));
  auto rank_of = [&]() {
    CMat m(n, span.size());
    for (std::size_t i = 0; i < span.size(); ++i) m.col(i) = span[i];
    return numeric_rank(m);
  };
  std::vector<VectorField> current = level1;
  res.ranks.push_back(rank_of());
  for (int depth = 1;; ++depth) {
    if (res.ranks.back() == n) {
      res.is_bg = true;
      res.step = depth;
      return res;
    }
    if (depth > 1 && res.ranks[depth - 1] == res.ranks[depth - 2]) return res;
    if (depth >= max_depth)
      throw MaxDepthExceeded("bracket ranks still growing at depth " + std::to_string(depth),
                             res.ranks);
    std::vector<VectorField> next;
    for (const auto& a : level1)
      for (const auto& b : current) {
        VectorField br = lie_bracket(s, a, b);
        bool zero = true;
        for (const auto& c : br) zero = zero && c.is_zero_structural();
        if (!zero) next.push_back(std::move(br));
      }
    for (const auto& v : next) span.push_back(numeric(v));
    current = std::move(next);
    res.ranks.push_back(rank_of());
  }
}

// ---------------------------------------------------------------- sampling

std::vector<double> halton_point(const Scenario& s, int index, unsigned seed) {
  static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  const long long idx = index + static_cast<long long>(seed) * 7919;
  std::vector<double> x(s.real_dim());
  for (int d = 0; d < s.real_dim(); ++d) {
    double f = 1.0, u = 0.0;
    long long i = idx;
    while (i > 0) {
      f /= primes[d];
      u += f * static_cast<double>(i % primes[d]);
      i /= primes[d];
    }
    x[d] = s.box[d].first + u * (s.box[d].second - s.box[d].first);
  }
  return x;
}

RankAudit constant_rank_audit(const Scenario& s, int sample_count, unsigned seed) {
  RankAudit audit;
  audit.samples = sample_count;
  std::vector<std::vector<double>> pts;
  std::vector<std::vector<int>> ranks;
  std::map<std::vector<int>, int> counts;
  for (int i = 1; i <= sample_count; ++i) {
    const auto x = halton_point(s, i, seed);
    LocalGeometry g(s, x, 0, false);
    pts.push_back(x);
    ranks.push_back(g.phi_rank);
    ++counts[g.phi_rank];
  }
  int best = -1;
  for (const auto& [r, c] : counts)
    if (c > best) {
      best = c;
      audit.majority = r;
    }
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (ranks[i] != audit.majority) {
      audit.outliers.push_back(pts[i]);
      audit.outlier_ranks.push_back(ranks[i]);
    }
  return audit;
}

// ---------------------------------------------------------------- numerics

int numeric_rank(const CMat& a, double tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(a);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > tol) ++r;
  return r;
}

CMat gram_schmidt(const CMat& cols, const CMat& m, double tol, std::vector<int>* kept) {
  std::vector<CVec> basis;
  if (kept) kept->clear();
  for (int c = 0; c < cols.cols(); ++c) {
    CVec v = cols.col(c);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) v -= b.dot(m * v) * b;
    const double nrm = std::sqrt(std::max(0.0, v.dot(m * v).real()));
    if (nrm < tol) continue;
    basis.push_back(v / nrm);
    if (kept) kept->push_back(c);
  }
  CMat out(cols.rows(), basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) out.col(i) = basis[i];
  return out;
}

}  // namespace charlap
