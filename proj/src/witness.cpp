#include <algorithm>
#include <cmath>

#include "charlap/casebook.hpp"
#include "charlap/errors.hpp"

namespace charlap {

namespace {

CExpr determinant(const std::vector<std::vector<CExpr>>& a) {
  const int n = static_cast<int>(a.size());
  if (n == 1) return a[0][0];
  CExpr det;
  for (int c = 0; c < n; ++c) {
    if (a[0][c].is_zero_structural()) continue;
    std::vector<std::vector<CExpr>> minor;
    for (int r = 1; r < n; ++r) {
      std::vector<CExpr> row;
      for (int k = 0; k < n; ++k)
        if (k != c) row.push_back(a[r][k]);
      minor.push_back(std::move(row));
    }
    const CExpr term = a[0][c] * determinant(minor);
    det = (c % 2) ? det - term : det + term;
  }
  return det;
}

CExpr constant(std::complex<double> v) { return CExpr(Expr(Rational(v.real())), Expr(Rational(v.imag()))); }

bool is_constant(const CExpr& e) {
  return e.re().constant_value().has_value() && e.im().constant_value().has_value();
}

std::vector<double> identity_point(const Scenario& s) {
  std::vector<double> x(s.real_dim());
  for (int i = 0; i < s.real_dim(); ++i) {
    const auto [lo, hi] = s.box[i];
    x[i] = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : 0.5 * (lo + hi);
  }
  return x;
}

/// Divergence of X for the density of the scenario metric, which must have
/// constant det h.
CExpr divergence(const Scenario& s, const VectorField& x) {
  const int dim = s.real_dim();
  CExpr out;
  for (int a = 0; a < dim; ++a) {
    if (x[a].is_zero_structural()) continue;
    VectorField e(dim);
    e[a] = CExpr(1);
    out += apply_field(s, e, x[a]);
  }
  std::vector<std::vector<CExpr>> f = s.frame;
  const CExpr det_f = determinant(f);
  if (!is_constant(det_f)) {
    // ρ ∝ |det F|^{-2} (complex) or |det F|^{-1} (real).
    out -= apply_field(s, x, det_f) / det_f;
    if (s.is_complex()) out -= apply_field(s, x, det_f.conj()) / det_f.conj();
  }
  return out;
}

/// Vector field X̄ of a holomorphic X (ambient components).
VectorField conj_field(const Scenario& s, const VectorField& x) {
  if (!s.is_complex()) return x;
  const int m = s.chart.complex_dim();
  VectorField out(2 * m);
  for (int a = 0; a < m; ++a) out[m + a] = x[a].conj();
  return out;
}

void require_kind(const Scenario& s, WitnessKind kind) {
  switch (kind) {
    case WitnessKind::RealDegree1:
      if (s.is_complex()) throw KindMismatch("real-degree1 needs a real scenario");
      break;
    case WitnessKind::ComplexDegree2Standard: {
      if (!s.is_complex()) throw KindMismatch("complex witness needs a complex scenario");
      bool standard = s.metric == MetricKind::CoordinateGram;
      for (int a = 0; standard && a < s.frame_size(); ++a)
        for (int b = 0; b < s.frame_size(); ++b)
          if (s.gram[a][b] != CExpr(a == b ? 1 : 0)) standard = false;
      if (!standard) throw KindMismatch(s.name + " does not carry the standard metric");
      break;
    }
    case WitnessKind::ComplexDegree2Invariant: {
      if (!s.is_complex()) throw KindMismatch("complex witness needs a complex scenario");
      const StructureFunctions sf = structure_functions(s);
      for (const auto& ck : sf.c)
        for (const auto& row : ck)
          for (const CExpr& c : row)
            if (!is_constant(c))
              throw KindMismatch(s.name + " has non-constant structure functions");
      break;
    }
  }
  if (s.distribution.empty()) throw KindMismatch("empty distribution");
}

}  // namespace

const char* to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::RealDegree1: return "real-degree1";
    case WitnessKind::ComplexDegree2Standard: return "complex-degree2-standard";
    case WitnessKind::ComplexDegree2Invariant: return "complex-degree2-invariant";
  }
  return "?";
}

WitnessKind witness_kind_from_string(const std::string& name) {
  for (WitnessKind k : {WitnessKind::RealDegree1, WitnessKind::ComplexDegree2Standard,
                        WitnessKind::ComplexDegree2Invariant})
    if (name == to_string(k)) return k;
  throw KindMismatch("unknown witness kind " + name);
}

WeakHarmonicWitness build_witness(const Scenario& s, WitnessKind kind) {
  require_kind(s, kind);
  const bool cplx = s.is_complex();
  WeakHarmonicWitness w;
  w.kind = kind;
  w.degree = cplx ? 2 : 1;
  w.tests.degree = w.degree - 1;
  w.quadrature.box = s.box;
  w.quadrature.periodic = s.periodic;

  const auto e = identity_point(s);
  const FiberData fd = fiber_projectors(s, e);
  const auto qd = fd.q_dims();
  if (qd[w.degree] == 0) throw KindMismatch("Q has no forms of the witness degree");
  if (w.degree + 1 < static_cast<int>(qd.size()) && qd[w.degree + 1] != 0)
    throw KindMismatch("Q is not zero above the witness degree");

  const auto h = frame_gram(s);
  if (!is_constant(determinant(h))) throw KindMismatch("det h is not constant");

  // X_1: the zero-divergence combination of the first two W fields at e.
  std::vector<int> dist(s.distribution.begin(), s.distribution.end());
  std::sort(dist.begin(), dist.end());
  const auto frame = full_frame(s);
  std::vector<std::complex<double>> c(dist.size(), 0.0);
  c[0] = 1.0;
  if (cplx && dist.size() >= 2) {
    const cd d0 = evaluate(divergence(s, frame[dist[0]]), e);
    const cd d1 = evaluate(divergence(s, frame[dist[1]]), e);
    if (std::abs(d0) > 1e-12) {
      c[0] = d1;
      c[1] = -d0;
    }
    double norm2 = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      for (std::size_t k = 0; k < c.size(); ++k)
        norm2 += (c[j] * std::conj(c[k]) * evaluate(h[dist[j]][dist[k]], e)).real();
    for (auto& v : c) v /= std::sqrt(norm2);
  }
  w.combination = c;
  const int dim = s.real_dim();
  VectorField x1(dim);
  for (std::size_t j = 0; j < dist.size(); ++j) {
    if (c[j] == 0.0) continue;
    for (int a = 0; a < dim; ++a)
      if (!frame[dist[j]][a].is_zero_structural()) x1[a] += constant(c[j]) * frame[dist[j]][a];
  }

  // Rectifying axis k with constant X_1 component, and a first integral
  // h = z_j - z_k a_j / a_k with a_j independent of z_k.
  const int ncoord = cplx ? s.chart.complex_dim() : dim;
  int k = -1;
  for (int a = 0; a < ncoord && k < 0; ++a)
    if (!x1[a].is_zero_structural() && is_constant(x1[a])) k = a;
  if (k < 0) throw KindMismatch("X_1 has no constant coordinate component");
  const CExpr ak = x1[k];
  VectorField flow(dim);
  for (int a = 0; a < dim; ++a)
    if (!x1[a].is_zero_structural()) flow[a] = x1[a] / ak;
  auto coordinate = [&](int j) { return cplx ? CExpr::z(j) : CExpr(Expr::coord(j)); };
  auto touches = [&](const CExpr& v, int j) {
    const bool re = v.re().depends_on(cplx ? 2 * j : j) || v.im().depends_on(cplx ? 2 * j : j);
    const bool im = cplx && (v.re().depends_on(2 * j + 1) || v.im().depends_on(2 * j + 1));
    return re || im;
  };
  const VectorField x1bar = conj_field(s, x1);
  CExpr first_integral;
  std::string text;
  bool found = false;
  for (int j = 0; j < ncoord && !found; ++j) {
    if (j == k || touches(flow[j], k)) continue;
    const CExpr cand = coordinate(j) - coordinate(k) * flow[j];
    if (is_zero(apply_field(s, x1, cand)) != Tri::Yes) continue;
    if (cplx && is_zero(apply_field(s, x1bar, cand)) != Tri::Yes) continue;
    first_integral = cand;
    const auto& names = cplx ? s.chart.complex_names() : s.chart.real_names();
    text = names[j];
    if (!flow[j].is_zero_structural())
      text += " - " + names[k] + "*(" + to_string(flow[j], s.chart) + ")";
    found = true;
  }
  if (!found) throw KindMismatch("no first integral of X_1 found among the coordinates");
  w.invariant = text;
  w.coefficient = CExpr(Expr::leaf("absRe", first_integral.re()));
  w.flow = flow;
  w.flow_axis = k;

  const Coframe cf = frame_coframe(s);
  if (cplx) {
    const int m = s.frame_size();
    Form alpha(cf), alpha_bar(cf);
    for (std::size_t j = 0; j < dist.size(); ++j) {
      if (c[j] == 0.0) continue;
      alpha.add(1u << dist[j], constant(std::conj(c[j])));
      alpha_bar.add(1u << (m + dist[j]), constant(c[j]));
    }
    w.shape = wedge(alpha_bar, alpha);
    w.recipe = "nu_11 conj(alpha^1) ^ alpha^1, nu_11 = |Re h|, X_1 h = conj(X_1) h = 0";
  } else {
    w.shape = Form::basis(cf, {dist[0]});
    const CExpr f = divergence(s, x1);
    if (is_zero(f) != Tri::Yes) w.divergence = f.re();
    w.recipe = "mu_1 alpha^1, mu_1 = exp(-int div X_1) |h| transported along X_1";
  }
  w.form = w.coefficient * w.shape;
  return w;
}

WeakHarmonicWitness control_witness(const WeakHarmonicWitness& w) {
  WeakHarmonicWitness c = w;
  const bool cplx = w.shape.coframe().holomorphic >= 0;
  c.coefficient = CExpr(Expr::coord(cplx ? 2 * w.flow_axis : w.flow_axis));
  c.divergence = Expr();
  c.form = c.coefficient * c.shape;
  c.recipe = "control: coefficient replaced by the flow coordinate";
  return c;
}

WeakHarmonicWitness zero_witness(const WeakHarmonicWitness& w) {
  WeakHarmonicWitness z = w;
  z.coefficient = CExpr();
  z.divergence = Expr();
  z.form = Form(w.shape.coframe());
  z.recipe = "zero";
  return z;
}

double transport_weight(const WeakHarmonicWitness& w, const std::vector<double>& x) {
  if (w.divergence.is_zero_structural()) return 1.0;
  const int dim = static_cast<int>(x.size());
  const CompiledExpr f(w.divergence);
  std::vector<CompiledExpr> a(dim);
  for (int i = 0; i < dim; ++i) a[i] = CompiledExpr(w.flow[i].re());
  const auto [lo, hi] = w.quadrature.box[w.flow_axis];
  const double base = (lo <= 0.0 && 0.0 <= hi) ? 0.0 : 0.5 * (lo + hi);
  const double t_end = x[w.flow_axis] - base;
  // Backward orbit y' = -a(y) with I' = f(y), classical RK4.
  const int steps = 64;
  const double dt = t_end / steps;
  std::vector<double> y = x;
  double integral = 0.0;
  auto rhs = [&](const std::vector<double>& p, std::vector<double>& dy) {
    for (int i = 0; i < dim; ++i) dy[i] = -a[i](p.data());
    return f(p.data());
  };
  std::vector<double> k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
  for (int s = 0; s < steps; ++s) {
    const double f1 = rhs(y, k1);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
    const double f2 = rhs(tmp, k2);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
    const double f3 = rhs(tmp, k3);
    for (int i = 0; i < dim; ++i) tmp[i] = y[i] + dt * k3[i];
    const double f4 = rhs(tmp, k4);
    for (int i = 0; i < dim; ++i) y[i] += dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    integral += dt / 6.0 * (f1 + 2 * f2 + 2 * f3 + f4);
  }
  return std::exp(-integral);
}

}  // namespace charlap
