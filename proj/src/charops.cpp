#include "charlap/charops.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <random>

#include "charlap/errors.hpp"

namespace charlap {

// ---------------------------------------------------------------- symbolic

Coframe frame_coframe(const Scenario& s) {
  return Coframe::frame("frame", s.ambient_dim(), s.is_complex() ? s.frame_size() : -1);
}

namespace {

Form d_coframe(int k, const Coframe& cf, const StructureFunctions& sf) {
  Form r(cf);
  const int n = cf.dim;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const CExpr& c = sf.c[k][i][j];
      if (c.is_zero_structural()) continue;
      r.add((1u << i) | (1u << j), -c);
    }
  return r;
}

Form d_basis(unsigned mask, const Coframe& cf, const StructureFunctions& sf) {
  if (mask == 0) return Form(cf);
  const int first = std::countr_zero(mask);
  const unsigned rest = mask & (mask - 1);
  const Form head = Form::basis(cf, {first});
  const Form tail = Form::basis(cf, lam::indices(rest));
  return wedge(d_coframe(first, cf, sf), tail) - wedge(head, d_basis(rest, cf, sf));
}

}  // namespace

Form exterior_d(const Form& a, const Scenario& s, const StructureFunctions& sf) {
  const std::string& name = a.coframe().name;
  if (name == "coord" || name == "coord-c") return coordinate_d(a, s.chart);
  if (name != "frame" || a.dim() != s.ambient_dim())
    throw CoframeMismatch("exterior_d needs a coordinate or frame coframe, got " + name);
  for (const auto& [m, c] : a.terms())
    if (c.re().has_leaf() || c.im().has_leaf())
      throw NonSmoothDerivative("exterior_d of a form with non-smooth coefficients");
  const auto frame = full_frame(s);
  Form r(a.coframe());
  for (const auto& [mask, c] : a.terms()) {
    for (int k = 0; k < a.dim(); ++k) {
      if (mask & (1u << k)) continue;
      const CExpr ek = apply_field(s, frame[k], c);
      if (ek.is_zero_structural()) continue;
      r.add(mask | (1u << k), lam::sign_before(k, mask) < 0 ? -ek : ek);
    }
    r += c * d_basis(mask, a.coframe(), sf);
  }
  return r;
}

Form exterior_d(const Form& a, const Scenario& s) {
  if (a.coframe().name != "frame") return exterior_d(a, s, StructureFunctions{});
  return exterior_d(a, s, structure_functions(s));
}

Form codifferential(const Form& a, const Scenario& s) {
  if (s.is_complex() || s.metric != MetricKind::FrameOrthonormal || a.coframe().name != "frame")
    throw DegenerateMetric(
        "symbolic codifferential needs a real frame-orthonormal scenario on the frame coframe");
  const int n = a.dim();
  const MetricFiber mf = MetricFiber::euclidean(n);
  const StructureFunctions sf = structure_functions(s);
  Form r(a.coframe());
  for (int k = 1; k <= n; ++k) {
    Form ak(a.coframe());
    for (const auto& [m, c] : a.terms())
      if (std::popcount(m) == k) ak.add(m, c);
    if (ak.is_zero_structural()) continue;
    const Form t = hodge_star(exterior_d(hodge_star(ak, mf), s, sf), mf);
    const bool neg = ((n * (k + 1) + 1) & 1) != 0;
    r += neg ? -t : t;
  }
  return r;
}

// ---------------------------------------------------------------- sections

JetMat section_from_form(const LocalGeometry& g, const Form& a) {
  Form f = a.coframe().real_of_complex ? to_complex_coordinates(a) : a;
  const int n = g.n();
  if (f.dim() != n) throw CoframeMismatch("form dimension differs from the scenario");
  const auto& sp = g.space();
  JetMat out(sp, lam::size(n), 1);
  const std::string& name = f.coframe().name;
  if (name == "coord" || name == "coord-c") {
    int valid = sp->order();
    for (const auto& [m, c] : f.terms()) {
      const Jet j = CompiledCExpr(c).jet(g.coords());
      valid = std::min(valid, j.valid());
      for (int k = 0; k < sp->size(); ++k) out[k](m, 0) = j[k];
    }
    out.set_valid(valid);
    return out;
  }
  if (name != "frame") throw CoframeMismatch("unsupported coframe " + name);
  std::vector<JetMat> theta(n);
  for (int k = 0; k < n; ++k) theta[k] = g.one_form_to_lambda(g.coframe_form(k));
  std::map<unsigned, JetMat> basis;
  basis[0] = constant_section(sp, CVec::Unit(lam::size(n), 0));
  std::function<const JetMat&(unsigned)> get = [&](unsigned m) -> const JetMat& {
    auto it = basis.find(m);
    if (it != basis.end()) return it->second;
    const int first = std::countr_zero(m);
    JetMat w = wedge_jet(theta[first], get(m & (m - 1)));
    return basis.emplace(m, std::move(w)).first->second;
  };
  bool any = false;
  for (const auto& [m, c] : f.terms()) {
    const JetMat term = CompiledCExpr(c).jet(g.coords()) * get(m);
    if (!any) {
      out = term;
      any = true;
    } else {
      out += term;
    }
  }
  return out;
}

namespace {

const std::vector<CMat>& eps_matrices(int n) {
  static std::map<int, std::vector<CMat>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<CMat> e;
  for (int a = 0; a < n; ++a) e.push_back(lam::wedge_matrix(CVec::Unit(n, a)));
  return cache.emplace(n, std::move(e)).first->second;
}

std::vector<int> part_indices(const LocalGeometry& g, DPart part) {
  const int n = g.n();
  std::vector<int> out;
  if (part != DPart::Full && !g.scenario().is_complex())
    throw NotComplexScenario("Dolbeault parts need a complex scenario");
  const int m = n / 2;
  for (int a = 0; a < n; ++a) {
    if (part == DPart::Holomorphic && a >= m) continue;
    if (part == DPart::Antiholomorphic && a < m) continue;
    out.push_back(a);
  }
  return out;
}

}  // namespace

JetMat apply_dpart(const LocalGeometry& g, const JetMat& u, DPart part) {
  const auto& eps = eps_matrices(g.n());
  JetMat out(g.space(), u.rows(), 1);
  out.set_valid(u.valid() - 1);
  for (int a : part_indices(g, part)) out += eps[a] * g.E(a, u);
  return out;
}

JetMat apply_dpart_adjoint(const LocalGeometry& g, const JetMat& v, DPart part) {
  const auto& eps = eps_matrices(g.n());
  const auto idx = part_indices(g, part);
  const CMat& d = g.ambient().D;
  const JetMat w = g.rho * (g.M * v);
  JetMat acc(g.space(), v.rows(), 1);
  acc.set_valid(w.valid() - 1);
  for (int i = 0; i < g.scenario().real_dim(); ++i) {
    CMat ai = CMat::Zero(v.rows(), v.rows());
    bool any = false;
    for (int a : idx)
      if (d(i, a) != 0.0) {
        ai += std::conj(d(i, a)) * eps[a].adjoint();
        any = true;
      }
    if (any) acc += ai * w.derivative(i);
  }
  return (g.rho.inverse() * (g.Minv * acc)) * cd(-1.0);
}

// ---------------------------------------------------------------- operators

const char* to_string(Bundle b) {
  switch (b) {
    case Bundle::Lambda: return "Lambda";
    case Bundle::LambdaW: return "LambdaW";
    case Bundle::Q: return "Q";
  }
  return "?";
}

JetMat OperatorField::operator()(const LocalGeometry& g, const JetMat& u) const {
  if (!action) throw std::logic_error("operator " + name + " is not defined for this scenario");
  switch (domain) {
    case Bundle::Lambda: return action(g, u);
    case Bundle::LambdaW: return action(g, g.piW * u);
    case Bundle::Q: return action(g, g.piQ * u);
  }
  return action(g, u);
}

OperatorField compose(const OperatorField& a, const OperatorField& b) {
  OperatorField r;
  r.name = a.name + "*" + b.name;
  r.order = a.order + b.order;
  r.domain = b.domain;
  r.codomain = a.codomain;
  r.provenance = "(" + a.provenance + ")(" + b.provenance + ")";
  r.action = [a, b](const LocalGeometry& g, const JetMat& u) { return a(g, b.action(g, u)); };
  return r;
}

namespace {

OperatorField combine(const OperatorField& a, const OperatorField& b, double sign,
                      const std::string& op) {
  OperatorField r;
  r.name = a.name + op + b.name;
  r.order = std::max(a.order, b.order);
  r.domain = a.domain == b.domain ? a.domain : Bundle::Lambda;
  r.codomain = a.codomain == b.codomain ? a.codomain : Bundle::Lambda;
  r.provenance = a.provenance + " " + op + " " + b.provenance;
  r.action = [a, b, sign](const LocalGeometry& g, const JetMat& u) {
    return a(g, u) + b(g, u) * cd(sign);
  };
  return r;
}

OperatorField projected(std::string name, Bundle bundle, DPart part, bool adjoint) {
  OperatorField r;
  r.name = std::move(name);
  r.order = 1;
  r.domain = bundle;
  r.codomain = bundle;
  const char* base = part == DPart::Full ? "d" : part == DPart::Holomorphic ? "del" : "delbar";
  const char* proj = bundle == Bundle::Q ? "pi_Q" : bundle == Bundle::LambdaW ? "pi_W" : "1";
  r.provenance = std::string(proj) + " " + base + (adjoint ? "^*" : "") + " " + proj;
  r.action = [bundle, part, adjoint](const LocalGeometry& g, const JetMat& u) {
    const JetMat v = adjoint ? apply_dpart_adjoint(g, u, part) : apply_dpart(g, u, part);
    switch (bundle) {
      case Bundle::Q: return g.piQ * v;
      case Bundle::LambdaW: return g.piW * v;
      default: return v;
    }
  };
  return r;
}

}  // namespace

OperatorField operator+(const OperatorField& a, const OperatorField& b) {
  return combine(a, b, 1.0, "+");
}
OperatorField operator-(const OperatorField& a, const OperatorField& b) {
  return combine(a, b, -1.0, "-");
}
OperatorField commutator(const OperatorField& a, const OperatorField& b) {
  return compose(a, b) - compose(b, a);
}
OperatorField anticommutator(const OperatorField& a, const OperatorField& b) {
  return compose(a, b) + compose(b, a);
}

CharacteristicOps build_characteristic_ops(const Scenario& s) {
  CharacteristicOps ops;
  ops.d = projected("d", Bundle::Lambda, DPart::Full, false);
  ops.dstar = projected("d*", Bundle::Lambda, DPart::Full, true);
  ops.dW = projected("d_W", Bundle::LambdaW, DPart::Full, false);
  ops.dWstar = projected("d_W*", Bundle::LambdaW, DPart::Full, true);
  ops.dQ = projected("d_Q", Bundle::Q, DPart::Full, false);
  ops.dQstar = projected("d_Q*", Bundle::Q, DPart::Full, true);
  ops.lapQ = anticommutator(ops.dQ, ops.dQstar);
  ops.lapQ.name = "Delta_Q";
  if (s.is_complex()) {
    ops.delQ = projected("del_Q", Bundle::Q, DPart::Holomorphic, false);
    ops.delbarQ = projected("delbar_Q", Bundle::Q, DPart::Antiholomorphic, false);
    ops.delQstar = projected("del_Q*", Bundle::Q, DPart::Holomorphic, true);
    ops.delbarQstar = projected("delbar_Q*", Bundle::Q, DPart::Antiholomorphic, true);
  }
  return ops;
}

// ---------------------------------------------------------------- symbols

CVec ambient_covector(const LocalGeometry& g, const RVec& xi) {
  return g.ambient().D.transpose() * xi.cast<cd>();
}

RVec covector_from_frame(const LocalGeometry& g, const RVec& c) {
  if (g.scenario().is_complex())
    throw std::invalid_argument("frame components give a complex covector in complex scenarios");
  return (g.Vinv.value().transpose() * c.cast<cd>()).real();
}

CMat symbol_oracle_ambient(const LocalGeometry& g, const OperatorField& p, int order,
                           const RVec& xi, const CMat& inputs) {
  const auto& sp = g.space();
  Jet f(sp, cd(0.0));
  for (int i = 0; i < xi.size(); ++i) f[sp->variable_index(i)] = xi[i];
  Jet fk(sp, cd(1.0));
  double fact = 1.0;
  for (int k = 0; k < order; ++k) {
    fk = fk * f;
    fact *= k + 1;
  }
  const cd scale = std::pow(cd(0.0, 1.0), order) / fact;
  CMat out(inputs.rows(), inputs.cols());
  for (int c = 0; c < inputs.cols(); ++c) {
    const JetMat s = constant_section(sp, inputs.col(c));
    out.col(c) = p(g, fk * s).value().col(0) * scale;
  }
  if (order > p.order && out.norm() > 1e-9 * (1.0 + xi.squaredNorm()))
    throw OrderExceedsOperator(p.name + " has a nonzero coefficient above its declared order");
  return out;
}

CMat to_q_basis(const LocalGeometry& g, const CMat& a) {
  return g.q_basis.adjoint() * g.M.value() * a * g.q_basis;
}

CMat symbol_oracle(const LocalGeometry& g, const OperatorField& p, int order, const RVec& xi) {
  const CMat out = symbol_oracle_ambient(g, p, order, xi, g.q_basis);
  return g.q_basis.adjoint() * g.M.value() * out;
}

CVec xi_w(const LocalGeometry& g, const RVec& xi, DPart part) {
  CVec eta = ambient_covector(g, xi);
  const auto keep = part_indices(g, part);
  for (int a = 0; a < eta.size(); ++a)
    if (std::find(keep.begin(), keep.end(), a) == keep.end()) eta[a] = 0.0;
  return g.pW.value() * eta;
}

CMat xi_w_wedge(const LocalGeometry& g, const RVec& xi, DPart part) {
  return lam::wedge_matrix(xi_w(g, xi, part));
}

CMat xi_w_interior(const LocalGeometry& g, const RVec& xi, DPart part) {
  return g.Minv.value() * xi_w_wedge(g, xi, part).adjoint() * g.M.value();
}

ClosedFormSymbols closed_form_symbols(const LocalGeometry& g, const RVec& xi) {
  const CVec xw = g.pW.value() * ambient_covector(g, xi);
  const double n2 = xw.dot(g.M1.value() * xw).real();
  const CMat w = lam::wedge_matrix(xw);
  const CMat in = g.Minv.value() * w.adjoint() * g.M.value();
  const CMat p = g.piQ.value();
  const CMat pf = g.PFphi.value();
  const cd i(0.0, 1.0);
  ClosedFormSymbols r;
  r.s1_dQ = i * p * w * p;
  r.s1_dQstar = -i * p * in * p;
  r.s2_lapQ = p * (n2 * CMat::Identity(p.rows(), p.cols()) - in * pf * w) * p;
  r.q_dQ = to_q_basis(g, r.s1_dQ);
  r.q_dQstar = to_q_basis(g, r.s1_dQstar);
  r.q_lapQ = to_q_basis(g, r.s2_lapQ);
  return r;
}

HoermanderReport hoermander_applicability(const Scenario& s, const std::vector<double>& x,
                                          int samples, int grade, std::pair<int, int> bidegree,
                                          unsigned seed) {
  const LocalGeometry g(s, x, 0);
  std::vector<int> block;
  for (int c = 0; c < g.q_basis.cols(); ++c) {
    if (grade >= 0 && g.q_grade[c] != grade) continue;
    if (bidegree.first >= 0 && g.q_bidegree[c] != bidegree) continue;
    block.push_back(c);
  }
  HoermanderReport rep;
  if (block.empty()) return rep;
  std::vector<RVec> xis;
  const int nr = s.real_dim();
  if (!s.is_complex()) {
    for (int k = 0; k < s.ambient_dim(); ++k)
      xis.push_back(covector_from_frame(g, RVec::Unit(nr, k)));
  } else {
    for (int k = 0; k < nr; ++k) xis.push_back(RVec::Unit(nr, k));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  while (static_cast<int>(xis.size()) < samples) {
    RVec v(nr);
    for (int k = 0; k < nr; ++k) v[k] = normal(rng);
    xis.push_back(v);
  }
  for (const RVec& xi : xis) {
    const CMat q = closed_form_symbols(g, xi).q_lapQ;
    CMat sub(block.size(), block.size());
    for (std::size_t a = 0; a < block.size(); ++a)
      for (std::size_t b = 0; b < block.size(); ++b) sub(a, b) = q(block[a], block[b]);
    const cd scalar = sub.trace() / double(block.size());
    const double res =
        (sub - scalar * CMat::Identity(sub.rows(), sub.cols())).norm();
    if (res > 1e-9 && rep.componentwise) {
      rep.componentwise = false;
      rep.witness_xi = xi;
      rep.residual = res;
      rep.witness_symbol = sub;
    }
  }
  return rep;
}

}  // namespace charlap
