#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "charlap/casebook.hpp"
#include "charlap/errors.hpp"
#include "charlap/quadrature.hpp"

namespace charlap {

namespace {

using Box = std::vector<std::pair<double, double>>;

struct Cube {
  std::vector<double> center;
  double radius = 0.0;
  Box box() const {
    Box b;
    for (double c : center) b.emplace_back(c - radius, c + radius);
    return b;
  }
};

std::vector<Cube> test_cubes(const WeakHarmonicWitness& w, unsigned seed) {
  const Box& box = w.quadrature.box;
  double width = 1e300;
  for (const auto& [lo, hi] : box) width = std::min(width, hi - lo);
  const double r = w.tests.radius_fraction * width;
  std::mt19937 rng(seed + 17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Cube> out;
  for (int c = 0; c < w.tests.cubes; ++c) {
    Cube cube{std::vector<double>(box.size()), r};
    for (std::size_t i = 0; i < box.size(); ++i)
      cube.center[i] = box[i].first + r + (box[i].second - box[i].first - 2 * r) * u(rng);
    out.push_back(std::move(cube));
  }
  return out;
}

/// dμ for the random test forms of every trial.
std::vector<Form> test_differentials(const WeakHarmonicWitness& w, const Scenario& s,
                                     const std::vector<Cube>& cubes, int trials, unsigned seed) {
  const Coframe cf = frame_coframe(s);
  const auto wi = s.w_indices();
  std::vector<unsigned> masks;
  for (unsigned mask = 0; mask < (1u << cf.dim); ++mask) {
    if (lam::grade(mask) != w.tests.degree) continue;
    bool in_w = true;
    for (int b = 0; b < cf.dim; ++b)
      if ((mask >> b & 1u) && std::find(wi.begin(), wi.end(), b) == wi.end()) in_w = false;
    if (in_w) masks.push_back(mask);
  }
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> coef(-3, 3);
  const int dim = s.real_dim();
  auto poly = [&]() {
    int c0 = coef(rng);
    Expr p(c0 == 0 ? 1 : c0);
    for (int v = 0; v < dim; ++v) p += Expr(coef(rng)) * Expr::coord(v);
    return p;
  };
  std::vector<Form> out;
  for (int t = 0; t < trials; ++t) {
    const Cube& cube = cubes[t % cubes.size()];
    const Expr bump = bump_expr(cube.center, cube.radius);
    Form mu(cf);
    for (unsigned mask : masks)
      mu.add(mask, s.is_complex() ? CExpr(bump * poly(), bump * poly()) : CExpr(bump * poly()));
    out.push_back(exterior_d(mu, s));
  }
  return out;
}

double cosine(cd pairing, double ww, double dd) {
  if (ww <= 0.0 || dd <= 0.0) return 0.0;
  return std::abs(pairing) / std::sqrt(ww * dd);
}

// ------------------------------------------------------------ axis-by-axis

CExpr det_small(const std::vector<std::vector<CExpr>>& m) {
  const std::size_t n = m.size();
  if (n == 0) return CExpr(1);
  if (n == 1) return m[0][0];
  CExpr d;
  for (std::size_t k = 0; k < n; ++k) {
    if (m[0][k].is_zero_structural()) continue;
    std::vector<std::vector<CExpr>> sub;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<CExpr> row;
      for (std::size_t j = 0; j < n; ++j)
        if (j != k) row.push_back(m[i][j]);
      sub.push_back(std::move(row));
    }
    const CExpr t = m[0][k] * det_small(sub);
    d = (k % 2) ? d - t : d + t;
  }
  return d;
}

std::vector<std::vector<CExpr>> adjugate_inverse(const std::vector<std::vector<CExpr>>& a,
                                                 const CExpr& det) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<CExpr>> inv(n, std::vector<CExpr>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      std::vector<std::vector<CExpr>> minor;
      for (int i = 0; i < n; ++i) {
        if (i == c) continue;
        std::vector<CExpr> row;
        for (int j = 0; j < n; ++j)
          if (j != r) row.push_back(a[i][j]);
        minor.push_back(std::move(row));
      }
      const CExpr cof = det_small(minor);
      inv[r][c] = ((r + c) % 2 ? -cof : cof) / det;
    }
  return inv;
}

bool constant_expr(const CExpr& e) {
  return e.re().constant_value().has_value() && e.im().constant_value().has_value();
}

/// Λ Gram matrix on the frame coframe, symbolic, when the volume density is
/// constant (constant det F and det h).
class FrameMetric {
public:
  explicit FrameMetric(const Scenario& s) {
    const auto h = frame_gram(s);
    const CExpr det_h = det_small(h);
    const CExpr det_f = det_small(s.frame);
    available_ = constant_expr(det_h) && constant_expr(det_f) && !det_h.is_zero_structural();
    if (!available_) return;
    const auto hinv = adjugate_inverse(h, det_h);
    const int m = static_cast<int>(h.size());
    const int n = s.real_dim();
    m1_.assign(n, std::vector<CExpr>(n));
    if (s.is_complex()) {
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          m1_[j][k] = hinv[j][k];
          m1_[m + j][m + k] = hinv[k][j];
        }
    } else {
      m1_ = hinv;
    }
  }
  bool available() const { return available_; }

  const CExpr& entry(unsigned a, unsigned b) {
    const auto key = std::make_pair(a, b);
    const auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    std::vector<int> ra, cb;
    for (int i = 0; i < static_cast<int>(m1_.size()); ++i) {
      if (a >> i & 1u) ra.push_back(i);
      if (b >> i & 1u) cb.push_back(i);
    }
    std::vector<std::vector<CExpr>> sub(ra.size(), std::vector<CExpr>(cb.size()));
    for (std::size_t i = 0; i < ra.size(); ++i)
      for (std::size_t j = 0; j < cb.size(); ++j) sub[i][j] = m1_[ra[i]][cb[j]];
    return cache_.emplace(key, det_small(sub)).first->second;
  }

  /// Σ_B M(A, B) f_B for every mask A of the same grade.
  Form lower(const Form& f) {
    Form out(f.coframe());
    for (unsigned a = 0; a < (1u << f.dim()); ++a)
      for (const auto& [b, c] : f.terms()) {
        if (lam::grade(a) != lam::grade(b)) continue;
        const CExpr& mab = entry(a, b);
        if (mab.is_zero_structural()) continue;
        out.add(a, mab * c);
      }
    return out;
  }

private:
  bool available_ = false;
  std::vector<std::vector<CExpr>> m1_;
  std::map<std::pair<unsigned, unsigned>, CExpr> cache_;
};

struct SplitForm {
  std::map<unsigned, SeparableExpr> parts;
};

std::optional<SplitForm> split_form(SeparableRule& rule, const Form& f) {
  SplitForm out;
  for (const auto& [mask, c] : f.terms()) {
    auto sep = rule.split(c);
    if (!sep) return std::nullopt;
    out.parts.emplace(mask, std::move(*sep));
  }
  return out;
}

/// ∫ Σ_A a_A conj(b_A).
cd pair_forms(SeparableRule& rule, const SplitForm& a, const SplitForm& b) {
  cd sum = 0.0;
  for (const auto& [mask, ea] : a.parts) {
    const auto it = b.parts.find(mask);
    if (it != b.parts.end()) sum += rule.inner(ea, it->second);
  }
  return sum;
}

/// Pairings by the tensor rule evaluated axis by axis; nullopt when some
/// integrand does not split.
std::optional<std::vector<double>> separable_pairings(const WeakHarmonicWitness& w,
                                                      const Scenario& s,
                                                      const std::vector<Cube>& cubes,
                                                      const std::vector<Form>& dmu, int nodes) {
  if (!w.divergence.is_zero_structural()) return std::nullopt;
  FrameMetric metric(s);
  if (!metric.available()) return std::nullopt;
  const Form w_low = metric.lower(w.form);
  std::vector<SeparableRule> rules;
  std::vector<std::optional<SplitForm>> wl, wf;
  for (const Cube& c : cubes) {
    rules.emplace_back(c.box(), nodes);
    wl.push_back(split_form(rules.back(), w_low));
    wf.push_back(split_form(rules.back(), w.form));
    if (!wl.back() || !wf.back()) return std::nullopt;
  }
  std::vector<double> out;
  for (std::size_t t = 0; t < dmu.size(); ++t) {
    const std::size_t c = t % cubes.size();
    SeparableRule& rule = rules[c];
    const auto d = split_form(rule, dmu[t]);
    const auto dl = split_form(rule, metric.lower(dmu[t]));
    if (!d || !dl) return std::nullopt;
    const cd p = pair_forms(rule, *wl[c], *d);
    const double ww = pair_forms(rule, *wl[c], *wf[c]).real();
    const double dd = pair_forms(rule, *dl, *d).real();
    out.push_back(cosine(p, ww, dd));
  }
  return out;
}

// ------------------------------------------------------------ node by node

/// Reference: every node builds its geometry and works in the ambient coframe.
std::vector<double> pointwise_serial(const WeakHarmonicWitness& w, const Scenario& s,
                                     const std::vector<Cube>& cubes,
                                     const std::vector<Form>& dmu, int nodes) {
  std::vector<double> out;
  for (std::size_t t = 0; t < dmu.size(); ++t) {
    const TensorGrid grid(cubes[t % cubes.size()].box(), nodes);
    cd p = 0.0;
    double ww = 0.0, dd = 0.0;
    std::vector<double> x;
    double wt = 0.0;
    for (long k = 0; k < grid.size(); ++k) {
      grid.node(k, x, wt);
      const LocalGeometry g(s, x, 0, false);
      const CVec wv = section_from_form(g, w.form).value().col(0) * transport_weight(w, x);
      const CVec dv = section_from_form(g, dmu[t]).value().col(0);
      const CMat& m = g.M.value();
      const double f = wt * g.rho.value().real();
      p += f * dv.dot(m * wv);
      ww += f * wv.dot(m * wv).real();
      dd += f * dv.dot(m * dv).real();
    }
    out.push_back(cosine(p, ww, dd));
  }
  return out;
}

/// Parallel kernel: geometry once per node and cube, frame-coframe
/// coefficients of dμ per trial.
std::vector<double> pointwise_parallel(const WeakHarmonicWitness& w, const Scenario& s,
                                       const std::vector<Cube>& cubes,
                                       const std::vector<Form>& dmu, int nodes) {
  const int n = s.real_dim();
  const int grade = w.degree;
  const auto masks = lam::masks_of_grade(n, grade);
  const int nm = static_cast<int>(masks.size());
  struct NodeData {
    std::vector<double> x;
    double f = 0.0;
    CVec wy;   // (T^H M w) on grade masks
    CMat gram; // (T^H M T) on grade masks
    double ww = 0.0;
  };
  std::vector<std::vector<NodeData>> data(cubes.size());
  for (std::size_t c = 0; c < std::min(cubes.size(), dmu.size()); ++c) {
    const TensorGrid grid(cubes[c].box(), nodes);
    data[c].resize(grid.size());
#pragma omp parallel for schedule(dynamic)
    for (long k = 0; k < grid.size(); ++k) {
      NodeData& nd = data[c][k];
      double wt = 0.0;
      grid.node(k, nd.x, wt);
      const LocalGeometry g(s, nd.x, 0, false);
      const CMat t = lam::compound(CMat(g.Vinv.value().transpose()));
      const CMat& m = g.M.value();
      const CVec wv = section_from_form(g, w.form).value().col(0) * transport_weight(w, nd.x);
      nd.f = wt * g.rho.value().real();
      const CVec y = t.adjoint() * (m * wv);
      const CMat tg = t.adjoint() * m * t;
      nd.wy.resize(nm);
      nd.gram.resize(nm, nm);
      for (int i = 0; i < nm; ++i) {
        nd.wy[i] = y[masks[i]];
        for (int j = 0; j < nm; ++j) nd.gram(i, j) = tg(masks[i], masks[j]);
      }
      nd.ww = wv.dot(m * wv).real();
    }
  }
  std::vector<double> out;
  for (std::size_t t = 0; t < dmu.size(); ++t) {
    const auto& nodes_c = data[t % cubes.size()];
    std::vector<std::pair<int, CompiledCExpr>> coefs;
    for (const auto& [mask, c] : dmu[t].terms()) {
      const int i = static_cast<int>(std::find(masks.begin(), masks.end(), mask) - masks.begin());
      coefs.emplace_back(i, CompiledCExpr(c));
    }
    double pre = 0.0, pim = 0.0, ww = 0.0, dd = 0.0;
#pragma omp parallel for reduction(+ : pre, pim, ww, dd) schedule(static)
    for (long k = 0; k < static_cast<long>(nodes_c.size()); ++k) {
      const NodeData& nd = nodes_c[k];
      CVec d = CVec::Zero(nm);
      for (const auto& [i, f] : coefs) d[i] = f(nd.x.data());
      const cd p = d.dot(nd.wy);
      pre += nd.f * p.real();
      pim += nd.f * p.imag();
      ww += nd.f * nd.ww;
      dd += nd.f * d.dot(nd.gram * d).real();
    }
    out.push_back(cosine(cd(pre, pim), ww, dd));
  }
  return out;
}

double q_residual(const WeakHarmonicWitness& w, const Scenario& s, const std::vector<Cube>& cubes) {
  double worst = 0.0;
  for (const Cube& c : cubes) {
    const TensorGrid grid(c.box(), 2);
    std::vector<double> x;
    double wt = 0.0;
    for (long k = 0; k < grid.size(); k += std::max<long>(1, grid.size() / 8)) {
      grid.node(k, x, wt);
      const LocalGeometry g(s, x, 0, false);
      const CVec wv = section_from_form(g, w.form).value().col(0);
      const double norm = wv.norm();
      if (norm < 1e-300) continue;
      worst = std::max(worst, (g.piQ.value() * wv - wv).norm() / norm);
    }
  }
  return worst;
}

}  // namespace

std::vector<double> weak_pairings_pointwise(const WeakHarmonicWitness& w, const Scenario& s,
                                            int trials, int nodes, Kernel kernel,
                                            unsigned seed) {
  const auto cubes = test_cubes(w, seed);
  const auto dmu = test_differentials(w, s, cubes, trials, seed);
  return kernel == Kernel::Serial ? pointwise_serial(w, s, cubes, dmu, nodes)
                                  : pointwise_parallel(w, s, cubes, dmu, nodes);
}

WeakHarmonicResult weak_harmonicity_verify(const WeakHarmonicWitness& w, const Scenario& s,
                                           int trials, unsigned seed, double tolerance) {
  const auto cubes = test_cubes(w, seed);
  const auto dmu = test_differentials(w, s, cubes, trials, seed);
  WeakHarmonicResult r;
  r.q_residual = q_residual(w, s, cubes);
  auto run = [&](int nodes) {
    auto sep = separable_pairings(w, s, cubes, dmu, nodes);
    r.separable = sep.has_value();
    return sep ? *sep : pointwise_parallel(w, s, cubes, dmu, nodes);
  };
  r.pairings = run(w.quadrature.nodes);
  const auto check = run(w.quadrature.check_nodes);
  for (int t = 0; t < trials; ++t) {
    r.max_pairing = std::max(r.max_pairing, r.pairings[t]);
    r.stability = std::max(r.stability, std::abs(r.pairings[t] - check[t]));
  }
  if (r.stability > 10.0 * tolerance)
    throw QuadratureUnstable("pairings at " + std::to_string(w.quadrature.nodes) + " and " +
                             std::to_string(w.quadrature.check_nodes) +
                             " nodes per axis differ by " + std::to_string(r.stability));
  return r;
}

}  // namespace charlap
