#include "charlap/exterior.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

#include "charlap/errors.hpp"

namespace charlap {

namespace lam {

int grade(unsigned mask) { return std::popcount(mask); }

int sign_before(int a, unsigned mask) {
  return (std::popcount(mask & ((1u << a) - 1u)) & 1) ? -1 : 1;
}

std::vector<int> indices(unsigned mask) {
  std::vector<int> out;
  for (int i = 0; mask >> i; ++i)
    if (mask & (1u << i)) out.push_back(i);
  return out;
}

std::vector<unsigned> masks_of_grade(int n, int k) {
  std::vector<unsigned> out;
  for (unsigned m = 0; m < (1u << n); ++m)
    if (grade(m) == k) out.push_back(m);
  return out;
}

std::pair<int, int> bidegree(unsigned mask, int m) {
  const unsigned low = (1u << m) - 1u;
  return {std::popcount(mask & low), std::popcount(mask & ~low)};
}

CMat wedge_matrix(const CVec& xi) {
  const int n = static_cast<int>(xi.size());
  CMat w = CMat::Zero(size(n), size(n));
  for (unsigned k = 0; k < (1u << n); ++k)
    for (int a = 0; a < n; ++a)
      if (!(k & (1u << a)) && xi[a] != 0.0) w(k | (1u << a), k) += double(sign_before(a, k)) * xi[a];
  return w;
}

CMat interior_matrix(const CVec& v) {
  const int n = static_cast<int>(v.size());
  CMat w = CMat::Zero(size(n), size(n));
  for (unsigned k = 0; k < (1u << n); ++k)
    for (int a = 0; a < n; ++a)
      if ((k & (1u << a)) && v[a] != 0.0) w(k ^ (1u << a), k) += double(sign_before(a, k)) * v[a];
  return w;
}

CMat compound(const CMat& a) {
  const int n = static_cast<int>(a.rows());
  CMat c = CMat::Zero(size(n), size(n));
  c(0, 0) = 1.0;
  for (unsigned j = 1; j < (1u << n); ++j) {
    const int i = std::countr_zero(j);
    const unsigned r = j ^ (1u << i);
    for (unsigned k = 0; k < (1u << n); ++k) {
      if (grade(k) != grade(j)) continue;
      cd acc = 0.0;
      for (int b = 0; b < n; ++b)
        if (k & (1u << b)) acc += a(b, i) * double(sign_before(b, k)) * c(k ^ (1u << b), r);
      c(k, j) = acc;
    }
  }
  return c;
}

JetMat compound(const JetMat& a) {
  const int n = a.rows();
  const JetSpacePtr& sp = a.space();
  std::vector<std::vector<Jet>> entry(n, std::vector<Jet>(n));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) entry[r][c] = a.entry(r, c);
  std::vector<std::vector<Jet>> col(size(n), std::vector<Jet>(size(n)));
  const Jet zero(sp, cd(0.0));
  col[0][0] = Jet(sp, cd(1.0));
  for (unsigned j = 1; j < (1u << n); ++j) {
    const int i = std::countr_zero(j);
    const unsigned r = j ^ (1u << i);
    for (unsigned k = 0; k < (1u << n); ++k) {
      if (grade(k) != grade(j)) continue;
      Jet acc = zero;
      for (int b = 0; b < n; ++b) {
        if (!(k & (1u << b))) continue;
        const Jet& prev = col[r][k ^ (1u << b)];
        if (prev.space() == nullptr) continue;
        acc += entry[b][i] * prev * cd(double(sign_before(b, k)));
      }
      col[j][k] = acc;
    }
  }
  JetMat out(sp, size(n), size(n));
  out.set_valid(a.valid());
  for (unsigned j = 0; j < (1u << n); ++j)
    for (unsigned k = 0; k < (1u << n); ++k)
      if (col[j][k].space() != nullptr)
        for (int m = 0; m < sp->size(); ++m) out[m](k, j) = col[j][k][m];
  return out;
}

CMat grade_projector(int n, int k) {
  CMat p = CMat::Zero(size(n), size(n));
  for (unsigned m = 0; m < (1u << n); ++m)
    if (grade(m) == k) p(m, m) = 1.0;
  return p;
}

int complement_sign(unsigned mask, int n) {
  int inversions = 0;
  for (int i = 0; i < n; ++i)
    if (mask & (1u << i))
      for (int j = 0; j < i; ++j)
        if (!(mask & (1u << j))) ++inversions;
  return (inversions & 1) ? -1 : 1;
}

}  // namespace lam

// ---------------------------------------------------------------- metric

MetricFiber MetricFiber::euclidean(int n) { return MetricFiber{RMat::Identity(n, n), 1}; }

CMat MetricFiber::lambda_gram() const { return lam::compound(CMat(gram.cast<cd>())); }

double MetricFiber::volume_coefficient() const {
  return orientation / std::sqrt(gram.determinant());
}

void MetricFiber::validate() const {
  if (gram.rows() != gram.cols()) throw DegenerateMetric("Gram matrix is not square");
  if ((gram - gram.transpose()).norm() > 1e-12 * (1.0 + gram.norm()))
    throw DegenerateMetric("Gram matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(gram);
  if (es.eigenvalues().minCoeff() <= 1e-14 * (1.0 + es.eigenvalues().maxCoeff()))
    throw DegenerateMetric("Gram matrix is not positive definite");
}

CMat hodge_star_matrix(const MetricFiber& m) {
  m.validate();
  const int n = m.dim();
  const CMat g = m.lambda_gram();
  const double c = m.volume_coefficient();
  const unsigned full = (1u << n) - 1u;
  CMat s = CMat::Zero(lam::size(n), lam::size(n));
  for (unsigned i = 0; i <= full; ++i)
    for (unsigned j = 0; j <= full; ++j)
      if (lam::grade(i) == lam::grade(j))
        s(full ^ i, j) = double(lam::complement_sign(i, n)) * c * g(i, j);
  return s;
}

CVec hodge_star(const CVec& a, const MetricFiber& m) { return hodge_star_matrix(m) * a; }

// ---------------------------------------------------------------- coframes

Coframe Coframe::coordinate(const Chart& chart) {
  Coframe c;
  c.name = "coord";
  c.dim = chart.real_dim();
  c.real_of_complex = chart.is_complex();
  return c;
}

Coframe Coframe::complex_coordinate(const Chart& chart) {
  if (!chart.is_complex()) throw NotComplexScenario("chart has no complex coordinates");
  Coframe c;
  c.name = "coord-c";
  c.dim = 2 * chart.complex_dim();
  c.holomorphic = chart.complex_dim();
  return c;
}

Coframe Coframe::frame(std::string name, int dim, int holomorphic) {
  Coframe c;
  c.name = std::move(name);
  c.dim = dim;
  c.holomorphic = holomorphic;
  return c;
}

// ---------------------------------------------------------------- forms

Form Form::scalar(Coframe coframe, CExpr f) {
  Form a(std::move(coframe));
  a.add(0, f);
  return a;
}

Form Form::basis(Coframe coframe, const std::vector<int>& idx, CExpr coef) {
  Form one = scalar(coframe, coef);
  for (auto it = idx.rbegin(); it != idx.rend(); ++it) {
    Form e(coframe);
    e.add(1u << *it, CExpr(1));
    one = wedge(e, one);
  }
  return one;
}

CExpr Form::coef(unsigned mask) const {
  auto it = terms_.find(mask);
  return it == terms_.end() ? CExpr() : it->second;
}

void Form::add(unsigned mask, const CExpr& c) {
  if (c.is_zero_structural()) return;
  if (mask >= (1u << dim())) throw std::out_of_range("form index outside the coframe");
  auto it = terms_.find(mask);
  if (it == terms_.end()) {
    terms_.emplace(mask, c);
  } else {
    it->second += c;
    if (it->second.is_zero_structural()) terms_.erase(it);
  }
}

void Form::prune() {
  for (auto it = terms_.begin(); it != terms_.end();) {
    const CExpr& c = it->second;
    const bool exact_zero = c.is_zero_structural() ||
                            (c.re().is_rational() && c.im().is_rational() &&
                             charlap::is_zero(c) == Tri::Yes);
    it = exact_zero ? terms_.erase(it) : std::next(it);
  }
}

Tri Form::is_zero() const {
  Tri out = Tri::Yes;
  for (const auto& [m, c] : terms_) {
    const Tri t = charlap::is_zero(c);
    if (t == Tri::No) return Tri::No;
    if (t == Tri::Unknown) out = Tri::Unknown;
  }
  return out;
}

int Form::max_grade() const {
  int g = -1;
  for (const auto& [m, c] : terms_) g = std::max(g, lam::grade(m));
  return g;
}

Form& Form::operator+=(const Form& o) {
  if (coframe_ != o.coframe_) throw CoframeMismatch(coframe_.name + " vs " + o.coframe_.name);
  for (const auto& [m, c] : o.terms_) add(m, c);
  return *this;
}

Form& Form::operator-=(const Form& o) { return *this += -o; }

Form Form::operator-() const {
  Form r = *this;
  for (auto& [m, c] : r.terms_) c = -c;
  return r;
}

Form operator*(const CExpr& f, const Form& a) {
  Form r(a.coframe_);
  for (const auto& [m, c] : a.terms_) r.add(m, f * c);
  r.prune();
  return r;
}

Form Form::conj() const {
  Form r(coframe_);
  if (coframe_.holomorphic < 0) {
    for (const auto& [m, c] : terms_) r.add(m, c.conj());
    return r;
  }
  const int h = coframe_.holomorphic;
  const unsigned low = (1u << h) - 1u;
  for (const auto& [m, c] : terms_) {
    // swap holomorphic and antiholomorphic slots, then reorder
    const unsigned swapped = ((m & low) << h) | ((m >> h) & low);
    std::vector<int> order;
    for (int i : lam::indices(m)) order.push_back(i < h ? i + h : i - h);
    int inversions = 0;
    for (std::size_t p = 0; p < order.size(); ++p)
      for (std::size_t q = p + 1; q < order.size(); ++q)
        if (order[p] > order[q]) ++inversions;
    r.add(swapped, (inversions & 1) ? -c.conj() : c.conj());
  }
  return r;
}

CVec Form::evaluate(const std::vector<double>& point, const LeafRegistry& leaves) const {
  CVec v = CVec::Zero(lam::size(dim()));
  for (const auto& [m, c] : terms_) v[m] = charlap::evaluate(c, point, leaves);
  return v;
}

std::vector<Jet> Form::jets(const std::vector<Jet>& coords) const {
  std::vector<Jet> out(lam::size(dim()), Jet(coords.front().space(), cd(0.0)));
  for (const auto& [m, c] : terms_) out[m] = CompiledCExpr(c).jet(coords);
  return out;
}

Form wedge(const Form& a, const Form& b) {
  if (a.coframe() != b.coframe())
    throw CoframeMismatch(a.coframe().name + " vs " + b.coframe().name);
  Form r(a.coframe());
  for (const auto& [i, ci] : a.terms()) {
    for (const auto& [j, cj] : b.terms()) {
      if (i & j) continue;
      int inversions = 0;
      for (int x : lam::indices(i)) inversions += std::popcount(j & ((1u << x) - 1u));
      const CExpr c = ci * cj;
      r.add(i | j, (inversions & 1) ? -c : c);
    }
  }
  Form out(r.coframe());
  for (const auto& [m, c] : r.terms()) out.add(m, c);
  return CExpr(1) * out;
}

Form interior(const std::vector<CExpr>& v, const Form& a) {
  if (static_cast<int>(v.size()) != a.dim())
    throw CoframeMismatch("vector has " + std::to_string(v.size()) + " components, coframe " +
                          std::to_string(a.dim()));
  Form r(a.coframe());
  for (const auto& [m, c] : a.terms())
    for (int x : lam::indices(m)) {
      if (v[x].is_zero_structural()) continue;
      const CExpr t = v[x] * c;
      r.add(m ^ (1u << x), lam::sign_before(x, m) < 0 ? -t : t);
    }
  return CExpr(1) * r;
}

Form hodge_star(const Form& a, const MetricFiber& m) {
  if (m.dim() != a.dim()) throw CoframeMismatch("metric dimension differs from coframe");
  const CMat s = hodge_star_matrix(m);
  Form r(a.coframe());
  for (const auto& [j, c] : a.terms())
    for (int k = 0; k < s.rows(); ++k) {
      const cd v = s(k, j);
      if (v == 0.0) continue;
      r.add(k, CExpr(Expr(Rational(v.real())), Expr(Rational(v.imag()))) * c);
    }
  return CExpr(1) * r;
}

std::map<std::pair<int, int>, Form> bidegree_split(const Form& a) {
  if (a.coframe().real_of_complex) return bidegree_split(to_complex_coordinates(a));
  if (a.coframe().holomorphic < 0) throw NotComplexScenario("coframe carries no bigrading");
  std::map<std::pair<int, int>, Form> out;
  for (const auto& [m, c] : a.terms()) {
    auto key = lam::bidegree(m, a.coframe().holomorphic);
    auto it = out.find(key);
    if (it == out.end()) it = out.emplace(key, Form(a.coframe())).first;
    it->second.add(m, c);
  }
  return out;
}

Form change_coframe(const Form& a, const Coframe& target,
                    const std::vector<std::vector<CExpr>>& t) {
  std::vector<Form> images;
  for (int i = 0; i < a.dim(); ++i) {
    Form e(target);
    for (int b = 0; b < target.dim; ++b) e.add(1u << b, t[i][b]);
    images.push_back(e);
  }
  Form r(target);
  for (const auto& [m, c] : a.terms()) {
    Form acc = Form::scalar(target, c);
    for (int i : lam::indices(m)) acc = wedge(acc, images[i]);
    r += acc;
  }
  return CExpr(1) * r;
}

Form to_complex_coordinates(const Form& a) {
  if (!a.coframe().real_of_complex) throw NotComplexScenario("form is not on a complex chart");
  const int m = a.dim() / 2;
  Coframe target = Coframe::frame("coord-c", 2 * m, m);
  const Expr half(Rational(1, 2));
  std::vector<std::vector<CExpr>> t(2 * m, std::vector<CExpr>(2 * m));
  for (int j = 0; j < m; ++j) {
    t[2 * j][j] = CExpr(half);
    t[2 * j][m + j] = CExpr(half);
    t[2 * j + 1][j] = CExpr(Expr(), -half);
    t[2 * j + 1][m + j] = CExpr(Expr(), half);
  }
  return change_coframe(a, target, t);
}

Form coordinate_d(const Form& a, const Chart& chart) {
  Form r(a.coframe());
  if (a.coframe().name == "coord") {
    for (const auto& [m, c] : a.terms())
      for (int i = 0; i < a.dim(); ++i) {
        if (m & (1u << i)) continue;
        const CExpr dc = differentiate(c, i);
        r.add(m | (1u << i), lam::sign_before(i, m) < 0 ? -dc : dc);
      }
  } else if (a.coframe().name == "coord-c") {
    const int n = chart.complex_dim();
    for (const auto& [m, c] : a.terms())
      for (int i = 0; i < 2 * n; ++i) {
        if (m & (1u << i)) continue;
        const CExpr dc = i < n ? d_dz(c, i) : d_dzbar(c, i - n);
        r.add(m | (1u << i), lam::sign_before(i, m) < 0 ? -dc : dc);
      }
  } else {
    throw CoframeMismatch("coordinate_d needs a coordinate coframe, got " + a.coframe().name);
  }
  return CExpr(1) * r;
}

std::string to_string(const Form& a, const Chart& chart) {
  if (a.is_zero_structural()) return "0";
  std::vector<std::string> names;
  if (a.coframe().name == "coord") {
    for (const auto& n : chart.real_names()) names.push_back("d" + n);
  } else if (a.coframe().name == "coord-c") {
    for (const auto& n : chart.complex_names()) names.push_back("d" + n);
    for (const auto& n : chart.complex_names()) names.push_back("dbar_" + n);
  } else {
    for (int i = 0; i < a.dim(); ++i) names.push_back(a.coframe().name + std::to_string(i + 1));
  }
  std::string out;
  for (const auto& [m, c] : a.terms()) {
    if (!out.empty()) out += " + ";
    out += "(" + to_string(c, chart) + ")";
    for (int i : lam::indices(m)) out += (i == lam::indices(m).front() ? "*" : "^") + names[i];
  }
  return out;
}

}  // namespace charlap
