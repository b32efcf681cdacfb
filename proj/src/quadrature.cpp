#include "charlap/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace charlap {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature needs at least one node");
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    j(k, k - 1) = b;
    j(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  QuadratureRule r;
  for (int k = 0; k < n; ++k) {
    r.nodes.push_back(es.eigenvalues()[k]);
    const double v = es.eigenvectors()(0, k);
    r.weights.push_back(2.0 * v * v);
  }
  return r;
}

TensorGrid::TensorGrid(std::vector<std::pair<double, double>> box, int nodes_per_axis)
    : box_(std::move(box)), rule_(gauss_legendre(nodes_per_axis)) {
  for (std::size_t i = 0; i < box_.size(); ++i) size_ *= nodes_per_axis;
}

void TensorGrid::node(long k, std::vector<double>& x, double& w) const {
  const long n = static_cast<long>(rule_.nodes.size());
  x.resize(box_.size());
  w = 1.0;
  for (std::size_t i = 0; i < box_.size(); ++i) {
    const long idx = k % n;
    k /= n;
    const double half = 0.5 * (box_[i].second - box_[i].first);
    x[i] = box_[i].first + half * (rule_.nodes[idx] + 1.0);
    w *= half * rule_.weights[idx];
  }
}

Expr bump_expr(const std::vector<double>& center, double radius) {
  Expr arg;
  const Expr inv_r(Rational(1.0 / radius));
  for (std::size_t i = 0; i < center.size(); ++i) {
    const Expr si = (Expr::coord(static_cast<int>(i)) - Expr(Rational(center[i]))) * inv_r;
    arg = arg - Expr(1) / (Expr(1) - si * si);
  }
  return Expr::exp(arg);
}


SeparableRule::SeparableRule(std::vector<std::pair<double, double>> box, int nodes_per_axis)
    : box_(std::move(box)), rule_(gauss_legendre(nodes_per_axis)) {
  const int d = dim();
  x_.resize(d);
  w_.resize(d);
  values_.resize(d);
  index_.resize(d);
  gram_.resize(d);
  gram_size_.assign(d, 0);
  for (int i = 0; i < d; ++i) {
    const double half = 0.5 * (box_[i].second - box_[i].first);
    x_[i].resize(nodes_per_axis);
    w_[i].resize(nodes_per_axis);
    for (int k = 0; k < nodes_per_axis; ++k) {
      x_[i][k] = box_[i].first + half * (rule_.nodes[k] + 1.0);
      w_[i][k] = half * rule_.weights[k];
    }
    intern(i, Expr(1));
  }
}

int SeparableRule::intern(int axis, const Expr& factor) {
  auto& idx = index_[axis];
  const auto it = idx.find(factor);
  if (it != idx.end()) return it->second;
  const CompiledExpr f(factor);
  std::vector<double> p(dim(), 0.0);
  Eigen::VectorXd v(nodes());
  for (int k = 0; k < nodes(); ++k) {
    p[axis] = x_[axis][k];
    v[k] = f(p.data());
  }
  const int id = static_cast<int>(values_[axis].size());
  values_[axis].push_back(std::move(v));
  idx.emplace(factor, id);
  return id;
}

namespace {

/// The single coordinate e depends on, -1 for constants, -2 for several.
int axis_of(const Expr& e, int dim) {
  int axis = -1;
  for (int c = 0; c < dim; ++c) {
    if (!e.depends_on(c)) continue;
    if (axis >= 0) return -2;
    axis = c;
  }
  return axis;
}

}  // namespace

std::optional<std::vector<Expr>> SeparableRule::split_term(const Term& t, double& scale) const {
  const int d = dim();
  std::vector<Expr> per(d, Expr(1));
  scale = t.coef.get_d();
  for (const auto& [atom, power] : t.mono) {
    const Expr single = Expr::from_terms({Term{Monomial{{atom, power}}, Rational(1)}});
    if (atom->kind == AtomKind::Coord) {
      per[atom->coord] *= single;
      continue;
    }
    if (atom->kind == AtomKind::Exp) {
      // exp(Σ g_i(x_i)) = Π exp(g_i(x_i)).
      std::vector<Expr> parts(d);
      for (const Term& at : atom->arg.terms()) {
        const Expr piece = Expr::from_terms({at});
        const int a = axis_of(piece, d);
        if (a == -2) return std::nullopt;
        if (a == -1) {
          scale *= std::exp(power * at.coef.get_d());
          continue;
        }
        parts[a] += piece;
      }
      for (int a = 0; a < d; ++a)
        if (!parts[a].is_zero_structural()) per[a] *= Expr::exp(parts[a] * Expr(power));
      continue;
    }
    const int a = axis_of(single, d);
    if (a == -2) return std::nullopt;
    if (a == -1) {
      scale *= evaluate(single, std::vector<double>(d, 0.0));
      continue;
    }
    per[a] *= single;
  }
  return per;
}

std::optional<SeparableExpr> SeparableRule::split(const CExpr& e) {
  SeparableExpr out;
  const std::complex<double> unit[2] = {{1.0, 0.0}, {0.0, 1.0}};
  const Expr* parts[2] = {&e.re(), &e.im()};
  for (int p = 0; p < 2; ++p)
    for (const Term& t : parts[p]->terms()) {
      double scale = 1.0;
      const auto per = split_term(t, scale);
      if (!per) return std::nullopt;
      SeparableExpr::Term term{scale * unit[p], std::vector<int>(dim())};
      for (int a = 0; a < dim(); ++a) term.factors[a] = intern(a, (*per)[a]);
      out.terms.push_back(std::move(term));
    }
  return out;
}

const Eigen::MatrixXd& SeparableRule::gram(int axis) {
  const int n = static_cast<int>(values_[axis].size());
  if (gram_size_[axis] != n) {
    Eigen::MatrixXd v(nodes(), n);
    for (int j = 0; j < n; ++j) v.col(j) = values_[axis][j];
    gram_[axis] = v.transpose() * w_[axis].asDiagonal() * v;
    gram_size_[axis] = n;
  }
  return gram_[axis];
}

std::complex<double> SeparableRule::inner(const SeparableExpr& a, const SeparableExpr& b) {
  std::vector<const Eigen::MatrixXd*> g(dim());
  for (int i = 0; i < dim(); ++i) g[i] = &gram(i);
  std::complex<double> sum = 0.0;
  for (const auto& ta : a.terms)
    for (const auto& tb : b.terms) {
      double prod = 1.0;
      for (int i = 0; i < dim() && prod != 0.0; ++i) prod *= (*g[i])(ta.factors[i], tb.factors[i]);
      sum += ta.coef * std::conj(tb.coef) * prod;
    }
  return sum;
}

std::complex<double> SeparableRule::integrate(const SeparableExpr& a) {
  SeparableExpr one;
  one.terms.push_back({1.0, std::vector<int>(dim(), 0)});
  return inner(a, one);
}

}  // namespace charlap
