#pragma once

// Gauss–Legendre rules and tensor grids over boxes.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <complex>

#include "charlap/symexpr.hpp"

namespace charlap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss–Legendre rule on [-1, 1] (Golub–Welsch).
QuadratureRule gauss_legendre(int n);

/// Tensor-product grid over a box; node k of the flattened grid.
class TensorGrid {
public:
  TensorGrid(std::vector<std::pair<double, double>> box, int nodes_per_axis);
  long size() const { return size_; }
  int dim() const { return static_cast<int>(box_.size()); }
  void node(long k, std::vector<double>& x, double& w) const;

private:
  std::vector<std::pair<double, double>> box_;
  QuadratureRule rule_;
  long size_ = 1;
};

/// A sum of terms coef * Π_i f_i(x_i), each f_i stored by its values at
/// the nodes of axis i (index into SeparableRule's table per axis).
struct SeparableExpr {
  struct Term {
    std::complex<double> coef;
    std::vector<int> factors;
  };
  std::vector<Term> terms;
};

/// The tensor Gauss–Legendre rule over a box, evaluated axis by axis on
/// integrands that split into products of univariate factors.
class SeparableRule {
public:
  SeparableRule(std::vector<std::pair<double, double>> box, int nodes_per_axis);
  int dim() const { return static_cast<int>(box_.size()); }
  int nodes() const { return static_cast<int>(rule_.nodes.size()); }

  /// Splits every term of e; nullopt when some term couples two coordinates.
  std::optional<SeparableExpr> split(const CExpr& e);
  /// Same tensor rule applied to a * conj(b).
  std::complex<double> inner(const SeparableExpr& a, const SeparableExpr& b);
  std::complex<double> integrate(const SeparableExpr& a);

private:
  int intern(int axis, const Expr& factor);
  std::optional<std::vector<Expr>> split_term(const Term& t, double& scale) const;
  const Eigen::MatrixXd& gram(int axis);

  struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
  };
  std::vector<std::pair<double, double>> box_;
  QuadratureRule rule_;
  /// Per axis: node coordinates, scaled weights, interned factor values.
  std::vector<Eigen::VectorXd> x_, w_;
  std::vector<std::vector<Eigen::VectorXd>> values_;
  std::vector<std::map<Expr, int, ExprLess>> index_;
  std::vector<Eigen::MatrixXd> gram_;
  std::vector<int> gram_size_;
};

/// Smooth bump Π_i exp(-1/(1 - s_i²)), s_i = (x_i - c_i)/r, supported in
/// the cube of half-width r around c.
Expr bump_expr(const std::vector<double>& center, double radius);

}  // namespace charlap
