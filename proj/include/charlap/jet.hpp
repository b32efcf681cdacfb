#pragma once

// Truncated multivariate Taylor polynomials ("jets") with complex scalar or
// complex matrix coefficients. A jet carries the order up to which its
// coefficients are meaningful; differentiation lowers it by one and products
// keep the minimum, so an expression tree of operators reports exactly how
// many derivatives of its inputs it consumed.

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Dense>

namespace charlap {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

class JetSpace {
public:
  struct ProductTerm {
    int left;
    int right;
  };
  struct DerivTerm {
    int source;
    int target;
    double factor;
  };

  static std::shared_ptr<const JetSpace> get(int nvars, int order);

  int nvars() const { return nvars_; }
  int order() const { return order_; }
  int size() const { return static_cast<int>(exponents_.size()); }
  int degree(int m) const { return degrees_[m]; }
  /// Number of monomials of total degree <= d.
  int size_upto(int d) const;
  const std::vector<int>& exponents(int m) const { return exponents_[m]; }
  int index_of(const std::vector<int>& exps) const;
  int variable_index(int v) const { return 1 + v; }

  /// Pairs (left, right) whose product monomial is `target`.
  const std::vector<ProductTerm>& products_into(int target) const {
    return products_[target];
  }
  const std::vector<DerivTerm>& derivative(int var) const { return deriv_[var]; }

  JetSpace(int nvars, int order);

private:
  int nvars_;
  int order_;
  std::vector<std::vector<int>> exponents_;
  std::vector<int> degrees_;
  std::vector<int> size_upto_;
  std::vector<std::vector<ProductTerm>> products_;
  std::vector<std::vector<DerivTerm>> deriv_;
};

using JetSpacePtr = std::shared_ptr<const JetSpace>;

/// Scalar jet.
class Jet {
public:
  Jet() = default;
  Jet(JetSpacePtr space, cd constant);
  static Jet variable(JetSpacePtr space, int var, double at);

  const JetSpacePtr& space() const { return space_; }
  int valid() const { return valid_; }
  cd value() const { return coeffs_[0]; }
  cd& operator[](int m) { return coeffs_[m]; }
  cd operator[](int m) const { return coeffs_[m]; }
  const std::vector<cd>& coeffs() const { return coeffs_; }

  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(cd s);
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, cd s) { return a *= s; }
  friend Jet operator*(cd s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b);
  Jet operator-() const;

  Jet conj() const;
  Jet derivative(int var) const;
  Jet truncated(int valid) const;
  /// f(J) from the Taylor coefficients f^(k)(J0), k = 0..valid.
  Jet compose(const std::vector<cd>& derivs_at_value) const;
  Jet inverse() const;
  Jet sqrt() const;
  Jet exp() const;
  Jet sin() const;
  Jet cos() const;
  Jet pow(int k) const;
  /// Sum of coefficient magnitudes of monomials of degree >= 1.
  double variation() const;

private:
  JetSpacePtr space_;
  int valid_ = 0;
  std::vector<cd> coeffs_;
  friend class JetMat;
};

/// Matrix-valued jet; coefficient m is the matrix multiplying monomial m.
class JetMat {
public:
  JetMat() = default;
  JetMat(JetSpacePtr space, int rows, int cols);
  JetMat(JetSpacePtr space, const CMat& constant);

  const JetSpacePtr& space() const { return space_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int valid() const { return valid_; }
  void set_valid(int v);
  const CMat& value() const { return coeffs_[0]; }
  CMat& operator[](int m) { return coeffs_[m]; }
  const CMat& operator[](int m) const { return coeffs_[m]; }

  Jet entry(int r, int c) const;
  void set_entry(int r, int c, const Jet& j);
  JetMat column(int c) const;
  JetMat block_cols(int start, int count) const;
  JetMat rows_subset(const std::vector<int>& idx) const;
  JetMat cols_subset(const std::vector<int>& idx) const;
  static JetMat hcat(const std::vector<JetMat>& parts);

  JetMat& operator+=(const JetMat& o);
  JetMat& operator-=(const JetMat& o);
  JetMat& operator*=(cd s);
  friend JetMat operator+(JetMat a, const JetMat& b) { return a += b; }
  friend JetMat operator-(JetMat a, const JetMat& b) { return a -= b; }
  friend JetMat operator*(JetMat a, cd s) { return a *= s; }
  friend JetMat operator*(cd s, JetMat a) { return a *= s; }
  friend JetMat operator*(const JetMat& a, const JetMat& b);
  friend JetMat operator*(const Jet& s, const JetMat& a);
  /// Constant matrix times jet.
  friend JetMat operator*(const CMat& c, const JetMat& a);
  friend JetMat operator*(const JetMat& a, const CMat& c);

  JetMat adjoint() const;
  JetMat transpose() const;
  JetMat conj() const;
  JetMat derivative(int var) const;
  JetMat truncated(int valid) const;
  JetMat inverse() const;
  double max_abs() const;

private:
  JetSpacePtr space_;
  int rows_ = 0;
  int cols_ = 0;
  int valid_ = 0;
  std::vector<CMat> coeffs_;
};

}  // namespace charlap
