#pragma once

// Exterior algebra. Basis monomials e^I of Λ(C^n) are indexed by the bitmask
// of I, so a fiber element is a vector of length 2^n and operators on Λ are
// 2^n x 2^n matrices. Symbolic forms keep the same indexing with CExpr
// coefficients.

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "charlap/jet.hpp"
#include "charlap/symexpr.hpp"

namespace charlap {

namespace lam {

inline int size(int n) { return 1 << n; }
int grade(unsigned mask);
/// (-1)^{#{i in mask : i < a}}, the sign of moving e^a to its slot.
int sign_before(int a, unsigned mask);
std::vector<int> indices(unsigned mask);
std::vector<unsigned> masks_of_grade(int n, int k);
/// Mask with the (1,0) count and (0,1) count when the first m covectors are
/// holomorphic and the next m antiholomorphic.
std::pair<int, int> bidegree(unsigned mask, int m);

/// Exterior multiplication by the 1-form sum_a xi_a e^a.
CMat wedge_matrix(const CVec& xi);
/// Interior product with the vector sum_a v_a E_a (E dual to e).
CMat interior_matrix(const CVec& v);
/// Induced map on Λ of the map on 1-forms whose column j is the image of e^j.
CMat compound(const CMat& a);
JetMat compound(const JetMat& a);
/// Diagonal projector onto grade k.
CMat grade_projector(int n, int k);
/// Sign of e^I ∧ e^{I^c} relative to e^{1..n}.
int complement_sign(unsigned mask, int n);

}  // namespace lam

/// Pointwise metric on a coframe: gram(a,b) = <e^a, e^b>.
struct MetricFiber {
  RMat gram;
  int orientation = 1;

  static MetricFiber euclidean(int n);
  int dim() const { return static_cast<int>(gram.rows()); }
  /// Induced Gram matrix on Λ.
  CMat lambda_gram() const;
  /// Coefficient c with dvol = c e^{1..n}.
  double volume_coefficient() const;
  void validate() const;
};

/// Hodge star as a 2^n x 2^n matrix, complex-linear.
CMat hodge_star_matrix(const MetricFiber& m);
CVec hodge_star(const CVec& a, const MetricFiber& m);

/// Names the basis of 1-forms a Form is written in.
struct Coframe {
  std::string name;
  int dim = 0;
  /// Number of leading (1,0) covectors, followed by as many (0,1); -1 when
  /// the coframe carries no bigrading.
  int holomorphic = -1;
  /// Real coordinate coframe (dx_1, dy_1, ...) of a complex chart.
  bool real_of_complex = false;

  bool operator==(const Coframe& o) const {
    return name == o.name && dim == o.dim && holomorphic == o.holomorphic;
  }
  bool operator!=(const Coframe& o) const { return !(*this == o); }

  static Coframe coordinate(const Chart& chart);
  /// (dz_1..dz_m, dz̄_1..dz̄_m) of a complex chart.
  static Coframe complex_coordinate(const Chart& chart);
  static Coframe frame(std::string name, int dim, int holomorphic = -1);
};

class Form {
public:
  Form() = default;
  explicit Form(Coframe coframe) : coframe_(std::move(coframe)) {}
  static Form scalar(Coframe coframe, CExpr f);
  static Form basis(Coframe coframe, const std::vector<int>& idx, CExpr coef = CExpr(1));

  const Coframe& coframe() const { return coframe_; }
  int dim() const { return coframe_.dim; }
  const std::map<unsigned, CExpr>& terms() const { return terms_; }
  CExpr coef(unsigned mask) const;
  void add(unsigned mask, const CExpr& c);
  bool is_zero_structural() const { return terms_.empty(); }
  /// Every coefficient decided zero, or unknown if some could not be decided.
  Tri is_zero() const;
  /// Highest grade present, -1 for zero.
  int max_grade() const;

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  friend Form operator+(Form a, const Form& b) { return a += b; }
  friend Form operator-(Form a, const Form& b) { return a -= b; }
  Form operator-() const;
  friend Form operator*(const CExpr& f, const Form& a);
  Form conj() const;
  bool operator==(const Form& o) const { return coframe_ == o.coframe_ && terms_ == o.terms_; }

  CVec evaluate(const std::vector<double>& point,
                const LeafRegistry& leaves = default_leaves()) const;
  /// Per-mask jets from coordinate jets.
  std::vector<Jet> jets(const std::vector<Jet>& coords) const;

private:
  void prune();
  Coframe coframe_;
  std::map<unsigned, CExpr> terms_;
};

Form wedge(const Form& a, const Form& b);
/// i_v a where v has components along the frame dual to a's coframe.
Form interior(const std::vector<CExpr>& v, const Form& a);
/// Numeric metric; coefficients of the result carry the exact binary value
/// of each matrix entry.
Form hodge_star(const Form& a, const MetricFiber& m);
std::map<std::pair<int, int>, Form> bidegree_split(const Form& a);
/// Rewrite in a new coframe given e^a_old = sum_b t(a,b) f^b_new.
Form change_coframe(const Form& a, const Coframe& target,
                    const std::vector<std::vector<CExpr>>& t);
/// Real coordinate coframe of a complex chart to (dz, dz̄).
Form to_complex_coordinates(const Form& a);
/// Exterior derivative in a coordinate coframe (real or complex).
Form coordinate_d(const Form& a, const Chart& chart);
std::string to_string(const Form& a, const Chart& chart);

}  // namespace charlap
