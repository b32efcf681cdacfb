#pragma once

// Symbolic scalar expressions over chart coordinates.
//
// An Expr is kept in a canonical sum-of-products form: a sorted list of terms,
// each an exact rational coefficient times a monomial in "atoms". Atoms are
// coordinates, exp/sin/cos of an expression, the reciprocal of a multi-term
// expression, or an opaque non-smooth leaf. Exponents may be negative only on
// coordinates and plain transcendental atoms, so polynomials and Laurent
// polynomials have a unique representation and rational functions reduce to
// a single fraction for exact zero tests.

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "charlap/jet.hpp"

namespace charlap {

using Rational = mpq_class;

class Expr;
struct Atom;
using AtomPtr = std::shared_ptr<const Atom>;

/// Atom raised to an integer power inside a monomial.
using Factor = std::pair<AtomPtr, int>;
using Monomial = std::vector<Factor>;

struct Term {
  Monomial mono;
  Rational coef;
};

class Expr {
public:
  Expr() = default;
  Expr(long v);  // NOLINT(google-explicit-constructor)
  Expr(const Rational& v);  // NOLINT(google-explicit-constructor)

  static Expr coord(int index);
  static Expr exp(const Expr& arg);
  static Expr sin(const Expr& arg);
  static Expr cos(const Expr& arg);
  /// Opaque evaluable-only function `name` applied to `arg`.
  static Expr leaf(const std::string& name, const Expr& arg);
  static Expr from_terms(std::vector<Term> terms);

  const std::vector<Term>& terms() const { return terms_; }
  bool is_zero_structural() const { return terms_.empty(); }
  std::optional<Rational> constant_value() const;
  /// Only coordinates and reciprocals of rational expressions appear.
  bool is_rational() const;
  bool is_polynomial() const;
  bool has_leaf() const;
  bool depends_on(int coord) const;

  Expr operator-() const;
  Expr& operator+=(const Expr& o);
  Expr& operator-=(const Expr& o);
  Expr& operator*=(const Expr& o);
  Expr& operator/=(const Expr& o);
  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  Expr pow(int k) const;

  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

private:
  std::vector<Term> terms_;
};

enum class AtomKind { Coord, Exp, Sin, Cos, Recip, Leaf };

struct Atom {
  AtomKind kind;
  int coord = -1;
  std::string name;
  Expr arg;
};

int compare(const Expr& a, const Expr& b);
int compare(const Atom& a, const Atom& b);

enum class Tri { Yes, No, Unknown };
const char* to_string(Tri t);

/// Names of the real coordinates; complex charts also name each complex
/// coordinate z_j, whose real and imaginary parts are real coordinates
/// 2j and 2j+1 named "re_<z>" and "im_<z>".
class Chart {
public:
  static Chart real(std::vector<std::string> names);
  static Chart complex(std::vector<std::string> names);

  bool is_complex() const { return complex_; }
  int real_dim() const { return static_cast<int>(real_names_.size()); }
  int complex_dim() const { return static_cast<int>(complex_names_.size()); }
  const std::vector<std::string>& real_names() const { return real_names_; }
  const std::vector<std::string>& complex_names() const { return complex_names_; }
  int real_index(const std::string& name) const;
  int complex_index(const std::string& name) const;

private:
  bool complex_ = false;
  std::vector<std::string> real_names_;
  std::vector<std::string> complex_names_;
};

using LeafFunction = std::function<double(double)>;
using LeafRegistry = std::map<std::string, LeafFunction>;
/// Registry with "absRe" (|v| of the real argument) and "abs".
const LeafRegistry& default_leaves();

Expr differentiate(const Expr& e, int coord);
double evaluate(const Expr& e, const std::vector<double>& point,
                const LeafRegistry& leaves = default_leaves());
Tri is_zero(const Expr& e);
/// Numerator and denominator polynomials of a rational expression.
std::pair<Expr, Expr> to_fraction(const Expr& e);

std::string to_string(const Expr& e, const Chart& chart);
Expr parse_expr(const std::string& text, const Chart& chart);

/// Flattened evaluator for repeated evaluation of one expression.
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e, const LeafRegistry& leaves = default_leaves());
  double operator()(const double* point) const;
  /// Taylor expansion from jets of the coordinates. Non-smooth leaves yield
  /// a jet valid to order 0 only.
  Jet jet(const std::vector<Jet>& coords) const;

private:
  struct Slot {
    AtomKind kind;
    int coord = -1;
    int arg = -1;  // index into subexpressions
    LeafFunction leaf;
  };
  struct Poly {
    std::vector<double> coef;
    std::vector<std::vector<std::pair<int, int>>> factors;  // (slot, power)
  };
  int add_expr(const Expr& e, const LeafRegistry& leaves);
  int add_atom(const AtomPtr& a, const LeafRegistry& leaves);

  std::vector<Slot> slots_;
  std::vector<Poly> polys_;
  std::vector<std::pair<const Atom*, int>> seen_;
  int root_ = -1;
};

/// Complex expression re + i im over real coordinates.
class CExpr {
public:
  CExpr() = default;
  CExpr(Expr re, Expr im = Expr()) : re_(std::move(re)), im_(std::move(im)) {}  // NOLINT
  CExpr(long v) : re_(v) {}  // NOLINT
  static CExpr i() { return CExpr(Expr(), Expr(1)); }
  /// z_j = x_j + i y_j of a complex chart.
  static CExpr z(int j);
  static CExpr zbar(int j);

  const Expr& re() const { return re_; }
  const Expr& im() const { return im_; }

  CExpr conj() const { return CExpr(re_, -im_); }
  CExpr operator-() const { return CExpr(-re_, -im_); }
  CExpr& operator+=(const CExpr& o);
  CExpr& operator-=(const CExpr& o);
  friend CExpr operator+(CExpr a, const CExpr& b) { return a += b; }
  friend CExpr operator-(CExpr a, const CExpr& b) { return a -= b; }
  friend CExpr operator*(const CExpr& a, const CExpr& b);
  friend CExpr operator/(const CExpr& a, const CExpr& b);
  CExpr pow(int k) const;
  friend bool operator==(const CExpr& a, const CExpr& b) {
    return a.re_ == b.re_ && a.im_ == b.im_;
  }
  friend bool operator!=(const CExpr& a, const CExpr& b) { return !(a == b); }

  bool is_zero_structural() const { return re_.is_zero_structural() && im_.is_zero_structural(); }

private:
  Expr re_;
  Expr im_;
};

CExpr cexp(const CExpr& a);
CExpr csin(const CExpr& a);
CExpr ccos(const CExpr& a);
CExpr differentiate(const CExpr& e, int coord);
/// Wirtinger derivatives along complex coordinate j.
CExpr d_dz(const CExpr& e, int j);
CExpr d_dzbar(const CExpr& e, int j);
Tri is_zero(const CExpr& e);
std::complex<double> evaluate(const CExpr& e, const std::vector<double>& point,
                              const LeafRegistry& leaves = default_leaves());
std::string to_string(const CExpr& e, const Chart& chart);
/// Complex grammar: complex coordinate names, I, conj, re, im, exp, sin, cos
/// and leaves applied to the real part of their argument.
CExpr parse_cexpr(const std::string& text, const Chart& chart);

class CompiledCExpr {
public:
  CompiledCExpr() = default;
  explicit CompiledCExpr(const CExpr& e, const LeafRegistry& leaves = default_leaves())
      : re_(e.re(), leaves), im_(e.im(), leaves) {}
  std::complex<double> operator()(const double* p) const { return {re_(p), im_(p)}; }
  Jet jet(const std::vector<Jet>& coords) const {
    Jet j = re_.jet(coords);
    j += im_.jet(coords) * cd(0.0, 1.0);
    return j;
  }

private:
  CompiledExpr re_;
  CompiledExpr im_;
};

}  // namespace charlap
