#include "charlap/symexpr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "charlap/errors.hpp"

namespace charlap {

namespace {

int cmp_rational(const Rational& a, const Rational& b) {
  const int c = cmp(a, b);
  return (c > 0) - (c < 0);
}

int compare_mono(const Monomial& a, const Monomial& b) {
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (a[i].first != b[i].first) {
      const int c = compare(*a[i].first, *b[i].first);
      if (c != 0) return c;
    }
    if (a[i].second != b[i].second) return a[i].second < b[i].second ? -1 : 1;
  }
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  return 0;
}

AtomPtr make_atom(AtomKind kind, int coord, std::string name, Expr arg) {
  auto a = std::make_shared<Atom>();
  a->kind = kind;
  a->coord = coord;
  a->name = std::move(name);
  a->arg = std::move(arg);
  return a;
}

Expr atom_expr(const AtomPtr& a, int power = 1) {
  if (power == 0) return Expr(1);
  return Expr::from_terms({Term{Monomial{{a, power}}, Rational(1)}});
}

Monomial normalize_mono(Monomial m);

Expr mono_times(const Monomial& a, const Monomial& b) {
  Monomial m = a;
  m.insert(m.end(), b.begin(), b.end());
  return Expr::from_terms({Term{normalize_mono(std::move(m)), Rational(1)}});
}

// Sort, merge equal atoms and fold all exponential atoms into one.
Monomial normalize_mono(Monomial m) {
  std::sort(m.begin(), m.end(), [](const Factor& x, const Factor& y) {
    return compare(*x.first, *y.first) < 0;
  });
  Monomial out;
  for (auto& f : m) {
    if (!out.empty() && (out.back().first == f.first || compare(*out.back().first, *f.first) == 0)) {
      out.back().second += f.second;
    } else {
      out.push_back(f);
    }
  }
  Monomial result;
  Expr exp_arg;
  int exp_count = 0;
  for (auto& f : out) {
    if (f.second == 0) continue;
    if (f.first->kind == AtomKind::Exp) {
      exp_arg += f.first->arg * Expr(static_cast<long>(f.second));
      ++exp_count;
      continue;
    }
    result.push_back(f);
  }
  if (exp_count > 0 && !exp_arg.is_zero_structural()) {
    result.push_back({make_atom(AtomKind::Exp, -1, "", exp_arg), 1});
    std::sort(result.begin(), result.end(), [](const Factor& x, const Factor& y) {
      return compare(*x.first, *y.first) < 0;
    });
  }
  return result;
}

// Inverse of a monomial; reciprocal atoms turn back into their polynomial.
Expr invert_mono(const Monomial& m) {
  Monomial inv;
  Expr extra(1);
  for (const auto& f : m) {
    if (f.first->kind == AtomKind::Recip) {
      extra *= f.first->arg.pow(f.second);
    } else {
      inv.push_back({f.first, -f.second});
    }
  }
  return Expr::from_terms({Term{normalize_mono(std::move(inv)), Rational(1)}}) * extra;
}

bool atom_is_rational(const Atom& a) {
  if (a.kind == AtomKind::Coord) return true;
  if (a.kind == AtomKind::Recip) return a.arg.is_rational();
  return false;
}

}  // namespace

// ---------------------------------------------------------------- ordering

int compare(const Atom& a, const Atom& b) {
  if (&a == &b) return 0;
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.coord != b.coord) return a.coord < b.coord ? -1 : 1;
  if (a.name != b.name) return a.name < b.name ? -1 : 1;
  return compare(a.arg, b.arg);
}

int compare(const Expr& a, const Expr& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (ta.size() != tb.size()) return ta.size() < tb.size() ? -1 : 1;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    const int c = compare_mono(ta[i].mono, tb[i].mono);
    if (c != 0) return c;
    const int d = cmp_rational(ta[i].coef, tb[i].coef);
    if (d != 0) return d;
  }
  return 0;
}

bool operator==(const Expr& a, const Expr& b) { return compare(a, b) == 0; }

const char* to_string(Tri t) {
  switch (t) {
    case Tri::Yes: return "yes";
    case Tri::No: return "no";
    default: return "unknown";
  }
}

// ---------------------------------------------------------------- construction

Expr::Expr(long v) {
  if (v != 0) terms_.push_back(Term{{}, Rational(v)});
}

Expr::Expr(const Rational& v) {
  if (sgn(v) != 0) terms_.push_back(Term{{}, v});
}

Expr Expr::coord(int index) {
  return atom_expr(make_atom(AtomKind::Coord, index, "", Expr()));
}

Expr Expr::exp(const Expr& arg) {
  if (arg.is_zero_structural()) return Expr(1);
  return atom_expr(make_atom(AtomKind::Exp, -1, "", arg));
}

Expr Expr::sin(const Expr& arg) {
  if (arg.is_zero_structural()) return Expr();
  return atom_expr(make_atom(AtomKind::Sin, -1, "", arg));
}

Expr Expr::cos(const Expr& arg) {
  if (arg.is_zero_structural()) return Expr(1);
  return atom_expr(make_atom(AtomKind::Cos, -1, "", arg));
}

Expr Expr::leaf(const std::string& name, const Expr& arg) {
  return atom_expr(make_atom(AtomKind::Leaf, -1, name, arg));
}

Expr Expr::from_terms(std::vector<Term> terms) {
  std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
    return compare_mono(a.mono, b.mono) < 0;
  });
  Expr e;
  for (auto& t : terms) {
    if (!e.terms_.empty() && compare_mono(e.terms_.back().mono, t.mono) == 0) {
      e.terms_.back().coef += t.coef;
    } else {
      e.terms_.push_back(std::move(t));
    }
  }
  e.terms_.erase(std::remove_if(e.terms_.begin(), e.terms_.end(),
                                [](const Term& t) { return sgn(t.coef) == 0; }),
                 e.terms_.end());
  return e;
}

std::optional<Rational> Expr::constant_value() const {
  if (terms_.empty()) return Rational(0);
  if (terms_.size() == 1 && terms_[0].mono.empty()) return terms_[0].coef;
  return std::nullopt;
}

bool Expr::is_rational() const {
  for (const auto& t : terms_)
    for (const auto& f : t.mono)
      if (!atom_is_rational(*f.first)) return false;
  return true;
}

bool Expr::is_polynomial() const {
  for (const auto& t : terms_)
    for (const auto& f : t.mono)
      if (f.first->kind != AtomKind::Coord || f.second < 0) return false;
  return true;
}

bool Expr::has_leaf() const {
  for (const auto& t : terms_)
    for (const auto& f : t.mono)
      if (f.first->kind == AtomKind::Leaf || f.first->arg.has_leaf()) return true;
  return false;
}

bool Expr::depends_on(int coord) const {
  for (const auto& t : terms_)
    for (const auto& f : t.mono) {
      if (f.first->kind == AtomKind::Coord) {
        if (f.first->coord == coord) return true;
      } else if (f.first->arg.depends_on(coord)) {
        return true;
      }
    }
  return false;
}

// ---------------------------------------------------------------- arithmetic

Expr Expr::operator-() const {
  Expr r = *this;
  for (auto& t : r.terms_) t.coef = -t.coef;
  return r;
}

Expr& Expr::operator+=(const Expr& o) {
  if (o.terms_.empty()) return *this;
  std::vector<Term> all = terms_;
  all.insert(all.end(), o.terms_.begin(), o.terms_.end());
  *this = from_terms(std::move(all));
  return *this;
}

Expr& Expr::operator-=(const Expr& o) { return *this += -o; }

Expr& Expr::operator*=(const Expr& o) {
  *this = *this * o;
  return *this;
}

Expr& Expr::operator/=(const Expr& o) {
  *this = *this / o;
  return *this;
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.terms_.empty() || b.terms_.empty()) return Expr();
  std::vector<Term> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& x : a.terms_) {
    for (const auto& y : b.terms_) {
      const Rational c = x.coef * y.coef;
      if (x.mono.empty() || y.mono.empty()) {
        out.push_back(Term{x.mono.empty() ? y.mono : x.mono, c});
        continue;
      }
      Expr m = mono_times(x.mono, y.mono);
      for (auto t : m.terms_) {
        t.coef *= c;
        out.push_back(std::move(t));
      }
    }
  }
  return Expr::from_terms(std::move(out));
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.terms_.empty()) throw NonFinite("division by zero expression");
  if (b.terms_.size() == 1) {
    const Term& t = b.terms_[0];
    return a * Expr(Rational(1 / t.coef)) * invert_mono(t.mono);
  }
  const Rational lc = b.terms_[0].coef;
  const Expr p = b * Expr(Rational(1 / lc));
  return a * Expr(Rational(1 / lc)) * atom_expr(make_atom(AtomKind::Recip, -1, "", p));
}

Expr Expr::pow(int k) const {
  if (k < 0) return (Expr(1) / *this).pow(-k);
  Expr r(1);
  Expr base = *this;
  while (k > 0) {
    if (k & 1) r *= base;
    k >>= 1;
    if (k) base = base * base;
  }
  return r;
}

// ---------------------------------------------------------------- calculus

namespace {

Expr differentiate_factor(const Factor& f, int coord) {
  const Atom& a = *f.first;
  const int k = f.second;
  const Expr kk(static_cast<long>(k));
  switch (a.kind) {
    case AtomKind::Coord:
      if (a.coord != coord) return Expr();
      return kk * atom_expr(f.first, k - 1);
    case AtomKind::Exp: {
      Expr da = differentiate(a.arg, coord);
      if (da.is_zero_structural()) return Expr();
      return kk * da * atom_expr(f.first, k);
    }
    case AtomKind::Sin: {
      Expr da = differentiate(a.arg, coord);
      if (da.is_zero_structural()) return Expr();
      return kk * da * atom_expr(f.first, k - 1) * Expr::cos(a.arg);
    }
    case AtomKind::Cos: {
      Expr da = differentiate(a.arg, coord);
      if (da.is_zero_structural()) return Expr();
      return -kk * da * atom_expr(f.first, k - 1) * Expr::sin(a.arg);
    }
    case AtomKind::Recip: {
      Expr da = differentiate(a.arg, coord);
      if (da.is_zero_structural()) return Expr();
      return -kk * da * atom_expr(f.first, k + 1);
    }
    case AtomKind::Leaf: {
      if (!a.arg.depends_on(coord)) return Expr();
      Expr da = differentiate(a.arg, coord);
      if (is_zero(da) == Tri::Yes) return Expr();
      throw NonSmoothDerivative("leaf '" + a.name + "' depends on coordinate " +
                                std::to_string(coord));
    }
  }
  return Expr();
}

}  // namespace

Expr differentiate(const Expr& e, int coord) {
  Expr out;
  for (const auto& t : e.terms()) {
    for (std::size_t i = 0; i < t.mono.size(); ++i) {
      Expr df = differentiate_factor(t.mono[i], coord);
      if (df.is_zero_structural()) continue;
      Monomial rest;
      for (std::size_t j = 0; j < t.mono.size(); ++j)
        if (j != i) rest.push_back(t.mono[j]);
      out += Expr::from_terms({Term{rest, t.coef}}) * df;
    }
  }
  return out;
}

// ---------------------------------------------------------------- evaluation

const LeafRegistry& default_leaves() {
  static const LeafRegistry reg = {
      {"absRe", [](double v) { return std::fabs(v); }},
      {"abs", [](double v) { return std::fabs(v); }},
  };
  return reg;
}

namespace {

double eval_rec(const Expr& e, const std::vector<double>& p, const LeafRegistry& leaves);

double eval_atom(const Atom& a, const std::vector<double>& p, const LeafRegistry& leaves) {
  switch (a.kind) {
    case AtomKind::Coord:
      if (a.coord < 0 || a.coord >= static_cast<int>(p.size()))
        throw std::invalid_argument("point dimension does not cover coordinate " +
                                    std::to_string(a.coord));
      return p[a.coord];
    case AtomKind::Exp: return std::exp(eval_rec(a.arg, p, leaves));
    case AtomKind::Sin: return std::sin(eval_rec(a.arg, p, leaves));
    case AtomKind::Cos: return std::cos(eval_rec(a.arg, p, leaves));
    case AtomKind::Recip: return 1.0 / eval_rec(a.arg, p, leaves);
    case AtomKind::Leaf: {
      auto it = leaves.find(a.name);
      if (it == leaves.end()) throw UnboundLeaf(a.name);
      return it->second(eval_rec(a.arg, p, leaves));
    }
  }
  return 0.0;
}

double ipow(double v, int k) {
  if (k < 0) return 1.0 / ipow(v, -k);
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= v;
  return r;
}

double eval_rec(const Expr& e, const std::vector<double>& p, const LeafRegistry& leaves) {
  double sum = 0.0;
  for (const auto& t : e.terms()) {
    double v = t.coef.get_d();
    for (const auto& f : t.mono) v *= ipow(eval_atom(*f.first, p, leaves), f.second);
    sum += v;
  }
  return sum;
}

}  // namespace

double evaluate(const Expr& e, const std::vector<double>& point, const LeafRegistry& leaves) {
  const double v = eval_rec(e, point, leaves);
  if (!std::isfinite(v)) throw NonFinite("evaluation produced a non-finite value");
  return v;
}

// ---------------------------------------------------------------- zero test

namespace {

using Frac = std::pair<Expr, Expr>;

Frac frac_add(const Frac& a, const Frac& b) {
  if (a.second == b.second) return {a.first + b.first, a.second};
  return {a.first * b.second + b.first * a.second, a.second * b.second};
}

Frac frac_mul(const Frac& a, const Frac& b) {
  return {a.first * b.first, a.second * b.second};
}

Frac frac_pow(const Frac& a, int k) { return {a.first.pow(k), a.second.pow(k)}; }

Frac fraction_rec(const Expr& e) {
  Frac acc{Expr(), Expr(1)};
  for (const auto& t : e.terms()) {
    Frac term{Expr(t.coef), Expr(1)};
    for (const auto& f : t.mono) {
      const Atom& a = *f.first;
      if (a.kind == AtomKind::Coord) {
        const Expr x = Expr::coord(a.coord);
        term = f.second >= 0 ? frac_mul(term, {x.pow(f.second), Expr(1)})
                             : frac_mul(term, {Expr(1), x.pow(-f.second)});
      } else if (a.kind == AtomKind::Recip) {
        Frac inner = fraction_rec(a.arg);
        term = frac_mul(term, frac_pow({inner.second, inner.first}, f.second));
      } else {
        throw std::invalid_argument("to_fraction: expression is not rational");
      }
    }
    acc = frac_add(acc, term);
  }
  return acc;
}

int max_coord(const Expr& e) {
  int m = -1;
  for (const auto& t : e.terms())
    for (const auto& f : t.mono) {
      if (f.first->kind == AtomKind::Coord) m = std::max(m, f.first->coord);
      else m = std::max(m, max_coord(f.first->arg));
    }
  return m;
}

}  // namespace

std::pair<Expr, Expr> to_fraction(const Expr& e) { return fraction_rec(e); }

Tri is_zero(const Expr& e) {
  if (e.is_zero_structural()) return Tri::Yes;
  if (e.is_rational()) return fraction_rec(e).first.is_zero_structural() ? Tri::Yes : Tri::No;
  const int dim = max_coord(e) + 1;
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<int> num(-96, 96);
  int probes = 0;
  for (int attempt = 0; attempt < 256 && probes < 32; ++attempt) {
    std::vector<double> p(dim);
    for (auto& v : p) v = Rational(num(rng), 64).get_d();
    double v;
    try {
      v = eval_rec(e, p, default_leaves());
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(v)) continue;
    ++probes;
    if (std::fabs(v) > 1e-9) return Tri::No;
  }
  return Tri::Unknown;
}

// ---------------------------------------------------------------- charts

Chart Chart::real(std::vector<std::string> names) {
  Chart c;
  c.real_names_ = std::move(names);
  return c;
}

Chart Chart::complex(std::vector<std::string> names) {
  Chart c;
  c.complex_ = true;
  for (const auto& n : names) {
    c.real_names_.push_back("re_" + n);
    c.real_names_.push_back("im_" + n);
  }
  c.complex_names_ = std::move(names);
  return c;
}

int Chart::real_index(const std::string& name) const {
  for (int i = 0; i < real_dim(); ++i)
    if (real_names_[i] == name) return i;
  return -1;
}

int Chart::complex_index(const std::string& name) const {
  for (int i = 0; i < complex_dim(); ++i)
    if (complex_names_[i] == name) return i;
  return -1;
}

// ---------------------------------------------------------------- printing

namespace {

std::string print_atom(const Atom& a, const Chart& chart) {
  switch (a.kind) {
    case AtomKind::Coord:
      if (a.coord < chart.real_dim()) return chart.real_names()[a.coord];
      return "x" + std::to_string(a.coord);
    case AtomKind::Exp: return "exp(" + to_string(a.arg, chart) + ")";
    case AtomKind::Sin: return "sin(" + to_string(a.arg, chart) + ")";
    case AtomKind::Cos: return "cos(" + to_string(a.arg, chart) + ")";
    case AtomKind::Recip: return "(" + to_string(a.arg, chart) + ")";
    case AtomKind::Leaf: return a.name + "(" + to_string(a.arg, chart) + ")";
  }
  return "?";
}

}  // namespace

std::string to_string(const Expr& e, const Chart& chart) {
  if (e.terms().empty()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : e.terms()) {
    Rational c = t.coef;
    if (first) {
      if (sgn(c) < 0) {
        out += "-";
        c = -c;
      }
    } else {
      out += sgn(c) < 0 ? " - " : " + ";
      c = abs(c);
    }
    first = false;
    std::string factors;
    for (const auto& f : t.mono) {
      if (!factors.empty()) factors += "*";
      factors += print_atom(*f.first, chart);
      const int k = f.first->kind == AtomKind::Recip ? -f.second : f.second;
      if (k != 1) factors += "^" + std::to_string(k);
    }
    if (factors.empty()) {
      out += c.get_str();
    } else if (c == 1) {
      out += factors;
    } else {
      out += c.get_str() + "*" + factors;
    }
  }
  return out;
}

// ---------------------------------------------------------------- parsing

namespace {

template <class V>
class Parser {
public:
  using IdentFn = std::function<V(const std::string&, std::size_t)>;
  using CallFn = std::function<V(const std::string&, const V&, std::size_t)>;

  Parser(const std::string& text, IdentFn ident, CallFn call)
      : s_(text), ident_(std::move(ident)), call_(std::move(call)) {}

  V parse() {
    V v = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return v;
  }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  V expr() {
    V v = term();
    for (;;) {
      if (eat('+')) v = v + term();
      else if (eat('-')) v = v - term();
      else return v;
    }
  }
  V term() {
    V v = unary();
    for (;;) {
      if (eat('*')) {
        v = v * unary();
      } else if (eat('/')) {
        const std::size_t at = pos_;
        V d = unary();
        if (d.is_zero_structural()) throw ParseError("division by zero", at);
        v = v / d;
      } else {
        return v;
      }
    }
  }
  V unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return power();
  }
  V power() {
    V base = primary();
    if (!eat('^')) return base;
    const bool paren = eat('(');
    int sign = 1;
    if (eat('-')) sign = -1;
    else eat('+');
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError("expected integer exponent", pos_);
    const int k = sign * std::stoi(s_.substr(start, pos_ - start));
    if (paren && !eat(')')) throw ParseError("expected ')'", pos_);
    if (k < 0 && base.is_zero_structural()) throw ParseError("negative power of zero", start);
    return base.pow(k);
  }
  V primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      V v = expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string name = s_.substr(start, pos_ - start);
      if (eat('(')) {
        V arg = expr();
        if (!eat(')')) throw ParseError("expected ')'", pos_);
        return call_(name, arg, start);
      }
      return ident_(name, start);
    }
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }
  V number() {
    const std::size_t start = pos_;
    std::string digits;
    long long scale = 0;
    bool dot = false;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.')) {
      if (s_[pos_] == '.') {
        if (dot) throw ParseError("malformed number", pos_);
        dot = true;
      } else {
        digits += s_[pos_];
        if (dot) ++scale;
      }
      ++pos_;
    }
    if (digits.empty()) throw ParseError("malformed number", start);
    mpz_class num(digits, 10);
    mpz_class den = 1;
    for (long long i = 0; i < scale; ++i) den *= 10;
    Rational r(num, den);
    r.canonicalize();
    return V(Expr(r));
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  IdentFn ident_;
  CallFn call_;
};

}  // namespace

Expr parse_expr(const std::string& text, const Chart& chart) {
  auto ident = [&](const std::string& name, std::size_t at) {
    const int idx = chart.real_index(name);
    if (idx < 0) throw ParseError("unknown coordinate '" + name + "'", at);
    return Expr::coord(idx);
  };
  auto call = [&](const std::string& fn, const Expr& arg, std::size_t at) {
    if (fn == "exp") return Expr::exp(arg);
    if (fn == "sin") return Expr::sin(arg);
    if (fn == "cos") return Expr::cos(arg);
    if (default_leaves().count(fn)) return Expr::leaf(fn, arg);
    throw ParseError("unknown function '" + fn + "'", at);
  };
  return Parser<Expr>(text, ident, call).parse();
}

// ---------------------------------------------------------------- CExpr

CExpr CExpr::z(int j) { return CExpr(Expr::coord(2 * j), Expr::coord(2 * j + 1)); }
CExpr CExpr::zbar(int j) { return z(j).conj(); }

CExpr& CExpr::operator+=(const CExpr& o) {
  re_ += o.re_;
  im_ += o.im_;
  return *this;
}

CExpr& CExpr::operator-=(const CExpr& o) {
  re_ -= o.re_;
  im_ -= o.im_;
  return *this;
}

CExpr operator*(const CExpr& a, const CExpr& b) {
  if (a.im_.is_zero_structural() && b.im_.is_zero_structural()) return CExpr(a.re_ * b.re_);
  return CExpr(a.re_ * b.re_ - a.im_ * b.im_, a.re_ * b.im_ + a.im_ * b.re_);
}

CExpr operator/(const CExpr& a, const CExpr& b) {
  if (b.im_.is_zero_structural()) return CExpr(a.re_ / b.re_, a.im_ / b.re_);
  const Expr n = b.re_ * b.re_ + b.im_ * b.im_;
  const CExpr num = a * b.conj();
  return CExpr(num.re_ / n, num.im_ / n);
}

CExpr CExpr::pow(int k) const {
  if (k < 0) return (CExpr(1) / *this).pow(-k);
  CExpr r(1);
  for (int i = 0; i < k; ++i) r = r * *this;
  return r;
}

CExpr cexp(const CExpr& a) {
  const Expr ea = Expr::exp(a.re());
  if (a.im().is_zero_structural()) return CExpr(ea);
  return CExpr(ea * Expr::cos(a.im()), ea * Expr::sin(a.im()));
}

namespace {
Expr cosh_e(const Expr& b) { return (Expr::exp(b) + Expr::exp(-b)) * Expr(Rational(1, 2)); }
Expr sinh_e(const Expr& b) { return (Expr::exp(b) - Expr::exp(-b)) * Expr(Rational(1, 2)); }
}  // namespace

CExpr csin(const CExpr& a) {
  if (a.im().is_zero_structural()) return CExpr(Expr::sin(a.re()));
  return CExpr(Expr::sin(a.re()) * cosh_e(a.im()), Expr::cos(a.re()) * sinh_e(a.im()));
}

CExpr ccos(const CExpr& a) {
  if (a.im().is_zero_structural()) return CExpr(Expr::cos(a.re()));
  return CExpr(Expr::cos(a.re()) * cosh_e(a.im()), -(Expr::sin(a.re()) * sinh_e(a.im())));
}

CExpr differentiate(const CExpr& e, int coord) {
  return CExpr(differentiate(e.re(), coord), differentiate(e.im(), coord));
}

CExpr d_dz(const CExpr& e, int j) {
  const Expr ax = differentiate(e.re(), 2 * j), ay = differentiate(e.re(), 2 * j + 1);
  const Expr bx = differentiate(e.im(), 2 * j), by = differentiate(e.im(), 2 * j + 1);
  const Expr half(Rational(1, 2));
  return CExpr(half * (ax + by), half * (bx - ay));
}

CExpr d_dzbar(const CExpr& e, int j) {
  const Expr ax = differentiate(e.re(), 2 * j), ay = differentiate(e.re(), 2 * j + 1);
  const Expr bx = differentiate(e.im(), 2 * j), by = differentiate(e.im(), 2 * j + 1);
  const Expr half(Rational(1, 2));
  return CExpr(half * (ax - by), half * (bx + ay));
}

Tri is_zero(const CExpr& e) {
  const Tri a = is_zero(e.re());
  const Tri b = is_zero(e.im());
  if (a == Tri::No || b == Tri::No) return Tri::No;
  if (a == Tri::Yes && b == Tri::Yes) return Tri::Yes;
  return Tri::Unknown;
}

std::complex<double> evaluate(const CExpr& e, const std::vector<double>& point,
                              const LeafRegistry& leaves) {
  return {evaluate(e.re(), point, leaves), evaluate(e.im(), point, leaves)};
}

std::string to_string(const CExpr& e, const Chart& chart) {
  if (e.im().is_zero_structural()) return to_string(e.re(), chart);
  if (e.re().is_zero_structural()) return "I*(" + to_string(e.im(), chart) + ")";
  return to_string(e.re(), chart) + " + I*(" + to_string(e.im(), chart) + ")";
}

CExpr parse_cexpr(const std::string& text, const Chart& chart) {
  auto ident = [&](const std::string& name, std::size_t at) {
    if (name == "I") return CExpr::i();
    const int c = chart.complex_index(name);
    if (c >= 0) return CExpr::z(c);
    const int r = chart.real_index(name);
    if (r >= 0) return CExpr(Expr::coord(r));
    throw ParseError("unknown coordinate '" + name + "'", at);
  };
  auto call = [&](const std::string& fn, const CExpr& arg, std::size_t at) {
    if (fn == "exp") return cexp(arg);
    if (fn == "sin") return csin(arg);
    if (fn == "cos") return ccos(arg);
    if (fn == "conj") return arg.conj();
    if (fn == "re") return CExpr(arg.re());
    if (fn == "im") return CExpr(arg.im());
    if (default_leaves().count(fn)) return CExpr(Expr::leaf(fn, arg.re()));
    throw ParseError("unknown function '" + fn + "'", at);
  };
  return Parser<CExpr>(text, ident, call).parse();
}

// ---------------------------------------------------------------- compiled

CompiledExpr::CompiledExpr(const Expr& e, const LeafRegistry& leaves) {
  root_ = add_expr(e, leaves);
}

int CompiledExpr::add_atom(const AtomPtr& a, const LeafRegistry& leaves) {
  for (const auto& s : seen_)
    if (s.first == a.get() || compare(*s.first, *a) == 0) return s.second;
  Slot slot;
  slot.kind = a->kind;
  slot.coord = a->coord;
  if (a->kind != AtomKind::Coord) slot.arg = add_expr(a->arg, leaves);
  if (a->kind == AtomKind::Leaf) {
    auto it = leaves.find(a->name);
    if (it == leaves.end()) throw UnboundLeaf(a->name);
    slot.leaf = it->second;
  }
  slots_.push_back(std::move(slot));
  const int idx = static_cast<int>(slots_.size()) - 1;
  seen_.push_back({a.get(), idx});
  return idx;
}

int CompiledExpr::add_expr(const Expr& e, const LeafRegistry& leaves) {
  Poly p;
  for (const auto& t : e.terms()) {
    std::vector<std::pair<int, int>> fs;
    for (const auto& f : t.mono) fs.push_back({add_atom(f.first, leaves), f.second});
    p.coef.push_back(t.coef.get_d());
    p.factors.push_back(std::move(fs));
  }
  polys_.push_back(std::move(p));
  return static_cast<int>(polys_.size()) - 1;
}

double CompiledExpr::operator()(const double* point) const {
  std::vector<double> vals(slots_.size());
  auto poly = [&](int i) {
    const Poly& p = polys_[i];
    double sum = 0.0;
    for (std::size_t t = 0; t < p.coef.size(); ++t) {
      double v = p.coef[t];
      for (const auto& f : p.factors[t]) v *= ipow(vals[f.first], f.second);
      sum += v;
    }
    return sum;
  };
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const Slot& sl = slots_[s];
    switch (sl.kind) {
      case AtomKind::Coord: vals[s] = point[sl.coord]; break;
      case AtomKind::Exp: vals[s] = std::exp(poly(sl.arg)); break;
      case AtomKind::Sin: vals[s] = std::sin(poly(sl.arg)); break;
      case AtomKind::Cos: vals[s] = std::cos(poly(sl.arg)); break;
      case AtomKind::Recip: vals[s] = 1.0 / poly(sl.arg); break;
      case AtomKind::Leaf: vals[s] = sl.leaf(poly(sl.arg)); break;
    }
  }
  return poly(root_);
}

Jet CompiledExpr::jet(const std::vector<Jet>& coords) const {
  const JetSpacePtr& space = coords.front().space();
  std::vector<Jet> vals(slots_.size());
  auto poly = [&](int i) {
    const Poly& p = polys_[i];
    Jet sum(space, cd(0.0));
    for (std::size_t t = 0; t < p.coef.size(); ++t) {
      Jet v(space, cd(p.coef[t]));
      for (const auto& f : p.factors[t]) v = v * vals[f.first].pow(f.second);
      sum += v;
    }
    return sum;
  };
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    const Slot& sl = slots_[s];
    switch (sl.kind) {
      case AtomKind::Coord: vals[s] = coords[sl.coord]; break;
      case AtomKind::Exp: vals[s] = poly(sl.arg).exp(); break;
      case AtomKind::Sin: vals[s] = poly(sl.arg).sin(); break;
      case AtomKind::Cos: vals[s] = poly(sl.arg).cos(); break;
      case AtomKind::Recip: vals[s] = poly(sl.arg).inverse(); break;
      case AtomKind::Leaf: {
        const Jet a = poly(sl.arg);
        Jet v(space, cd(sl.leaf(a.value().real())));
        vals[s] = a.variation() == 0.0 ? v : v.truncated(0);
        break;
      }
    }
  }
  return poly(root_);
}

}  // namespace charlap
