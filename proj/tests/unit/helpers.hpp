#pragma once

#include <random>

#include "charlap/exterior.hpp"
#include "charlap/framedgeom.hpp"

namespace testutil {

inline charlap::Expr random_poly(std::mt19937& rng, int nvars, int terms = 3, int maxdeg = 2) {
  std::uniform_int_distribution<int> coef(-3, 3), expo(0, maxdeg);
  charlap::Expr p;
  for (int t = 0; t < terms; ++t) {
    charlap::Expr mono(coef(rng));
    for (int v = 0; v < nvars; ++v) mono = mono * charlap::Expr::coord(v).pow(expo(rng));
    p = p + mono;
  }
  return p;
}

inline charlap::CExpr random_cpoly(std::mt19937& rng, int nvars, bool complex) {
  if (!complex) return charlap::CExpr(random_poly(rng, nvars));
  return charlap::CExpr(random_poly(rng, nvars), random_poly(rng, nvars));
}

/// Random form with polynomial coefficients on every basis mask with
/// probability 1/2.
inline charlap::Form random_form(std::mt19937& rng, const charlap::Coframe& cf, int nvars,
                                 bool complex, int grade = -1) {
  charlap::Form f(cf);
  std::bernoulli_distribution keep(0.5);
  for (unsigned m = 0; m < (1u << cf.dim); ++m) {
    if (grade >= 0 && charlap::lam::grade(m) != grade) continue;
    if (!keep(rng)) continue;
    f.add(m, random_cpoly(rng, nvars, complex));
  }
  return f;
}

}  // namespace testutil
