#include "charlap/charops.hpp"
#include "charlap/quadrature.hpp"

namespace charlap {

L2Adjointness l2_adjointness(const Scenario& s, const Form& alpha, const Form& beta,
                             const std::vector<std::pair<double, double>>& box, int nodes,
                             int power) {
  const TensorGrid grid(box, nodes);
  auto prepared = [](const Form& f) {
    return f.coframe().real_of_complex ? to_complex_coordinates(f) : f;
  };
  const Form alpha_c = prepared(alpha), beta_c = prepared(beta);
  double a_re = 0.0, a_im = 0.0, b_re = 0.0, b_im = 0.0;
#pragma omp parallel for reduction(+ : a_re, a_im, b_re, b_im) schedule(dynamic)
  for (long k = 0; k < grid.size(); ++k) {
    std::vector<double> x;
    double w = 0.0;
    grid.node(k, x, w);
    const LocalGeometry g(s, x, 1, false);
    Jet cut(g.space(), 1.0);
    for (int i = 0; i < g.n(); ++i) {
      const auto [lo, hi] = box[i];
      const Jet si = (g.coords()[i] - Jet(g.space(), 0.5 * (lo + hi))) * cd(2.0 / (hi - lo));
      const Jet t = Jet(g.space(), 1.0) - si * si;
      for (int p = 0; p < power; ++p) cut = cut * t;
    }
    const JetMat a = cut * section_from_form(g, alpha_c), b = cut * section_from_form(g, beta_c);
    const CVec da = apply_dpart_adjoint(g, a, DPart::Full).value().col(0);
    const CVec db = apply_dpart(g, b, DPart::Full).value().col(0);
    const CVec av = a.value().col(0), bv = b.value().col(0);
    const CMat& m = g.M.value();
    const double f = w * g.rho.value().real();
    const cd lhs = f * bv.dot(m * da);
    const cd rhs = f * db.dot(m * av);
    a_re += lhs.real();
    a_im += lhs.imag();
    b_re += rhs.real();
    b_im += rhs.imag();
  }
  return {cd(a_re, a_im), cd(b_re, b_im)};
}

}  // namespace charlap
