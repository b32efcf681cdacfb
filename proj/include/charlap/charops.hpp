#pragma once

// Characteristic operators d_Q, d_Q*, Δ_Q and their Dolbeault parts.
//
// Operators act on Λ-valued jets over the ambient coframe at a point
// (LocalGeometry). Projectors enter numerically as jets; forms with symbolic
// coefficients are converted to jets with section_from_form. Symbolic
// exterior_d and codifferential work on Form directly.

#include <functional>
#include <string>

#include "charlap/exterior.hpp"
#include "charlap/framedgeom.hpp"

namespace charlap {

/// Dual coframe θ^k of the full frame as a Form coframe.
Coframe frame_coframe(const Scenario& s);

/// Symbolic d of a form on the coordinate coframe, the complex coordinate
/// coframe, or the frame coframe (via structure functions).
Form exterior_d(const Form& a, const Scenario& s);
Form exterior_d(const Form& a, const Scenario& s, const StructureFunctions& sf);
/// Symbolic d* = (-1)^{n(k+1)+1} ⋆d⋆ for real frame-orthonormal scenarios on
/// the frame coframe. DegenerateMetric otherwise.
Form codifferential(const Form& a, const Scenario& s);

/// Λ-jet of a form at the geometry's point in the ambient coframe.
JetMat section_from_form(const LocalGeometry& g, const Form& a);

enum class DPart { Full, Holomorphic, Antiholomorphic };
/// d, ∂ or ∂̄ on a Λ-jet (valid order drops by one).
JetMat apply_dpart(const LocalGeometry& g, const JetMat& u, DPart part);
/// Formal L² adjoint of apply_dpart for the volume ρ dx and fiber metric M.
JetMat apply_dpart_adjoint(const LocalGeometry& g, const JetMat& v, DPart part);

enum class Bundle { Lambda, LambdaW, Q };
const char* to_string(Bundle b);

struct OperatorField {
  std::string name;
  int order = 0;
  Bundle domain = Bundle::Lambda;
  Bundle codomain = Bundle::Lambda;
  std::string provenance;
  /// Raw action; inputs are first projected to the domain by operator().
  std::function<JetMat(const LocalGeometry&, const JetMat&)> action;

  JetMat operator()(const LocalGeometry& g, const JetMat& u) const;
};

OperatorField compose(const OperatorField& a, const OperatorField& b);
OperatorField operator+(const OperatorField& a, const OperatorField& b);
OperatorField operator-(const OperatorField& a, const OperatorField& b);
/// Graded-free commutator ab - ba.
OperatorField commutator(const OperatorField& a, const OperatorField& b);
/// Anticommutator ab + ba.
OperatorField anticommutator(const OperatorField& a, const OperatorField& b);

struct CharacteristicOps {
  OperatorField d, dstar, dW, dWstar, dQ, dQstar, lapQ;
  /// Complex scenarios only (empty action otherwise).
  OperatorField delQ, delbarQ, delQstar, delbarQstar;
};
CharacteristicOps build_characteristic_ops(const Scenario& s);

/// Ambient covector components η_a = ξ(E_a) of a real covector ξ given in
/// real coordinates.
CVec ambient_covector(const LocalGeometry& g, const RVec& xi);
/// Real coordinate covector with frame components ξ(e_k) = c_k (real scenarios).
RVec covector_from_frame(const LocalGeometry& g, const RVec& c);

/// Coefficient of t^order in e^{-itf} P e^{itf} s at x, f = ξ·(y - x), for
/// each column s of `inputs`, held constant in the ambient coframe.
CMat symbol_oracle_ambient(const LocalGeometry& g, const OperatorField& p, int order,
                           const RVec& xi, const CMat& inputs);
/// Same on the Q fiber, in the M-orthonormal Q basis of g.
CMat symbol_oracle(const LocalGeometry& g, const OperatorField& p, int order, const RVec& xi);

struct ClosedFormSymbols {
  /// On Λ in the ambient coframe.
  CMat s1_dQ, s1_dQstar, s2_lapQ;
  /// Restricted to the Q basis.
  CMat q_dQ, q_dQstar, q_lapQ;
};
ClosedFormSymbols closed_form_symbols(const LocalGeometry& g, const RVec& xi);

/// W-part of the ambient covector of ξ, restricted to the (1,0) or (0,1)
/// ambient slots for the Dolbeault parts.
CVec xi_w(const LocalGeometry& g, const RVec& xi, DPart part = DPart::Full);
/// Wedge by ξ_W and its metric adjoint i_{ξ_W*} on Λ.
CMat xi_w_wedge(const LocalGeometry& g, const RVec& xi, DPart part = DPart::Full);
CMat xi_w_interior(const LocalGeometry& g, const RVec& xi, DPart part = DPart::Full);
/// Operator on Λ to Q-basis coordinates: B^H M A B.
CMat to_q_basis(const LocalGeometry& g, const CMat& a);

struct HoermanderReport {
  bool componentwise = true;
  RVec witness_xi;
  double residual = 0.0;
  CMat witness_symbol;
};
/// σ₂(Δ_Q, ξ) restricted to the Q block of the given grade (or bidegree in
/// complex scenarios; grade -1 means all of Q) tested for being scalar.
HoermanderReport hoermander_applicability(const Scenario& s, const std::vector<double>& x,
                                          int samples, int grade = -1,
                                          std::pair<int, int> bidegree = {-1, -1},
                                          unsigned seed = 1);

struct L2Adjointness {
  /// ⟨d*α, β⟩ and ⟨α, dβ⟩ over the box.
  cd dstar_pairing, d_pairing;
  double defect() const { return std::abs(dstar_pairing - d_pairing); }
};
/// Both sides of the L² adjointness of d for the compactly supported forms
/// c·α, c·β, c = Π_i (1 - s_i²)^power with s_i the box coordinate scaled to
/// [-1, 1], by tensor Gauss–Legendre quadrature; d and d* act on jets at
/// every node.
L2Adjointness l2_adjointness(const Scenario& s, const Form& alpha, const Form& beta,
                             const std::vector<std::pair<double, double>>& box, int nodes,
                             int power = 2);

}  // namespace charlap
