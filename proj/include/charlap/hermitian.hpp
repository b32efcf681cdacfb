#pragma once

// Hermitian layer of a complex scenario: Dolbeault split, fundamental form
// and torsion, Lefschetz and torsion operators, the Kähler diagnostic,
// second fundamental forms, the sub-Kähler identity and the bigrading
// obstruction symbol.
//
// Pointwise operators act on Λ over the ambient coframe (dz, dz̄), like the
// rest of the numeric layer.

#include <array>
#include <optional>
#include <vector>

#include "charlap/charops.hpp"

namespace charlap {

/// h(X_j, X_k) over the scenario frame (holomorphic part for complex scenarios).
std::vector<std::vector<CExpr>> frame_gram(const Scenario& s);

struct DolbeaultPair {
  Form del;
  Form delbar;
};
/// ∂a and ∂̄a of a form of pure bidegree (each pure component is split
/// separately otherwise).
DolbeaultPair dolbeault_split(const Form& a, const Scenario& s);

using Tensor3 = std::vector<std::vector<std::vector<CExpr>>>;
using CTensor3 = std::vector<std::vector<std::vector<cd>>>;

/// ⟨T(u,v), w̄⟩ = kTorsionScale * (∂Θ)(u, v, w̄), with forms evaluated as
/// determinants of coframe pairings.
inline const cd kTorsionScale{0.0, -1.0};

struct HermitianData {
  /// Θ = i Σ h(X_j, X_k) θ^j ∧ θ̄^k on the frame coframe.
  Form theta;
  /// Θ restricted to the W indices of the frame coframe.
  Form theta_w;
  /// ∂Θ, of type (2,1).
  Form del_theta;
  /// ⟨T(X_i, X_j), X̄_k⟩ over the holomorphic scenario frame.
  Tensor3 torsion;
};
HermitianData hermitian_data(const Scenario& s);

/// Pointwise Hermitian data at the point of a LocalGeometry.
struct HermitianFiber {
  int m = 0;
  int n = 0;
  /// Ambient components of w_1..w_m, w̄_1..w̄_m; w_j orthonormal for h with
  /// w_1..w_n spanning W.
  CMat frame;
  /// Rows w^1..w^m, w̄^1..w̄^m (inverse of `frame`).
  CMat coframe;
  /// ∂Θ as a Λ vector.
  CVec del_theta;
  /// ⟨T(w_i, w_j), w̄_k⟩.
  CTensor3 torsion;
  CMat L, Lambda, LW, LambdaW;
  /// 𝒯 = [Λ, ∂Θ] and 𝒯_W = [Λ_W, π_W ∂Θ π_W].
  CMat T, TW;
};
HermitianFiber hermitian_fiber(const LocalGeometry& g, const HermitianData& h);

/// Wedge by a form given as a Λ vector.
CMat form_wedge_matrix(const CVec& a);
/// ω(u_1, ..., u_k) of a k-form on ambient vectors.
cd evaluate_form(const CVec& a, const std::vector<CVec>& vectors);
/// Complex conjugate of an operator on Λ: v ↦ conj(P conj v).
CMat conj_operator(const LocalGeometry& g, const CMat& p);
/// Fiberwise adjoint M⁻¹ Pᴴ M.
CMat fiber_adjoint(const LocalGeometry& g, const CMat& p);
/// Graded commutator AB − (−1)^{ab} BA for operators of parity a, b.
CMat supercommutator(const CMat& a, int parity_a, const CMat& b, int parity_b);

/// 𝒯 from the frame expansion in terms of (∂Θ)(w_j, w_k, w̄_l).
CMat torsion_operator_expansion(const HermitianFiber& f);
/// Symbol of [∂̄*, 𝒯] at ξ from the contraction formula −i Σ ξ(w_i)[i_{w̄_i}, 𝒯].
CMat torsion_symbol(const HermitianFiber& f, const CVec& eta);
/// Same from the expansion i Σ (∂Θ)(w_j, w_k, w̄_i) w^k ∧ i_{w̄_j}.
CMat torsion_symbol_expansion(const HermitianFiber& f, const CVec& eta);

/// 𝒯 as a zero-order operator field (jets of Λ and ∂Θ).
OperatorField torsion_operator_field(const HermitianData& h);

struct KaehlerReport {
  Tri del_theta_zero = Tri::Unknown;
  /// max ‖σ([∂̄*, 𝒯], ξ)‖ over sampled (x, ξ).
  double torsion_symbol_residual = 0.0;
  std::vector<double> symbol_witness_point;
  RVec symbol_witness_xi;
  /// max relative off-bidegree L² mass of Δu over sampled pure-type forms.
  double bigrading_residual = 0.0;
  std::vector<double> bigrading_witness_center;
  std::pair<int, int> bigrading_witness_type{-1, -1};
  Tri is_kaehler = Tri::Unknown;
  bool consistent = false;
};
KaehlerReport kaehler_check(const Scenario& s, int sample_forms, int sample_points,
                            int quadrature_nodes = 5, unsigned seed = 1);

/// Off-bidegree L² mass of Δu relative to ‖Δu‖ for a bump form of type
/// (p,q) centered at `center`, by tensor Gauss–Legendre quadrature.
double bigrading_defect(const Scenario& s, const Form& u, const std::vector<double>& center,
                        double radius, int nodes);

struct SecondFundamentalForms {
  /// Operators on ambient vectors (A: N → W on T^{1,0}) and on Λ
  /// (B: F_{φ,⊥} → F_φ on Λ^{•,0}W*), with their adjoints.
  CMat A, Astar, B, Bstar;
};
/// A(v̄), B(v̄) for an antiholomorphic direction v̄ given by ambient components.
SecondFundamentalForms second_fundamental(const LocalGeometry& g, const CVec& vbar);
/// Vector projector derivative E_v̄ Π_W by central differences of step h.
CMat projector_derivative_fd(const Scenario& s, const std::vector<double>& x, const CVec& vbar,
                             double h = 1e-5);

struct SubKaehlerReport {
  double residual = 0.0;
  /// Largest correction-term magnitude.
  double correction = 0.0;
  std::vector<double> worst_point;
};
/// Residual of [Λ_W, ∂_W] = i(∂̄_W* + 𝒯̄_W*) − i Σ c_j i_{w̄_j} π_W on
/// random W-forms.
SubKaehlerReport sub_kaehler_residual(const Scenario& s, int sample_points, int sample_forms,
                                      unsigned seed = 1);

/// i times the three-term obstruction formula as an operator on Λ,
/// sandwiched by π_Q.
CMat obstruction_symbol_ambient(const LocalGeometry& g, const HermitianData& h, const RVec& xi,
                                bool with_b_terms = true);
/// Same on the Q basis of g.
CMat obstruction_symbol(const LocalGeometry& g, const HermitianData& h, const RVec& xi);
/// Torsion/bracket term alone (no B-terms), on the Q basis of g.
CMat obstruction_bracket_term(const LocalGeometry& g, const HermitianData& h, const RVec& xi);

/// Real covectors annihilating W (a basis of N* ⊕ N̄* restricted to real ξ).
std::vector<RVec> normal_covectors(const LocalGeometry& g);
/// i Σ_k ξ(π_N[w_j, w_k]) w^k as a Λ vector.
CVec bracket_obstruction(const LocalGeometry& g, const HermitianFiber& f, const RVec& xi, int j);

struct InvolutivityVerdict {
  bool bigrading_preserved = true;
  /// Symbolic involutivity of W.
  bool involutive = true;
  double max_obstruction = 0.0;
  std::vector<double> witness_point;
  RVec witness_xi;
  int witness_j = -1;
};
InvolutivityVerdict involutivity_verdict(const Scenario& s, int sample_points, unsigned seed = 1);

}  // namespace charlap
