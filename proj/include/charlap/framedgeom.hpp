#pragma once

// Framed geometry of a Pfaffian system at a point.
//
// Everything numeric is expressed over a constant "ambient" coframe e^a:
// the coordinate differentials dx^i on a real chart, or (dz, dz̄) on a
// complex chart, with dual derivations E_a. Vector fields are columns of
// E-components, forms are vectors over the bitmask basis of Λ(e).

#include <optional>
#include <string>
#include <vector>

#include "charlap/exterior.hpp"
#include "charlap/jet.hpp"
#include "charlap/symexpr.hpp"

namespace charlap {

enum class MetricKind { FrameOrthonormal, FrameGram, CoordinateGram };

struct Scenario {
  std::string name;
  std::string description;
  Chart chart;
  /// Real chart: n fields, row k holds the coefficients of field k along
  /// the coordinate partials. Complex chart: m holomorphic fields along ∂z_j.
  std::vector<std::vector<CExpr>> frame;
  MetricKind metric = MetricKind::FrameOrthonormal;
  /// Real symmetric (real chart) or Hermitian h(·,·) (complex chart) Gram
  /// matrix on the frame or on the coordinate partials, per `metric`.
  std::vector<std::vector<CExpr>> gram;
  std::vector<int> distribution;
  /// Per real coordinate.
  std::vector<std::pair<double, double>> box;
  std::vector<bool> periodic;
  /// Majority φ-rank per grade, filled in by the rank audit at load time.
  std::vector<int> phi_ranks;

  bool is_complex() const { return chart.is_complex(); }
  int real_dim() const { return chart.real_dim(); }
  /// Size of the ambient coframe (= real_dim).
  int ambient_dim() const { return chart.real_dim(); }
  int frame_size() const { return static_cast<int>(frame.size()); }
  /// Full-frame indices spanning W (⊗C): distribution, plus conjugates.
  std::vector<int> w_indices() const;
  /// Full-frame indices whose dual coframe spans the annihilator F.
  std::vector<int> f_indices() const;
};

/// Ambient coframe data: e^a = sum_i C(a,i) dx^i, E_a = sum_i D(i,a) ∂_i.
struct Ambient {
  CMat C;
  CMat D;
  /// E_a conjugates to E_{sigma[a]}.
  std::vector<int> sigma;
  /// Signed permutation conjugating ambient form coefficients on Λ:
  /// conj-form = Kc * conj(coefficients).
  CMat Kc;
  static Ambient of(const Scenario& s);
};

/// Symbolic vector field by ambient components.
using VectorField = std::vector<CExpr>;

/// Ambient components of each full-frame field (complex: X_k then X̄_k).
std::vector<VectorField> full_frame(const Scenario& s);
/// X(f) with X given by ambient components.
CExpr apply_field(const Scenario& s, const VectorField& x, const CExpr& f);
VectorField lie_bracket(const Scenario& s, const VectorField& x, const VectorField& y);

struct StructureFunctions {
  /// c[k][i][j] with [e_i, e_j] = sum_k c^k_ij e_k over the full frame.
  std::vector<std::vector<std::vector<CExpr>>> c;
};
StructureFunctions structure_functions(const Scenario& s);
/// Symbolic inverse of a square matrix by Gaussian elimination.
std::vector<std::vector<CExpr>> symbolic_inverse(const std::vector<std::vector<CExpr>>& m);

/// Jets of all pointwise geometric data at x. 1-form-level objects are
/// valid to order lam_order + 1, objects on Λ to order lam_order.
class LocalGeometry {
public:
  LocalGeometry(const Scenario& s, std::vector<double> x, int lam_order,
                bool enforce_rank = true);

  const Scenario& scenario() const { return *s_; }
  const std::vector<double>& point() const { return x_; }
  int n() const { return n_; }
  int lam_order() const { return lam_order_; }
  const JetSpacePtr& space() const { return sp_; }
  const Ambient& ambient() const { return amb_; }
  const std::vector<Jet>& coords() const { return coords_; }

  /// Frame matrix (columns = full frame in E-components) and its inverse.
  JetMat V, Vinv;
  /// Bilinear metric g_C(E_a, E_b).
  JetMat G;
  /// Hermitian form on vectors <u,v> = v^H Hv u, and on 1-forms via M1.
  JetMat Hv, M1;
  Jet rho;
  /// Vector projector onto W and the 1-form projector onto W* (= PW^T).
  JetMat PW, pW;
  /// Λ-level: projector onto ΛW*, Gram matrix and inverse, F_φ and Q.
  JetMat piW, M, Minv, PFphi, piQ;
  /// Selected spanning columns of F_φ.
  JetMat Bphi;
  /// Rank of φ: F ⊗ Λ^k W* → Λ^{k+2} W* per k.
  std::vector<int> phi_rank;
  /// M-orthonormal basis of the Q fiber at x and the grade of each column.
  CMat q_basis;
  std::vector<int> q_grade;
  std::vector<std::pair<int, int>> q_bidegree;

  /// E_a applied to a jet.
  Jet E(int a, const Jet& u) const;
  JetMat E(int a, const JetMat& u) const;
  /// 1-form jet θ^k (row k of V^{-1}) as an N x 1 jet.
  JetMat coframe_form(int k) const;
  /// W-restricted dual coframe α^k = p_W θ^k.
  JetMat w_coframe(int k) const;
  /// Λ-vector jet of a 1-form.
  JetMat one_form_to_lambda(const JetMat& alpha) const;
  /// Exterior derivative of a 1-form given as N x 1 jet, as Λ-vector jet.
  JetMat d_one_form(const JetMat& alpha) const;

private:
  void build_frame();
  void build_metric();
  void build_projectors(bool enforce_rank);
  void build_q_basis();

  const Scenario* s_;
  std::vector<double> x_;
  int n_;
  int lam_order_;
  JetSpacePtr sp_;
  Ambient amb_;
  std::vector<Jet> coords_;
};

/// Λ-vector jet wedge product a ∧ b (both 2^N x 1).
JetMat wedge_jet(const JetMat& a, const JetMat& b);
/// Constant form coefficient vector as a jet.
JetMat constant_section(const JetSpacePtr& sp, const CVec& v);

struct FiberData {
  std::vector<double> point;
  CMat w_basis, n_basis, f_basis;
  std::vector<int> phi_rank;
  CMat pi_W, pi_Fphi, pi_Fperp, pi_Q;
  CMat lambda_gram;
  CMat q_basis;
  std::vector<int> q_grade;
  std::vector<std::pair<int, int>> q_bidegree;
  /// Dimension of Q per grade, and per bidegree in complex scenarios.
  std::vector<int> q_dims() const;
};

FiberData fiber_projectors(const Scenario& s, const std::vector<double>& x);

/// Matrix of φ_x : F ⊗ Λ^k W* → Λ^{k+2} W* in the dual-frame bases,
/// columns ordered (θ^f, β_J) with f outer. `via_brackets` evaluates
/// -θ([v,w]) from symbolic brackets instead of dθ of the coframe jet.
CMat phi_map(const Scenario& s, const std::vector<double>& x, int k, bool via_brackets);

struct BracketGeneration {
  bool is_bg = false;
  int step = -1;
  std::vector<int> ranks;
};
BracketGeneration bracket_generating(const Scenario& s, const std::vector<double>& x,
                                     int max_depth);

struct RankAudit {
  std::vector<int> majority;
  std::vector<std::vector<double>> outliers;
  std::vector<std::vector<int>> outlier_ranks;
  int samples = 0;
  bool pass() const { return outliers.empty(); }
};
RankAudit constant_rank_audit(const Scenario& s, int sample_count, unsigned seed = 0);

/// Halton point `index` (from 1) mapped into the scenario box; `seed`
/// rotates the sequence by a fixed per-seed offset.
std::vector<double> halton_point(const Scenario& s, int index, unsigned seed = 0);

/// Singular-value rank with absolute threshold 1e-9.
int numeric_rank(const CMat& a, double tol = 1e-9);
/// M-orthonormalize the columns (Gram–Schmidt in order), dropping columns
/// whose residual norm is below tol.
CMat gram_schmidt(const CMat& cols, const CMat& m, double tol = 1e-9,
                  std::vector<int>* kept = nullptr);

}  // namespace charlap
