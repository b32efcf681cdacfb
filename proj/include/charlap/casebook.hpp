#pragma once

// Non-smooth weakly harmonic witnesses, their quadrature verifier, and the
// aggregated scenario report.

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "charlap/hermitian.hpp"

namespace charlap {

enum class WitnessKind { RealDegree1, ComplexDegree2Standard, ComplexDegree2Invariant };
const char* to_string(WitnessKind k);
WitnessKind witness_kind_from_string(const std::string& name);

/// Bump-localized random test forms μ = bump · Σ p_A θ^A over W coframe
/// monomials of one Q-degree, p_A random affine polynomials.
struct TestFamily {
  int degree = 0;
  /// Trials cycle through this many bump cubes.
  int cubes = 4;
  /// Half-width of a cube relative to the smallest box width.
  double radius_fraction = 0.25;
};

struct QuadratureConfig {
  std::vector<std::pair<double, double>> box;
  int nodes = 48;
  /// Second node count for the stability check.
  int check_nodes = 96;
  std::vector<bool> periodic;
};

struct WeakHarmonicWitness {
  WitnessKind kind = WitnessKind::RealDegree1;
  std::string recipe;
  int degree = 0;
  /// form = coefficient * shape on the scenario's frame coframe; the
  /// coefficient may hold non-smooth leaves.
  Form form;
  Form shape;
  CExpr coefficient;
  /// Index of the frame field X_1 is built from, and its combination of the
  /// W frame fields (complex kinds).
  std::vector<std::complex<double>> combination;
  /// First integral h of X_1 the leaf is applied to, as text.
  std::string invariant;
  /// Transport of the real recipe: μ_1 = exp(-∫ div X_1 dt) |h| along the
  /// X_1 orbit, with the time measured by coordinate `flow_axis`.
  Expr divergence;
  VectorField flow;
  int flow_axis = -1;
  TestFamily tests;
  QuadratureConfig quadrature;
};

WeakHarmonicWitness build_witness(const Scenario& s, WitnessKind kind);
/// Same witness data with the leaf coefficient replaced by the flow
/// coordinate, which X_1 does not annihilate.
WeakHarmonicWitness control_witness(const WeakHarmonicWitness& w);
WeakHarmonicWitness zero_witness(const WeakHarmonicWitness& w);

/// Transport factor exp(-∫ div X_1) of the real recipe at x (1 when the
/// divergence vanishes).
double transport_weight(const WeakHarmonicWitness& w, const std::vector<double>& x);

struct WeakHarmonicResult {
  /// Per trial |<w, d_Q μ>| / (|w|_{L²(K)} |dμ|_{L²}) over the bump cube K.
  std::vector<double> pairings;
  double max_pairing = 0.0;
  /// max |pairing(nodes) - pairing(check_nodes)|.
  double stability = 0.0;
  /// max |π_Q w - w| / |w| over sampled quadrature nodes.
  double q_residual = 0.0;
  /// Whether the axis-by-axis evaluation of the tensor rule was used.
  bool separable = false;
};

enum class Kernel { Serial, OpenMP };

WeakHarmonicResult weak_harmonicity_verify(const WeakHarmonicWitness& w, const Scenario& s,
                                           int trials, unsigned seed = 1, double tolerance = 1e-6);

/// Node-by-node evaluation of the same pairings on one cube with the given
/// node count; the reference for the axis-by-axis path.
std::vector<double> weak_pairings_pointwise(const WeakHarmonicWitness& w, const Scenario& s,
                                            int trials, int nodes, Kernel kernel,
                                            unsigned seed = 1);

struct ReportOptions {
  unsigned seed = 1;
  int audit_samples = 200;
  int symbol_points = 100;
  int kaehler_forms = 4;
  int kaehler_points = 10;
  int identity_points = 50;
  int identity_forms = 20;
  int obstruction_points = 100;
  int witness_trials = 100;
  /// Check names to run (rank_audit, bracket_generation, hoermander,
  /// structural, symbol, obstruction_symbol, kaehler, sub_kaehler,
  /// involutivity, witnesses); empty runs every applicable check.
  std::vector<std::string> checks;
  /// Witness kinds to verify; empty tries every kind matching the scenario.
  std::vector<WitnessKind> witness_kinds;
};

/// Names accepted in ReportOptions::checks.
const std::vector<std::string>& report_check_names();

inline constexpr const char* kReportSchema = "charlap-report/1";

/// Aggregated checks for one scenario; failures are recorded, not thrown.
nlohmann::json run_report(const Scenario& s, const ReportOptions& opt = {});
/// JSON text with every double written to 17 significant digits.
std::string report_text(const nlohmann::json& report);

}  // namespace charlap
