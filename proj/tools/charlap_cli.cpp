#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>
#include <omp.h>

#include "charlap/casebook.hpp"
#include "charlap/errors.hpp"
#include "charlap/scenarios.hpp"

using namespace charlap;
using nlohmann::json;

namespace {

json matrix(const CMat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back({a(i, j).real(), a(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

json symbol_at(const Scenario& s, const std::string& op, std::vector<double> point,
               std::vector<double> xi_in, unsigned seed) {
  const int n = s.real_dim();
  if (point.empty()) point = halton_point(s, 1, seed);
  if (static_cast<int>(point.size()) != n)
    throw std::invalid_argument("--point needs " + std::to_string(n) + " values");
  RVec xi(n);
  if (xi_in.empty()) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i) xi[i] = nd(rng);
  } else {
    if (static_cast<int>(xi_in.size()) != n)
      throw std::invalid_argument("--xi needs " + std::to_string(n) + " values");
    for (int i = 0; i < n; ++i) xi[i] = xi_in[i];
  }
  const LocalGeometry g(s, point, 2);
  const CharacteristicOps ops = build_characteristic_ops(s);
  CMat closed, oracle;
  double tol = 1e-8;
  if (op == "dq") {
    closed = closed_form_symbols(g, xi).q_dQ;
    oracle = symbol_oracle(g, ops.dQ, 1, xi);
  } else if (op == "dqstar") {
    closed = closed_form_symbols(g, xi).q_dQstar;
    oracle = symbol_oracle(g, ops.dQstar, 1, xi);
  } else if (op == "lapq") {
    closed = closed_form_symbols(g, xi).q_lapQ;
    oracle = symbol_oracle(g, ops.lapQ, 2, xi);
  } else {
    if (!s.is_complex()) throw NotComplexScenario("obstruction symbol needs a complex scenario");
    closed = obstruction_symbol(g, hermitian_data(s), xi);
    oracle = symbol_oracle(g, anticommutator(ops.delQ, ops.delbarQstar), 1, xi);
    tol = 1e-6;
  }
  const double residual = (closed - oracle).norm() / (1.0 + oracle.norm());
  return {{"op", op},
          {"point", point},
          {"xi", std::vector<double>(xi.data(), xi.data() + n)},
          {"q_grades", g.q_grade},
          {"symbol", matrix(closed)},
          {"oracle_residual", residual},
          {"pass", residual < tol}};
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* t = std::getenv("CHARLAP_THREADS")) {
    const int n = std::atoi(t);
    if (n > 0) omp_set_num_threads(n);
  }

  CLI::App app{"Characteristic Laplacian checks on framed scenarios"};
  app.require_subcommand(1);
  std::string scenario, out_file, op, kind;
  std::vector<double> point, xi;
  ReportOptions opt;
  int samples = 200;

  auto common = [&](CLI::App* sub) {
    sub->add_option("scenario", scenario, "built-in name or scenario file")->required();
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--out", out_file, "write the JSON result to FILE");
  };
  auto* audit = app.add_subcommand("audit", "rank audit and bracket generation");
  common(audit);
  audit->add_option("--samples", samples, "audit sample points");
  auto* symbol = app.add_subcommand("symbol", "closed-form symbol against the oracle");
  common(symbol);
  symbol->add_option("--op", op, "operator")
      ->required()
      ->check(CLI::IsMember({"dq", "dqstar", "lapq", "obstruction"}));
  symbol->add_option("--point", point, "base point (real coordinates)");
  symbol->add_option("--xi", xi, "real covector");
  auto* kaehler = app.add_subcommand("kaehler", "Kaehler verdicts");
  common(kaehler);
  kaehler->add_option("--forms", opt.kaehler_forms);
  kaehler->add_option("--points", opt.kaehler_points);
  auto* identity = app.add_subcommand("identity", "generalized sub-Kaehler identity residual");
  common(identity);
  identity->add_option("--points", opt.identity_points);
  identity->add_option("--forms", opt.identity_forms);
  auto* obstruct = app.add_subcommand("obstruct", "involutivity verdict and obstruction symbol");
  common(obstruct);
  obstruct->add_option("--points", opt.obstruction_points);
  auto* witness = app.add_subcommand("witness", "build and verify a weakly harmonic witness");
  common(witness);
  witness->add_option("--kind", kind, "witness kind")
      ->required()
      ->check(CLI::IsMember({"real-degree1", "complex-degree2-standard", "complex-degree2-invariant"}));
  witness->add_option("--trials", opt.witness_trials);
  auto* report = app.add_subcommand("report", "full report");
  common(report);
  report->add_option("--trials", opt.witness_trials, "witness trials");
  report->add_option("--points", opt.symbol_points, "symbol sample points");

  CLI11_PARSE(app, argc, argv);

  json result;
  try {
    const Scenario s = load_scenario(scenario, audit->parsed() ? samples : 200);
    if (audit->parsed()) {
      opt.audit_samples = samples;
      opt.checks = {"rank_audit", "bracket_generation"};
    } else if (kaehler->parsed()) {
      opt.checks = {"kaehler"};
    } else if (identity->parsed()) {
      opt.checks = {"sub_kaehler"};
    } else if (obstruct->parsed()) {
      opt.checks = {"involutivity", "obstruction_symbol"};
    } else if (witness->parsed()) {
      opt.checks = {"witnesses"};
      opt.witness_kinds = {witness_kind_from_string(kind)};
    }
    if (symbol->parsed())
      result = symbol_at(s, op, point, xi, opt.seed);
    else
      result = run_report(s, opt);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string text = report_text(result);
  if (out_file.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out_file);
    if (!f) {
      std::cerr << "error: cannot write " << out_file << "\n";
      return 2;
    }
    f << text;
  }
  return result.value("pass", false) ? 0 : 1;
}
