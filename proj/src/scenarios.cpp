#include "charlap/scenarios.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "charlap/errors.hpp"

namespace charlap {

namespace {

using nlohmann::json;

const std::map<std::string, std::string>& library() {
  static const std::map<std::string, std::string> lib = {
      {"real-heisenberg-contact", R"J({
  "name": "real-heisenberg-contact",
  "description": "Heisenberg group R^3, right-invariant contact form dt - q dp/2 + p dq/2",
  "coordinates": ["p", "q", "t"],
  "frame": [["1", "0", "q/2"], ["0", "1", "-p/2"], ["0", "0", "1"]],
  "metric": "frame-orthonormal",
  "distribution": [0, 1],
  "box": [[-1, 1], [-1, 1], [-1, 1]],
  "periodic": [true, true, true]
})J"},
      {"pfaff-chart", R"J({
  "name": "pfaff-chart",
  "description": "Pfaff normal form du - p dx on R^3",
  "coordinates": ["x", "p", "u"],
  "frame": [["1", "0", "p"], ["0", "1", "0"], ["0", "0", "1"]],
  "metric": "frame-orthonormal",
  "distribution": [0, 1]
})J"},
      {"degenerate-pfaff", R"J({
  "name": "degenerate-pfaff",
  "description": "du - x p dx on R^3, contact except on x = 0",
  "coordinates": ["x", "p", "u"],
  "frame": [["1", "0", "x*p"], ["0", "1", "0"], ["0", "0", "1"]],
  "metric": "frame-orthonormal",
  "distribution": [0, 1]
})J"},
      {"complex-heisenberg-standard", R"J({
  "name": "complex-heisenberg-standard",
  "description": "C^3 with du - p dx, standard metric, X1 = d/dp, X2 = p d/du + d/dx",
  "coordinates": ["x", "p", "u"],
  "complex": true,
  "frame": [["0", "1", "0"], ["1", "0", "p"], ["0", "0", "1"]],
  "metric": {"coordinate_gram": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]},
  "distribution": [0, 1]
})J"},
      {"complex-heisenberg-invariant", R"J({
  "name": "complex-heisenberg-invariant",
  "description": "complex Heisenberg group C^3 with right-invariant frame and metric",
  "coordinates": ["p", "q", "t"],
  "complex": true,
  "frame": [["1", "0", "q/2"], ["0", "1", "-p/2"], ["0", "0", "1"]],
  "metric": "frame-orthonormal",
  "distribution": [0, 1],
  "periodic": [true, true, true, true, true, true]
})J"},
      {"involutive-product", R"J({
  "name": "involutive-product",
  "description": "C^3 with W spanned by d/dx and d/du",
  "coordinates": ["x", "p", "u"],
  "complex": true,
  "frame": [["1", "0", "0"], ["0", "0", "1"], ["0", "1", "0"]],
  "metric": {"coordinate_gram": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]},
  "distribution": [0, 1]
})J"},
      {"flat-kaehler", R"J({
  "name": "flat-kaehler",
  "description": "C^2 with the flat metric, W = TX",
  "coordinates": ["z1", "z2"],
  "complex": true,
  "frame": [["1", "0"], ["0", "1"]],
  "metric": {"coordinate_gram": [["1", "0"], ["0", "1"]]},
  "distribution": [0, 1]
})J"},
      {"nonkaehler-hermitian", R"J({
  "name": "nonkaehler-hermitian",
  "description": "C^2 with Theta = i(dz1 dz1b + (1 + |z1|^2) dz2 dz2b), W = TX",
  "coordinates": ["z1", "z2"],
  "complex": true,
  "frame": [["1", "0"], ["0", "1"]],
  "metric": {"coordinate_gram": [["1", "0"], ["0", "1 + z1*conj(z1)"]]},
  "distribution": [0, 1]
})J"},
  };
  return lib;
}

std::string number_text(const json& v) {
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v.get<double>());
  return std::string(buf, res.ptr);
}

struct Builder {
  std::vector<std::string> problems;

  void fail(const std::string& msg) { problems.push_back(msg); }

  CExpr expr(const json& v, const Chart& chart, const std::string& where) {
    std::string text;
    if (v.is_string()) text = v.get<std::string>();
    else if (v.is_number()) text = number_text(v);
    else throw ValidationError(where + ": expected an expression string or number");
    try {
      return chart.is_complex() ? parse_cexpr(text, chart) : CExpr(parse_expr(text, chart));
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what(), e.position());
    }
  }

  std::vector<std::vector<CExpr>> matrix(const json& v, const Chart& chart, int rows, int cols,
                                         const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != rows)
      throw ValidationError(where + ": expected " + std::to_string(rows) + " rows");
    std::vector<std::vector<CExpr>> out(rows);
    for (int r = 0; r < rows; ++r) {
      const json& row = v[r];
      if (!row.is_array() || static_cast<int>(row.size()) != cols)
        throw ValidationError(where + ": row " + std::to_string(r) + " needs " +
                              std::to_string(cols) + " entries");
      for (int c = 0; c < cols; ++c)
        out[r].push_back(
            expr(row[c], chart, where + "[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
    }
    return out;
  }
};

double box_number(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const Chart none = Chart::real({});
    return evaluate(parse_expr(v.get<std::string>(), none), {});
  }
  throw ValidationError("box bounds must be numbers");
}

void check_pointwise(const Scenario& s, Builder& b) {
  for (int i = 1; i <= 16; ++i) {
    const auto x = halton_point(s, i);
    try {
      LocalGeometry g(s, x, 0, false);
    } catch (const FrameNotInvertible&) {
      b.fail("frame not invertible near a sampled point");
      return;
    } catch (const DegenerateMetric&) {
      b.fail("metric not positive definite Hermitian near a sampled point");
      return;
    }
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  if (!doc.is_object()) throw ValidationError("scenario must be a JSON object");
  Builder b;
  Scenario s;
  s.name = doc.value("name", std::string("unnamed"));
  s.description = doc.value("description", std::string());
  if (!doc.contains("coordinates") || !doc["coordinates"].is_array())
    throw ValidationError("missing coordinates");
  const auto names = doc["coordinates"].get<std::vector<std::string>>();
  if (names.empty()) throw ValidationError("empty coordinate list");
  if (std::set<std::string>(names.begin(), names.end()).size() != names.size())
    throw ValidationError("duplicate coordinate names");
  const bool cplx = doc.value("complex", false);
  s.chart = cplx ? Chart::complex(names) : Chart::real(names);
  const int m = static_cast<int>(names.size());

  if (!doc.contains("frame")) throw ValidationError("missing frame");
  s.frame = b.matrix(doc["frame"], s.chart, m, m, "frame");
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j) {
      const CExpr& e = s.frame[k][j];
      if (e.re().has_leaf() || e.im().has_leaf())
        b.fail("frame[" + std::to_string(k) + "] has a non-smooth coefficient");
      else if (cplx)
        for (int a = 0; a < m; ++a)
          if (is_zero(d_dzbar(e, a)) != Tri::Yes) {
            b.fail("frame[" + std::to_string(k) + "][" + std::to_string(j) +
                   "] is not holomorphic");
            break;
          }
    }

  const json metric = doc.value("metric", json("frame-orthonormal"));
  if (metric.is_string()) {
    if (metric.get<std::string>() != "frame-orthonormal")
      throw ValidationError("unknown metric " + metric.get<std::string>());
    s.metric = MetricKind::FrameOrthonormal;
  } else if (metric.is_object() && metric.contains("frame_gram")) {
    s.metric = MetricKind::FrameGram;
    s.gram = b.matrix(metric["frame_gram"], s.chart, m, m, "metric.frame_gram");
  } else if (metric.is_object() && metric.contains("coordinate_gram")) {
    s.metric = MetricKind::CoordinateGram;
    s.gram = b.matrix(metric["coordinate_gram"], s.chart, m, m, "metric.coordinate_gram");
  } else {
    throw ValidationError("metric must be \"frame-orthonormal\", frame_gram or coordinate_gram");
  }

  if (!doc.contains("distribution")) throw ValidationError("missing distribution");
  s.distribution = doc["distribution"].get<std::vector<int>>();
  std::set<int> seen;
  for (int k : s.distribution) {
    if (k < 0 || k >= m) b.fail("distribution index " + std::to_string(k) + " out of range");
    if (!seen.insert(k).second) b.fail("duplicate distribution index " + std::to_string(k));
  }
  if (s.distribution.empty()) b.fail("empty distribution");

  const int nreal = s.real_dim();
  s.box.assign(nreal, {-1.0, 1.0});
  if (doc.contains("box")) {
    const json& bx = doc["box"];
    const int given = static_cast<int>(bx.size());
    if (given != nreal && !(cplx && given == m))
      throw ValidationError("box needs one range per coordinate");
    for (int i = 0; i < nreal; ++i) {
      const json& r = bx[given == nreal ? i : i / 2];
      if (!r.is_array() || r.size() != 2) throw ValidationError("box ranges are pairs");
      s.box[i] = {box_number(r[0]), box_number(r[1])};
      if (!(s.box[i].first < s.box[i].second)) b.fail("empty box range");
    }
  }
  s.periodic.assign(nreal, false);
  if (doc.contains("periodic")) {
    const auto p = doc["periodic"].get<std::vector<bool>>();
    const int given = static_cast<int>(p.size());
    if (given != nreal && !(cplx && given == m))
      throw ValidationError("periodic needs one flag per coordinate");
    for (int i = 0; i < nreal; ++i) s.periodic[i] = p[given == nreal ? i : i / 2];
  }

  if (b.problems.empty()) check_pointwise(s, b);
  if (!b.problems.empty()) {
    std::string msg = s.name + ":";
    for (const auto& p : b.problems) msg += " " + p + ";";
    throw ValidationError(msg);
  }
  return s;
}

Scenario load_scenario(const std::string& source, int audit_samples) {
  std::string text;
  if (is_builtin(source)) {
    text = builtin_text(source);
  } else {
    std::ifstream in(source);
    if (!in) throw ValidationError("no built-in scenario or readable file named " + source);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  Scenario s = parse_scenario(text);
  if (audit_samples > 0) s.phi_ranks = constant_rank_audit(s, audit_samples).majority;
  return s;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : library()) out.push_back(k);
  return out;
}

bool is_builtin(const std::string& name) { return library().count(name) > 0; }

const std::string& builtin_text(const std::string& name) {
  const auto it = library().find(name);
  if (it == library().end()) throw ValidationError("unknown built-in " + name);
  return it->second;
}

}  // namespace charlap
