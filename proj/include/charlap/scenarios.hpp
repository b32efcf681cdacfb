#pragma once

// Scenario files and the built-in scenario library.
//
// A scenario file is a JSON object:
//
//   {
//     "name": "real-heisenberg-contact",
//     "description": "...",                       (optional)
//     "coordinates": ["p", "q", "t"],
//     "complex": false,                           (optional, default false)
//     "frame": [["1", "0", "q/2"], ...],          one row per field
//     "metric": "frame-orthonormal"               (default)
//             | {"frame_gram": [[...], ...]}
//             | {"coordinate_gram": [[...], ...]},
//     "distribution": [0, 1],
//     "box": [[-1, 1], ...],                      (optional, default [-1, 1])
//     "periodic": [true, ...]                     (optional)
//   }
//
// Expressions are strings in the expression grammar; numbers may be given as
// JSON numbers or strings and are read exactly. With "complex": true the
// coordinates are complex names, frame rows are holomorphic coefficients
// along ∂/∂z_j, Gram matrices are Hermitian h(·,·), and "box" lists one
// range per complex coordinate (applied to both real and imaginary parts) or
// one per real coordinate.

#include <string>
#include <vector>

#include "charlap/framedgeom.hpp"

namespace charlap {

/// Parse and validate scenario text; does not run the rank audit.
Scenario parse_scenario(const std::string& json_text);
/// Built-in name or path to a scenario file; validated, with the rank audit
/// majority stored in phi_ranks.
Scenario load_scenario(const std::string& source, int audit_samples = 200);

std::vector<std::string> builtin_names();
bool is_builtin(const std::string& name);
/// JSON text of a built-in.
const std::string& builtin_text(const std::string& name);

}  // namespace charlap
