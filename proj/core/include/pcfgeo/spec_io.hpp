#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "pcfgeo/harmonic.hpp"

namespace pcfgeo {

// A spec file: the combinatorial structure plus optional D and r.
struct SpecDocument {
  FractalSpec spec;
  std::optional<Matrix> D;
  std::optional<std::vector<double>> r;
};

// Throws Error(validation) naming the line for syntax errors and the field
// for content errors.
SpecDocument parse_spec_json(std::string_view text);
SpecDocument load_spec_file(const std::string& path);
std::string spec_to_json(const SpecDocument& doc);

// A builtin name ("gasket:2", "hexagasket", ...) or a path to a spec file.
SpecDocument resolve_spec(const std::string& source);

// D = J - qI, the Laplacian of the complete graph on V_0.
Matrix complete_graph_dirichlet(int q);

// Fills a missing D with complete_graph_dirichlet and a missing r with the
// equal-weight solution, then builds the structure.
HarmonicStructure make_structure(const SpecDocument& doc);

}  // namespace pcfgeo
