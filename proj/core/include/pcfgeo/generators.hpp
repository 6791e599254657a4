#pragma once

#include <string_view>

#include "pcfgeo/structure.hpp"

namespace pcfgeo {

enum class GeneratorKind { gasket, polygasket };

// Builtin structures.
//
// gasket:l   level-l Sierpinski gasket, l(l+1)/2 upward cells. Letters 0, 1, 2
//            are the corner cells fixing p_0, p_1, p_2; the remaining cells
//            follow in decreasing lexicographic order of their lattice offset.
// polygasket:n  (n = 6 or 9) ring of n triangles; letter k is the cell at
//            exp(2 pi i k / n), boundary label b is p_{b n / 3}.
//
// Glue rules are read off the exact generator geometry.
FractalSpec generate_spec(GeneratorKind kind, int param);

// Parses "gasket:2", "polygasket:6", "hexagasket", "nonagasket".
FractalSpec builtin_spec(std::string_view name);

}  // namespace pcfgeo
