#include "pcfgeo/generators.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "pcfgeo/error.hpp"

namespace pcfgeo {

namespace {

// Upward cell of the level-l gasket with lattice offset (a, b, c), a+b+c = l-1.
// Corner t sits at offset + e_t in barycentric coordinates scaled by l.
using Lattice = std::array<int, 3>;

FractalSpec make_gasket(int level) {
  std::vector<Lattice> offsets;
  for (int a = level - 1; a >= 0; --a) {
    for (int b = level - 1 - a; b >= 0; --b) offsets.push_back({a, b, level - 1 - a - b});
  }
  // Offsets are already in decreasing lexicographic order; move the corner
  // cells to the front.
  std::vector<Lattice> cells;
  for (int t = 0; t < 3; ++t) {
    Lattice corner{0, 0, 0};
    corner[t] = level - 1;
    cells.push_back(corner);
  }
  for (const Lattice& o : offsets) {
    if (std::find(cells.begin(), cells.end(), o) == cells.end()) cells.push_back(o);
  }

  FractalSpec spec;
  spec.name = "gasket:" + std::to_string(level);
  spec.letter_count = static_cast<int>(cells.size());
  spec.boundary_count = 3;
  spec.fixed_letter = {0, 1, 2};
  auto corner = [&](int cell, int t) {
    Lattice p = cells[cell];
    ++p[t];
    return p;
  };
  for (int i = 0; i < spec.letter_count; ++i) {
    for (int j = i + 1; j < spec.letter_count; ++j) {
      for (int s = 0; s < 3; ++s) {
        for (int t = 0; t < 3; ++t) {
          if (corner(i, s) == corner(j, t)) spec.glue.push_back({i, s, j, t});
        }
      }
    }
  }
  return spec;
}

FractalSpec make_polygasket(int n) {
  using cplx = std::complex<double>;
  const double pi = std::numbers::pi;
  const double beta = 2.0 / (3.0 + std::sqrt(3.0) / std::tan(pi / n));
  auto vertex = [&](int k) { return std::polar(1.0, 2.0 * pi * k / n); };
  const int third = n / 3;
  const std::array<cplx, 3> boundary{vertex(0), vertex(third), vertex(2 * third)};

  // psi_k(z) = p_k (beta (z - 1) + 1). For the three corner cells the map is
  // precomposed with the rotation by p_k^{-1}, a symmetry of K that permutes
  // V_0; the cell K_k is unchanged and psi_k now fixes p_k.
  auto image = [&](int k, int label) {
    cplx z = boundary[label];
    if (k % third == 0) z *= std::conj(vertex(k));
    return vertex(k) * (beta * (z - 1.0) + 1.0);
  };

  FractalSpec spec;
  spec.name = "polygasket:" + std::to_string(n);
  spec.letter_count = n;
  spec.boundary_count = 3;
  spec.fixed_letter = {0, third, 2 * third};
  constexpr double tol = 1e-9;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      for (int s = 0; s < 3; ++s) {
        for (int t = 0; t < 3; ++t) {
          if (std::abs(image(i, s) - image(j, t)) < tol) spec.glue.push_back({i, s, j, t});
        }
      }
    }
  }
  for (int b = 0; b < 3; ++b) {
    if (std::abs(image(spec.fixed_letter[b], b) - boundary[b]) > tol) {
      throw Error(ErrorKind::internal, "polygasket corner map does not fix its boundary point");
    }
  }
  return spec;
}

}  // namespace

FractalSpec generate_spec(GeneratorKind kind, int param) {
  FractalSpec spec;
  switch (kind) {
    case GeneratorKind::gasket: {
      const int max_level = 8;  // 36 letters, the limit of the word syntax
      if (param < 2 || param > max_level) {
        throw Error(ErrorKind::invalid_parameter,
                    "gasket level must be in [2, " + std::to_string(max_level) + "], got " +
                        std::to_string(param));
      }
      spec = make_gasket(param);
      break;
    }
    case GeneratorKind::polygasket:
      if (param != 6 && param != 9) {
        throw Error(ErrorKind::invalid_parameter,
                    "polygasket supports n = 6 or 9, got " + std::to_string(param));
      }
      spec = make_polygasket(param);
      break;
  }
  validate(spec);
  return spec;
}

FractalSpec builtin_spec(std::string_view name) {
  if (name == "hexagasket") return generate_spec(GeneratorKind::polygasket, 6);
  if (name == "nonagasket") return generate_spec(GeneratorKind::polygasket, 9);
  const auto colon = name.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::invalid_parameter, "unknown builtin '" + std::string(name) + "'");
  }
  const std::string_view kind = name.substr(0, colon);
  const std::string_view arg = name.substr(colon + 1);
  int param = 0;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), param);
  if (ec != std::errc{} || ptr != arg.data() + arg.size()) {
    throw Error(ErrorKind::invalid_parameter, "bad builtin parameter in '" + std::string(name) + "'");
  }
  if (kind == "gasket") return generate_spec(GeneratorKind::gasket, param);
  if (kind == "polygasket") return generate_spec(GeneratorKind::polygasket, param);
  throw Error(ErrorKind::invalid_parameter, "unknown builtin kind '" + std::string(kind) + "'");
}

}  // namespace pcfgeo
