#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcfgeo/structure.hpp"

namespace pcfgeo {

using VertexId = std::uint32_t;

struct BuildLimits {
  // Upper bound on k^n * #V_0 cell slots at the finest level.
  std::uint64_t max_cell_slots = std::uint64_t{1} << 26;
};

// V_0 subset V_1 subset ... subset V_n with cell cliques at every level.
//
// Vertex ids are nested: the vertices of V_m are exactly the ids below
// vertex_count(m), so V_m embeds into V_n by the identity on ids. New
// vertices of level m are numbered by parent cell, then by the smallest
// address of their class inside the level-1 template.
class LevelGraph {
 public:
  const FractalSpec& spec() const { return spec_; }
  int level() const { return level_; }

  std::size_t vertex_count() const { return vertex_counts_.back(); }
  std::size_t vertex_count(int m) const { return vertex_counts_.at(static_cast<std::size_t>(m)); }
  std::size_t cell_count(int m) const {
    return cells_.at(static_cast<std::size_t>(m)).size() / static_cast<std::size_t>(spec_.boundary_count);
  }

  // Vertex ids of V_w for the word with the given index at level m.
  std::span<const VertexId> cell(int m, std::uint64_t index) const {
    const auto q = static_cast<std::size_t>(spec_.boundary_count);
    return {cells_[static_cast<std::size_t>(m)].data() + index * q, q};
  }
  std::span<const VertexId> cells(int m) const { return cells_.at(static_cast<std::size_t>(m)); }

  // Id of a point given by any address of level at most n.
  VertexId id_of(const VertexRef& ref) const;

  // Canonical address at the level where the vertex first appears.
  VertexRef ref_of(VertexId id) const;
  int birth_level(VertexId id) const { return birth_level_[id]; }

 private:
  friend LevelGraph build_level(const FractalSpec& spec, int n, const BuildLimits& limits);

  FractalSpec spec_;
  int level_ = 0;
  std::vector<std::size_t> vertex_counts_;
  std::vector<std::vector<VertexId>> cells_;
  std::vector<std::uint8_t> birth_level_;
  std::vector<std::uint64_t> birth_cell_;
  std::vector<std::uint8_t> birth_label_;
};

// Builds V_0..V_n. Throws Error(resource) when the finest level exceeds the limits.
LevelGraph build_level(const FractalSpec& spec, int n, const BuildLimits& limits = {});

// Classes of the level-1 addresses (letter, label) under the glue rules.
struct LevelOneTemplate {
  // For address i*q+b: the boundary label it equals, or -1 if interior.
  std::vector<int> boundary_label;
  // For address i*q+b: index among interior classes (or -1).
  std::vector<int> interior_index;
  // Smallest address of every interior class, ordered by interior index.
  std::vector<std::pair<int, int>> interior_first;
};

LevelOneTemplate level_one_template(const FractalSpec& spec);

}  // namespace pcfgeo
