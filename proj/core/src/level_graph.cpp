#include "pcfgeo/level_graph.hpp"

#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "pcfgeo/error.hpp"

namespace pcfgeo {

LevelOneTemplate level_one_template(const FractalSpec& spec) {
  const int k = spec.letter_count;
  const int q = spec.boundary_count;
  const int slots = k * q;
  std::vector<int> parent(static_cast<std::size_t>(slots));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const GlueRule& g : spec.glue) {
    const int a = find(g.letter_a * q + g.label_a);
    const int b = find(g.letter_b * q + g.label_b);
    // Keep the smaller address as root so roots are class minima.
    if (a < b) parent[b] = a;
    else if (b < a) parent[a] = b;
  }

  LevelOneTemplate t;
  t.boundary_label.assign(static_cast<std::size_t>(slots), -1);
  t.interior_index.assign(static_cast<std::size_t>(slots), -1);
  std::vector<int> root_boundary(static_cast<std::size_t>(slots), -1);
  for (int a = 0; a < q; ++a) root_boundary[find(spec.fixed_letter[a] * q + a)] = a;
  std::vector<int> root_interior(static_cast<std::size_t>(slots), -1);
  for (int s = 0; s < slots; ++s) {
    const int root = find(s);
    if (root_boundary[root] >= 0) {
      t.boundary_label[s] = root_boundary[root];
      continue;
    }
    if (root_interior[root] < 0) {
      root_interior[root] = static_cast<int>(t.interior_first.size());
      t.interior_first.emplace_back(root / q, root % q);
    }
    t.interior_index[s] = root_interior[root];
  }
  return t;
}

LevelGraph build_level(const FractalSpec& spec, int n, const BuildLimits& limits) {
  if (n < 0) throw Error(ErrorKind::invalid_argument, "level must be nonnegative");
  const int k = spec.letter_count;
  const int q = spec.boundary_count;
  const std::uint64_t finest = word_count(k, n);
  if (finest > limits.max_cell_slots / static_cast<std::uint64_t>(q)) {
    throw Error(ErrorKind::resource, "level " + std::to_string(n) + " of " + spec.name + " needs " +
                                         std::to_string(finest) + " cells x " + std::to_string(q) +
                                         " slots, above the limit of " +
                                         std::to_string(limits.max_cell_slots));
  }
  const LevelOneTemplate tmpl = level_one_template(spec);
  const auto interior = static_cast<std::uint64_t>(tmpl.interior_first.size());

  LevelGraph g;
  g.spec_ = spec;
  g.level_ = n;
  g.cells_.resize(static_cast<std::size_t>(n) + 1);

  std::uint64_t total = q;
  for (int m = 1; m <= n; ++m) total += word_count(k, m - 1) * interior;
  if (total > std::numeric_limits<VertexId>::max()) {
    throw Error(ErrorKind::resource, "level " + std::to_string(n) + " has " + std::to_string(total) +
                                         " vertices, more than 32-bit ids allow");
  }
  g.birth_level_.reserve(total);
  g.birth_cell_.reserve(total);
  g.birth_label_.reserve(total);

  g.cells_[0].resize(static_cast<std::size_t>(q));
  for (int a = 0; a < q; ++a) {
    g.cells_[0][a] = static_cast<VertexId>(a);
    g.birth_level_.push_back(0);
    g.birth_cell_.push_back(0);
    g.birth_label_.push_back(static_cast<std::uint8_t>(a));
  }
  g.vertex_counts_.push_back(static_cast<std::size_t>(q));

  for (int m = 1; m <= n; ++m) {
    const std::vector<VertexId>& coarse = g.cells_[m - 1];
    const std::uint64_t parents = word_count(k, m - 1);
    std::vector<VertexId>& fine = g.cells_[m];
    fine.resize(parents * static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(q));
    const std::uint64_t base = g.vertex_counts_.back();
    for (std::uint64_t u = 0; u < parents; ++u) {
      const VertexId first_new = static_cast<VertexId>(base + u * interior);
      for (int i = 0; i < k; ++i) {
        const std::uint64_t child = u * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(i);
        for (int b = 0; b < q; ++b) {
          const int slot = i * q + b;
          const int boundary = tmpl.boundary_label[slot];
          fine[child * q + b] = boundary >= 0
                                    ? coarse[u * q + static_cast<std::uint64_t>(boundary)]
                                    : first_new + static_cast<VertexId>(tmpl.interior_index[slot]);
        }
      }
      for (const auto& [letter, label] : tmpl.interior_first) {
        g.birth_level_.push_back(static_cast<std::uint8_t>(m));
        g.birth_cell_.push_back(u * static_cast<std::uint64_t>(k) + static_cast<std::uint64_t>(letter));
        g.birth_label_.push_back(static_cast<std::uint8_t>(label));
      }
    }
    g.vertex_counts_.push_back(static_cast<std::size_t>(base + parents * interior));
  }
  return g;
}

VertexId LevelGraph::id_of(const VertexRef& ref) const {
  check_ref(spec_, ref);
  if (ref.level() > level_) {
    const VertexRef reduced = minimal_ref(spec_, ref);
    if (reduced.level() > level_) {
      throw Error(ErrorKind::invalid_argument, format_vertex_ref(ref) + " is not a vertex of V_" +
                                                   std::to_string(level_));
    }
    return id_of(reduced);
  }
  const std::uint64_t index = word_index(ref.word, spec_.letter_count);
  return cell(ref.level(), index)[static_cast<std::size_t>(ref.label)];
}

VertexRef LevelGraph::ref_of(VertexId id) const {
  if (id >= vertex_count()) {
    throw Error(ErrorKind::invalid_argument, "vertex id " + std::to_string(id) + " out of range");
  }
  VertexRef ref;
  ref.word = word_from_index(birth_cell_[id], birth_level_[id], spec_.letter_count);
  ref.label = birth_label_[id];
  return ref;
}

}  // namespace pcfgeo
