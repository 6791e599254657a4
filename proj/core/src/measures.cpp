#include "pcfgeo/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcfgeo/error.hpp"
#include "pcfgeo/format.hpp"

namespace pcfgeo {

namespace {

double cell_energy(const Matrix& D, const Vector& a) { return -a.dot(D * a); }

// values[m] filled from values[m+1] by summing the k children of each word.
void sum_up(std::vector<std::vector<double>>& values, int k) {
  for (int m = static_cast<int>(values.size()) - 2; m >= 0; --m) {
    auto& parent = values[m];
    const auto& child = values[m + 1];
    parent.assign(child.size() / static_cast<std::size_t>(k), 0.0);
    for (std::size_t u = 0; u < parent.size(); ++u) {
      double s = 0.0;
      for (int i = 0; i < k; ++i) s += child[u * k + i];
      parent[u] = s;
    }
  }
}

double lookup(const std::vector<std::vector<double>>& values, int k, int depth, const Word& w) {
  if (w.size() > static_cast<std::size_t>(depth)) {
    throw Error(ErrorKind::invalid_argument, "word " + format_word(w) + " is deeper than the table");
  }
  return values[w.size()].at(word_index(w, k));
}

template <class Table>
std::string table_csv(const Table& table, const std::vector<std::vector<double>>& values,
                      const char* column) {
  std::ostringstream out;
  out << "word,depth," << column << '\n';
  for (int m = 0; m <= table.depth; ++m) {
    for (std::size_t u = 0; u < values[m].size(); ++u) {
      const Word w = word_from_index(u, m, table.letter_count);
      out << (w.empty() ? std::string("-") : format_word(w)) << ',' << m << ','
          << format_double(values[m][u]) << '\n';
    }
  }
  return out.str();
}

}  // namespace

bool HarmonicTuple::degenerate() const {
  return std::all_of(components.begin(), components.end(), [](const Vector& a) {
    return a.size() == 0 || a.maxCoeff() - a.minCoeff() == 0.0;
  });
}

HarmonicTuple default_tuple(const HarmonicStructure& hs) {
  const int q = hs.boundary_count();
  const Matrix energy = -hs.D();
  HarmonicTuple h;
  for (int c = 0; c < q && static_cast<int>(h.size()) < q - 1; ++c) {
    Vector v = project_mean_zero(Vector::Unit(q, c));
    for (const Vector& e : h.components) v -= e.dot(energy * v) * e;
    const double norm2 = v.dot(energy * v);
    if (norm2 <= 1e-12) continue;
    h.components.push_back(v / std::sqrt(norm2));
  }
  return h;
}

double harmonic_cell_measure(const HarmonicStructure& hs, const HarmonicTuple& h, const Word& w) {
  check_ref(hs.spec(), VertexRef{w, 0});
  double total = 0.0;
  for (const Vector& a : h.components) total += cell_energy(hs.D(), hs.restrict_to_cell(w, a));
  return 2.0 * total / hs.weight(w);
}

double CellMeasureTable::at(const Word& w) const { return lookup(values, letter_count, depth, w); }

double SlackTable::at(const Word& w) const { return lookup(slack, letter_count, depth, w); }

CellMeasureTable cell_measure_table(const HarmonicStructure& hs, const HarmonicTuple& h, int depth) {
  if (depth < 0) throw Error(ErrorKind::invalid_argument, "depth must be nonnegative");
  const int k = hs.spec().letter_count;
  word_count(k, depth);
  CellMeasureTable table;
  table.letter_count = k;
  table.depth = depth;
  table.values.resize(static_cast<std::size_t>(depth) + 1);

  // Boundary values of every component on every cell of the current level.
  std::vector<Vector> restricted(h.components.begin(), h.components.end());
  std::vector<double> inv_weight{1.0};
  for (int m = 0; m <= depth; ++m) {
    const std::size_t cells = inv_weight.size();
    const std::size_t n = h.size();
    auto& row = table.values[m];
    row.assign(cells, 0.0);
    for (std::size_t c = 0; c < cells; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += cell_energy(hs.D(), restricted[c * n + j]);
      row[c] = 2.0 * s * inv_weight[c];
    }
    if (m == depth) break;
    std::vector<Vector> next(restricted.size() * static_cast<std::size_t>(k));
    std::vector<double> next_weight(cells * static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < cells; ++c) {
      for (int i = 0; i < k; ++i) {
        const std::size_t child = c * k + i;
        next_weight[child] = inv_weight[c] / hs.r()[i];
        for (std::size_t j = 0; j < n; ++j) {
          next[child * n + j] = hs.extension(i) * restricted[c * n + j];
        }
      }
    }
    restricted = std::move(next);
    inv_weight = std::move(next_weight);
  }
  return table;
}

CellMeasureTable piecewise_measure_table(const HarmonicStructure& hs, const LevelGraph& graph,
                                         int n, std::span<const double> f, int depth) {
  if (n < 0 || n > graph.level()) throw Error(ErrorKind::invalid_argument, "level outside the graph");
  const int k = hs.spec().letter_count;
  const int q = hs.boundary_count();
  if (f.size() != graph.vertex_count(n)) {
    throw Error(ErrorKind::invalid_argument, "f must have one value per vertex of V_n");
  }
  if (depth < 0 || depth > n) throw Error(ErrorKind::invalid_argument, "depth must lie in [0, n]");

  std::vector<std::vector<double>> values(static_cast<std::size_t>(n) + 1);
  auto& leaves = values[n];
  leaves.resize(graph.cell_count(n));
  Vector local(q);
  const Matrix& D = hs.D();
  for (std::size_t c = 0; c < leaves.size(); ++c) {
    const auto ids = graph.cell(n, c);
    for (int a = 0; a < q; ++a) local[a] = f[ids[a]];
    const Word w = word_from_index(c, n, k);
    leaves[c] = 2.0 * cell_energy(D, local) / hs.weight(w);
  }
  sum_up(values, k);
  values.resize(static_cast<std::size_t>(depth) + 1);

  CellMeasureTable table;
  table.letter_count = k;
  table.depth = depth;
  table.values = std::move(values);
  return table;
}

double piecewise_cell_measure(const HarmonicStructure& hs, const LevelGraph& graph, int n,
                              std::span<const double> f, const Word& w) {
  if (n < 0 || n > graph.level()) throw Error(ErrorKind::invalid_argument, "level outside the graph");
  if (w.size() > static_cast<std::size_t>(n)) {
    throw Error(ErrorKind::invalid_argument, "cell " + format_word(w) + " is deeper than level " +
                                                 std::to_string(n));
  }
  check_ref(hs.spec(), VertexRef{w, 0});
  if (f.size() != graph.vertex_count(n)) {
    throw Error(ErrorKind::invalid_argument, "f must have one value per vertex of V_n");
  }
  const int k = hs.spec().letter_count;
  const int q = hs.boundary_count();
  const int extra = n - static_cast<int>(w.size());
  const std::uint64_t first = word_index(w, k) * word_count(k, extra);
  const std::uint64_t count = word_count(k, extra);
  Vector local(q);
  double total = 0.0;
  Word sub = w;
  for (std::uint64_t s = 0; s < count; ++s) {
    const auto ids = graph.cell(n, first + s);
    for (int a = 0; a < q; ++a) local[a] = f[ids[a]];
    const Word tail = word_from_index(s, extra, k);
    sub.resize(w.size());
    sub.insert(sub.end(), tail.begin(), tail.end());
    total += 2.0 * cell_energy(hs.D(), local) / hs.weight(sub);
  }
  return total;
}

Matrix trace_coefficients(const HarmonicStructure& hs, const Word& w) {
  check_ref(hs.spec(), VertexRef{w, 0});
  Matrix b = 2.0 * hs.D() / hs.weight(w);
  b.diagonal().setZero();
  return b;
}

SlackTable check_domination(const HarmonicStructure& hs, const LevelGraph& graph, int n,
                            std::span<const double> f, const HarmonicTuple& h, int m_max) {
  if (m_max < 0 || m_max > n) {
    throw Error(ErrorKind::invalid_argument, "m_max must lie in [0, n]");
  }
  const CellMeasureTable mu_h = cell_measure_table(hs, h, m_max);
  const CellMeasureTable mu_f = piecewise_measure_table(hs, graph, n, f, m_max);

  SlackTable table;
  table.letter_count = hs.spec().letter_count;
  table.depth = m_max;
  table.scale = mu_h.values[0][0];
  table.slack.resize(static_cast<std::size_t>(m_max) + 1);
  table.min_slack = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= m_max; ++m) {
    auto& row = table.slack[m];
    row.resize(mu_h.values[m].size());
    for (std::size_t u = 0; u < row.size(); ++u) {
      row[u] = mu_h.values[m][u] - mu_f.values[m][u];
      if (row[u] < table.min_slack) {
        table.min_slack = row[u];
        table.argmin = word_from_index(u, m, table.letter_count);
      }
    }
  }
  table.feasible = table.min_slack >= -table.tolerance * table.scale;
  return table;
}

std::string cell_table_csv(const CellMeasureTable& table) {
  return table_csv(table, table.values, "value");
}

std::string slack_table_csv(const SlackTable& table) {
  return table_csv(table, table.slack, "slack");
}

}  // namespace pcfgeo
