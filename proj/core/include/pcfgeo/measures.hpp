#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcfgeo/harmonic.hpp"

namespace pcfgeo {

// h = (h_1, ..., h_N), each component given by its boundary values on V_0.
struct HarmonicTuple {
  std::vector<Vector> components;

  std::size_t size() const { return components.size(); }
  // True when every component is constant, so mu_<h> vanishes.
  bool degenerate() const;
};

// q - 1 mean-zero boundary vectors, orthonormal for (-D a, b).
HarmonicTuple default_tuple(const HarmonicStructure& hs);

// mu_<h>(K_w) = sum_j (2 / r_w) (-D A_w a_j, A_w a_j).
double harmonic_cell_measure(const HarmonicStructure& hs, const HarmonicTuple& h, const Word& w);

// Cell values for every word of length 0..depth.
struct CellMeasureTable {
  int letter_count = 0;
  int depth = 0;
  std::vector<std::vector<double>> values;  // values[m][word_index]

  double at(const Word& w) const;
};

CellMeasureTable cell_measure_table(const HarmonicStructure& hs, const HarmonicTuple& h, int depth);

// mu_<H_n f>(K_w) for f given on V_n by vertex id, |w| <= n. The graph
// may be built to any level >= n.
double piecewise_cell_measure(const HarmonicStructure& hs, const LevelGraph& graph, int n,
                              std::span<const double> f, const Word& w);

// Per-cell measures of a piecewise harmonic f for every word of length 0..depth.
CellMeasureTable piecewise_measure_table(const HarmonicStructure& hs, const LevelGraph& graph,
                                         int n, std::span<const double> f, int depth);

// b_pq = 2 D_pq / r_w.
Matrix trace_coefficients(const HarmonicStructure& hs, const Word& w);

struct SlackTable {
  int letter_count = 0;
  int depth = 0;                            // checked range is 0..depth
  std::vector<std::vector<double>> slack;   // slack[m][word_index]
  double min_slack = 0.0;
  Word argmin;
  double scale = 0.0;                       // mu_<h>(K)
  double tolerance = 1e-9;                  // relative to scale
  bool feasible = true;

  double at(const Word& w) const;
};

// slack(w) = mu_<h>(K_w) - mu_<f>(K_w) for |w| <= m_max.
SlackTable check_domination(const HarmonicStructure& hs, const LevelGraph& graph, int n,
                            std::span<const double> f, const HarmonicTuple& h, int m_max);

// Columns word, depth, value.
std::string cell_table_csv(const CellMeasureTable& table);
// Columns word, depth, slack.
std::string slack_table_csv(const SlackTable& table);

}  // namespace pcfgeo
