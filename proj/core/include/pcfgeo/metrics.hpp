#pragma once

#include <span>
#include <string>
#include <vector>

#include "pcfgeo/harmonic.hpp"
#include "pcfgeo/level_graph.hpp"
#include "pcfgeo/measures.hpp"

namespace pcfgeo {

// Harmonic structure, tuple, vertex hierarchy up to max_level and the
// coordinates h(z) in R^N of every vertex. Immutable once built.
//
// A vertex gets its coordinates once, from the cell where it is born, so
// coordinates agree bitwise across levels.
class MetricContext {
 public:
  MetricContext(HarmonicStructure hs, HarmonicTuple h, int max_level, const BuildLimits& limits = {});

  const HarmonicStructure& hs() const { return hs_; }
  const HarmonicTuple& tuple() const { return h_; }
  const LevelGraph& graph() const { return graph_; }
  int max_level() const { return graph_.level(); }
  int dimension() const { return static_cast<int>(h_.size()); }

  std::span<const double> coordinates(VertexId id) const {
    const auto n = static_cast<std::size_t>(dimension());
    return {coords_.data() + id * n, n};
  }
  // |h(a) - h(b)| in R^N.
  double distance(VertexId a, VertexId b) const;

  // Id of a ref of level at most max_level (reduced to its birth level first).
  VertexId id_of(const VertexRef& ref) const { return graph_.id_of(ref); }

 private:
  HarmonicStructure hs_;
  HarmonicTuple h_;
  LevelGraph graph_;
  std::vector<double> coords_;
};

struct WeightedEdge {
  VertexId a = 0;
  VertexId b = 0;
  double weight = 0.0;
};

// All pairs inside every level-n cell, cell by cell, weight |h(a) - h(b)|.
std::vector<WeightedEdge> weighted_level_graph(const MetricContext& ctx, int n);

struct GeodesicResult {
  int level = 0;
  double value = 0.0;
  std::vector<VertexId> path;
};

// Shortest n-walks on V_n. Keeps the vertex-to-cell incidence of one level;
// neighbours and weights are generated from the cells during the search.
class LevelDistance {
 public:
  LevelDistance(const MetricContext& ctx, int n);

  int level() const { return level_; }
  std::size_t vertex_count() const { return offsets_.size() - 1; }

  // Distances from source to every vertex of V_n.
  std::vector<double> profile(VertexId source) const;
  GeodesicResult geodesic(VertexId from, VertexId to) const;

 private:
  // Runs Dijkstra; stops once target is settled when target is set.
  void search(VertexId source, VertexId target, std::vector<double>& dist,
              std::vector<VertexId>* parent) const;

  const MetricContext* ctx_;
  int level_;
  std::vector<std::uint64_t> offsets_;
  std::vector<std::uint32_t> incident_;  // cell indices at this level
};

GeodesicResult discrete_geodesic(const MetricContext& ctx, const VertexRef& x, const VertexRef& y, int n);

// phi_n(z) = rho_n(x, z) for every z in V_n.
std::vector<double> geodesic_profile(const MetricContext& ctx, const VertexRef& x, int n);

// max over level-n edges of |phi(a) - phi(b)| - |h(a) - h(b)|; <= 0 means Lipschitz.
double lipschitz_excess(const MetricContext& ctx, int n, std::span<const double> phi);

struct ConvergenceHistory {
  std::vector<int> levels;
  std::vector<double> values;
  double estimate = 0.0;       // last value, a lower bound for rho_h
  double relative_gap = 0.0;   // (last - previous) / last, 0 for a single entry
  double extrapolated = 0.0;   // Aitken, for reporting only
  bool monotone = true;
  bool converged = false;      // relative gap fell below rtol
};

// rho_n(x, y) for n from the level where both points exist to n_max, stopping
// early once the relative gap drops below rtol (rtol <= 0 never stops).
ConvergenceHistory geodesic_converge(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                     int n_max, double rtol);

std::string convergence_csv(const ConvergenceHistory& history);

struct Certificate {
  int level = 0;
  double cap = 0.0;
  VertexId from = 0;
  VertexId to = 0;
  std::vector<double> f;  // min(phi_n, M) on V_n
  SlackTable slack;
  double geodesic_value = 0.0;
  double certified_value = 0.0;
  double lipschitz_excess = 0.0;
  bool feasible = false;
};

// 2 sqrt(c mu_<h>(K) / 2), c the largest resistance between boundary points.
double default_cap(const MetricContext& ctx);

// Capped geodesic profile from x with its domination table at depths 0..n.
Certificate intrinsic_certificate(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                  int n, double cap);

std::string certificate_json(const Certificate& certificate);

// Rows id, word, label, x_1..x_N for V_n in id order.
std::string embedding_csv(const MetricContext& ctx, int n);

// rho_n between every pair of sources, one Dijkstra per row. Rows are
// independent, so the result does not depend on the thread count.
Matrix distance_matrix(const MetricContext& ctx, int n, std::span<const VertexId> sources, int threads);

}  // namespace pcfgeo
