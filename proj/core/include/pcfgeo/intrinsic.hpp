#pragma once

#include <string>
#include <vector>

#include "pcfgeo/metrics.hpp"

namespace pcfgeo {

struct IntrinsicOptions {
  int depth = -1;               // constraint depth, clamped to n; negative means n
  int budget = 400;             // total Newton steps
  double cap = -1.0;            // cap of the starting certificate; negative means default_cap
  double relative_gap = 1e-3;   // stop once the barrier gap bound is below this share of the value
  double t_factor = 10.0;
  int max_newton_per_stage = 60;
  double cg_tolerance = 1e-3;   // relative residual of the truncated Newton solve
  int max_cg = 500;
};

struct IntrinsicStage {
  double t = 0.0;
  double value = 0.0;  // best feasible value so far
  int newton_steps = 0;
  int cg_iterations = 0;
};

struct IntrinsicResult {
  double value = 0.0;
  double certificate_value = 0.0;
  int depth = 0;
  bool converged = false;
  int newton_steps = 0;
  int cg_iterations = 0;
  double min_slack = 0.0;  // of the returned function, from check_domination
  std::vector<IntrinsicStage> history;
  std::vector<double> f;
};

// Maximizes f(y) - f(x) over f on V_n (piecewise harmonic at level n) subject
// to mu_<f>(K_w) <= mu_<h>(K_w) for every |w| <= depth. Log-barrier path
// following with matrix-free Newton-CG, started inside the capped geodesic
// certificate. The value never falls below the certificate value.
IntrinsicResult intrinsic_estimate(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                   int n, const IntrinsicOptions& options = {});

// Columns stage, t, value, newton, cg.
std::string intrinsic_history_csv(const IntrinsicResult& result);

}  // namespace pcfgeo
