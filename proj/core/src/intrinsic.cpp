#include "pcfgeo/intrinsic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pcfgeo/error.hpp"
#include "pcfgeo/format.hpp"

namespace pcfgeo {

namespace {

// Cell tree of one level: leaves are the level-n cells, constraints are the
// words of length 0..depth. Constraint values live in one flat array, level
// by level.
class BarrierProblem {
 public:
  BarrierProblem(const MetricContext& ctx, int n, int depth, VertexId x, VertexId y)
      : graph_(ctx.graph()), n_(n), depth_(depth), k_(ctx.hs().spec().letter_count),
        q_(ctx.hs().boundary_count()), x_(x), y_(y), energy_(-ctx.hs().D()) {
    offset_.push_back(0);
    for (int m = 0; m <= depth_; ++m) offset_.push_back(offset_.back() + word_count(k_, m));
    leaves_ = graph_.cell_count(n_);
    group_ = word_count(k_, n_ - depth_);

    const CellMeasureTable bound = cell_measure_table(ctx.hs(), ctx.tuple(), depth_);
    bound_.resize(offset_.back());
    for (int m = 0; m <= depth_; ++m) {
      std::copy(bound.values[m].begin(), bound.values[m].end(), bound_.begin() + offset_[m]);
    }
    if (*std::min_element(bound_.begin(), bound_.end()) <= 0.0) {
      throw Error(ErrorKind::degenerate, "mu_<h> vanishes on a cell, the barrier has no interior");
    }

    scale_.resize(leaves_);
    for (std::size_t c = 0; c < leaves_; ++c) {
      scale_[c] = 2.0 / ctx.hs().weight(word_from_index(c, n_, k_));
    }

    const std::size_t nv = graph_.vertex_count(n_);
    free_index_.assign(nv, -1);
    for (std::size_t v = 0; v < nv; ++v) {
      if (v == x_) continue;
      free_index_[v] = static_cast<Eigen::Index>(free_.size());
      free_.push_back(static_cast<VertexId>(v));
    }
  }

  std::size_t constraint_count() const { return bound_.size(); }
  std::size_t vertex_count() const { return free_index_.size(); }
  Eigen::Index free_count() const { return static_cast<Eigen::Index>(free_.size()); }
  VertexId target() const { return y_; }

  // Slack of every constraint; empty when some slack is not positive.
  bool slacks(const std::vector<double>& f, std::vector<double>& s) const {
    std::vector<double> leaf(leaves_);
    for (std::size_t c = 0; c < leaves_; ++c) leaf[c] = scale_[c] * local_form(f, c, f);
    aggregate(leaf, s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = bound_[i] - s[i];
      if (!(s[i] > 0.0)) return false;
    }
    return true;
  }

  double barrier(double t, const std::vector<double>& f, const std::vector<double>& s) const {
    double total = t * f[y_];
    for (double v : s) total += std::log(v);
    return total;
  }

  // Per-leaf sum over constrained ancestors of values[w].
  std::vector<double> descend(const std::vector<double>& values) const {
    std::vector<double> acc(offset_.back());
    for (int m = 0; m <= depth_; ++m) {
      for (std::uint64_t u = 0; u < offset_[m + 1] - offset_[m]; ++u) {
        const double above = m == 0 ? 0.0 : acc[offset_[m - 1] + u / k_];
        acc[offset_[m] + u] = above + values[offset_[m] + u];
      }
    }
    std::vector<double> leaf(leaves_);
    for (std::size_t c = 0; c < leaves_; ++c) leaf[c] = acc[offset_[depth_] + c / group_];
    return leaf;
  }

  // out += sum_c weight_c * 2 scale_c (-D) v_c, scattered to vertices.
  void add_laplacian(const std::vector<double>& weight, const std::vector<double>& v,
                     std::vector<double>& out) const {
    for (std::size_t c = 0; c < leaves_; ++c) {
      const auto ids = graph_.cell(n_, c);
      const double w = 2.0 * scale_[c] * weight[c];
      for (int a = 0; a < q_; ++a) {
        double s = 0.0;
        for (int b = 0; b < q_; ++b) s += energy_(a, b) * v[ids[b]];
        out[ids[a]] += w * s;
      }
    }
  }

  // Gradient of the barrier objective.
  std::vector<double> gradient(double t, const std::vector<double>& f, const std::vector<double>& sigma) const {
    std::vector<double> g(vertex_count(), 0.0);
    add_laplacian(sigma, f, g);
    for (double& v : g) v = -v;
    g[y_] += t;
    g[x_] = 0.0;
    return g;
  }

  // Negated Hessian of the barrier objective applied to v.
  std::vector<double> hessian(const std::vector<double>& f, const std::vector<double>& s,
                              const std::vector<double>& sigma, const std::vector<double>& v) const {
    std::vector<double> out(vertex_count(), 0.0);
    add_laplacian(sigma, v, out);
    std::vector<double> leaf(leaves_);
    for (std::size_t c = 0; c < leaves_; ++c) leaf[c] = 2.0 * scale_[c] * local_form(f, c, v);
    std::vector<double> t;
    aggregate(leaf, t);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] /= s[i] * s[i];
    add_laplacian(descend(t), f, out);
    out[x_] = 0.0;
    return out;
  }

  SparseMatrix preconditioner(const std::vector<double>& sigma) const {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(leaves_ * static_cast<std::size_t>(q_ * q_));
    for (std::size_t c = 0; c < leaves_; ++c) {
      const auto ids = graph_.cell(n_, c);
      const double w = 2.0 * scale_[c] * sigma[c];
      for (int a = 0; a < q_; ++a) {
        const Eigen::Index ia = free_index_[ids[a]];
        if (ia < 0) continue;
        for (int b = 0; b < q_; ++b) {
          const Eigen::Index ib = free_index_[ids[b]];
          if (ib >= 0) triplets.emplace_back(ia, ib, w * energy_(a, b));
        }
      }
    }
    SparseMatrix m(free_count(), free_count());
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
  }

  Vector to_free(const std::vector<double>& v) const {
    Vector out(free_count());
    for (Eigen::Index i = 0; i < free_count(); ++i) out[i] = v[free_[i]];
    return out;
  }
  std::vector<double> from_free(const Vector& v) const {
    std::vector<double> out(vertex_count(), 0.0);
    for (Eigen::Index i = 0; i < free_count(); ++i) out[free_[i]] = v[i];
    return out;
  }

 private:
  double local_form(const std::vector<double>& f, std::size_t c, const std::vector<double>& v) const {
    const auto ids = graph_.cell(n_, c);
    double total = 0.0;
    for (int a = 0; a < q_; ++a) {
      double s = 0.0;
      for (int b = 0; b < q_; ++b) s += energy_(a, b) * v[ids[b]];
      total += f[ids[a]] * s;
    }
    return total;
  }

  void aggregate(const std::vector<double>& leaf, std::vector<double>& out) const {
    out.assign(offset_.back(), 0.0);
    // Depth-level sums straight from the leaves, then up the tree.
    for (std::size_t c = 0; c < leaves_; ++c) out[offset_[depth_] + c / group_] += leaf[c];
    for (int m = depth_ - 1; m >= 0; --m) {
      for (std::uint64_t u = 0; u < offset_[m + 1] - offset_[m]; ++u) {
        double s = 0.0;
        for (int i = 0; i < k_; ++i) s += out[offset_[m + 1] + u * k_ + i];
        out[offset_[m] + u] = s;
      }
    }
  }

  const LevelGraph& graph_;
  int n_, depth_, k_, q_;
  VertexId x_, y_;
  Matrix energy_;
  std::vector<std::uint64_t> offset_;
  std::size_t leaves_ = 0;
  std::uint64_t group_ = 1;
  std::vector<double> bound_;
  std::vector<double> scale_;
  std::vector<Eigen::Index> free_index_;
  std::vector<VertexId> free_;
};

}  // namespace

IntrinsicResult intrinsic_estimate(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                   int n, const IntrinsicOptions& options) {
  const double cap = options.cap < 0.0 ? default_cap(ctx) : options.cap;
  const Certificate cert = intrinsic_certificate(ctx, x, y, n, cap);

  IntrinsicResult result;
  result.depth = options.depth < 0 ? n : std::min(options.depth, n);
  result.certificate_value = cert.certified_value;
  result.value = cert.feasible ? cert.certified_value : 0.0;
  result.f = cert.feasible ? cert.f : std::vector<double>(cert.f.size(), 0.0);
  result.min_slack = cert.slack.min_slack;
  if (cert.from == cert.to) {
    result.converged = true;
    return result;
  }

  const BarrierProblem problem(ctx, n, result.depth, cert.from, cert.to);
  const auto m = static_cast<double>(problem.constraint_count());
  std::vector<double> f(cert.f.size());
  for (std::size_t v = 0; v < f.size(); ++v) f[v] = 0.99 * result.f[v];
  std::vector<double> s;
  if (!problem.slacks(f, s)) {
    throw Error(ErrorKind::internal, "scaled certificate is not strictly feasible");
  }
  double t = m / (0.05 * std::max(f[cert.to], 1e-12));
  double best = result.value;
  std::vector<double> best_f = result.f;

  Eigen::SimplicialLDLT<SparseMatrix> factor;
  bool analyzed = false;
  std::vector<double> trial_s;
  while (result.newton_steps < options.budget) {
    IntrinsicStage stage;
    stage.t = t;
    for (int step = 0; step < options.max_newton_per_stage && result.newton_steps < options.budget; ++step) {
      std::vector<double> inverse(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) inverse[i] = 1.0 / s[i];
      const std::vector<double> sigma = problem.descend(inverse);
      const std::vector<double> g = problem.gradient(t, f, sigma);

      const SparseMatrix pre = problem.preconditioner(sigma);
      if (!analyzed) {
        factor.analyzePattern(pre);
        analyzed = true;
      }
      factor.factorize(pre);
      if (factor.info() != Eigen::Success) throw Error(ErrorKind::internal, "preconditioner factorization failed");

      // Preconditioned conjugate gradients on the free vertices.
      const Vector rhs = problem.to_free(g);
      Vector dir = Vector::Zero(rhs.size());
      Vector res = rhs;
      Vector z = factor.solve(res);
      Vector p = z;
      double rz = res.dot(z);
      const double stop = options.cg_tolerance * options.cg_tolerance * rhs.squaredNorm();
      for (int it = 0; it < options.max_cg && res.squaredNorm() > stop; ++it) {
        const Vector hp = problem.to_free(problem.hessian(f, s, sigma, problem.from_free(p)));
        const double curvature = p.dot(hp);
        if (!(curvature > 0.0)) break;
        const double alpha = rz / curvature;
        dir += alpha * p;
        res -= alpha * hp;
        z = factor.solve(res);
        const double rz_next = res.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
        ++stage.cg_iterations;
      }
      ++result.newton_steps;
      ++stage.newton_steps;

      const double decrement = rhs.dot(dir);
      if (!(decrement / 2.0 > 1e-9)) break;
      const std::vector<double> d = problem.from_free(dir);
      const double current = problem.barrier(t, f, s);
      std::vector<double> trial(f.size());
      bool moved = false;
      for (double a = 1.0; a > 1e-14; a *= 0.5) {
        for (std::size_t v = 0; v < f.size(); ++v) trial[v] = f[v] + a * d[v];
        if (!problem.slacks(trial, trial_s)) continue;
        if (problem.barrier(t, trial, trial_s) >= current + 0.25 * a * decrement) {
          moved = true;
          break;
        }
      }
      if (!moved) break;
      f.swap(trial);
      s.swap(trial_s);
      if (f[cert.to] > best) {
        best = f[cert.to];
        best_f = f;
      }
    }
    stage.value = best;
    result.cg_iterations += stage.cg_iterations;
    result.history.push_back(stage);
    if (m / t < options.relative_gap * std::abs(f[cert.to])) {
      result.converged = true;
      break;
    }
    t *= options.t_factor;
  }

  // Confirm the returned function on the independent measure path.
  const SlackTable check = check_domination(ctx.hs(), ctx.graph(), n, best_f, ctx.tuple(), result.depth);
  if (check.feasible) {
    result.value = best;
    result.f = std::move(best_f);
    result.min_slack = check.min_slack;
  }
  return result;
}

std::string intrinsic_history_csv(const IntrinsicResult& result) {
  std::ostringstream out;
  out << "stage,t,value,newton,cg\n";
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const IntrinsicStage& s = result.history[i];
    out << i << ',' << format_double(s.t) << ',' << format_double(s.value) << ',' << s.newton_steps << ','
        << s.cg_iterations << '\n';
  }
  return out.str();
}

}  // namespace pcfgeo
