#include "pcfgeo/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>
#include <thread>

#include "pcfgeo/error.hpp"
#include "pcfgeo/format.hpp"

namespace pcfgeo {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

void check_level(const MetricContext& ctx, int n) {
  if (n < 0 || n > ctx.max_level()) {
    throw Error(ErrorKind::invalid_argument, "level " + std::to_string(n) + " outside [0, " +
                                                 std::to_string(ctx.max_level()) + "]");
  }
}

// Level of the first V_m containing both points.
int common_level(const MetricContext& ctx, const VertexRef& x, const VertexRef& y) {
  const FractalSpec& spec = ctx.hs().spec();
  return std::max(minimal_ref(spec, x).level(), minimal_ref(spec, y).level());
}

}  // namespace

MetricContext::MetricContext(HarmonicStructure hs, HarmonicTuple h, int max_level,
                             const BuildLimits& limits)
    : hs_(std::move(hs)), h_(std::move(h)), graph_(build_level(hs_.spec(), max_level, limits)) {
  const int q = hs_.boundary_count();
  const int k = hs_.spec().letter_count;
  if (h_.size() == 0) throw Error(ErrorKind::invalid_argument, "harmonic tuple is empty");
  for (const Vector& a : h_.components) {
    if (a.size() != q) throw Error(ErrorKind::invalid_argument, "tuple vectors need one value per boundary point");
  }
  const std::size_t dim = h_.size();
  const std::size_t block = dim * static_cast<std::size_t>(q);
  coords_.assign(graph_.vertex_count() * dim, 0.0);
  std::vector<char> assigned(graph_.vertex_count(), 0);

  // Boundary values of every component on every cell of the current level,
  // stored as block = dim * q doubles per cell.
  std::vector<double> cell_values(block);
  for (std::size_t j = 0; j < dim; ++j) {
    for (int a = 0; a < q; ++a) cell_values[j * q + a] = h_.components[j][a];
  }
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> A;
  for (int i = 0; i < k; ++i) A.emplace_back(hs_.extension(i));

  for (int m = 0;; ++m) {
    const std::size_t cells = graph_.cell_count(m);
    for (std::size_t c = 0; c < cells; ++c) {
      const auto ids = graph_.cell(m, c);
      for (int a = 0; a < q; ++a) {
        const VertexId id = ids[a];
        if (assigned[id]) continue;
        assigned[id] = 1;
        for (std::size_t j = 0; j < dim; ++j) coords_[id * dim + j] = cell_values[c * block + j * q + a];
      }
    }
    if (m == graph_.level()) break;
    std::vector<double> next(cell_values.size() * static_cast<std::size_t>(k));
    for (std::size_t c = 0; c < cells; ++c) {
      for (int i = 0; i < k; ++i) {
        const double* in = &cell_values[c * block];
        double* out = &next[(c * k + i) * block];
        for (std::size_t j = 0; j < dim; ++j) {
          for (int b = 0; b < q; ++b) {
            double s = 0.0;
            for (int a = 0; a < q; ++a) s += A[i](b, a) * in[j * q + a];
            out[j * q + b] = s;
          }
        }
      }
    }
    cell_values = std::move(next);
  }
}

double MetricContext::distance(VertexId a, VertexId b) const {
  const auto x = coordinates(a);
  const auto y = coordinates(b);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
  return std::sqrt(s);
}

std::vector<WeightedEdge> weighted_level_graph(const MetricContext& ctx, int n) {
  check_level(ctx, n);
  const int q = ctx.hs().boundary_count();
  const LevelGraph& g = ctx.graph();
  std::vector<WeightedEdge> edges;
  edges.reserve(g.cell_count(n) * static_cast<std::size_t>(q * (q - 1) / 2));
  for (std::size_t c = 0; c < g.cell_count(n); ++c) {
    const auto ids = g.cell(n, c);
    for (int a = 0; a < q; ++a) {
      for (int b = a + 1; b < q; ++b) edges.push_back({ids[a], ids[b], ctx.distance(ids[a], ids[b])});
    }
  }
  return edges;
}

LevelDistance::LevelDistance(const MetricContext& ctx, int n) : ctx_(&ctx), level_(n) {
  check_level(ctx, n);
  const LevelGraph& g = ctx.graph();
  const std::size_t nv = g.vertex_count(n);
  const auto cells = g.cells(n);
  const auto q = static_cast<std::size_t>(ctx.hs().boundary_count());
  offsets_.assign(nv + 1, 0);
  for (VertexId id : cells) ++offsets_[id + 1];
  for (std::size_t v = 0; v < nv; ++v) offsets_[v + 1] += offsets_[v];
  incident_.resize(cells.size());
  std::vector<std::uint64_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t s = 0; s < cells.size(); ++s) {
    incident_[fill[cells[s]]++] = static_cast<std::uint32_t>(s / q);
  }
}

void LevelDistance::search(VertexId source, VertexId target, std::vector<double>& dist,
                           std::vector<VertexId>* parent) const {
  const std::size_t nv = vertex_count();
  if (source >= nv || (target != std::numeric_limits<VertexId>::max() && target >= nv)) {
    throw Error(ErrorKind::invalid_argument, "vertex is not in V_" + std::to_string(level_));
  }
  const LevelGraph& g = ctx_->graph();
  dist.assign(nv, kInfinity);
  if (parent) parent->assign(nv, std::numeric_limits<VertexId>::max());
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[v]) continue;
    if (v == target) break;
    for (std::uint64_t e = offsets_[v]; e < offsets_[v + 1]; ++e) {
      for (VertexId w : g.cell(level_, incident_[e])) {
        if (w == v) continue;
        const double candidate = d + ctx_->distance(v, w);
        if (candidate < dist[w]) {
          dist[w] = candidate;
          if (parent) (*parent)[w] = v;
          heap.emplace(candidate, w);
        }
      }
    }
  }
}

std::vector<double> LevelDistance::profile(VertexId source) const {
  std::vector<double> dist;
  search(source, std::numeric_limits<VertexId>::max(), dist, nullptr);
  if (std::any_of(dist.begin(), dist.end(), [](double d) { return d == kInfinity; })) {
    throw Error(ErrorKind::internal, "level graph is disconnected");
  }
  return dist;
}

GeodesicResult LevelDistance::geodesic(VertexId from, VertexId to) const {
  std::vector<double> dist;
  std::vector<VertexId> parent;
  search(from, to, dist, &parent);
  if (dist[to] == kInfinity) throw Error(ErrorKind::internal, "level graph is disconnected");
  GeodesicResult result;
  result.level = level_;
  result.value = dist[to];
  for (VertexId v = to; v != from; v = parent[v]) result.path.push_back(v);
  result.path.push_back(from);
  std::reverse(result.path.begin(), result.path.end());
  return result;
}

GeodesicResult discrete_geodesic(const MetricContext& ctx, const VertexRef& x, const VertexRef& y, int n) {
  check_level(ctx, n);
  if (common_level(ctx, x, y) > n) {
    throw Error(ErrorKind::invalid_argument, "points are not both in V_" + std::to_string(n));
  }
  return LevelDistance(ctx, n).geodesic(ctx.id_of(x), ctx.id_of(y));
}

std::vector<double> geodesic_profile(const MetricContext& ctx, const VertexRef& x, int n) {
  check_level(ctx, n);
  if (minimal_ref(ctx.hs().spec(), x).level() > n) {
    throw Error(ErrorKind::invalid_argument, format_vertex_ref(x) + " is not in V_" + std::to_string(n));
  }
  return LevelDistance(ctx, n).profile(ctx.id_of(x));
}

double lipschitz_excess(const MetricContext& ctx, int n, std::span<const double> phi) {
  check_level(ctx, n);
  if (phi.size() != ctx.graph().vertex_count(n)) {
    throw Error(ErrorKind::invalid_argument, "profile must have one value per vertex of V_n");
  }
  double worst = -kInfinity;
  for (const WeightedEdge& e : weighted_level_graph(ctx, n)) {
    worst = std::max(worst, std::abs(phi[e.a] - phi[e.b]) - e.weight);
  }
  return worst;
}

ConvergenceHistory geodesic_converge(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                     int n_max, double rtol) {
  const int start = common_level(ctx, x, y);
  check_level(ctx, n_max);
  if (start > n_max) {
    throw Error(ErrorKind::invalid_argument, "points are not both in V_" + std::to_string(n_max));
  }
  ConvergenceHistory history;
  for (int n = start; n <= n_max; ++n) {
    const double value = discrete_geodesic(ctx, x, y, n).value;
    if (!history.values.empty()) {
      const double previous = history.values.back();
      if (value - previous < -1e-12) history.monotone = false;
      history.relative_gap = value > 0.0 ? (value - previous) / value : 0.0;
    }
    history.levels.push_back(n);
    history.values.push_back(value);
    if (history.values.size() >= 2 && rtol > 0.0 && history.relative_gap < rtol) {
      history.converged = true;
      break;
    }
  }
  const auto& v = history.values;
  history.estimate = v.back();
  history.extrapolated = v.back();
  if (v.size() >= 3) {
    const double d1 = v[v.size() - 1] - v[v.size() - 2];
    const double d0 = v[v.size() - 2] - v[v.size() - 3];
    if (d0 - d1 != 0.0) history.extrapolated = v.back() + d1 * d1 / (d0 - d1);
  }
  return history;
}

std::string convergence_csv(const ConvergenceHistory& history) {
  std::ostringstream out;
  out << "n,value\n";
  for (std::size_t i = 0; i < history.values.size(); ++i) {
    out << history.levels[i] << ',' << format_double(history.values[i]) << '\n';
  }
  return out.str();
}

double default_cap(const MetricContext& ctx) {
  const Matrix& D = ctx.hs().D();
  const int q = ctx.hs().boundary_count();
  double c = 0.0;
  for (int a = 0; a < q; ++a) {
    for (int b = a + 1; b < q; ++b) c = std::max(c, boundary_resistance(D, a, b));
  }
  const double mass = harmonic_cell_measure(ctx.hs(), ctx.tuple(), Word{});
  return 2.0 * std::sqrt(c * mass / 2.0);
}

Certificate intrinsic_certificate(const MetricContext& ctx, const VertexRef& x, const VertexRef& y,
                                  int n, double cap) {
  if (!(cap >= 0.0)) throw Error(ErrorKind::invalid_argument, "cap must be nonnegative");
  check_level(ctx, n);
  if (common_level(ctx, x, y) > n) {
    throw Error(ErrorKind::invalid_argument, "points are not both in V_" + std::to_string(n));
  }
  Certificate cert;
  cert.level = n;
  cert.cap = cap;
  cert.from = ctx.id_of(x);
  cert.to = ctx.id_of(y);
  const std::vector<double> phi = LevelDistance(ctx, n).profile(cert.from);
  cert.geodesic_value = phi[cert.to];
  cert.lipschitz_excess = lipschitz_excess(ctx, n, phi);
  cert.f.resize(phi.size());
  for (std::size_t v = 0; v < phi.size(); ++v) cert.f[v] = std::min(phi[v], cap);
  cert.slack = check_domination(ctx.hs(), ctx.graph(), n, cert.f, ctx.tuple(), n);
  cert.certified_value = cert.f[cert.to] - cert.f[cert.from];
  cert.feasible = cert.slack.feasible;
  return cert;
}

std::string certificate_json(const Certificate& c) {
  std::ostringstream out;
  out << "{\n"
      << "  \"level\": " << c.level << ",\n"
      << "  \"cap\": " << format_double(c.cap) << ",\n"
      << "  \"value\": " << format_double(c.certified_value) << ",\n"
      << "  \"geodesic\": " << format_double(c.geodesic_value) << ",\n"
      << "  \"min_slack\": " << format_double(c.slack.min_slack) << ",\n"
      << "  \"argmin\": \"" << (c.slack.argmin.empty() ? std::string("-") : format_word(c.slack.argmin))
      << "\",\n"
      << "  \"scale\": " << format_double(c.slack.scale) << ",\n"
      << "  \"checked_depth\": " << c.slack.depth << ",\n"
      << "  \"lipschitz_excess\": " << format_double(c.lipschitz_excess) << ",\n"
      << "  \"feasible\": " << (c.feasible ? "true" : "false") << "\n"
      << "}\n";
  return out.str();
}

std::string embedding_csv(const MetricContext& ctx, int n) {
  check_level(ctx, n);
  std::ostringstream out;
  out << "id,word,label";
  for (int j = 1; j <= ctx.dimension(); ++j) out << ",x_" << j;
  out << '\n';
  const std::size_t nv = ctx.graph().vertex_count(n);
  for (std::size_t id = 0; id < nv; ++id) {
    const VertexRef ref = ctx.graph().ref_of(static_cast<VertexId>(id));
    out << id << ',' << (ref.word.empty() ? std::string("-") : format_word(ref.word)) << ',' << ref.label;
    for (double x : ctx.coordinates(static_cast<VertexId>(id))) out << ',' << format_double(x);
    out << '\n';
  }
  return out.str();
}

Matrix distance_matrix(const MetricContext& ctx, int n, std::span<const VertexId> sources, int threads) {
  const LevelDistance level(ctx, n);
  for (VertexId s : sources) {
    if (s >= level.vertex_count()) throw Error(ErrorKind::invalid_argument, "source outside V_n");
  }
  const auto count = static_cast<Eigen::Index>(sources.size());
  Matrix result(count, count);
  std::atomic<Eigen::Index> next{0};
  auto work = [&] {
    for (Eigen::Index row = next++; row < count; row = next++) {
      const std::vector<double> dist = level.profile(sources[row]);
      for (Eigen::Index col = 0; col < count; ++col) result(row, col) = dist[sources[col]];
    }
  };
  const int workers = std::max(1, threads);
  std::vector<std::thread> pool;
  for (int t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();
  return result;
}

}  // namespace pcfgeo
