#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <fstream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pcfgeo/error.hpp"
#include "pcfgeo/metrics.hpp"
#include "pcfgeo/spec_io.hpp"

using namespace pcfgeo;

namespace {

MetricContext context(const char* name, int level) {
  HarmonicStructure hs = make_structure(resolve_spec(name));
  HarmonicTuple h = default_tuple(hs);
  return MetricContext(std::move(hs), std::move(h), level);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Context, CoordinatesMatchHarmonicEvalAndBoundary) {
  const MetricContext ctx = context("hexagasket", 3);
  for (int a = 0; a < 3; ++a) {
    for (int j = 0; j < 2; ++j) EXPECT_EQ(ctx.coordinates(a)[j], ctx.tuple().components[j][a]);
  }
  for (VertexId id = 0; id < ctx.graph().vertex_count(); ++id) {
    const VertexRef ref = ctx.graph().ref_of(id);
    for (int j = 0; j < 2; ++j) {
      EXPECT_NEAR(ctx.coordinates(id)[j], harmonic_eval(ctx.hs(), ctx.tuple().components[j], ref), 1e-14);
    }
  }
}

TEST(Context, CoordinatesAreLiftConsistent) {
  const MetricContext small = context("gasket:2", 3);
  const MetricContext large = context("gasket:2", 6);
  for (VertexId id = 0; id < small.graph().vertex_count(); ++id) {
    const VertexRef lifted = lift(small.hs().spec(), small.graph().ref_of(id), 6);
    const VertexId other = large.id_of(lifted);
    EXPECT_EQ(other, id);
    for (int j = 0; j < 2; ++j) EXPECT_EQ(small.coordinates(id)[j], large.coordinates(other)[j]);
  }
}

TEST(WeightedGraph, LevelZero) {
  const MetricContext ctx = context("gasket:2", 2);
  const auto edges = weighted_level_graph(ctx, 0);
  ASSERT_EQ(edges.size(), 3u);
  for (const WeightedEdge& e : edges) {
    EXPECT_NE(e.a, e.b);
    double s = 0.0;
    for (const Vector& a : ctx.tuple().components) s += (a[e.a] - a[e.b]) * (a[e.a] - a[e.b]);
    EXPECT_EQ(e.weight, std::sqrt(s));
  }
  HarmonicStructure hs = make_structure(resolve_spec("gasket:2"));
  HarmonicTuple h;
  h.components.emplace_back(Eigen::Vector3d(1, 0, 0));
  const MetricContext single(std::move(hs), std::move(h), 1);
  for (const WeightedEdge& e : weighted_level_graph(single, 0)) {
    if (e.a == 1 && e.b == 2) EXPECT_EQ(e.weight, 0.0);
    else EXPECT_EQ(e.weight, 1.0);
  }
  for (const WeightedEdge& e : weighted_level_graph(single, 1)) EXPECT_GE(e.weight, 0.0);
}

TEST(Geodesic, ZeroOnIdenticalPointsAndPathIsConsistent) {
  const MetricContext ctx = context("gasket:2", 5);
  EXPECT_EQ(discrete_geodesic(ctx, {{0}, 1}, {{1}, 0}, 3).value, 0.0);
  const GeodesicResult r = discrete_geodesic(ctx, {{}, 0}, {{2, 1}, 0}, 5);
  double length = 0.0;
  for (std::size_t i = 1; i < r.path.size(); ++i) length += ctx.distance(r.path[i - 1], r.path[i]);
  EXPECT_NEAR(length, r.value, 1e-14);
  EXPECT_EQ(r.path.front(), 0u);
  EXPECT_EQ(r.path.back(), ctx.id_of({{2, 1}, 0}));
}

TEST(Geodesic, LevelOneMatchesSimplePathEnumeration) {
  for (const char* name : {"gasket:2", "gasket:3", "hexagasket"}) {
    const MetricContext ctx = context(name, 1);
    const auto nv = static_cast<Eigen::Index>(ctx.graph().vertex_count(1));
    Matrix w = Matrix::Constant(nv, nv, std::numeric_limits<double>::infinity());
    for (const WeightedEdge& e : weighted_level_graph(ctx, 1)) w(e.a, e.b) = w(e.b, e.a) = e.weight;
    for (int s = 0; s < 3; ++s) {
      for (int t = 0; t < 3; ++t) {
        EXPECT_NEAR(discrete_geodesic(ctx, {{}, s}, {{}, t}, 1).value, oracle::simple_path_minimum(w, s, t), 1e-14)
            << name;
      }
    }
  }
}

TEST(Geodesic, MetricLawsOnSampledTriples) {
  std::mt19937_64 rng(71);
  for (const char* name : {"gasket:2", "hexagasket"}) {
    const int n = 4;
    const MetricContext ctx = context(name, n);
    const LevelDistance level(ctx, n);
    std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(level.vertex_count() - 1));
    for (int trial = 0; trial < 30; ++trial) {
      const VertexId x = pick(rng), y = pick(rng), z = pick(rng);
      const auto dx = level.profile(x);
      const auto dy = level.profile(y);
      EXPECT_NEAR(dx[y], dy[x], 1e-12);
      EXPECT_LE(dx[z], dx[y] + dy[z] + 1e-12);
      EXPECT_GE(dx[y], ctx.distance(x, y) - 1e-12);
    }
  }
}

TEST(Profile, LipschitzAndMonotoneUnderRefinement) {
  const MetricContext ctx = context("gasket:2", 7);
  for (int a = 0; a < 3; ++a) {
    std::vector<double> previous;
    for (int n = 0; n <= 7; ++n) {
      const std::vector<double> phi = geodesic_profile(ctx, {{}, a}, n);
      EXPECT_EQ(phi[a], 0.0);
      EXPECT_LE(lipschitz_excess(ctx, n, phi), 1e-12);
      for (std::size_t v = 0; v < previous.size(); ++v) EXPECT_GE(phi[v], previous[v] - 1e-12);
      previous = phi;
    }
  }
}

TEST(Profile, RejectsPointsAboveTheLevel) {
  const MetricContext ctx = context("gasket:2", 4);
  EXPECT_THROW(geodesic_profile(ctx, {{0, 1}, 2}, 1), Error);
  EXPECT_THROW(geodesic_profile(ctx, {{}, 0}, 5), Error);
}

TEST(Converge, SingleEntryAndGolden) {
  const MetricContext ctx = context("gasket:2", 10);
  const ConvergenceHistory single = geodesic_converge(ctx, {{}, 0}, {{}, 1}, 0, 0.0);
  EXPECT_EQ(single.values.size(), 1u);
  const ConvergenceHistory history = geodesic_converge(ctx, {{}, 0}, {{}, 1}, 10, 0.0);
  EXPECT_TRUE(history.monotone);
  for (std::size_t i = 1; i < history.values.size(); ++i) {
    EXPECT_GE(history.values[i] - history.values[i - 1], -1e-12);
  }
  EXPECT_EQ(convergence_csv(history), read_file(std::string(PCFGEO_TEST_DIR) + "/golden/geodesic_gasket2_corners.csv"));
  // Two more levels move the value by less than the last recorded gap.
  const MetricContext deeper = context("gasket:2", 12);
  const double v12 = discrete_geodesic(deeper, {{}, 0}, {{}, 1}, 12).value;
  EXPECT_GE(v12, history.estimate);
  EXPECT_LT(v12 - history.estimate, history.values[10] - history.values[9]);
  const ConvergenceHistory early = geodesic_converge(ctx, {{}, 0}, {{}, 1}, 10, 1e-3);
  EXPECT_TRUE(early.converged);
  EXPECT_LT(early.values.size(), history.values.size());
}

TEST(Certificate, CapZeroIsTrivial) {
  const MetricContext ctx = context("gasket:2", 4);
  const Certificate c = intrinsic_certificate(ctx, {{}, 0}, {{}, 2}, 4, 0.0);
  EXPECT_EQ(c.certified_value, 0.0);
  EXPECT_TRUE(c.feasible);
}

TEST(Certificate, FeasibleForCornerPairs) {
  const MetricContext ctx = context("gasket:2", 6);
  const double cap = default_cap(ctx);
  EXPECT_NEAR(cap, 2.0 * std::sqrt(2.0 / 3.0 * 4.0 / 2.0), 1e-12);
  for (int n = 0; n <= 6; ++n) {
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const Certificate c = intrinsic_certificate(ctx, {{}, a}, {{}, b}, n, cap);
        EXPECT_TRUE(c.feasible) << n << ' ' << a << ' ' << b << " min slack " << c.slack.min_slack;
        EXPECT_EQ(c.certified_value, std::min(discrete_geodesic(ctx, {{}, a}, {{}, b}, n).value, cap));
        EXPECT_LE(c.lipschitz_excess, 1e-12);
      }
    }
  }
  const Certificate small_cap = intrinsic_certificate(ctx, {{}, 0}, {{}, 1}, 5, 0.3);
  EXPECT_EQ(small_cap.certified_value, 0.3);
  EXPECT_TRUE(small_cap.feasible);
  const std::string json = certificate_json(small_cap);
  EXPECT_NE(json.find("\"feasible\": true"), std::string::npos);
  EXPECT_NE(json.find("\"value\": 0.29999999999999999"), std::string::npos) << json;
}

TEST(Embedding, GoldenAndBoundaryRows) {
  const MetricContext ctx = context("gasket:2", 3);
  const std::string csv = embedding_csv(ctx, 3);
  EXPECT_EQ(csv, read_file(std::string(PCFGEO_TEST_DIR) + "/golden/embedding_gasket2_level3.csv"));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "id,word,label,x_1,x_2");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 42);
}

TEST(DistanceMatrix, ThreadCountDoesNotChangeBits) {
  const MetricContext ctx = context("gasket:2", 6);
  std::vector<VertexId> sources(ctx.graph().vertex_count(2));
  std::iota(sources.begin(), sources.end(), 0);
  const Matrix one = distance_matrix(ctx, 6, sources, 1);
  const Matrix four = distance_matrix(ctx, 6, sources, 4);
  EXPECT_EQ(std::memcmp(one.data(), four.data(), sizeof(double) * one.size()), 0);
  for (Eigen::Index i = 0; i < one.rows(); ++i) EXPECT_EQ(one(i, i), 0.0);
  EXPECT_LE((one - one.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}
