// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 only if
// every criterion passes. `--speedup` runs the parallel speedup measurement,
// which needs four hardware threads and exits 77 (skipped) otherwise.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "oracles.hpp"
#include "pcfgeo/error.hpp"
#include "pcfgeo/format.hpp"
#include "pcfgeo/intrinsic.hpp"
#include "pcfgeo/spec_io.hpp"

using namespace pcfgeo;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return static_cast<double>(usage.ru_maxrss) / 1024.0;
}

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool condition, const std::string& what) {
    if (!condition) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

std::string fmt(double v) { return format_double(v); }

HarmonicStructure structure(const std::string& name) { return make_structure(resolve_spec(name)); }

MetricContext context(const std::string& name, int level) {
  HarmonicStructure hs = structure(name);
  HarmonicTuple h = default_tuple(hs);
  return MetricContext(std::move(hs), std::move(h), level);
}

// Largest componentwise gap between x and a positive multiple of y, after
// scaling both to unit max-norm.
double proportional_gap(const Vector& x, const Vector& y) {
  const Vector a = x / x.cwiseAbs().maxCoeff();
  const Vector b = y / y.cwiseAbs().maxCoeff();
  return (a - b).cwiseAbs().maxCoeff();
}

Outcome reference_values() {
  Outcome o;
  const auto start = Clock::now();
  const HarmonicStructure hs = structure("gasket:2");
  o.require(check_dirichlet_matrix(hs.D()).all_pass(), "(D1)-(D3)");
  const Eigen::Matrix3d v_expected = (Eigen::Matrix3d() << 0, 1, 1, 1, 0, 1, 1, 1, 0).finished();
  const Eigen::Matrix3d dv_expected = (Eigen::Matrix3d() << 2, -1, -1, -1, 2, -1, -1, -1, 2).finished();
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    const Vector v = hs.fixed_point(a).v;
    worst = std::max(worst, proportional_gap(v, v_expected.row(a).transpose()));
    worst = std::max(worst, proportional_gap(hs.D() * v, dv_expected.row(a).transpose()));
  }
  o.require(worst <= 1e-12, "v_i or Dv_i off by " + fmt(worst));
  o.require(check_b_conditions(hs).all_pass(), "(B1)-(B4)");
  std::ostringstream sink;
  o.require(cli::run({"check"}, sink, sink) == 0, "check exit code");
  const double elapsed = seconds_since(start);
  o.require(elapsed < 1.0, "runtime " + fmt(elapsed) + " s");
  o.detail << (o.pass ? "" : "; ") << "max proportionality gap " << worst << ", " << elapsed << " s";
  return o;
}

Outcome regularity() {
  Outcome o;
  const HarmonicStructure sg2 = structure("gasket:2");
  const FractalSpec& spec = sg2.spec();
  const double residual = check_regularity(spec, sg2.D(), std::vector<double>(3, 0.6));
  const double r = solve_equal_renormalization(spec, sg2.D());
  o.require(residual <= 1e-12, "gasket:2 residual " + fmt(residual));
  o.require(std::abs(r - 0.6) <= 1e-12, "gasket:2 r = " + fmt(r));

  std::map<std::string, double> golden;
  std::ifstream in(std::string(PCFGEO_TEST_DIR) + "/golden/renormalization.txt");
  std::string name;
  double value = 0.0;
  while (in >> name >> value) golden[name] = value;
  o.detail << "gasket:2 r " << fmt(r) << " residual " << residual;
  for (const char* poly : {"hexagasket", "nonagasket"}) {
    const HarmonicStructure hs = structure(poly);
    const double rp = hs.r()[0];
    o.require(rp > 0.0 && rp < 1.0, std::string(poly) + " r outside (0,1)");
    o.require(hs.regularity_residual() <= 1e-10, std::string(poly) + " residual " + fmt(hs.regularity_residual()));
    o.require(golden.count(poly) && std::abs(golden[poly] - rp) <= 1e-12, std::string(poly) + " differs from golden");
    o.detail << "; " << poly << " r " << fmt(rp) << " residual " << hs.regularity_residual();
  }
  return o;
}

Outcome additivity() {
  Outcome o;
  const auto start = Clock::now();
  const HarmonicStructure hs = structure("gasket:2");
  std::mt19937_64 rng(20240601);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    HarmonicTuple h;
    for (int j = 0; j <= trial % 3; ++j) h.components.emplace_back(Eigen::Vector3d(normal(rng), normal(rng), normal(rng)));
    const double total = harmonic_cell_measure(hs, h, {});
    for (int m = 0; m <= 7; ++m) {
      for (std::uint64_t u = 0; u < word_count(3, m); ++u) {
        Word w = word_from_index(u, m, 3);
        const double parent = harmonic_cell_measure(hs, h, w);
        double children = 0.0;
        w.push_back(0);
        for (Letter i = 0; i < 3; ++i) {
          w.back() = i;
          children += harmonic_cell_measure(hs, h, w);
        }
        worst = std::max(worst, std::abs(parent - children) / total);
      }
    }
  }
  const double elapsed = seconds_since(start);
  o.require(worst <= 1e-10, "relative defect " + fmt(worst));
  o.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s");
  o.detail << (o.pass ? "" : "; ") << "max |mu(w) - sum mu(wi)| / mu(K) = " << worst << ", " << elapsed << " s";
  return o;
}

Outcome geodesic_laws() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst_sym = 0.0, worst_tri = 0.0, worst_mono = 0.0, worst_chord = 0.0;
  int triples = 0;
  for (const std::string name : {"gasket:2", "gasket:3", "hexagasket"}) {
    // Sampled triples at a moderate level.
    {
      const int n = name == "gasket:2" ? 6 : 3;
      const MetricContext ctx = context(name, n);
      const LevelDistance level(ctx, n);
      std::uniform_int_distribution<VertexId> pick(0, static_cast<VertexId>(level.vertex_count() - 1));
      for (int t = 0; t < 200; ++t, ++triples) {
        const VertexId x = pick(rng), y = pick(rng), z = pick(rng);
        const auto dx = level.profile(x);
        const auto dy = level.profile(y);
        worst_sym = std::max(worst_sym, std::abs(dx[y] - dy[x]));
        worst_tri = std::max(worst_tri, dx[z] - dx[y] - dy[z]);
        for (VertexId v = 0; v < dx.size(); ++v) worst_chord = std::max(worst_chord, ctx.distance(x, v) - dx[v]);
      }
    }
    // Monotonicity in n up to 9 for every pair of V_0 sources and V_1 targets.
    const MetricContext ctx = context(name, 9);
    const std::size_t targets = ctx.graph().vertex_count(1);
    std::vector<std::vector<double>> previous(3);
    for (int n = 1; n <= 9; ++n) {
      const LevelDistance level(ctx, n);
      for (VertexId a = 0; a < 3; ++a) {
        const std::vector<double> phi = level.profile(a);
        for (VertexId v = 0; v < phi.size(); ++v) worst_chord = std::max(worst_chord, ctx.distance(a, v) - phi[v]);
        if (!previous[a].empty()) {
          for (std::size_t v = 0; v < targets; ++v) worst_mono = std::max(worst_mono, previous[a][v] - phi[v]);
        }
        previous[a].assign(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(targets));
      }
    }
  }
  o.require(worst_sym <= 1e-12, "symmetry defect " + fmt(worst_sym));
  o.require(worst_tri <= 1e-12, "triangle defect " + fmt(worst_tri));
  o.require(worst_mono <= 1e-12, "monotonicity defect " + fmt(worst_mono));
  o.require(worst_chord <= 1e-12, "chord defect " + fmt(worst_chord));
  o.detail << (o.pass ? "" : "; ") << triples << " triples; max defects symmetry " << worst_sym << ", triangle "
           << std::max(0.0, worst_tri) << ", monotonicity " << std::max(0.0, worst_mono) << ", chord "
           << std::max(0.0, worst_chord);
  return o;
}

Outcome lipschitz_certificates() {
  Outcome o;
  double worst_lip = -1.0, worst_slack = std::numeric_limits<double>::infinity();
  int certificates = 0, infeasible = 0;
  const std::vector<std::pair<std::string, int>> cases = {{"gasket:2", 8}, {"gasket:3", 5}, {"hexagasket", 5}};
  for (const auto& [name, n_max] : cases) {
    const MetricContext ctx = context(name, n_max);
    const double cap = default_cap(ctx);
    for (int n = 0; n <= n_max; ++n) {
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          if (a == b) continue;
          const Certificate c = intrinsic_certificate(ctx, {{}, a}, {{}, b}, n, cap);
          worst_lip = std::max(worst_lip, c.lipschitz_excess);
          worst_slack = std::min(worst_slack, c.slack.min_slack / c.slack.scale);
          if (!c.feasible) ++infeasible;
          ++certificates;
        }
      }
    }
  }
  o.require(worst_lip <= 1e-12, "Lipschitz excess " + fmt(worst_lip));
  o.require(infeasible == 0, std::to_string(infeasible) + " infeasible certificates");
  o.detail << (o.pass ? "" : "; ") << certificates << " certificates, max Lipschitz excess " << worst_lip
           << ", min slack / mu(K) " << worst_slack;
  return o;
}

Outcome intrinsic_band() {
  Outcome o;
  const auto start = Clock::now();
  const MetricContext ctx = context("gasket:2", 12);
  const VertexRef x{{}, 0}, y{{}, 1};
  const ConvergenceHistory history = geodesic_converge(ctx, x, y, 12, 0.0);
  const IntrinsicResult r = intrinsic_estimate(ctx, x, y, 8);
  const double rel = std::abs(r.value - history.estimate) / history.estimate;
  o.require(rel <= 0.05, "relative difference " + fmt(rel));
  const double rho8 = discrete_geodesic(ctx, x, y, 8).value;
  const Certificate c = intrinsic_certificate(ctx, x, y, 8, default_cap(ctx));
  o.require(c.certified_value == std::min(rho8, c.cap), "certificate value differs from min(rho_8, M)");
  o.require(c.feasible, "certificate infeasible");
  o.detail << (o.pass ? "" : "; ") << "intrinsic(n=8) " << fmt(r.value) << (r.converged ? "" : " (not converged)")
           << ", geodesic estimate rho_12 " << fmt(history.estimate) << ", relative " << rel << ", certificate "
           << fmt(c.certified_value) << " = min(" << fmt(rho8) << ", " << fmt(c.cap) << "), "
           << seconds_since(start) << " s";
  return o;
}

Outcome separation() {
  Outcome o;
  double smallest = std::numeric_limits<double>::infinity();
  int pairs = 0;
  for (const char* name : {"gasket:2", "gasket:3", "gasket:4", "hexagasket", "nonagasket"}) {
    const HarmonicStructure hs = structure(name);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b) continue;
        const double d = separation_constant(hs, hs.spec().fixed_letter[a], hs.spec().fixed_letter[b]);
        smallest = std::min(smallest, d);
        ++pairs;
        o.require(d > 0.0, std::string(name) + " nonpositive");
      }
    }
  }
  const HarmonicStructure sg2 = structure("gasket:2");
  const double d = separation_constant(sg2, 0, 1);
  const double scan = oracle::angular_separation(sg2.fixed_point(0).u, sg2.fixed_point(1).u);
  o.require(std::abs(d - scan) <= 1e-9, "scan oracle gives " + fmt(scan));
  o.require(std::abs(d - std::sqrt(1.5)) <= 1e-9, "gasket:2 value " + fmt(d));
  o.detail << (o.pass ? "" : "; ") << pairs << " pairs, min " << smallest << "; gasket:2 " << fmt(d) << " vs scan "
           << fmt(scan);
  return o;
}

Outcome convergence_check() {
  Outcome o;
  const HarmonicStructure hs = structure("gasket:2");
  std::mt19937_64 rng(4040);
  std::normal_distribution<double> normal;
  double worst_final = 0.0, worst_increase = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector alpha(Eigen::Vector3d(normal(rng), normal(rng), normal(rng)));
    alpha /= project_mean_zero(alpha).norm();
    for (int letter = 0; letter < 3; ++letter) {
      const std::vector<double> e = convergence_diagnostic(hs, letter, alpha, 40);
      for (std::size_t n = 1; n < e.size(); ++n) worst_increase = std::max(worst_increase, e[n] - e[n - 1]);
      worst_final = std::max(worst_final, e.back());
    }
  }
  o.require(worst_increase <= 1e-14, "error increased by " + fmt(worst_increase));
  o.require(worst_final < 1e-6, "error at n = 40 is " + fmt(worst_final));
  o.detail << (o.pass ? "" : "; ") << "max error at n = 40: " << worst_final << ", max step increase "
           << worst_increase;
  return o;
}

Outcome performance() {
  Outcome o;
  const double rss_before = peak_rss_mb();
  const auto start = Clock::now();
  const MetricContext ctx = context("gasket:2", 12);
  const double built = seconds_since(start);
  const std::vector<double> phi = geodesic_profile(ctx, {{}, 0}, 12);
  const double elapsed = seconds_since(start);
  const double rss = peak_rss_mb();
  o.require(phi.size() == 797163, "unexpected vertex count");
  o.require(elapsed < 5.0, "runtime " + fmt(elapsed) + " s");
  o.require(rss < 1024.0, "peak RSS " + fmt(rss) + " MB");
  o.detail << (o.pass ? "" : "; ") << phi.size() << " vertices, " << elapsed << " s including " << built
           << " s setup, peak RSS " << rss << " MB (" << rss_before << " MB before)"
           << "; thread speedup is the separate acceptance_parallel_speedup test";
  return o;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome o;
  const std::vector<std::vector<std::string>> commands = {
      {"check"},
      {"--spec", "nonagasket", "check"},
      {"graph", "--level", "4"},
      {"geodesic", "--from", "-:0", "--to", "-:1", "--nmax", "8"},
      {"profile", "--from", "-:1", "--level", "7"},
      {"certify", "--from", "-:0", "--to", "-:2", "--level", "6"},
      {"intrinsic", "--from", "-:0", "--to", "-:1", "--level", "4"},
      {"embed", "--level", "5"},
      {"measures", "--depth", "5"},
      {"--spec", "hexagasket", "spec"},
  };
  const fs::path root = fs::temp_directory_path() / "pcfgeo_acceptance_determinism";
  fs::remove_all(root);
  int files = 0;
  for (std::size_t c = 0; c < commands.size(); ++c) {
    std::vector<std::string> stdout_text;
    for (const char* run : {"a", "b"}) {
      std::vector<std::string> args = {"--out", (root / run / std::to_string(c)).string()};
      args.insert(args.end(), commands[c].begin(), commands[c].end());
      std::ostringstream out, err;
      o.require(cli::run(args, out, err) == 0, commands[c].back() + " exit code");
      std::ostringstream plain, plain_err;
      cli::run(commands[c], plain, plain_err);
      stdout_text.push_back(plain.str());
    }
    o.require(stdout_text[0] == stdout_text[1], "stdout of command " + std::to_string(c));
    for (const auto& entry : fs::directory_iterator(root / "a" / std::to_string(c))) {
      const fs::path other = root / "b" / std::to_string(c) / entry.path().filename();
      o.require(read_file(entry.path()) == read_file(other), entry.path().filename().string());
      ++files;
    }
  }
  fs::remove_all(root);
  o.detail << (o.pass ? "" : "; ") << commands.size() << " commands, " << files << " files identical across runs";
  return o;
}

int speedup() {
  const MetricContext ctx = context("gasket:2", 10);
  std::vector<VertexId> sources(ctx.graph().vertex_count(3));
  std::iota(sources.begin(), sources.end(), 0);
  auto start = Clock::now();
  const Matrix one = distance_matrix(ctx, 10, sources, 1);
  const double t1 = seconds_since(start);
  start = Clock::now();
  const Matrix four = distance_matrix(ctx, 10, sources, 4);
  const double t4 = seconds_since(start);
  const bool identical = std::memcmp(one.data(), four.data(), sizeof(double) * one.size()) == 0;
  const unsigned hw = std::thread::hardware_concurrency();
  const double ratio = t1 / t4;
  std::ostringstream detail;
  detail << sources.size() << "x" << sources.size() << " matrix at level 10, 1 thread " << t1 << " s, 4 threads " << t4
         << " s, speedup " << ratio << ", bitwise identical " << (identical ? "yes" : "no") << ", hardware threads "
         << hw;
  if (!identical) {
    std::cout << "[FAIL] 9b parallel distance matrix: " << detail.str() << '\n';
    return 1;
  }
  if (hw < 4) {
    std::cout << "[SKIP] 9b parallel distance matrix: fewer than 4 hardware threads, speedup not measurable; "
              << detail.str() << '\n';
    return 77;
  }
  const bool pass = ratio >= 3.0;
  std::cout << (pass ? "[PASS]" : "[FAIL]") << " 9b parallel distance matrix: " << detail.str() << '\n';
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1 && std::strcmp(argv[1], "--speedup") == 0) return speedup();

  // Performance first so the peak RSS is not inflated by other criteria.
  Outcome perf = performance();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 reference values", reference_values},
      {"2 regularity", regularity},
      {"3 measure additivity", additivity},
      {"4 discrete-geodesic laws", geodesic_laws},
      {"5 Lipschitz profiles and feasible certificates", lipschitz_certificates},
      {"6 intrinsic vs geodesic band", intrinsic_band},
      {"7 separation constants", separation},
      {"8 convergence diagnostic", convergence_check},
      {"9 level-12 profile performance", [&] { return std::move(perf); }},
      {"10 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << ": " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
  return failures == 0 ? 0 : 1;
}
