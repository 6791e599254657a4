#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "pcfgeo/error.hpp"
#include "pcfgeo/format.hpp"
#include "pcfgeo/generators.hpp"
#include "pcfgeo/intrinsic.hpp"
#include "pcfgeo/metrics.hpp"
#include "pcfgeo/spec_io.hpp"

namespace pcfgeo::cli {

namespace {

struct Config {
  std::string spec = "gasket:2";
  std::string out_dir;
  std::string tuple = "default";
  std::string from;
  std::string to;
  int level = 0;
  int nmax = 0;
  int depth = -1;
  int budget = IntrinsicOptions{}.budget;
  double cap = -1.0;
  double rtol = 0.0;
};

class Output {
 public:
  Output(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  void emit(const std::string& name, const std::string& content) {
    if (dir_.empty()) {
      out_ << content;
      return;
    }
    const std::string path = (std::filesystem::path(dir_) / name).string();
    write_text_file(path, content);
    out_ << "wrote " << path << '\n';
  }

 private:
  std::string dir_;
  std::ostream& out_;
};

std::string join(const Vector& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + format_double(v[i]);
  return s;
}

std::string ref_text(const LevelGraph& graph, VertexId id) {
  const VertexRef ref = graph.ref_of(id);
  return (ref.word.empty() ? std::string("-") : format_word(ref.word)) + "," + std::to_string(ref.label);
}

// "default", or boundary vectors separated by ';' with comma separated values.
HarmonicTuple parse_tuple(const std::string& text, const HarmonicStructure& hs) {
  if (text == "default") return default_tuple(hs);
  HarmonicTuple h;
  std::stringstream vectors(text);
  std::string item;
  while (std::getline(vectors, item, ';')) {
    std::vector<double> values;
    std::stringstream entries(item);
    std::string entry;
    while (std::getline(entries, entry, ',')) {
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(entry, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != entry.size()) {
        throw Error(ErrorKind::invalid_argument, "bad tuple entry '" + entry + "'");
      }
      values.push_back(value);
    }
    if (static_cast<int>(values.size()) != hs.boundary_count()) {
      throw Error(ErrorKind::invalid_argument, "tuple vectors need " + std::to_string(hs.boundary_count()) + " values");
    }
    h.components.push_back(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  if (h.size() == 0) throw Error(ErrorKind::invalid_argument, "empty tuple");
  return h;
}

int cmd_check(const Config& cfg, Output& output) {
  const SpecDocument doc = resolve_spec(cfg.spec);
  const HarmonicStructure hs = make_structure(doc);
  const FractalSpec& spec = hs.spec();
  std::ostringstream report;
  report << "spec " << spec.name << " letters " << spec.letter_count << " boundary " << spec.boundary_count << '\n';
  report << "r " << join(Eigen::Map<const Vector>(hs.r().data(), static_cast<Eigen::Index>(hs.r().size()))) << '\n';
  bool ok = true;
  auto line = [&](const ConditionResult& c) {
    ok = ok && c.pass;
    report << c.name << ' ' << (c.pass ? "pass" : "FAIL") << ' ' << format_double(c.value);
    if (!c.witness.empty()) report << ' ' << c.witness;
    report << '\n';
  };
  for (const ConditionResult& c : check_dirichlet_matrix(hs.D()).items) line(c);
  line({"regularity", hs.regularity_residual() <= kRegularityTolerance, hs.regularity_residual(), ""});
  for (const ConditionResult& c : check_b_conditions(hs).items) line(c);
  for (int a = 0; a < hs.boundary_count(); ++a) {
    const FixedPointData& fp = hs.fixed_point(a);
    report << "fixed p_" << a << " letter " << fp.letter << " v " << join(fp.v) << " Dv " << join(hs.D() * fp.v)
           << " u " << join(fp.u) << '\n';
  }
  report << (ok ? "result pass\n" : "result FAIL\n");
  output.emit("check.txt", report.str());
  return ok ? kExitOk : kExitFailed;
}

int cmd_graph(const Config& cfg, Output& output) {
  const SpecDocument doc = resolve_spec(cfg.spec);
  const LevelGraph graph = build_level(doc.spec, cfg.level);
  std::ostringstream cells;
  cells << "word";
  for (int a = 0; a < doc.spec.boundary_count; ++a) cells << ",v" << a;
  cells << '\n';
  for (std::size_t c = 0; c < graph.cell_count(cfg.level); ++c) {
    const Word w = word_from_index(c, cfg.level, doc.spec.letter_count);
    cells << (w.empty() ? std::string("-") : format_word(w));
    for (VertexId id : graph.cell(cfg.level, c)) cells << ',' << id;
    cells << '\n';
  }
  std::ostringstream vertices;
  vertices << "id,word,label,birth_level\n";
  for (std::size_t id = 0; id < graph.vertex_count(); ++id) {
    const auto v = static_cast<VertexId>(id);
    vertices << id << ',' << ref_text(graph, v) << ',' << graph.birth_level(v) << '\n';
  }
  std::ostringstream summary;
  summary << "level " << cfg.level << " vertices " << graph.vertex_count() << " cells " << graph.cell_count(cfg.level)
          << '\n';
  output.emit("graph_summary.txt", summary.str());
  output.emit("graph_vertices.csv", vertices.str());
  output.emit("graph_cells.csv", cells.str());
  return kExitOk;
}


MetricContext make_context(const Config& cfg, int level) {
  const SpecDocument doc = resolve_spec(cfg.spec);
  HarmonicStructure hs = make_structure(doc);
  HarmonicTuple h = parse_tuple(cfg.tuple, hs);
  return MetricContext(std::move(hs), std::move(h), level);
}

int cmd_geodesic(const Config& cfg, Output& output) {
  const MetricContext ctx = make_context(cfg, cfg.nmax);
  const VertexRef x = parse_vertex_ref(cfg.from);
  const VertexRef y = parse_vertex_ref(cfg.to);
  const ConvergenceHistory history = geodesic_converge(ctx, x, y, cfg.nmax, cfg.rtol);
  const GeodesicResult last = discrete_geodesic(ctx, x, y, history.levels.back());
  std::ostringstream summary;
  summary << "{\n"
          << "  \"from\": \"" << format_vertex_ref(minimal_ref(ctx.hs().spec(), x)) << "\",\n"
          << "  \"to\": \"" << format_vertex_ref(minimal_ref(ctx.hs().spec(), y)) << "\",\n"
          << "  \"level\": " << last.level << ",\n"
          << "  \"estimate\": " << format_double(history.estimate) << ",\n"
          << "  \"relative_gap\": " << format_double(history.relative_gap) << ",\n"
          << "  \"extrapolated\": " << format_double(history.extrapolated) << ",\n"
          << "  \"monotone\": " << (history.monotone ? "true" : "false") << ",\n"
          << "  \"path_length\": " << last.path.size() << "\n"
          << "}\n";
  std::ostringstream path;
  path << "step,id,word,label\n";
  for (std::size_t i = 0; i < last.path.size(); ++i) {
    path << i << ',' << last.path[i] << ',' << ref_text(ctx.graph(), last.path[i]) << '\n';
  }
  output.emit("geodesic.json", summary.str());
  output.emit("geodesic_history.csv", convergence_csv(history));
  output.emit("geodesic_path.csv", path.str());
  return kExitOk;
}

int cmd_profile(const Config& cfg, Output& output) {
  const MetricContext ctx = make_context(cfg, cfg.level);
  const std::vector<double> phi = geodesic_profile(ctx, parse_vertex_ref(cfg.from), cfg.level);
  std::ostringstream csv;
  csv << "id,word,label,distance\n";
  for (std::size_t id = 0; id < phi.size(); ++id) {
    csv << id << ',' << ref_text(ctx.graph(), static_cast<VertexId>(id)) << ',' << format_double(phi[id]) << '\n';
  }
  output.emit("profile.csv", csv.str());
  return lipschitz_excess(ctx, cfg.level, phi) <= 1e-12 ? kExitOk : kExitFailed;
}

int cmd_certify(const Config& cfg, Output& output) {
  const MetricContext ctx = make_context(cfg, cfg.level);
  const double cap = cfg.cap < 0.0 ? default_cap(ctx) : cfg.cap;
  const Certificate cert =
      intrinsic_certificate(ctx, parse_vertex_ref(cfg.from), parse_vertex_ref(cfg.to), cfg.level, cap);
  output.emit("certificate.json", certificate_json(cert));
  output.emit("slack.csv", slack_table_csv(cert.slack));
  return cert.feasible ? kExitOk : kExitFailed;
}

int cmd_intrinsic(const Config& cfg, Output& output) {
  const MetricContext ctx = make_context(cfg, cfg.level);
  IntrinsicOptions options;
  options.depth = cfg.depth;
  options.budget = cfg.budget;
  options.cap = cfg.cap;
  const IntrinsicResult r =
      intrinsic_estimate(ctx, parse_vertex_ref(cfg.from), parse_vertex_ref(cfg.to), cfg.level, options);
  std::ostringstream summary;
  summary << "{\n"
          << "  \"level\": " << cfg.level << ",\n"
          << "  \"depth\": " << r.depth << ",\n"
          << "  \"value\": " << format_double(r.value) << ",\n"
          << "  \"certificate_value\": " << format_double(r.certificate_value) << ",\n"
          << "  \"min_slack\": " << format_double(r.min_slack) << ",\n"
          << "  \"newton_steps\": " << r.newton_steps << ",\n"
          << "  \"cg_iterations\": " << r.cg_iterations << ",\n"
          << "  \"converged\": " << (r.converged ? "true" : "false") << "\n"
          << "}\n";
  output.emit("intrinsic.json", summary.str());
  output.emit("intrinsic_history.csv", intrinsic_history_csv(r));
  return kExitOk;
}

int cmd_embed(const Config& cfg, Output& output) {
  const MetricContext ctx = make_context(cfg, cfg.level);
  output.emit("embedding.csv", embedding_csv(ctx, cfg.level));
  return kExitOk;
}

int cmd_measures(const Config& cfg, Output& output) {
  if (cfg.depth < 0) throw Error(ErrorKind::invalid_argument, "--depth must be nonnegative");
  const SpecDocument doc = resolve_spec(cfg.spec);
  const HarmonicStructure hs = make_structure(doc);
  const HarmonicTuple h = parse_tuple(cfg.tuple, hs);
  if (h.degenerate()) std::cerr << "warning: every tuple component is constant, all measures vanish\n";
  output.emit("measures.csv", cell_table_csv(cell_measure_table(hs, h, cfg.depth)));
  return kExitOk;
}

int cmd_spec(const Config& cfg, Output& output) {
  SpecDocument doc = resolve_spec(cfg.spec);
  const HarmonicStructure hs = make_structure(doc);
  doc.D = hs.D();
  doc.r = hs.r();
  output.emit("spec.json", spec_to_json(doc));
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Geodesic and intrinsic distances on p.c.f. self-similar fractals", "pcfgeo"};
  app.require_subcommand(1);
  Config cfg;
  app.add_option("--spec", cfg.spec, "builtin (gasket:L, hexagasket, nonagasket) or spec file")->capture_default_str();
  app.add_option("--out", cfg.out_dir, "write outputs into this directory instead of stdout");
  app.add_option("--tuple", cfg.tuple, "'default' or boundary vectors like '1,0,0;0,1,-1'")->capture_default_str();

  auto* check = app.add_subcommand("check", "(D1)-(D3), regularity and (B1)-(B4)");
  auto* graph = app.add_subcommand("graph", "vertex hierarchy and cells of V_n");
  graph->add_option("--level", cfg.level)->required()->check(CLI::NonNegativeNumber);
  auto* geodesic = app.add_subcommand("geodesic", "convergence of discrete geodesic distances");
  geodesic->add_option("--from", cfg.from)->required();
  geodesic->add_option("--to", cfg.to)->required();
  geodesic->add_option("--nmax", cfg.nmax)->required()->check(CLI::NonNegativeNumber);
  geodesic->add_option("--rtol", cfg.rtol, "stop once the relative gap is below this");
  auto* profile = app.add_subcommand("profile", "single-source geodesic profile on V_n");
  profile->add_option("--from", cfg.from)->required();
  profile->add_option("--level", cfg.level)->required()->check(CLI::NonNegativeNumber);
  auto* certify = app.add_subcommand("certify", "capped geodesic profile with its domination table");
  certify->add_option("--from", cfg.from)->required();
  certify->add_option("--to", cfg.to)->required();
  certify->add_option("--level", cfg.level)->required()->check(CLI::NonNegativeNumber);
  certify->add_option("--cap", cfg.cap, "cap M (default from boundary resistances)")->check(CLI::NonNegativeNumber);
  auto* intrinsic = app.add_subcommand("intrinsic", "barrier estimate of the intrinsic distance");
  intrinsic->add_option("--from", cfg.from)->required();
  intrinsic->add_option("--to", cfg.to)->required();
  intrinsic->add_option("--level", cfg.level)->required()->check(CLI::NonNegativeNumber);
  intrinsic->add_option("--depth", cfg.depth, "constraint depth (default: level)")->check(CLI::NonNegativeNumber);
  intrinsic->add_option("--budget", cfg.budget, "Newton step budget")->capture_default_str()->check(CLI::NonNegativeNumber);
  intrinsic->add_option("--cap", cfg.cap, "cap of the starting certificate")->check(CLI::NonNegativeNumber);
  auto* embed = app.add_subcommand("embed", "harmonic coordinates of V_n");
  embed->add_option("--level", cfg.level)->required()->check(CLI::NonNegativeNumber);
  auto* measures = app.add_subcommand("measures", "energy measures of cells");
  measures->add_option("--depth", cfg.depth)->required()->check(CLI::NonNegativeNumber);
  measures->add_option("--tuple", cfg.tuple, "'default' or boundary vectors");
  auto* spec = app.add_subcommand("spec", "export the resolved spec with D and r");
  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    Output output(cfg.out_dir, out);
    if (*check) return cmd_check(cfg, output);
    if (*graph) return cmd_graph(cfg, output);
    if (*geodesic) return cmd_geodesic(cfg, output);
    if (*profile) return cmd_profile(cfg, output);
    if (*certify) return cmd_certify(cfg, output);
    if (*intrinsic) return cmd_intrinsic(cfg, output);
    if (*embed) return cmd_embed(cfg, output);
    if (*measures) return cmd_measures(cfg, output);
    if (*spec) return cmd_spec(cfg, output);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::invalid_parameter:
      case ErrorKind::invalid_argument:
      case ErrorKind::validation:
        return kExitUsage;
      default:
        return kExitFailed;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
  return kExitUsage;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pcfgeo::cli
