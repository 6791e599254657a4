#include "pcfgeo/spec_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcfgeo/error.hpp"
#include "pcfgeo/generators.hpp"

namespace pcfgeo {

namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& field, const std::string& why) {
  throw Error(ErrorKind::validation, "field \"" + field + "\": " + why);
}

int read_int(const json& node, const std::string& field) {
  if (!node.is_number_integer()) reject(field, "expected an integer");
  const auto value = node.get<long long>();
  if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
    reject(field, "integer out of range");
  }
  return static_cast<int>(value);
}

double read_double(const json& node, const std::string& field) {
  if (!node.is_number()) reject(field, "expected a number");
  return node.get<double>();
}

const json& member(const json& root, const char* field) {
  const auto it = root.find(field);
  if (it == root.end()) reject(field, "missing");
  return *it;
}

}  // namespace

SpecDocument parse_spec_json(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the line and column in its message.
    throw Error(ErrorKind::validation, std::string("spec is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw Error(ErrorKind::validation, "spec must be a JSON object");

  SpecDocument doc;
  FractalSpec& spec = doc.spec;
  const json& name = member(root, "name");
  if (!name.is_string()) reject("name", "expected a string");
  spec.name = name.get<std::string>();
  spec.letter_count = read_int(member(root, "letters"), "letters");
  spec.boundary_count = read_int(member(root, "boundary"), "boundary");

  const json& fixed = member(root, "fixed_letters");
  if (!fixed.is_array()) reject("fixed_letters", "expected an array");
  for (std::size_t a = 0; a < fixed.size(); ++a) {
    spec.fixed_letter.push_back(read_int(fixed[a], "fixed_letters[" + std::to_string(a) + "]"));
  }

  const json& glue = member(root, "glue");
  if (!glue.is_array()) reject("glue", "expected an array");
  for (std::size_t e = 0; e < glue.size(); ++e) {
    const std::string field = "glue[" + std::to_string(e) + "]";
    if (!glue[e].is_array() || glue[e].size() != 4) reject(field, "expected a quadruple [i, a, j, b]");
    spec.glue.push_back({read_int(glue[e][0], field), read_int(glue[e][1], field),
                         read_int(glue[e][2], field), read_int(glue[e][3], field)});
  }
  validate(spec);

  const int q = spec.boundary_count;
  if (const auto it = root.find("D"); it != root.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != q) reject("D", "expected " + std::to_string(q) + " rows");
    Matrix D(q, q);
    for (int a = 0; a < q; ++a) {
      const json& row = (*it)[a];
      const std::string field = "D[" + std::to_string(a) + "]";
      if (!row.is_array() || static_cast<int>(row.size()) != q) reject(field, "expected " + std::to_string(q) + " entries");
      for (int b = 0; b < q; ++b) D(a, b) = read_double(row[b], field);
    }
    doc.D = D;
  }
  if (const auto it = root.find("r"); it != root.end()) {
    if (!it->is_array() || static_cast<int>(it->size()) != spec.letter_count) {
      reject("r", "expected " + std::to_string(spec.letter_count) + " weights");
    }
    std::vector<double> r;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const double ri = read_double((*it)[i], "r[" + std::to_string(i) + "]");
      if (!(ri > 0.0 && ri < 1.0)) reject("r[" + std::to_string(i) + "]", "must lie in (0, 1)");
      r.push_back(ri);
    }
    doc.r = std::move(r);
  }
  return doc;
}

SpecDocument load_spec_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::validation, "cannot read spec file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_spec_json(text.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string spec_to_json(const SpecDocument& doc) {
  const FractalSpec& spec = doc.spec;
  json root = json::object();
  root["name"] = spec.name;
  root["letters"] = spec.letter_count;
  root["boundary"] = spec.boundary_count;
  root["fixed_letters"] = spec.fixed_letter;
  json glue = json::array();
  for (const GlueRule& g : spec.glue) glue.push_back({g.letter_a, g.label_a, g.letter_b, g.label_b});
  root["glue"] = glue;
  if (doc.D) {
    json rows = json::array();
    for (Eigen::Index a = 0; a < doc.D->rows(); ++a) {
      json row = json::array();
      for (Eigen::Index b = 0; b < doc.D->cols(); ++b) row.push_back((*doc.D)(a, b));
      rows.push_back(row);
    }
    root["D"] = rows;
  }
  if (doc.r) root["r"] = *doc.r;
  // nlohmann prints doubles in shortest round-trip form, so reloading is exact.
  return root.dump(2) + "\n";
}

SpecDocument resolve_spec(const std::string& source) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(source, ec)) return load_spec_file(source);
  SpecDocument doc;
  doc.spec = builtin_spec(source);
  return doc;
}

Matrix complete_graph_dirichlet(int q) {
  return Matrix::Ones(q, q) - static_cast<double>(q) * Matrix::Identity(q, q);
}

HarmonicStructure make_structure(const SpecDocument& doc) {
  const Matrix D = doc.D ? *doc.D : complete_graph_dirichlet(doc.spec.boundary_count);
  std::vector<double> r;
  if (doc.r) {
    r = *doc.r;
  } else {
    r.assign(static_cast<std::size_t>(doc.spec.letter_count), solve_equal_renormalization(doc.spec, D));
  }
  return HarmonicStructure::create(doc.spec, D, std::move(r));
}

}  // namespace pcfgeo
