#include "pcfgeo/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <sstream>

#include "pcfgeo/error.hpp"

namespace pcfgeo {

namespace {

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

std::string entry_name(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

void require_square_symmetric(const Matrix& D) {
  if (D.rows() != D.cols() || D.rows() < 2) {
    throw Error(ErrorKind::invalid_argument, "D must be a square matrix of size at least 2");
  }
  const double scale = std::max(1.0, max_abs(D));
  if (max_abs(D - D.transpose()) > 1e-12 * scale) {
    throw Error(ErrorKind::invalid_argument, "D is not symmetric");
  }
}

std::vector<VertexId> boundary_ids(int q) {
  std::vector<VertexId> ids(static_cast<std::size_t>(q));
  for (int a = 0; a < q; ++a) ids[a] = static_cast<VertexId>(a);
  return ids;
}

}  // namespace

bool ConditionReport::all_pass() const {
  return std::all_of(items.begin(), items.end(), [](const ConditionResult& c) { return c.pass; });
}

const ConditionResult& ConditionReport::at(const std::string& name) const {
  for (const ConditionResult& c : items) {
    if (c.name == name) return c;
  }
  throw Error(ErrorKind::invalid_argument, "no condition named " + name);
}

ConditionReport check_dirichlet_matrix(const Matrix& D) {
  require_square_symmetric(D);
  const double scale = std::max(1.0, max_abs(D));
  const double tol = 1e-12 * scale;
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(D);
  const Vector& lambda = eig.eigenvalues();

  ConditionReport report;
  ConditionResult d1{"D1", lambda.maxCoeff() <= tol, lambda.maxCoeff(), ""};
  if (!d1.pass) d1.witness = "positive eigenvalue " + std::to_string(lambda.maxCoeff());
  report.items.push_back(d1);

  const auto kernel_dim = (lambda.array().abs() <= tol).count();
  const double row_sum = (D * Vector::Ones(D.rows())).cwiseAbs().maxCoeff();
  ConditionResult d2{"D2", kernel_dim == 1 && row_sum <= tol, row_sum, ""};
  if (!d2.pass) {
    d2.witness = "kernel dimension " + std::to_string(kernel_dim) + ", max |row sum| " +
                 std::to_string(row_sum);
  }
  report.items.push_back(d2);

  ConditionResult d3{"D3", true, 0.0, ""};
  double min_off = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < D.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < D.cols(); ++j) {
      min_off = std::min(min_off, D(i, j));
      if (D(i, j) < 0.0 && d3.pass) {
        d3.pass = false;
        d3.witness = "negative entry at " + entry_name(i, j);
      }
    }
  }
  d3.value = min_off;
  report.items.push_back(d3);
  return report;
}

SparseMatrix assemble_discrete_form(const LevelGraph& graph, int n, const Matrix& D,
                                    std::span<const double> r) {
  const FractalSpec& spec = graph.spec();
  const int k = spec.letter_count;
  const int q = spec.boundary_count;
  if (n < 0 || n > graph.level()) throw Error(ErrorKind::invalid_argument, "level outside the graph");
  if (static_cast<int>(r.size()) != k) throw Error(ErrorKind::invalid_argument, "r needs one weight per letter");

  // 1 / r_w for every word of length n, in index order.
  std::vector<double> inv_weight{1.0};
  for (int m = 1; m <= n; ++m) {
    std::vector<double> next(inv_weight.size() * static_cast<std::size_t>(k));
    for (std::size_t u = 0; u < inv_weight.size(); ++u) {
      for (int i = 0; i < k; ++i) next[u * k + i] = inv_weight[u] / r[i];
    }
    inv_weight = std::move(next);
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(inv_weight.size() * static_cast<std::size_t>(q * q));
  for (std::size_t c = 0; c < inv_weight.size(); ++c) {
    const auto ids = graph.cell(n, c);
    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q; ++b) {
        const double value = -D(a, b) * inv_weight[c];
        if (value != 0.0) triplets.emplace_back(ids[a], ids[b], value);
      }
    }
  }
  const auto size = static_cast<Eigen::Index>(graph.vertex_count(n));
  SparseMatrix form(size, size);
  form.setFromTriplets(triplets.begin(), triplets.end());
  return form;
}

TracedForm trace_form(const SparseMatrix& form, std::span<const VertexId> keep) {
  const Eigen::Index size = form.rows();
  std::vector<Eigen::Index> position(static_cast<std::size_t>(size), -1);
  TracedForm t;
  t.size_ = size;
  t.keep_.assign(keep.begin(), keep.end());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    if (keep[a] >= size || position[keep[a]] >= 0) {
      throw Error(ErrorKind::invalid_argument, "keep set has an invalid or repeated vertex");
    }
    position[keep[a]] = static_cast<Eigen::Index>(a);
  }
  for (Eigen::Index v = 0; v < size; ++v) {
    if (position[v] < 0) {
      position[v] = -2 - static_cast<Eigen::Index>(t.eliminated_.size());
      t.eliminated_.push_back(static_cast<VertexId>(v));
    }
  }
  const auto nk = static_cast<Eigen::Index>(t.keep_.size());
  const auto ne = static_cast<Eigen::Index>(t.eliminated_.size());

  Matrix kk = Matrix::Zero(nk, nk);
  Matrix ek = Matrix::Zero(ne, nk);
  std::vector<Eigen::Triplet<double>> ee;
  for (Eigen::Index col = 0; col < form.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(form, col); it; ++it) {
      const Eigen::Index pr = position[it.row()];
      const Eigen::Index pc = position[it.col()];
      if (pr >= 0 && pc >= 0) kk(pr, pc) += it.value();
      else if (pr < 0 && pc >= 0) ek(-2 - pr, pc) += it.value();
      else if (pr < 0 && pc < 0) ee.emplace_back(-2 - pr, -2 - pc, it.value());
    }
  }
  if (ne == 0) {
    t.traced_ = kk;
    t.elimination_ = Matrix::Zero(0, nk);
    return t;
  }
  // Explicit zero diagonal keeps isolated eliminated vertices in the pattern.
  for (Eigen::Index e = 0; e < ne; ++e) ee.emplace_back(e, e, 0.0);
  SparseMatrix block(ne, ne);
  block.setFromTriplets(ee.begin(), ee.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(block);
  const double scale = std::max(1.0, block.coeffs().cwiseAbs().maxCoeff());
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-13 * scale) {
    throw Error(ErrorKind::degenerate_form,
                "eliminated block of the trace is singular (" + std::to_string(ne) + " vertices)");
  }
  t.elimination_ = -ldlt.solve(ek);
  t.traced_ = kk + ek.transpose() * t.elimination_;
  t.traced_ = 0.5 * (t.traced_ + t.traced_.transpose()).eval();
  return t;
}

Vector TracedForm::extend(const Vector& keep_values) const {
  if (keep_values.size() != static_cast<Eigen::Index>(keep_.size())) {
    throw Error(ErrorKind::invalid_argument, "extend: wrong number of kept values");
  }
  Vector full(size_);
  for (std::size_t a = 0; a < keep_.size(); ++a) full[keep_[a]] = keep_values[static_cast<Eigen::Index>(a)];
  if (!eliminated_.empty()) {
    const Vector inner = elimination_ * keep_values;
    for (std::size_t e = 0; e < eliminated_.size(); ++e) full[eliminated_[e]] = inner[static_cast<Eigen::Index>(e)];
  }
  return full;
}

double check_regularity(const FractalSpec& spec, const Matrix& D, std::span<const double> r) {
  for (double ri : r) {
    if (!(ri > 0.0 && ri < 1.0)) throw Error(ErrorKind::invalid_argument, "r_i must lie in (0,1)");
  }
  const LevelGraph level1 = build_level(spec, 1);
  const TracedForm traced = trace_form(assemble_discrete_form(level1, 1, D, r),
                                       boundary_ids(spec.boundary_count));
  return max_abs(traced.matrix() + D);
}

double solve_equal_renormalization(const FractalSpec& spec, const Matrix& D) {
  const LevelGraph level1 = build_level(spec, 1);
  const std::vector<double> ones(static_cast<std::size_t>(spec.letter_count), 1.0);
  const TracedForm traced = trace_form(assemble_discrete_form(level1, 1, D, ones),
                                       boundary_ids(spec.boundary_count));
  const Matrix energy0 = -D;
  const double c = (traced.matrix().array() * energy0.array()).sum() / energy0.squaredNorm();
  const double deviation = max_abs(traced.matrix() - c * energy0) / max_abs(c * energy0);
  if (!(deviation <= 1e-9)) {
    std::ostringstream msg;
    msg << "trace of the unit-weight level-1 form is not proportional to E^(0) (relative deviation "
        << deviation << ")";
    throw Error(ErrorKind::no_equal_weight_structure, msg.str());
  }
  return c;
}

std::vector<Matrix> extension_matrices(const FractalSpec& spec, const Matrix& D,
                                       std::span<const double> r) {
  const int q = spec.boundary_count;
  const LevelGraph level1 = build_level(spec, 1);
  const TracedForm traced = trace_form(assemble_discrete_form(level1, 1, D, r), boundary_ids(q));
  std::vector<Vector> unit_extensions;
  for (int c = 0; c < q; ++c) unit_extensions.push_back(traced.extend(Vector::Unit(q, c)));

  std::vector<Matrix> A(static_cast<std::size_t>(spec.letter_count), Matrix(q, q));
  for (int i = 0; i < spec.letter_count; ++i) {
    const auto ids = level1.cell(1, static_cast<std::uint64_t>(i));
    for (int b = 0; b < q; ++b) {
      for (int c = 0; c < q; ++c) A[i](b, c) = unit_extensions[c][ids[b]];
    }
  }
  return A;
}

FixedPointData fixed_point_eigendata(const Matrix& D, const Matrix& A, double r, int letter,
                                     int label) {
  const Eigen::Index q = A.rows();
  // Row p of A is e_p, so eigenvectors vanishing at p are eigenvectors of
  // the matrix with row and column p removed.
  std::vector<Eigen::Index> rest;
  for (Eigen::Index a = 0; a < q; ++a) {
    if (a != label) rest.push_back(a);
  }
  const auto d = static_cast<Eigen::Index>(rest.size());
  Matrix B(d, d);
  for (Eigen::Index a = 0; a < d; ++a) {
    for (Eigen::Index b = 0; b < d; ++b) B(a, b) = A(rest[a], rest[b]);
  }

  const double shift = r * (1.0 + 1e-7);
  const Eigen::FullPivLU<Matrix> lu(B - shift * Matrix::Identity(d, d));
  Vector x = Vector::Ones(d).normalized();
  if (lu.rank() < d) {
    x = lu.kernel().col(0).normalized();
  } else {
    for (int it = 0; it < 100; ++it) {
      Vector y = lu.solve(x).normalized();
      if (y.sum() < 0.0) y = -y;
      const bool done = (y - x).norm() < 1e-15;
      x = std::move(y);
      if (done) break;
    }
  }
  if (x.sum() < 0.0) x = -x;
  const double residual = (B * x - r * x).norm();
  if (!(residual <= 1e-8 * std::max(1.0, B.norm()))) {
    std::ostringstream msg;
    msg << "eigenvalue r = " << r << " of A_" << letter << " not found (residual " << residual << ")";
    throw Error(ErrorKind::broken_structure, msg.str());
  }
  if (x.minCoeff() < -1e-12) {
    throw Error(ErrorKind::broken_structure,
                "eigenvector of A_" + std::to_string(letter) + " for r_i is not nonnegative");
  }

  FixedPointData fp;
  fp.letter = letter;
  fp.label = label;
  fp.r = r;
  fp.u = D.col(label);
  fp.v = Vector::Zero(q);
  for (Eigen::Index a = 0; a < d; ++a) fp.v[rest[a]] = std::max(0.0, x[a]);
  const double pairing = fp.u.dot(fp.v);
  if (!(pairing > 0.0)) {
    throw Error(ErrorKind::broken_structure,
                "(u_i, v_i) is not positive for letter " + std::to_string(letter));
  }
  fp.v /= pairing;
  fp.eigen_residual = (A * fp.v - r * fp.v).norm();
  fp.dual_residual = (A.transpose() * fp.u - r * fp.u).norm();
  return fp;
}

HarmonicStructure HarmonicStructure::create(FractalSpec spec, Matrix D, std::vector<double> r) {
  validate(spec);
  const int q = spec.boundary_count;
  if (D.rows() != q || D.cols() != q) {
    throw Error(ErrorKind::invalid_argument, "D must be " + std::to_string(q) + "x" + std::to_string(q));
  }
  const ConditionReport dirichlet = check_dirichlet_matrix(D);
  for (const ConditionResult& c : dirichlet.items) {
    if (!c.pass) throw Error(ErrorKind::invalid_argument, "D fails " + c.name + ": " + c.witness);
  }
  if (static_cast<int>(r.size()) != spec.letter_count) {
    throw Error(ErrorKind::invalid_argument, "r needs " + std::to_string(spec.letter_count) + " entries");
  }
  HarmonicStructure hs;
  hs.regularity_residual_ = check_regularity(spec, D, r);
  if (!(hs.regularity_residual_ <= kRegularityTolerance)) {
    std::ostringstream msg;
    msg << "(D, r) is not a regular harmonic structure (residual " << hs.regularity_residual_ << ")";
    throw Error(ErrorKind::invalid_argument, msg.str());
  }
  hs.A_ = extension_matrices(spec, D, r);
  for (int a = 0; a < q; ++a) {
    const int letter = spec.fixed_letter[a];
    hs.fixed_.push_back(fixed_point_eigendata(D, hs.A_[letter], r[letter], letter, a));
  }
  hs.spec_ = std::move(spec);
  hs.D_ = std::move(D);
  hs.r_ = std::move(r);
  return hs;
}

double HarmonicStructure::weight(const Word& w) const {
  double product = 1.0;
  for (Letter l : w) product *= r_.at(l);
  return product;
}

Vector HarmonicStructure::restrict_to_cell(const Word& w, Vector alpha) const {
  for (Letter l : w) alpha = A_.at(l) * alpha;
  return alpha;
}

const FixedPointData& HarmonicStructure::fixed_point_of_letter(int letter) const {
  for (const FixedPointData& fp : fixed_) {
    if (fp.letter == letter) return fp;
  }
  throw Error(ErrorKind::invalid_argument, "letter " + std::to_string(letter) + " fixes no boundary point");
}

ConditionReport check_b_conditions(const HarmonicStructure& hs) {
  const FractalSpec& spec = hs.spec();
  const int q = spec.boundary_count;
  ConditionReport report;
  report.items.push_back({"B1", q == 3, static_cast<double>(q),
                          q == 3 ? "" : "#V_0 = " + std::to_string(q)});

  // K \ {p} connected, approximated by the level-3 cell graph minus p.
  {
    const int level = 3;
    const LevelGraph g = build_level(spec, level);
    ConditionResult b2{"B2", true, 0.0, ""};
    const auto nv = g.vertex_count();
    std::vector<std::vector<VertexId>> adjacency(nv);
    const auto cells = g.cells(level);
    for (std::size_t c = 0; c < cells.size(); c += static_cast<std::size_t>(q)) {
      for (int a = 0; a < q; ++a) {
        for (int b = 0; b < q; ++b) {
          if (a != b) adjacency[cells[c + a]].push_back(cells[c + b]);
        }
      }
    }
    for (VertexId removed = 0; removed < static_cast<VertexId>(q) && b2.pass; ++removed) {
      std::vector<char> seen(nv, 0);
      seen[removed] = 1;
      const VertexId start = removed == 0 ? 1 : 0;
      std::queue<VertexId> pending;
      pending.push(start);
      seen[start] = 1;
      std::size_t reached = 1;
      while (!pending.empty()) {
        const VertexId v = pending.front();
        pending.pop();
        for (VertexId w : adjacency[v]) {
          if (!seen[w]) {
            seen[w] = 1;
            ++reached;
            pending.push(w);
          }
        }
      }
      if (reached + 1 != nv) {
        b2.pass = false;
        b2.value = static_cast<double>(removed);
        b2.witness = "removing boundary vertex " + std::to_string(removed) + " disconnects V_3";
      }
    }
    report.items.push_back(b2);
  }

  {
    ConditionResult b3{"B3", q == 3, 0.0, q == 3 ? "" : "#S_0 = " + std::to_string(q)};
    double worst = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < q; ++a) {
      const Vector dv = hs.D() * hs.fixed_point(a).v;
      for (int b = 0; b < q; ++b) {
        if (b == a) continue;
        worst = std::max(worst, dv[b]);
        if (!(dv[b] < 0.0) && b3.pass) {
          b3.pass = false;
          b3.witness = "Dv_" + std::to_string(spec.fixed_letter[a]) + "(p_" + std::to_string(b) +
                       ") = " + std::to_string(dv[b]);
        }
      }
    }
    b3.value = worst;
    report.items.push_back(b3);
  }

  {
    ConditionResult b4{"B4", true, std::numeric_limits<double>::infinity(), ""};
    for (int a = 0; a < q; ++a) {
      const int letter = spec.fixed_letter[a];
      const double det = hs.extension(letter).determinant();
      b4.value = std::min(b4.value, std::abs(det));
      if (!(std::abs(det) > 1e-12) && b4.pass) {
        b4.pass = false;
        b4.witness = "det A_" + std::to_string(letter) + " = " + std::to_string(det);
      }
    }
    report.items.push_back(b4);
  }
  return report;
}

double harmonic_eval(const HarmonicStructure& hs, const Vector& alpha, const VertexRef& ref) {
  check_ref(hs.spec(), ref);
  return hs.restrict_to_cell(ref.word, alpha)[ref.label];
}

Vector project_mean_zero(const Vector& v) { return v.array() - v.mean(); }

double separation_constant(const Vector& ui, const Vector& uj) {
  if (ui.size() != 3 || uj.size() != 3) {
    throw Error(ErrorKind::invalid_argument, "separation constant needs #V_0 = 3");
  }
  const Eigen::Vector3d e1 = Eigen::Vector3d(1.0, -1.0, 0.0) / std::sqrt(2.0);
  const Eigen::Vector3d e2 = Eigen::Vector3d(1.0, 1.0, -2.0) / std::sqrt(6.0);
  const Eigen::Vector2d a(ui.dot(e1), ui.dot(e2));
  const Eigen::Vector2d b(uj.dot(e1), uj.dot(e2));
  const double cross = std::abs(a.x() * b.y() - a.y() * b.x());
  if (!(cross > 1e-14 * a.norm() * b.norm())) {
    throw Error(ErrorKind::degenerate, "u_i and u_j are parallel");
  }
  // The minimum of max(|a.u|, |b.u|) on the circle sits where |a.u| = |b.u|.
  const double delta = cross / std::max((a - b).norm(), (a + b).norm());

  constexpr int samples = 100000;
  double scanned = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const double theta = std::numbers::pi * s / samples;
    const Eigen::Vector2d u(std::cos(theta), std::sin(theta));
    scanned = std::min(scanned, std::max(std::abs(a.dot(u)), std::abs(b.dot(u))));
  }
  const double resolution = std::numbers::pi / samples * std::max(a.norm(), b.norm());
  if (scanned < delta - 1e-12 * std::max(1.0, delta) || scanned > delta + resolution) {
    throw Error(ErrorKind::internal, "separation constant disagrees with the angular scan");
  }
  return delta;
}

double separation_constant(const HarmonicStructure& hs, int letter_i, int letter_j) {
  if (letter_i == letter_j) throw Error(ErrorKind::invalid_argument, "separation constant needs i != j");
  return separation_constant(hs.fixed_point_of_letter(letter_i).u, hs.fixed_point_of_letter(letter_j).u);
}

std::vector<double> convergence_diagnostic(const HarmonicStructure& hs, int letter,
                                           const Vector& alpha, int n_max) {
  const FixedPointData& fp = hs.fixed_point_of_letter(letter);
  const Matrix& A = hs.extension(letter);
  // P A^n = (P A)^n, so the scaled iterate stays bounded.
  const Vector target = fp.u.dot(alpha) * project_mean_zero(fp.v);
  Vector y = project_mean_zero(alpha);
  std::vector<double> errors;
  errors.reserve(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    errors.push_back((y - target).norm());
    y = project_mean_zero(A * y) / fp.r;
  }
  return errors;
}

double boundary_resistance(const Matrix& D, int p, int q) {
  const Eigen::Index size = D.rows();
  if (p == q) return 0.0;
  const Matrix grounded = -D + Matrix::Constant(size, size, 1.0 / static_cast<double>(size));
  const Vector x = Vector::Unit(size, p) - Vector::Unit(size, q);
  return x.dot(grounded.ldlt().solve(x));
}

}  // namespace pcfgeo
