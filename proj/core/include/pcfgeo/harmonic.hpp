#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pcfgeo/level_graph.hpp"
#include "pcfgeo/structure.hpp"

namespace pcfgeo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// Absolute tolerance on the max-norm of the Schur residual for regularity.
inline constexpr double kRegularityTolerance = 1e-10;

struct ConditionResult {
  std::string name;
  bool pass = false;
  double value = 0.0;    // residual, eigenvalue, determinant, ...
  std::string witness;   // what failed, empty on success
};

struct ConditionReport {
  std::vector<ConditionResult> items;

  bool all_pass() const;
  // Throws Error(invalid_argument) for an unknown name.
  const ConditionResult& at(const std::string& name) const;
};

// (D1) nonpositive definite, (D2) kernel = constants, (D3) nonnegative off-diagonal.
ConditionReport check_dirichlet_matrix(const Matrix& D);

// Matrix M of the level-n energy, E^(n)(u, u) = u^T M u on l(V_n):
// the sum over cells w of (1/r_w) (-D u_w, u_w).
SparseMatrix assemble_discrete_form(const LevelGraph& graph, int n, const Matrix& D,
                                    std::span<const double> r);

// Quadratic form induced on a vertex subset by minimizing over the rest.
class TracedForm {
 public:
  const Matrix& matrix() const { return traced_; }
  const std::vector<VertexId>& keep() const { return keep_; }
  const std::vector<VertexId>& eliminated() const { return eliminated_; }

  double value(const Vector& keep_values) const { return keep_values.dot(traced_ * keep_values); }

  // Energy minimizing extension of keep_values to every vertex of the form.
  Vector extend(const Vector& keep_values) const;

 private:
  friend TracedForm trace_form(const SparseMatrix& form, std::span<const VertexId> keep);

  Matrix traced_;
  Matrix elimination_;  // eliminated values = elimination_ * keep values
  std::vector<VertexId> keep_;
  std::vector<VertexId> eliminated_;
  Eigen::Index size_ = 0;
};

// Schur complement onto keep. Throws Error(degenerate_form) when the
// eliminated block is singular.
TracedForm trace_form(const SparseMatrix& form, std::span<const VertexId> keep);

// max |trace of E^(1) onto V_0 - E^(0)|.
double check_regularity(const FractalSpec& spec, const Matrix& D, std::span<const double> r);

// r with trace(sum of unit-weight copies) = r E^(0). Throws
// Error(no_equal_weight_structure) when the trace is not proportional.
double solve_equal_renormalization(const FractalSpec& spec, const Matrix& D);

// A_i for every letter: row b of A_i is the value at psi_i(p_b) of the
// harmonic extension, so A_i alpha are the boundary values of h o psi_i.
std::vector<Matrix> extension_matrices(const FractalSpec& spec, const Matrix& D,
                                       std::span<const double> r);

// Eigen data attached to the boundary point p fixed by psi_i.
struct FixedPointData {
  int letter = 0;
  int label = 0;
  double r = 0.0;
  Vector v;  // A_i v = r_i v, v >= 0, v(p) = 0, (u, v) = 1
  Vector u;  // column of D at p; A_i^T u = r_i u
  double eigen_residual = 0.0;
  double dual_residual = 0.0;
};

FixedPointData fixed_point_eigendata(const Matrix& D, const Matrix& A, double r, int letter,
                                     int label);

class HarmonicStructure {
 public:
  // Validates (D1)-(D3), 0 < r_i < 1 and regularity, then derives A_i and
  // the fixed-point eigen data. Throws Error(invalid_argument) or
  // Error(broken_structure).
  static HarmonicStructure create(FractalSpec spec, Matrix D, std::vector<double> r);

  const FractalSpec& spec() const { return spec_; }
  int boundary_count() const { return spec_.boundary_count; }
  const Matrix& D() const { return D_; }
  const std::vector<double>& r() const { return r_; }
  const Matrix& extension(int letter) const { return A_.at(static_cast<std::size_t>(letter)); }
  double regularity_residual() const { return regularity_residual_; }

  // r_w = r_{w_1} ... r_{w_m}.
  double weight(const Word& w) const;
  // A_{w_m} ... A_{w_1} alpha, the boundary values of h o psi_w.
  Vector restrict_to_cell(const Word& w, Vector alpha) const;

  // Eigen data by boundary label.
  const FixedPointData& fixed_point(int label) const {
    return fixed_.at(static_cast<std::size_t>(label));
  }
  const FixedPointData& fixed_point_of_letter(int letter) const;

 private:
  FractalSpec spec_;
  Matrix D_;
  std::vector<double> r_;
  std::vector<Matrix> A_;
  std::vector<FixedPointData> fixed_;
  double regularity_residual_ = 0.0;
};

// (B1)-(B4); (B2) is checked on the level-3 graph only.
ConditionReport check_b_conditions(const HarmonicStructure& hs);

// Value of the harmonic function with boundary values alpha at ref.
double harmonic_eval(const HarmonicStructure& hs, const Vector& alpha, const VertexRef& ref);

// min over unit u with (u, 1) = 0 of max(|(ui, u)|, |(uj, u)|), for #V_0 = 3.
double separation_constant(const Vector& ui, const Vector& uj);
double separation_constant(const HarmonicStructure& hs, int letter_i, int letter_j);

// |r_i^{-n} P A_i^n alpha - (u_i, alpha) P v_i| for n = 0..n_max.
std::vector<double> convergence_diagnostic(const HarmonicStructure& hs, int letter,
                                           const Vector& alpha, int n_max);

// Effective resistance between boundary points p and q of E^(0).
double boundary_resistance(const Matrix& D, int p, int q);

// Mean-zero projection P.
Vector project_mean_zero(const Vector& v);

}  // namespace pcfgeo
