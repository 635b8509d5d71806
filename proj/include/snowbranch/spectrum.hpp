#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "snowbranch/geometry.hpp"
#include "snowbranch/representation.hpp"

namespace snowbranch {

inline constexpr int kSymmetryTypeCount = 23;

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// -Laplacian on the grid: (2/(3h^2)) ((12 - deg) u_i - sum of neighbour values).
SparseMatrix assemble_laplacian(const SnowflakeGrid& grid);

/// Uniform quadrature weight (sqrt(3)/2) h^2.
double quadrature_weight(const SnowflakeGrid& grid);

struct EigenOptions {
  std::string method = "auto";  // auto | dense | iterative
  int block_size = 4;
  double residual_tol = 1e-8;
  int max_sweeps = 400;
  std::uint64_t seed = 1;
  double cluster_tol = 1e-6;
  /// Extend M so that no eigenvalue cluster is cut in half.
  bool complete_clusters = true;
};

struct Eigenpairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // Euclidean-orthonormal columns
  Eigen::VectorXd residuals;
};

Eigenpairs dense_eigenpairs(const SparseMatrix& L, int count);
/// Shift-invert block Krylov iteration with full reorthogonalization and
/// Rayleigh-Ritz on L; uses a sparse LDL^T factorization of L.
Eigenpairs iterative_eigenpairs(const SparseMatrix& L, int count, const EigenOptions& opts);
Eigenpairs smallest_eigenpairs(const SparseMatrix& L, int count, const EigenOptions& opts = {});

/// Groups of consecutive indices whose values agree to tol * max(1, |value|).
std::vector<int> cluster_ids(const Eigen::VectorXd& values, double tol);

/// Short name V1..V6 of a function-space irreducible type of D6 or D6 x Z2.
std::string d6_component_name(const IrrepType& type);

/// The first M eigenpairs of the grid Laplacian, rotated so every mode lies in
/// one isotypic component of the D6 x Z2 action and normalized in the
/// quadrature inner product w * sum_i f_i g_i.
///
/// Orientation convention: the entry of largest magnitude (lowest index on
/// ties) is positive. In a two-dimensional irreducible pair the first vector v
/// is sigma-invariant and the second is (rho^2 v - rho^4 v) normalized, which is
/// sigma-antiinvariant; with this choice fix(Gamma_i, B_M) is spanned by basis
/// vectors for all 23 conventional representatives.
class EigenBasis {
 public:
  EigenBasis() = default;

  int level() const { return level_; }
  int size() const { return static_cast<int>(values_.size()); }
  int requested_size() const { return requested_; }
  int grid_size() const { return static_cast<int>(modes_.rows()); }
  double weight() const { return weight_; }
  const SnowflakeGrid& grid() const { return *grid_; }
  std::shared_ptr<const SnowflakeGrid> grid_ptr() const { return grid_; }

  const Eigen::VectorXd& eigenvalues() const { return values_; }
  const Eigen::MatrixXd& modes() const { return modes_; }
  const std::vector<int>& clusters() const { return clusters_; }

  /// Component index (into function_space_irreps(rep of type i)) of each mode.
  const std::vector<int>& tags(int type) const { return tags_.at(static_cast<std::size_t>(type)); }
  std::vector<int> modes_in_component(int type, int component) const;
  /// Modes spanning fix(Gamma_i, B_M); throws ConsistencyError if the count
  /// disagrees with the trace formula.
  std::vector<int> invariant_modes(int type) const;

  /// R(g)_{jk} = <psi_j, g psi_k>, block diagonal over clusters.
  const RepresentationAction& coefficient_action() const { return coeff_action_; }
  const RepresentationAction& grid_action() const { return grid_action_; }

  /// Assemble from already adapted data (used by the loader and the builder).
  static EigenBasis assemble(std::shared_ptr<const SnowflakeGrid> grid, int requested, Eigen::VectorXd values,
                             Eigen::MatrixXd modes, double cluster_tol);

 private:
  void build_actions_and_tags(double cluster_tol);

  int level_ = 0;
  int requested_ = 0;
  double weight_ = 0.0;
  std::shared_ptr<const SnowflakeGrid> grid_;
  Eigen::VectorXd values_;
  Eigen::MatrixXd modes_;
  std::vector<int> clusters_;
  std::array<std::vector<int>, kSymmetryTypeCount> tags_;
  RepresentationAction coeff_action_;
  RepresentationAction grid_action_;
};

/// Rotate raw eigenpairs (Euclidean-orthonormal) into the adapted basis.
EigenBasis symmetry_adapt(std::shared_ptr<const SnowflakeGrid> grid, const Eigenpairs& pairs, int requested,
                          double cluster_tol = 1e-6);

/// Grid, Laplacian, eigensolve and adaptation in one call.
EigenBasis compute_basis(int level, int modes, const EigenOptions& opts = {});

}  // namespace snowbranch
