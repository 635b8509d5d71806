#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "snowbranch/geometry.hpp"
#include "snowbranch/group.hpp"

namespace snowbranch {

using Character = std::array<double, kGroupOrder>;

/// Orthogonal representation of D6 x Z2 on R^n. Either a signed permutation
/// action, (g.u)_i = sign(g) u[perm_g[i]], or a table of dense matrices.
class RepresentationAction {
 public:
  static RepresentationAction signed_permutation(int dim, std::array<std::vector<int>, kGroupOrder> perms,
                                                 std::array<int, kGroupOrder> signs);
  static RepresentationAction dense(std::array<Eigen::MatrixXd, kGroupOrder> mats);

  int dimension() const { return dim_; }
  bool is_permutation() const { return permutation_; }

  Eigen::MatrixXd matrix(GroupElement g) const;
  Eigen::VectorXd apply(GroupElement g, const Eigen::VectorXd& v) const;
  Eigen::MatrixXd apply(GroupElement g, const Eigen::MatrixXd& v) const;
  double trace(GroupElement g) const;

  /// Restriction B_g = Q^T A(g) Q for orthonormal columns Q spanning an invariant subspace.
  Eigen::MatrixXd restricted(GroupElement g, const Eigen::MatrixXd& q) const;

 private:
  int dim_ = 0;
  bool permutation_ = true;
  std::array<std::vector<int>, kGroupOrder> perms_;
  std::array<int, kGroupOrder> signs_{};
  std::array<Eigen::MatrixXd, kGroupOrder> mats_;
};

/// Function-space action on grid values: (g, z).u = z (g.u).
RepresentationAction grid_action(const SnowflakeGrid& grid);

/// The same action on functions supported on one generic 12-point D6 orbit.
/// Points are indexed by D6 elements, x_h = h.x0.
RepresentationAction regular_action();

/// (1/|S|) sum_{g in S} A(g).
Eigen::MatrixXd average_projector(Subgroup s, const RepresentationAction& action);
Eigen::VectorXd average(Subgroup s, const RepresentationAction& action, const Eigen::VectorXd& v);

/// dim fix(S, V) from the trace formula.
int fixed_dimension(Subgroup s, const RepresentationAction& action);

/// {g : |A(g)u - u| <= tol max(1, |u|)}. Throws ConsistencyError if the set is
/// not a subgroup.
Subgroup stabilizer_of(const Eigen::VectorXd& u, const RepresentationAction& action, double tol,
                       Subgroup within = Subgroup::whole());

/// A real irreducible representation type of a subgroup, identified by its
/// character (entries for elements outside the subgroup are zero).
struct IrrepType {
  Subgroup group;
  int dim = 1;
  Subgroup kernel;
  Character character{};
  double norm_sq = 1.0;  // <chi, chi>; 2 for irreducibles of complex type

  bool is_trivial() const { return kernel == group; }
  /// Coefficient c in the isotypic projector c * sum chi(g) A(g).
  double projector_scale() const { return dim / (group.order() * norm_sq); }
};

struct IsotypicComponent {
  IrrepType type;
  Eigen::MatrixXd basis;        // orthonormal columns spanning the component
  Eigen::MatrixXd irreducible;  // orthonormal columns of one irreducible subspace
};

/// Real isotypic decomposition of the restriction of `action` to `group`.
/// Uses the eigenspaces of a random group-averaged symmetric matrix; retries
/// with a fresh matrix when a cluster is not irreducible. Components are
/// ordered trivial first, then by (dim, character descending).
std::vector<IsotypicComponent> isotypic_decompose(Subgroup group, const RepresentationAction& action,
                                                  std::uint64_t seed = 12345, int max_retries = 8);

/// Irreducible types of `group` appearing in the function-space action, read
/// off the 12-point orbit representation. Cached per subgroup; ordered as in
/// isotypic_decompose.
const std::vector<IrrepType>& function_space_irreps(Subgroup group);

/// Isotypic projector of `type` on an arbitrary action of a group containing it.
Eigen::MatrixXd isotypic_projector(const IrrepType& type, const RepresentationAction& action);
Eigen::MatrixXd apply_isotypic_projector(const IrrepType& type, const RepresentationAction& action,
                                         const Eigen::MatrixXd& v);

/// Order and commutativity of G/K give one of Z2, Z3, Z6, D3, D6 (or "1",
/// "Z2xZ2", "Z4", "D2" style names for other quotients, never produced here).
std::string quotient_label(Subgroup group, Subgroup kernel);

}  // namespace snowbranch
