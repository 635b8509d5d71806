#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snowbranch/group.hpp"
#include "snowbranch/representation.hpp"

namespace snowbranch {

class EigenBasis;

enum class EdgeStyle { solid, dashed, dotted };
const char* style_name(EdgeStyle s);

struct DigraphEdge {
  int mother = 0;
  int daughter = 0;
  Subgroup daughter_subgroup;  // a maximal isotropy subgroup inside the mother representative
  std::string quotient;        // Gamma / Gamma'
  EdgeStyle style = EdgeStyle::solid;
  int irrep_dim = 1;
  int component_id = 0;  // index into function_space_irreps(mother representative)
  int fix_dim = 1;       // dim fix(daughter_subgroup, E)
};

/// One generic symmetry-breaking bifurcation: a symmetry type together with a
/// nontrivial isotypic component of its representative.
struct BifurcationKind {
  int mother = 0;
  int component_id = 0;
  IrrepType type;
  std::vector<int> edges;  // indices into BifurcationDigraph::edges()
};

class BifurcationDigraph {
 public:
  const std::vector<DigraphEdge>& edges() const { return edges_; }
  const std::vector<BifurcationKind>& kinds() const { return kinds_; }
  std::vector<const DigraphEdge*> edges_for(int mother, int component_id) const;

  friend BifurcationDigraph build_digraph();

 private:
  std::vector<DigraphEdge> edges_;
  std::vector<BifurcationKind> kinds_;
};

/// Builds the digraph from the 12-point orbit representation: for every
/// representative Gamma_i and every isotypic component with nontrivial action,
/// the maximal isotropy subgroups of an irreducible subspace E, one edge per
/// Gamma_i-conjugacy class of them.
BifurcationDigraph build_digraph();
const BifurcationDigraph& bifurcation_digraph();

/// Isotropy subgroups of nonzero vectors of an invariant subspace E (columns
/// orthonormal) under `group`, computed by brute force over all subgroups.
std::vector<Subgroup> isotropy_subgroups_on(Subgroup group, const RepresentationAction& action,
                                            const Eigen::MatrixXd& e, std::uint64_t seed = 7);

/// Arrows of the isotropy lattice: (i, j) when a conjugate of Gamma_j is
/// maximal among the isotropy subgroups properly contained in Gamma_i.
std::vector<std::pair<int, int>> isotropy_lattice_arrows();

enum class DegeneracyKind { edge, fold, accidental };
const char* degeneracy_name(DegeneracyKind k);

struct SeedVector {
  Eigen::VectorXd e;  // unit coefficient vector in E
  int daughter_type = -1;
  Subgroup daughter_subgroup;
  const DigraphEdge* edge = nullptr;
};

struct BifurcationClassification {
  DegeneracyKind kind = DegeneracyKind::accidental;
  int component_id = -1;
  std::vector<const DigraphEdge*> edges;
  std::vector<SeedVector> seeds;
  std::string note;
};

/// Identifies the isotypic component of the mother representative that
/// contains the center eigenspace E (coefficient vectors as columns) and
/// produces seed directions for each digraph edge leaving it.
BifurcationClassification classify_degeneracy(int mother_type, const Eigen::MatrixXd& e_basis,
                                              const EigenBasis& basis, std::mt19937_64& rng,
                                              int dotted_angles = 4, double tol = 1e-6);

}  // namespace snowbranch
