#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "snowbranch/group.hpp"

namespace snowbranch {

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

/// Integer coordinates in the lattice basis e1 = (h, 0), e2 = (h/2, h*sqrt(3)/2).
struct LatticePoint {
  int i = 0;
  int j = 0;
  friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
};

/// Planar D6 action; rho is the clockwise rotation by 60 degrees, sigma the
/// reflection across the y-axis. Throws if g carries the -1 factor.
PlanePoint planar_action(GroupElement g, PlanePoint p);

/// The same action on lattice coordinates (exact).
LatticePoint lattice_action(GroupElement g, LatticePoint p);

/// Expected point count (9^l - 4^l)/5.
long long expected_point_count(int level);

/// Triangular grid strictly inside the level-l Koch snowflake, together with
/// its nearest-neighbour structure and the permutation action of D6.
class SnowflakeGrid {
 public:
  int level() const { return level_; }
  double spacing() const { return h_; }
  int size() const { return static_cast<int>(lattice_.size()); }

  LatticePoint lattice(int idx) const { return lattice_[static_cast<std::size_t>(idx)]; }
  PlanePoint point(int idx) const;
  std::span<const int> neighbors(int idx) const;
  int degree(int idx) const { return nbr_offset_[idx + 1] - nbr_offset_[idx]; }

  /// Index of the lattice point, or -1 if it is not in the grid.
  int find(LatticePoint p) const;

  /// perm[i] = index of g^-1 x_i, so (g.u)_i = u[perm[i]]. g must lie in D6.
  std::span<const int> permutation(GroupElement g) const;

  /// Vertices of the lattice triangle containing p with barycentric weights.
  /// Vertices outside the grid lie on or beyond the boundary and are dropped,
  /// which matches the homogeneous Dirichlet condition.
  std::vector<std::pair<int, double>> interpolation_stencil(PlanePoint p) const;

  friend SnowflakeGrid build_grid(int level);

 private:
  int level_ = 0;
  double h_ = 0.0;
  std::vector<LatticePoint> lattice_;
  std::vector<int> nbr_offset_;
  std::vector<int> nbr_index_;
  std::array<std::vector<int>, 12> perms_;
  std::unordered_map<std::int64_t, int> lookup_;
};

/// Throws ConfigError for level outside 1..6 and ConsistencyError if the
/// enumerated count disagrees with expected_point_count.
SnowflakeGrid build_grid(int level);

/// Vertices of the level-l Koch polygon in fine lattice units (spacing
/// 3^-(l+1)), counter-clockwise. Exposed for tests.
std::vector<LatticePoint> koch_polygon(int level);

/// The point at which solution values are reported, (2/27, 4 sqrt(3)/27).
inline constexpr PlanePoint kGenericPoint{2.0 / 27.0, 0.25660011963983365};

}  // namespace snowbranch
