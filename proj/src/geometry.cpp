#include "snowbranch/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {
namespace {

constexpr double kSqrt3 = 1.7320508075688772;

// Clockwise rotation by 60 degrees in lattice coordinates.
LatticePoint rotate_cw(LatticePoint p) { return {p.i + p.j, -p.i}; }
LatticePoint rotate_ccw(LatticePoint p) { return {-p.j, p.i + p.j}; }
LatticePoint reflect_y_axis(LatticePoint p) { return {-p.i - p.j, p.j}; }

long long ipow(long long b, int e) {
  long long r = 1;
  while (e-- > 0) r *= b;
  return r;
}

std::int64_t key(LatticePoint p) {
  return (static_cast<std::int64_t>(p.j) << 32) ^ static_cast<std::uint32_t>(p.i);
}

struct Edge {
  std::int64_t a1, b1, a2, b2;
};

// Row-wise classification: for each edge crossing row b, decide on which side
// of it the point (a, b) lies. All arithmetic is exact.
enum class Side { inside, outside, boundary };

Side classify(std::int64_t a, std::int64_t b, std::span<const Edge> edges) {
  bool inside = false;
  for (const auto& e : edges) {
    const auto lo = std::min(e.b1, e.b2), hi = std::max(e.b1, e.b2);
    if (b < lo || b > hi) continue;
    const auto cross = (e.a2 - e.a1) * (b - e.b1) - (e.b2 - e.b1) * (a - e.a1);
    if (cross == 0 && a >= std::min(e.a1, e.a2) && a <= std::max(e.a1, e.a2)) return Side::boundary;
    if (b == hi) continue;  // half-open rule
    if (lo == hi) continue;
    // crossing abscissa lies to the right of a
    const bool right = (e.b2 > e.b1) ? cross > 0 : cross < 0;
    if (right) inside = !inside;
  }
  return inside ? Side::inside : Side::outside;
}

}  // namespace

PlanePoint planar_action(GroupElement g, PlanePoint p) {
  if (!g.in_d6()) throw Error("planar_action: the -1 factor does not act on the plane");
  if (g.reflection()) p = {-p.x, p.y};
  for (int k = 0; k < g.rotation(); ++k)
    p = {0.5 * p.x + 0.5 * kSqrt3 * p.y, -0.5 * kSqrt3 * p.x + 0.5 * p.y};
  return p;
}

LatticePoint lattice_action(GroupElement g, LatticePoint p) {
  if (g.reflection()) p = reflect_y_axis(p);
  for (int k = 0; k < g.rotation(); ++k) p = rotate_cw(p);
  return p;
}

long long expected_point_count(int level) { return (ipow(9, level) - ipow(4, level)) / 5; }

std::vector<LatticePoint> koch_polygon(int level) {
  const int s = static_cast<int>(ipow(3, level));
  const LatticePoint a{-s, 2 * s};
  const LatticePoint b = rotate_ccw(rotate_ccw(a));
  const LatticePoint c = rotate_ccw(rotate_ccw(b));
  std::vector<LatticePoint> poly{a, b, c};
  for (int it = 0; it < level; ++it) {
    std::vector<LatticePoint> next;
    next.reserve(poly.size() * 4);
    for (std::size_t k = 0; k < poly.size(); ++k) {
      const auto p = poly[k];
      const auto q = poly[(k + 1) % poly.size()];
      const LatticePoint d{(q.i - p.i) / 3, (q.j - p.j) / 3};
      const LatticePoint p1{p.i + d.i, p.j + d.j};
      const auto out = rotate_cw(d);
      next.push_back(p);
      next.push_back(p1);
      next.push_back({p1.i + out.i, p1.j + out.j});
      next.push_back({p.i + 2 * d.i, p.j + 2 * d.j});
    }
    poly = std::move(next);
  }
  return poly;
}

PlanePoint SnowflakeGrid::point(int idx) const {
  const auto p = lattice(idx);
  return {h_ * (p.i + 0.5 * p.j), h_ * 0.5 * kSqrt3 * p.j};
}

std::span<const int> SnowflakeGrid::neighbors(int idx) const {
  const auto b = static_cast<std::size_t>(nbr_offset_[static_cast<std::size_t>(idx)]);
  const auto e = static_cast<std::size_t>(nbr_offset_[static_cast<std::size_t>(idx) + 1]);
  return std::span<const int>(nbr_index_).subspan(b, e - b);
}

int SnowflakeGrid::find(LatticePoint p) const {
  auto it = lookup_.find(key(p));
  return it == lookup_.end() ? -1 : it->second;
}

std::span<const int> SnowflakeGrid::permutation(GroupElement g) const {
  if (!g.in_d6()) throw Error("grid permutations are defined for D6 elements only");
  return perms_[static_cast<std::size_t>(g.index())];
}

std::vector<std::pair<int, double>> SnowflakeGrid::interpolation_stencil(PlanePoint p) const {
  // lattice coordinates (real valued)
  const double v = p.y / (h_ * 0.5 * kSqrt3);
  const double u = p.x / h_ - 0.5 * v;
  const double fi = std::floor(u), fj = std::floor(v);
  const double du = u - fi, dv = v - fj;
  const int i0 = static_cast<int>(fi), j0 = static_cast<int>(fj);
  std::array<std::pair<LatticePoint, double>, 3> verts;
  if (du + dv <= 1.0) {
    verts = {{{{i0, j0}, 1.0 - du - dv}, {{i0 + 1, j0}, du}, {{i0, j0 + 1}, dv}}};
  } else {
    verts = {{{{i0 + 1, j0 + 1}, du + dv - 1.0}, {{i0, j0 + 1}, 1.0 - du}, {{i0 + 1, j0}, 1.0 - dv}}};
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [lp, w] : verts) {
    const int idx = find(lp);
    if (idx >= 0 && w != 0.0) out.emplace_back(idx, w);
  }
  return out;
}

SnowflakeGrid build_grid(int level) {
  if (level < 1 || level > 6) throw ConfigError(fmt::format("grid level {} outside 1..6", level));

  const auto poly = koch_polygon(level);
  std::vector<Edge> edges;
  edges.reserve(poly.size());
  for (std::size_t k = 0; k < poly.size(); ++k) {
    const auto p = poly[k];
    const auto q = poly[(k + 1) % poly.size()];
    edges.push_back({p.i, p.j, q.i, q.j});
  }

  SnowflakeGrid g;
  g.level_ = level;
  g.h_ = 2.0 / static_cast<double>(ipow(3, level));

  // Grid point (i, j) sits at fine coordinates (6i, 6j). The region fits in
  // |y| <= 2/sqrt(3), so |j| stays below 3^l and |i| below 2 * 3^l.
  const int jmax = static_cast<int>(ipow(3, level));
  const int imax = 2 * jmax;
  std::vector<Edge> row_edges;
  for (int j = -jmax; j <= jmax; ++j) {
    const std::int64_t b = 6LL * j;
    row_edges.clear();
    for (const auto& e : edges)
      if (b >= std::min(e.b1, e.b2) && b <= std::max(e.b1, e.b2)) row_edges.push_back(e);
    if (row_edges.empty()) continue;
    for (int i = -imax; i <= imax; ++i) {
      if (classify(6LL * i, b, row_edges) == Side::inside) g.lattice_.push_back({i, j});
    }
  }

  const auto expected = expected_point_count(level);
  if (static_cast<long long>(g.lattice_.size()) != expected)
    throw ConsistencyError(
        fmt::format("level {} grid has {} points, expected {}", level, g.lattice_.size(), expected));

  g.lookup_.reserve(g.lattice_.size() * 2);
  for (std::size_t k = 0; k < g.lattice_.size(); ++k) g.lookup_.emplace(key(g.lattice_[k]), static_cast<int>(k));

  static constexpr std::array<LatticePoint, 6> kDirs{{{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};
  g.nbr_offset_.assign(1, 0);
  for (const auto& p : g.lattice_) {
    std::vector<int> nb;
    for (const auto& d : kDirs) {
      const int idx = g.find({p.i + d.i, p.j + d.j});
      if (idx >= 0) nb.push_back(idx);
    }
    std::sort(nb.begin(), nb.end());
    g.nbr_index_.insert(g.nbr_index_.end(), nb.begin(), nb.end());
    g.nbr_offset_.push_back(static_cast<int>(g.nbr_index_.size()));
  }

  for (int e = 0; e < 12; ++e) {
    const auto inv = GroupElement::from_index(e).inverse();
    auto& perm = g.perms_[static_cast<std::size_t>(e)];
    perm.resize(g.lattice_.size());
    for (std::size_t k = 0; k < g.lattice_.size(); ++k) {
      const int idx = g.find(lattice_action(inv, g.lattice_[k]));
      if (idx < 0)
        throw ConsistencyError(fmt::format("grid is not D6-symmetric: image of point {} missing", k));
      perm[k] = idx;
    }
  }
  return g;
}

}  // namespace snowbranch
