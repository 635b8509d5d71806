#include "snowbranch/representation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {

RepresentationAction RepresentationAction::signed_permutation(int dim,
                                                              std::array<std::vector<int>, kGroupOrder> perms,
                                                              std::array<int, kGroupOrder> signs) {
  RepresentationAction a;
  a.dim_ = dim;
  a.permutation_ = true;
  a.perms_ = std::move(perms);
  a.signs_ = signs;
  return a;
}

RepresentationAction RepresentationAction::dense(std::array<Eigen::MatrixXd, kGroupOrder> mats) {
  RepresentationAction a;
  a.dim_ = static_cast<int>(mats[0].rows());
  a.permutation_ = false;
  a.mats_ = std::move(mats);
  return a;
}

Eigen::MatrixXd RepresentationAction::matrix(GroupElement g) const {
  const auto k = static_cast<std::size_t>(g.index());
  if (!permutation_) return mats_[k];
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
  for (int i = 0; i < dim_; ++i) m(i, perms_[k][static_cast<std::size_t>(i)]) = signs_[k];
  return m;
}

Eigen::VectorXd RepresentationAction::apply(GroupElement g, const Eigen::VectorXd& v) const {
  const auto k = static_cast<std::size_t>(g.index());
  if (!permutation_) return mats_[k] * v;
  Eigen::VectorXd out(dim_);
  const auto& p = perms_[k];
  const double s = signs_[k];
  for (int i = 0; i < dim_; ++i) out[i] = s * v[p[static_cast<std::size_t>(i)]];
  return out;
}

Eigen::MatrixXd RepresentationAction::apply(GroupElement g, const Eigen::MatrixXd& v) const {
  const auto k = static_cast<std::size_t>(g.index());
  if (!permutation_) return mats_[k] * v;
  Eigen::MatrixXd out(dim_, v.cols());
  const auto& p = perms_[k];
  const double s = signs_[k];
  for (int i = 0; i < dim_; ++i) out.row(i) = s * v.row(p[static_cast<std::size_t>(i)]);
  return out;
}

double RepresentationAction::trace(GroupElement g) const {
  const auto k = static_cast<std::size_t>(g.index());
  if (!permutation_) return mats_[k].trace();
  int fixed = 0;
  for (int i = 0; i < dim_; ++i)
    if (perms_[k][static_cast<std::size_t>(i)] == i) ++fixed;
  return signs_[k] * fixed;
}

Eigen::MatrixXd RepresentationAction::restricted(GroupElement g, const Eigen::MatrixXd& q) const {
  return q.transpose() * apply(g, q);
}

RepresentationAction grid_action(const SnowflakeGrid& grid) {
  std::array<std::vector<int>, kGroupOrder> perms;
  std::array<int, kGroupOrder> signs{};
  for (auto g : all_elements()) {
    const auto p = grid.permutation(g.d6_part());
    perms[static_cast<std::size_t>(g.index())].assign(p.begin(), p.end());
    signs[static_cast<std::size_t>(g.index())] = g.sign();
  }
  return RepresentationAction::signed_permutation(grid.size(), std::move(perms), signs);
}

RepresentationAction regular_action() {
  std::array<std::vector<int>, kGroupOrder> perms;
  std::array<int, kGroupOrder> signs{};
  for (auto g : all_elements()) {
    auto& p = perms[static_cast<std::size_t>(g.index())];
    p.resize(12);
    const auto gi = g.d6_part().inverse();
    for (int h = 0; h < 12; ++h) p[static_cast<std::size_t>(h)] = (gi * GroupElement::from_index(h)).index();
    signs[static_cast<std::size_t>(g.index())] = g.sign();
  }
  return RepresentationAction::signed_permutation(12, std::move(perms), signs);
}

Eigen::MatrixXd average_projector(Subgroup s, const RepresentationAction& action) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(action.dimension(), action.dimension());
  for (auto g : s.members()) p += action.matrix(g);
  return p / s.order();
}

Eigen::VectorXd average(Subgroup s, const RepresentationAction& action, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
  for (auto g : s.members()) out += action.apply(g, v);
  return out / s.order();
}

int fixed_dimension(Subgroup s, const RepresentationAction& action) {
  double t = 0.0;
  for (auto g : s.members()) t += action.trace(g);
  return static_cast<int>(std::lround(t / s.order()));
}

Subgroup stabilizer_of(const Eigen::VectorXd& u, const RepresentationAction& action, double tol, Subgroup within) {
  const double scale = tol * std::max(1.0, u.norm());
  std::uint32_t bits = 0;
  for (auto g : within.members())
    if ((action.apply(g, u) - u).norm() <= scale) bits |= 1u << g.index();
  const Subgroup s{bits};
  if (!s.is_subgroup())
    throw ConsistencyError(fmt::format("stabilizer set {} is not a subgroup (tolerance {:g})", s.hex(), tol));
  return s;
}

namespace {

bool same_character(const Character& a, const Character& b) {
  for (int k = 0; k < kGroupOrder; ++k)
    if (std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) > 1e-6) return false;
  return true;
}

bool irreducible_plane(Subgroup group, const RepresentationAction& action, const Eigen::MatrixXd& q) {
  for (auto g : group.members()) {
    const Eigen::MatrixXd b = action.restricted(g, q);
    if (b.determinant() > 0.0 && std::abs(b.trace()) < 2.0 - 1e-6) return true;
  }
  return false;
}

IrrepType make_type(Subgroup group, int dim, const Character& chi) {
  IrrepType t;
  t.group = group;
  t.dim = dim;
  t.character = chi;
  std::uint32_t kb = 0;
  double nsq = 0.0;
  for (auto g : group.members()) {
    const double c = chi[static_cast<std::size_t>(g.index())];
    if (std::abs(c - dim) < 1e-6) kb |= 1u << g.index();
    nsq += c * c;
  }
  t.kernel = Subgroup{kb};
  t.norm_sq = std::round(nsq / group.order());
  return t;
}

bool type_less(const IrrepType& a, const IrrepType& b) {
  if (a.is_trivial() != b.is_trivial()) return a.is_trivial();
  if (a.dim != b.dim) return a.dim < b.dim;
  for (int k = 0; k < kGroupOrder; ++k) {
    const double x = a.character[static_cast<std::size_t>(k)], y = b.character[static_cast<std::size_t>(k)];
    if (std::abs(x - y) > 1e-6) return x > y;
  }
  return false;
}

Eigen::MatrixXd averaged_symmetric(Subgroup group, const RepresentationAction& action, std::mt19937_64& rng) {
  const int n = action.dimension();
  std::normal_distribution<double> nd;
  Eigen::MatrixXd s0(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i <= j; ++i) s0(i, j) = s0(j, i) = nd(rng);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (auto g : group.members()) {
    const Eigen::MatrixXd left = action.apply(g, s0);                   // A S0
    const Eigen::MatrixXd both = action.apply(g, Eigen::MatrixXd(left.transpose()));  // A (A S0)^T
    s += both;  // symmetric since S0 is
  }
  return s / group.order();
}

}  // namespace

std::vector<IsotypicComponent> isotypic_decompose(Subgroup group, const RepresentationAction& action,
                                                  std::uint64_t seed, int max_retries) {
  std::mt19937_64 rng(seed);
  const int n = action.dimension();
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    const Eigen::MatrixXd s = averaged_symmetric(group, action, rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    const auto& ev = es.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());

    std::vector<IsotypicComponent> comps;
    bool ok = true;
    int start = 0;
    while (start < n && ok) {
      int stop = start + 1;
      while (stop < n && ev[stop] - ev[stop - 1] <= 1e-8 * scale) ++stop;
      const int c = stop - start;
      const Eigen::MatrixXd q = es.eigenvectors().middleCols(start, c);
      if (c > 2 || (c == 2 && !irreducible_plane(group, action, q))) {
        ok = false;
        break;
      }
      Character chi{};
      for (auto g : group.members()) chi[static_cast<std::size_t>(g.index())] = action.restricted(g, q).trace();
      auto it = std::find_if(comps.begin(), comps.end(),
                             [&](const IsotypicComponent& ic) { return same_character(ic.type.character, chi); });
      if (it == comps.end()) {
        comps.push_back({make_type(group, c, chi), q, q});
      } else {
        if (it->type.dim != c) {
          ok = false;
          break;
        }
        Eigen::MatrixXd grown(n, it->basis.cols() + c);
        grown << it->basis, q;
        it->basis = std::move(grown);
      }
      start = stop;
    }
    if (!ok) continue;
    std::sort(comps.begin(), comps.end(),
              [](const IsotypicComponent& a, const IsotypicComponent& b) { return type_less(a.type, b.type); });
    return comps;
  }
  throw NumericalError(fmt::format("isotypic decomposition of {} did not separate after {} attempts",
                                   group.hex(), max_retries));
}

const std::vector<IrrepType>& function_space_irreps(Subgroup group) {
  static std::mutex mu;
  static std::map<std::uint32_t, std::vector<IrrepType>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(group.bits());
  if (it != cache.end()) return it->second;
  static const RepresentationAction reg = regular_action();
  std::vector<IrrepType> types;
  for (auto& c : isotypic_decompose(group, reg, 0x5eedULL + group.bits())) types.push_back(c.type);
  return cache.emplace(group.bits(), std::move(types)).first->second;
}

Eigen::MatrixXd isotypic_projector(const IrrepType& type, const RepresentationAction& action) {
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(action.dimension(), action.dimension());
  for (auto g : type.group.members()) {
    const double c = type.character[static_cast<std::size_t>(g.index())];
    if (c != 0.0) p += c * action.matrix(g);
  }
  return type.projector_scale() * p;
}

Eigen::MatrixXd apply_isotypic_projector(const IrrepType& type, const RepresentationAction& action,
                                         const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  for (auto g : type.group.members()) {
    const double c = type.character[static_cast<std::size_t>(g.index())];
    if (c != 0.0) out += c * action.apply(g, v);
  }
  return type.projector_scale() * out;
}

std::string quotient_label(Subgroup group, Subgroup kernel) {
  const int q = group.order() / kernel.order();
  bool abelian = true;
  const auto mem = group.members();
  for (auto a : mem)
    for (auto b : mem)
      if (!kernel.contains(a * b * a.inverse() * b.inverse())) abelian = false;
  switch (q) {
    case 1: return "1";
    case 2: return "Z2";
    case 3: return "Z3";
    case 4: {
      for (auto a : mem)
        if (!kernel.contains(a * a)) return "Z4";
      return "Z2xZ2";
    }
    case 6: return abelian ? "Z6" : "D3";
    case 12: return abelian ? "Z2xZ6" : "D6";
    default: return fmt::format("order{}", q);
  }
}

}  // namespace snowbranch
