#include "snowbranch/digraph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"
#include "snowbranch/spectrum.hpp"

namespace snowbranch {

const char* style_name(EdgeStyle s) {
  switch (s) {
    case EdgeStyle::solid: return "solid";
    case EdgeStyle::dashed: return "dashed";
    case EdgeStyle::dotted: return "dotted";
  }
  return "?";
}

const char* degeneracy_name(DegeneracyKind k) {
  switch (k) {
    case DegeneracyKind::edge: return "edge";
    case DegeneracyKind::fold: return "fold";
    case DegeneracyKind::accidental: return "accidental";
  }
  return "?";
}

std::vector<const DigraphEdge*> BifurcationDigraph::edges_for(int mother, int component_id) const {
  std::vector<const DigraphEdge*> out;
  for (const auto& e : edges_)
    if (e.mother == mother && e.component_id == component_id) out.push_back(&e);
  return out;
}

std::vector<Subgroup> isotropy_subgroups_on(Subgroup group, const RepresentationAction& action,
                                            const Eigen::MatrixXd& e, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  const auto d = e.cols();
  std::set<Subgroup> found;
  for (auto s : symmetry_tables().all_subgroups()) {
    if (!s.is_subset_of(group)) continue;
    Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(d, d);
    for (auto g : s.members()) avg += action.restricted(g, e);
    avg /= s.order();
    if (std::lround(avg.trace()) == 0) continue;
    Eigen::VectorXd r(d);
    for (Eigen::Index k = 0; k < d; ++k) r[k] = nd(rng);
    const Eigen::VectorXd x = e * (avg * r);
    found.insert(stabilizer_of(x.normalized(), action, 1e-9, group));
  }
  return {found.begin(), found.end()};
}

namespace {

std::vector<Subgroup> maximal_elements(const std::vector<Subgroup>& subs) {
  std::vector<Subgroup> out;
  for (auto s : subs) {
    bool maximal = true;
    for (auto t : subs)
      if (t != s && s.is_subset_of(t)) maximal = false;
    if (maximal) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](Subgroup a, Subgroup b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.bits() < b.bits();
  });
  return out;
}

}  // namespace

BifurcationDigraph build_digraph() {
  const auto& tables = symmetry_tables();
  const RepresentationAction reg = regular_action();
  BifurcationDigraph dg;
  for (int i = 0; i < tables.size(); ++i) {
    const Subgroup gamma = tables.type(i).representative;
    const auto comps = isotypic_decompose(gamma, reg, 0x5eedULL + gamma.bits());
    for (std::size_t c = 0; c < comps.size(); ++c) {
      const auto& comp = comps[c];
      if (comp.type.is_trivial()) continue;
      BifurcationKind kind{i, static_cast<int>(c), comp.type, {}};
      const Eigen::MatrixXd& e = comp.irreducible;
      const auto maximal = maximal_elements(isotropy_subgroups_on(gamma, reg, e));
      std::set<Subgroup> covered;
      for (auto sigma : maximal) {
        if (covered.count(sigma)) continue;
        std::vector<Subgroup> cls;
        for (auto g : gamma.members()) {
          const auto conj = sigma.conjugate_by(g);
          if (covered.insert(conj).second) cls.push_back(conj);
        }
        const int daughter = tables.type_of(sigma);
        if (daughter < 0)
          throw ConsistencyError(fmt::format("maximal subgroup {} of {} is not an isotropy subgroup", sigma.hex(),
                                             tables.type(i).name));
        const auto rep = tables.type(daughter).representative;
        const Subgroup chosen = std::find(cls.begin(), cls.end(), rep) != cls.end() ? rep : sigma;

        DigraphEdge edge;
        edge.mother = i;
        edge.daughter = daughter;
        edge.daughter_subgroup = chosen;
        edge.quotient = quotient_label(gamma, comp.type.kernel);
        edge.irrep_dim = comp.type.dim;
        edge.component_id = static_cast<int>(c);
        Eigen::MatrixXd avg = Eigen::MatrixXd::Zero(e.cols(), e.cols());
        for (auto g : chosen.members()) avg += reg.restricted(g, e);
        edge.fix_dim = static_cast<int>(std::lround(avg.trace() / chosen.order()));
        const int quotient = normalizer(chosen, gamma).order() / chosen.order();
        if (edge.fix_dim >= 2) {
          edge.style = EdgeStyle::dotted;
        } else if (quotient == 2) {
          edge.style = EdgeStyle::solid;
        } else if (quotient == 1) {
          edge.style = EdgeStyle::dashed;
        } else {
          throw ConsistencyError(fmt::format("unexpected normalizer quotient {} for edge {} -> {}", quotient, i,
                                             daughter));
        }
        kind.edges.push_back(static_cast<int>(dg.edges_.size()));
        dg.edges_.push_back(edge);
      }
      dg.kinds_.push_back(std::move(kind));
    }
  }
  return dg;
}

const BifurcationDigraph& bifurcation_digraph() {
  static const BifurcationDigraph dg = build_digraph();
  return dg;
}

std::vector<std::pair<int, int>> isotropy_lattice_arrows() {
  const auto& tables = symmetry_tables();
  std::set<std::pair<int, int>> arrows;
  for (int i = 0; i < tables.size(); ++i) {
    const Subgroup gamma = tables.type(i).representative;
    std::vector<Subgroup> below;
    for (auto s : tables.all_subgroups())
      if (s != gamma && s.is_subset_of(gamma) && is_function_space_isotropy(s)) below.push_back(s);
    for (auto s : maximal_elements(below)) arrows.emplace(i, tables.type_of(s));
  }
  return {arrows.begin(), arrows.end()};
}

BifurcationClassification classify_degeneracy(int mother_type, const Eigen::MatrixXd& e_basis,
                                              const EigenBasis& basis, std::mt19937_64& rng, int dotted_angles,
                                              double tol) {
  const auto& tables = symmetry_tables();
  const Subgroup gamma = tables.type(mother_type).representative;
  const auto& types = function_space_irreps(gamma);
  const auto& act = basis.coefficient_action();
  const auto c = e_basis.cols();

  BifurcationClassification out;
  int comp = -1;
  for (std::size_t t = 0; t < types.size(); ++t) {
    const double res = (apply_isotypic_projector(types[t], act, e_basis) - e_basis).norm();
    if (res <= tol * std::sqrt(static_cast<double>(c))) comp = static_cast<int>(t);
  }
  if (comp < 0) {
    out.kind = DegeneracyKind::accidental;
    out.note = fmt::format("center space of dimension {} spans several isotypic components", c);
    return out;
  }
  out.component_id = comp;
  const auto& type = types[static_cast<std::size_t>(comp)];
  if (type.is_trivial()) {
    out.kind = DegeneracyKind::fold;
    out.note = "center space is symmetric: fold point";
    return out;
  }
  if (c != type.dim) {
    out.kind = DegeneracyKind::accidental;
    out.note = fmt::format("center dimension {} differs from irreducible dimension {}", c, type.dim);
    return out;
  }
  out.kind = DegeneracyKind::edge;
  out.edges = bifurcation_digraph().edges_for(mother_type, comp);

  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.0, std::numbers::pi / std::max(1, dotted_angles));
  auto add_seed = [&](const Eigen::VectorXd& e, const DigraphEdge* edge) {
    SeedVector s;
    s.e = e;
    s.edge = edge;
    s.daughter_subgroup = stabilizer_of(e, act, 1e-8, gamma);
    s.daughter_type = tables.type_of(s.daughter_subgroup);
    out.seeds.push_back(std::move(s));
  };
  for (const auto* edge : out.edges) {
    if (edge->style == EdgeStyle::dotted) {
      const double offset = ud(rng);
      for (int k = 0; k < dotted_angles; ++k) {
        const double th = offset + k * std::numbers::pi / dotted_angles;
        const Eigen::VectorXd e = (std::cos(th) * e_basis.col(0) + std::sin(th) * e_basis.col(1)).normalized();
        add_seed(e, edge);
        add_seed(-e, edge);
      }
      continue;
    }
    Eigen::VectorXd v;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::VectorXd r(c);
      for (Eigen::Index k = 0; k < c; ++k) r[k] = nd(rng);
      v = average(edge->daughter_subgroup, act, e_basis * r);
      if (v.norm() > 1e-3) break;
    }
    if (v.norm() <= 1e-3) {
      out.note += fmt::format("no fixed direction for edge to type {}; ", edge->daughter);
      continue;
    }
    v.normalize();
    add_seed(v, edge);
    if (edge->style == EdgeStyle::dashed) add_seed(-v, edge);
  }
  return out;
}

}  // namespace snowbranch
