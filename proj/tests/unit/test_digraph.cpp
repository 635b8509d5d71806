#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>

#include "snowbranch/digraph.hpp"
#include "snowbranch/spectrum.hpp"
#include "support.hpp"

using namespace snowbranch;

namespace {

using Arrow = std::tuple<char, char, std::string, std::string>;

// Boxes of the condensed drawing: types grouped by row of the isotropy lattice.
char box_of(int type) {
  static const std::map<int, char> boxes = [] {
    std::map<int, char> m;
    const std::vector<std::pair<char, std::vector<int>>> spec = {
        {'A', {0}},           {'B', {1, 2, 3, 4}},     {'C', {5, 6, 7, 8}}, {'D', {9, 10, 11, 12}},
        {'E', {13, 14}},      {'F', {15, 16, 17, 18}}, {'G', {19, 20}},     {'H', {21}},
        {'I', {22}}};
    for (const auto& [b, ts] : spec)
      for (int t : ts) m[t] = b;
    return m;
  }();
  return boxes.at(type);
}

const std::set<Arrow> kCondensed = {
    {'A', 'B', "Z2", "solid"},  {'A', 'C', "D6", "solid"},  {'B', 'D', "Z2", "solid"},
    {'B', 'E', "Z2", "solid"},  {'B', 'C', "D3", "dashed"}, {'B', 'F', "D6", "solid"},
    {'C', 'F', "Z2", "solid"},  {'C', 'G', "Z2", "solid"},  {'D', 'H', "Z2", "solid"},
    {'D', 'F', "D3", "dashed"}, {'E', 'H', "Z2", "solid"},  {'E', 'G', "Z3", "dotted"},
    {'E', 'I', "Z6", "dotted"}, {'F', 'I', "Z2", "solid"},  {'G', 'I', "Z2", "solid"},
    {'H', 'I', "Z3", "dotted"},
};

int mode_in(const EigenBasis& basis, int type, const std::string& name, int skip = 0) {
  const auto& irreps = function_space_irreps(symmetry_tables().type(type).representative);
  const auto& tags = basis.tags(type);
  for (int j = 0; j < basis.size(); ++j)
    if (d6_component_name(irreps[static_cast<std::size_t>(tags[static_cast<std::size_t>(j)])]) == name && skip-- == 0)
      return j;
  return -1;
}

Eigen::MatrixXd unit_columns(int m, std::initializer_list<int> idx) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(m, static_cast<Eigen::Index>(idx.size()));
  int c = 0;
  for (int j : idx) e(j, c++) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("census: 23 types, 59 kinds, 65 edges") {
  const auto& dg = bifurcation_digraph();
  CHECK(symmetry_tables().size() == 23);
  CHECK(dg.kinds().size() == 59);
  CHECK(dg.edges().size() == 65);
  std::set<std::string> labels;
  for (const auto& e : dg.edges()) labels.insert(e.quotient);
  CHECK(labels == std::set<std::string>{"Z2", "Z3", "Z6", "D3", "D6"});
  // every kind has at least one edge and points back at its edges
  std::size_t counted = 0;
  for (const auto& k : dg.kinds()) {
    CHECK(!k.edges.empty());
    counted += k.edges.size();
    for (int e : k.edges) CHECK(dg.edges()[static_cast<std::size_t>(e)].mother == k.mother);
  }
  CHECK(counted == 65);
}

TEST_CASE("condensed digraph matches the hand-encoded fixture") {
  std::set<Arrow> got;
  for (const auto& e : bifurcation_digraph().edges())
    got.insert({box_of(e.mother), box_of(e.daughter), e.quotient, style_name(e.style)});
  CHECK(got == kCondensed);
}

TEST_CASE("edges out of D6") {
  const auto& dg = bifurcation_digraph();
  std::set<std::tuple<int, std::string, std::string>> out;
  for (const auto& e : dg.edges())
    if (e.mother == 1) out.insert({e.daughter, e.quotient, style_name(e.style)});
  CHECK(out.count({15, "D6", "solid"}) == 1);
  CHECK(out.count({16, "D6", "solid"}) == 1);
  CHECK(out.count({5, "D3", "dashed"}) == 1);
  CHECK(out.count({13, "Z2", "solid"}) == 1);
  // the two-dimensional V6 component yields both reflection daughters
  int v6 = 0;
  for (const auto& e : dg.edges())
    if (e.mother == 1 && (e.daughter == 15 || e.daughter == 16)) {
      CHECK(e.irrep_dim == 2);
      ++v6;
    }
  CHECK(v6 == 2);
}

TEST_CASE("edges out of the rotation group are dotted where the branching lemma fails") {
  int dotted = 0;
  for (const auto& e : bifurcation_digraph().edges()) {
    if (e.mother != 13) continue;
    if (e.irrep_dim == 2) {
      CHECK(e.style == EdgeStyle::dotted);
      ++dotted;
    }
  }
  CHECK(dotted == 2);
}

TEST_CASE("every isotropy lattice arrow is a digraph edge") {
  // maximal proper containments among isotropy subgroups up to conjugacy,
  // computed directly from the subgroup list
  const auto& tables = symmetry_tables();
  const auto iso = function_space_isotropy_subgroups();
  std::set<std::pair<int, int>> arrows;
  for (const auto& t : tables.types()) {
    std::vector<Subgroup> below;
    for (auto s : iso)
      if (s != t.representative && s.is_subset_of(t.representative)) below.push_back(s);
    for (auto s : below) {
      bool maximal = true;
      for (auto o : below)
        if (o != s && s.is_subset_of(o)) maximal = false;
      if (maximal) arrows.insert({t.index, tables.type_of(s)});
    }
  }
  const auto lib = isotropy_lattice_arrows();
  CHECK(std::set<std::pair<int, int>>(lib.begin(), lib.end()) == arrows);
  std::set<std::pair<int, int>> edges;
  for (const auto& e : bifurcation_digraph().edges()) edges.insert({e.mother, e.daughter});
  for (const auto& a : arrows) CHECK_MESSAGE(edges.count(a) == 1, a.first, " -> ", a.second);
}

TEST_CASE("edge style follows fix dimension and the normalizer quotient") {
  const auto& tables = symmetry_tables();
  for (const auto& e : bifurcation_digraph().edges()) {
    const auto mother = tables.type(e.mother).representative;
    CHECK(e.daughter_subgroup.is_subset_of(mother));
    CHECK(tables.type_of(e.daughter_subgroup) == e.daughter);
    const int nq = normalizer(e.daughter_subgroup, mother).order() / e.daughter_subgroup.order();
    EdgeStyle expect = EdgeStyle::dotted;
    if (e.fix_dim == 1) expect = nq == 2 ? EdgeStyle::solid : EdgeStyle::dashed;
    CHECK(e.style == expect);
    if (e.fix_dim == 1) CHECK(nq <= 2);
    // the quotient is the mother modulo the kernel of the component
    const auto& irreps = function_space_irreps(mother);
    const auto& ir = irreps[static_cast<std::size_t>(e.component_id)];
    CHECK(quotient_label(mother, ir.kernel) == e.quotient);
    CHECK(ir.dim == e.irrep_dim);
  }
}

TEST_CASE("classification of center eigenspaces") {
  const auto& basis = testing::level3_basis(50);
  const int m = basis.size();
  std::mt19937_64 rng(1);

  SUBCASE("D6 mother, V2: pitchfork to the rotation group") {
    const int j = mode_in(basis, 1, "V2");
    REQUIRE(j >= 0);
    const auto c = classify_degeneracy(1, unit_columns(m, {j}), basis, rng);
    CHECK(c.kind == DegeneracyKind::edge);
    REQUIRE(c.seeds.size() == 1);
    CHECK(c.seeds[0].daughter_type == 13);
    CHECK(c.seeds[0].edge->quotient == "Z2");
  }

  SUBCASE("D6 mother, V1: fold") {
    const int j = mode_in(basis, 1, "V1", 1);
    REQUIRE(j >= 0);
    const auto c = classify_degeneracy(1, unit_columns(m, {j}), basis, rng);
    CHECK(c.kind == DegeneracyKind::fold);
    CHECK(c.seeds.empty());
  }

  SUBCASE("rotation mother, V5: dotted seeds with daughter rho^3") {
    const int j = mode_in(basis, 1, "V5");
    REQUIRE(j >= 0);
    const auto c = classify_degeneracy(13, unit_columns(m, {j, j + 1}), basis, rng);
    CHECK(c.kind == DegeneracyKind::edge);
    REQUIRE(!c.seeds.empty());
    for (const auto& s : c.seeds) {
      CHECK(s.daughter_type == 19);
      CHECK(s.edge->style == EdgeStyle::dotted);
    }
  }

  SUBCASE("D6 mother, V5: dashed D3 with seeds e and -e") {
    const int j = mode_in(basis, 1, "V5");
    const auto c = classify_degeneracy(1, unit_columns(m, {j, j + 1}), basis, rng);
    CHECK(c.kind == DegeneracyKind::edge);
    int dashed = 0;
    for (const auto& s : c.seeds)
      if (s.edge->style == EdgeStyle::dashed) ++dashed;
    CHECK(dashed == 2);
  }

  SUBCASE("mixed components are accidental") {
    const int a = mode_in(basis, 1, "V1"), b = mode_in(basis, 1, "V2");
    const auto c = classify_degeneracy(1, unit_columns(m, {a, b}), basis, rng);
    CHECK(c.kind == DegeneracyKind::accidental);
    CHECK(c.seeds.empty());
  }

  SUBCASE("seed stabilizers are the daughter subgroups") {
    const auto& act = basis.coefficient_action();
    for (const auto& name : {"V2", "V3", "V4", "V5", "V6"}) {
      const int j = mode_in(basis, 1, name);
      REQUIRE(j >= 0);
      const int dim = (name[1] == '5' || name[1] == '6') ? 2 : 1;
      const Eigen::MatrixXd e = dim == 1 ? unit_columns(m, {j}) : unit_columns(m, {j, j + 1});
      const auto c = classify_degeneracy(1, e, basis, rng);
      for (const auto& s : c.seeds) {
        // isotropy inside the mother; the full stabilizer also holds elements -g
        CHECK(stabilizer_of(s.e, act, 1e-8, Subgroup::d6()) == s.daughter_subgroup);
        CHECK(symmetry_tables().type_of(s.daughter_subgroup) == s.daughter_type);
        CHECK(s.e.norm() == doctest::Approx(1.0));
      }
    }
  }
}
