#include <doctest.h>

#include <algorithm>
#include <random>

#include "snowbranch/geometry.hpp"
#include "snowbranch/representation.hpp"
#include "support.hpp"

using namespace snowbranch;

namespace {

Subgroup gen(std::initializer_list<GroupElement> g) { return Subgroup::generated_by(g); }

void check_homomorphism(const RepresentationAction& act) {
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b) {
      const auto ga = GroupElement::from_index(a), gb = GroupElement::from_index(b);
      const double err = (act.matrix(ga * gb) - act.matrix(ga) * act.matrix(gb)).cwiseAbs().maxCoeff();
      REQUIRE(err <= 1e-12);
    }
}

}  // namespace

TEST_CASE("grid and orbit actions are homomorphisms") {
  check_homomorphism(grid_action(build_grid(2)));
  check_homomorphism(regular_action());
}

TEST_CASE("grid action basics") {
  const auto g = build_grid(3);
  const auto act = grid_action(g);
  const int n = g.size();
  CHECK((act.matrix(GroupElement::identity()) - Eigen::MatrixXd::Identity(n, n)).norm() == 0.0);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd u = testing::random_vector(n, rng);
  CHECK((act.apply(GroupElement::minus_one(), u) + u).norm() == 0.0);
  Eigen::MatrixXd m = act.matrix(GroupElement::rho());
  Eigen::MatrixXd p = Eigen::MatrixXd::Identity(n, n);
  for (int k = 0; k < 12; ++k) p = p * m;
  CHECK((p - Eigen::MatrixXd::Identity(n, n)).norm() == 0.0);
  // apply agrees with the dense matrix
  for (auto e : all_elements()) CHECK((act.apply(e, u) - act.matrix(e) * u).norm() <= 1e-14);
}

TEST_CASE("averaging projectors") {
  const auto act = grid_action(build_grid(3));
  const int n = act.dimension();
  CHECK((average_projector(Subgroup::trivial(), act) - Eigen::MatrixXd::Identity(n, n)).norm() == 0.0);
  for (auto s : enumerate_subgroups()) {
    const Eigen::MatrixXd P = average_projector(s, act);
    CHECK((P * P - P).norm() <= 1e-10);
    CHECK((P - P.transpose()).norm() <= 1e-12);
    double tr = 0.0;
    for (auto g : s.members()) tr += act.trace(g);
    tr /= s.order();
    CHECK(P.trace() == doctest::Approx(tr).epsilon(1e-12));
    CHECK(fixed_dimension(s, act) == static_cast<int>(std::lround(tr)));
    if (s.contains(GroupElement::minus_one())) CHECK(P.norm() <= 1e-14);
  }
}

TEST_CASE("stabilizers") {
  const auto g = build_grid(3);
  const auto act = grid_action(g);
  const int n = g.size();
  CHECK(stabilizer_of(Eigen::VectorXd::Zero(n), act, 1e-9) == Subgroup::whole());

  std::mt19937_64 rng(9);
  const Eigen::VectorXd v = testing::random_vector(n, rng);
  CHECK(stabilizer_of(v, act, 1e-9) == Subgroup::trivial());
  const auto s = gen({GroupElement::sigma()});
  const Eigen::VectorXd u = average(s, act, v);
  CHECK(stabilizer_of(u, act, 1e-9) == s);
  for (auto e : all_elements()) CHECK(stabilizer_of(act.apply(e, u), act, 1e-9) == s.conjugate_by(e));

  // a fully symmetric positive bump has stabilizer D6
  Eigen::VectorXd bump(n);
  for (int i = 0; i < n; ++i) {
    const auto p = g.point(i);
    bump[i] = std::exp(-(p.x * p.x + p.y * p.y));
  }
  CHECK(stabilizer_of(bump, act, 1e-9) == Subgroup::d6());
}

TEST_CASE("isotypic decomposition of the grid action") {
  const auto act = grid_action(build_grid(3));
  const int n = act.dimension();

  SUBCASE("D6 has six components with irreducible dimensions 1,1,1,1,2,2") {
    const auto comps = isotypic_decompose(Subgroup::d6(), act);
    REQUIRE(comps.size() == 6);
    std::vector<int> dims;
    int total = 0;
    for (const auto& c : comps) {
      dims.push_back(c.type.dim);
      total += static_cast<int>(c.basis.cols());
      CHECK(c.irreducible.cols() == c.type.dim);
      // the irreducible subspace is invariant
      for (auto e : Subgroup::d6().members()) {
        const Eigen::MatrixXd img = act.apply(e, c.irreducible);
        CHECK((img - c.irreducible * (c.irreducible.transpose() * img)).norm() <= 1e-9);
      }
    }
    std::sort(dims.begin(), dims.end());
    CHECK(dims == std::vector<int>{1, 1, 1, 1, 2, 2});
    CHECK(total == n);
    CHECK(comps[0].type.is_trivial());
  }

  SUBCASE("rotations only: four components") {
    const auto comps = isotypic_decompose(gen({GroupElement::rho()}), act);
    CHECK(comps.size() == 4);
  }

  SUBCASE("trivial group: one component") {
    const auto comps = isotypic_decompose(Subgroup::trivial(), act);
    REQUIRE(comps.size() == 1);
    CHECK(comps[0].type.kernel == Subgroup::trivial());
    CHECK(comps[0].basis.cols() == n);
  }
}

TEST_CASE("isotypic projectors are complete and orthogonal") {
  const auto act = regular_action();
  for (const auto& t : symmetry_tables().types()) {
    const auto& irreps = function_space_irreps(t.representative);
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(12, 12);
    std::vector<Eigen::MatrixXd> ps;
    for (const auto& ir : irreps) {
      const Eigen::MatrixXd P = isotypic_projector(ir, act);
      CHECK((P * P - P).norm() <= 1e-10);
      for (const auto& Q : ps) CHECK((P * Q).norm() <= 1e-10);
      ps.push_back(P);
      sum += P;
    }
    if (t.index != 0) CHECK((sum - Eigen::MatrixXd::Identity(12, 12)).norm() <= 1e-10);
  }
}

TEST_CASE("irreducible characters of D6") {
  const auto& irreps = function_space_irreps(Subgroup::d6());
  REQUIRE(irreps.size() == 6);
  int one = 0, two = 0;
  for (const auto& ir : irreps) {
    double inner = 0.0;
    for (auto e : Subgroup::d6().members()) {
      const double c = ir.character[static_cast<std::size_t>(e.index())];
      inner += c * c;
    }
    CHECK(inner / 12.0 == doctest::Approx(1.0));
    (ir.dim == 1 ? one : two) += 1;
  }
  CHECK(one == 4);
  CHECK(two == 2);
}

TEST_CASE("quotient labels") {
  const auto d6 = Subgroup::d6();
  const auto rot = gen({GroupElement::rho()});
  CHECK(quotient_label(d6, rot) == "Z2");
  CHECK(quotient_label(d6, Subgroup::trivial()) == "D6");
  CHECK(quotient_label(d6, gen({GroupElement::rho().pow(3)})) == "D3");
  CHECK(quotient_label(rot, Subgroup::trivial()) == "Z6");
  CHECK(quotient_label(rot, gen({GroupElement::rho().pow(3)})) == "Z3");
}
