#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "snowbranch/continuation.hpp"
#include "snowbranch/errors.hpp"
#include "support.hpp"

using namespace snowbranch;

namespace {

ContinuationSettings base_settings() {
  ContinuationSettings s;
  s.lambda_min = 0.0;
  s.lambda_max = 40.0;
  s.threads = 2;
  return s;
}

SolutionPoint trivial_point(const GalerkinProblem& p, double lam) {
  SolutionPoint pt;
  pt.lambda = lam;
  pt.a = Eigen::VectorXd::Zero(p.size());
  p.finish_point(pt, 0);
  return pt;
}

int count_below(const Eigen::VectorXd& ev, double lam) {
  int n = 0;
  for (Eigen::Index j = 0; j < ev.size(); ++j)
    if (ev[j] < lam) ++n;
  return n;
}

const Branch* find_branch(const Diagram& d, const std::string& id) {
  for (const auto& b : d.branches)
    if (b.id == id) return &b;
  return nullptr;
}

const Diagram& level3_diagram() {
  static const Diagram dia = [] {
    static const GalerkinProblem p(testing::level3_basis(50));
    auto s = base_settings();
    s.primaries = 8;
    s.max_generation = 2;
    return orchestrate(p, s);
  }();
  return dia;
}

}  // namespace

TEST_CASE("trivial branch: Morse index and one record per eigenvalue cluster") {
  const auto& b = testing::level3_basis(20);
  const GalerkinProblem p(b);
  const auto& ev = b.eigenvalues();
  auto s = base_settings();
  Branch t;
  t.id = "b0";
  t.symmetry_type = 0;
  t.points.push_back(trivial_point(p, ev[b.size() - 1] + 1.0));
  std::mt19937_64 rng(1);
  const auto fr = follow_main_branch(p, t, 0.0, s, rng);
  CHECK(fr.branch.status == BranchStatus::complete);
  CHECK(fr.branch.points.back().lambda == 0.0);
  for (const auto& pt : fr.branch.points) {
    if (pt.null_count > 0) continue;
    CHECK(pt.morse_index == count_below(ev, pt.lambda));
  }
  const int clusters = b.clusters().back() + 1;
  REQUIRE(static_cast<int>(fr.records.size()) == clusters);
  CHECK(fr.warnings.empty());
  int doubles_at_2 = 0;
  for (const auto& r : fr.records) {
    // nearest eigenvalue and its cluster
    int j = 0;
    for (int k = 0; k < b.size(); ++k)
      if (std::abs(ev[k] - r.lambda_star) < std::abs(ev[j] - r.lambda_star)) j = k;
    CHECK(std::abs(r.lambda_star - ev[j]) <= 1e-6);
    const int size = static_cast<int>(
        std::count(b.clusters().begin(), b.clusters().end(), b.clusters()[static_cast<std::size_t>(j)]));
    CHECK(r.center_dim == size);
    CHECK(r.mi_before - r.mi_after == size);
    CHECK(r.clean);
    if (std::abs(ev[j] - ev[1]) <= 1e-8 * ev[1]) {
      ++doubles_at_2;
      CHECK(r.center_dim == 2);
    }
    // E is spanned by the coordinate vectors of the cluster
    double inside = 0.0;
    for (int k = 0; k < b.size(); ++k)
      if (b.clusters()[static_cast<std::size_t>(k)] == b.clusters()[static_cast<std::size_t>(j)])
        inside += r.center.row(k).squaredNorm();
    CHECK(inside == doctest::Approx(r.center_dim).epsilon(1e-10));
  }
  CHECK(doubles_at_2 == 1);
}

TEST_CASE("localization on a bracket around the first eigenvalue") {
  const auto& b = testing::level3_basis(20);
  const GalerkinProblem p(b);
  const double l1 = b.eigenvalues()[0];
  auto s = base_settings();
  std::mt19937_64 rng(1);
  const auto rec = localize_bifurcation(p, 0, trivial_point(p, l1 + 0.3), trivial_point(p, l1 - 0.2), s, rng);
  CHECK(std::abs(rec.lambda_star - l1) <= 1e-8);
  CHECK(rec.center_dim == 1);
  CHECK(std::abs(std::abs(rec.center(0, 0)) - 1.0) <= 1e-12);
  CHECK(rec.crossing);
  CHECK(rec.clean);
  CHECK(rec.classification.kind == DegeneracyKind::edge);
  REQUIRE(rec.classification.seeds.size() == 1);
  CHECK(rec.classification.seeds[0].daughter_type == 1);
}

TEST_CASE("collapse to a larger symmetry halves the step and ends the branch") {
  // a start point of type Gamma_1 right of lambda_1 whose only nearby solution
  // is u = 0: every Newton attempt collapses
  const auto& b = testing::level3_basis(20);
  const GalerkinProblem p(b);
  auto s = base_settings();
  Branch br;
  br.id = "fixture";
  br.symmetry_type = 1;
  SolutionPoint start;
  start.lambda = b.eigenvalues()[0] + 2.0;
  start.a = Eigen::VectorXd::Zero(p.size());
  start.a[0] = 1e-3;
  p.finish_point(start, 1);
  br.points.push_back(start);
  std::mt19937_64 rng(1);
  const auto fr = follow_main_branch(p, br, 0.0, s, rng);
  CHECK(fr.branch.status == BranchStatus::died_at_bifurcation);
  CHECK(fr.branch.points.size() == 1);
  CHECK(fr.branch.note.find("collapsed") != std::string::npos);
}

TEST_CASE("a first-generation diagram at level 3") {
  const auto& dia = level3_diagram();
  const auto& tables = symmetry_tables();
  const auto& dg = bifurcation_digraph();
  REQUIRE(!dia.branches.empty());
  CHECK(dia.branches[0].symmetry_type == 0);

  SUBCASE("primary branches come from the trivial branch with the predicted types") {
    int primaries = 0;
    for (const auto& r : dia.records) {
      if (r.mother_branch != "b0") continue;
      for (const auto& d : r.daughters) {
        const auto* br = find_branch(dia, d);
        REQUIRE(br != nullptr);
        ++primaries;
        bool predicted = false;
        for (const auto& sd : r.classification.seeds)
          if (sd.daughter_type == br->symmetry_type) predicted = true;
        CHECK(predicted);
      }
    }
    CHECK(primaries >= 8);
  }

  SUBCASE("every point carries the symmetry of its branch and is converged") {
    for (const auto& br : dia.branches) {
      const auto rep = tables.type(br.symmetry_type).representative;
      for (const auto& pt : br.points) {
        CHECK(pt.stabilizer == rep);
        CHECK(pt.gradient_norm <= 1e-8);
      }
    }
  }

  SUBCASE("a pitchfork edge gives one daughter, a dashed edge two") {
    bool saw_dashed = false;
    for (const auto& r : dia.records) {
      if (r.classification.kind != DegeneracyKind::edge || r.daughters.empty()) continue;
      std::map<const DigraphEdge*, int> per_edge;
      for (const auto& d : r.daughters) {
        const auto* br = find_branch(dia, d);
        for (const auto& sd : r.classification.seeds)
          if (sd.daughter_type == br->symmetry_type) {
            ++per_edge[sd.edge];
            break;
          }
      }
      for (const auto& [edge, n] : per_edge) {
        if (edge->style == EdgeStyle::solid) CHECK(n == 1);
        if (edge->style == EdgeStyle::dashed) {
          saw_dashed = true;
          CHECK(n == 2);
        }
      }
    }
    CHECK(saw_dashed);
  }

  SUBCASE("daughters of one record are not conjugate") {
    const auto& basis = testing::level3_basis(50);
    for (const auto& r : dia.records) {
      for (std::size_t i = 0; i < r.daughters.size(); ++i)
        for (std::size_t j = i + 1; j < r.daughters.size(); ++j) {
          const auto* x = find_branch(dia, r.daughters[i]);
          const auto* y = find_branch(dia, r.daughters[j]);
          if (x->symmetry_type != y->symmetry_type) continue;
          // compare at the lambda where both have their last stub point
          const auto& px = x->points.back();
          const auto& py = y->points.back();
          if (std::abs(px.lambda - py.lambda) > 1e-12) continue;
          CHECK(orbit_distance(basis, px.a, py.a) > 1e-4);
        }
    }
  }

  SUBCASE("daughter types follow the digraph") {
    for (const auto& br : dia.branches) {
      if (br.parent_bifurcation.empty()) continue;
      const auto it = std::find_if(dia.records.begin(), dia.records.end(),
                                   [&](const BifurcationRecord& r) { return r.id == br.parent_bifurcation; });
      REQUIRE(it != dia.records.end());
      bool edge = false;
      for (const auto& e : dg.edges())
        if (e.mother == it->mother_type && e.daughter == br.symmetry_type) edge = true;
      CHECK(edge);
    }
  }
}

TEST_CASE("runs are deterministic across thread counts") {
  const GalerkinProblem p(testing::level3_basis(20));
  auto s = base_settings();
  s.primaries = 4;
  s.max_generation = 1;
  s.threads = 1;
  const auto d1 = orchestrate(p, s);
  s.threads = 4;
  const auto d2 = orchestrate(p, s);
  REQUIRE(d1.branches.size() == d2.branches.size());
  REQUIRE(d1.records.size() == d2.records.size());
  for (std::size_t k = 0; k < d1.records.size(); ++k) CHECK(d1.records[k].lambda_star == d2.records[k].lambda_star);
  for (std::size_t k = 0; k < d1.branches.size(); ++k) {
    CHECK(d1.branches[k].id == d2.branches[k].id);
    CHECK(d1.branches[k].points.size() == d2.branches[k].points.size());
  }
}

TEST_CASE("trivial start and settings errors") {
  const auto& b = testing::level3_basis(20);
  auto s = base_settings();
  CHECK(trivial_start(b, s) == 40.0);
  s.primaries = 2;
  // the second eigenvalue shares a cluster with the third
  CHECK(trivial_start(b, s) == doctest::Approx(std::max(40.0, b.eigenvalues()[2] + 1.0)));
  const GalerkinProblem p(b);
  s.lambda_min = 5.0;
  s.lambda_max = 5.0;
  CHECK_THROWS_AS(orchestrate(p, s), ConfigError);
}
