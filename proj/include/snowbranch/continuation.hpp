#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snowbranch/digraph.hpp"
#include "snowbranch/gnga.hpp"

namespace snowbranch {

struct ContinuationSettings {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double step0 = 0.5;
  NewtonSettings newton;       // tol, max_iter, divergence cap; subset/type are set per branch
  double secant_tol = 1e-8;    // on the critical Hessian eigenvalue
  double null_tol = 1e-6;      // relative to max(1, |h|), for the center space
  double dedup_tol = 1e-4;     // relative orbit-aligned coefficient distance
  int success_run = 4;         // successes before the step is doubled
  int min_step_divisor = 32;
  double stub_t0 = 0.1;
  int stub_max_points = 20;
  double stub_budget_factor = 4.0;  // lambda budget of a stub, in units of step0
  int stub_switch_run = 3;          // consecutive leftward pmGNGA steps before switching to GNGA
  int dotted_angles = 4;
  int max_branches = 500;
  int max_points_per_branch = 20000;
  int max_generation = 64;
  int primaries = 0;  // >0: start the trivial branch above this many eigenvalues
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency
};

enum class BranchStatus { complete, truncated, died_at_bifurcation };
const char* branch_status_name(BranchStatus s);

struct Branch {
  std::string id;
  int symmetry_type = -1;
  std::vector<SolutionPoint> points;
  int gnga_start = 0;  // index of the first point found by plain GNGA continuation
  std::string parent_branch;
  std::string parent_bifurcation;
  int generation = 0;
  BranchStatus status = BranchStatus::complete;
  std::string note;
};

struct BifurcationRecord {
  std::string id;
  double lambda_star = 0.0;
  Eigen::VectorXd a_star;
  std::string mother_branch;
  int mother_type = -1;
  int mi_before = 0;  // at the larger lambda of the bracket
  int mi_after = 0;
  int center_dim = 0;
  int component_id = -1;
  Eigen::MatrixXd center;  // coefficient vectors spanning E
  double critical_eigenvalue = 0.0;
  bool clean = true;
  bool crossing = true;  // critical eigenvalue changes sign inside the bracket
  BifurcationClassification classification;
  std::vector<std::string> daughters;
  std::vector<std::string> unseeded;  // diagnostics for seeds that failed
  std::string note;
};

struct FollowResult {
  Branch branch;
  std::vector<BifurcationRecord> records;
  std::vector<std::string> warnings;
};

/// Continue a converged start point with plain GNGA toward lambda_final,
/// halving and doubling the step between step0/32 and step0. Every Morse
/// index change produces a localized BifurcationRecord.
FollowResult follow_main_branch(const GalerkinProblem& problem, Branch branch, double lambda_final,
                                const ContinuationSettings& settings, std::mt19937_64& rng);

/// Secant (regula falsi with bisection fallback) on the critical Hessian
/// eigenvalue between two converged points of a branch of the given type.
/// When the eigenvalue has one sign on [lower, upper] the bracket is widened
/// to `previous` if given; with no sign change at all the record comes back
/// with crossing = false.
BifurcationRecord localize_bifurcation(const GalerkinProblem& problem, int type, const SolutionPoint& upper,
                                       const SolutionPoint& lower, const ContinuationSettings& settings,
                                       std::mt19937_64& rng, const SolutionPoint* previous = nullptr);

/// Short daughter segment from one seed of a record, computed with pmGNGA.
/// The seed is first moved into the representative frame of its daughter
/// type. Returns an empty optional when every t down to t0/32 fails.
std::optional<Branch> seed_daughter(const GalerkinProblem& problem, const BifurcationRecord& record,
                                    const SeedVector& seed, const ContinuationSettings& settings, std::string* why);

/// Minimum over the 24 group elements of |R(g) a - b| / max(|b|, tiny).
double orbit_distance(const EigenBasis& basis, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Diagram {
  std::vector<Branch> branches;
  std::vector<BifurcationRecord> records;
  bool cap_exhausted = false;
  std::vector<std::string> warnings;
};

/// Starting lambda of the trivial branch: lambda_max, or just above the
/// cluster holding eigenvalue number `primaries` if that is larger.
double trivial_start(const EigenBasis& basis, const ContinuationSettings& settings);

/// The trivial branch from trivial_start down to lambda_min and, recursively,
/// every daughter branch, processed generation by generation.
Diagram orchestrate(const GalerkinProblem& problem, const ContinuationSettings& settings);

}  // namespace snowbranch
