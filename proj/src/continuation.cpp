#include "snowbranch/continuation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {

const char* branch_status_name(BranchStatus s) {
  switch (s) {
    case BranchStatus::complete: return "complete";
    case BranchStatus::truncated: return "truncated";
    case BranchStatus::died_at_bifurcation: return "died-at-bifurcation";
  }
  return "?";
}

namespace {

struct MiChange {
  bool any = false;
  bool valid = true;
  int component = -1;
};

MiChange mi_change(const SolutionPoint& a, const SolutionPoint& b, int type) {
  const auto& types = function_space_irreps(symmetry_tables().type(type).representative);
  MiChange ch;
  int changed = 0;
  for (std::size_t c = 0; c < types.size(); ++c) {
    const int d = b.component_mi[c] - a.component_mi[c];
    if (d == 0) continue;
    ++changed;
    ch.any = true;
    ch.component = static_cast<int>(c);
    if (std::abs(d) > types[c].dim) ch.valid = false;
  }
  if (changed > 1) ch.valid = false;
  return ch;
}

NewtonSettings branch_newton(const GalerkinProblem& problem, const ContinuationSettings& s, int type) {
  NewtonSettings ns = s.newton;
  ns.subset = problem.basis().invariant_modes(type);
  ns.expected_type = type;
  return ns;
}

Eigen::VectorXd sorted_block_eigenvalues(const GalerkinProblem& problem, const SolutionPoint& p, const ModeSet& modes) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.hessian(p.lambda, p.a, modes), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

}  // namespace

BifurcationRecord localize_bifurcation(const GalerkinProblem& problem, int type, const SolutionPoint& upper,
                                       const SolutionPoint& lower, const ContinuationSettings& settings,
                                       std::mt19937_64& rng, const SolutionPoint* previous) {
  const auto ch = mi_change(upper, lower, type);
  if (!ch.any) throw Error("localize_bifurcation: Morse index does not change across the bracket");
  const int c = ch.component;
  const int m1 = upper.component_mi[static_cast<std::size_t>(c)];
  const int m2 = lower.component_mi[static_cast<std::size_t>(c)];
  const int m = std::max(m1, m2);
  const int lo = std::min(m1, m2);
  const ModeSet modes = problem.basis().modes_in_component(type, c);
  const NewtonSettings ns = branch_newton(problem, settings, type);

  auto mu = [&](const SolutionPoint& p) { return sorted_block_eigenvalues(problem, p, modes)[m - 1]; };

  struct Node {
    SolutionPoint p;
    double f;     // value used for interpolation (Illinois-scaled)
    double true_f;
  };
  Node A{upper, mu(upper), 0.0}, B{lower, mu(lower), 0.0};
  A.true_f = A.f;
  B.true_f = B.f;
  std::string note;
  // An eigenvalue already negative but inside the Morse null threshold moves
  // the detected jump one step late. Look back one point for the sign change.
  // A bracket end that is already a root to secant_tol counts as well: steps
  // can land exactly on a trivial-branch eigenvalue.
  auto root = [&](const Node& n) { return std::abs(n.f) <= settings.secant_tol; };
  bool crossing = (A.f < 0) != (B.f < 0) || root(A) || root(B);
  if (!crossing && previous) {
    Node P{*previous, mu(*previous), 0.0};
    P.true_f = P.f;
    if ((P.f < 0) != (A.f < 0) || root(P)) {
      B = A;
      A = P;
      crossing = true;
    }
  }
  if (!crossing) note = "no sign change in the critical eigenvalue";
  Node best = std::abs(A.true_f) <= std::abs(B.true_f) ? A : B;
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (!crossing || std::abs(best.true_f) <= settings.secant_tol) break;
    if (std::abs(A.p.lambda - B.p.lambda) < 1e-12) break;
    const double a = A.p.lambda, b = B.p.lambda;
    double lam = 0.5 * (a + b);
    if (B.f != A.f) {
      const double s = (a * B.f - b * A.f) / (B.f - A.f);
      if (s > std::min(a, b) && s < std::max(a, b)) lam = s;
    }
    auto guess = std::abs(lam - a) < std::abs(lam - b) ? A.p.a : B.p.a;
    auto r = problem.newton_gnga(lam, guess, ns);
    if (!r.ok()) {
      lam = 0.5 * (a + b);
      r = problem.newton_gnga(lam, guess, ns);
    }
    if (!r.ok()) {
      note = "Newton failed inside the bracket; best bracket end kept";
      break;
    }
    const double f = mu(r.point);
    Node N{r.point, f, f};
    if (std::abs(f) < std::abs(best.true_f)) best = N;
    if ((f < 0) == (A.f < 0)) {
      A = N;
      if (side == -1) B.f *= 0.5;
      side = -1;
    } else {
      B = N;
      if (side == +1) A.f *= 0.5;
      side = +1;
    }
  }

  BifurcationRecord rec;
  rec.lambda_star = best.p.lambda;
  rec.a_star = best.p.a;
  rec.mother_type = type;
  rec.mi_before = upper.morse_index;
  rec.mi_after = lower.morse_index;
  rec.center_dim = m - lo;
  rec.component_id = c;
  rec.critical_eigenvalue = best.true_f;
  rec.note = note;
  rec.crossing = crossing;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.hessian(best.p.lambda, best.p.a, modes));
  const double hnorm = es.eigenvalues().cwiseAbs().maxCoeff();
  const double null_tol = settings.null_tol * std::max(1.0, hnorm);
  rec.center = Eigen::MatrixXd::Zero(problem.size(), rec.center_dim);
  for (int q = 0; q < rec.center_dim; ++q) {
    if (std::abs(es.eigenvalues()[lo + q]) > null_tol) rec.clean = false;
    for (std::size_t r = 0; r < modes.size(); ++r)
      rec.center(modes[r], q) = es.eigenvectors()(static_cast<Eigen::Index>(r), lo + q);
  }
  if (std::abs(rec.mi_after - rec.mi_before) != rec.center_dim) rec.clean = false;
  if (std::abs(rec.critical_eigenvalue) > settings.secant_tol || !crossing) rec.clean = false;
  rec.classification = classify_degeneracy(type, rec.center, problem.basis(), rng, settings.dotted_angles);
  return rec;
}

FollowResult follow_main_branch(const GalerkinProblem& problem, Branch branch, double lambda_final,
                                const ContinuationSettings& settings, std::mt19937_64& rng) {
  if (branch.points.empty()) throw Error("follow_main_branch needs a converged start point");
  FollowResult out;
  const int type = branch.symmetry_type;
  const NewtonSettings ns = branch_newton(problem, settings, type);
  const double floor = settings.step0 / settings.min_step_divisor;
  double step = settings.step0;
  int successes = 0;
  branch.status = BranchStatus::complete;
  SolutionPoint cur = branch.points.back();

  while (cur.lambda > lambda_final + 1e-12) {
    if (static_cast<int>(branch.points.size()) >= settings.max_points_per_branch) {
      branch.status = BranchStatus::truncated;
      branch.note = "point cap reached";
      break;
    }
    const double lam = std::max(cur.lambda - step, lambda_final);
    auto r = problem.newton_gnga(lam, cur.a, ns);
    bool ok = r.ok();
    MiChange ch;
    if (ok) {
      ch = mi_change(cur, r.point, type);
      ok = ch.valid;
    }
    if (!ok) {
      step *= 0.5;
      successes = 0;
      if (step < floor * (1.0 - 1e-12)) {
        if (r.status == NewtonStatus::collapsed) {
          branch.status = BranchStatus::died_at_bifurcation;
          branch.note = fmt::format("collapsed to a larger symmetry near lambda = {:.6f}", lam);
        } else {
          branch.status = BranchStatus::truncated;
          branch.note = fmt::format("step floor reached near lambda = {:.6f} ({})", lam,
                                    r.ok() ? "Morse index jump" : newton_status_name(r.status));
        }
        break;
      }
      continue;
    }
    if (ch.any) {
      const SolutionPoint* prev = branch.points.size() >= 2 ? &branch.points[branch.points.size() - 2] : nullptr;
      auto rec = localize_bifurcation(problem, type, cur, r.point, settings, rng, prev);
      if (rec.crossing) {
        rec.mother_branch = branch.id;
        out.records.push_back(std::move(rec));
      } else {
        out.warnings.push_back(fmt::format(
            "Morse index {} -> {} near lambda = {:.6f} without a sign change of the critical eigenvalue; "
            "treated as a null-threshold crossing",
            cur.morse_index, r.point.morse_index, r.point.lambda));
      }
    }
    branch.points.push_back(r.point);
    cur = r.point;
    if (++successes >= settings.success_run) {
      step = std::min(2.0 * step, settings.step0);
      successes = 0;
    }
  }
  out.branch = std::move(branch);
  return out;
}

std::optional<Branch> seed_daughter(const GalerkinProblem& problem, const BifurcationRecord& record,
                                    const SeedVector& seed, const ContinuationSettings& settings, std::string* why) {
  auto fail = [&](std::string msg) -> std::optional<Branch> {
    if (why) *why = std::move(msg);
    return std::nullopt;
  };
  const auto& tables = symmetry_tables();
  const int d = seed.daughter_type;
  if (d < 0) return fail("seed stabilizer is not an isotropy subgroup");
  const auto& act = problem.basis().coefficient_action();
  const auto g = tables.conjugator_to_representative(seed.daughter_subgroup);
  Eigen::VectorXd a = act.apply(g, record.a_star);
  Eigen::VectorXd e = act.apply(g, seed.e);
  const ModeSet subset = problem.basis().invariant_modes(d);
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(problem.size());
  for (int j : subset) mask[j] = 1.0;
  if ((e - e.cwiseProduct(mask)).norm() > 1e-6) return fail("seed direction is not in the daughter fixed space");
  a = a.cwiseProduct(mask);
  e = e.cwiseProduct(mask);
  Eigen::Index k = 0;
  e.cwiseAbs().maxCoeff(&k);

  NewtonSettings ns = settings.newton;
  ns.subset = subset;
  ns.expected_type = d;

  Branch b;
  b.symmetry_type = d;
  const double budget = settings.stub_budget_factor * settings.step0;
  const double t_min = settings.stub_t0 / 32.0;
  double t = settings.stub_t0;
  double lam = record.lambda_star;
  int left_run = 0;
  std::string last_failure = "none";
  while (static_cast<int>(b.points.size()) < settings.stub_max_points) {
    if (record.lambda_star - lam >= budget) break;
    if (lam < settings.lambda_min) break;
    if (t < t_min * (1.0 - 1e-12)) break;
    auto r = problem.newton_pmgnga(a + t * e, lam, static_cast<int>(k), ns);
    if (r.ok()) {
      const double prev = lam;
      b.points.push_back(r.point);
      lam = r.point.lambda;
      a = r.point.a;
      left_run = lam < prev ? left_run + 1 : 0;
      if (left_run >= settings.stub_switch_run) break;
    } else {
      last_failure = newton_status_name(r.status);
      t *= 0.5;
    }
  }
  if (b.points.empty()) return fail(fmt::format("pmGNGA failed down to t = {:g} (last: {})", t_min, last_failure));
  b.gnga_start = static_cast<int>(b.points.size());
  return b;
}

double orbit_distance(const EigenBasis& basis, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const auto& act = basis.coefficient_action();
  const double scale = std::max(b.norm(), 1e-300);
  double best = std::numeric_limits<double>::infinity();
  for (auto g : all_elements()) best = std::min(best, (act.apply(g, a) - b).norm() / scale);
  return best;
}

namespace {

bool same_orbit_branch(const GalerkinProblem& problem, const Branch& s, const Branch& t,
                       const ContinuationSettings& settings) {
  if (s.symmetry_type != t.symmetry_type || s.points.empty() || t.points.empty()) return false;
  double smin = s.points.front().lambda, smax = smin;
  for (const auto& p : s.points) {
    smin = std::min(smin, p.lambda);
    smax = std::max(smax, p.lambda);
  }
  const double mid = 0.5 * (smin + smax);
  const SolutionPoint* pt = nullptr;
  for (const auto& p : t.points) {
    if (p.lambda < smin || p.lambda > smax) continue;
    if (!pt || std::abs(p.lambda - mid) < std::abs(pt->lambda - mid)) pt = &p;
  }
  if (!pt) return false;
  const SolutionPoint* ps = &s.points.front();
  for (const auto& p : s.points)
    if (std::abs(p.lambda - pt->lambda) < std::abs(ps->lambda - pt->lambda)) ps = &p;
  NewtonSettings ns = branch_newton(problem, settings, s.symmetry_type);
  const auto r = problem.newton_gnga(pt->lambda, ps->a, ns);
  if (!r.ok()) return false;
  return orbit_distance(problem.basis(), r.point.a, pt->a) <= settings.dedup_tol;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Job {
  std::size_t record;
  std::size_t seed;
  std::optional<FollowResult> result;
  std::string why;
};

}  // namespace

double trivial_start(const EigenBasis& basis, const ContinuationSettings& settings) {
  if (settings.primaries <= 0) return settings.lambda_max;
  if (settings.primaries > basis.size())
    throw ConfigError(fmt::format("primaries = {} exceeds the {} basis modes", settings.primaries, basis.size()));
  const auto& cl = basis.clusters();
  int k = settings.primaries - 1;
  while (k + 1 < basis.size() && cl[static_cast<std::size_t>(k + 1)] == cl[static_cast<std::size_t>(k)]) ++k;
  return std::max(settings.lambda_max, basis.eigenvalues()[k] + 1.0);
}

Diagram orchestrate(const GalerkinProblem& problem, const ContinuationSettings& settings) {
  if (!(settings.lambda_min < settings.lambda_max))
    throw ConfigError(fmt::format("empty lambda window [{}, {}]", settings.lambda_min, settings.lambda_max));
  if (!(settings.step0 > 0)) throw ConfigError("step0 must be positive");

  Diagram dia;
  int next_branch = 0, next_record = 0;
  auto adopt_records = [&](std::vector<BifurcationRecord>& recs, std::vector<std::size_t>& pending) {
    for (auto& r : recs) {
      r.id = fmt::format("r{}", next_record++);
      pending.push_back(dia.records.size());
      dia.records.push_back(std::move(r));
    }
  };

  // trivial branch
  std::vector<std::size_t> pending;
  {
    NewtonSettings ns = settings.newton;
    ns.subset = ModeSet{};
    ns.expected_type = 0;
    auto start = problem.newton_gnga(trivial_start(problem.basis(), settings), Eigen::VectorXd::Zero(problem.size()), ns);
    if (!start.ok()) throw NumericalError("trivial solution did not converge");
    Branch t;
    t.id = fmt::format("b{}", next_branch++);
    t.symmetry_type = 0;
    t.points.push_back(start.point);
    std::mt19937_64 rng(mix(settings.seed));
    auto fr = follow_main_branch(problem, std::move(t), settings.lambda_min, settings, rng);
    for (auto& w : fr.warnings) dia.warnings.push_back(fr.branch.id + ": " + w);
    dia.branches.push_back(std::move(fr.branch));
    adopt_records(fr.records, pending);
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned nthreads = settings.threads > 0 ? static_cast<unsigned>(settings.threads) : hw;

  for (int gen = 1; !pending.empty(); ++gen) {
    if (gen > settings.max_generation) {
      dia.cap_exhausted = true;
      dia.warnings.push_back(fmt::format("generation cap {} reached with {} unprocessed bifurcations",
                                         settings.max_generation, pending.size()));
      break;
    }
    std::vector<Job> jobs;
    for (auto ri : pending) {
      const auto& rec = dia.records[ri];
      if (rec.classification.kind != DegeneracyKind::edge) continue;
      for (std::size_t si = 0; si < rec.classification.seeds.size(); ++si) jobs.push_back({ri, si, std::nullopt, {}});
    }
    pending.clear();

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t j = cursor.fetch_add(1);
        if (j >= jobs.size()) return;
        auto& job = jobs[j];
        const auto& rec = dia.records[job.record];
        const auto& seed = rec.classification.seeds[job.seed];
        auto stub = seed_daughter(problem, rec, seed, settings, &job.why);
        if (!stub) continue;
        std::mt19937_64 rng(mix(settings.seed ^ mix(job.record * 1000003ULL + job.seed)));
        job.result = follow_main_branch(problem, std::move(*stub), settings.lambda_min, settings, rng);
      }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < std::min<unsigned>(nthreads, static_cast<unsigned>(jobs.size())); ++k)
      pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    for (auto& job : jobs) {
      auto& rec = dia.records[job.record];
      const auto& seed = rec.classification.seeds[job.seed];
      if (!job.result) {
        rec.unseeded.push_back(fmt::format("seed {} -> type {}: {}", job.seed, seed.daughter_type, job.why));
        continue;
      }
      Branch& br = job.result->branch;
      bool dup = false;
      for (const auto& did : rec.daughters) {
        const auto it = std::find_if(dia.branches.begin(), dia.branches.end(),
                                     [&](const Branch& b) { return b.id == did; });
        if (it != dia.branches.end() && same_orbit_branch(problem, br, *it, settings)) {
          dup = true;
          break;
        }
      }
      if (dup) continue;
      if (static_cast<int>(dia.branches.size()) >= settings.max_branches) {
        if (!dia.cap_exhausted)
          dia.warnings.push_back(fmt::format("branch cap {} reached", settings.max_branches));
        dia.cap_exhausted = true;
        continue;
      }
      br.id = fmt::format("b{}", next_branch++);
      br.parent_branch = rec.mother_branch;
      br.parent_bifurcation = rec.id;
      br.generation = gen;
      rec.daughters.push_back(br.id);
      for (auto& r : job.result->records) r.mother_branch = br.id;
      for (auto& w : job.result->warnings) dia.warnings.push_back(br.id + ": " + w);
      dia.branches.push_back(std::move(br));
      adopt_records(job.result->records, pending);
    }
  }
  return dia;
}

}  // namespace snowbranch
