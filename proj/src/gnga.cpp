#include "snowbranch/gnga.hpp"

#include <cmath>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {

const char* newton_status_name(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::converged: return "converged";
    case NewtonStatus::max_iter: return "max_iter";
    case NewtonStatus::diverged: return "diverged";
    case NewtonStatus::collapsed: return "collapsed";
  }
  return "?";
}

GalerkinProblem::GalerkinProblem(const EigenBasis& basis) : basis_(&basis) {}

ModeSet GalerkinProblem::all_modes() const {
  ModeSet s(static_cast<std::size_t>(size()));
  for (int j = 0; j < size(); ++j) s[static_cast<std::size_t>(j)] = j;
  return s;
}

Eigen::VectorXd GalerkinProblem::evaluate_on_grid(const Eigen::VectorXd& a) const { return basis_->modes() * a; }

Eigen::VectorXd GalerkinProblem::project(const Eigen::VectorXd& u) const {
  return basis_->weight() * (basis_->modes().transpose() * u);
}

double GalerkinProblem::energy(double lambda, const Eigen::VectorXd& a) const {
  const Eigen::VectorXd u = evaluate_on_grid(a);
  double quad = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) quad += Nonlinearity::F(lambda, u[i]);
  return 0.5 * a.dot(basis_->eigenvalues().cwiseProduct(a)) - basis_->weight() * quad;
}

Eigen::VectorXd GalerkinProblem::gradient(double lambda, const Eigen::VectorXd& a) const {
  return gradient(lambda, a, all_modes());
}

Eigen::VectorXd GalerkinProblem::gradient(double lambda, const Eigen::VectorXd& a, const ModeSet& subset) const {
  const Eigen::VectorXd u = evaluate_on_grid(a);
  const Eigen::VectorXd fu = u.unaryExpr([lambda](double x) { return Nonlinearity::f(lambda, x); });
  const auto& psi = basis_->modes();
  const auto& ev = basis_->eigenvalues();
  Eigen::VectorXd g(static_cast<Eigen::Index>(subset.size()));
  for (std::size_t k = 0; k < subset.size(); ++k) {
    const int j = subset[k];
    g[static_cast<Eigen::Index>(k)] = ev[j] * a[j] - basis_->weight() * psi.col(j).dot(fu);
  }
  return g;
}

Eigen::MatrixXd GalerkinProblem::hessian(double lambda, const Eigen::VectorXd& a) const {
  return hessian(lambda, a, all_modes());
}

Eigen::MatrixXd GalerkinProblem::hessian(double lambda, const Eigen::VectorXd& a, const ModeSet& subset) const {
  const Eigen::VectorXd u = evaluate_on_grid(a);
  const Eigen::VectorXd fp = u.unaryExpr([lambda](double x) { return Nonlinearity::df(lambda, x); });
  const auto n = static_cast<Eigen::Index>(subset.size());
  Eigen::MatrixXd ps(basis_->grid_size(), n);
  for (Eigen::Index k = 0; k < n; ++k) ps.col(k) = basis_->modes().col(subset[static_cast<std::size_t>(k)]);
  const Eigen::MatrixXd weighted = ps.array().colwise() * fp.array();
  Eigen::MatrixXd h(n, n);
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r <= c; ++r) {
      double v = -basis_->weight() * ps.col(r).dot(weighted.col(c));
      if (r == c) v += basis_->eigenvalues()[subset[static_cast<std::size_t>(c)]];
      h(r, c) = v;
      h(c, r) = v;
    }
  }
  return h;
}

Eigen::MatrixXd GalerkinProblem::hessian_blocked(double lambda, const Eigen::VectorXd& a, int type) const {
  const int m = size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m, m);
  const auto& ncomp = function_space_irreps(symmetry_tables().type(type).representative).size();
  for (std::size_t c = 0; c < ncomp; ++c) {
    const auto modes = basis_->modes_in_component(type, static_cast<int>(c));
    if (modes.empty()) continue;
    const Eigen::MatrixXd hb = hessian(lambda, a, modes);
    for (std::size_t r = 0; r < modes.size(); ++r)
      for (std::size_t s = 0; s < modes.size(); ++s)
        h(modes[r], modes[s]) = hb(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
  }
  return h;
}

MorseInfo GalerkinProblem::morse(double lambda, const Eigen::VectorXd& a, int type) const {
  const auto ncomp = function_space_irreps(symmetry_tables().type(type).representative).size();
  std::vector<Eigen::VectorXd> eigs(ncomp);
  double hnorm = 0.0;
  for (std::size_t c = 0; c < ncomp; ++c) {
    const auto modes = basis_->modes_in_component(type, static_cast<int>(c));
    if (modes.empty()) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hessian(lambda, a, modes), Eigen::EigenvaluesOnly);
    eigs[c] = es.eigenvalues();
    hnorm = std::max(hnorm, eigs[c].cwiseAbs().maxCoeff());
  }
  MorseInfo info;
  info.threshold = 1e-6 * std::max(1.0, hnorm);
  info.component_index.assign(ncomp, 0);
  info.component_null.assign(ncomp, 0);
  for (std::size_t c = 0; c < ncomp; ++c) {
    for (Eigen::Index k = 0; k < eigs[c].size(); ++k) {
      if (eigs[c][k] < -info.threshold) ++info.component_index[c];
      else if (eigs[c][k] <= info.threshold) ++info.component_null[c];
    }
    info.index += info.component_index[c];
    info.null_count += info.component_null[c];
  }
  return info;
}

double GalerkinProblem::value_at(const Eigen::VectorXd& a, PlanePoint p) const {
  double v = 0.0;
  for (const auto& [idx, w] : basis_->grid().interpolation_stencil(p)) v += w * basis_->modes().row(idx).dot(a);
  return v;
}

Subgroup GalerkinProblem::stabilizer(const Eigen::VectorXd& a, double tol) const {
  return stabilizer_of(a, basis_->coefficient_action(), tol);
}

void GalerkinProblem::finish_point(SolutionPoint& p, int morse_type) const {
  const auto& tables = symmetry_tables();
  p.J = energy(p.lambda, p.a);
  p.stabilizer = stabilizer(p.a);
  p.symmetry_type = tables.type_of(p.stabilizer);
  if (morse_type < 0)
    morse_type = (p.symmetry_type >= 0 && tables.type(p.symmetry_type).representative == p.stabilizer)
                     ? p.symmetry_type
                     : kSymmetryTypeCount - 1;
  const auto mi = morse(p.lambda, p.a, morse_type);
  p.morse_index = mi.index;
  p.null_count = mi.null_count;
  p.component_mi = mi.component_index;
  p.component_null = mi.component_null;
}

namespace {

bool collapsed(const SolutionPoint& p, int expected_type) {
  if (expected_type < 0) return false;
  const auto rep = symmetry_tables().type(expected_type).representative;
  return p.stabilizer != rep && rep.is_subset_of(p.stabilizer);
}

}  // namespace

NewtonResult GalerkinProblem::newton_gnga(double lambda, const Eigen::VectorXd& a0,
                                          const NewtonSettings& settings) const {
  const ModeSet subset = settings.subset ? *settings.subset : all_modes();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(size());
  for (int j : subset) a[j] = a0[j];

  NewtonResult res;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = gradient(lambda, a, subset);
    const double gn = g.norm();
    if (!std::isfinite(gn) || !a.allFinite() || a.norm() >= settings.divergence_cap) {
      res.status = NewtonStatus::diverged;
      res.iterations = it;
      return res;
    }
    if (gn <= settings.tol) {
      res.iterations = it;
      res.point.lambda = lambda;
      res.point.a = a;
      res.point.gradient_norm = gn;
      finish_point(res.point, -1);
      res.status = collapsed(res.point, settings.expected_type) ? NewtonStatus::collapsed : NewtonStatus::converged;
      return res;
    }
    if (it >= settings.max_iter) {
      res.status = NewtonStatus::max_iter;
      res.iterations = it;
      return res;
    }
    const Eigen::MatrixXd h = hessian(lambda, a, subset);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(h);
    cod.setThreshold(settings.rank_threshold);
    if (cod.rank() < h.rows()) res.rank_deficient = true;
    const Eigen::VectorXd chi = cod.solve(g);
    for (std::size_t k = 0; k < subset.size(); ++k) a[subset[k]] -= chi[static_cast<Eigen::Index>(k)];
  }
}

PmOutcome pm_newton(const PmSystem& sys, Eigen::VectorXd x, double lambda, int k, const NewtonSettings& settings) {
  const auto kk = static_cast<Eigen::Index>(k);
  PmOutcome out;
  for (int it = 0;; ++it) {
    const Eigen::VectorXd g = sys.gradient(lambda, x);
    const double gn = g.norm();
    out.iterations = it;
    if (!std::isfinite(gn) || !std::isfinite(lambda) || !x.allFinite() || x.norm() >= settings.divergence_cap) {
      out.status = NewtonStatus::diverged;
      return out;
    }
    if (gn <= settings.tol) {
      out.status = NewtonStatus::converged;
      out.lambda = lambda;
      out.x = std::move(x);
      out.gradient_norm = gn;
      return out;
    }
    if (it >= settings.max_iter) {
      out.status = NewtonStatus::max_iter;
      return out;
    }
    Eigen::MatrixXd h = sys.hessian(lambda, x);
    h.col(kk) = sys.lambda_derivative(lambda, x);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(h);
    cod.setThreshold(settings.rank_threshold);
    if (cod.rank() < h.rows()) out.rank_deficient = true;
    const Eigen::VectorXd chi = cod.solve(g);
    const double frozen = x[kk];
    x -= chi;
    x[kk] = frozen;
    lambda -= chi[kk];
  }
}

NewtonResult GalerkinProblem::newton_pmgnga(const Eigen::VectorXd& a0, double lambda0, int k,
                                            const NewtonSettings& settings) const {
  const ModeSet subset = settings.subset ? *settings.subset : all_modes();
  int kpos = -1;
  for (std::size_t q = 0; q < subset.size(); ++q)
    if (subset[q] == k) kpos = static_cast<int>(q);
  if (kpos < 0) throw Error(fmt::format("pmGNGA: fixed mode {} is not in the active subset", k));
  if (a0[k] == 0.0) throw Error("pmGNGA: the fixed coefficient must be nonzero");

  const auto n = static_cast<Eigen::Index>(subset.size());
  auto embed = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(size());
    for (Eigen::Index q = 0; q < n; ++q) a[subset[static_cast<std::size_t>(q)]] = x[q];
    return a;
  };
  PmSystem sys;
  sys.gradient = [&](double lam, const Eigen::VectorXd& x) { return gradient(lam, embed(x), subset); };
  sys.hessian = [&](double lam, const Eigen::VectorXd& x) { return hessian(lam, embed(x), subset); };
  // d g_i / d lambda = -integral(u psi_i) = -a_i for a w-orthonormal basis
  sys.lambda_derivative = [](double, const Eigen::VectorXd& x) -> Eigen::VectorXd { return -x; };

  Eigen::VectorXd x(n);
  for (Eigen::Index q = 0; q < n; ++q) x[q] = a0[subset[static_cast<std::size_t>(q)]];
  const PmOutcome pm = pm_newton(sys, std::move(x), lambda0, kpos, settings);

  NewtonResult res;
  res.iterations = pm.iterations;
  res.rank_deficient = pm.rank_deficient;
  res.status = pm.status;
  if (pm.status != NewtonStatus::converged) return res;
  res.point.lambda = pm.lambda;
  res.point.a = embed(pm.x);
  res.point.gradient_norm = pm.gradient_norm;
  finish_point(res.point, -1);
  if (collapsed(res.point, settings.expected_type)) res.status = NewtonStatus::collapsed;
  return res;
}

ModeSet invariant_modes(const EigenBasis& basis, int type) { return basis.invariant_modes(type); }

}  // namespace snowbranch
