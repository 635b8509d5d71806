#include "snowbranch/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {

SparseMatrix assemble_laplacian(const SnowflakeGrid& grid) {
  const int n = grid.size();
  const double h = grid.spacing();
  const double c = 2.0 / (3.0 * h * h);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, c * (12 - grid.degree(i)));
    for (int j : grid.neighbors(i)) trip.emplace_back(i, j, -c);
  }
  SparseMatrix L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

double quadrature_weight(const SnowflakeGrid& grid) {
  const double h = grid.spacing();
  return 0.5 * std::sqrt(3.0) * h * h;
}

namespace {

Eigen::VectorXd column_residuals(const SparseMatrix& L, const Eigen::VectorXd& vals, const Eigen::MatrixXd& vecs) {
  const Eigen::MatrixXd r = L * vecs - vecs * vals.asDiagonal();
  return r.colwise().norm().transpose();
}

// Orthonormalize the columns of b against the orthonormal columns of v and
// among themselves; columns that become negligible are dropped.
Eigen::MatrixXd orthonormalize_against(const Eigen::MatrixXd& v, Eigen::MatrixXd b) {
  // unit columns first, so the rank cut below is relative to each column
  for (Eigen::Index j = 0; j < b.cols(); ++j) {
    const double n0 = b.col(j).norm();
    if (n0 > 0.0) b.col(j) /= n0;
  }
  for (int pass = 0; pass < 2; ++pass) {
    if (v.cols() > 0) {
      b -= v * (v.transpose() * b);
      b -= v * (v.transpose() * b);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
    const Eigen::MatrixXd r = qr.matrixR().template triangularView<Eigen::Upper>();
    Eigen::Index rank = 0;
    while (rank < std::min(r.rows(), r.cols()) && std::abs(r(rank, rank)) > 1e-10) ++rank;
    b = qr.householderQ() * Eigen::MatrixXd::Identity(b.rows(), rank);
  }
  return b;
}

}  // namespace

Eigenpairs dense_eigenpairs(const SparseMatrix& L, int count) {
  const int n = static_cast<int>(L.rows());
  if (count < 1 || count > n) throw ConfigError(fmt::format("requested {} eigenpairs of a {}x{} matrix", count, n, n));
  const Eigen::MatrixXd dense = Eigen::MatrixXd(L);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
  if (es.info() != Eigen::Success) throw NumericalError("dense symmetric eigensolver failed");
  Eigenpairs out;
  out.values = es.eigenvalues().head(count);
  out.vectors = es.eigenvectors().leftCols(count);
  out.residuals = column_residuals(L, out.values, out.vectors);
  return out;
}

Eigenpairs iterative_eigenpairs(const SparseMatrix& L, int count, const EigenOptions& opts) {
  const int n = static_cast<int>(L.rows());
  if (count < 1 || count > n) throw ConfigError(fmt::format("requested {} eigenpairs of a {}x{} matrix", count, n, n));

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(L);
  if (ldlt.info() != Eigen::Success) throw NumericalError("sparse LDL^T factorization of the Laplacian failed");

  const int work = std::min(n, count + std::max(opts.block_size, count / 5 + 4));
  const int kmax = std::min(n, std::max(2 * work, work + 40));

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd block(n, work);
  for (int j = 0; j < work; ++j)
    for (int i = 0; i < n; ++i) block(i, j) = nd(rng);

  Eigen::MatrixXd V(n, 0), LV(n, 0);
  Eigenpairs out;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const Eigen::MatrixXd add = orthonormalize_against(V, block);
    if (add.cols() > 0) {
      Eigen::MatrixXd nv(n, V.cols() + add.cols()), nlv(n, V.cols() + add.cols());
      nv << V, add;
      nlv << LV, L * add;
      V = std::move(nv);
      LV = std::move(nlv);
    }
    Eigen::MatrixXd H = V.transpose() * LV;
    H = 0.5 * (H + H.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    const int keep = std::min<int>(work, static_cast<int>(V.cols()));
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(keep);
    const Eigen::VectorXd theta = es.eigenvalues().head(keep);
    Eigen::MatrixXd X = V * Y;
    Eigen::MatrixXd LX = LV * Y;

    const Eigen::MatrixXd R = LX - X * theta.asDiagonal();
    const Eigen::VectorXd res = R.colwise().norm().transpose();
    if (keep >= count && res.head(count).maxCoeff() <= opts.residual_tol) {
      out.values = theta.head(count);
      out.vectors = X.leftCols(count);
      out.residuals = column_residuals(L, out.values, out.vectors);
      return out;
    }
    if (V.cols() + keep > kmax) {
      V = X;
      LV = LX;
    }
    // Expand with L^-1 applied to the residuals. This spans the same space as
    // L^-1 X modulo X but does not lose nearly converged directions to
    // cancellation. Converged Ritz vectors stay in V without expansion.
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < keep; ++j)
      if (j >= count || res[j] > opts.residual_tol) active.push_back(j);
    block = ldlt.solve(R(Eigen::all, active));
  }
  throw NumericalError(fmt::format("iterative eigensolver did not reach residual {:g} in {} sweeps",
                                   opts.residual_tol, opts.max_sweeps));
}

Eigenpairs smallest_eigenpairs(const SparseMatrix& L, int count, const EigenOptions& opts) {
  if (opts.method == "dense") return dense_eigenpairs(L, count);
  if (opts.method == "iterative") return iterative_eigenpairs(L, count, opts);
  if (opts.method != "auto") throw ConfigError(fmt::format("unknown eigensolver method '{}'", opts.method));
  return L.rows() <= 1500 ? dense_eigenpairs(L, count) : iterative_eigenpairs(L, count, opts);
}

std::vector<int> cluster_ids(const Eigen::VectorXd& values, double tol) {
  std::vector<int> ids(static_cast<std::size_t>(values.size()));
  int id = 0;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (k > 0 && values[k] - values[k - 1] > tol * std::max(1.0, std::abs(values[k]))) ++id;
    ids[static_cast<std::size_t>(k)] = id;
  }
  return ids;
}

std::string d6_component_name(const IrrepType& type) {
  const double r = type.character[static_cast<std::size_t>(GroupElement::rho().index())];
  const double s = type.character[static_cast<std::size_t>(GroupElement::sigma().index())];
  if (type.dim == 1) {
    if (r > 0) return s > 0 ? "V1" : "V2";
    return s > 0 ? "V3" : "V4";
  }
  // rho^3 acts as +1 on V5 and -1 on V6; the rotation character is then -1 or +1
  return r < 0 ? "V5" : "V6";
}

namespace {

void orient(Eigen::Ref<Eigen::VectorXd> v) {
  const double m = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= m * (1.0 - 1e-9)) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

struct Unit {
  double lambda;
  std::vector<Eigen::VectorXd> vecs;
};

}  // namespace

EigenBasis symmetry_adapt(std::shared_ptr<const SnowflakeGrid> grid, const Eigenpairs& pairs, int requested,
                          double cluster_tol) {
  const RepresentationAction action = grid_action(*grid);
  const SparseMatrix L = assemble_laplacian(*grid);
  const auto& types = function_space_irreps(Subgroup::whole());
  const auto sigma = GroupElement::sigma();
  const auto rho2 = GroupElement::rho().pow(2);
  const auto rho4 = GroupElement::rho().pow(4);

  const int n = grid->size();
  const int m = static_cast<int>(pairs.values.size());
  const auto ids = cluster_ids(pairs.values, cluster_tol);

  Eigen::MatrixXd modes(n, m);
  Eigen::VectorXd values(m);
  int out = 0;
  int start = 0;
  while (start < m) {
    int stop = start + 1;
    while (stop < m && ids[static_cast<std::size_t>(stop)] == ids[static_cast<std::size_t>(start)]) ++stop;
    const int c = stop - start;
    const Eigen::MatrixXd q = pairs.vectors.middleCols(start, c);

    std::vector<Unit> units;
    int found = 0;
    for (const auto& t : types) {
      Eigen::MatrixXd b = apply_isotypic_projector(t, action, q);
      if (t.dim == 2) b = 0.5 * (b + action.apply(sigma, b));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b.transpose() * b);
      std::vector<Eigen::VectorXd> picked;
      for (int k = c - 1; k >= 0; --k) {
        if (es.eigenvalues()[k] < 0.5) break;
        Eigen::VectorXd v = b * es.eigenvectors().col(k);
        for (int pass = 0; pass < 2; ++pass)
          for (const auto& p : picked) v -= p.dot(v) * p;
        v.normalize();
        picked.push_back(v);
      }
      for (auto& v : picked) {
        orient(v);
        Unit u;
        u.vecs.push_back(v);
        if (t.dim == 2) {
          Eigen::VectorXd w = action.apply(rho2, v) - action.apply(rho4, v);
          w.normalize();
          orient(w);
          u.vecs.push_back(w);
        }
        double lam = 0.0;
        for (const auto& x : u.vecs) lam += x.dot(L * x);
        u.lambda = lam / static_cast<double>(u.vecs.size());
        found += static_cast<int>(u.vecs.size());
        units.push_back(std::move(u));
      }
    }
    if (found != c)
      throw ConsistencyError(fmt::format(
          "eigenvalue cluster at {:.10g} (size {}) splits into {} isotypic vectors; adjust cluster_tol",
          pairs.values[start], c, found));
    std::stable_sort(units.begin(), units.end(), [](const Unit& a, const Unit& b) { return a.lambda < b.lambda; });
    for (const auto& u : units) {
      for (const auto& x : u.vecs) {
        modes.col(out) = x;
        values[out] = x.dot(L * x);
        ++out;
      }
    }
    start = stop;
  }
  const double w = quadrature_weight(*grid);
  modes /= std::sqrt(w);
  return EigenBasis::assemble(std::move(grid), requested, std::move(values), std::move(modes), cluster_tol);
}

EigenBasis EigenBasis::assemble(std::shared_ptr<const SnowflakeGrid> grid, int requested, Eigen::VectorXd values,
                                Eigen::MatrixXd modes, double cluster_tol) {
  EigenBasis b;
  b.level_ = grid->level();
  b.requested_ = requested;
  b.weight_ = quadrature_weight(*grid);
  b.grid_ = std::move(grid);
  b.values_ = std::move(values);
  b.modes_ = std::move(modes);
  b.build_actions_and_tags(cluster_tol);
  return b;
}

void EigenBasis::build_actions_and_tags(double cluster_tol) {
  grid_action_ = snowbranch::grid_action(*grid_);
  clusters_ = cluster_ids(values_, cluster_tol);
  const int m = size();

  std::array<Eigen::MatrixXd, kGroupOrder> mats;
  for (int e = 0; e < 12; ++e) {
    const auto g = GroupElement::from_index(e);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    int start = 0;
    while (start < m) {
      int stop = start + 1;
      while (stop < m && clusters_[static_cast<std::size_t>(stop)] == clusters_[static_cast<std::size_t>(start)]) ++stop;
      const int c = stop - start;
      const Eigen::MatrixXd psi = modes_.middleCols(start, c);
      const Eigen::MatrixXd blk = weight_ * psi.transpose() * grid_action_.apply(g, psi);
      const double dev = (blk.transpose() * blk - Eigen::MatrixXd::Identity(c, c)).norm();
      if (dev > 1e-6)
        throw ConsistencyError(fmt::format("coefficient action of {} is not orthogonal on cluster at mode {} ({:g})",
                                           g.name(), start, dev));
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(blk, Eigen::ComputeFullU | Eigen::ComputeFullV);
      r.block(start, start, c, c) = svd.matrixU() * svd.matrixV().transpose();
      start = stop;
    }
    // entries that are zero up to rounding are set to exact zero so that
    // coordinate subspaces stay exactly invariant
    r = r.unaryExpr([](double x) { return std::abs(x) < 1e-13 ? 0.0 : x; });
    mats[static_cast<std::size_t>(e)] = r;
    mats[static_cast<std::size_t>(e + 12)] = -r;
  }
  coeff_action_ = RepresentationAction::dense(std::move(mats));

  const auto& tables = symmetry_tables();
  for (int i = 0; i < kSymmetryTypeCount; ++i) {
    const auto& types = function_space_irreps(tables.type(i).representative);
    auto& tag = tags_[static_cast<std::size_t>(i)];
    tag.assign(static_cast<std::size_t>(m), -1);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd ej = Eigen::VectorXd::Unit(m, j);
      for (std::size_t c = 0; c < types.size(); ++c) {
        const Eigen::VectorXd pj = apply_isotypic_projector(types[c], coeff_action_, ej);
        if ((pj - ej).norm() <= 1e-8) {
          tag[static_cast<std::size_t>(j)] = static_cast<int>(c);
          break;
        }
      }
      if (tag[static_cast<std::size_t>(j)] < 0)
        throw ConsistencyError(fmt::format("mode {} is not inside a single isotypic component of {}", j,
                                           tables.type(i).name));
    }
  }
}

std::vector<int> EigenBasis::modes_in_component(int type, int component) const {
  std::vector<int> out;
  const auto& tag = tags(type);
  for (std::size_t j = 0; j < tag.size(); ++j)
    if (tag[j] == component) out.push_back(static_cast<int>(j));
  return out;
}

std::vector<int> EigenBasis::invariant_modes(int type) const {
  const auto& t = symmetry_tables().type(type);
  const auto& types = function_space_irreps(t.representative);
  std::vector<int> out;
  for (std::size_t c = 0; c < types.size(); ++c)
    if (types[c].is_trivial()) out = modes_in_component(type, static_cast<int>(c));
  const int expected = fixed_dimension(t.representative, coeff_action_);
  if (static_cast<int>(out.size()) != expected)
    throw ConsistencyError(fmt::format("fix({}) has {} coordinate modes but trace formula gives {}", t.name,
                                       out.size(), expected));
  return out;
}

EigenBasis compute_basis(int level, int modes, const EigenOptions& opts) {
  auto grid = std::make_shared<const SnowflakeGrid>(build_grid(level));
  const SparseMatrix L = assemble_laplacian(*grid);
  const int n = grid->size();
  if (modes < 1 || modes > n) throw ConfigError(fmt::format("M = {} outside 1..{} for level {}", modes, n, level));

  int extra = opts.complete_clusters ? std::min(n - modes, 6) : 0;
  for (;;) {
    Eigenpairs pairs = smallest_eigenpairs(L, modes + extra, opts);
    int m = modes;
    if (opts.complete_clusters) {
      const auto ids = cluster_ids(pairs.values, opts.cluster_tol);
      while (m < modes + extra && ids[static_cast<std::size_t>(m)] == ids[static_cast<std::size_t>(m - 1)]) ++m;
      if (m == modes + extra && modes + extra < n) {
        extra = std::min(n - modes, 2 * extra + 2);
        continue;
      }
    }
    pairs.values.conservativeResize(m);
    pairs.vectors.conservativeResize(Eigen::NoChange, m);
    pairs.residuals.conservativeResize(m);
    return symmetry_adapt(std::move(grid), pairs, modes, opts.cluster_tol);
  }
}

}  // namespace snowbranch
