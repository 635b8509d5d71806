#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "snowbranch/group.hpp"
#include "snowbranch/spectrum.hpp"

namespace snowbranch {

/// f(u) = lambda u + u^3 with its derivative and primitive. Swapping in another
/// odd superlinear nonlinearity only touches this struct.
struct Nonlinearity {
  static double f(double lambda, double u) { return lambda * u + u * u * u; }
  static double df(double lambda, double u) { return lambda + 3.0 * u * u; }
  static double F(double lambda, double u) { return 0.5 * lambda * u * u + 0.25 * u * u * u * u; }
};

using ModeSet = std::vector<int>;

struct MorseInfo {
  int index = 0;       // negative eigenvalues
  int null_count = 0;  // eigenvalues within the zero threshold
  std::vector<int> component_index;  // per isotypic component of the symmetry representative
  std::vector<int> component_null;
  double threshold = 0.0;
};

struct SolutionPoint {
  double lambda = 0.0;
  Eigen::VectorXd a;
  double J = 0.0;
  double gradient_norm = 0.0;
  int morse_index = 0;
  int null_count = 0;
  int symmetry_type = -1;
  Subgroup stabilizer;
  std::vector<int> component_mi;
  std::vector<int> component_null;
};

struct NewtonSettings {
  double tol = 1e-8;  // Euclidean norm of the coefficient gradient
  int max_iter = 20;
  double divergence_cap = 1e6;
  double rank_threshold = 1e-10;
  /// Active coefficients; unset means all modes. Coefficients outside the
  /// subset are held at zero, so an empty subset pins a = 0.
  std::optional<ModeSet> subset;
  /// When >= 0, a converged stabilizer strictly larger than this type's
  /// representative is reported as a symmetry collapse.
  int expected_type = -1;
};

enum class NewtonStatus { converged, max_iter, diverged, collapsed };
const char* newton_status_name(NewtonStatus s);

struct NewtonResult {
  NewtonStatus status = NewtonStatus::max_iter;
  SolutionPoint point;
  int iterations = 0;
  bool rank_deficient = false;
  bool ok() const { return status == NewtonStatus::converged; }
};

/// A parameter-dependent system g(lambda, x) = 0 on R^n with its Jacobian in
/// x and its derivative in lambda.
struct PmSystem {
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> hessian;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> lambda_derivative;
};

struct PmOutcome {
  NewtonStatus status = NewtonStatus::max_iter;
  double lambda = 0.0;
  Eigen::VectorXd x;
  double gradient_norm = 0.0;
  int iterations = 0;
  bool rank_deficient = false;
};

/// Newton's method with x[k] frozen and lambda as the replacement unknown:
/// column k of the Jacobian becomes dg/dlambda. Uses tol, max_iter,
/// divergence_cap and rank_threshold from the settings.
PmOutcome pm_newton(const PmSystem& sys, Eigen::VectorXd x, double lambda, int k, const NewtonSettings& settings);

/// Energy, gradient and Hessian of J(lambda, a) = sum lambda_j a_j^2 / 2 - w sum F(u_i)
/// in the coefficient space of an adapted eigenbasis.
class GalerkinProblem {
 public:
  explicit GalerkinProblem(const EigenBasis& basis);

  const EigenBasis& basis() const { return *basis_; }
  int size() const { return basis_->size(); }
  ModeSet all_modes() const;

  Eigen::VectorXd evaluate_on_grid(const Eigen::VectorXd& a) const;
  Eigen::VectorXd project(const Eigen::VectorXd& u) const;

  double energy(double lambda, const Eigen::VectorXd& a) const;
  Eigen::VectorXd gradient(double lambda, const Eigen::VectorXd& a) const;
  /// Entries j in `subset` only, in subset order.
  Eigen::VectorXd gradient(double lambda, const Eigen::VectorXd& a, const ModeSet& subset) const;
  Eigen::MatrixXd hessian(double lambda, const Eigen::VectorXd& a) const;
  Eigen::MatrixXd hessian(double lambda, const Eigen::VectorXd& a, const ModeSet& subset) const;

  /// Full Hessian with entries between different isotypic components of the
  /// given symmetry type set to zero without integration.
  Eigen::MatrixXd hessian_blocked(double lambda, const Eigen::VectorXd& a, int type) const;

  /// Signature of the Hessian, computed block by block over the isotypic
  /// components of the given symmetry type. Zero threshold 1e-6 max(1, |h|).
  MorseInfo morse(double lambda, const Eigen::VectorXd& a, int type) const;

  /// Value of u at a plane point by barycentric interpolation.
  double value_at(const Eigen::VectorXd& a, PlanePoint p) const;

  /// Stabilizer and its type; the type is -1 when the stabilizer is not an
  /// isotropy subgroup of the function-space action.
  Subgroup stabilizer(const Eigen::VectorXd& a, double tol = 1e-6) const;

  NewtonResult newton_gnga(double lambda, const Eigen::VectorXd& a0, const NewtonSettings& settings) const;
  /// lambda becomes an unknown and coefficient k (a mode index inside the
  /// subset) is held at a0[k].
  NewtonResult newton_pmgnga(const Eigen::VectorXd& a0, double lambda0, int k, const NewtonSettings& settings) const;

  /// Fill J, Morse data and symmetry of a converged point.
  void finish_point(SolutionPoint& p, int morse_type) const;

 private:
  const EigenBasis* basis_;
  std::vector<std::pair<int, double>> generic_stencil_;
};

/// Modes spanning fix(Gamma_i, B_M).
ModeSet invariant_modes(const EigenBasis& basis, int type);

}  // namespace snowbranch
