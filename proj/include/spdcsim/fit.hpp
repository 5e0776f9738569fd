#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

namespace spdcsim {

/// A weighted bounded nonlinear least-squares problem. The residual maps
/// parameters to the vector of (model - data) values; `weights` are 1/sigma
/// per point (empty = unweighted). Bounds may be +-infinity.
struct FitProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  Eigen::VectorXd initial;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::VectorXd weights;
  /// Optional analytic Jacobian of the (unweighted) residual.
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian;

  void validate() const;
};

struct FitResult {
  Eigen::VectorXd params;
  Eigen::VectorXd stderrs;     // sqrt(diag cov), scaled by reduced chi2
  double chi2 = 0.0;           // sum of squared weighted residuals at optimum
  double chi2_reduced = 0.0;   // chi2 / (n_points - n_params)
  bool converged = false;
  bool bound_active = false;   // optimum pinned to a box face
  int iterations = 0;
  std::string model;
  std::vector<std::string> param_names;

  double value(const std::string& name) const;
  double stderr_of(const std::string& name) const;
  /// {model, params:{name:{value,stderr}}, chi2_reduced, converged, iterations}
  std::string to_json() const;
};

/// Damped Gauss-Newton (Levenberg-Marquardt) with box projection.
/// Converges when the projected gradient infinity-norm drops below
/// tol*(1+cost) or accepted steps stop changing the cost; the returned cost
/// never exceeds the initial cost. Jacobian by forward differences with step
/// max(1e-8, 1e-8*|p|) unless an analytic one is supplied.
FitResult least_squares(const FitProblem& problem, double tol = 1e-10, int max_iter = 200);

}  // namespace spdcsim
