#include "spdcsim/fit.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"

namespace spdcsim {

namespace {

std::string params_to_string(const Eigen::VectorXd& p) {
  std::ostringstream ss;
  ss << "[";
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (i) ss << ", ";
    ss << format_double(p[i]);
  }
  ss << "]";
  return ss.str();
}

Eigen::VectorXd weighted(const Eigen::VectorXd& r, const Eigen::VectorXd& w) {
  if (w.size() == 0) return r;
  return r.cwiseProduct(w);
}

Eigen::VectorXd eval_checked(const FitProblem& p, const Eigen::VectorXd& params) {
  Eigen::VectorXd r = p.residual(params);
  if (!r.allFinite()) {
    throw FitNumericError("residual is not finite at params " + params_to_string(params));
  }
  return weighted(r, p.weights);
}

}  // namespace

void FitProblem::validate() const {
  const Eigen::Index n = initial.size();
  if (!residual) throw ValidationError("fit problem has no residual function");
  if (n == 0) throw ValidationError("fit problem has no parameters");
  if (lower.size() != n || upper.size() != n) {
    throw ValidationError("bounds must match parameter dimension");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) throw ValidationError("bounds out of order");
    if (!(initial[i] >= lower[i] && initial[i] <= upper[i])) {
      throw ValidationError("initial parameters outside bounds");
    }
  }
}

double FitResult::value(const std::string& name) const {
  for (size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return params[static_cast<Eigen::Index>(i)];
  }
  throw DomainError("no fit parameter named " + name);
}

double FitResult::stderr_of(const std::string& name) const {
  for (size_t i = 0; i < param_names.size(); ++i) {
    if (param_names[i] == name) return stderrs[static_cast<Eigen::Index>(i)];
  }
  throw DomainError("no fit parameter named " + name);
}

std::string FitResult::to_json() const {
  nlohmann::ordered_json j;
  j["model"] = model;
  nlohmann::ordered_json params_json;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    const std::string name = static_cast<size_t>(i) < param_names.size()
                                 ? param_names[static_cast<size_t>(i)]
                                 : "p" + std::to_string(i);
    params_json[name] = {{"value", params[i]}, {"stderr", stderrs[i]}};
  }
  j["params"] = params_json;
  j["chi2_reduced"] = chi2_reduced;
  j["converged"] = converged;
  j["iterations"] = iterations;
  return j.dump(2) + "\n";
}

FitResult least_squares(const FitProblem& problem, double tol, int max_iter) {
  problem.validate();
  const Eigen::Index n = problem.initial.size();

  Eigen::VectorXd p = problem.initial;
  Eigen::VectorXd f = eval_checked(problem, p);
  const Eigen::Index m = f.size();
  if (m < n) throw ValidationError("residual dimension below parameter dimension");
  double cost = f.squaredNorm();

  // Forward differences, stepping inward when a bound blocks the probe.
  const auto numeric_jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& f_at) {
    Eigen::MatrixXd J(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double h = std::max(1e-8, 1e-8 * std::abs(at[j]));
      Eigen::VectorXd q = at;
      if (at[j] + h > problem.upper[j]) h = -h;
      q[j] = at[j] + h;
      J.col(j) = (eval_checked(problem, q) - f_at) / h;
    }
    return J;
  };
  const auto jacobian = [&](const Eigen::VectorXd& at, const Eigen::VectorXd& f_at) {
    if (!problem.jacobian) return numeric_jacobian(at, f_at);
    Eigen::MatrixXd J = problem.jacobian(at);
    if (problem.weights.size() != 0) J = problem.weights.asDiagonal() * J;
    return J;
  };

  FitResult result;
  double lambda = 1e-3;
  int iter = 0;
  bool converged = false;
  Eigen::MatrixXd J = jacobian(p, f);

  for (; iter < max_iter; ++iter) {
    const Eigen::VectorXd grad = J.transpose() * f;

    // Gradient components that point out of the feasible box cannot be
    // descended along; mask them for the convergence test.
    double proj_grad_norm = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool blocked_low = p[j] <= problem.lower[j] && grad[j] > 0.0;
      const bool blocked_high = p[j] >= problem.upper[j] && grad[j] < 0.0;
      if (!blocked_low && !blocked_high) {
        proj_grad_norm = std::max(proj_grad_norm, std::abs(grad[j]));
      }
    }
    if (proj_grad_norm <= tol * (1.0 + cost)) {
      converged = true;
      break;
    }

    const Eigen::MatrixXd jtj = J.transpose() * J;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index j = 0; j < n; ++j) diag[j] = std::max(diag[j], 1e-30);

    bool accepted = false;
    for (int damp = 0; damp < 40; ++damp) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      Eigen::VectorXd q = (p + step).cwiseMax(problem.lower).cwiseMin(problem.upper);
      const Eigen::VectorXd f_new = eval_checked(problem, q);
      const double cost_new = f_new.squaredNorm();
      if (cost_new < cost) {
        const double rel_drop = (cost - cost_new) / std::max(cost, 1e-300);
        const double step_size = (q - p).cwiseAbs().maxCoeff();
        p = std::move(q);
        f = f_new;
        cost = cost_new;
        lambda = std::max(lambda / 3.0, 1e-14);
        accepted = true;
        J = jacobian(p, f);
        if (rel_drop < tol && step_size < tol * (1.0 + p.cwiseAbs().maxCoeff())) {
          converged = true;
        }
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e15) break;
    }
    if (!accepted || converged) {
      // No downhill step exists (within damping range): stationary point.
      converged = converged || !accepted;
      break;
    }
  }

  result.params = p;
  result.chi2 = cost;
  result.chi2_reduced = m > n ? cost / static_cast<double>(m - n) : 0.0;
  result.converged = converged;
  result.iterations = iter;

  const Eigen::VectorXd grad = J.transpose() * f;
  for (Eigen::Index j = 0; j < n; ++j) {
    if ((p[j] <= problem.lower[j] && grad[j] > 0.0) ||
        (p[j] >= problem.upper[j] && grad[j] < 0.0)) {
      result.bound_active = true;
    }
  }

  // Covariance from the (weighted) Jacobian at the optimum, SVD pseudo-inverse
  // so a degenerate direction surfaces as a huge standard error instead of a
  // crash.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sv_floor = std::max(sv[0] * 1e-14, 1e-300);
  Eigen::VectorXd inv_sq(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    inv_sq[j] = sv[j] > sv_floor ? 1.0 / (sv[j] * sv[j]) : 1.0 / (sv_floor * sv_floor);
  }
  const Eigen::MatrixXd cov = svd.matrixV() * inv_sq.asDiagonal() * svd.matrixV().transpose();
  const double scale = result.chi2_reduced > 0.0 ? result.chi2_reduced : 1.0;
  result.stderrs = (cov.diagonal() * scale).cwiseMax(0.0).cwiseSqrt();
  return result;
}

}  // namespace spdcsim
