#include "spdcsim/fit_models.hpp"

#include <algorithm>
#include <cmath>

#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

double sinc2_half_max_x() {
  static const double x_half = [] {
    double lo = 1.0, hi = 2.0;  // sinc^2(1) ~ 0.708, sinc^2(2) ~ 0.207
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      (qpm_sinc2(mid) > 0.5 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return x_half;
}

namespace {

// Linear interpolation of the lambda where the data crosses `level`, scanning
// from the peak outwards. Returns false when the data never drops below.
bool half_crossing(const CESpectrum& spec, Eigen::Index peak, int dir, double level,
                   double& lambda_out) {
  for (Eigen::Index i = peak; i + dir >= 0 && i + dir < spec.lambda_nm.size(); i += dir) {
    const double a = spec.ce_per_w[i], b = spec.ce_per_w[i + dir];
    if (a >= level && b < level) {
      const double t = (a - level) / (a - b);
      lambda_out = spec.lambda_nm[i] + t * (spec.lambda_nm[i + dir] - spec.lambda_nm[i]);
      return true;
    }
  }
  return false;
}

}  // namespace

FitResult fit_ce_spectrum(const CESpectrum& spec, const DispersionModel& disp,
                          const ModeAreas& areas, const GratingParams& init) {
  spec.validate();
  if (spec.lambda_nm.size() < 10) {
    throw IllPosedError("CE fit needs at least 10 points");
  }

  Eigen::Index peak = 0;
  spec.ce_per_w.maxCoeff(&peak);
  const double ce_peak = spec.ce_per_w[peak];
  if (!(ce_peak > 0.0)) throw IllPosedError("CE spectrum has no positive peak");

  double lam_lo = 0.0, lam_hi = 0.0;
  const bool have_lo = half_crossing(spec, peak, -1, ce_peak / 2.0, lam_lo);
  const bool have_hi = half_crossing(spec, peak, +1, ce_peak / 2.0, lam_hi);
  if (!have_lo || !have_hi) {
    throw IllPosedError(
        "CE spectrum does not span the main lobe (no half-maximum crossing on both sides); "
        "grating parameters are degenerate on this window");
  }
  const double lam_pk = spec.lambda_nm[peak];
  const double fwhm_nm = lam_hi - lam_lo;

  // Data-driven start: period from the phase-matching condition at the peak,
  // length from the lobe width, chi2_eff from the peak height.
  GratingParams start = init;
  try {
    start.period_m = qpm_period_for(disp, lam_pk);
    const double dl = std::max(fwhm_nm * 0.05, 1e-4);
    const double slope = (delta_k(disp, lam_pk + dl, start.period_m) -
                          delta_k(disp, lam_pk - dl, start.period_m)) /
                         (2.0 * dl);  // rad/m per nm
    start.length_m = 4.0 * sinc2_half_max_x() / (std::abs(slope) * fwhm_nm);
    GratingParams unit = start;
    unit.chi2_eff_m_per_v = 1.0;
    start.chi2_eff_m_per_v = std::sqrt(ce_peak / conversion_efficiency_peak(disp, unit, areas, lam_pk));
  } catch (const Error&) {
    start = init;  // fall back to the caller's guess
  }
  start.validate();

  FitProblem problem;
  problem.initial = Eigen::Vector3d(start.length_m, start.period_m, start.chi2_eff_m_per_v);
  problem.lower = Eigen::Vector3d(start.length_m / 10.0, start.period_m * 0.98,
                                  start.chi2_eff_m_per_v / 10.0);
  problem.upper = Eigen::Vector3d(start.length_m * 10.0, start.period_m * 1.02,
                                  start.chi2_eff_m_per_v * 10.0);
  if (spec.sigma.size() != 0) {
    problem.weights = spec.sigma.cwiseMax(1e-300).cwiseInverse();
  }
  problem.residual = [&spec, &disp, &areas](const Eigen::VectorXd& p) {
    GratingParams g;
    g.length_m = p[0];
    g.period_m = p[1];
    g.chi2_eff_m_per_v = p[2];
    Eigen::VectorXd r(spec.lambda_nm.size());
    for (Eigen::Index i = 0; i < spec.lambda_nm.size(); ++i) {
      r[i] = conversion_efficiency(disp, g, areas, spec.lambda_nm[i]) - spec.ce_per_w[i];
    }
    return r;
  };

  FitResult result = least_squares(problem, 1e-12, 300);
  result.model = "qpm_sinc2";
  result.param_names = {"length_m", "period_m", "chi2_eff_m_per_v"};
  return result;
}

FitResult fit_fringe(const std::vector<FringePoint>& points, double period_guess_pm) {
  if (points.size() < 8) throw ValidationError("fringe fit needs at least 8 points");
  if (!(period_guess_pm > 0.0)) throw DomainError("fringe period guess must be positive");

  double lo = points[0].offset_pm, hi = points[0].offset_pm;
  double cmin = points[0].counts, cmax = points[0].counts;
  for (const auto& pt : points) {
    if (pt.counts < 0.0) throw DomainError("fringe counts must be non-negative");
    lo = std::min(lo, pt.offset_pm);
    hi = std::max(hi, pt.offset_pm);
    cmin = std::min(cmin, pt.counts);
    cmax = std::max(cmax, pt.counts);
  }
  if (hi - lo < period_guess_pm) {
    throw ValidationError("fringe scan must span at least one period");
  }
  if (cmax == cmin) {
    throw DegenerateDataError("all fringe counts are equal; visibility is undefined");
  }

  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd offsets(n), counts(n), weights(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    offsets[i] = points[static_cast<size_t>(i)].offset_pm;
    counts[i] = points[static_cast<size_t>(i)].counts;
    weights[i] = 1.0 / std::sqrt(std::max(counts[i], 1.0));
  }

  const double a0 = counts.mean();
  const double v0 = std::min(1.0, (cmax - cmin) / std::max(cmax + cmin, 1e-300));
  const auto model = [&offsets](double a, double v, double period, double phase) {
    return (a * (1.0 + v * (2.0 * M_PI / period * offsets.array() + phase).cos())).matrix();
  };

  // Coarse phase/period grid; the sinusoid's cost landscape is periodic in
  // phase, so LM needs a start in the right basin.
  double best_phase = 0.0, best_period = period_guess_pm;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int ip = -4; ip <= 4; ++ip) {
    const double period = period_guess_pm * (1.0 + 0.05 * ip);
    for (int k = 0; k < 32; ++k) {
      const double phase = 2.0 * M_PI * k / 32.0 - M_PI;
      const double cost =
          ((model(a0, v0, period, phase) - counts).cwiseProduct(weights)).squaredNorm();
      if (cost < best_cost) {
        best_cost = cost;
        best_phase = phase;
        best_period = period;
      }
    }
  }

  FitProblem problem;
  problem.initial = Eigen::Vector4d(a0, v0, best_period, best_phase);
  problem.lower = Eigen::Vector4d(a0 * 1e-3, 0.0, period_guess_pm * 0.5, -2.0 * M_PI);
  problem.upper = Eigen::Vector4d(a0 * 1e3, 1.0, period_guess_pm * 2.0, 2.0 * M_PI);
  problem.weights = weights;
  problem.residual = [&](const Eigen::VectorXd& p) {
    return (model(p[0], p[1], p[2], p[3]) - counts).eval();
  };

  FitResult result = least_squares(problem, 1e-12, 400);
  result.model = "fringe";
  result.param_names = {"amplitude", "visibility", "period_pm", "phase_rad"};
  return result;
}

FitResult fit_inverse_law(const std::vector<CarPoint>& points) {
  if (points.size() < 4) throw ValidationError("inverse-law fit needs at least 4 points");
  double first = points[0].pcr_hz;
  bool distinct = false;
  for (const auto& pt : points) {
    if (!(pt.pcr_hz > 0.0 && pt.car > 0.0)) {
      throw DomainError("inverse-law fit requires strictly positive PCR and CAR");
    }
    if (pt.pcr_hz != first) distinct = true;
  }
  if (!distinct) throw DegenerateDataError("all PCR values identical; exponent is undefined");

  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd lx(n), ly(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lx[i] = std::log(points[static_cast<size_t>(i)].pcr_hz);
    ly[i] = std::log(points[static_cast<size_t>(i)].car);
  }
  // Closed-form log-log regression as the start.
  const double mx = lx.mean(), my = ly.mean();
  const double sxx = (lx.array() - mx).square().sum();
  const double e0 = (lx.array() - mx).cwiseProduct(ly.array() - my).sum() / sxx;
  const double k0 = std::exp(my - e0 * mx);

  FitProblem problem;
  problem.initial = Eigen::Vector2d(k0, e0);
  problem.lower = Eigen::Vector2d(k0 * 1e-6, e0 - 10.0);
  problem.upper = Eigen::Vector2d(k0 * 1e6, e0 + 10.0);
  problem.residual = [&](const Eigen::VectorXd& p) {
    return (std::log(p[0]) + p[1] * lx.array() - ly.array()).matrix().eval();
  };

  FitResult result = least_squares(problem, 1e-13, 200);
  result.model = "inverse_law";
  result.param_names = {"kappa", "exponent"};
  return result;
}

}  // namespace spdcsim
