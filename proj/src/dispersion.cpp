#include "spdcsim/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"

namespace spdcsim {

double DispersionModel::Band::eval(double lambda_nm, const char* label) const {
  if (!(lambda_nm >= min_nm && lambda_nm <= max_nm)) {
    throw BandError(std::string(label) + " index requested at " + std::to_string(lambda_nm) +
                    " nm, outside declared band [" + std::to_string(min_nm) + ", " +
                    std::to_string(max_nm) + "] nm");
  }
  double n;
  if (!tabulated) {
    const double u = lambda_nm - ref_nm;
    n = 0.0;
    for (Eigen::Index i = coeffs.size() - 1; i >= 0; --i) n = n * u + coeffs[i];
  } else {
    // locate interval (x strictly increasing)
    Eigen::Index lo = 0, hi = x.size() - 1;
    while (hi - lo > 1) {
      const Eigen::Index mid = (lo + hi) / 2;
      (x[mid] <= lambda_nm ? lo : hi) = mid;
    }
    const double h = x[hi] - x[lo];
    const double a = (x[hi] - lambda_nm) / h;
    const double b = (lambda_nm - x[lo]) / h;
    n = a * y[lo] + b * y[hi] +
        ((a * a * a - a) * second_deriv[lo] + (b * b * b - b) * second_deriv[hi]) * h * h / 6.0;
  }
  if (!std::isfinite(n) || n <= 1.0) {
    throw ValidationError(std::string(label) + " index " + std::to_string(n) + " at " +
                          std::to_string(lambda_nm) + " nm is not finite and > 1");
  }
  return n;
}

DispersionModel::Band DispersionModel::make_poly(Eigen::VectorXd coeffs, double ref, double lo,
                                                 double hi, const char* label) {
  if (!(lo < hi) || coeffs.size() == 0) {
    throw ValidationError(std::string(label) + " band: empty coefficients or empty range");
  }
  Band band;
  band.coeffs = std::move(coeffs);
  band.ref_nm = ref;
  band.min_nm = lo;
  band.max_nm = hi;
  band.eval(lo, label);  // index invariant at both edges
  band.eval(hi, label);
  return band;
}

DispersionModel::Band DispersionModel::make_table(const Eigen::VectorXd& x,
                                                  const Eigen::VectorXd& y, const char* label) {
  const Eigen::Index n = x.size();
  if (n < 4 || y.size() != n) {
    throw ValidationError(std::string(label) + " table needs >= 4 samples");
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    if (!(x[i] > x[i - 1])) {
      throw ValidationError(std::string(label) + " table wavelengths must strictly increase");
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y[i]) || y[i] <= 1.0) {
      throw ValidationError(std::string(label) + " table index must be finite and > 1");
    }
  }
  Band band;
  band.tabulated = true;
  band.x = x;
  band.y = y;
  band.min_nm = x[0];
  band.max_nm = x[n - 1];

  // natural cubic spline second derivatives, Thomas algorithm
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n), scratch = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 1; i < n - 1; ++i) {
    const double sig = (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
    const double p = sig * m[i - 1] + 2.0;
    m[i] = (sig - 1.0) / p;
    scratch[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]) - (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    scratch[i] = (6.0 * scratch[i] / (x[i + 1] - x[i - 1]) - sig * scratch[i - 1]) / p;
  }
  band.second_deriv = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = n - 2; i >= 1; --i) {
    band.second_deriv[i] = m[i] * band.second_deriv[i + 1] + scratch[i];
  }
  return band;
}

DispersionModel DispersionModel::polynomial(Eigen::VectorXd fh_coeffs, double fh_ref_nm,
                                            double fh_min_nm, double fh_max_nm,
                                            Eigen::VectorXd sh_coeffs, double sh_ref_nm,
                                            double sh_min_nm, double sh_max_nm) {
  DispersionModel d;
  d.fh_ = make_poly(std::move(fh_coeffs), fh_ref_nm, fh_min_nm, fh_max_nm, "FH");
  d.sh_ = make_poly(std::move(sh_coeffs), sh_ref_nm, sh_min_nm, sh_max_nm, "SH");
  return d;
}

DispersionModel DispersionModel::from_table(const Eigen::VectorXd& lambda_nm,
                                            const Eigen::VectorXd& n_fh,
                                            const Eigen::VectorXd& n_sh) {
  DispersionModel d;
  d.fh_ = make_table(lambda_nm, n_fh, "FH");
  d.sh_ = make_table(lambda_nm / 2.0, n_sh, "SH");
  return d;
}

DispersionModel DispersionModel::default_model() {
  // QPM anchor: n_SH(780.5) - n_FH(1561) = 1561/(2 * 3140) exactly.
  const double qpm_step = 1561.0 / 6280.0;
  Eigen::VectorXd fh(3), sh(3);
  fh << 1.80, -1.5e-4, 2.0e-8;                 // about (lambda - 1561 nm)
  sh << 1.80 + qpm_step, -6.0e-4, 4.0e-8;      // about (lambda - 780.5 nm)
  return polynomial(fh, 1561.0, 1500.0, 1620.0, sh, 780.5, 750.0, 810.0);
}

double DispersionModel::fh_index(double lambda_nm) const { return fh_.eval(lambda_nm, "FH"); }
double DispersionModel::sh_index(double lambda_nm) const { return sh_.eval(lambda_nm, "SH"); }

bool DispersionModel::covers_pair(double lambda_fh_nm) const {
  const double half = lambda_fh_nm / 2.0;
  return lambda_fh_nm >= fh_.min_nm && lambda_fh_nm <= fh_.max_nm && half >= sh_.min_nm &&
         half <= sh_.max_nm;
}

DispersionModel load_dispersion_csv(const std::string& path) {
  CsvTable t = read_csv(path, {"lambda_nm", "n_fh", "n_sh"});
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  Eigen::VectorXd lam(n), nfh(n), nsh(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lam[i] = t.rows[i][0];
    nfh[i] = t.rows[i][1];
    nsh[i] = t.rows[i][2];
  }
  return DispersionModel::from_table(lam, nfh, nsh);
}

}  // namespace spdcsim
