#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

#include "spdcsim/dispersion.hpp"

namespace spdcsim {

/// Poled-grating parameters: length, period, effective chi(2). SI units.
struct GratingParams {
  double length_m = 69e-3;
  double period_m = 3.14e-6;
  double chi2_eff_m_per_v = 0.05e-12;
  /// Physical waveguide length when declared; grating cannot exceed it.
  std::optional<double> waveguide_length_m;

  void validate() const;
};

/// Effective mode areas at the FH and SH wavelengths (m^2).
struct ModeAreas {
  double s_fh_m2 = 0.74e-12;
  double s_sh_m2 = 0.32e-12;

  void validate() const;
};

/// Conversion-efficiency spectrum: CE (1/W) sampled on an increasing FH
/// wavelength grid, optional per-point 1-sigma uncertainty.
struct CESpectrum {
  Eigen::VectorXd lambda_nm;
  Eigen::VectorXd ce_per_w;
  Eigen::VectorXd sigma;  // empty when not provided

  void validate() const;
};

/// sin(x)/x with the removable singularity handled by series below |x|<1e-6.
inline double qpm_sinc(double x) {
  if (std::abs(x) < 1e-6) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

inline double qpm_sinc2(double x) {
  const double s = qpm_sinc(x);
  return s * s;
}

/// Net wavevector mismatch after grating compensation (rad/m):
/// k_SH - 2 k_FH - 2 pi / period, with k = 2 pi n / lambda.
double delta_k(const DispersionModel& disp, double lambda_fh_nm, double period_m);

/// SH conversion efficiency CE = P_SH / P_FH^2 (1/W) of the poled grating at
/// the given FH wavelength:
///   CE = (w L chi)^2 / (2 eps0 c^3 n_FH^2 n_SH) * S_SH / S_FH^2
///        * sinc^2(delta_k L / 2)
double conversion_efficiency(const DispersionModel& disp, const GratingParams& g,
                             const ModeAreas& areas, double lambda_fh_nm);

/// The sinc^2 prefactor alone (CE at perfect phase matching).
double conversion_efficiency_peak(const DispersionModel& disp, const GratingParams& g,
                                  const ModeAreas& areas, double lambda_fh_nm);

/// SH power (W) generated from `pump_w` of FH pump, P_SH = CE * P_FH^2.
double sh_power(const DispersionModel& disp, const GratingParams& g, const ModeAreas& areas,
                double lambda_fh_nm, double pump_w);

/// Grating period that phase-matches the given FH wavelength:
/// period = 2 pi / (k_SH - 2 k_FH). Throws NoQpmError when the mismatch
/// is not positive.
double qpm_period_for(const DispersionModel& disp, double lambda_fh_nm);

/// CE sampled over `grid_nm` (strictly increasing). With `noise_sigma` > 0,
/// adds seeded Gaussian noise of that absolute 1-sigma and records it in the
/// spectrum's sigma column.
CESpectrum ce_spectrum(const DispersionModel& disp, const GratingParams& g,
                       const ModeAreas& areas, const Eigen::VectorXd& grid_nm,
                       double noise_sigma = 0.0, uint64_t seed = 0);

/// CSV `lambda_nm,ce_per_w[,sigma]`.
void save_ce_csv(const std::string& path, const CESpectrum& spec);
CESpectrum load_ce_csv(const std::string& path);

}  // namespace spdcsim
