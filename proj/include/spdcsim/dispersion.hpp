#pragma once

#include <Eigen/Dense>
#include <string>

namespace spdcsim {

/// Effective refractive index curves for the fundamental (FH) band and the
/// second-harmonic (SH) band, each valid only over a declared wavelength
/// window. Evaluation outside the window throws BandError; the model never
/// extrapolates.
///
/// Two representations are supported: a polynomial in (lambda - reference)
/// per band, or a sampled table with natural cubic spline interpolation.
class DispersionModel {
 public:
  /// Polynomial model. Coefficients are in powers of (lambda_nm - ref_nm).
  static DispersionModel polynomial(Eigen::VectorXd fh_coeffs, double fh_ref_nm,
                                    double fh_min_nm, double fh_max_nm,
                                    Eigen::VectorXd sh_coeffs, double sh_ref_nm,
                                    double sh_min_nm, double sh_max_nm);

  /// Tabulated model, cubic interpolation. `lambda_nm` must be strictly
  /// increasing; SH indices are tabulated at lambda_nm/2.
  static DispersionModel from_table(const Eigen::VectorXd& lambda_nm,
                                    const Eigen::VectorXd& n_fh,
                                    const Eigen::VectorXd& n_sh);

  /// Synthetic, device-consistent default: indices constrained so the QPM
  /// condition n_SH(l/2) - n_FH(l) = l/(2*Lambda) holds exactly at
  /// l = 1561 nm with Lambda = 3.14 um, with plausible waveguide slopes.
  /// Not a measured dispersion.
  static DispersionModel default_model();

  /// Effective index at FH wavelength (vacuum nm).
  double fh_index(double lambda_nm) const;
  /// Effective index at SH wavelength (vacuum nm).
  double sh_index(double lambda_nm) const;

  double fh_min_nm() const { return fh_.min_nm; }
  double fh_max_nm() const { return fh_.max_nm; }
  double sh_min_nm() const { return sh_.min_nm; }
  double sh_max_nm() const { return sh_.max_nm; }

  /// True if lambda and lambda/2 are both inside the declared bands.
  bool covers_pair(double lambda_fh_nm) const;

 private:
  struct Band {
    bool tabulated = false;
    // polynomial form
    Eigen::VectorXd coeffs;
    double ref_nm = 0.0;
    // table form
    Eigen::VectorXd x, y, second_deriv;
    double min_nm = 0.0, max_nm = 0.0;

    double eval(double lambda_nm, const char* label) const;
  };

  DispersionModel() = default;
  static Band make_poly(Eigen::VectorXd coeffs, double ref, double lo, double hi,
                        const char* label);
  static Band make_table(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                         const char* label);

  Band fh_, sh_;
};

/// Reads `lambda_nm,n_fh,n_sh` CSV (header required) into a tabulated model.
DispersionModel load_dispersion_csv(const std::string& path);

}  // namespace spdcsim
