#pragma once

#include <cmath>
#include <cstdint>

// Unit conventions used throughout the library:
//   - wavelengths cross module boundaries in vacuum nm, SI meters internally
//   - times on the detector side are integer femtoseconds (int64)
//   - losses are dB (power), rates Hz, powers mW at the interfaces

namespace spdcsim {

inline constexpr double kSpeedOfLight = 299792458.0;        // m/s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12;  // F/m

inline constexpr double kFsPerSecond = 1e15;
inline constexpr int64_t kFsPerSecondI = 1000000000000000;

constexpr double nm_to_m(double nm) { return nm * 1e-9; }
constexpr double m_to_nm(double m) { return m * 1e9; }
constexpr double fs_to_s(double fs) { return fs * 1e-15; }
constexpr double s_to_fs(double s) { return s * 1e15; }

/// Power transmission fraction for a loss expressed in dB (>= 0 dB).
inline double db_to_fraction(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// Inverse of db_to_fraction.
inline double fraction_to_db(double fraction) { return -10.0 * std::log10(fraction); }

/// Angular frequency (rad/s) of a vacuum wavelength given in nm.
inline double angular_frequency(double lambda_nm) {
  return 2.0 * M_PI * kSpeedOfLight / nm_to_m(lambda_nm);
}

/// FWHM -> Gaussian sigma.
inline double fwhm_to_sigma(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0))); }

/// Spectral bandwidth in MHz of a wavelength interval `fwhm_nm` centered at `center_nm`.
inline double spectral_bandwidth_mhz(double center_nm, double fwhm_nm) {
  const double lam = nm_to_m(center_nm);
  return kSpeedOfLight * nm_to_m(fwhm_nm) / (lam * lam) * 1e-6;
}

}  // namespace spdcsim
