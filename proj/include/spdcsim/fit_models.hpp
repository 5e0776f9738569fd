#pragma once

#include <vector>

#include "spdcsim/fit.hpp"
#include "spdcsim/qpm.hpp"

namespace spdcsim {

/// Fits the QPM sinc^2 model to a measured/synthetic CE spectrum and returns
/// grating length (m), period (m) and chi2_eff (m/V) with standard errors.
///
/// The grating period moves the phase-matching lobe by hundreds of nm per
/// percent, so a cold start from `init` alone is hopeless once the lobe left
/// the sampled window. Initialization is therefore data-driven (peak position
/// -> period, lobe width -> length, peak height -> chi2_eff) and `init` is
/// only used when the data-driven estimate is unavailable.
FitResult fit_ce_spectrum(const CESpectrum& spec, const DispersionModel& disp,
                          const ModeAreas& areas, const GratingParams& init);

struct FringePoint {
  double offset_pm = 0.0;
  double counts = 0.0;
};

/// Fits N(offset) = A * (1 + V cos(2 pi offset / period + phase)) with
/// Poisson weights sigma_i = sqrt(counts_i). Visibility is bounded to [0,1];
/// an inverted fringe is absorbed into the phase.
FitResult fit_fringe(const std::vector<FringePoint>& points, double period_guess_pm = 6.6);

struct CarPoint {
  double pcr_hz = 0.0;
  double car = 0.0;
};

/// Fits CAR = kappa * PCR^exponent in log-log space.
FitResult fit_inverse_law(const std::vector<CarPoint>& points);

/// Half-width of sinc^2 at half maximum (x where sinc^2(x) = 1/2), solved
/// numerically once.
double sinc2_half_max_x();

}  // namespace spdcsim
