#include "spdcsim/qpm.hpp"

#include <cmath>

#include "spdcsim/csvio.hpp"
#include "spdcsim/errors.hpp"
#include "spdcsim/rng.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

void GratingParams::validate() const {
  if (!(length_m > 0.0 && period_m > 0.0 && chi2_eff_m_per_v > 0.0)) {
    throw ValidationError("grating parameters must be strictly positive");
  }
  if (waveguide_length_m && length_m > *waveguide_length_m) {
    throw ValidationError("grating length exceeds declared waveguide length");
  }
}

void ModeAreas::validate() const {
  if (!(s_fh_m2 > 0.0 && s_sh_m2 > 0.0)) {
    throw ValidationError("mode areas must be strictly positive");
  }
}

void CESpectrum::validate() const {
  if (lambda_nm.size() != ce_per_w.size() || lambda_nm.size() == 0) {
    throw ValidationError("CE spectrum: wavelength/CE size mismatch");
  }
  for (Eigen::Index i = 1; i < lambda_nm.size(); ++i) {
    if (!(lambda_nm[i] > lambda_nm[i - 1])) {
      throw ValidationError("CE spectrum wavelengths must strictly increase");
    }
  }
  if (sigma.size() != 0 && sigma.size() != lambda_nm.size()) {
    throw ValidationError("CE spectrum sigma column size mismatch");
  }
}

double delta_k(const DispersionModel& disp, double lambda_fh_nm, double period_m) {
  if (!(period_m > 0.0)) throw DomainError("grating period must be positive");
  const double lam_fh = nm_to_m(lambda_fh_nm);
  const double lam_sh = lam_fh / 2.0;
  const double k_fh = 2.0 * M_PI * disp.fh_index(lambda_fh_nm) / lam_fh;
  const double k_sh = 2.0 * M_PI * disp.sh_index(lambda_fh_nm / 2.0) / lam_sh;
  return k_sh - 2.0 * k_fh - 2.0 * M_PI / period_m;
}

double conversion_efficiency_peak(const DispersionModel& disp, const GratingParams& g,
                                  const ModeAreas& areas, double lambda_fh_nm) {
  g.validate();
  areas.validate();
  const double n_fh = disp.fh_index(lambda_fh_nm);
  const double n_sh = disp.sh_index(lambda_fh_nm / 2.0);
  const double omega = angular_frequency(lambda_fh_nm);
  const double amp = omega * g.length_m * g.chi2_eff_m_per_v;
  const double denom = 2.0 * kVacuumPermittivity * kSpeedOfLight * kSpeedOfLight *
                       kSpeedOfLight * n_fh * n_fh * n_sh;
  return amp * amp / denom * areas.s_sh_m2 / (areas.s_fh_m2 * areas.s_fh_m2);
}

double conversion_efficiency(const DispersionModel& disp, const GratingParams& g,
                             const ModeAreas& areas, double lambda_fh_nm) {
  const double dk = delta_k(disp, lambda_fh_nm, g.period_m);
  return conversion_efficiency_peak(disp, g, areas, lambda_fh_nm) *
         qpm_sinc2(dk * g.length_m / 2.0);
}

double sh_power(const DispersionModel& disp, const GratingParams& g, const ModeAreas& areas,
                double lambda_fh_nm, double pump_w) {
  if (!(pump_w >= 0.0)) throw DomainError("pump power must be non-negative");
  return conversion_efficiency(disp, g, areas, lambda_fh_nm) * pump_w * pump_w;
}

double qpm_period_for(const DispersionModel& disp, double lambda_fh_nm) {
  const double lam_fh = nm_to_m(lambda_fh_nm);
  const double k_fh = 2.0 * M_PI * disp.fh_index(lambda_fh_nm) / lam_fh;
  const double k_sh = 2.0 * M_PI * disp.sh_index(lambda_fh_nm / 2.0) / (lam_fh / 2.0);
  const double mismatch = k_sh - 2.0 * k_fh;
  if (!(mismatch > 0.0)) {
    throw NoQpmError("k_SH - 2 k_FH = " + format_double(mismatch) +
                     " rad/m is not positive; no grating period can phase-match");
  }
  return 2.0 * M_PI / mismatch;
}

CESpectrum ce_spectrum(const DispersionModel& disp, const GratingParams& g,
                       const ModeAreas& areas, const Eigen::VectorXd& grid_nm,
                       double noise_sigma, uint64_t seed) {
  if (grid_nm.size() == 0) throw DomainError("empty wavelength grid");
  for (Eigen::Index i = 1; i < grid_nm.size(); ++i) {
    if (!(grid_nm[i] > grid_nm[i - 1])) {
      throw DomainError("wavelength grid must strictly increase");
    }
  }
  CESpectrum spec;
  spec.lambda_nm = grid_nm;
  spec.ce_per_w.resize(grid_nm.size());
  for (Eigen::Index i = 0; i < grid_nm.size(); ++i) {
    spec.ce_per_w[i] = conversion_efficiency(disp, g, areas, grid_nm[i]);
  }
  if (noise_sigma > 0.0) {
    KeyedStream rng(seed, Stream::kCeNoise, 0);
    spec.sigma = Eigen::VectorXd::Constant(grid_nm.size(), noise_sigma);
    for (Eigen::Index i = 0; i < grid_nm.size(); ++i) {
      spec.ce_per_w[i] = std::max(0.0, spec.ce_per_w[i] + noise_sigma * rng.gaussian());
    }
  }
  return spec;
}

void save_ce_csv(const std::string& path, const CESpectrum& spec) {
  spec.validate();
  const bool with_sigma = spec.sigma.size() != 0;
  std::vector<std::string> header = {"lambda_nm", "ce_per_w"};
  if (with_sigma) header.push_back("sigma");
  std::vector<std::vector<double>> rows;
  rows.reserve(spec.lambda_nm.size());
  for (Eigen::Index i = 0; i < spec.lambda_nm.size(); ++i) {
    std::vector<double> row = {spec.lambda_nm[i], spec.ce_per_w[i]};
    if (with_sigma) row.push_back(spec.sigma[i]);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

CESpectrum load_ce_csv(const std::string& path) {
  CsvTable t = read_csv(path, {"lambda_nm", "ce_per_w"});
  const bool with_sigma = t.header.size() >= 3 && t.header[2] == "sigma";
  CESpectrum spec;
  const Eigen::Index n = static_cast<Eigen::Index>(t.rows.size());
  spec.lambda_nm.resize(n);
  spec.ce_per_w.resize(n);
  if (with_sigma) spec.sigma.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    spec.lambda_nm[i] = t.rows[i][0];
    spec.ce_per_w[i] = t.rows[i][1];
    if (with_sigma) {
      if (t.rows[i].size() < 3) throw IoError(path + ": missing sigma field");
      spec.sigma[i] = t.rows[i][2];
    }
  }
  spec.validate();
  return spec;
}

}  // namespace spdcsim
