#pragma once

#include <complex>
#include <cstddef>
#include <optional>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"

namespace cavity {

/// Steady state of a single frequency class.
struct AtomicSteadyState {
  std::complex<double> s;  // coherence <sigma->
  double z = -1.0;         // inversion <sigma_z>
  double omega = 0.0;      // class frequency offset, rad/s
};

/// Steady-state inversion of one class at intracavity intensity x = |alpha|^2.
/// Always in [-1, 0).
double inversion(double x, double delta_p, double omega, const SystemParams& p);

/// Steady-state coherence of one class given its inversion and the field.
std::complex<double> coherence(double z, std::complex<double> alpha, double delta_p, double omega,
                               const SystemParams& p);

/// Saturable collective response of the whole ensemble at intensity x.
/// Re >= 0 (pure loss); -> 0 as x -> infinity.
struct CollectiveResponse {
  std::complex<double> gamma_coll;  // rad/s
  double intensity = 0.0;           // the x it was evaluated at
  std::size_t bins_used = 0;
};

CollectiveResponse collective_gamma(double x, double delta_p, const SystemParams& p,
                                    const EnsembleBins& bins);

/// Power-broadened Lorentzian half-width of the saturated response,
/// sqrt(Wbar^2 + g0^2 x (gamma+gamma_d)/(2 gamma)). Drives adaptive binning.
double power_broadened_halfwidth(double x, const SystemParams& p);

/// Smallest node budget m (doubling from m_start) at which doubling m moves
/// the collective response by less than rel_tol. Empty when m_max is hit
/// without convergence.
std::optional<std::size_t> probe_bin_convergence(BinStrategy strategy, double delta_p, double x,
                                                 const SystemParams& p, std::size_t m_start,
                                                 std::size_t m_max, double rel_tol = 1e-8);

}  // namespace cavity
