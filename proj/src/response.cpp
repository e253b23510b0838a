#include "cavity/response.hpp"

#include <cmath>
#include <stdexcept>

namespace cavity {

namespace {

// Saturation numerator g0^2 x (gamma+gamma_d)/(2 gamma) = g0^2 x Wbar / gamma.
inline double saturation_power(double x, const SystemParams& p) {
  return p.g0 * p.g0 * x * p.coherence_halfwidth() / p.gamma;
}

}  // namespace

double inversion(double x, double delta_p, double omega, const SystemParams& p) {
  if (x < 0.0) throw std::invalid_argument("inversion: intensity must be >= 0");
  const double wb = p.coherence_halfwidth();
  const double d = delta_p - omega;
  const double den = d * d + wb * wb;
  return -den / (den + saturation_power(x, p));
}

std::complex<double> coherence(double z, std::complex<double> alpha, double delta_p, double omega,
                               const SystemParams& p) {
  const double d = delta_p - omega;
  return -0.5 * p.g0 * z * alpha / std::complex<double>(d, p.coherence_halfwidth());
}

CollectiveResponse collective_gamma(double x, double delta_p, const SystemParams& p,
                                    const EnsembleBins& bins) {
  if (x < 0.0) throw std::invalid_argument("collective_gamma: intensity must be >= 0");
  const double wb = p.coherence_halfwidth();
  const double sat = saturation_power(x, p);
  const double wb2_sat = wb * wb + sat;

  // Single-fraction form of the response integrand: one division per node.
  double acc_re = 0.0, acc_im = 0.0;
  const std::size_t m = bins.size();
  for (std::size_t i = 0; i < m; ++i) {
    const double d = delta_p - bins.nodes[i];
    const double inv = bins.weights[i] / (d * d + wb2_sat);
    acc_re += inv;
    acc_im += d * inv;
  }
  const double scale = p.n_atoms * 0.5 * p.g0 * p.g0;
  return CollectiveResponse{{scale * wb * acc_re, scale * acc_im}, x, m};
}

double power_broadened_halfwidth(double x, const SystemParams& p) {
  const double wb = p.coherence_halfwidth();
  return std::sqrt(wb * wb + saturation_power(x, p));
}

std::optional<std::size_t> probe_bin_convergence(BinStrategy strategy, double delta_p, double x,
                                                 const SystemParams& p, std::size_t m_start,
                                                 std::size_t m_max, double rel_tol) {
  if (m_start < 2) m_start = 2;
  const auto make = [&](std::size_t m) {
    if (strategy == BinStrategy::adaptive_lorentzian)
      return build_adaptive_bins(p.delta_omega, m, delta_p, p.coherence_halfwidth());
    return build_bins(p.delta_omega, m, strategy);
  };
  std::complex<double> prev = collective_gamma(x, delta_p, p, make(m_start)).gamma_coll;
  for (std::size_t m = m_start; m <= m_max / 2; m *= 2) {
    const std::complex<double> next = collective_gamma(x, delta_p, p, make(2 * m)).gamma_coll;
    if (std::abs(next - prev) <= rel_tol * std::abs(next)) return m;
    prev = next;
  }
  return std::nullopt;
}

}  // namespace cavity
