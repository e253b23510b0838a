#pragma once

#include <map>
#include <stdexcept>
#include <string>

namespace cavity {

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Bad configuration input: missing key, malformed file, unknown option.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: lost root bracket, integrator underflow, invariant blown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every rate/detuning inside the library is an angular frequency in rad/s.
// Configuration files quote linear kHz; the 2*pi*1e3 factor is folded in
// exactly once, here.
double angular_from_linear_khz(double khz);
double linear_khz_from_angular(double rad_per_s);

/// Physical constants of the coupled atom-cavity system, angular rad/s.
struct SystemParams {
  double g0 = 0.0;           // single-atom vacuum Rabi frequency
  double kappa = 0.0;        // cavity linewidth
  double gamma = 0.0;        // atomic natural linewidth
  double gamma_d = 0.0;      // homogeneous dephasing rate
  double delta_omega = 0.0;  // inhomogeneous broadening std-dev
  double n_atoms = 0.0;      // effective atom number, real-valued
  double eta = 0.0;          // cavity drive amplitude

  /// Half-width of the atomic coherence decay, (gamma + gamma_d)/2.
  double coherence_halfwidth() const { return 0.5 * (gamma + gamma_d); }

  void validate() const;  // throws std::invalid_argument
};

/// Builds params from linear-kHz values. Required keys: g0, kappa, gamma,
/// gamma_d, delta_omega, n_atoms, eta. n_atoms passes through unscaled.
SystemParams params_from_linear_khz(const std::map<std::string, double>& values);

struct Cooperativity {
  double single_atom = 0.0;  // g0^2 / (kappa * gamma)
  double collective = 0.0;   // n_atoms * single_atom
};

Cooperativity cooperativity(const SystemParams& p);

/// Cavity and probe detunings relative to the atomic line, angular rad/s.
struct Detuning {
  double delta_c = 0.0;  // cavity - atom
  double delta_p = 0.0;  // probe - atom
};

}  // namespace cavity
