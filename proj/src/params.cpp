#include "cavity/params.hpp"

#include <array>
#include <cmath>

namespace cavity {

double angular_from_linear_khz(double khz) { return two_pi * 1.0e3 * khz; }

double linear_khz_from_angular(double rad_per_s) { return rad_per_s / (two_pi * 1.0e3); }

void SystemParams::validate() const {
  const auto bad = [](const char* what) { throw std::invalid_argument(std::string("SystemParams: ") + what); };
  const std::array<double, 7> v = {g0, kappa, gamma, gamma_d, delta_omega, n_atoms, eta};
  for (double x : v)
    if (!std::isfinite(x)) bad("non-finite value");
  if (g0 <= 0.0) bad("g0 must be > 0");
  if (kappa <= 0.0) bad("kappa must be > 0");
  if (gamma <= 0.0) bad("gamma must be > 0");
  if (gamma_d < 0.0) bad("gamma_d must be >= 0");
  if (delta_omega < 0.0) bad("delta_omega must be >= 0");
  if (n_atoms < 0.0) bad("n_atoms must be >= 0");
  if (eta < 0.0) bad("eta must be >= 0");
}

SystemParams params_from_linear_khz(const std::map<std::string, double>& values) {
  static const char* const keys[] = {"g0", "kappa", "gamma", "gamma_d", "delta_omega", "n_atoms", "eta"};
  for (const char* k : keys)
    if (!values.count(k)) throw ConfigError(std::string("missing parameter key '") + k + "'");

  SystemParams p;
  p.g0 = angular_from_linear_khz(values.at("g0"));
  p.kappa = angular_from_linear_khz(values.at("kappa"));
  p.gamma = angular_from_linear_khz(values.at("gamma"));
  p.gamma_d = angular_from_linear_khz(values.at("gamma_d"));
  p.delta_omega = angular_from_linear_khz(values.at("delta_omega"));
  p.n_atoms = values.at("n_atoms");
  p.eta = angular_from_linear_khz(values.at("eta"));
  p.validate();
  return p;
}

Cooperativity cooperativity(const SystemParams& p) {
  Cooperativity c;
  c.single_atom = p.g0 * p.g0 / (p.kappa * p.gamma);
  c.collective = p.n_atoms * c.single_atom;
  return c;
}

}  // namespace cavity
