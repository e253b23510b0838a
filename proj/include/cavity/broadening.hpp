#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cavity {

enum class BinStrategy { delta, gauss_hermite, adaptive_lorentzian };

const char* to_string(BinStrategy s);
BinStrategy bin_strategy_from_string(const std::string& name);

/// Discretised inhomogeneous frequency distribution. Nodes are atomic
/// frequency offsets in rad/s, ascending; weights are probability masses
/// summing to 1.
struct EnsembleBins {
  std::vector<double> nodes;
  std::vector<double> weights;
  BinStrategy strategy = BinStrategy::delta;

  std::size_t size() const { return nodes.size(); }
};

/// Normal density, zero mean, std-dev delta_omega. Units s/rad.
/// delta_omega == 0 is rejected; use the delta strategy instead.
double gaussian_density(double omega, double delta_omega);

/// Physicists' Gauss-Hermite rule for weight exp(-t^2), nodes ascending.
void gauss_hermite_rule(std::size_t m, std::vector<double>& nodes, std::vector<double>& weights);

/// Gauss-Legendre rule on [-1, 1], nodes ascending.
void gauss_legendre_rule(std::size_t m, std::vector<double>& nodes, std::vector<double>& weights);

/// delta: single node at 0. gauss_hermite: m-point rule rescaled to the
/// ensemble distribution (m >= 2 when delta_omega > 0). adaptive_lorentzian
/// needs a probe location; use build_adaptive_bins.
EnsembleBins build_bins(double delta_omega, std::size_t m, BinStrategy strategy);

/// Quadrature refined around probe_offset, resolving Lorentzian structure of
/// half-width >= width_hint on top of the Gaussian envelope. Panels graded
/// geometrically from the probe out to +-8 delta_omega, Gauss-Legendre nodes
/// per panel, Gaussian density folded into the weights and the first three
/// moments matched exactly. m is an approximate total node budget; m == 0
/// picks the default.
EnsembleBins build_adaptive_bins(double delta_omega, std::size_t m, double probe_offset,
                                 double width_hint);

}  // namespace cavity
