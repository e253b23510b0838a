#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"
#include "cavity/steady_state.hpp"

namespace cavity {

/// Coupled-state resonance pair of the avoided crossing,
/// delta'_{c,+-} = dc/2 +- sqrt(dc^2 + N g0^2)/2. The branches satisfy
/// upper * lower = -N g0^2 / 4 exactly.
struct DressedCurve {
  double delta_c = 0.0;
  double upper = 0.0;  // delta'_{c+}
  double lower = 0.0;  // delta'_{c-}
};

DressedCurve dressed_resonances(double delta_c, double n_atoms, double g0);

/// Bin recipe + solver options for map evaluation. Adaptive bins are rebuilt
/// per probe detuning; delta/gauss_hermite are shared.
struct SweepOptions {
  SolveOptions solve;
  BinStrategy strategy = BinStrategy::adaptive_lorentzian;
  std::size_t bins_m = 0;  // node budget; 0 = default
  int threads = 0;         // 0 = hardware concurrency
};

struct GridSpec {
  std::vector<double> delta_c;  // rad/s, monotone
  std::vector<double> delta_p;  // rad/s, monotone
};

GridSpec make_grid(double c_min, double c_max, std::size_t nc, double p_min, double p_max,
                   std::size_t np);

/// Everything needed to regenerate a map bit-identically.
struct MapMeta {
  SystemParams params;
  BinStrategy strategy = BinStrategy::delta;
  std::size_t bins_m = 0;
  SolveOptions solve;
};

struct SpectralMap {
  std::vector<double> delta_c_axis;
  std::vector<double> delta_p_axis;
  std::vector<double> t_norm;    // row-major [ic * np + ip]
  std::vector<double> f_norm;
  std::vector<int> root_count;
  MapMeta meta;

  std::size_t nc() const { return delta_c_axis.size(); }
  std::size_t np() const { return delta_p_axis.size(); }
  double t(std::size_t ic, std::size_t ip) const { return t_norm[ic * np() + ip]; }
  double f(std::size_t ic, std::size_t ip) const { return f_norm[ic * np() + ip]; }
};

/// Per-cell steady states on the default branch. Deterministic and
/// independent of thread count. Cell-level failures abort with coordinates.
SpectralMap sweep_map(const GridSpec& grid, const SystemParams& p, const SweepOptions& opts = {});

struct Peak {
  double location = 0.0;  // parabolic-refined
  double height = 0.0;
};

/// Local maxima on a uniform grid exceeding the prominence threshold.
std::vector<Peak> find_peaks(std::span<const double> axis, std::span<const double> values,
                             double min_prominence);

struct SplittingPoint {
  double n_atoms = 0.0;
  double measured = 0.0;          // peak separation, rad/s
  double sqrt_n_prediction = 0.0; // g0 sqrt(N)
  bool resolved = false;
};

/// Transmission peak separation at delta_c = 0 versus atom number.
std::vector<SplittingPoint> splitting_vs_n(std::span<const double> n_list, const SystemParams& base,
                                           const SweepOptions& opts = {});

/// FWHM of the peak at peak_index measured at half prominence above `floor`.
/// Returns 0 when the half level is not crossed on both sides.
double peak_fwhm(std::span<const double> axis, std::span<const double> values,
                 std::size_t peak_index, double floor);

}  // namespace cavity
