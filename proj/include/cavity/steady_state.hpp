#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"
#include "cavity/response.hpp"

namespace cavity {

enum class Stability { stable, unstable, unknown };
const char* to_string(Stability s);

enum class BranchPolicy { lowest, highest, nearest };
const char* to_string(BranchPolicy b);

struct SolveOptions {
  std::size_t scan_points = 400;   // log-spaced residual scan
  double tol_rel = 1e-10;          // on x
  double tol_abs_factor = 1e-14;   // on R, times eta^2/4
  bool classify = false;           // run the dynamics oracle per root
  BranchPolicy branch = BranchPolicy::lowest;
  double branch_hint = 0.0;        // for BranchPolicy::nearest
};

struct RootInfo {
  double x = 0.0;                        // intracavity intensity |alpha|^2
  std::complex<double> alpha;            // field at this root
  std::complex<double> gamma_coll;       // collective response at this root
  Stability stable = Stability::unknown;
};

struct SteadyStateResult {
  std::vector<RootInfo> roots;  // ascending in x
  std::size_t selected = 0;     // default branch
  double t_rate = 0.0;          // photons/s out of the cavity
  double t_norm = 0.0;          // T / T0, in [0, 1]
  double f_rate = 0.0;          // fluorescence photons/s
  double f_norm = 0.0;          // F / (N gamma), in [0, 1/2]
};

/// Any self-consistent intensity obeys x <= (eta/kappa)^2: the atoms can only
/// add loss, so Im D >= kappa/2.
double intensity_upper_bound(const SystemParams& p);

/// Cavity denominator D(x) = (dp - dc) + i kappa/2 + i Gamma(x)/2.
std::complex<double> cavity_denominator(double x, const Detuning& det, const SystemParams& p,
                                        const EnsembleBins& bins);

/// Fixed-point residual R(x) = x |D(x)|^2 - eta^2/4. R(0) < 0 when eta > 0.
double residual(double x, const Detuning& det, const SystemParams& p, const EnsembleBins& bins);

/// All fixed points of the drive/response balance, ascending in x. Sign
/// changes of R on a log-spaced scan of (0, x_ub] are refined by bisection;
/// near-tangent dips are reported once with unknown stability.
std::vector<RootInfo> solve_intensity(const Detuning& det, const SystemParams& p,
                                      const EnsembleBins& bins, const SolveOptions& opts = {});

/// Dynamics-oracle stability of one root: perturb the field, settle, see
/// whether the trajectory returns. all_roots (optional) sharpens the
/// departed-to-another-root verdict.
Stability classify_stability(const RootInfo& root, const Detuning& det, const SystemParams& p,
                             const EnsembleBins& bins,
                             const std::vector<RootInfo>* all_roots = nullptr);

/// (t_rate, t_norm) at a root.
std::pair<double, double> transmission(double x, const Detuning& det, const SystemParams& p,
                                       const EnsembleBins& bins);

/// (f_rate, f_norm) at a root.
std::pair<double, double> fluorescence(double x, const Detuning& det, const SystemParams& p,
                                       const EnsembleBins& bins);

/// solve -> (optionally classify) -> observables on the selected branch.
SteadyStateResult steady_state(const Detuning& det, const SystemParams& p, const EnsembleBins& bins,
                               const SolveOptions& opts = {});

}  // namespace cavity
