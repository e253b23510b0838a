#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"

namespace cavity {

/// Dynamical mean-field state: cavity amplitude plus per-bin coherences and
/// inversions. Bloch ball 4|s|^2 + z^2 <= 1 is preserved by the flow.
struct EnsembleState {
  std::complex<double> alpha;
  std::vector<std::complex<double>> s;
  std::vector<double> z;
  double t = 0.0;
};

/// Ground state: empty cavity, all atoms down.
EnsembleState ground_state(const EnsembleBins& bins);

/// Per-class stationary state consistent with a given field (used to seed
/// trajectories at solver roots).
EnsembleState stationary_state(std::complex<double> alpha, const Detuning& det,
                               const SystemParams& p, const EnsembleBins& bins);

/// Time derivative of the mean-field equations at `state`, written into
/// `out` (same layout; out.t gets dt/dt = 1 ignored, set to state.t).
void derivative(const EnsembleState& state, const Detuning& det, const SystemParams& p,
                const EnsembleBins& bins, EnsembleState& out);

struct StepOptions {
  double rtol = 1e-8;
  double atol = 1e-12;
  double max_step_factor = 0.05;  // h_max = factor / Omega_max
  double bloch_tol = 1e-9;        // abort beyond this Bloch-ball excess
  std::size_t max_steps = 200'000'000;
  std::size_t max_samples = 2048;
};

struct TrajectorySample {
  double t = 0.0;
  std::complex<double> alpha;
  double mean_z = 0.0;  // ensemble-weighted inversion
};

struct Trajectory {
  std::vector<TrajectorySample> samples;  // strictly increasing t
  bool settled = false;
  EnsembleState final;
  std::size_t n_steps = 0;
  std::size_t n_rejected = 0;
  double max_bloch_excess = 0.0;  // worst 4|s|^2+z^2-1 seen, clipped at 0
};

/// Adaptive embedded Runge-Kutta integration of the mean-field equations up
/// to t_end (relative to initial.t). Throws NumericalError on step underflow
/// or Bloch-ball violation beyond tolerance.
Trajectory evolve(const EnsembleState& initial, const Detuning& det, const SystemParams& p,
                  const EnsembleBins& bins, double t_end, const StepOptions& opts = {});

/// Integrates until the windowed relative change of (|alpha|^2, mean z) over
/// 5/gamma drops below `criterion`, or `horizon` elapses. Non-convergence is
/// a flagged result, not an error.
Trajectory settle(const EnsembleState& initial, const Detuning& det, const SystemParams& p,
                  const EnsembleBins& bins, double horizon, double criterion = 1e-7,
                  const StepOptions& opts = {});

}  // namespace cavity
