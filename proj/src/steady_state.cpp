#include "cavity/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavity/dynamics.hpp"

namespace cavity {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::stable: return "stable";
    case Stability::unstable: return "unstable";
    case Stability::unknown: return "unknown";
  }
  return "?";
}

const char* to_string(BranchPolicy b) {
  switch (b) {
    case BranchPolicy::lowest: return "lowest";
    case BranchPolicy::highest: return "highest";
    case BranchPolicy::nearest: return "nearest";
  }
  return "?";
}

double intensity_upper_bound(const SystemParams& p) {
  const double r = p.eta / p.kappa;
  return r * r;
}

std::complex<double> cavity_denominator(double x, const Detuning& det, const SystemParams& p,
                                        const EnsembleBins& bins) {
  const std::complex<double> g = collective_gamma(x, det.delta_p, p, bins).gamma_coll;
  return {det.delta_p - det.delta_c - 0.5 * g.imag(), 0.5 * (p.kappa + g.real())};
}

double residual(double x, const Detuning& det, const SystemParams& p, const EnsembleBins& bins) {
  if (x < 0.0) throw std::invalid_argument("residual: intensity must be >= 0");
  const std::complex<double> d = cavity_denominator(x, det, p, bins);
  return x * std::norm(d) - 0.25 * p.eta * p.eta;
}

namespace {

RootInfo make_root(double x, const Detuning& det, const SystemParams& p, const EnsembleBins& bins,
                   Stability st) {
  // x <= (eta/kappa)^2 is a theorem of the model (Im D >= kappa/2); snap
  // bisection rounding back inside it.
  x = std::min(std::max(x, 0.0), intensity_upper_bound(p));
  RootInfo r;
  r.x = x;
  r.gamma_coll = collective_gamma(x, det.delta_p, p, bins).gamma_coll;
  const std::complex<double> den{det.delta_p - det.delta_c - 0.5 * r.gamma_coll.imag(),
                                 0.5 * (p.kappa + r.gamma_coll.real())};
  r.alpha = 0.5 * p.eta / den;
  r.stable = st;
  return r;
}

double bisect(double a, double b, double fa, const Detuning& det, const SystemParams& p,
              const EnsembleBins& bins, double tol_rel) {
  // fa < 0 <= f(b); keep the sign convention while halving.
  for (int it = 0; it < 200 && (b - a) > tol_rel * b; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = residual(mid, det, p, bins);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::vector<RootInfo> solve_intensity(const Detuning& det, const SystemParams& p,
                                      const EnsembleBins& bins, const SolveOptions& opts) {
  p.validate();
  if (p.eta == 0.0) return {make_root(0.0, det, p, bins, Stability::unknown)};

  const double x_ub = intensity_upper_bound(p);
  const double x_top = x_ub * (1.0 + 1e-6);
  double x_floor = x_ub * 1e-12;
  const double tol_abs = opts.tol_abs_factor * 0.25 * p.eta * p.eta;

  // The scan floor must sit below the smallest root; R(0) = -eta^2/4 < 0, so
  // walk the floor down on the rare occasions R(x_floor) >= 0.
  double r_floor = residual(x_floor, det, p, bins);
  for (int guard = 0; guard < 40 && r_floor >= 0.0; ++guard) {
    x_floor *= 1e-3;
    r_floor = residual(x_floor, det, p, bins);
  }

  const std::size_t n = std::max<std::size_t>(opts.scan_points, 16);
  const double log_lo = std::log(x_floor);
  const double log_hi = std::log(x_top);

  std::vector<double> xs(n), rs(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = std::exp(log_lo + (log_hi - log_lo) * double(i) / double(n - 1));
    rs[i] = residual(xs[i], det, p, bins);
  }

  std::vector<RootInfo> roots;
  if (r_floor >= 0.0) {
    // Root squeezed below the floor: bracket against x = 0.
    roots.push_back(make_root(bisect(0.0, x_floor, -0.25 * p.eta * p.eta, det, p, bins, opts.tol_rel),
                              det, p, bins, Stability::unknown));
  }
  double prev_x = x_floor, prev_r = r_floor;
  for (std::size_t i = 0; i < n; ++i) {
    if (rs[i] == 0.0) {
      roots.push_back(make_root(xs[i], det, p, bins, Stability::unknown));
    } else if ((rs[i] < 0.0) != (prev_r < 0.0) && prev_r != 0.0) {
      roots.push_back(make_root(bisect(prev_x, xs[i], prev_r, det, p, bins, opts.tol_rel), det, p,
                                bins, Stability::unknown));
    }
    prev_x = xs[i];
    prev_r = rs[i];
  }

  // Near-tangent dips: a positive local minimum of R at the residual noise
  // floor counts as one (double) root of unknown stability.
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (rs[i] > 0.0 && rs[i] <= 16.0 * tol_abs && rs[i] < rs[i - 1] && rs[i] < rs[i + 1]) {
      double a = xs[i - 1], b = xs[i + 1];
      for (int it = 0; it < 80; ++it) {  // golden-section polish
        const double m1 = a + 0.381966011250105 * (b - a);
        const double m2 = b - 0.381966011250105 * (b - a);
        if (residual(m1, det, p, bins) < residual(m2, det, p, bins))
          b = m2;
        else
          a = m1;
      }
      const double xm = 0.5 * (a + b);
      if (residual(xm, det, p, bins) <= tol_abs)
        roots.push_back(make_root(xm, det, p, bins, Stability::unknown));
    }
  }

  std::sort(roots.begin(), roots.end(), [](const RootInfo& a, const RootInfo& b) { return a.x < b.x; });
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](const RootInfo& a, const RootInfo& b) {
                            return std::abs(a.x - b.x) <= 4.0 * opts.tol_rel * std::max(a.x, b.x);
                          }),
              roots.end());

  if (roots.empty()) {
    throw NumericalError(
        "solve_intensity: no sign change found despite eta > 0 "
        "(scan [" + std::to_string(x_floor) + ", " + std::to_string(x_top) + "], R(floor)=" +
        std::to_string(r_floor) + ", R(top)=" + std::to_string(rs.back()) + ")");
  }
  return roots;
}

Stability classify_stability(const RootInfo& root, const Detuning& det, const SystemParams& p,
                             const EnsembleBins& bins, const std::vector<RootInfo>* all_roots) {
  if (p.eta == 0.0) return Stability::stable;  // undriven damped system

  const double horizon = 500.0 / std::min(p.kappa, p.gamma);
  const double x_scale = std::max(root.x, intensity_upper_bound(p) * 1e-12);

  Stability verdict = Stability::stable;
  for (const double factor : {1.0 + 1e-3, 1.0 - 1e-3}) {
    EnsembleState seed = stationary_state(root.alpha * factor, det, p, bins);
    Trajectory traj;
    try {
      traj = settle(seed, det, p, bins, horizon);
    } catch (const NumericalError&) {
      return Stability::unknown;
    }
    if (!traj.settled) return Stability::unknown;
    const double xf = std::norm(traj.final.alpha);
    if (std::abs(xf - root.x) <= 1e-4 * x_scale) continue;  // came back
    if (all_roots) {
      for (const RootInfo& other : *all_roots) {
        if (std::abs(other.x - root.x) <= 1e-6 * x_scale) continue;
        if (std::abs(xf - other.x) <= 1e-3 * std::max(other.x, x_scale)) return Stability::unstable;
      }
    }
    verdict = Stability::unstable;  // settled somewhere that is not this root
  }
  return verdict;
}

std::pair<double, double> transmission(double x, const Detuning& det, const SystemParams& p,
                                       const EnsembleBins& bins) {
  const double t_rate = p.kappa * x;
  if (p.eta == 0.0) return {t_rate, 0.0};
  // Equivalent to kappa^2 x / eta^2 at a root, but bounded by 1 exactly:
  // the numerator (kappa/2)^2 never exceeds |D|^2.
  const std::complex<double> d = cavity_denominator(x, det, p, bins);
  const double hk = 0.5 * p.kappa;
  return {t_rate, hk * hk / std::norm(d)};
}

std::pair<double, double> fluorescence(double x, const Detuning& det, const SystemParams& p,
                                       const EnsembleBins& bins) {
  if (x < 0.0) throw std::invalid_argument("fluorescence: intensity must be >= 0");
  const double wb = p.coherence_halfwidth();
  const double sat = p.g0 * p.g0 * x * wb / p.gamma;
  double f_norm = 0.0;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    const double d = det.delta_p - bins.nodes[i];
    f_norm += bins.weights[i] * 0.5 * sat / (d * d + wb * wb + sat);
  }
  if (p.n_atoms == 0.0) return {0.0, 0.0};
  return {p.n_atoms * p.gamma * f_norm, f_norm};
}

SteadyStateResult steady_state(const Detuning& det, const SystemParams& p, const EnsembleBins& bins,
                               const SolveOptions& opts) {
  SteadyStateResult out;
  out.roots = solve_intensity(det, p, bins, opts);
  if (opts.classify)
    for (RootInfo& r : out.roots) r.stable = classify_stability(r, det, p, bins, &out.roots);

  // Default branch: adiabatic continuation from zero drive, i.e. the smallest
  // root that is not known unstable.
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < out.roots.size(); ++i)
    if (out.roots[i].stable != Stability::unstable) eligible.push_back(i);
  if (eligible.empty())
    for (std::size_t i = 0; i < out.roots.size(); ++i) eligible.push_back(i);

  switch (opts.branch) {
    case BranchPolicy::lowest: out.selected = eligible.front(); break;
    case BranchPolicy::highest: out.selected = eligible.back(); break;
    case BranchPolicy::nearest: {
      std::size_t best = eligible.front();
      for (std::size_t i : eligible)
        if (std::abs(out.roots[i].x - opts.branch_hint) < std::abs(out.roots[best].x - opts.branch_hint))
          best = i;
      out.selected = best;
      break;
    }
  }

  const double x = out.roots[out.selected].x;
  std::tie(out.t_rate, out.t_norm) = transmission(x, det, p, bins);
  std::tie(out.f_rate, out.f_norm) = fluorescence(x, det, p, bins);
  return out;
}

}  // namespace cavity
