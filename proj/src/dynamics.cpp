#include "cavity/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cavity/response.hpp"

namespace cavity {

EnsembleState ground_state(const EnsembleBins& bins) {
  EnsembleState st;
  st.alpha = 0.0;
  st.s.assign(bins.size(), {0.0, 0.0});
  st.z.assign(bins.size(), -1.0);
  st.t = 0.0;
  return st;
}

EnsembleState stationary_state(std::complex<double> alpha, const Detuning& det,
                               const SystemParams& p, const EnsembleBins& bins) {
  EnsembleState st;
  st.alpha = alpha;
  const double x = std::norm(alpha);
  st.s.resize(bins.size());
  st.z.resize(bins.size());
  for (std::size_t i = 0; i < bins.size(); ++i) {
    st.z[i] = inversion(x, det.delta_p, bins.nodes[i], p);
    st.s[i] = coherence(st.z[i], alpha, det.delta_p, bins.nodes[i], p);
  }
  st.t = 0.0;
  return st;
}

namespace {

// Flat layout: [alpha_re, alpha_im, s_re[0..m), s_im[0..m), z[0..m)].
struct FlatSystem {
  const Detuning& det;
  const SystemParams& p;
  const EnsembleBins& bins;
  std::vector<double> nw;  // n_atoms * weight per bin
  double max_bin_detune = 0.0;

  FlatSystem(const Detuning& d, const SystemParams& pp, const EnsembleBins& b)
      : det(d), p(pp), bins(b) {
    nw.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
      nw[i] = pp.n_atoms * b.weights[i];
      max_bin_detune = std::max(max_bin_detune, std::abs(d.delta_p - b.nodes[i]));
    }
  }

  std::size_t dim() const { return 2 + 3 * bins.size(); }

  void rhs(const double* y, double* dy) const {
    const std::size_t m = bins.size();
    const double ar = y[0], ai = y[1];
    const double* sr = y + 2;
    const double* si = y + 2 + m;
    const double* z = y + 2 + 2 * m;

    double sum_r = 0.0, sum_i = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      sum_r += nw[i] * sr[i];
      sum_i += nw[i] * si[i];
    }

    const double dpc = det.delta_p - det.delta_c;
    const double hk = 0.5 * p.kappa;
    const double hg = 0.5 * p.g0;
    const double wb = p.coherence_halfwidth();

    dy[0] = -dpc * ai - hk * ar + hg * sum_i;
    dy[1] = dpc * ar - hk * ai - 0.5 * p.eta - hg * sum_r;

    double* dsr = dy + 2;
    double* dsi = dy + 2 + m;
    double* dz = dy + 2 + 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double a = det.delta_p - bins.nodes[i];
      dsr[i] = -a * si[i] - wb * sr[i] - hg * z[i] * ai;
      dsi[i] = a * sr[i] - wb * si[i] + hg * z[i] * ar;
      dz[i] = -p.gamma * (1.0 + z[i]) - 2.0 * p.g0 * (ar * si[i] - ai * sr[i]);
    }
  }

  double omega_max(const double* y) const {
    const double x_est = y[0] * y[0] + y[1] * y[1];
    double om = std::max({std::abs(det.delta_p - det.delta_c), max_bin_detune, p.kappa,
                          p.gamma + p.gamma_d, p.g0 * std::sqrt(x_est)});
    om = std::max(om, std::cbrt(p.g0 * p.eta * p.eta));  // drive bound, eta^{2/3}-scaled
    return om;
  }
};

void pack(const EnsembleState& st, std::vector<double>& y) {
  const std::size_t m = st.s.size();
  y.resize(2 + 3 * m);
  y[0] = st.alpha.real();
  y[1] = st.alpha.imag();
  for (std::size_t i = 0; i < m; ++i) {
    y[2 + i] = st.s[i].real();
    y[2 + m + i] = st.s[i].imag();
    y[2 + 2 * m + i] = st.z[i];
  }
}

void unpack(const std::vector<double>& y, double t, EnsembleState& st) {
  const std::size_t m = (y.size() - 2) / 3;
  st.alpha = {y[0], y[1]};
  st.s.resize(m);
  st.z.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    st.s[i] = {y[2 + i], y[2 + m + i]};
    st.z[i] = y[2 + 2 * m + i];
  }
  st.t = t;
}

double weighted_mean_z(const FlatSystem& sys, const double* y) {
  const std::size_t m = sys.bins.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < m; ++i) acc += sys.bins.weights[i] * y[2 + 2 * m + i];
  return acc;
}

// Dormand-Prince 5(4), FSAL.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(const FlatSystem& sys, const EnsembleState& initial, const StepOptions& opts,
          Trajectory& traj)
      : sys_(sys), opt_(opts), traj_(traj) {
    pack(initial, y_);
    t_ = initial.t;
    const std::size_t n = y_.size();
    k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
    k5_.resize(n); k6_.resize(n); k7_.resize(n); ytmp_.resize(n); ynew_.resize(n);
    sys_.rhs(y_.data(), k1_.data());
    h_ = 0.01 / sys_.omega_max(y_.data());
    record();
  }

  double t() const { return t_; }
  const std::vector<double>& y() const { return y_; }

  double intensity() const { return y_[0] * y_[0] + y_[1] * y_[1]; }
  double mean_z() const { return weighted_mean_z(sys_, y_.data()); }

  void advance_to(double t_target) {
    while (t_ < t_target) {
      const double hmax = opt_.max_step_factor / sys_.omega_max(y_.data());
      h_ = std::min({h_, hmax, t_target - t_});
      if (!(h_ > std::abs(t_) * 1e-15 + 1e-300))
        throw NumericalError("evolve: step size underflow at t=" + std::to_string(t_) +
                             " (stiffness beyond the explicit-integrator budget; reduce rates)");
      if (traj_.n_steps + traj_.n_rejected > opt_.max_steps)
        throw NumericalError("evolve: step budget exhausted at t=" + std::to_string(t_));
      step_once(t_target);
    }
  }

 private:
  void stage(const std::vector<double>& y0, double h, std::vector<double>& out,
             std::initializer_list<std::pair<const std::vector<double>*, double>> terms) const {
    const std::size_t n = y0.size();
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (const auto& [k, a] : terms) acc += a * (*k)[i];
      out[i] = y0[i] + h * acc;
    }
  }

  void step_once(double t_target) {
    const std::size_t n = y_.size();
    const double h = h_;

    stage(y_, h, ytmp_, {{&k1_, a21}});
    sys_.rhs(ytmp_.data(), k2_.data());
    stage(y_, h, ytmp_, {{&k1_, a31}, {&k2_, a32}});
    sys_.rhs(ytmp_.data(), k3_.data());
    stage(y_, h, ytmp_, {{&k1_, a41}, {&k2_, a42}, {&k3_, a43}});
    sys_.rhs(ytmp_.data(), k4_.data());
    stage(y_, h, ytmp_, {{&k1_, a51}, {&k2_, a52}, {&k3_, a53}, {&k4_, a54}});
    sys_.rhs(ytmp_.data(), k5_.data());
    stage(y_, h, ytmp_, {{&k1_, a61}, {&k2_, a62}, {&k3_, a63}, {&k4_, a64}, {&k5_, a65}});
    sys_.rhs(ytmp_.data(), k6_.data());
    stage(y_, h, ynew_, {{&k1_, b1}, {&k3_, b3}, {&k4_, b4}, {&k5_, b5}, {&k6_, b6}});
    sys_.rhs(ynew_.data(), k7_.data());

    double err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (e1 * k1_[i] + e3 * k3_[i] + e4 * k4_[i] + e5 * k5_[i] + e6 * k6_[i] +
                            e7 * k7_[i]);
      const double sc = opt_.atol + opt_.rtol * std::max(std::abs(y_[i]), std::abs(ynew_[i]));
      err2 += (e / sc) * (e / sc);
    }
    const double err = std::sqrt(err2 / double(n));

    if (err <= 1.0) {
      t_ += h;
      y_.swap(ynew_);
      k1_.swap(k7_);  // FSAL
      ++traj_.n_steps;
      check_bloch();
      record();
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(grow, 0.2, 5.0);
      (void)t_target;
    } else {
      ++traj_.n_rejected;
      h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }

  void check_bloch() {
    const std::size_t m = sys_.bins.size();
    const double* sr = y_.data() + 2;
    const double* si = y_.data() + 2 + m;
    const double* z = y_.data() + 2 + 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
      const double r2 = 4.0 * (sr[i] * sr[i] + si[i] * si[i]) + z[i] * z[i];
      const double excess = r2 - 1.0;
      if (excess > traj_.max_bloch_excess) traj_.max_bloch_excess = excess;
      if (excess > opt_.bloch_tol)
        throw NumericalError("evolve: Bloch-ball violation 4|s|^2+z^2-1=" + std::to_string(excess) +
                             " at bin " + std::to_string(i) + ", t=" + std::to_string(t_));
    }
  }

  void record() {
    if (traj_.samples.size() >= opt_.max_samples && opt_.max_samples >= 4) {
      // Halve the sampling density, keep order.
      std::vector<TrajectorySample> kept;
      kept.reserve(traj_.samples.size() / 2 + 1);
      for (std::size_t i = 0; i < traj_.samples.size(); i += 2) kept.push_back(traj_.samples[i]);
      traj_.samples.swap(kept);
      stride_ *= 2;
    }
    if (step_counter_++ % stride_ == 0 || traj_.samples.empty())
      traj_.samples.push_back({t_, {y_[0], y_[1]}, mean_z()});
  }

  const FlatSystem& sys_;
  StepOptions opt_;
  Trajectory& traj_;
  std::vector<double> y_, k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, ynew_;
  double t_ = 0.0, h_ = 0.0;
  std::size_t stride_ = 1, step_counter_ = 0;
};

}  // namespace

void derivative(const EnsembleState& state, const Detuning& det, const SystemParams& p,
                const EnsembleBins& bins, EnsembleState& out) {
  if (state.s.size() != bins.size() || state.z.size() != bins.size())
    throw std::invalid_argument("derivative: state size does not match bins");
  FlatSystem sys(det, p, bins);
  std::vector<double> y, dy(sys.dim());
  pack(state, y);
  sys.rhs(y.data(), dy.data());
  unpack(dy, state.t, out);
}

Trajectory evolve(const EnsembleState& initial, const Detuning& det, const SystemParams& p,
                  const EnsembleBins& bins, double t_end, const StepOptions& opts) {
  if (!(t_end > 0.0)) throw std::invalid_argument("evolve: t_end must be > 0");
  p.validate();
  FlatSystem sys(det, p, bins);
  Trajectory traj;
  Stepper stepper(sys, initial, opts, traj);
  stepper.advance_to(initial.t + t_end);
  unpack(stepper.y(), stepper.t(), traj.final);
  if (traj.samples.empty() || traj.samples.back().t != stepper.t())
    traj.samples.push_back({stepper.t(), traj.final.alpha, stepper.mean_z()});
  return traj;
}

Trajectory settle(const EnsembleState& initial, const Detuning& det, const SystemParams& p,
                  const EnsembleBins& bins, double horizon, double criterion,
                  const StepOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("settle: horizon must be > 0");
  p.validate();
  FlatSystem sys(det, p, bins);
  Trajectory traj;
  Stepper stepper(sys, initial, opts, traj);

  const double window = 5.0 / p.gamma;
  const double x_floor = 1e-30;
  double prev_x = stepper.intensity();
  double prev_z = stepper.mean_z();
  double t_goal = initial.t;
  const double t_stop = initial.t + horizon;

  while (t_goal < t_stop) {
    t_goal = std::min(t_goal + window, t_stop);
    stepper.advance_to(t_goal);
    const double x = stepper.intensity();
    const double zb = stepper.mean_z();
    const double dx = std::abs(x - prev_x) / std::max({x, prev_x, x_floor});
    const double dz = std::abs(zb - prev_z) / std::max(std::abs(zb), 1e-12);
    if (dx < criterion && dz < criterion) {
      traj.settled = true;
      break;
    }
    prev_x = x;
    prev_z = zb;
  }
  unpack(stepper.y(), stepper.t(), traj.final);
  if (traj.samples.empty() || traj.samples.back().t != stepper.t())
    traj.samples.push_back({stepper.t(), traj.final.alpha, stepper.mean_z()});
  return traj;
}

}  // namespace cavity
