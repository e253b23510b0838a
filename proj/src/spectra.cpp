#include "cavity/spectra.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace cavity {

DressedCurve dressed_resonances(double delta_c, double n_atoms, double g0) {
  if (n_atoms < 0.0) throw std::invalid_argument("dressed_resonances: n_atoms must be >= 0");
  const double ng2 = n_atoms * g0 * g0;
  const double disc = std::sqrt(delta_c * delta_c + ng2);
  DressedCurve out;
  out.delta_c = delta_c;
  if (ng2 == 0.0) {
    out.upper = std::max(delta_c, 0.0);
    out.lower = std::min(delta_c, 0.0);
    return out;
  }
  // Stable quadratic roots: form the large-magnitude root first, get the
  // other from the product identity upper*lower = -ng2/4.
  if (delta_c >= 0.0) {
    out.upper = 0.5 * (delta_c + disc);
    out.lower = -0.25 * ng2 / out.upper;
  } else {
    out.lower = 0.5 * (delta_c - disc);
    out.upper = -0.25 * ng2 / out.lower;
  }
  return out;
}

GridSpec make_grid(double c_min, double c_max, std::size_t nc, double p_min, double p_max,
                   std::size_t np) {
  if (nc == 0 || np == 0) throw std::invalid_argument("make_grid: empty axis");
  GridSpec g;
  g.delta_c.resize(nc);
  g.delta_p.resize(np);
  for (std::size_t i = 0; i < nc; ++i)
    g.delta_c[i] = nc == 1 ? c_min : c_min + (c_max - c_min) * double(i) / double(nc - 1);
  for (std::size_t i = 0; i < np; ++i)
    g.delta_p[i] = np == 1 ? p_min : p_min + (p_max - p_min) * double(i) / double(np - 1);
  return g;
}

namespace {

void check_monotone(const std::vector<double>& axis, const char* name) {
  if (axis.empty()) throw std::invalid_argument(std::string("sweep_map: empty ") + name + " axis");
  for (std::size_t i = 1; i < axis.size(); ++i)
    if (!(axis[i] > axis[i - 1]) && !(axis[i] < axis[i - 1]))
      throw std::invalid_argument(std::string("sweep_map: non-monotone ") + name + " axis");
  const bool inc = axis.size() < 2 || axis[1] > axis[0];
  for (std::size_t i = 1; i < axis.size(); ++i)
    if ((axis[i] > axis[i - 1]) != inc)
      throw std::invalid_argument(std::string("sweep_map: non-monotone ") + name + " axis");
}

}  // namespace

SpectralMap sweep_map(const GridSpec& grid, const SystemParams& p, const SweepOptions& opts) {
  check_monotone(grid.delta_c, "delta_c");
  check_monotone(grid.delta_p, "delta_p");
  p.validate();

  SpectralMap map;
  map.delta_c_axis = grid.delta_c;
  map.delta_p_axis = grid.delta_p;
  const std::size_t nc = grid.delta_c.size();
  const std::size_t np = grid.delta_p.size();
  map.t_norm.assign(nc * np, 0.0);
  map.f_norm.assign(nc * np, 0.0);
  map.root_count.assign(nc * np, 0);
  map.meta = MapMeta{p, opts.strategy, opts.bins_m, opts.solve};

  // Bins per probe detuning, built serially so the map is identical for any
  // thread count.
  std::vector<EnsembleBins> bins_by_p(np);
  if (opts.strategy == BinStrategy::adaptive_lorentzian) {
    const double hint = p.coherence_halfwidth();
    for (std::size_t ip = 0; ip < np; ++ip)
      bins_by_p[ip] = build_adaptive_bins(p.delta_omega, opts.bins_m, grid.delta_p[ip], hint);
  } else {
    const EnsembleBins shared = build_bins(
        p.delta_omega, opts.strategy == BinStrategy::delta ? 1 : std::max<std::size_t>(opts.bins_m, 2),
        opts.strategy);
    for (std::size_t ip = 0; ip < np; ++ip) bins_by_p[ip] = shared;
  }

  const std::size_t cells = nc * np;
  unsigned n_threads = opts.threads > 0 ? unsigned(opts.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, cells);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::string err_what;

  const auto worker = [&]() {
    for (;;) {
      const std::size_t cell = next.fetch_add(1);
      if (cell >= cells || failed.load()) return;
      const std::size_t ic = cell / np;
      const std::size_t ip = cell % np;
      try {
        const Detuning det{grid.delta_c[ic], grid.delta_p[ip]};
        const SteadyStateResult r = steady_state(det, p, bins_by_p[ip], opts.solve);
        map.t_norm[cell] = r.t_norm;
        map.f_norm[cell] = r.f_norm;
        map.root_count[cell] = int(r.roots.size());
      } catch (const std::exception& e) {
        std::scoped_lock lock(err_mutex);
        if (!failed.exchange(true))
          err_what = "sweep_map: cell (ic=" + std::to_string(ic) + ", ip=" + std::to_string(ip) +
                     "): " + e.what();
      }
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failed.load()) throw NumericalError(err_what);
  return map;
}

std::vector<Peak> find_peaks(std::span<const double> axis, std::span<const double> values,
                             double min_prominence) {
  const std::size_t n = axis.size();
  if (n < 3 || values.size() != n)
    throw std::invalid_argument("find_peaks: need at least 3 matching samples");
  const double h = axis[1] - axis[0];
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs((axis[i] - axis[i - 1]) - h) > 1e-9 * std::abs(h) + 1e-300)
      throw std::invalid_argument("find_peaks: grid must be uniform");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("find_peaks: non-finite value");

  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(values[i] > values[i - 1] && values[i] > values[i + 1])) continue;

    // Topographic prominence: lowest point on the path to higher ground,
    // per side; boundary counts as ground level.
    double min_left = values[i];
    for (std::size_t j = i; j-- > 0;) {
      min_left = std::min(min_left, values[j]);
      if (values[j] > values[i]) break;
    }
    double min_right = values[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      min_right = std::min(min_right, values[j]);
      if (values[j] > values[i]) break;
    }
    const double prominence = values[i] - std::max(min_left, min_right);
    if (prominence < min_prominence) continue;

    const double denom = values[i - 1] - 2.0 * values[i] + values[i + 1];
    double offset = 0.0;
    if (denom != 0.0) offset = 0.5 * (values[i - 1] - values[i + 1]) / denom;
    offset = std::clamp(offset, -0.5, 0.5);
    peaks.push_back({axis[i] + offset * h, values[i] - 0.25 * (values[i - 1] - values[i + 1]) * offset});
  }
  return peaks;
}

double peak_fwhm(std::span<const double> axis, std::span<const double> values,
                 std::size_t peak_index, double floor) {
  const std::size_t n = axis.size();
  if (peak_index >= n || values.size() != n) return 0.0;
  const double level = floor + 0.5 * (values[peak_index] - floor);
  double left = axis.front(), right = axis.back();
  bool has_left = false, has_right = false;
  for (std::size_t j = peak_index; j-- > 0;) {
    if (values[j] <= level) {
      const double frac = (level - values[j]) / (values[j + 1] - values[j]);
      left = axis[j] + frac * (axis[j + 1] - axis[j]);
      has_left = true;
      break;
    }
  }
  for (std::size_t j = peak_index + 1; j < n; ++j) {
    if (values[j] <= level) {
      const double frac = (values[j - 1] - level) / (values[j - 1] - values[j]);
      right = axis[j - 1] + frac * (axis[j] - axis[j - 1]);
      has_right = true;
      break;
    }
  }
  if (!has_left || !has_right) return 0.0;
  return right - left;
}

std::vector<SplittingPoint> splitting_vs_n(std::span<const double> n_list, const SystemParams& base,
                                           const SweepOptions& opts) {
  std::vector<SplittingPoint> out;
  out.reserve(n_list.size());
  for (double n_atoms : n_list) {
    if (n_atoms < 0.0) throw std::invalid_argument("splitting_vs_n: n_atoms must be >= 0");
    SplittingPoint pt;
    pt.n_atoms = n_atoms;
    pt.sqrt_n_prediction = base.g0 * std::sqrt(n_atoms);
    if (n_atoms == 0.0) {
      out.push_back(pt);
      continue;
    }
    SystemParams p = base;
    p.n_atoms = n_atoms;

    const double lw = p.kappa + p.gamma + p.gamma_d;
    const double half = 0.65 * pt.sqrt_n_prediction + 10.0 * lw;
    const std::size_t points = std::min<std::size_t>(
        8192, std::max<std::size_t>(401, std::size_t(2.0 * half / (lw / 8.0)) | 1));
    GridSpec grid = make_grid(0.0, 0.0, 1, -half, half, points);

    SweepOptions sw = opts;
    if (p.delta_omega == 0.0) sw.strategy = BinStrategy::delta;
    const SpectralMap map = sweep_map(grid, p, sw);

    const double vmax = *std::max_element(map.t_norm.begin(), map.t_norm.end());
    std::vector<Peak> peaks = find_peaks(map.delta_p_axis, map.t_norm, 0.05 * vmax);
    if (peaks.size() >= 2) {
      std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
      pt.measured = std::abs(peaks[0].location - peaks[1].location);
      pt.resolved = pt.measured > std::max(p.kappa, p.gamma + p.gamma_d);
    }
    out.push_back(pt);
  }
  return out;
}

}  // namespace cavity
