#include "cavity/broadening.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cavity/params.hpp"

namespace cavity {

namespace {

constexpr double kSupportSigmas = 8.0;  // Gaussian mass beyond this is < 1.3e-15

// Symmetric tridiagonal QL with implicit shifts, accumulating only the first
// eigenvector row (all that Gauss weights need). d: diagonal, e: subdiagonal
// in e[1..n-1]; on return d holds eigenvalues, q the first-row components.
void tql_first_row(std::vector<double>& d, std::vector<double>& e, std::vector<double>& q) {
  const int n = int(d.size());
  q.assign(n, 0.0);
  q[0] = 1.0;
  if (n == 1) return;
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) + dd == dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw NumericalError("gauss rule: eigenvalue iteration stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = q[i + 1];
          q[i + 1] = s * q[i] + c * f;
          q[i] = c * q[i] - s * f;
        }
        if (r == 0.0 && i >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

const char* to_string(BinStrategy s) {
  switch (s) {
    case BinStrategy::delta: return "delta";
    case BinStrategy::gauss_hermite: return "gauss_hermite";
    case BinStrategy::adaptive_lorentzian: return "adaptive_lorentzian";
  }
  return "?";
}

BinStrategy bin_strategy_from_string(const std::string& name) {
  if (name == "delta") return BinStrategy::delta;
  if (name == "gauss_hermite") return BinStrategy::gauss_hermite;
  if (name == "adaptive_lorentzian") return BinStrategy::adaptive_lorentzian;
  throw ConfigError("unknown bin strategy '" + name + "'");
}

double gaussian_density(double omega, double delta_omega) {
  if (!(delta_omega > 0.0))
    throw std::invalid_argument(
        "gaussian_density: delta_omega must be > 0; use the delta bin strategy for an unbroadened ensemble");
  const double u = omega / delta_omega;
  return std::exp(-0.5 * u * u) / (delta_omega * std::sqrt(two_pi));
}

void gauss_hermite_rule(std::size_t m, std::vector<double>& nodes, std::vector<double>& weights) {
  if (m == 0) throw std::invalid_argument("gauss_hermite_rule: m must be >= 1");

  // Golub-Welsch: Jacobi matrix of the Hermite recurrence, b_k = sqrt(k/2).
  std::vector<double> d(m, 0.0), e(m, 0.0), q;
  for (std::size_t k = 1; k < m; ++k) e[k] = std::sqrt(0.5 * double(k));
  tql_first_row(d, e, q);

  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  const double sqrt_pi = 1.7724538509055160272981674833411;
  nodes.resize(m);
  weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    nodes[i] = d[order[i]];
    weights[i] = sqrt_pi * q[order[i]] * q[order[i]];
  }
  // Enforce the exact +- symmetry of the rule.
  for (std::size_t i = 0; i < m / 2; ++i) {
    const std::size_t j = m - 1 - i;
    const double t = 0.5 * (nodes[j] - nodes[i]);
    nodes[j] = t;
    nodes[i] = -t;
    const double w = 0.5 * (weights[i] + weights[j]);
    weights[i] = w;
    weights[j] = w;
  }
  if (m % 2 == 1) nodes[m / 2] = 0.0;
}

void gauss_legendre_rule(std::size_t m, std::vector<double>& nodes, std::vector<double>& weights) {
  if (m == 0) throw std::invalid_argument("gauss_legendre_rule: m must be >= 1");
  nodes.assign(m, 0.0);
  weights.assign(m, 0.0);
  const std::size_t half = (m + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (double(i) + 0.75) / (double(m) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 1; k < m; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - double(k) * p0) / double(k + 1);
        p0 = p1;
        p1 = p2;
      }
      dp = double(m) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-15 * (1.0 + std::abs(x))) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[m - 1 - i] = x;
    weights[i] = w;
    weights[m - 1 - i] = w;
  }
  if (m % 2 == 1) nodes[m / 2] = 0.0;
}

namespace {

// Matches sum(w) = 1, sum(w u) = 0, sum(w u^2) = 1 exactly (u = omega/sigma)
// by a minimal multiplicative polynomial correction of the weights. The
// correction is of the order of the quadrature error, i.e. tiny.
void match_moments(std::vector<double>& weights, const std::vector<double>& nodes, double sigma) {
  const std::size_t n = weights.size();
  double mom[5] = {0, 0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = nodes[i] / sigma;
    double uk = weights[i];
    for (int k = 0; k < 5; ++k) {
      mom[k] += uk;
      uk *= u;
    }
  }
  // Solve G lambda = r with G_{jk} = mom[j+k], r = target - current moments.
  double g[3][3];
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) g[j][k] = mom[j + k];
  double r[3] = {1.0 - mom[0], 0.0 - mom[1], 1.0 - mom[2]};
  // Gaussian elimination with partial pivoting on the 3x3 system.
  int idx[3] = {0, 1, 2};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int row = col + 1; row < 3; ++row)
      if (std::abs(g[idx[row]][col]) > std::abs(g[idx[piv]][col])) piv = row;
    std::swap(idx[col], idx[piv]);
    const double d = g[idx[col]][col];
    if (d == 0.0) return;  // degenerate node set; leave weights as-is
    for (int row = col + 1; row < 3; ++row) {
      const double f = g[idx[row]][col] / d;
      for (int k = col; k < 3; ++k) g[idx[row]][k] -= f * g[idx[col]][k];
      r[idx[row]] -= f * r[idx[col]];
    }
  }
  double lam[3];
  for (int col = 2; col >= 0; --col) {
    double s = r[idx[col]];
    for (int k = col + 1; k < 3; ++k) s -= g[idx[col]][k] * lam[k];
    lam[col] = s / g[idx[col]][col];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = nodes[i] / sigma;
    weights[i] *= 1.0 + lam[0] + lam[1] * u + lam[2] * u * u;
  }
}

}  // namespace

EnsembleBins build_bins(double delta_omega, std::size_t m, BinStrategy strategy) {
  if (m == 0) throw std::invalid_argument("build_bins: node count m must be >= 1");
  if (delta_omega < 0.0) throw std::invalid_argument("build_bins: delta_omega must be >= 0");
  if (delta_omega == 0.0 && strategy != BinStrategy::delta)
    throw std::invalid_argument("build_bins: delta_omega == 0 requires the delta strategy");
  if (delta_omega == 0.0 && m > 1)
    throw std::invalid_argument("build_bins: delta distribution admits exactly one node");

  EnsembleBins bins;
  bins.strategy = strategy;
  switch (strategy) {
    case BinStrategy::delta: {
      if (m != 1) throw std::invalid_argument("build_bins: delta strategy requires m == 1");
      bins.nodes = {0.0};
      bins.weights = {1.0};
      break;
    }
    case BinStrategy::gauss_hermite: {
      if (m < 2)
        throw std::invalid_argument("build_bins: gauss_hermite with delta_omega > 0 requires m >= 2");
      std::vector<double> t, w;
      gauss_hermite_rule(m, t, w);
      const double scale = std::sqrt(2.0) * delta_omega;
      const double inv_sqrt_pi = 0.56418958354775628694807945156077;
      double total = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double om = scale * t[i];
        if (std::abs(om) > kSupportSigmas * delta_omega) continue;  // dead tail
        bins.nodes.push_back(om);
        bins.weights.push_back(w[i] * inv_sqrt_pi);
        total += bins.weights.back();
      }
      for (double& wi : bins.weights) wi /= total;
      break;
    }
    case BinStrategy::adaptive_lorentzian:
      throw std::invalid_argument(
          "build_bins: adaptive_lorentzian needs a probe location; call build_adaptive_bins");
  }
  return bins;
}

EnsembleBins build_adaptive_bins(double delta_omega, std::size_t m, double probe_offset,
                                 double width_hint) {
  if (!(delta_omega > 0.0))
    throw std::invalid_argument("build_adaptive_bins: delta_omega must be > 0 (use delta strategy)");
  if (!(width_hint > 0.0)) throw std::invalid_argument("build_adaptive_bins: width_hint must be > 0");

  const double lo = -kSupportSigmas * delta_omega;
  const double hi = kSupportSigmas * delta_omega;
  const double c = probe_offset;
  const double wmin = width_hint;

  // Panel breakpoints: geometric ladder around the probe so the narrowest
  // Lorentzian core is resolved, capped at delta_omega/2 so the Gaussian
  // envelope is resolved everywhere.
  // All edge arithmetic below is sign-symmetric in floating point, so a
  // mirrored probe (-c) yields exactly negated nodes; map mirror symmetry
  // then holds to rounding, not just to quadrature error.
  std::vector<double> brk = {lo, hi};
  if (c > lo && c < hi) brk.push_back(c);
  for (double step = wmin; step < (hi - lo); step *= 2.0) {
    const double up = c + step;
    const double dn = c - step;
    if (up > lo && up < hi) brk.push_back(up);
    if (dn > lo && dn < hi) brk.push_back(dn);
  }
  std::sort(brk.begin(), brk.end());
  brk.erase(std::unique(brk.begin(), brk.end()), brk.end());  // zero-width panels are harmless

  const double cap = 0.5 * delta_omega;
  std::vector<double> edges;
  edges.push_back(brk.front());
  for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
    const double a = brk[i], b = brk[i + 1];
    const auto parts = std::size_t(std::ceil((b - a) / cap));
    const double mid = 0.5 * (a + b);
    const double w = b - a;
    std::vector<double> interior;
    for (std::size_t k = 1; 2 * k < parts; ++k) {
      const double off = (0.5 - double(k) / double(parts)) * w;
      interior.push_back(mid - off);
      interior.push_back(mid + off);
    }
    if (parts % 2 == 0 && parts >= 2) interior.push_back(mid);
    std::sort(interior.begin(), interior.end());
    for (double x : interior) edges.push_back(x);
    edges.push_back(b);
  }

  const std::size_t n_panels = edges.size() - 1;
  std::size_t order = (m == 0) ? 12 : std::clamp<std::size_t>(m / n_panels, 3, 64);

  std::vector<double> gx, gw;
  gauss_legendre_rule(order, gx, gw);

  EnsembleBins bins;
  bins.strategy = BinStrategy::adaptive_lorentzian;
  bins.nodes.reserve(n_panels * order);
  bins.weights.reserve(n_panels * order);
  for (std::size_t p = 0; p < n_panels; ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (std::size_t j = 0; j < order; ++j) {
      const double om = mid + half * gx[j];
      bins.nodes.push_back(om);
      bins.weights.push_back(gw[j] * half * gaussian_density(om, delta_omega));
    }
  }

  match_moments(bins.weights, bins.nodes, delta_omega);
  double total = 0.0;
  for (double w : bins.weights) total += w;
  for (double& w : bins.weights) w /= total;
  return bins;
}

}  // namespace cavity
