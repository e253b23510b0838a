#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "cavity/broadening.hpp"
#include "cavity/params.hpp"
#include "cavity/spectra.hpp"

using namespace cavity;

namespace {

SystemParams paper_params(double n_atoms, double eta_khz) {
  SystemParams p;
  p.g0 = angular_from_linear_khz(66.0);
  p.kappa = angular_from_linear_khz(70.0);
  p.gamma = angular_from_linear_khz(182.4);
  p.n_atoms = n_atoms;
  p.eta = angular_from_linear_khz(eta_khz);
  return p;
}

}  // namespace

TEST_SUITE("spectra") {
  TEST_CASE("coupled-state resonances: anchors") {
    const double g0 = angular_from_linear_khz(66.0);
    {
      // sqrt(22500) = 150 exactly: branches at +-4.95 MHz.
      const DressedCurve c = dressed_resonances(0.0, 22500.0, g0);
      CHECK(c.upper == doctest::Approx(two_pi * 4.95e6).epsilon(1e-12));
      CHECK(c.lower == doctest::Approx(-two_pi * 4.95e6).epsilon(1e-12));
    }
    {
      const DressedCurve c = dressed_resonances(0.0, 25000.0, g0);
      CHECK(linear_khz_from_angular(c.upper) == doctest::Approx(5217.758).epsilon(1e-6));
    }
    {
      const double dc = angular_from_linear_khz(1234.0);
      const DressedCurve c = dressed_resonances(dc, 0.0, g0);
      CHECK(c.upper == dc);
      CHECK(c.lower == 0.0);
      const DressedCurve cn = dressed_resonances(-dc, 0.0, g0);
      CHECK(cn.upper == 0.0);
      CHECK(cn.lower == -dc);
    }
    CHECK_THROWS_AS(dressed_resonances(0.0, -1.0, g0), std::invalid_argument);
  }

  TEST_CASE("coupled-state resonances: product identity across the map range") {
    const double g0 = angular_from_linear_khz(66.0);
    const double n = 22500.0;
    const double expect = -0.25 * n * g0 * g0;
    for (int i = 0; i <= 300; ++i) {
      const double dc = angular_from_linear_khz(-15000.0 + 100.0 * double(i));
      const DressedCurve c = dressed_resonances(dc, n, g0);
      CHECK(c.upper >= c.lower);
      CHECK(std::abs(c.upper * c.lower - expect) <= 1e-12 * std::abs(expect));
    }
  }

  TEST_CASE("find_peaks: single Lorentzian is located within a tenth of a step") {
    std::vector<double> axis(101), values(101);
    const double center = 0.237, width = 1.3;
    for (int i = 0; i <= 100; ++i) {
      axis[i] = -10.0 + 0.2 * double(i);
      values[i] = 1.0 / (1.0 + std::pow((axis[i] - center) / width, 2));
    }
    const auto peaks = find_peaks(axis, values, 0.1);
    REQUIRE(peaks.size() == 1);
    CHECK(std::abs(peaks[0].location - center) <= 0.02);
  }

  TEST_CASE("find_peaks: input validation") {
    std::vector<double> tiny = {0.0, 1.0};
    CHECK_THROWS_AS(find_peaks(tiny, tiny, 0.0), std::invalid_argument);
    std::vector<double> axis = {0.0, 1.0, 3.0, 4.0};
    std::vector<double> vals = {0.0, 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(find_peaks(axis, vals, 0.0), std::invalid_argument);
  }

  TEST_CASE("find_peaks: prominence filters ripple between real peaks") {
    std::vector<double> axis(201), values(201);
    for (int i = 0; i <= 200; ++i) {
      axis[i] = double(i);
      values[i] = std::exp(-std::pow((axis[i] - 50.0) / 8.0, 2)) +
                  0.6 * std::exp(-std::pow((axis[i] - 150.0) / 8.0, 2)) +
                  0.01 * std::sin(axis[i]);
    }
    const auto peaks = find_peaks(axis, values, 0.05);
    REQUIRE(peaks.size() == 2);
    CHECK(std::abs(peaks[0].location - 50.0) <= 0.5);
    CHECK(std::abs(peaks[1].location - 150.0) <= 0.5);
  }

  TEST_CASE("empty-cavity map equals the analytic line shape") {
    const SystemParams p = paper_params(0.0, 350.0);
    const GridSpec grid = make_grid(-angular_from_linear_khz(300.0), angular_from_linear_khz(300.0), 9,
                                    -angular_from_linear_khz(300.0), angular_from_linear_khz(300.0), 9);
    SweepOptions opts;
    opts.strategy = BinStrategy::delta;
    const SpectralMap map = sweep_map(grid, p, opts);
    for (std::size_t ic = 0; ic < 9; ++ic) {
      for (std::size_t ip = 0; ip < 9; ++ip) {
        const double d = map.delta_p_axis[ip] - map.delta_c_axis[ic];
        const double expect = 0.25 * p.kappa * p.kappa / (d * d + 0.25 * p.kappa * p.kappa);
        CHECK(std::abs(map.t(ic, ip) - expect) <= 1e-10);
        CHECK(map.f(ic, ip) == 0.0);
        CHECK(map.root_count[ic * 9 + ip] == 1);
      }
    }
  }

  TEST_CASE("map mirror symmetry under joint detuning reflection") {
    SystemParams p = paper_params(5000.0, 20000.0);
    p.gamma_d = angular_from_linear_khz(1.0);
    p.delta_omega = angular_from_linear_khz(500.0);
    const GridSpec grid =
        make_grid(-angular_from_linear_khz(4000.0), angular_from_linear_khz(4000.0), 13,
                  -angular_from_linear_khz(4000.0), angular_from_linear_khz(4000.0), 13);
    const SpectralMap map = sweep_map(grid, p, {});
    for (std::size_t ic = 0; ic < 13; ++ic)
      for (std::size_t ip = 0; ip < 13; ++ip) {
        CHECK(std::abs(map.t(ic, ip) - map.t(12 - ic, 12 - ip)) <= 1e-9);
        CHECK(std::abs(map.f(ic, ip) - map.f(12 - ic, 12 - ip)) <= 1e-9);
      }
  }

  TEST_CASE("maps are deterministic and thread-count independent") {
    SystemParams p = paper_params(2000.0, 5000.0);
    p.delta_omega = angular_from_linear_khz(400.0);
    const GridSpec grid =
        make_grid(-angular_from_linear_khz(2000.0), angular_from_linear_khz(2000.0), 7,
                  -angular_from_linear_khz(2000.0), angular_from_linear_khz(2000.0), 7);
    SweepOptions a;
    a.threads = 1;
    SweepOptions b;
    b.threads = 4;
    const SpectralMap m1 = sweep_map(grid, p, a);
    const SpectralMap m2 = sweep_map(grid, p, b);
    const SpectralMap m3 = sweep_map(grid, p, a);
    CHECK(std::memcmp(m1.t_norm.data(), m2.t_norm.data(), sizeof(double) * m1.t_norm.size()) == 0);
    CHECK(std::memcmp(m1.f_norm.data(), m2.f_norm.data(), sizeof(double) * m1.f_norm.size()) == 0);
    CHECK(std::memcmp(m1.t_norm.data(), m3.t_norm.data(), sizeof(double) * m1.t_norm.size()) == 0);
    CHECK(m1.root_count == m2.root_count);
  }

  TEST_CASE("map meta carries enough to regenerate bit-identically") {
    SystemParams p = paper_params(800.0, 3000.0);
    p.delta_omega = angular_from_linear_khz(300.0);
    const GridSpec grid = make_grid(0.0, 0.0, 1, -angular_from_linear_khz(1000.0),
                                    angular_from_linear_khz(1000.0), 21);
    SweepOptions opts;
    opts.bins_m = 480;
    const SpectralMap m1 = sweep_map(grid, p, opts);

    GridSpec again;
    again.delta_c = m1.delta_c_axis;
    again.delta_p = m1.delta_p_axis;
    SweepOptions from_meta;
    from_meta.solve = m1.meta.solve;
    from_meta.strategy = m1.meta.strategy;
    from_meta.bins_m = m1.meta.bins_m;
    const SpectralMap m2 = sweep_map(again, m1.meta.params, from_meta);
    CHECK(std::memcmp(m1.t_norm.data(), m2.t_norm.data(), sizeof(double) * m1.t_norm.size()) == 0);
    CHECK(std::memcmp(m1.f_norm.data(), m2.f_norm.data(), sizeof(double) * m1.f_norm.size()) == 0);
  }

  TEST_CASE("sweep_map rejects bad axes") {
    const SystemParams p = paper_params(0.0, 100.0);
    GridSpec bad;
    bad.delta_c = {0.0, 1.0, 0.5};
    bad.delta_p = {0.0, 1.0};
    CHECK_THROWS_AS(sweep_map(bad, p, {}), std::invalid_argument);
    GridSpec empty;
    empty.delta_p = {0.0};
    CHECK_THROWS_AS(sweep_map(empty, p, {}), std::invalid_argument);
  }

  TEST_CASE("splitting scales as the square root of atom number") {
    SystemParams p = paper_params(0.0, 0.0);
    p.eta = p.kappa / 100.0;
    const std::vector<double> ns = {1000.0, 4000.0, 16000.0};
    SweepOptions opts;
    opts.strategy = BinStrategy::delta;
    const auto points = splitting_vs_n(ns, p, opts);
    REQUIRE(points.size() == 3);
    for (const SplittingPoint& pt : points) {
      REQUIRE(pt.resolved);
      CHECK(pt.measured / pt.sqrt_n_prediction >= 0.98);
      CHECK(pt.measured / pt.sqrt_n_prediction <= 1.02);
    }
    CHECK(points[1].measured / points[0].measured == doctest::Approx(2.0).epsilon(0.02));
    CHECK(points[2].measured / points[1].measured == doctest::Approx(2.0).epsilon(0.02));
  }

  TEST_CASE("splitting: no atoms is flagged unresolved") {
    SystemParams p = paper_params(0.0, 0.0);
    p.eta = p.kappa / 100.0;
    const std::vector<double> ns = {0.0};
    const auto points = splitting_vs_n(ns, p, {});
    REQUIRE(points.size() == 1);
    CHECK(!points[0].resolved);
    CHECK(points[0].sqrt_n_prediction == 0.0);
  }

  TEST_CASE("peak_fwhm measures a known Gaussian") {
    std::vector<double> axis(401), values(401);
    const double sigma = 3.0;
    for (int i = 0; i <= 400; ++i) {
      axis[i] = -20.0 + 0.1 * double(i);
      values[i] = 5.0 * std::exp(-0.5 * std::pow(axis[i] / sigma, 2));
    }
    const double fwhm = peak_fwhm(axis, values, 200, 0.0);
    CHECK(fwhm == doctest::Approx(2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma).epsilon(1e-3));
  }
}
