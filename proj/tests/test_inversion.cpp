#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "tomo/inversion.hpp"
#include "tomo/sim.hpp"

using namespace tomo;
using doctest::Approx;

namespace {

struct Setup {
    AcquisitionGeometry geom = munich_geometry();
    ElevationGrid grid;
    SensingMatrix sensing;
    Setup() {
        grid = default_elevation_grid(geom);
        sensing = build_sensing_matrix(geom, grid);
    }
};

std::vector<FilteredInterferogram> synthetic_filtered(double psi, double mu, double s2) {
    std::vector<FilteredInterferogram> out;
    for (int n = 0; n < 5; ++n) {
        FilteredInterferogram f;
        f.width = 1;
        f.height = 1;
        f.psi = {psi};
        f.mu = {mu};
        f.sigma2 = {s2};
        f.effective_looks = {30.0};
        f.quality = {1};
        out.push_back(f);
    }
    return out;
}

}  // namespace

TEST_CASE("measurement vector from filtered parameters") {
    auto filtered = synthetic_filtered(0.7, 0.8, 1.5);
    Eigen::VectorXcd g = measurement_vector(filtered, 0);
    REQUIRE(g.size() == 5);
    for (Eigen::Index n = 0; n < 5; ++n) {
        CHECK(std::abs(g(n)) == Approx(2.0 * 1.5 * 0.8));
        CHECK(std::arg(g(n)) == Approx(0.7));
    }
}

TEST_CASE("noise power estimate") {
    // mu = 1: floored at 1e-6 of the correlated power
    auto clean = synthetic_filtered(0.0, 1.0, 0.5);
    CHECK(estimate_noise_power(clean, 0).sigma_eps2 == Approx(1e-6 * 2.0 * 0.5));
    // mu = 0.8, sigma2 = 1: noise = 2*(1-0.8) = 0.4
    auto noisy = synthetic_filtered(0.0, 0.8, 1.0);
    CHECK(estimate_noise_power(noisy, 0).sigma_eps2 == Approx(0.4));
    CHECK_THROWS_AS(estimate_noise_power({}, 0), std::invalid_argument);
}

TEST_CASE("regularized inversion equals the dense solve") {
    Setup s;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::VectorXcd g(5);
    for (Eigen::Index i = 0; i < 5; ++i) g(i) = cplx(gauss(rng), gauss(rng));
    NoiseModel noise{0.3};

    ReflectivityProfile fast = svd_invert(g, s.sensing, s.grid, noise);
    const auto& r = s.sensing.entries;
    Eigen::MatrixXcd lhs = r.adjoint() * r / noise.sigma_eps2 +
                           Eigen::MatrixXcd::Identity(r.cols(), r.cols());
    Eigen::VectorXcd dense = lhs.ldlt().solve(r.adjoint() * g / noise.sigma_eps2);
    CHECK((fast.values - dense).norm() <= 1e-10 * dense.norm());
}

TEST_CASE("svd inversion is linear in the measurement") {
    Setup s;
    SvdInverter inv(s.sensing, s.grid);
    NoiseModel noise{0.1};
    Eigen::VectorXcd a(5), b(5);
    a << cplx(1, 0), cplx(0, 1), cplx(-1, 0.5), cplx(0.2, -0.3), cplx(1, 1);
    b << cplx(0.5, 0.5), cplx(1, -1), cplx(0, 0.2), cplx(-0.7, 0), cplx(0.1, 0.9);
    Eigen::VectorXcd xa = inv.invert(a, noise).values;
    Eigen::VectorXcd xb = inv.invert(b, noise).values;
    Eigen::VectorXcd xab = inv.invert(a + cplx(2.0, 0.0) * b, noise).values;
    CHECK((xab - (xa + cplx(2.0, 0.0) * xb)).norm() <= 1e-10 * xab.norm());
    CHECK_THROWS_AS(inv.invert(Eigen::VectorXcd::Zero(3), noise), std::invalid_argument);
    CHECK_THROWS_AS(inv.invert(a, NoiseModel{0.0}), std::invalid_argument);
}

TEST_CASE("noiseless single scatterer peaks at the truth") {
    Setup s;
    double s_true = 40.0;
    Eigen::VectorXcd g = steering_vector(s.sensing.wavenumbers, s_true);
    ReflectivityProfile prof = svd_invert(g, s.sensing, s.grid, NoiseModel{1e-4});
    auto peaks = extract_peaks(prof, 1);
    REQUIRE(peaks.size() == 1);
    CHECK(peaks[0].elevation_m == Approx(s_true).epsilon(0.02));
}

TEST_CASE("sparse solver: kill condition and KKT certificate") {
    Setup s;
    Eigen::VectorXcd g = cplx(1.3, 0.0) * steering_vector(s.sensing.wavenumbers, 25.0);
    double gmax = (s.sensing.entries.adjoint() * g).cwiseAbs().maxCoeff();

    SUBCASE("lambda at the critical value zeroes the solution") {
        CsOptions o;
        o.lambda = gmax * 1.0001;
        CsResult r = cs_invert(g, s.sensing, s.grid, o);
        CHECK(r.profile.values.cwiseAbs().maxCoeff() == Approx(0.0));
        CHECK(r.converged);
    }

    SUBCASE("stationarity holds at the solution") {
        CsOptions o;
        o.lambda_frac = 0.15;
        o.rel_tol = 1e-14;
        o.max_iters = 50000;
        CsResult r = cs_invert(g, s.sensing, s.grid, o);
        CHECK(r.converged);
        Eigen::VectorXcd resid =
            s.sensing.entries.adjoint() * (g - s.sensing.entries * r.profile.values);
        CHECK(resid.cwiseAbs().maxCoeff() <= r.lambda * (1.0 + 1e-6));
        // solution is sparse and explains the data near the truth
        auto peaks = extract_peaks(r.profile, 1);
        REQUIRE(peaks.size() == 1);
        CHECK(peaks[0].elevation_m == Approx(25.0).epsilon(0.05));
    }

    SUBCASE("objective never exceeds the zero start") {
        CsOptions o;
        CsResult r = cs_invert(g, s.sensing, s.grid, o);
        double zero_obj = lasso_objective(Eigen::VectorXcd::Zero(s.sensing.cols()), g,
                                          s.sensing.entries, r.lambda);
        CHECK(r.objective <= zero_obj + 1e-12);
    }
}

TEST_CASE("sparse solver separates a close double") {
    Setup s;
    double rho = expected("rayleigh_resolution_m");
    Eigen::VectorXcd g = steering_vector(s.sensing.wavenumbers, 0.0) +
                         std::polar(1.0, 2.0) * steering_vector(s.sensing.wavenumbers, 0.8 * rho);
    CsResult r = cs_invert(g, s.sensing, s.grid, {});
    auto peaks = extract_peaks(r.profile, 2);
    REQUIRE(peaks.size() == 2);
    double lo = std::min(peaks[0].elevation_m, peaks[1].elevation_m);
    double hi = std::max(peaks[0].elevation_m, peaks[1].elevation_m);
    CHECK(std::abs(lo - 0.0) < 0.25 * rho);
    CHECK(std::abs(hi - 0.8 * rho) < 0.25 * rho);
}

TEST_CASE("peak extraction") {
    // sampled Gaussian: parabolic refinement lands near the true center
    ElevationGrid grid = ElevationGrid::uniform(-5.0, 5.0, 1.0);
    ReflectivityProfile prof;
    prof.grid = grid;
    prof.values.resize(11);
    double center = 0.237;
    for (int i = 0; i < 11; ++i) {
        double x = grid.samples_m[static_cast<std::size_t>(i)];
        prof.values(i) = std::exp(-0.5 * std::pow((x - center) / 2.0, 2.0));
    }
    auto peaks = extract_peaks(prof, 3);
    REQUIRE(!peaks.empty());
    CHECK(std::abs(peaks[0].elevation_m - center) ==
          Approx(expected("parabolic_gaussian_center_error")).epsilon(1e-6));

    // strongest-first ordering
    prof.values(9) = 0.9;  // secondary bump
    auto two = extract_peaks(prof, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].amplitude >= two[1].amplitude);

    // flat profile yields nothing
    prof.values.setZero();
    CHECK(extract_peaks(prof, 2).empty());
    CHECK_THROWS_AS(extract_peaks(prof, 0), std::invalid_argument);
}
