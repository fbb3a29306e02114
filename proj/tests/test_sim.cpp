#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixture.hpp"
#include "tomo/sim.hpp"
#include "tomo/stack.hpp"

using namespace tomo;
using doctest::Approx;

TEST_CASE("reference stack geometry") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(g.wavelength_m == Approx(0.031));
    CHECK(g.range_m == Approx(698e3));
    CHECK(g.incidence_rad == Approx(50.4 * M_PI / 180.0));
    REQUIRE(g.n_acquisitions() == 5);
    CHECK(g.aperture_m() == Approx(expected("aperture_m")));
    CHECK(g.baseline_std_m() == Approx(expected("baseline_pop_std_m")));
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("estimator parsing") {
    CHECK(estimator_from_string("svd") == Estimator::SVD);
    CHECK(estimator_from_string("cs") == Estimator::CS);
    CHECK_THROWS_AS(estimator_from_string("mle"), std::invalid_argument);
}

TEST_CASE("baseline draws") {
    std::mt19937_64 rng(4);
    auto b = draw_baselines(187.18, 500, rng);
    REQUIRE(b.size() == 500);
    for (double x : b) {
        CHECK(x >= 0.0);
        CHECK(x <= 187.18);
    }
    // deterministic given the generator state
    std::mt19937_64 rng2(4);
    CHECK(draw_baselines(187.18, 500, rng2) == b);
    CHECK_THROWS_AS(draw_baselines(0.0, 5, rng), std::invalid_argument);
}

TEST_CASE("measurement simulation") {
    AcquisitionGeometry geom = munich_geometry();
    std::vector<ScattererSpec> scene{{30.0, 2.0, 0.4}};

    // essentially noiseless: g matches the scaled steering vector
    std::mt19937_64 rng(1);
    Eigen::VectorXcd g = simulate_measurements(scene, geom, 120.0, rng);
    REQUIRE(g.size() == 5);
    for (Eigen::Index n = 0; n < 5; ++n) {
        double dk = wavenumber(geom.baselines_m[static_cast<std::size_t>(n)], geom);
        cplx expected_g = 2.0 * std::polar(1.0, 0.4 - dk * 30.0);
        CHECK(std::abs(g(n) - expected_g) < 1e-3);
    }

    // noise power matches the configured SNR (total signal power 4)
    std::mt19937_64 rng2(2);
    double acc = 0.0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd gn = simulate_measurements(scene, geom, 10.0, rng2);
        for (Eigen::Index n = 0; n < 5; ++n) {
            double dk = wavenumber(geom.baselines_m[static_cast<std::size_t>(n)], geom);
            acc += std::norm(gn(n) - 2.0 * std::polar(1.0, 0.4 - dk * 30.0));
        }
    }
    double noise_power = acc / (5.0 * trials);
    CHECK(noise_power == Approx(0.4).epsilon(0.05));  // 4 / 10^(10/10)
}

TEST_CASE("detection rate accounting") {
    std::vector<ScattererSpec> truth{{0.0, 1.0, 0.0}, {40.0, 1.0, 0.0}};

    ScattererSet exact;
    exact.scatterers = {{0.0, 1.0, 0.0}, {40.0, 1.0, 0.0}};
    exact.model_order = 2;
    CHECK(detection_rate({exact, exact, exact}, truth, 5.0) == Approx(1.0));

    ScattererSet under;
    under.scatterers = {{0.0, 1.0, 0.0}};
    under.model_order = 1;
    CHECK(detection_rate({under, under}, truth, 5.0) == Approx(0.0));

    // hand-counted mix: exact hit, wrong order, right order but one miss,
    // right order with both within the window -> 2/4
    ScattererSet off;
    off.scatterers = {{1.0, 1.0, 0.0}, {90.0, 1.0, 0.0}};
    off.model_order = 2;
    ScattererSet close_pair;
    close_pair.scatterers = {{3.0, 1.0, 0.0}, {42.0, 1.0, 0.0}};
    close_pair.model_order = 2;
    CHECK(detection_rate({exact, under, off, close_pair}, truth, 5.0) == Approx(0.5));

    // both estimates chasing the same truth cannot double-count
    ScattererSet clumped;
    clumped.scatterers = {{0.5, 1.0, 0.0}, {1.0, 1.0, 0.0}};
    clumped.model_order = 2;
    CHECK(detection_rate({clumped}, truth, 5.0) == Approx(0.0));

    CHECK(detection_rate({}, truth, 5.0) == 0.0);
    CHECK_THROWS_AS(detection_rate({exact}, truth, 0.0), std::invalid_argument);
}

TEST_CASE("Monte Carlo determinism and sanity") {
    SimulationConfig cfg;
    cfg.scatterers = {{0.0, 1.0, 0.0}};
    cfg.snr_db = 15.0;
    cfg.n_acquisitions = 5;
    cfg.n_realizations = 60;
    cfg.n_baseline_draws = 2;
    cfg.rng_seed = 77;

    AcquisitionGeometry geom = munich_geometry();
    MonteCarloResult a = run_monte_carlo(cfg, Estimator::SVD, geom);
    MonteCarloResult b = run_monte_carlo(cfg, Estimator::SVD, geom);

    REQUIRE(a.bias_m.size() == 1);
    CHECK(a.bias_m[0] == b.bias_m[0]);  // bit-identical
    CHECK(a.std_m[0] == b.std_m[0]);
    CHECK(a.detection_rate == b.detection_rate);
    CHECK(a.n_total == 120);

    CHECK(a.detection_rate >= 0.0);
    CHECK(a.detection_rate <= 1.0);
    CHECK(a.std_m[0] > 0.0);
    CHECK(a.crlb_reference.sigma_s_single_m > 0.0);
    // exact-order detection at 15 dB: limited by the weak complexity penalty
    // at 2N = 10 observations, but well above chance
    CHECK(a.detection_rate > 0.35);
    // empirical std cannot beat the bound by a wide margin
    CHECK(a.std_m[0] > 0.5 * a.crlb_reference.sigma_s_single_m);

    SimulationConfig bad = cfg;
    bad.scatterers.clear();
    CHECK_THROWS_AS(run_monte_carlo(bad, Estimator::SVD, geom), std::invalid_argument);
}
