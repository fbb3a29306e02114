#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "fixture.hpp"
#include "tomo/crlb.hpp"
#include "tomo/geometry.hpp"
#include "tomo/sensing.hpp"
#include "tomo/sim.hpp"
#include "tomo/types.hpp"

using namespace tomo;
using doctest::Approx;

TEST_CASE("elevation wavenumber") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(wavenumber(184.40, g) == Approx(expected("wavenumber_b184p40")).epsilon(1e-12));
    CHECK(wavenumber(0.0, g) == 0.0);
    // linear in the baseline
    CHECK(wavenumber(-2.78, g) == Approx(-wavenumber(2.78, g)));
    CHECK(wavenumber(2.0 * 32.30, g) == Approx(2.0 * wavenumber(32.30, g)));
}

TEST_CASE("aperture and Rayleigh resolution") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(g.aperture_m() == Approx(expected("aperture_m")));
    double rho = rayleigh_resolution(g);
    CHECK(rho == Approx(expected("rayleigh_resolution_m")).epsilon(1e-12));
    CHECK(normalized_distance(rho, g) == Approx(expected("normalized_distance_at_rho")));
    // doubling every baseline halves the resolution
    AcquisitionGeometry g2 = g;
    for (double& b : g2.baselines_m) b *= 2.0;
    CHECK(rayleigh_resolution(g2) == Approx(0.5 * rho));

    AcquisitionGeometry flat = g;
    flat.baselines_m = {10.0, 10.0};
    CHECK_THROWS_AS(rayleigh_resolution(flat), std::invalid_argument);
}

TEST_CASE("baseline spread") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(g.baseline_std_m() == Approx(expected("baseline_pop_std_m")).epsilon(1e-12));
}

TEST_CASE("height of ambiguity") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(height_of_ambiguity(184.40, g) ==
          Approx(expected("height_ambiguity_b184p40_m")).epsilon(1e-12));
    CHECK(height_of_ambiguity(-184.40, g) == Approx(-expected("height_ambiguity_b184p40_m")));
    CHECK(std::isinf(height_of_ambiguity(0.0, g)));
}

TEST_CASE("elevation to height projection") {
    AcquisitionGeometry g = munich_geometry();
    CHECK(elevation_to_height(57.80, g.incidence_rad) ==
          Approx(expected("height_of_s57p80_m")).epsilon(1e-12));
    CHECK(elevation_to_height(0.0, g.incidence_rad) == 0.0);
}

TEST_CASE("phase wrapping") {
    CHECK(wrap_phase(0.0) == Approx(0.0));
    CHECK(wrap_phase(3.0 * M_PI) == Approx(M_PI));
    CHECK(wrap_phase(-3.0 * M_PI) == Approx(M_PI));
    for (double p : {-9.7, -3.2, 0.4, 2.9, 15.1}) {
        double w = wrap_phase(p);
        CHECK(w > -M_PI);
        CHECK(w <= M_PI);
        CHECK(std::cos(w - p) == Approx(1.0));
    }
}

TEST_CASE("geometry validation") {
    AcquisitionGeometry g = munich_geometry();
    CHECK_NOTHROW(g.validate());
    AcquisitionGeometry bad = g;
    bad.baselines_m.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.wavelength_m = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = g;
    bad.incidence_rad = M_PI;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("uniform elevation grid") {
    ElevationGrid g = ElevationGrid::uniform(-10.0, 10.0, 2.5);
    CHECK(g.size() == 9);
    CHECK(g.samples_m.front() == Approx(-10.0));
    CHECK(g.samples_m.back() == Approx(10.0));
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS_AS(ElevationGrid::uniform(0.0, -1.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(ElevationGrid::uniform(0.0, 1.0, 0.0), std::invalid_argument);

    AcquisitionGeometry geom = munich_geometry();
    ElevationGrid d = default_elevation_grid(geom);
    double rho = rayleigh_resolution(geom);
    CHECK(d.samples_m.front() == Approx(-1.5 * rho));
    CHECK(d.spacing_m == Approx(rho / 25.0));
}

TEST_CASE("steering matrix structure") {
    AcquisitionGeometry geom = munich_geometry();
    ElevationGrid grid = ElevationGrid::uniform(-50.0, 150.0, 10.0);
    SensingMatrix m = build_sensing_matrix(geom, grid);
    REQUIRE(m.rows() == 5);
    REQUIRE(m.cols() == static_cast<Eigen::Index>(grid.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            CHECK(std::abs(m.entries(i, j)) == Approx(1.0).epsilon(1e-12));
    // zero elevation column is all ones
    std::size_t l0 = 5;  // grid sample at 0 m
    CHECK(grid.samples_m[l0] == Approx(0.0));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        CHECK(m.entries(i, static_cast<Eigen::Index>(l0)).real() == Approx(1.0));
    // columns agree with the steering vector
    Eigen::VectorXcd a = steering_vector(m.wavenumbers, grid.samples_m[2]);
    CHECK((m.entries.col(2) - a).norm() == Approx(0.0).epsilon(1e-12));
}

TEST_CASE("single-scatterer accuracy bound") {
    AcquisitionGeometry g = munich_geometry();
    double bound = crlb_single(g, db_to_linear(10.0), 5);
    CHECK(bound == Approx(expected("crlb_single_snr10db_n5_m")).epsilon(1e-12));
    // scales as 1/sqrt(SNR*N)
    CHECK(crlb_single(g, 4.0 * db_to_linear(10.0), 5) == Approx(0.5 * bound));
    CHECK(crlb_single(g, db_to_linear(10.0), 20) == Approx(0.5 * bound));
    CHECK_THROWS_AS(crlb_single(g, 0.0, 5), std::invalid_argument);
}

TEST_CASE("interference correction factor") {
    CHECK(c0_exact(1.0, 0.0) == Approx(expected("c0_exact_k1_dphi0")).epsilon(1e-12));
    CHECK(c0_exact(2.5, M_PI / 4.0) == Approx(expected("c0_exact_k2p5_dphi_pi4")));
    CHECK(c0_approx(1.0) == Approx(expected("c0_approx_k1")).epsilon(1e-9));
    CHECK(c0_approx(0.6) == Approx(expected("c0_approx_k0p6")).epsilon(1e-9));
    // clamp: unity from the onset kappa upward
    double onset = expected("c0_approx_clamp_onset_kappa");
    CHECK(c0_approx(onset + 1e-6) == 1.0);
    CHECK(c0_approx(onset - 1e-3) > 1.0);
    CHECK(c0_approx(5.0) == 1.0);
    // decreasing below the clamp
    double prev = c0_approx(0.2);
    for (double k = 0.3; k < onset; k += 0.1) {
        double c = c0_approx(k);
        CHECK(c < prev);
        prev = c;
    }
    CHECK_THROWS_AS(c0_approx(0.0), std::invalid_argument);
    CHECK_THROWS_AS(c0_exact(-1.0, 0.0), std::invalid_argument);
    // c0_exact >= 1 everywhere
    for (double k : {0.3, 0.7, 1.2, 2.0, 3.0, 4.0})
        for (double d : {0.0, 0.5, 1.3, 3.0})
            CHECK(c0_exact(k, d) >= 1.0);
}

TEST_CASE("double-scatterer bound report") {
    AcquisitionGeometry g = munich_geometry();
    CrlbReport r = crlb_double(g, db_to_linear(10.0), 5, 1.0);
    CHECK(r.sigma_s_double_m == Approx(expected("crlb_double_k1_snr10db_n5_m")).epsilon(1e-9));
    CHECK(r.sigma_s_double_m == Approx(r.correction_factor * r.sigma_s_single_m));
    CHECK(r.normalized == Approx(r.sigma_s_double_m / rayleigh_resolution(g)));
}

TEST_CASE("dB conversion round trip") {
    CHECK(db_to_linear(10.0) == Approx(10.0));
    CHECK(linear_to_db(db_to_linear(7.3)) == Approx(7.3));
}
