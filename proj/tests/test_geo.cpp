#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <random>

#include "doctest.h"
#include "fixture.hpp"
#include "tomo/geo.hpp"
#include "tomo/sim.hpp"

using namespace tomo;
using doctest::Approx;

namespace {

RasterGrid blank_grid(std::size_t w, std::size_t h, double cell = 1.0) {
    RasterGrid g;
    g.width = w;
    g.height = h;
    g.cell_size = cell;
    g.value.assign(w * h, 0.0);
    g.valid.assign(w * h, 1);
    return g;
}

}  // namespace

TEST_CASE("geocoding round trip") {
    AcquisitionGeometry geom = munich_geometry();
    MapAnchor anchor{1000.0, 2000.0, 50.0, 0.4};
    RadarSample s;
    s.azimuth_m = 120.0;
    s.slant_range_m = 340.0;
    s.elevation_m = 57.80;
    s.amplitude = 1.3;
    s.layer = LayerTag::Top;
    TomoPointCloud cloud = geocode({s}, geom, anchor);
    REQUIRE(cloud.points.size() == 1);
    const auto& p = cloud.points[0];
    CHECK(p.height == Approx(50.0 + expected("height_of_s57p80_m")).epsilon(1e-9));
    CHECK(p.layer == LayerTag::Top);

    RadarSample back = geocode_inverse(p, geom, anchor);
    CHECK(back.azimuth_m == Approx(s.azimuth_m).epsilon(1e-9));
    CHECK(back.slant_range_m == Approx(s.slant_range_m).epsilon(1e-9));
    CHECK(back.elevation_m == Approx(s.elevation_m).epsilon(1e-9));

    // zero-offset sample maps to the anchor
    TomoPointCloud at_anchor = geocode({RadarSample{}}, geom, anchor);
    CHECK(at_anchor.points[0].east == Approx(anchor.east));
    CHECK(at_anchor.points[0].north == Approx(anchor.north));
    CHECK(at_anchor.points[0].height == Approx(anchor.height));
}

TEST_CASE("edge detector on a height step") {
    const double h_step = 7.0;
    RasterGrid g = blank_grid(6, 5);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 3; c < 6; ++c) g.value[g.idx(r, c)] = h_step;
    RasterGrid e = sobel_edges(g);
    // interior column next to the step carries gradient 4h
    CHECK(e.value[e.idx(2, 2)] / h_step == Approx(expected("sobel_step_peak_over_h")));
    // flat interior far side: zero response
    CHECK(e.value[e.idx(2, 4)] == Approx(0.0));
    // borders come out masked
    CHECK(e.valid[e.idx(0, 2)] == 0);
    CHECK(e.valid[e.idx(2, 0)] == 0);

    // a masked cell contaminates its 3x3 neighborhood
    g.valid[g.idx(2, 2)] = 0;
    RasterGrid em = sobel_edges(g);
    CHECK(em.valid[em.idx(1, 1)] == 0);
    CHECK(em.valid[em.idx(3, 3)] == 0);

    RasterGrid all_masked = blank_grid(6, 5);
    std::fill(all_masked.valid.begin(), all_masked.valid.end(), 0);
    CHECK_THROWS_AS(sobel_edges(all_masked), std::invalid_argument);
    CHECK_THROWS_AS(sobel_edges(blank_grid(2, 2)), std::invalid_argument);
}

TEST_CASE("coarse alignment recovers a known shift") {
    // reference: two height blocks; moving: same pattern offset by
    // (+3 east, -2 north) cells and -4 m in height
    RasterGrid ref = blank_grid(48, 48);
    auto paint = [](RasterGrid& g, std::size_t r0, std::size_t c0, std::size_t ext, double h) {
        for (std::size_t r = r0; r < r0 + ext; ++r)
            for (std::size_t c = c0; c < c0 + ext; ++c) g.value[g.idx(r, c)] = h;
    };
    paint(ref, 10, 8, 10, 20.0);
    paint(ref, 30, 28, 8, 12.0);
    RasterGrid mov = blank_grid(48, 48);
    std::fill(mov.value.begin(), mov.value.end(), -4.0);  // uniform datum offset
    paint(mov, 12, 5, 10, 16.0);
    paint(mov, 32, 25, 8, 8.0);

    CoarseAlignment a = coarse_align(mov, ref, 8);
    CHECK(a.shift_east == Approx(3.0).epsilon(0.1));
    CHECK(a.shift_north == Approx(-2.0).epsilon(0.1));
    CHECK(a.shift_height == Approx(4.0).epsilon(0.15));
    CHECK(a.peak_correlation > 0.9);
    CHECK_FALSE(a.low_confidence);

    RasterGrid other_cell = blank_grid(48, 48, 2.0);
    CHECK_THROWS_AS(coarse_align(mov, other_cell, 4), std::invalid_argument);
}

TEST_CASE("icp recovers a rigid transform") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ue(0.0, 100.0), uh(0.0, 30.0);
    TomoPointCloud moving;
    for (int i = 0; i < 250; ++i) {
        TomoPoint p;
        p.east = ue(rng);
        p.north = ue(rng);
        p.height = uh(rng);
        moving.points.push_back(p);
    }
    double ang = 0.01;
    RigidTransform truth;
    truth.rotation = Eigen::AngleAxisd(ang, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    truth.translation = Eigen::Vector3d(0.4, -0.3, 0.15);
    TomoPointCloud reference;
    for (const auto& p : moving.points) {
        Eigen::Vector3d q = truth.apply({p.east, p.north, p.height});
        TomoPoint t;
        t.east = q.x();
        t.north = q.y();
        t.height = q.z();
        reference.points.push_back(t);
    }

    IcpResult res = icp_align(moving, reference);
    CHECK_FALSE(res.translation_only);
    CHECK(res.rms < 1e-6);
    CHECK((res.transform.rotation - truth.rotation).norm() < 1e-6);
    CHECK((res.transform.translation - truth.translation).norm() < 1e-6);

    CHECK_THROWS_AS(icp_align(TomoPointCloud{}, reference), std::invalid_argument);
}

TEST_CASE("point-polygon predicates") {
    Polygon sq;
    sq.id = "sq";
    sq.ring = {{0, 0}, {10, 0}, {10, 10}, {0, 10}};
    CHECK(point_in_polygon(5, 5, sq));
    CHECK_FALSE(point_in_polygon(15, 5, sq));
    CHECK_FALSE(point_in_polygon(-1, -1, sq));
    CHECK(distance_to_polygon(5, 5, sq) == Approx(5.0));   // to the nearest edge
    CHECK(distance_to_polygon(13, 5, sq) == Approx(3.0));
    CHECK(distance_to_polygon(13, 14, sq) == Approx(5.0)); // corner distance
}

TEST_CASE("rasterization and structure statistics") {
    TomoPointCloud cloud;
    auto add = [&](double e, double n, double h, LayerTag l) {
        TomoPoint p;
        p.east = e;
        p.north = n;
        p.height = h;
        p.layer = l;
        cloud.points.push_back(p);
    };
    // building roof inside [4,8]x[4,8], ground around it
    for (double e = 4.5; e < 8.0; e += 1.0)
        for (double n = 4.5; n < 8.0; n += 1.0) add(e, n, 30.0, LayerTag::Top);
    for (double e = 0.5; e < 12.0; e += 1.0) {
        add(e, 1.5, 0.0, LayerTag::Bottom);
        add(e, 10.5, 0.0, LayerTag::Bottom);
    }

    Polygon building;
    building.id = "b0";
    building.ring = {{4, 4}, {8, 4}, {8, 8}, {4, 8}};
    building.reference_height = 29.0;
    Polygon empty_poly;
    empty_poly.id = "empty";
    empty_poly.ring = {{40, 40}, {44, 40}, {44, 44}, {40, 44}};

    RasterizeResult ras = rasterize(cloud, {building, empty_poly}, 1.0, {}, 3.0);
    CHECK(ras.excluded_polygons == 1);
    REQUIRE(ras.polygons.size() == 1);
    CHECK(ras.polygons[0].top.size() == 16);
    CHECK(!ras.polygons[0].bottom.empty());

    StructureReport rep = structure_stats(ras.polygons);
    REQUIRE(rep.structures.size() == 1);
    const auto& st = rep.structures[0];
    CHECK(st.relative_height == Approx(30.0));
    CHECK(st.top.std == Approx(0.0));
    CHECK(*st.abs_height_difference == Approx(1.0));

    // polygon missing one layer is skipped by the report
    PolygonSamples lonely;
    lonely.id = "roof_only";
    lonely.top = {10.0};
    StructureReport rep2 = structure_stats({lonely});
    CHECK(rep2.skipped == 1);
    CHECK(rep2.structures.empty());

    CHECK_THROWS_AS(rasterize(TomoPointCloud{}, {}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(rasterize(cloud, {}, 0.0), std::invalid_argument);
}

TEST_CASE("citywide difference summary") {
    CitywideSummary s = citywide_histogram({0.5, 1.5, 20.0}, 15.0);
    CHECK(s.n_total == 3);
    CHECK(s.n_retained == 2);
    CHECK(s.frac_within_1m == Approx(0.5));
    CHECK(s.frac_within_2m == Approx(1.0));
    CHECK(s.frac_within_trunc == Approx(1.0));
    CHECK(s.std_truncated == Approx(0.5));
    std::size_t total = 0;
    for (auto c : s.counts) total += c;
    CHECK(total == 2);
    // nested-interval monotonicity
    CHECK(s.frac_within_1m <= s.frac_within_2m);
    CHECK(s.frac_within_2m <= s.frac_within_trunc);

    CitywideSummary none = citywide_histogram({100.0}, 15.0);
    CHECK(none.n_retained == 0);
    CHECK(none.frac_within_trunc == 0.0);
    CHECK_THROWS_AS(citywide_histogram({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("interchange round trips") {
    std::string dir = "test_geo_io_tmp";
    std::remove((dir + "_cloud.csv").c_str());

    TomoPointCloud cloud;
    TomoPoint p;
    p.east = 1234.56;
    p.north = 789.012;
    p.height = 31.7;
    p.amplitude = 0.25;
    p.layer = LayerTag::Bottom;
    cloud.points.push_back(p);
    save_point_cloud_csv(cloud, dir + "_cloud.csv");
    TomoPointCloud back = load_point_cloud_csv(dir + "_cloud.csv");
    REQUIRE(back.points.size() == 1);
    CHECK(back.points[0].east == Approx(p.east).epsilon(1e-5));
    CHECK(back.points[0].north == Approx(p.north).epsilon(1e-5));
    CHECK(back.points[0].height == Approx(p.height).epsilon(1e-5));
    CHECK(back.points[0].layer == LayerTag::Bottom);

    Polygon poly;
    poly.id = "b1";
    poly.ring = {{0, 0}, {5, 0}, {5, 5}, {0, 5}};
    poly.reference_height = 21.5;
    save_footprints_json({poly}, dir + "_fp.json");
    auto fps = load_footprints_json(dir + "_fp.json");
    REQUIRE(fps.size() == 1);
    CHECK(fps[0].id == "b1");
    REQUIRE(fps[0].ring.size() == 4);
    CHECK(fps[0].ring[2].first == Approx(5.0));
    CHECK(*fps[0].reference_height == Approx(21.5));

    CHECK_THROWS(load_point_cloud_csv(dir + "_missing.csv"));
    std::remove((dir + "_cloud.csv").c_str());
    std::remove((dir + "_fp.json").c_str());
}
