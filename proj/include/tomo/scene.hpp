#pragma once

#include <cstdint>
#include <vector>

#include "tomo/geo.hpp"
#include "tomo/stack.hpp"

namespace tomo {

/// Synthetic urban test scene: a height map over the radar pixel grid plus
/// the building footprints in map coordinates.
struct HeightScene {
    std::size_t width = 0;   // range pixels
    std::size_t height = 0;  // azimuth pixels
    double az_spacing_m = 2.17;
    double rg_spacing_m = 1.36;
    std::vector<double> height_m;  // row-major
    std::vector<Polygon> footprints;

    std::size_t idx(std::size_t row, std::size_t col) const { return row * width + col; }
};

struct CitySceneConfig {
    std::size_t width = 128;
    std::size_t height = 96;
    std::size_t n_buildings = 50;
    double min_height_m = 5.0;
    double max_height_m = 50.0;
    std::size_t min_extent_px = 6;
    std::size_t max_extent_px = 12;
    std::uint64_t rng_seed = 7;
};

/// Random non-overlapping box buildings on flat ground; footprints carry the
/// true height as reference.
HeightScene build_city_scene(const CitySceneConfig& cfg, const AcquisitionGeometry& geom,
                             const MapAnchor& anchor);

/// Renders a bistatic stack over the scene: one scatterer per pixel at the
/// scene elevation, random master phase per pixel/acquisition, additive
/// circular Gaussian noise at the given SNR.
InterferometricStack render_stack(const HeightScene& scene, const AcquisitionGeometry& geom,
                                  double snr_db, std::uint64_t seed);

}  // namespace tomo
