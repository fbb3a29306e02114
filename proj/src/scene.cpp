#include "tomo/scene.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace tomo {

HeightScene build_city_scene(const CitySceneConfig& cfg, const AcquisitionGeometry& geom,
                             const MapAnchor& anchor) {
    geom.validate();
    if (cfg.n_buildings < 1 || cfg.width < cfg.max_extent_px || cfg.height < cfg.max_extent_px)
        throw std::invalid_argument("city scene: grid too small for requested buildings");

    HeightScene scene;
    scene.width = cfg.width;
    scene.height = cfg.height;
    scene.height_m.assign(cfg.width * cfg.height, 0.0);

    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> h_dist(cfg.min_height_m, cfg.max_height_m);
    std::uniform_int_distribution<std::size_t> ext(cfg.min_extent_px, cfg.max_extent_px);

    std::vector<std::uint8_t> occupied(cfg.width * cfg.height, 0);
    double sin_th = std::sin(geom.incidence_rad);
    double ch = std::cos(anchor.heading_rad), sh = std::sin(anchor.heading_rad);
    auto to_map = [&](double row, double col) {
        double az = row * scene.az_spacing_m;
        double gr = col * scene.rg_spacing_m / sin_th;
        return std::pair<double, double>{anchor.east + az * sh + gr * ch,
                                         anchor.north + az * ch - gr * sh};
    };

    std::size_t placed = 0;
    for (int attempt = 0; attempt < 20000 && placed < cfg.n_buildings; ++attempt) {
        std::size_t bw = std::min(ext(rng), cfg.width - 2);
        std::size_t bh = std::min(ext(rng), cfg.height - 2);
        std::uniform_int_distribution<std::size_t> cx(1, cfg.width - bw - 1);
        std::uniform_int_distribution<std::size_t> cy(1, cfg.height - bh - 1);
        std::size_t c0 = cx(rng), r0 = cy(rng);

        // one-pixel gap between buildings keeps the ground ring clean
        bool free = true;
        for (std::size_t r = r0 > 2 ? r0 - 3 : 0; r < std::min(r0 + bh + 3, cfg.height) && free; ++r)
            for (std::size_t c = c0 > 2 ? c0 - 3 : 0; c < std::min(c0 + bw + 3, cfg.width); ++c)
                if (occupied[scene.idx(r, c)]) { free = false; break; }
        if (!free) continue;

        double h = h_dist(rng);
        for (std::size_t r = r0; r < r0 + bh; ++r) {
            for (std::size_t c = c0; c < c0 + bw; ++c) {
                scene.height_m[scene.idx(r, c)] = h;
                occupied[scene.idx(r, c)] = 1;
            }
        }

        Polygon poly;
        poly.id = "building_" + std::to_string(placed);
        poly.reference_height = h;
        double rlo = static_cast<double>(r0) - 0.5, rhi = static_cast<double>(r0 + bh) - 0.5;
        double clo = static_cast<double>(c0) - 0.5, chi = static_cast<double>(c0 + bw) - 0.5;
        poly.ring = {to_map(rlo, clo), to_map(rlo, chi), to_map(rhi, chi), to_map(rhi, clo)};
        scene.footprints.push_back(std::move(poly));
        ++placed;
    }
    if (placed < cfg.n_buildings)
        throw std::runtime_error("city scene: could not place all buildings");
    return scene;
}

InterferometricStack render_stack(const HeightScene& scene, const AcquisitionGeometry& geom,
                                  double snr_db, std::uint64_t seed) {
    geom.validate();
    InterferometricStack stack;
    stack.width = scene.width;
    stack.height = scene.height;
    stack.az_spacing_m = scene.az_spacing_m;
    stack.rg_spacing_m = scene.rg_spacing_m;

    double sin_th = std::sin(geom.incidence_rad);
    double snr = std::pow(10.0, snr_db / 10.0);
    double noise_power = 1.0 / snr;  // unit scatterer amplitude
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));
    std::uniform_real_distribution<double> uni(-M_PI, M_PI);

    const auto count = scene.width * scene.height;
    for (std::size_t n = 0; n < geom.n_acquisitions(); ++n) {
        double dk = wavenumber(geom.baselines_m[n], geom);
        InterferogramPair pair;
        pair.master.resize(count);
        pair.slave.resize(count);
        for (std::size_t i = 0; i < count; ++i) {
            double s = scene.height_m[i] / sin_th;  // elevation of the pixel scatterer
            double beta = uni(rng);                 // absolute master phase, uninformative
            cplx master(std::cos(beta), std::sin(beta));
            cplx slave = master * cplx(std::cos(-dk * s), std::sin(-dk * s));
            pair.master[i] = master + cplx(gauss(rng), gauss(rng));
            pair.slave[i] = slave + cplx(gauss(rng), gauss(rng));
        }
        stack.acquisitions.push_back(std::move(pair));
    }
    return stack;
}

}  // namespace tomo
