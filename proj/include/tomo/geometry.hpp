#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tomo {

/// Stack-level acquisition geometry. Baselines are the bistatic baselines
/// of each interferometric pair; a single-master monostatic stack uses the
/// same representation.
struct AcquisitionGeometry {
    double wavelength_m = 0.0;
    double range_m = 0.0;
    double incidence_rad = 0.0;
    std::vector<double> baselines_m;
    std::vector<std::string> dates;  // metadata only

    std::size_t n_acquisitions() const { return baselines_m.size(); }

    void validate() const {
        if (baselines_m.empty())
            throw std::invalid_argument("geometry: at least one baseline required");
        if (wavelength_m <= 0.0)
            throw std::invalid_argument("geometry: wavelength must be positive");
        if (range_m <= 0.0)
            throw std::invalid_argument("geometry: range must be positive");
        if (incidence_rad <= 0.0 || incidence_rad >= M_PI / 2.0)
            throw std::invalid_argument("geometry: incidence angle must be in (0, pi/2)");
    }

    double aperture_m() const {
        double lo = baselines_m.front(), hi = baselines_m.front();
        for (double b : baselines_m) {
            lo = std::min(lo, b);
            hi = std::max(hi, b);
        }
        return hi - lo;
    }

    /// Population (divide-by-N) standard deviation of the baselines.
    double baseline_std_m() const {
        double mean = 0.0;
        for (double b : baselines_m) mean += b;
        mean /= static_cast<double>(baselines_m.size());
        double ss = 0.0;
        for (double b : baselines_m) ss += (b - mean) * (b - mean);
        return std::sqrt(ss / static_cast<double>(baselines_m.size()));
    }
};

/// Uniform elevation sampling s_l, l = 1..L.
struct ElevationGrid {
    std::vector<double> samples_m;
    double spacing_m = 0.0;

    std::size_t size() const { return samples_m.size(); }

    static ElevationGrid uniform(double start_m, double stop_m, double step_m) {
        if (step_m <= 0.0 || stop_m <= start_m)
            throw std::invalid_argument("elevation grid: need stop > start, step > 0");
        ElevationGrid g;
        g.spacing_m = step_m;
        auto count = static_cast<std::size_t>(std::floor((stop_m - start_m) / step_m + 0.5)) + 1;
        g.samples_m.reserve(count);
        for (std::size_t l = 0; l < count; ++l)
            g.samples_m.push_back(start_m + static_cast<double>(l) * step_m);
        return g;
    }

    void validate() const {
        if (samples_m.empty())
            throw std::invalid_argument("elevation grid: empty");
        for (std::size_t l = 1; l < samples_m.size(); ++l) {
            double d = samples_m[l] - samples_m[l - 1];
            if (d <= 0.0 || std::abs(d - spacing_m) > 1e-9 * std::max(1.0, std::abs(spacing_m)))
                throw std::invalid_argument("elevation grid: not strictly increasing uniform");
        }
    }
};

/// Elevation wavenumber for a bistatic baseline: -4*pi*b / (lambda*r).
inline double wavenumber(double baseline_m, const AcquisitionGeometry& geom) {
    return -4.0 * M_PI * baseline_m / (geom.wavelength_m * geom.range_m);
}

/// Inherent (Rayleigh) elevation resolution lambda*r / (2*aperture).
inline double rayleigh_resolution(const AcquisitionGeometry& geom) {
    double db = geom.aperture_m();
    if (db <= 0.0)
        throw std::invalid_argument("rayleigh_resolution: degenerate elevation aperture");
    return geom.wavelength_m * geom.range_m / (2.0 * db);
}

/// Elevation distance in units of the Rayleigh resolution.
inline double normalized_distance(double s_m, const AcquisitionGeometry& geom) {
    return s_m / rayleigh_resolution(geom);
}

/// Height change per interferometric fringe. Returns +/-inf for zero baseline.
inline double height_of_ambiguity(double baseline_m, const AcquisitionGeometry& geom) {
    if (baseline_m == 0.0)
        return std::numeric_limits<double>::infinity();
    double h = geom.wavelength_m * geom.range_m * std::sin(geom.incidence_rad) /
               (2.0 * std::abs(baseline_m));
    return baseline_m > 0.0 ? h : -h;
}

/// Default inversion grid: [-1.5, +3] Rayleigh units at rho_s/25 spacing,
/// covering ground + facade layover.
inline ElevationGrid default_elevation_grid(const AcquisitionGeometry& geom) {
    double rho = rayleigh_resolution(geom);
    return ElevationGrid::uniform(-1.5 * rho, 3.0 * rho, rho / 25.0);
}

}  // namespace tomo
