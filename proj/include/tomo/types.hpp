#pragma once

#include <cmath>
#include <vector>

namespace tomo {

/// One discrete scatterer: elevation, linear magnitude, phase in (-pi, pi].
struct ScattererSpec {
    double elevation_m = 0.0;
    double amplitude = 1.0;
    double phase_rad = 0.0;
};

/// Per-pixel detection result.
struct ScattererSet {
    std::vector<ScattererSpec> scatterers;
    int model_order = 0;  // K-hat

    bool empty() const { return scatterers.empty(); }
};

inline double wrap_phase(double phi) {
    phi = std::fmod(phi + M_PI, 2.0 * M_PI);
    if (phi <= 0.0) phi += 2.0 * M_PI;
    return phi - M_PI;
}

/// Incidence projection from elevation to height, h = s * sin(theta).
inline double elevation_to_height(double s_m, double incidence_rad) {
    return s_m * std::sin(incidence_rad);
}

}  // namespace tomo
