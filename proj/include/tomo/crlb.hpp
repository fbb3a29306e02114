#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tomo/geometry.hpp"

namespace tomo {

struct CrlbReport {
    double sigma_s_single_m = 0.0;   // bound without interference
    double correction_factor = 1.0;  // c0
    double sigma_s_double_m = 0.0;   // c0 * single bound
    double sigma_b_m = 0.0;          // baseline population std
    double normalized = 0.0;         // sigma_s / rho_s
};

/// Elevation bound for a single scatterer,
/// lambda*r / (4*pi*sigma_b*sqrt(2*SNR*N)).
inline double crlb_single(const AcquisitionGeometry& geom, double snr_linear,
                          std::size_t n) {
    if (snr_linear <= 0.0)
        throw std::invalid_argument("crlb_single: SNR must be positive");
    if (n < 1)
        throw std::invalid_argument("crlb_single: need at least one acquisition");
    double sigma_b = geom.baseline_std_m();
    if (sigma_b <= 0.0)
        throw std::invalid_argument("crlb_single: zero baseline spread");
    return geom.wavelength_m * geom.range_m /
           (4.0 * M_PI * sigma_b * std::sqrt(2.0 * snr_linear * static_cast<double>(n)));
}

/// Interference correction for two closely spaced scatterers at a given
/// phase difference, clamped below at 1. The radicand goes non-positive for
/// kappa >= 3; the clamp covers that region too.
inline double c0_exact(double kappa, double delta_phi) {
    if (kappa <= 0.0)
        throw std::invalid_argument("c0_exact: kappa must be positive");
    double t = 3.0 - 2.0 * kappa;
    double denom = 9.0 - 6.0 * t * std::cos(2.0 * delta_phi) + t * t;
    double radicand = 40.0 / (kappa * kappa) * (1.0 - kappa / 3.0) / denom;
    if (radicand <= 0.0) return 1.0;
    return std::max(std::sqrt(radicand), 1.0);
}

/// Phase-averaged correction factor, 2.57*(kappa^-1.5 - 0.11)^2 + 0.62,
/// clamped below at 1 (clamp active for kappa above ~1.6).
inline double c0_approx(double kappa) {
    if (kappa <= 0.0)
        throw std::invalid_argument("c0_approx: kappa must be positive");
    double u = std::pow(kappa, -1.5) - 0.11;
    return std::max(2.57 * u * u + 0.62, 1.0);
}

inline CrlbReport crlb_double(const AcquisitionGeometry& geom, double snr_linear,
                              std::size_t n, double kappa) {
    CrlbReport r;
    r.sigma_b_m = geom.baseline_std_m();
    r.sigma_s_single_m = crlb_single(geom, snr_linear, n);
    r.correction_factor = c0_approx(kappa);
    r.sigma_s_double_m = r.correction_factor * r.sigma_s_single_m;
    r.normalized = r.sigma_s_double_m / rayleigh_resolution(geom);
    return r;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

}  // namespace tomo
