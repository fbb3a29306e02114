#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tomo {

enum class WeightFamily { Tukey, TDist };

struct FusionParams {
    WeightFamily weight_family = WeightFamily::Tukey;
    double c_r = 4.685;  // in robust-scale units
    int neighborhood_radius = 3;
    int max_irls_iters = 100;
    double tdist_nu = 3.0;
};

/// Tukey biweight loss, bounded at c^2/6.
inline double tukey_rho(double x, double c_r) {
    if (c_r <= 0.0) throw std::invalid_argument("tukey_rho: c_r must be positive");
    double bound = c_r * c_r / 6.0;
    if (std::abs(x) >= c_r) return bound;
    double d = c_r * c_r - x * x;
    return -d * d * d / (6.0 * std::pow(c_r, 4)) + bound;
}

/// IRLS weight rho'(x)/x = (1 - x^2/c^2)^2 inside [-c, c], zero outside.
inline double tukey_weight(double x, double c_r) {
    if (c_r <= 0.0) throw std::invalid_argument("tukey_weight: c_r must be positive");
    if (std::abs(x) >= c_r) return 0.0;
    double t = 1.0 - (x / c_r) * (x / c_r);
    return t * t;
}

/// Student-t weighting, (nu + 1) / (nu + x^2), rescaled to w(0) = 1.
inline double tdist_weight(double x, double nu) {
    return nu / (nu + x * x);
}

struct FusionResult {
    double value = 0.0;
    bool degenerate = false;  // all weights vanished; median returned
    int iterations = 0;
};

/// IRLS fixed point of the weighted mean with MAD-scaled residuals,
/// initialized at the median.
FusionResult m_estimate(const std::vector<double>& samples, const FusionParams& params);

inline double fuse(const std::vector<double>& samples, const FusionParams& params) {
    return m_estimate(samples, params).value;
}

}  // namespace tomo
