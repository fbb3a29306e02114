#pragma once

#include <cstdint>
#include <vector>

#include "tomo/stack.hpp"

namespace tomo {

struct FilterParams {
    int patch_size = 7;    // odd
    int search_size = 21;  // odd
    double bandwidth = 0.0;  // 0 = calibrate on a pure-noise tile
    double gamma = 1.0;      // phase-term weight in the dissimilarity
};

/// Intensity/phase view of one interferometric pair.
struct IfgPlanes {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> i1;   // |g1|^2
    std::vector<double> i2;   // |g2|^2
    std::vector<double> phi;  // arg(g1 * conj(g2))
    double eps = 0.0;         // intensity floor for log ratios

    std::size_t idx(std::size_t r, std::size_t c) const { return r * width + c; }
};

IfgPlanes make_planes(const InterferogramPair& pair, std::size_t width, std::size_t height);

/// Log-likelihood of one (I1, I2, phi) observation under the bivariate
/// speckle density with parameters (psi, mu, sigma2).
double goodman_loglik(double i1, double i2, double phi, double psi, double mu,
                      double sigma2);

/// Symmetric patch score: 0 for identical patches, growing with statistical
/// dissimilarity. Patches are shrunk at image borders; the sum is rescaled
/// to the nominal patch area. The stack overload sums the score over all
/// acquisitions, so every interferogram contributes to patch matching.
double patch_dissimilarity(const IfgPlanes& v, std::size_t row_a, std::size_t col_a,
                           std::size_t row_b, std::size_t col_b, int patch_size,
                           double gamma);
double patch_dissimilarity(const std::vector<IfgPlanes>& stack_planes, std::size_t row_a,
                           std::size_t col_a, std::size_t row_b, std::size_t col_b,
                           int patch_size, double gamma);

/// Weight map over the search window centered on (row, col), row-major
/// search_size x search_size, zero outside the image. The exponential kernel
/// is anchored at a low quantile of the window's scores, so the common
/// noise-floor offset of the scores cancels and the bandwidth acts on their
/// spread; candidates below half the peak weight are dropped. The self weight
/// is set to the maximum over the other candidates. One weight map per pixel
/// is shared by all acquisitions.
std::vector<double> nl_weights(const std::vector<IfgPlanes>& stack_planes, std::size_t row,
                               std::size_t col, int search_size, int patch_size,
                               double bandwidth, double gamma);

struct WmleResult {
    double psi = 0.0;
    double mu = 0.0;
    double sigma2 = 0.0;
    double sum_w = 0.0;
    double phase_coherence = 0.0;  // phasor alignment of the weighted samples
};

/// Weighted ML parameter estimate from samples in the search window.
WmleResult wmle_estimate(const InterferogramPair& pair, const InterferometricStack& stack,
                         const std::vector<double>& weights, std::size_t row,
                         std::size_t col, int search_size);

/// Lower-tail spread (25th minus 10th percentile) of stack patch
/// dissimilarities over random patch pairs drawn from the data itself (fixed
/// seed): the spread of the score between statistically equal patches, which
/// sets the selectivity scale.
double calibrate_bandwidth(const std::vector<IfgPlanes>& stack_planes, int patch_size,
                           double gamma);

std::vector<FilteredInterferogram> filter_stack(const InterferometricStack& stack,
                                                const FilterParams& params);
/// Plain serial implementation, kept as the reference for the parallel path.
std::vector<FilteredInterferogram> filter_stack_serial(const InterferometricStack& stack,
                                                       const FilterParams& params);

}  // namespace tomo
