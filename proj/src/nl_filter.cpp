#include "tomo/nl_filter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tomo {

IfgPlanes make_planes(const InterferogramPair& pair, std::size_t width, std::size_t height) {
    IfgPlanes v;
    v.width = width;
    v.height = height;
    auto count = width * height;
    v.i1.resize(count);
    v.i2.resize(count);
    v.phi.resize(count);
    double mean_i = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        v.i1[i] = std::norm(pair.master[i]);
        v.i2[i] = std::norm(pair.slave[i]);
        v.phi[i] = std::arg(pair.master[i] * std::conj(pair.slave[i]));
        mean_i += v.i1[i] + v.i2[i];
    }
    mean_i /= static_cast<double>(2 * count);
    v.eps = 1e-12 * std::max(mean_i, 1e-300);
    return v;
}

double goodman_loglik(double i1, double i2, double phi, double psi, double mu,
                      double sigma2) {
    if (i1 < 0.0 || i2 < 0.0 || mu < 0.0 || sigma2 <= 0.0)
        throw std::invalid_argument("goodman_loglik: invalid arguments");
    if (mu >= 1.0)
        throw std::invalid_argument("goodman_loglik: singular coherence mu = 1");
    double om = 1.0 - mu * mu;
    double quad = (i1 + i2 - 2.0 * std::sqrt(i1 * i2) * mu * std::cos(phi - psi)) /
                  (2.0 * sigma2 * om);
    return -std::log(8.0 * M_PI * sigma2 * sigma2 * om) - quad;
}

double patch_dissimilarity(const IfgPlanes& v, std::size_t row_a, std::size_t col_a,
                           std::size_t row_b, std::size_t col_b, int patch_size,
                           double gamma) {
    if (patch_size < 1 || patch_size % 2 == 0)
        throw std::invalid_argument("patch_dissimilarity: patch size must be odd");
    const int hp = patch_size / 2;
    const auto w = static_cast<long>(v.width);
    const auto h = static_cast<long>(v.height);
    const long ra = static_cast<long>(row_a), ca = static_cast<long>(col_a);
    const long rb = static_cast<long>(row_b), cb = static_cast<long>(col_b);

    double score = 0.0;
    long n_valid = 0;
    for (long dr = -hp; dr <= hp; ++dr) {
        for (long dc = -hp; dc <= hp; ++dc) {
            long r1 = ra + dr, c1 = ca + dc, r2 = rb + dr, c2 = cb + dc;
            if (r1 < 0 || r1 >= h || c1 < 0 || c1 >= w) continue;
            if (r2 < 0 || r2 >= h || c2 < 0 || c2 >= w) continue;
            auto ia = v.idx(static_cast<std::size_t>(r1), static_cast<std::size_t>(c1));
            auto ib = v.idx(static_cast<std::size_t>(r2), static_cast<std::size_t>(c2));
            double a1 = v.i1[ia] + v.eps, b1 = v.i1[ib] + v.eps;
            double a2 = v.i2[ia] + v.eps, b2 = v.i2[ib] + v.eps;
            score += std::log((a1 + b1) * (a1 + b1) / (4.0 * a1 * b1));
            score += std::log((a2 + b2) * (a2 + b2) / (4.0 * a2 * b2));
            score += gamma * (1.0 - std::cos(v.phi[ia] - v.phi[ib]));
            ++n_valid;
        }
    }
    if (n_valid == 0) return 0.0;
    // rescale shrunken border patches to the nominal area
    double area = static_cast<double>(patch_size) * patch_size;
    return score * area / static_cast<double>(n_valid);
}

double patch_dissimilarity(const std::vector<IfgPlanes>& stack_planes, std::size_t row_a,
                           std::size_t col_a, std::size_t row_b, std::size_t col_b,
                           int patch_size, double gamma) {
    double score = 0.0;
    for (const auto& v : stack_planes)
        score += patch_dissimilarity(v, row_a, col_a, row_b, col_b, patch_size, gamma);
    return score;
}

std::vector<double> nl_weights(const std::vector<IfgPlanes>& stack_planes, std::size_t row,
                               std::size_t col, int search_size, int patch_size,
                               double bandwidth, double gamma) {
    if (bandwidth <= 0.0)
        throw std::invalid_argument("nl_weights: bandwidth must be positive");
    if (search_size < 1 || search_size % 2 == 0)
        throw std::invalid_argument("nl_weights: search size must be odd");
    if (stack_planes.empty())
        throw std::invalid_argument("nl_weights: empty stack");
    const int hs = search_size / 2;
    const auto w = static_cast<long>(stack_planes.front().width);
    const auto h = static_cast<long>(stack_planes.front().height);
    std::vector<double> weights(static_cast<std::size_t>(search_size) * search_size, 0.0);

    std::vector<double> scores(weights.size(), -1.0);
    std::vector<double> valid_scores;
    valid_scores.reserve(weights.size());
    for (int dr = -hs; dr <= hs; ++dr) {
        for (int dc = -hs; dc <= hs; ++dc) {
            long r = static_cast<long>(row) + dr, c = static_cast<long>(col) + dc;
            if (r < 0 || r >= h || c < 0 || c >= w) continue;
            auto slot = static_cast<std::size_t>((dr + hs) * search_size + (dc + hs));
            if (dr == 0 && dc == 0) continue;  // filled after the scan
            double d = patch_dissimilarity(stack_planes, row, col, static_cast<std::size_t>(r),
                                           static_cast<std::size_t>(c), patch_size, gamma);
            scores[slot] = d;
            valid_scores.push_back(d);
        }
    }
    // anchor the exponential kernel at a low quantile of the window's own
    // scores: the raw scores carry a large noise-floor offset common to every
    // pair, and only the spread above the best matches separates populations
    double max_other = 0.0;
    if (!valid_scores.empty()) {
        auto q = valid_scores.begin() + static_cast<long>(valid_scores.size() / 20);
        std::nth_element(valid_scores.begin(), q, valid_scores.end());
        double anchor = *q;
        for (std::size_t slot = 0; slot < weights.size(); ++slot) {
            if (scores[slot] < 0.0) continue;
            weights[slot] = std::exp(-std::max(scores[slot] - anchor, 0.0) / bandwidth);
            max_other = std::max(max_other, weights[slot]);
        }
        // drop the long tail of half-matching candidates: partial patch
        // overlaps across a discontinuity otherwise leak into the average
        for (auto& wt : weights)
            if (wt < 0.5 * max_other) wt = 0.0;
    }
    auto self_slot = static_cast<std::size_t>(hs * search_size + hs);
    weights[self_slot] = max_other > 0.0 ? max_other : 1.0;
    return weights;
}

WmleResult wmle_estimate(const InterferogramPair& pair, const InterferometricStack& stack,
                         const std::vector<double>& weights, std::size_t row,
                         std::size_t col, int search_size) {
    const int hs = search_size / 2;
    const auto w = static_cast<long>(stack.width);
    const auto h = static_cast<long>(stack.height);

    cplx cross(0.0, 0.0);
    double cross_mag = 0.0, power = 0.0, sum_w = 0.0;
    for (int dr = -hs; dr <= hs; ++dr) {
        for (int dc = -hs; dc <= hs; ++dc) {
            long r = static_cast<long>(row) + dr, c = static_cast<long>(col) + dc;
            if (r < 0 || r >= h || c < 0 || c >= w) continue;
            double wt = weights[static_cast<std::size_t>((dr + hs) * search_size + (dc + hs))];
            if (wt <= 0.0) continue;
            auto i = stack.idx(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
            cplx g1 = pair.master[i], g2 = pair.slave[i];
            cross += wt * g1 * std::conj(g2);
            cross_mag += wt * std::abs(g1) * std::abs(g2);
            power += wt * (std::norm(g1) + std::norm(g2));
            sum_w += wt;
        }
    }
    if (sum_w <= 0.0)
        throw std::runtime_error("wmle_estimate: empty neighborhood");

    WmleResult res;
    res.psi = -std::arg(cross);
    res.mu = power > 0.0 ? std::clamp(2.0 * cross_mag / power, 0.0, 1.0) : 0.0;
    res.sigma2 = power / (4.0 * sum_w);
    res.sum_w = sum_w;
    res.phase_coherence = cross_mag > 0.0 ? std::clamp(std::abs(cross) / cross_mag, 0.0, 1.0)
                                          : 0.0;
    return res;
}

double calibrate_bandwidth(const std::vector<IfgPlanes>& stack_planes, int patch_size,
                           double gamma) {
    if (stack_planes.empty())
        throw std::invalid_argument("calibrate_bandwidth: empty stack");
    // lower-tail spread of the data's own pairwise patch scores: the smallest
    // scores come from statistically equal pairs, so this tracks the score
    // spread under equality without contamination from heterogeneous pairs
    const auto& front = stack_planes.front();
    std::mt19937_64 rng(0x6e6c66u);
    auto hp = static_cast<std::size_t>(patch_size / 2);
    std::size_t r_lo = std::min(hp, front.height - 1), r_hi = front.height - 1 - r_lo;
    std::size_t c_lo = std::min(hp, front.width - 1), c_hi = front.width - 1 - c_lo;
    if (r_hi < r_lo) { r_lo = 0; r_hi = front.height - 1; }
    if (c_hi < c_lo) { c_lo = 0; c_hi = front.width - 1; }
    std::uniform_int_distribution<std::size_t> pick_r(r_lo, r_hi), pick_c(c_lo, c_hi);
    std::vector<double> scores;
    scores.reserve(2000);
    for (int k = 0; k < 2000; ++k) {
        std::size_t ra = pick_r(rng), ca = pick_c(rng), rb = pick_r(rng), cb = pick_c(rng);
        if (ra == rb && ca == cb) continue;
        scores.push_back(patch_dissimilarity(stack_planes, ra, ca, rb, cb, patch_size, gamma));
    }
    std::sort(scores.begin(), scores.end());
    double spread = scores[scores.size() / 4] - scores[scores.size() / 10];
    return std::max(spread, 1e-12);
}

namespace {

void filter_pixel(const InterferometricStack& stack, const std::vector<IfgPlanes>& planes,
                  const FilterParams& p, double bandwidth, std::size_t row, std::size_t col,
                  std::vector<FilteredInterferogram>& out) {
    auto i = out.front().idx(row, col);
    try {
        // one weight map per pixel, shared by every acquisition: the patch
        // match pools the evidence of all interferograms
        auto weights = nl_weights(planes, row, col, p.search_size, p.patch_size,
                                  bandwidth, p.gamma);
        for (std::size_t n = 0; n < stack.n_acquisitions(); ++n) {
            auto est = wmle_estimate(stack.acquisitions[n], stack, weights, row, col,
                                     p.search_size);
            out[n].psi[i] = est.psi;
            out[n].mu[i] = est.mu;
            out[n].sigma2[i] = std::max(est.sigma2, 1e-300);
            out[n].effective_looks[i] = est.sum_w;
            out[n].phase_coherence[i] = est.phase_coherence;
            out[n].quality[i] = 1;
        }
    } catch (const std::exception&) {
        for (std::size_t n = 0; n < stack.n_acquisitions(); ++n) {
            out[n].psi[i] = planes[n].phi[i];
            out[n].mu[i] = 0.0;
            out[n].sigma2[i] = std::max(0.25 * (planes[n].i1[i] + planes[n].i2[i]), 1e-300);
            out[n].effective_looks[i] = 1.0;
            out[n].phase_coherence[i] = 0.0;
            out[n].quality[i] = 0;
        }
    }
}

std::vector<FilteredInterferogram> filter_impl(const InterferometricStack& stack,
                                               const FilterParams& params, bool parallel) {
    stack.validate();
    if (stack.width < static_cast<std::size_t>(params.search_size) ||
        stack.height < static_cast<std::size_t>(params.search_size))
        throw std::invalid_argument("filter_stack: image smaller than search window");

    std::vector<IfgPlanes> planes;
    planes.reserve(stack.n_acquisitions());
    for (const auto& pair : stack.acquisitions)
        planes.push_back(make_planes(pair, stack.width, stack.height));
    double bandwidth = params.bandwidth > 0.0
                           ? params.bandwidth
                           : calibrate_bandwidth(planes, params.patch_size, params.gamma);

    std::vector<FilteredInterferogram> out(stack.n_acquisitions());
    auto count = stack.n_pixels();
    for (auto& f : out) {
        f.width = stack.width;
        f.height = stack.height;
        f.psi.assign(count, 0.0);
        f.mu.assign(count, 0.0);
        f.sigma2.assign(count, 1.0);
        f.effective_looks.assign(count, 0.0);
        f.phase_coherence.assign(count, 0.0);
        f.quality.assign(count, 0);
    }

    const auto h = static_cast<long>(stack.height);
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (long r = 0; r < h; ++r)
            for (std::size_t c = 0; c < stack.width; ++c)
                filter_pixel(stack, planes, params, bandwidth, static_cast<std::size_t>(r),
                             c, out);
    } else {
        for (long r = 0; r < h; ++r)
            for (std::size_t c = 0; c < stack.width; ++c)
                filter_pixel(stack, planes, params, bandwidth, static_cast<std::size_t>(r),
                             c, out);
    }
    return out;
}

}  // namespace

std::vector<FilteredInterferogram> filter_stack(const InterferometricStack& stack,
                                                const FilterParams& params) {
    return filter_impl(stack, params, true);
}

std::vector<FilteredInterferogram> filter_stack_serial(const InterferometricStack& stack,
                                                       const FilterParams& params) {
    return filter_impl(stack, params, false);
}

}  // namespace tomo
