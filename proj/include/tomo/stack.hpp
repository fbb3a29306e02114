#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "tomo/geometry.hpp"

namespace tomo {

using cplx = std::complex<double>;

/// A single bistatic master/slave image pair.
struct InterferogramPair {
    std::vector<cplx> master;  // g1, row-major w*h
    std::vector<cplx> slave;   // g2
};

/// Co-registered stack of N bistatic pairs on a shared azimuth-range grid.
struct InterferometricStack {
    std::size_t width = 0;   // range samples
    std::size_t height = 0;  // azimuth lines
    double az_spacing_m = 2.17;
    double rg_spacing_m = 1.36;
    std::vector<InterferogramPair> acquisitions;

    std::size_t n_acquisitions() const { return acquisitions.size(); }
    std::size_t n_pixels() const { return width * height; }
    std::size_t idx(std::size_t row, std::size_t col) const { return row * width + col; }

    void validate() const {
        if (width == 0 || height == 0)
            throw std::invalid_argument("stack: empty image grid");
        for (const auto& a : acquisitions)
            if (a.master.size() != n_pixels() || a.slave.size() != n_pixels())
                throw std::invalid_argument("stack: plane dimensions disagree");
    }
};

/// Non-locally estimated interferogram parameters, one plane set per
/// acquisition: filtered phase psi, coherence mu, variance sigma2, and the
/// sum-of-weights look count.
struct FilteredInterferogram {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> psi;              // rad, (-pi, pi]
    std::vector<double> mu;               // [0, 1]
    std::vector<double> sigma2;           // > 0
    std::vector<double> effective_looks;  // sum of weights
    std::vector<double> phase_coherence;  // |sum w g1 g2*| / sum w |g1||g2|
    std::vector<std::uint8_t> quality;    // 1 = ok

    std::size_t idx(std::size_t row, std::size_t col) const { return row * width + col; }
};

// Directory-based stack format: meta.json plus per-acquisition float32
// planes g1_re_<n>.bin / g1_im_<n>.bin / g2_re_<n>.bin / g2_im_<n>.bin.
void save_stack(const InterferometricStack& stack, const std::string& dir);
InterferometricStack load_stack(const std::string& dir);

// Filtered parameter planes use the same directory layout with float32
// planes psi_<n>.bin / mu_<n>.bin / sigma2_<n>.bin / looks_<n>.bin.
void save_filtered(const std::vector<FilteredInterferogram>& filtered, const std::string& dir);
std::vector<FilteredInterferogram> load_filtered(const std::string& dir);

AcquisitionGeometry load_geometry_json(const std::string& path);
void save_geometry_json(const AcquisitionGeometry& geom, const std::string& path);

}  // namespace tomo
