#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "tomo/geometry.hpp"

namespace tomo {

/// Steering matrix R with R_{nl} = exp(-j * dk_n * s_l); every entry has
/// unit modulus.
struct SensingMatrix {
    Eigen::MatrixXcd entries;        // N x L
    std::vector<double> wavenumbers;  // dk_n, rad/m

    Eigen::Index rows() const { return entries.rows(); }
    Eigen::Index cols() const { return entries.cols(); }
};

inline SensingMatrix build_sensing_matrix(const AcquisitionGeometry& geom,
                                          const ElevationGrid& grid) {
    geom.validate();
    grid.validate();
    const auto n = static_cast<Eigen::Index>(geom.n_acquisitions());
    const auto l = static_cast<Eigen::Index>(grid.size());
    SensingMatrix m;
    m.entries.resize(n, l);
    m.wavenumbers.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double dk = wavenumber(geom.baselines_m[static_cast<std::size_t>(i)], geom);
        m.wavenumbers[static_cast<std::size_t>(i)] = dk;
        for (Eigen::Index j = 0; j < l; ++j) {
            double phase = -dk * grid.samples_m[static_cast<std::size_t>(j)];
            m.entries(i, j) = std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    return m;
}

/// Steering vector for a single elevation, exp(-j * dk_n * s).
inline Eigen::VectorXcd steering_vector(const std::vector<double>& wavenumbers, double s_m) {
    Eigen::VectorXcd a(static_cast<Eigen::Index>(wavenumbers.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double phase = -wavenumbers[static_cast<std::size_t>(i)] * s_m;
        a(i) = std::complex<double>(std::cos(phase), std::sin(phase));
    }
    return a;
}

}  // namespace tomo
