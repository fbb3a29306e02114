#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tomo/sensing.hpp"
#include "tomo/stack.hpp"
#include "tomo/types.hpp"

namespace tomo {

struct ReflectivityProfile {
    ElevationGrid grid;
    Eigen::VectorXcd values;
};

/// White noise model, C = sigma_eps2 * I.
struct NoiseModel {
    double sigma_eps2 = 1.0;
};

/// Noise power from the non-local estimates at one pixel: mean over
/// acquisitions of 2*sigma2*(1 - mu), floored at 1e-6 of the correlated
/// signal power.
NoiseModel estimate_noise_power(const std::vector<FilteredInterferogram>& filtered,
                                std::size_t pixel);

/// Complex measurement vector for inversion from the filtered parameters at
/// one pixel: 2*sigma2*mu * exp(j*psi) per acquisition.
Eigen::VectorXcd measurement_vector(const std::vector<FilteredInterferogram>& filtered,
                                    std::size_t pixel);

/// Tikhonov-regularized inversion X = (R^H C^-1 R + I)^-1 R^H C^-1 g,
/// evaluated through the SVD of R. The decomposition is computed once and
/// shared across pixels.
class SvdInverter {
public:
    SvdInverter(SensingMatrix sensing, ElevationGrid grid);

    ReflectivityProfile invert(const Eigen::VectorXcd& g, const NoiseModel& noise) const;

private:
    SensingMatrix sensing_;
    ElevationGrid grid_;
    Eigen::MatrixXcd u_;           // N x r
    Eigen::MatrixXcd v_;           // L x r
    Eigen::VectorXd singular_values_;
};

ReflectivityProfile svd_invert(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
                               const ElevationGrid& grid, const NoiseModel& noise);

struct CsOptions {
    double lambda = -1.0;       // < 0: lambda_frac * max |R^H g|
    double lambda_frac = 0.15;
    double rel_tol = 1e-8;
    int max_iters = 5000;
};

struct CsResult {
    ReflectivityProfile profile;
    bool converged = false;
    int iterations = 0;
    double objective = 0.0;  // 0.5*||RX-g||^2 + lambda*||X||_1
    double lambda = 0.0;
};

/// Accelerated proximal gradient (monotone FISTA) for the complex lasso.
/// Non-convergence returns the best iterate with converged = false.
CsResult cs_invert(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
                   const ElevationGrid& grid, const CsOptions& opts = {});

/// Up to k_max local maxima of |X|, strongest first, with sub-bin elevation
/// from 3-point parabolic interpolation.
std::vector<ScattererSpec> extract_peaks(const ReflectivityProfile& profile,
                                         std::size_t k_max);

/// Peaks that clear the significance threshold factor x median|X|; the same
/// rule the two-stage router uses to spot multi-peak profiles.
std::vector<ScattererSpec> significant_peak_list(const ReflectivityProfile& profile,
                                                 double factor, std::size_t k_max);

double lasso_objective(const Eigen::VectorXcd& x, const Eigen::VectorXcd& g,
                       const Eigen::MatrixXcd& r, double lambda);

}  // namespace tomo
