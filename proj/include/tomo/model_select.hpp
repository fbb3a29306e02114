#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "tomo/sensing.hpp"
#include "tomo/types.hpp"

namespace tomo {

enum class Criterion { BIC, AIC, MDL };

Criterion criterion_from_string(const std::string& name);

struct ModelFit {
    int k = 0;
    std::vector<ScattererSpec> scatterers;
    double residual_power = 0.0;  // ||g - model||^2 / N
    double neg2loglik = 0.0;      // concentrated, 2N ln(pi sigma^2) + 2N
    double penalty = 0.0;         // C(K)
    Criterion criterion = Criterion::BIC;
    bool refined = true;  // false when the NLS refinement fell back to the grid

    double score() const { return neg2loglik + 2.0 * penalty; }
};

/// Complexity penalty for K scatterers (3 real parameters each) against 2N
/// real observations.
double model_penalty(int k, std::size_t n, Criterion criterion);

/// Refit of the k strongest candidates against the measurement by nonlinear
/// least squares over (elevation, complex amplitude).
ModelFit fit_k(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
               const std::vector<ScattererSpec>& candidates, int k,
               Criterion criterion = Criterion::BIC,
               double elevation_window_m = 0.0);

/// Penalized-likelihood order selection over fits for K = 0..K_max. Ties go
/// to the smaller order.
std::pair<int, ScattererSet> select_order(const std::vector<ModelFit>& fits);

constexpr int kMaxModelOrder = 2;

}  // namespace tomo
