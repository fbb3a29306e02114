#include "tomo/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tomo {

NoiseModel estimate_noise_power(const std::vector<FilteredInterferogram>& filtered,
                                std::size_t pixel) {
    if (filtered.empty())
        throw std::invalid_argument("estimate_noise_power: no filtered planes");
    double noise = 0.0, signal = 0.0;
    for (const auto& f : filtered) {
        noise += 2.0 * f.sigma2[pixel] * (1.0 - f.mu[pixel]);
        signal += 2.0 * f.sigma2[pixel] * f.mu[pixel];
    }
    noise /= static_cast<double>(filtered.size());
    signal /= static_cast<double>(filtered.size());
    double floor = 1e-6 * std::max(signal, 1e-300);
    NoiseModel m;
    m.sigma_eps2 = std::max(noise, floor);
    return m;
}

Eigen::VectorXcd measurement_vector(const std::vector<FilteredInterferogram>& filtered,
                                    std::size_t pixel) {
    Eigen::VectorXcd g(static_cast<Eigen::Index>(filtered.size()));
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        const auto& f = filtered[static_cast<std::size_t>(n)];
        double amp = 2.0 * f.sigma2[pixel] * f.mu[pixel];
        double psi = f.psi[pixel];
        g(n) = amp * cplx(std::cos(psi), std::sin(psi));
    }
    return g;
}

SvdInverter::SvdInverter(SensingMatrix sensing, ElevationGrid grid)
    : sensing_(std::move(sensing)), grid_(std::move(grid)) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(sensing_.entries,
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    u_ = svd.matrixU();
    v_ = svd.matrixV();
    singular_values_ = svd.singularValues();
}

ReflectivityProfile SvdInverter::invert(const Eigen::VectorXcd& g,
                                        const NoiseModel& noise) const {
    if (g.size() != sensing_.rows())
        throw std::invalid_argument("svd_invert: measurement dimension mismatch");
    if (!g.allFinite())
        throw std::invalid_argument("svd_invert: non-finite measurement");
    if (noise.sigma_eps2 <= 0.0)
        throw std::invalid_argument("svd_invert: noise power must be positive");
    // (R^H R / s2 + I)^-1 R^H g / s2  =  V diag(sv / (sv^2 + s2)) U^H g
    Eigen::VectorXcd proj = u_.adjoint() * g;
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
        double sv = singular_values_(i);
        proj(i) *= sv / (sv * sv + noise.sigma_eps2);
    }
    ReflectivityProfile out;
    out.grid = grid_;
    out.values = v_ * proj;
    return out;
}

ReflectivityProfile svd_invert(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
                               const ElevationGrid& grid, const NoiseModel& noise) {
    return SvdInverter(sensing, grid).invert(g, noise);
}

double lasso_objective(const Eigen::VectorXcd& x, const Eigen::VectorXcd& g,
                       const Eigen::MatrixXcd& r, double lambda) {
    double fit = (r * x - g).squaredNorm();
    return 0.5 * fit + lambda * x.cwiseAbs().sum();
}

namespace {

void soft_threshold(Eigen::VectorXcd& x, double tau) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        double mag = std::abs(x(i));
        x(i) = mag > tau ? x(i) * ((mag - tau) / mag) : cplx(0.0, 0.0);
    }
}

/// Largest eigenvalue of R^H R by power iteration on the implicit operator.
double gram_spectral_norm(const Eigen::MatrixXcd& r) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Ones(r.cols());
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXcd w = r.adjoint() * (r * v);
        double nw = w.norm();
        if (nw == 0.0) return 1.0;
        double lam_new = nw;
        w /= nw;
        if (std::abs(lam_new - lam) < 1e-10 * lam_new) { lam = lam_new; break; }
        lam = lam_new;
        v = w;
    }
    return lam;
}

}  // namespace

CsResult cs_invert(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
                   const ElevationGrid& grid, const CsOptions& opts) {
    const auto& r = sensing.entries;
    if (g.size() != r.rows())
        throw std::invalid_argument("cs_invert: measurement dimension mismatch");
    if (!g.allFinite())
        throw std::invalid_argument("cs_invert: non-finite measurement");

    Eigen::VectorXcd corr = r.adjoint() * g;
    double lambda = opts.lambda >= 0.0 ? opts.lambda
                                       : opts.lambda_frac * corr.cwiseAbs().maxCoeff();

    CsResult res;
    res.lambda = lambda;
    res.profile.grid = grid;

    const Eigen::Index l = r.cols();
    double lip = std::max(gram_spectral_norm(r), 1e-12);
    double step = 1.0 / lip;

    Eigen::VectorXcd x = Eigen::VectorXcd::Zero(l);
    Eigen::VectorXcd y = x;
    double t = 1.0;
    double obj = lasso_objective(x, g, r, lambda);

    int it = 0;
    for (; it < opts.max_iters; ++it) {
        Eigen::VectorXcd grad = r.adjoint() * (r * y - g);
        Eigen::VectorXcd cand = y - step * grad;
        soft_threshold(cand, step * lambda);
        double cand_obj = lasso_objective(cand, g, r, lambda);
        if (cand_obj > obj) {
            // monotone safeguard: plain proximal step from the best iterate
            grad = r.adjoint() * (r * x - g);
            cand = x - step * grad;
            soft_threshold(cand, step * lambda);
            cand_obj = lasso_objective(cand, g, r, lambda);
            t = 1.0;  // restart momentum
        }
        double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        y = cand + ((t - 1.0) / t_next) * (cand - x);
        t = t_next;
        double drop = obj - cand_obj;
        x = cand;
        bool done = drop >= 0.0 && drop <= opts.rel_tol * std::max(std::abs(obj), 1e-30);
        obj = std::min(obj, cand_obj);
        if (done) { res.converged = true; ++it; break; }
    }
    res.profile.values = x;
    res.iterations = it;
    res.objective = obj;
    return res;
}

std::vector<ScattererSpec> extract_peaks(const ReflectivityProfile& profile,
                                         std::size_t k_max) {
    if (k_max < 1)
        throw std::invalid_argument("extract_peaks: k_max must be >= 1");
    const auto& x = profile.values;
    const auto& s = profile.grid.samples_m;
    const Eigen::Index l = x.size();
    std::vector<ScattererSpec> peaks;
    if (l == 0) return peaks;

    Eigen::VectorXd mag = x.cwiseAbs();
    double max_mag = mag.maxCoeff();
    if (max_mag <= 0.0) return peaks;  // flat profile

    std::vector<Eigen::Index> cands;
    for (Eigen::Index i = 0; i < l; ++i) {
        double left = i > 0 ? mag(i - 1) : -1.0;
        double right = i < l - 1 ? mag(i + 1) : -1.0;
        if (mag(i) > left && mag(i) >= right && mag(i) > 0.0)
            cands.push_back(i);
    }
    std::sort(cands.begin(), cands.end(),
              [&](Eigen::Index a, Eigen::Index b) { return mag(a) > mag(b); });

    for (Eigen::Index i : cands) {
        if (peaks.size() >= k_max) break;
        ScattererSpec spec;
        double s0 = s[static_cast<std::size_t>(i)];
        double amp = mag(i);
        if (i > 0 && i < l - 1) {
            double ym = mag(i - 1), y0 = mag(i), yp = mag(i + 1);
            double denom = ym - 2.0 * y0 + yp;
            if (denom < 0.0) {
                double delta = 0.5 * (ym - yp) / denom;
                delta = std::clamp(delta, -0.5, 0.5);
                s0 += delta * profile.grid.spacing_m;
                amp = y0 - 0.25 * (ym - yp) * delta;
            }
        }
        spec.elevation_m = s0;
        spec.amplitude = amp;
        spec.phase_rad = std::arg(x(i));
        peaks.push_back(spec);
    }
    return peaks;
}

std::vector<ScattererSpec> significant_peak_list(const ReflectivityProfile& profile,
                                                 double factor, std::size_t k_max) {
    auto peaks = extract_peaks(profile, k_max);
    if (peaks.empty()) return peaks;
    Eigen::VectorXd mag = profile.values.cwiseAbs();
    std::vector<double> sorted(mag.data(), mag.data() + mag.size());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2),
                     sorted.end());
    double thresh = factor * std::max(sorted[sorted.size() / 2], 1e-300);
    std::erase_if(peaks, [&](const ScattererSpec& p) { return p.amplitude < thresh; });
    return peaks;
}

}  // namespace tomo
