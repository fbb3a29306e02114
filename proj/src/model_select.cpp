#include "tomo/model_select.hpp"

#include <cmath>
#include <stdexcept>

namespace tomo {

Criterion criterion_from_string(const std::string& name) {
    if (name == "bic") return Criterion::BIC;
    if (name == "aic") return Criterion::AIC;
    if (name == "mdl") return Criterion::MDL;
    throw std::invalid_argument("unknown criterion: " + name);
}

double model_penalty(int k, std::size_t n, Criterion criterion) {
    double params = 3.0 * k;
    switch (criterion) {
        case Criterion::AIC:
            return params;
        case Criterion::BIC:
        case Criterion::MDL:
            return 0.5 * params * std::log(2.0 * static_cast<double>(n));
    }
    return params;
}

namespace {

Eigen::MatrixXcd steering_matrix(const std::vector<double>& wavenumbers,
                                 const std::vector<double>& elevations) {
    Eigen::MatrixXcd a(static_cast<Eigen::Index>(wavenumbers.size()),
                       static_cast<Eigen::Index>(elevations.size()));
    for (Eigen::Index q = 0; q < a.cols(); ++q)
        a.col(q) = steering_vector(wavenumbers, elevations[static_cast<std::size_t>(q)]);
    return a;
}

double residual_norm2(const Eigen::VectorXcd& g, const std::vector<double>& wavenumbers,
                      const std::vector<double>& elevations, Eigen::VectorXcd* amps) {
    Eigen::MatrixXcd a = steering_matrix(wavenumbers, elevations);
    Eigen::VectorXcd coef = a.colPivHouseholderQr().solve(g);
    if (amps) *amps = coef;
    return (g - a * coef).squaredNorm();
}

}  // namespace

ModelFit fit_k(const Eigen::VectorXcd& g, const SensingMatrix& sensing,
               const std::vector<ScattererSpec>& candidates, int k,
               Criterion criterion, double elevation_window_m) {
    if (k < 0 || static_cast<std::size_t>(k) > candidates.size())
        throw std::invalid_argument("fit_k: order exceeds candidate count");
    const auto n = static_cast<std::size_t>(g.size());
    if (n == 0) throw std::invalid_argument("fit_k: empty measurement");

    ModelFit fit;
    fit.k = k;
    fit.criterion = criterion;
    fit.penalty = model_penalty(k, n, criterion);

    double res2;
    if (k == 0) {
        res2 = g.squaredNorm();
    } else {
        double window = elevation_window_m;
        if (window <= 0.0) {
            // default local search radius: one cycle of the largest wavenumber
            double kmax = 0.0;
            for (double w : sensing.wavenumbers) kmax = std::max(kmax, std::abs(w));
            window = kmax > 0.0 ? M_PI / kmax / 4.0 : 1.0;
        }

        // coordinate descent: closed-form amplitudes, golden-section per elevation
        auto refine = [&](std::vector<double>& elev) {
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            // brackets stay anchored at the grid candidates: the refinement is
            // a local polish, not an unconstrained descent
            const std::vector<double> anchor = elev;
            bool converged = false;
            for (int sweep = 0; sweep < 40 && !converged; ++sweep) {
                double moved = 0.0;
                for (int q = 0; q < k; ++q) {
                    auto& sq = elev[static_cast<std::size_t>(q)];
                    double lo = anchor[static_cast<std::size_t>(q)] - window;
                    double hi = anchor[static_cast<std::size_t>(q)] + window;
                    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
                    auto eval = [&](double s) {
                        double saved = sq;
                        sq = s;
                        double r = residual_norm2(g, sensing.wavenumbers, elev, nullptr);
                        sq = saved;
                        return r;
                    };
                    double f1 = eval(x1), f2 = eval(x2);
                    for (int gi = 0; gi < 40; ++gi) {
                        if (f1 < f2) {
                            hi = x2; x2 = x1; f2 = f1;
                            x1 = hi - gr * (hi - lo);
                            f1 = eval(x1);
                        } else {
                            lo = x1; x1 = x2; f1 = f2;
                            x2 = lo + gr * (hi - lo);
                            f2 = eval(x2);
                        }
                        if (hi - lo < 1e-5) break;
                    }
                    double s_new = 0.5 * (lo + hi);
                    moved = std::max(moved, std::abs(s_new - sq));
                    sq = s_new;
                }
                if (moved < 1e-4) converged = true;
            }
            return residual_norm2(g, sensing.wavenumbers, elev, nullptr);
        };

        // try every size-k candidate subset, keep the best refined fit
        const auto nc = candidates.size();
        std::vector<std::size_t> pick(static_cast<std::size_t>(k));
        for (std::size_t q = 0; q < pick.size(); ++q) pick[q] = q;
        double best = std::numeric_limits<double>::infinity();
        double best_start = std::numeric_limits<double>::infinity();
        std::vector<double> best_elev, best_start_elev;
        bool done = false;
        while (!done) {
            std::vector<double> elev(pick.size());
            for (std::size_t q = 0; q < pick.size(); ++q)
                elev[q] = candidates[pick[q]].elevation_m;
            double start = residual_norm2(g, sensing.wavenumbers, elev, nullptr);
            if (start < best_start) {
                best_start = start;
                best_start_elev = elev;
            }
            double refined = refine(elev);
            if (std::isfinite(refined) && refined < best) {
                best = refined;
                best_elev = elev;
            }
            // next subset in lexicographic order
            done = true;
            for (std::size_t q = pick.size(); q-- > 0;) {
                if (pick[q] + (pick.size() - q) < nc) {
                    ++pick[q];
                    for (std::size_t p = q + 1; p < pick.size(); ++p) pick[p] = pick[p - 1] + 1;
                    done = false;
                    break;
                }
            }
        }
        if (!(best <= best_start + 1e-12)) {
            // fall back to the best unrefined grid candidates
            best_elev = best_start_elev;
            best = best_start;
            fit.refined = false;
        }
        Eigen::VectorXcd amps;
        res2 = residual_norm2(g, sensing.wavenumbers, best_elev, &amps);
        for (int q = 0; q < k; ++q) {
            ScattererSpec s;
            s.elevation_m = best_elev[static_cast<std::size_t>(q)];
            s.amplitude = std::abs(amps(q));
            s.phase_rad = std::arg(amps(q));
            fit.scatterers.push_back(s);
        }
    }

    fit.residual_power = res2 / static_cast<double>(n);
    // relative floor keeps the concentrated likelihood finite on noiseless data
    // without breaking invariance under global scaling of g
    double sigma2 = std::max(fit.residual_power,
                             std::max(1e-9 * g.squaredNorm() / static_cast<double>(n), 1e-300));
    fit.neg2loglik = 2.0 * static_cast<double>(n) * (std::log(M_PI * sigma2) + 1.0);
    return fit;
}

std::pair<int, ScattererSet> select_order(const std::vector<ModelFit>& fits) {
    if (fits.empty())
        throw std::invalid_argument("select_order: no fits");
    const ModelFit* best = &fits.front();
    for (const auto& f : fits)
        if (f.score() < best->score() || (f.score() == best->score() && f.k < best->k))
            best = &f;
    ScattererSet set;
    set.scatterers = best->scatterers;
    set.model_order = best->k;
    return {best->k, set};
}

}  // namespace tomo
