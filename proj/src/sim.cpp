#include "tomo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tomo/inversion.hpp"
#include "tomo/model_select.hpp"
#include "tomo/sensing.hpp"

namespace tomo {

Estimator estimator_from_string(const std::string& name) {
    if (name == "svd") return Estimator::SVD;
    if (name == "cs") return Estimator::CS;
    throw std::invalid_argument("unknown estimator: " + name);
}

AcquisitionGeometry munich_geometry() {
    AcquisitionGeometry g;
    g.wavelength_m = 0.031;
    g.range_m = 698e3;
    g.incidence_rad = 50.4 * M_PI / 180.0;
    g.baselines_m = {184.40, 171.92, 32.30, -2.78, 9.30};
    g.dates = {"2016-07-25", "2016-09-07", "2017-02-19", "2017-04-26", "2017-07-01"};
    return g;
}

std::vector<double> draw_baselines(double span_m, std::size_t n, std::mt19937_64& rng) {
    if (span_m <= 0.0 || n < 1)
        throw std::invalid_argument("draw_baselines: need span > 0 and n >= 1");
    std::uniform_real_distribution<double> uni(0.0, span_m);
    std::vector<double> out(n);
    for (auto& b : out) b = uni(rng);
    return out;
}

Eigen::VectorXcd simulate_measurements(const std::vector<ScattererSpec>& scene,
                                       const AcquisitionGeometry& geom, double snr_db,
                                       std::mt19937_64& rng) {
    geom.validate();
    const auto n = static_cast<Eigen::Index>(geom.n_acquisitions());
    double p_sig = 0.0;
    for (const auto& s : scene) p_sig += s.amplitude * s.amplitude;
    double noise_power = p_sig > 0.0 ? p_sig / db_to_linear(snr_db) : 1.0;
    std::normal_distribution<double> gauss(0.0, std::sqrt(noise_power / 2.0));

    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double dk = wavenumber(geom.baselines_m[static_cast<std::size_t>(i)], geom);
        for (const auto& s : scene) {
            double phase = s.phase_rad - dk * s.elevation_m;
            g(i) += s.amplitude * cplx(std::cos(phase), std::sin(phase));
        }
        g(i) += cplx(gauss(rng), gauss(rng));
    }
    return g;
}

double detection_rate(const std::vector<ScattererSet>& estimates,
                      const std::vector<ScattererSpec>& truth, double window_m) {
    if (window_m <= 0.0)
        throw std::invalid_argument("detection_rate: window must be positive");
    if (estimates.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& est : estimates) {
        if (est.scatterers.size() != truth.size() ||
            static_cast<std::size_t>(est.model_order) != truth.size())
            continue;
        std::vector<bool> used(est.scatterers.size(), false);
        bool all_matched = true;
        for (const auto& t : truth) {
            double best = window_m;
            long best_i = -1;
            for (std::size_t i = 0; i < est.scatterers.size(); ++i) {
                if (used[i]) continue;
                double d = std::abs(est.scatterers[i].elevation_m - t.elevation_m);
                if (d <= best) { best = d; best_i = static_cast<long>(i); }
            }
            if (best_i < 0) { all_matched = false; break; }
            used[static_cast<std::size_t>(best_i)] = true;
        }
        if (all_matched) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(estimates.size());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t realization_seed(std::uint64_t seed, std::size_t draw, std::size_t real) {
    return splitmix64(seed ^ splitmix64(0x1000003ull * draw + real + 1));
}

/// Greedy match of truth scatterers to estimates; errors[q] = NaN when the
/// q-th truth has no distinct estimate within the window.
void match_errors(const ScattererSet& est, const std::vector<ScattererSpec>& truth,
                  double window_m, double* errors) {
    std::vector<bool> used(est.scatterers.size(), false);
    for (std::size_t q = 0; q < truth.size(); ++q) {
        double best = window_m;
        long best_i = -1;
        for (std::size_t i = 0; i < est.scatterers.size(); ++i) {
            if (used[i]) continue;
            double d = std::abs(est.scatterers[i].elevation_m - truth[q].elevation_m);
            if (d <= best) { best = d; best_i = static_cast<long>(i); }
        }
        if (best_i >= 0) {
            used[static_cast<std::size_t>(best_i)] = true;
            errors[q] = est.scatterers[static_cast<std::size_t>(best_i)].elevation_m -
                        truth[q].elevation_m;
        } else {
            errors[q] = std::numeric_limits<double>::quiet_NaN();
        }
    }
}

}  // namespace

MonteCarloResult run_monte_carlo(const SimulationConfig& cfg, Estimator estimator,
                                 const AcquisitionGeometry& base_geom) {
    cfg.validate();
    if (cfg.scatterers.empty())
        throw std::invalid_argument("run_monte_carlo: scene must contain scatterers");

    const std::size_t n_scat = cfg.scatterers.size();
    const std::size_t n_real = cfg.n_realizations;
    double snr_lin = db_to_linear(cfg.snr_db);
    double p_sig = 0.0;
    for (const auto& s : cfg.scatterers) p_sig += s.amplitude * s.amplitude;
    NoiseModel noise{p_sig / snr_lin};

    std::mt19937_64 draw_rng(cfg.rng_seed);

    MonteCarloResult res;
    std::vector<std::vector<double>> all_errors(n_scat);
    std::size_t detected = 0;
    double crlb_sum = 0.0, rho_sum = 0.0, c0_sum = 0.0, sigma_b_sum = 0.0;

    for (std::size_t d = 0; d < cfg.n_baseline_draws; ++d) {
        AcquisitionGeometry geom = base_geom;
        geom.baselines_m = draw_baselines(cfg.baseline_span_m, cfg.n_acquisitions, draw_rng);
        if (geom.baseline_std_m() <= 0.0) continue;  // degenerate draw

        double rho = rayleigh_resolution(geom);
        double window = cfg.detection_window_frac * rho;
        ElevationGrid grid = default_elevation_grid(geom);
        SensingMatrix sensing = build_sensing_matrix(geom, grid);
        SvdInverter svd(sensing, grid);

        crlb_sum += crlb_single(geom, snr_lin, cfg.n_acquisitions);
        rho_sum += rho;
        sigma_b_sum += geom.baseline_std_m();
        if (n_scat == 2) {
            double sep = std::abs(cfg.scatterers[1].elevation_m - cfg.scatterers[0].elevation_m);
            c0_sum += c0_approx(std::max(sep / rho, 1e-6));
        }

        std::vector<double> errors(n_real * n_scat);
        std::vector<std::uint8_t> hit(n_real, 0);

#pragma omp parallel for schedule(dynamic, 16)
        for (long r = 0; r < static_cast<long>(n_real); ++r) {
            auto ri = static_cast<std::size_t>(r);
            std::mt19937_64 rng(realization_seed(cfg.rng_seed, d, ri));
            std::vector<ScattererSpec> scene = cfg.scatterers;
            if (cfg.randomize_phases) {
                std::uniform_real_distribution<double> uni(-M_PI, M_PI);
                for (auto& s : scene) s.phase_rad = uni(rng);
            }
            double* err = errors.data() + ri * n_scat;
            for (std::size_t q = 0; q < n_scat; ++q)
                err[q] = std::numeric_limits<double>::quiet_NaN();
            try {
                Eigen::VectorXcd g = simulate_measurements(scene, geom, cfg.snr_db, rng);
                ReflectivityProfile prof = estimator == Estimator::SVD
                                               ? svd.invert(g, noise)
                                               : cs_invert(g, sensing, grid).profile;
                ScattererSet set;
                if (n_scat >= 2) {
                    // resolution experiments probe the inversion operator itself:
                    // a scatterer counts only as a significant profile peak, so the
                    // estimator contrast is not erased by the maximum-likelihood refit
                    set.scatterers =
                        significant_peak_list(prof, cfg.significance_factor, kMaxModelOrder);
                    set.model_order = static_cast<int>(set.scatterers.size());
                } else {
                    auto peaks = extract_peaks(prof, kMaxModelOrder);
                    std::vector<ModelFit> fits;
                    int k_hi = std::min<int>(kMaxModelOrder, static_cast<int>(peaks.size()));
                    for (int k = 0; k <= k_hi; ++k)
                        fits.push_back(fit_k(g, sensing, peaks, k));
                    auto [k_hat, refined] = select_order(fits);
                    (void)k_hat;
                    set = refined;
                }
                match_errors(set, cfg.scatterers, window, err);
                bool all = set.scatterers.size() == n_scat &&
                           static_cast<std::size_t>(set.model_order) == n_scat;
                for (std::size_t q = 0; q < n_scat && all; ++q)
                    if (std::isnan(err[q])) all = false;
                hit[ri] = all ? 1 : 0;
            } catch (const std::exception&) {
                hit[ri] = 0;  // counted as non-detection
            }
        }

        for (std::size_t ri = 0; ri < n_real; ++ri) {
            detected += hit[ri];
            for (std::size_t q = 0; q < n_scat; ++q) {
                double e = errors[ri * n_scat + q];
                if (!std::isnan(e)) all_errors[q].push_back(e);
            }
        }
        res.n_total += n_real;
    }

    if (res.n_total == 0)
        throw std::runtime_error("run_monte_carlo: all baseline draws degenerate");

    res.n_detected = detected;
    res.detection_rate = static_cast<double>(detected) / static_cast<double>(res.n_total);
    res.bias_m.resize(n_scat, 0.0);
    res.std_m.resize(n_scat, 0.0);
    for (std::size_t q = 0; q < n_scat; ++q) {
        const auto& e = all_errors[q];
        if (e.empty()) continue;
        double mean = 0.0;
        for (double v : e) mean += v;
        mean /= static_cast<double>(e.size());
        double ss = 0.0;
        for (double v : e) ss += (v - mean) * (v - mean);
        res.bias_m[q] = mean;
        res.std_m[q] = std::sqrt(ss / static_cast<double>(e.size()));
    }

    double nd = static_cast<double>(cfg.n_baseline_draws);
    res.crlb_reference.sigma_s_single_m = crlb_sum / nd;
    res.crlb_reference.sigma_b_m = sigma_b_sum / nd;
    res.crlb_reference.correction_factor = n_scat == 2 ? c0_sum / nd : 1.0;
    res.crlb_reference.sigma_s_double_m =
        res.crlb_reference.correction_factor * res.crlb_reference.sigma_s_single_m;
    res.crlb_reference.normalized = res.crlb_reference.sigma_s_single_m / (rho_sum / nd);
    return res;
}

}  // namespace tomo
