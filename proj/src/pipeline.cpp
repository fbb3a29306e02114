#include "tomo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tomo {

InversionStrategy strategy_from_string(const std::string& name) {
    if (name == "svd") return InversionStrategy::SVD;
    if (name == "cs") return InversionStrategy::CS;
    if (name == "two-stage") return InversionStrategy::TwoStage;
    throw std::invalid_argument("unknown estimator: " + name);
}

namespace {

/// Per-pixel parameter planes without spatial averaging; stands in for the
/// non-local output when filtering is skipped.
std::vector<FilteredInterferogram> identity_filter(const InterferometricStack& stack) {
    std::vector<FilteredInterferogram> out;
    for (const auto& pair : stack.acquisitions) {
        FilteredInterferogram f;
        f.width = stack.width;
        f.height = stack.height;
        auto count = stack.n_pixels();
        f.psi.resize(count);
        f.mu.resize(count);
        f.sigma2.resize(count);
        f.effective_looks.assign(count, 1.0);
        f.phase_coherence.assign(count, 1.0);  // single look: alignment is trivial
        f.quality.assign(count, 1);
        for (std::size_t i = 0; i < count; ++i) {
            cplx g1 = pair.master[i], g2 = pair.slave[i];
            f.psi[i] = -std::arg(g1 * std::conj(g2));
            double power = std::norm(g1) + std::norm(g2);
            f.mu[i] = power > 0.0
                          ? std::clamp(2.0 * std::abs(g1) * std::abs(g2) / power, 0.0, 1.0)
                          : 0.0;
            f.sigma2[i] = std::max(power / 4.0, 1e-300);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::size_t significant_peaks(const ReflectivityProfile& prof, double factor) {
    Eigen::VectorXd mag = prof.values.cwiseAbs();
    std::vector<double> sorted(mag.data(), mag.data() + mag.size());
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2),
                     sorted.end());
    double median = sorted[sorted.size() / 2];
    double thresh = factor * std::max(median, 1e-300);
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < mag.size(); ++i) {
        double left = i > 0 ? mag(i - 1) : -1.0;
        double right = i < mag.size() - 1 ? mag(i + 1) : -1.0;
        if (mag(i) > left && mag(i) >= right && mag(i) >= thresh) ++n;
    }
    return n;
}

void process_pixel(std::size_t pix, const std::vector<FilteredInterferogram>& filtered,
                   const SensingMatrix& sensing, const ElevationGrid& grid,
                   const SvdInverter& svd, const PipelineParams& params,
                   ScattererSet& out, bool& routed_cs) {
    routed_cs = false;
    // gate on phasor alignment: the magnitude-based coherence estimate has a
    // high noise floor, while alignment drops to ~1/sqrt(looks) on noise
    double mean_pc = 0.0, mean_looks = 0.0;
    for (const auto& f : filtered) {
        mean_pc += f.phase_coherence.empty() ? 1.0 : f.phase_coherence[pix];
        mean_looks += f.effective_looks.empty() ? 1.0 : f.effective_looks[pix];
    }
    mean_pc /= static_cast<double>(filtered.size());
    mean_looks /= static_cast<double>(filtered.size());
    // few-look alignment estimates are biased high; require significance at
    // the 5% level for the available look count on top of the fixed floor
    double gate = params.min_coherence;
    if (mean_looks > 1.0)
        gate = std::max(gate, std::sqrt(1.0 - std::pow(0.05, 1.0 / (mean_looks - 1.0))));
    if (mean_pc < gate) {
        out = ScattererSet{};
        return;
    }

    Eigen::VectorXcd g = measurement_vector(filtered, pix);
    NoiseModel noise = estimate_noise_power(filtered, pix);

    ReflectivityProfile prof;
    if (params.strategy == InversionStrategy::CS) {
        CsOptions opts;
        opts.lambda_frac = params.lambda_frac;
        prof = cs_invert(g, sensing, grid, opts).profile;
        routed_cs = true;
    } else {
        prof = svd.invert(g, noise);
        if (params.strategy == InversionStrategy::TwoStage &&
            significant_peaks(prof, params.route_peak_factor) > 1) {
            CsOptions opts;
            opts.lambda_frac = params.lambda_frac;
            prof = cs_invert(g, sensing, grid, opts).profile;
            routed_cs = true;
        }
    }

    auto peaks = extract_peaks(prof, kMaxModelOrder);
    std::vector<ModelFit> fits;
    int k_hi = std::min<int>(kMaxModelOrder, static_cast<int>(peaks.size()));
    for (int k = 0; k <= k_hi; ++k)
        fits.push_back(fit_k(g, sensing, peaks, k, params.criterion));
    out = select_order(fits).second;

    // insignificant secondary components are overfits; demote to one scatterer
    if (out.scatterers.size() == 2) {
        double a0 = out.scatterers[0].amplitude, a1 = out.scatterers[1].amplitude;
        if (std::min(a0, a1) < params.min_secondary_ratio * std::max(a0, a1)) {
            if (a1 > a0) std::swap(out.scatterers[0], out.scatterers[1]);
            out.scatterers.resize(1);
            out.model_order = 1;
        }
    }
}

}  // namespace

InversionOutput invert_filtered(const std::vector<FilteredInterferogram>& filtered,
                                const AcquisitionGeometry& geom, const PipelineParams& params,
                                bool parallel) {
    if (filtered.empty())
        throw std::invalid_argument("invert_filtered: no filtered planes");
    if (filtered.size() != geom.n_acquisitions())
        throw std::invalid_argument("invert_filtered: stack/geometry count mismatch");
    const std::size_t width = filtered.front().width;
    const std::size_t height = filtered.front().height;
    const auto count = width * height;

    double rho = rayleigh_resolution(geom);
    ElevationGrid grid = ElevationGrid::uniform(params.grid_lo_frac * rho,
                                                params.grid_hi_frac * rho,
                                                params.grid_step_frac * rho);
    SensingMatrix sensing = build_sensing_matrix(geom, grid);
    SvdInverter svd(sensing, grid);

    std::vector<ScattererSet> sets(count);
    std::vector<std::uint8_t> cs_flags(count, 0);

    if (parallel) {
#pragma omp parallel for schedule(dynamic, 32)
        for (long i = 0; i < static_cast<long>(count); ++i) {
            bool routed = false;
            process_pixel(static_cast<std::size_t>(i), filtered, sensing, grid, svd, params,
                          sets[static_cast<std::size_t>(i)], routed);
            cs_flags[static_cast<std::size_t>(i)] = routed ? 1 : 0;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            bool routed = false;
            process_pixel(i, filtered, sensing, grid, svd, params, sets[i], routed);
            cs_flags[i] = routed ? 1 : 0;
        }
    }

    InversionOutput out;
    out.k_map.resize(count);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            auto i = r * width + c;
            out.k_map[i] = static_cast<std::int8_t>(sets[i].model_order);
            out.n_cs_pixels += cs_flags[i];
            if (!sets[i].empty()) out.detections.push_back({r, c, sets[i]});
        }
    }
    return out;
}

namespace {

PipelineResult run_impl(const InterferometricStack& stack, const AcquisitionGeometry& geom,
                        const PipelineParams& params, bool parallel) {
    stack.validate();
    geom.validate();
    if (stack.n_acquisitions() != geom.n_acquisitions())
        throw std::invalid_argument("pipeline: stack/geometry acquisition count mismatch");

    std::vector<FilteredInterferogram> filtered =
        params.skip_filter ? identity_filter(stack)
        : parallel         ? filter_stack(stack, params.filter)
                           : filter_stack_serial(stack, params.filter);

    InversionOutput inv = invert_filtered(filtered, geom, params, parallel);

    const auto count = stack.n_pixels();
    std::vector<ScattererSet> sets(count);
    for (const auto& d : inv.detections) sets[stack.idx(d.row, d.col)] = d.set;

    PipelineResult res;
    res.k_map = std::move(inv.k_map);
    res.n_cs_pixels = inv.n_cs_pixels;

    // robust smoothing of the primary-layer elevation over a pixel disk
    std::vector<double> primary(count, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < count; ++i)
        if (!sets[i].empty()) primary[i] = sets[i].scatterers.front().elevation_m;
    std::vector<double> fused = primary;
    const int rad = params.fusion_radius_px;
    if (rad > 0) {
        const long w = static_cast<long>(stack.width), h = static_cast<long>(stack.height);
#pragma omp parallel for schedule(static) if (parallel)
        for (long r = 0; r < h; ++r) {
            for (long c = 0; c < w; ++c) {
                auto i = static_cast<std::size_t>(r * w + c);
                if (std::isnan(primary[i])) continue;
                std::vector<double> hood;
                for (long dr = -rad; dr <= rad; ++dr) {
                    for (long dc = -rad; dc <= rad; ++dc) {
                        if (dr * dr + dc * dc > rad * rad) continue;
                        long rr = r + dr, cc = c + dc;
                        if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
                        double v = primary[static_cast<std::size_t>(rr * w + cc)];
                        if (!std::isnan(v)) hood.push_back(v);
                    }
                }
                if (hood.size() < 2) continue;
                // edge-preserving: IRLS anchored at the pixel's own estimate
                // with a fixed elevation scale, so a minority mode (small roof
                // against surrounding ground) is not pulled to the majority
                double est = primary[i];
                auto robust_weight = [&](double rr) {
                    double x = rr / params.fusion_scale_m;
                    return params.fusion.weight_family == WeightFamily::Tukey
                               ? tukey_weight(x, params.fusion.c_r)
                               : tdist_weight(x, params.fusion.tdist_nu);
                };
                for (int it = 0; it < params.fusion.max_irls_iters; ++it) {
                    double sw = 0.0, swx = 0.0;
                    for (double v : hood) {
                        double wt = robust_weight(v - est);
                        sw += wt;
                        swx += wt * v;
                    }
                    if (sw <= 0.0) break;
                    double next = swx / sw;
                    bool done = std::abs(next - est) < 1e-6;
                    est = next;
                    if (done) break;
                }
                fused[i] = est;
            }
        }
    }

    std::vector<RadarSample> samples;
    for (std::size_t r = 0; r < stack.height; ++r) {
        for (std::size_t c = 0; c < stack.width; ++c) {
            auto i = stack.idx(r, c);
            const auto& set = sets[i];
            if (set.empty()) continue;
            for (std::size_t q = 0; q < set.scatterers.size(); ++q) {
                RadarSample s;
                s.azimuth_m = static_cast<double>(r) * stack.az_spacing_m;
                s.slant_range_m = static_cast<double>(c) * stack.rg_spacing_m;
                s.elevation_m = q == 0 ? fused[i] : set.scatterers[q].elevation_m;
                s.amplitude = set.scatterers[q].amplitude;
                if (set.model_order == 2) {
                    bool is_upper = set.scatterers[q].elevation_m >=
                                    (q == 0 ? set.scatterers[1] : set.scatterers[0]).elevation_m;
                    s.layer = is_upper ? LayerTag::Top : LayerTag::Bottom;
                } else {
                    s.layer = LayerTag::Other;
                }
                samples.push_back(s);
            }
            res.detections.push_back({r, c, set});
        }
    }
    res.cloud = geocode(samples, geom, params.anchor);
    return res;
}

}  // namespace

PipelineResult run_pipeline(const InterferometricStack& stack, const AcquisitionGeometry& geom,
                            const PipelineParams& params) {
    return run_impl(stack, geom, params, true);
}

PipelineResult run_pipeline_serial(const InterferometricStack& stack,
                                   const AcquisitionGeometry& geom,
                                   const PipelineParams& params) {
    return run_impl(stack, geom, params, false);
}

}  // namespace tomo
