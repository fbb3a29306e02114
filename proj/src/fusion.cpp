#include "tomo/fusion.hpp"

namespace tomo {

namespace {

double median_of(std::vector<double> v) {
    auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid), v.end());
    double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + static_cast<long>(mid) - 1, v.end());
    return 0.5 * (hi + v[mid - 1]);
}

}  // namespace

FusionResult m_estimate(const std::vector<double>& samples, const FusionParams& params) {
    if (samples.empty())
        throw std::invalid_argument("m_estimate: no samples");

    FusionResult res;
    double med = median_of(samples);
    if (samples.size() == 1) {
        res.value = samples.front();
        return res;
    }

    std::vector<double> absdev(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        absdev[i] = std::abs(samples[i] - med);
    double scale = 1.4826 * median_of(absdev);
    if (scale <= 0.0) {
        // more than half of the samples coincide; the median is exact
        res.value = med;
        return res;
    }

    auto weight = [&](double r) {
        double x = r / scale;
        return params.weight_family == WeightFamily::Tukey
                   ? tukey_weight(x, params.c_r)
                   : tdist_weight(x, params.tdist_nu);
    };

    double est = med;
    for (int it = 0; it < params.max_irls_iters; ++it) {
        double sw = 0.0, swx = 0.0;
        for (double s : samples) {
            double w = weight(s - est);
            sw += w;
            swx += w * s;
        }
        if (sw <= 0.0) {
            res.value = med;
            res.degenerate = true;
            res.iterations = it;
            return res;
        }
        double next = swx / sw;
        res.iterations = it + 1;
        if (std::abs(next - est) < 1e-6) {
            est = next;
            break;
        }
        est = next;
    }
    res.value = est;
    return res;
}

}  // namespace tomo
