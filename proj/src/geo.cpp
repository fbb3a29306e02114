#include "tomo/geo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace tomo {

TomoPointCloud geocode(const std::vector<RadarSample>& samples,
                       const AcquisitionGeometry& geom, const MapAnchor& anchor) {
    geom.validate();
    double sin_th = std::sin(geom.incidence_rad);
    double ch = std::cos(anchor.heading_rad), sh = std::sin(anchor.heading_rad);
    TomoPointCloud cloud;
    cloud.points.reserve(samples.size());
    for (const auto& s : samples) {
        double ground_range = s.slant_range_m / sin_th;
        TomoPoint p;
        p.east = anchor.east + s.azimuth_m * sh + ground_range * ch;
        p.north = anchor.north + s.azimuth_m * ch - ground_range * sh;
        p.height = anchor.height + s.elevation_m * sin_th;
        p.amplitude = s.amplitude;
        p.layer = s.layer;
        cloud.points.push_back(p);
    }
    return cloud;
}

RadarSample geocode_inverse(const TomoPoint& point, const AcquisitionGeometry& geom,
                            const MapAnchor& anchor) {
    double sin_th = std::sin(geom.incidence_rad);
    double ch = std::cos(anchor.heading_rad), sh = std::sin(anchor.heading_rad);
    double de = point.east - anchor.east, dn = point.north - anchor.north;
    RadarSample s;
    s.azimuth_m = de * sh + dn * ch;
    s.slant_range_m = (de * ch - dn * sh) * sin_th;
    s.elevation_m = (point.height - anchor.height) / sin_th;
    s.amplitude = point.amplitude;
    s.layer = point.layer;
    return s;
}

RasterGrid sobel_edges(const RasterGrid& grid) {
    if (grid.width < 3 || grid.height < 3)
        throw std::invalid_argument("sobel_edges: grid must be at least 3x3");
    bool any_valid = std::any_of(grid.valid.begin(), grid.valid.end(),
                                 [](std::uint8_t v) { return v != 0; });
    if (!any_valid)
        throw std::invalid_argument("sobel_edges: all cells masked");

    static const double kx[3][3] = {{-1, 0, 1}, {-2, 0, 2}, {-1, 0, 1}};
    RasterGrid out = grid;
    std::fill(out.value.begin(), out.value.end(), std::numeric_limits<double>::quiet_NaN());
    std::fill(out.valid.begin(), out.valid.end(), 0);

    for (std::size_t r = 1; r + 1 < grid.height; ++r) {
        for (std::size_t c = 1; c + 1 < grid.width; ++c) {
            double gx = 0.0, gy = 0.0;
            bool ok = true;
            for (int dr = -1; dr <= 1 && ok; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    auto i = grid.idx(r + static_cast<std::size_t>(dr + 1) - 1,
                                      c + static_cast<std::size_t>(dc + 1) - 1);
                    if (!grid.valid[i]) { ok = false; break; }
                    gx += kx[dr + 1][dc + 1] * grid.value[i];
                    gy += kx[dc + 1][dr + 1] * grid.value[i];
                }
            }
            if (ok) {
                out.value[out.idx(r, c)] = std::hypot(gx, gy);
                out.valid[out.idx(r, c)] = 1;
            }
        }
    }
    return out;
}

namespace {

/// Normalized correlation of two edge images at an integer cell offset of
/// the moving grid; NaN when the overlap is too small.
double ncc_at(const RasterGrid& mov, const RasterGrid& ref, int di, int dj) {
    double sm = 0.0, sr = 0.0, smm = 0.0, srr = 0.0, smr = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < ref.height; ++r) {
        long mr = static_cast<long>(r) - di;
        if (mr < 0 || mr >= static_cast<long>(mov.height)) continue;
        for (std::size_t c = 0; c < ref.width; ++c) {
            long mc = static_cast<long>(c) - dj;
            if (mc < 0 || mc >= static_cast<long>(mov.width)) continue;
            auto ir = ref.idx(r, c);
            auto im = mov.idx(static_cast<std::size_t>(mr), static_cast<std::size_t>(mc));
            if (!ref.valid[ir] || !mov.valid[im]) continue;
            double a = mov.value[im], b = ref.value[ir];
            sm += a; sr += b; smm += a * a; srr += b * b; smr += a * b;
            ++n;
        }
    }
    if (n < 16) return std::numeric_limits<double>::quiet_NaN();
    double nn = static_cast<double>(n);
    double cov = smr - sm * sr / nn;
    double va = smm - sm * sm / nn;
    double vb = srr - sr * sr / nn;
    if (va <= 0.0 || vb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
    return cov / std::sqrt(va * vb);
}

double parabolic_offset(double ym, double y0, double yp) {
    double denom = ym - 2.0 * y0 + yp;
    if (denom >= 0.0) return 0.0;
    return std::clamp(0.5 * (ym - yp) / denom, -0.5, 0.5);
}

std::vector<double> height_histogram(const RasterGrid& g, double lo, double bin,
                                     std::size_t nbins) {
    std::vector<double> h(nbins, 0.0);
    for (std::size_t i = 0; i < g.value.size(); ++i) {
        if (!g.valid[i]) continue;
        auto b = static_cast<long>(std::floor((g.value[i] - lo) / bin));
        if (b >= 0 && b < static_cast<long>(nbins)) h[static_cast<std::size_t>(b)] += 1.0;
    }
    return h;
}

}  // namespace

CoarseAlignment coarse_align(const RasterGrid& moving, const RasterGrid& reference,
                             int max_shift_cells) {
    if (moving.cell_size != reference.cell_size)
        throw std::invalid_argument("coarse_align: cell sizes differ");
    RasterGrid em = sobel_edges(moving);
    RasterGrid er = sobel_edges(reference);

    int max_shift = max_shift_cells > 0
                        ? max_shift_cells
                        : static_cast<int>(std::min(moving.width, moving.height)) / 4;

    CoarseAlignment out;
    double best = -2.0;
    int bi = 0, bj = 0;
    for (int di = -max_shift; di <= max_shift; ++di) {
        for (int dj = -max_shift; dj <= max_shift; ++dj) {
            double c = ncc_at(em, er, di, dj);
            if (std::isfinite(c) && c > best) { best = c; bi = di; bj = dj; }
        }
    }
    if (best <= -2.0)
        throw std::runtime_error("coarse_align: no overlapping extent in search range");

    double ri = bi, rj = bj;
    if (std::abs(bi) < max_shift) {
        double ym = ncc_at(em, er, bi - 1, bj), yp = ncc_at(em, er, bi + 1, bj);
        if (std::isfinite(ym) && std::isfinite(yp)) ri += parabolic_offset(ym, best, yp);
    }
    if (std::abs(bj) < max_shift) {
        double ym = ncc_at(em, er, bi, bj - 1), yp = ncc_at(em, er, bi, bj + 1);
        if (std::isfinite(ym) && std::isfinite(yp)) rj += parabolic_offset(ym, best, yp);
    }
    // grid offset plus origin difference gives the map-frame shift
    out.shift_east = rj * reference.cell_size + (reference.origin_east - moving.origin_east);
    out.shift_north = ri * reference.cell_size + (reference.origin_north - moving.origin_north);
    out.peak_correlation = best;
    out.low_confidence = best < 0.2;

    // vertical: cross-correlation of 0.5 m height histograms
    const double bin = 0.5;
    double lo = std::numeric_limits<double>::max(), hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < moving.value.size(); ++i)
        if (moving.valid[i]) { lo = std::min(lo, moving.value[i]); hi = std::max(hi, moving.value[i]); }
    for (std::size_t i = 0; i < reference.value.size(); ++i)
        if (reference.valid[i]) { lo = std::min(lo, reference.value[i]); hi = std::max(hi, reference.value[i]); }
    if (lo > hi) throw std::runtime_error("coarse_align: no valid heights");
    auto nbins = static_cast<std::size_t>(std::ceil((hi - lo) / bin)) + 1;
    auto hm = height_histogram(moving, lo, bin, nbins);
    auto hr = height_histogram(reference, lo, bin, nbins);

    long span = static_cast<long>(nbins) - 1;
    double hbest = -std::numeric_limits<double>::max();
    long hshift = 0;
    std::vector<double> corr(static_cast<std::size_t>(2 * span + 1), 0.0);
    for (long d = -span; d <= span; ++d) {
        double c = 0.0;
        for (long b = 0; b < static_cast<long>(nbins); ++b) {
            long mb = b - d;  // reference bin b matches moving bin b - d
            if (mb < 0 || mb >= static_cast<long>(nbins)) continue;
            c += hr[static_cast<std::size_t>(b)] * hm[static_cast<std::size_t>(mb)];
        }
        corr[static_cast<std::size_t>(d + span)] = c;
        if (c > hbest) { hbest = c; hshift = d; }
    }
    double href = static_cast<double>(hshift);
    if (hshift > -span && hshift < span) {
        double ym = corr[static_cast<std::size_t>(hshift - 1 + span)];
        double yp = corr[static_cast<std::size_t>(hshift + 1 + span)];
        href += parabolic_offset(-ym, -hbest, -yp) * -1.0;
    }
    out.shift_height = href * bin;
    return out;
}

namespace {

/// Uniform-grid spatial index for nearest-neighbor queries.
class GridIndex {
public:
    explicit GridIndex(const std::vector<Eigen::Vector3d>& pts) : pts_(pts) {
        Eigen::Vector3d lo = pts[0], hi = pts[0];
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        lo_ = lo;
        double vol = std::max((hi - lo).prod(), 1e-9);
        cell_ = std::max(std::cbrt(vol / static_cast<double>(pts.size())), 1e-6);
        for (std::size_t i = 0; i < pts.size(); ++i)
            cells_[key(pts[i])].push_back(i);
    }

    std::size_t nearest(const Eigen::Vector3d& q) const {
        Eigen::Vector3i c = coords(q);
        std::size_t best = 0;
        double best_d2 = std::numeric_limits<double>::max();
        for (int ring = 0; ring < 64; ++ring) {
            bool found_any = false;
            for (int dx = -ring; dx <= ring; ++dx) {
                for (int dy = -ring; dy <= ring; ++dy) {
                    for (int dz = -ring; dz <= ring; ++dz) {
                        if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != ring)
                            continue;
                        auto it = cells_.find(pack(c.x() + dx, c.y() + dy, c.z() + dz));
                        if (it == cells_.end()) continue;
                        found_any = true;
                        for (std::size_t i : it->second) {
                            double d2 = (pts_[i] - q).squaredNorm();
                            if (d2 < best_d2) { best_d2 = d2; best = i; }
                        }
                    }
                }
            }
            // one extra ring after the first hit guarantees the true nearest
            if (found_any && best_d2 <= static_cast<double>(ring) * cell_ *
                                            static_cast<double>(ring) * cell_)
                break;
            if (ring == 63 && best_d2 == std::numeric_limits<double>::max()) {
                // sparse fallback
                for (std::size_t i = 0; i < pts_.size(); ++i) {
                    double d2 = (pts_[i] - q).squaredNorm();
                    if (d2 < best_d2) { best_d2 = d2; best = i; }
                }
            }
        }
        return best;
    }

private:
    Eigen::Vector3i coords(const Eigen::Vector3d& p) const {
        return {static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)),
                static_cast<int>(std::floor((p.y() - lo_.y()) / cell_)),
                static_cast<int>(std::floor((p.z() - lo_.z()) / cell_))};
    }
    static long long pack(int x, int y, int z) {
        return (static_cast<long long>(x) & 0x1fffff) |
               ((static_cast<long long>(y) & 0x1fffff) << 21) |
               ((static_cast<long long>(z) & 0x1fffff) << 42);
    }
    long long key(const Eigen::Vector3d& p) const {
        auto c = coords(p);
        return pack(c.x(), c.y(), c.z());
    }

    const std::vector<Eigen::Vector3d>& pts_;
    Eigen::Vector3d lo_;
    double cell_ = 1.0;
    std::unordered_map<long long, std::vector<std::size_t>> cells_;
};

}  // namespace

IcpResult icp_align(const TomoPointCloud& moving, const TomoPointCloud& reference,
                    const RigidTransform& init) {
    if (moving.points.empty() || reference.points.empty())
        throw std::invalid_argument("icp_align: empty point cloud");

    std::vector<Eigen::Vector3d> ref_pts;
    ref_pts.reserve(reference.points.size());
    for (const auto& p : reference.points)
        ref_pts.emplace_back(p.east, p.north, p.height);
    GridIndex index(ref_pts);

    std::vector<Eigen::Vector3d> mov_pts;
    mov_pts.reserve(moving.points.size());
    for (const auto& p : moving.points)
        mov_pts.emplace_back(p.east, p.north, p.height);

    IcpResult res;
    res.transform = init;
    double prev_rms = std::numeric_limits<double>::max();

    for (int it = 0; it < 50; ++it) {
        std::vector<Eigen::Vector3d> src, dst;
        std::vector<double> dists;
        src.reserve(mov_pts.size());
        for (const auto& p : mov_pts) {
            Eigen::Vector3d q = res.transform.apply(p);
            const Eigen::Vector3d& r = ref_pts[index.nearest(q)];
            src.push_back(p);
            dst.push_back(r);
            dists.push_back((q - r).norm());
        }
        std::vector<double> sorted = dists;
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2),
                         sorted.end());
        double cutoff = 3.0 * std::max(sorted[sorted.size() / 2], 1e-12);

        Eigen::Vector3d cm = Eigen::Vector3d::Zero(), cr = Eigen::Vector3d::Zero();
        std::size_t n = 0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (dists[i] > cutoff) continue;
            cm += src[i];
            cr += dst[i];
            ++n;
        }
        if (n < 3) break;
        cm /= static_cast<double>(n);
        cr /= static_cast<double>(n);

        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (dists[i] > cutoff) continue;
            cov += (src[i] - cm) * (dst[i] - cr).transpose();
        }
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::Vector3d sv = svd.singularValues();
        bool degenerate = sv(1) < 1e-9 * std::max(sv(0), 1e-300);
        if (degenerate) {
            res.translation_only = true;
            res.transform.rotation = Eigen::Matrix3d::Identity();
            res.transform.translation = cr - cm;
        } else {
            Eigen::Matrix3d u = svd.matrixU(), v = svd.matrixV();
            Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
            d(2, 2) = (v * u.transpose()).determinant() < 0.0 ? -1.0 : 1.0;
            res.transform.rotation = v * d * u.transpose();
            res.transform.translation = cr - res.transform.rotation * cm;
        }

        double ss = 0.0;
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (dists[i] > cutoff) continue;
            ss += (res.transform.apply(src[i]) - dst[i]).squaredNorm();
        }
        res.rms = std::sqrt(ss / static_cast<double>(n));
        res.iterations = it + 1;
        if (prev_rms - res.rms < 1e-4) break;
        prev_rms = res.rms;
    }
    return res;
}

bool point_in_polygon(double east, double north, const Polygon& poly) {
    bool inside = false;
    const auto& r = poly.ring;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        double xi = r[i].first, yi = r[i].second;
        double xj = r[j].first, yj = r[j].second;
        if ((yi > north) != (yj > north) &&
            east < (xj - xi) * (north - yi) / (yj - yi) + xi)
            inside = !inside;
    }
    return inside;
}

double distance_to_polygon(double east, double north, const Polygon& poly) {
    double best = std::numeric_limits<double>::max();
    const auto& r = poly.ring;
    for (std::size_t i = 0, j = r.size() - 1; i < r.size(); j = i++) {
        double ax = r[j].first, ay = r[j].second;
        double bx = r[i].first, by = r[i].second;
        double vx = bx - ax, vy = by - ay;
        double len2 = vx * vx + vy * vy;
        double t = len2 > 0.0
                       ? std::clamp(((east - ax) * vx + (north - ay) * vy) / len2, 0.0, 1.0)
                       : 0.0;
        double dx = east - (ax + t * vx), dy = north - (ay + t * vy);
        best = std::min(best, std::hypot(dx, dy));
    }
    return best;
}

RasterizeResult rasterize(const TomoPointCloud& cloud, const std::vector<Polygon>& footprints,
                          double cell_size, const FusionParams& fusion,
                          double ring_width_cells) {
    if (cell_size <= 0.0)
        throw std::invalid_argument("rasterize: cell size must be positive");
    if (cloud.points.empty())
        throw std::invalid_argument("rasterize: empty cloud");

    double e0 = cloud.points[0].east, n0 = cloud.points[0].north;
    double e1 = e0, n1 = n0;
    for (const auto& p : cloud.points) {
        e0 = std::min(e0, p.east); e1 = std::max(e1, p.east);
        n0 = std::min(n0, p.north); n1 = std::max(n1, p.north);
    }

    RasterizeResult out;
    out.grid.origin_east = e0;
    out.grid.origin_north = n0;
    out.grid.cell_size = cell_size;
    out.grid.width = static_cast<std::size_t>(std::floor((e1 - e0) / cell_size)) + 1;
    out.grid.height = static_cast<std::size_t>(std::floor((n1 - n0) / cell_size)) + 1;
    auto count = out.grid.width * out.grid.height;
    out.grid.value.assign(count, std::numeric_limits<double>::quiet_NaN());
    out.grid.valid.assign(count, 0);

    std::vector<std::vector<double>> bins(count);
    for (const auto& p : cloud.points) {
        auto col = static_cast<std::size_t>(std::floor((p.east - e0) / cell_size));
        auto row = static_cast<std::size_t>(std::floor((p.north - n0) / cell_size));
        col = std::min(col, out.grid.width - 1);
        row = std::min(row, out.grid.height - 1);
        bins[out.grid.idx(row, col)].push_back(p.height);
    }
    for (std::size_t i = 0; i < count; ++i) {
        if (bins[i].empty()) continue;
        out.grid.value[i] = fuse(bins[i], fusion);
        out.grid.valid[i] = 1;
    }

    double ring_dist = ring_width_cells * cell_size;
    for (const auto& poly : footprints) {
        PolygonSamples s;
        s.id = poly.id;
        s.reference_height = poly.reference_height;
        for (const auto& p : cloud.points) {
            if (point_in_polygon(p.east, p.north, poly))
                s.top.push_back(p.height);
            else if (distance_to_polygon(p.east, p.north, poly) <= ring_dist)
                s.bottom.push_back(p.height);
        }
        if (s.top.empty()) {
            ++out.excluded_polygons;
            continue;
        }
        out.polygons.push_back(std::move(s));
    }
    return out;
}

namespace {

LayerStats layer_stats(const std::vector<double>& v) {
    LayerStats s;
    s.count = v.size();
    if (v.empty()) return s;
    s.min = *std::min_element(v.begin(), v.end());
    s.max = *std::max_element(v.begin(), v.end());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    s.mean = mean;
    s.std = std::sqrt(ss / static_cast<double>(v.size()));
    std::vector<double> sorted = v;
    auto mid = sorted.begin() + static_cast<long>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    s.median = *mid;
    return s;
}

}  // namespace

StructureReport structure_stats(const std::vector<PolygonSamples>& samples) {
    StructureReport report;
    for (const auto& s : samples) {
        if (s.top.empty() || s.bottom.empty()) {
            ++report.skipped;
            continue;
        }
        StructureStats st;
        st.id = s.id;
        st.top = layer_stats(s.top);
        st.bottom = layer_stats(s.bottom);
        // medians: a minority of mislocated points near layover edges must
        // not drag the layer level
        st.relative_height = st.top.median - st.bottom.median;
        if (s.reference_height) {
            st.reference_relative_height = *s.reference_height;
            st.abs_height_difference = std::abs(st.relative_height - *s.reference_height);
        }
        report.structures.push_back(std::move(st));
    }
    return report;
}

CitywideSummary citywide_histogram(const std::vector<double>& diffs, double truncation) {
    if (truncation <= 0.0)
        throw std::invalid_argument("citywide_histogram: truncation must be positive");
    CitywideSummary s;
    s.truncation = truncation;
    s.n_total = diffs.size();
    auto nbins = static_cast<std::size_t>(std::ceil(2.0 * truncation / s.bin_width));
    s.counts.assign(nbins, 0);

    double sum = 0.0, sum2 = 0.0;
    std::size_t in1 = 0, in2 = 0;
    for (double d : diffs) {
        if (std::abs(d) > truncation) continue;
        ++s.n_retained;
        auto b = static_cast<std::size_t>(
            std::min(std::floor((d + truncation) / s.bin_width), static_cast<double>(nbins - 1)));
        ++s.counts[b];
        sum += d;
        sum2 += d * d;
        if (std::abs(d) <= 1.0) ++in1;
        if (std::abs(d) <= 2.0) ++in2;
    }
    if (s.n_retained > 0) {
        double n = static_cast<double>(s.n_retained);
        s.frac_within_1m = static_cast<double>(in1) / n;
        s.frac_within_2m = static_cast<double>(in2) / n;
        s.frac_within_trunc = 1.0;
        s.std_truncated = std::sqrt(std::max(sum2 / n - (sum / n) * (sum / n), 0.0));
    }
    return s;
}

}  // namespace tomo
