#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "tomo/fusion.hpp"
#include "tomo/geometry.hpp"

namespace tomo {

enum class LayerTag { Top, Bottom, Other };

struct TomoPoint {
    double east = 0.0;
    double north = 0.0;
    double height = 0.0;
    double amplitude = 0.0;
    LayerTag layer = LayerTag::Other;
};

struct TomoPointCloud {
    std::vector<TomoPoint> points;
};

struct RasterGrid {
    double origin_east = 0.0;
    double origin_north = 0.0;
    double cell_size = 1.0;
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> value;        // heights; masked cells hold NaN
    std::vector<std::uint8_t> valid;

    std::size_t idx(std::size_t row, std::size_t col) const { return row * width + col; }
};

/// Radar-geometry sample prior to geocoding: along-track and slant-range
/// offsets from the anchor pixel, plus the estimated elevation.
struct RadarSample {
    double azimuth_m = 0.0;
    double slant_range_m = 0.0;
    double elevation_m = 0.0;
    double amplitude = 0.0;
    LayerTag layer = LayerTag::Other;
};

/// External tie point: map location of the zero-offset radar sample plus the
/// along-track heading.
struct MapAnchor {
    double east = 0.0;
    double north = 0.0;
    double height = 0.0;
    double heading_rad = 0.0;
};

/// Local affine geocoding: along-track maps by heading, ground range is the
/// slant-range offset over sin(theta), height is s*sin(theta). Bijective.
TomoPointCloud geocode(const std::vector<RadarSample>& samples,
                       const AcquisitionGeometry& geom, const MapAnchor& anchor);
RadarSample geocode_inverse(const TomoPoint& point, const AcquisitionGeometry& geom,
                            const MapAnchor& anchor);

/// 3x3 Sobel gradient magnitude; cells whose kernel touches a masked cell or
/// the border come out masked.
RasterGrid sobel_edges(const RasterGrid& grid);

struct CoarseAlignment {
    double shift_east = 0.0;   // add to moving to align with reference
    double shift_north = 0.0;
    double shift_height = 0.0;
    double peak_correlation = 0.0;
    bool low_confidence = false;
};

/// Horizontal shift from normalized cross-correlation of Sobel edge images
/// (parabolic sub-cell refinement); vertical shift from cross-correlation of
/// 0.5 m height histograms.
CoarseAlignment coarse_align(const RasterGrid& moving, const RasterGrid& reference,
                             int max_shift_cells = 0);

struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

struct IcpResult {
    RigidTransform transform;
    double rms = 0.0;
    int iterations = 0;
    bool translation_only = false;  // degenerate geometry fallback
};

/// Point-to-point ICP with closed-form rigid updates; pairs beyond 3x the
/// median pair distance are rejected each iteration.
IcpResult icp_align(const TomoPointCloud& moving, const TomoPointCloud& reference,
                    const RigidTransform& init = {});

struct Polygon {
    std::string id;
    std::vector<std::pair<double, double>> ring;  // closed, (east, north)
    std::optional<double> reference_height;
};

bool point_in_polygon(double east, double north, const Polygon& poly);
double distance_to_polygon(double east, double north, const Polygon& poly);

struct PolygonSamples {
    std::string id;
    std::vector<double> top;     // heights inside the footprint
    std::vector<double> bottom;  // heights in the exterior ring
    std::optional<double> reference_height;
};

struct RasterizeResult {
    RasterGrid grid;
    std::vector<PolygonSamples> polygons;
    std::size_t excluded_polygons = 0;  // footprints with no interior points
};

/// Bins points to cells (cell value = robust fused height) and splits
/// per-polygon samples: inside -> top, exterior ring of ring_width cells ->
/// bottom.
RasterizeResult rasterize(const TomoPointCloud& cloud, const std::vector<Polygon>& footprints,
                          double cell_size, const FusionParams& fusion = {},
                          double ring_width_cells = 2.0);

struct LayerStats {
    double min = 0.0, max = 0.0, std = 0.0, mean = 0.0, median = 0.0;
    std::size_t count = 0;
};

struct StructureStats {
    std::string id;
    LayerStats top;
    LayerStats bottom;
    double relative_height = 0.0;  // median_top - median_bottom
    std::optional<double> reference_relative_height;
    std::optional<double> abs_height_difference;
};

struct StructureReport {
    std::vector<StructureStats> structures;
    std::size_t skipped = 0;  // structures missing a layer
};

StructureReport structure_stats(const std::vector<PolygonSamples>& samples);

struct CitywideSummary {
    double bin_width = 0.5;
    double truncation = 15.0;
    std::vector<std::size_t> counts;  // bins over [-truncation, truncation)
    double frac_within_1m = 0.0;      // of the retained set
    double frac_within_2m = 0.0;
    double frac_within_trunc = 0.0;   // of the retained set; retained/total is n_retained/n_total
    double std_truncated = 0.0;
    std::size_t n_retained = 0;
    std::size_t n_total = 0;
};

CitywideSummary citywide_histogram(const std::vector<double>& diffs, double truncation);

// CSV/JSON interchange
void save_point_cloud_csv(const TomoPointCloud& cloud, const std::string& path);
TomoPointCloud load_point_cloud_csv(const std::string& path);
std::vector<Polygon> load_footprints_json(const std::string& path);
void save_footprints_json(const std::vector<Polygon>& footprints, const std::string& path);
void save_structure_report_csv(const StructureReport& report, const std::string& path);
void save_citywide_summary_json(const CitywideSummary& summary, const std::string& path);

}  // namespace tomo
