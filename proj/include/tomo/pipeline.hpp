#pragma once

#include <string>
#include <vector>

#include "tomo/fusion.hpp"
#include "tomo/geo.hpp"
#include "tomo/inversion.hpp"
#include "tomo/model_select.hpp"
#include "tomo/nl_filter.hpp"
#include "tomo/stack.hpp"

namespace tomo {

enum class InversionStrategy { SVD, CS, TwoStage };

InversionStrategy strategy_from_string(const std::string& name);

struct PipelineParams {
    FilterParams filter;
    bool skip_filter = false;
    InversionStrategy strategy = InversionStrategy::TwoStage;
    double lambda_frac = 0.15;
    double grid_lo_frac = -1.5;       // grid span in Rayleigh units
    double grid_hi_frac = 3.0;
    double grid_step_frac = 1.0 / 25.0;
    Criterion criterion = Criterion::BIC;
    double route_peak_factor = 3.0;   // SVD peak >= factor * median -> CS
    FusionParams fusion;
    int fusion_radius_px = 3;         // robust smoothing of the primary layer
    double fusion_scale_m = 1.0;      // elevation scale of the smoothing weights
    MapAnchor anchor;
    double min_coherence = 0.3;       // pixels below are dropped
    double min_secondary_ratio = 0.25;  // weaker-of-two significance gate
};

struct PixelDetection {
    std::size_t row = 0;
    std::size_t col = 0;
    ScattererSet set;
};

struct InversionOutput {
    std::vector<PixelDetection> detections;
    std::vector<std::int8_t> k_map;  // per-pixel model order, row-major
    std::size_t n_cs_pixels = 0;
};

/// Spectral inversion + model selection over all pixels of a filtered stack.
InversionOutput invert_filtered(const std::vector<FilteredInterferogram>& filtered,
                                const AcquisitionGeometry& geom, const PipelineParams& params,
                                bool parallel = true);

struct PipelineResult {
    std::vector<PixelDetection> detections;
    std::vector<std::int8_t> k_map;  // per-pixel model order, row-major
    TomoPointCloud cloud;
    std::size_t n_cs_pixels = 0;     // routed to the L1 stage
};

/// filter -> invert -> model-select -> fuse -> geocode chain on one stack.
PipelineResult run_pipeline(const InterferometricStack& stack,
                            const AcquisitionGeometry& geom, const PipelineParams& params);

/// Serial reference for the OpenMP inversion loop inside run_pipeline.
PipelineResult run_pipeline_serial(const InterferometricStack& stack,
                                   const AcquisitionGeometry& geom,
                                   const PipelineParams& params);

}  // namespace tomo
