// Command-line front end: each processing stage is a subcommand operating on
// files, so stages can be run and inspected independently.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "tomo/crlb.hpp"
#include "tomo/fusion.hpp"
#include "tomo/geo.hpp"
#include "tomo/geometry.hpp"
#include "tomo/inversion.hpp"
#include "tomo/model_select.hpp"
#include "tomo/nl_filter.hpp"
#include "tomo/pipeline.hpp"
#include "tomo/scene.hpp"
#include "tomo/sim.hpp"
#include "tomo/stack.hpp"
#include "tomo/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadConfig = 2;
constexpr int kExitStageFailure = 3;

/// Thrown when a stage past configuration fails; carries the stage name.
struct StageError : std::runtime_error {
    explicit StageError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "' failed: " + what) {}
};

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

/// Doubles destined for text output, rounded to 6 significant digits.
json jnum(double v) {
    if (!std::isfinite(v)) return json(v);  // serialized as null
    return json(std::stod(fmt6(v)));
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

void require_exists(const std::string& path, const char* what) {
    if (!fs::exists(path))
        throw std::invalid_argument(std::string(what) + " not found: " + path);
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    std::uint64_t seed) {
    json m;
    m["command"] = command;
    m["config"] = config;
    std::ostringstream hex;
    hex << std::hex << fnv1a(config.dump());
    m["config_hash"] = hex.str();
    m["seed"] = seed;
    std::ofstream(out_dir / "manifest.json") << m.dump(2) << "\n";
}

fs::path make_out_dir(const std::string& dir) {
    fs::create_directories(dir);
    return fs::path(dir);
}

void write_k_map(const fs::path& out_dir, const std::vector<std::int8_t>& k_map,
                 std::size_t width, std::size_t height) {
    std::ofstream bin(out_dir / "k_map.bin", std::ios::binary);
    bin.write(reinterpret_cast<const char*>(k_map.data()),
              static_cast<std::streamsize>(k_map.size()));
    json meta;
    meta["width"] = width;
    meta["height"] = height;
    meta["dtype"] = "int8";
    std::ofstream(out_dir / "k_map_meta.json") << meta.dump(2) << "\n";
}

void write_detections_csv(const fs::path& path, const std::vector<tomo::PixelDetection>& dets,
                          const tomo::AcquisitionGeometry& geom) {
    std::ofstream out(path);
    out << "row,col,k,elevation_m,height_m,amplitude,phase_rad\n";
    for (const auto& d : dets) {
        for (const auto& s : d.set.scatterers) {
            out << d.row << "," << d.col << "," << d.set.model_order << ","
                << fmt6(s.elevation_m) << ","
                << fmt6(tomo::elevation_to_height(s.elevation_m, geom.incidence_rad)) << ","
                << fmt6(s.amplitude) << "," << fmt6(s.phase_rad) << "\n";
        }
    }
}

// ---------------------------------------------------------------- crlb

struct CrlbArgs {
    std::string geometry;
    std::vector<double> snr_db{0, 3, 6, 10, 15, 20};
    std::vector<std::size_t> n_list;
    double kappa = 0.0;  // 0: single scatterer
    std::string out;
};

int cmd_crlb(const CrlbArgs& a) {
    require_exists(a.geometry, "geometry file");
    tomo::AcquisitionGeometry geom = tomo::load_geometry_json(a.geometry);
    std::vector<std::size_t> ns = a.n_list.empty()
                                      ? std::vector<std::size_t>{geom.n_acquisitions()}
                                      : a.n_list;
    double rho = tomo::rayleigh_resolution(geom);

    std::ostringstream csv;
    csv << "n,snr_db,kappa,c0,sigma_s_m,sigma_norm\n";
    for (std::size_t n : ns) {
        for (double snr : a.snr_db) {
            double single = tomo::crlb_single(geom, tomo::db_to_linear(snr), n);
            double c0 = a.kappa > 0.0 ? tomo::c0_approx(a.kappa) : 1.0;
            double sigma = c0 * single;
            csv << n << "," << fmt6(snr) << "," << fmt6(a.kappa) << "," << fmt6(c0) << ","
                << fmt6(sigma) << "," << fmt6(sigma / rho) << "\n";
        }
    }
    if (a.out.empty()) {
        std::cout << csv.str();
    } else {
        fs::path dir = make_out_dir(a.out);
        std::ofstream(dir / "crlb.csv") << csv.str();
        json cfg;
        cfg["geometry"] = a.geometry;
        cfg["snr_db"] = a.snr_db;
        cfg["n"] = ns;
        cfg["kappa"] = jnum(a.kappa);
        write_manifest(dir, "crlb", cfg, 0);
    }
    return kExitOk;
}

// ------------------------------------------------------------ simulate

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
    require_exists(config_path, "simulation config");
    json cfg;
    {
        std::ifstream in(config_path);
        try {
            cfg = json::parse(in);
        } catch (const json::exception& e) {
            throw std::invalid_argument(std::string("bad simulation config: ") + e.what());
        }
    }

    tomo::Estimator est;
    std::vector<std::size_t> n_list;
    std::vector<double> snr_list, kappa_list;
    tomo::SimulationConfig base;
    try {
        est = tomo::estimator_from_string(cfg.value("estimator", std::string("svd")));
        n_list = cfg.value("n_list", std::vector<std::size_t>{5});
        snr_list = cfg.value("snr_db_list", std::vector<double>{10.0});
        kappa_list = cfg.value("kappa_list", std::vector<double>{});
        base.n_realizations = cfg.value("n_realizations", std::size_t{1000});
        base.n_baseline_draws = cfg.value("n_baseline_draws", std::size_t{20});
        base.baseline_span_m = cfg.value("baseline_span_m", 187.18);
        base.rng_seed = cfg.value("seed", std::uint64_t{1});
        base.randomize_phases = cfg.value("randomize_phases", true);
        base.detection_window_frac = cfg.value("detection_window_frac", 0.5);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad simulation config: ") + e.what());
    }
    if (n_list.empty() || snr_list.empty())
        throw std::invalid_argument("simulation config: n_list and snr_db_list must be non-empty");
    if (kappa_list.empty()) kappa_list.push_back(0.0);  // single-scatterer cell

    tomo::AcquisitionGeometry geom = tomo::munich_geometry();
    if (cfg.contains("geometry")) {
        auto path = cfg["geometry"].get<std::string>();
        require_exists(path, "geometry file");
        geom = tomo::load_geometry_json(path);
    }
    // nominal resolution of the drawn baseline span, used to place the
    // second scatterer at kappa Rayleigh units
    double rho_span = geom.wavelength_m * geom.range_m / (2.0 * base.baseline_span_m);

    fs::path dir = make_out_dir(out_dir);
    std::ostringstream csv;
    csv << "n,snr_db,kappa,detection_rate,crlb_single_m,c0,crlb_m,"
           "bias1_m,std1_m,bias2_m,std2_m\n";

    for (std::size_t n : n_list) {
        for (double snr : snr_list) {
            for (double kappa : kappa_list) {
                tomo::SimulationConfig c = base;
                c.n_acquisitions = n;
                c.snr_db = snr;
                c.scatterers = {{0.0, 1.0, 0.0}};
                if (kappa > 0.0) c.scatterers.push_back({kappa * rho_span, 1.0, 0.0});

                tomo::MonteCarloResult r;
                try {
                    r = tomo::run_monte_carlo(c, est, geom);
                } catch (const std::invalid_argument&) {
                    throw;
                } catch (const std::exception& e) {
                    throw StageError("monte-carlo", e.what());
                }

                const auto& crlb = r.crlb_reference;
                csv << n << "," << fmt6(snr) << "," << fmt6(kappa) << ","
                    << fmt6(r.detection_rate) << "," << fmt6(crlb.sigma_s_single_m) << ","
                    << fmt6(crlb.correction_factor) << "," << fmt6(crlb.sigma_s_double_m) << ","
                    << fmt6(r.bias_m[0]) << "," << fmt6(r.std_m[0]) << ",";
                if (r.bias_m.size() > 1)
                    csv << fmt6(r.bias_m[1]) << "," << fmt6(r.std_m[1]);
                else
                    csv << "nan,nan";
                csv << "\n";
            }
        }
    }

    std::ofstream(dir / "simulation.csv") << csv.str();
    json echo = cfg;
    echo["estimator"] = cfg.value("estimator", std::string("svd"));
    write_manifest(dir, "simulate", echo, base.rng_seed);
    return kExitOk;
}

// -------------------------------------------------------------- filter

struct FilterArgs {
    std::string stack;
    std::string out;
    tomo::FilterParams params;
    bool serial = false;
};

int cmd_filter(const FilterArgs& a) {
    require_exists(a.stack, "stack directory");
    if (a.params.patch_size < 1 || a.params.patch_size % 2 == 0 || a.params.search_size < 1 ||
        a.params.search_size % 2 == 0)
        throw std::invalid_argument("filter: patch and search sizes must be odd and positive");

    tomo::InterferometricStack stack;
    try {
        stack = tomo::load_stack(a.stack);
    } catch (const std::exception& e) {
        throw StageError("load-stack", e.what());
    }

    std::vector<tomo::FilteredInterferogram> filtered;
    try {
        filtered = a.serial ? tomo::filter_stack_serial(stack, a.params)
                            : tomo::filter_stack(stack, a.params);
    } catch (const std::exception& e) {
        throw StageError("filter", e.what());
    }

    fs::path dir = make_out_dir(a.out);
    tomo::save_filtered(filtered, dir.string());
    json cfg;
    cfg["stack"] = a.stack;
    cfg["patch"] = a.params.patch_size;
    cfg["search"] = a.params.search_size;
    cfg["bandwidth"] = jnum(a.params.bandwidth);
    cfg["gamma"] = jnum(a.params.gamma);
    write_manifest(dir, "filter", cfg, 0);
    return kExitOk;
}

// -------------------------------------------------------------- invert

struct InvertArgs {
    std::string filtered;
    std::string geometry;
    std::string out;
    std::string estimator = "two-stage";
    std::string criterion = "bic";
    double lambda_frac = 0.15;
    std::vector<double> grid_span{-1.5, 3.0};  // in Rayleigh units
    double grid_step = 1.0 / 25.0;
    double min_coherence = 0.3;
    bool serial = false;
};

int cmd_invert(const InvertArgs& a) {
    require_exists(a.filtered, "filtered directory");
    require_exists(a.geometry, "geometry file");
    if (a.grid_span.size() != 2 || a.grid_span[1] <= a.grid_span[0])
        throw std::invalid_argument("invert: --grid-span needs lo hi with hi > lo");
    if (a.grid_step <= 0.0) throw std::invalid_argument("invert: --grid-step must be positive");

    tomo::PipelineParams p;
    p.strategy = tomo::strategy_from_string(a.estimator);
    p.criterion = tomo::criterion_from_string(a.criterion);
    p.lambda_frac = a.lambda_frac;
    p.grid_lo_frac = a.grid_span[0];
    p.grid_hi_frac = a.grid_span[1];
    p.grid_step_frac = a.grid_step;
    p.min_coherence = a.min_coherence;

    tomo::AcquisitionGeometry geom = tomo::load_geometry_json(a.geometry);
    std::vector<tomo::FilteredInterferogram> filtered;
    try {
        filtered = tomo::load_filtered(a.filtered);
    } catch (const std::exception& e) {
        throw StageError("load-filtered", e.what());
    }
    if (filtered.empty()) throw StageError("load-filtered", "no parameter planes");

    tomo::InversionOutput inv;
    try {
        inv = tomo::invert_filtered(filtered, geom, p, !a.serial);
    } catch (const std::exception& e) {
        throw StageError("invert", e.what());
    }

    fs::path dir = make_out_dir(a.out);
    write_detections_csv(dir / "detections.csv", inv.detections, geom);
    write_k_map(dir, inv.k_map, filtered.front().width, filtered.front().height);
    json cfg;
    cfg["filtered"] = a.filtered;
    cfg["geometry"] = a.geometry;
    cfg["estimator"] = a.estimator;
    cfg["criterion"] = a.criterion;
    cfg["lambda_frac"] = jnum(a.lambda_frac);
    cfg["grid_span"] = {jnum(a.grid_span[0]), jnum(a.grid_span[1])};
    cfg["grid_step"] = jnum(a.grid_step);
    cfg["min_coherence"] = jnum(a.min_coherence);
    write_manifest(dir, "invert", cfg, 0);
    return kExitOk;
}

// ---------------------------------------------------------------- fuse

struct FuseArgs {
    std::string samples;
    std::string out;
    std::string weight = "tukey";
    double cr = 4.685;
    int radius = 3;
    double nu = 3.0;
};

int cmd_fuse(const FuseArgs& a) {
    require_exists(a.samples, "sample file");
    tomo::FusionParams p;
    if (a.weight == "tukey")
        p.weight_family = tomo::WeightFamily::Tukey;
    else if (a.weight == "tdist")
        p.weight_family = tomo::WeightFamily::TDist;
    else
        throw std::invalid_argument("fuse: unknown weight family " + a.weight);
    if (a.cr <= 0.0) throw std::invalid_argument("fuse: --cr must be positive");
    p.c_r = a.cr;
    p.neighborhood_radius = a.radius;
    p.tdist_nu = a.nu;

    std::vector<double> samples;
    {
        std::ifstream in(a.samples);
        double v;
        while (in >> v) samples.push_back(v);
    }
    if (samples.empty()) throw std::invalid_argument("fuse: no samples in " + a.samples);

    tomo::FusionResult r;
    try {
        r = tomo::m_estimate(samples, p);
    } catch (const std::exception& e) {
        throw StageError("fuse", e.what());
    }

    fs::path dir = make_out_dir(a.out);
    json out;
    out["value"] = jnum(r.value);
    out["degenerate"] = r.degenerate;
    out["iterations"] = r.iterations;
    out["n_samples"] = samples.size();
    std::ofstream(dir / "fused.json") << out.dump(2) << "\n";
    json cfg;
    cfg["samples"] = a.samples;
    cfg["weight"] = a.weight;
    cfg["cr"] = jnum(a.cr);
    cfg["radius"] = a.radius;
    cfg["nu"] = jnum(a.nu);
    write_manifest(dir, "fuse", cfg, 0);
    return kExitOk;
}

// -------------------------------------------------------------- compare

struct CompareArgs {
    std::string cloud;
    std::string footprints;
    std::string reference;  // optional second point cloud
    std::string out;
    double truncate = 15.0;
    double cell_size = 2.0;
};

int cmd_compare(const CompareArgs& a) {
    require_exists(a.cloud, "point cloud");
    require_exists(a.footprints, "footprint file");
    if (!a.reference.empty()) require_exists(a.reference, "reference cloud");
    if (a.truncate <= 0.0 || a.cell_size <= 0.0)
        throw std::invalid_argument("compare: --truncate and --cell-size must be positive");

    tomo::TomoPointCloud cloud;
    std::vector<tomo::Polygon> footprints;
    try {
        cloud = tomo::load_point_cloud_csv(a.cloud);
        footprints = tomo::load_footprints_json(a.footprints);
    } catch (const std::exception& e) {
        throw StageError("load-inputs", e.what());
    }

    fs::path dir = make_out_dir(a.out);
    tomo::RasterizeResult ras;
    tomo::StructureReport report;
    try {
        ras = tomo::rasterize(cloud, footprints, a.cell_size);
        report = tomo::structure_stats(ras.polygons);
        tomo::save_structure_report_csv(report, (dir / "structures.csv").string());
    } catch (const std::exception& e) {
        throw StageError("structure-report", e.what());
    }

    // Height differences: raster cell deltas against a reference cloud when
    // given, otherwise per-structure relative heights against the footprint
    // reference values.
    std::vector<double> diffs;
    try {
        if (!a.reference.empty()) {
            tomo::TomoPointCloud ref = tomo::load_point_cloud_csv(a.reference);
            tomo::RasterizeResult ref_ras = tomo::rasterize(ref, {}, a.cell_size);
            const auto& g = ras.grid;
            const auto& rg = ref_ras.grid;
            for (std::size_t r = 0; r < g.height; ++r) {
                for (std::size_t c = 0; c < g.width; ++c) {
                    if (!g.valid[g.idx(r, c)]) continue;
                    double east = g.origin_east + (static_cast<double>(c) + 0.5) * g.cell_size;
                    double north = g.origin_north + (static_cast<double>(r) + 0.5) * g.cell_size;
                    auto rc = static_cast<long>(std::floor((north - rg.origin_north) / rg.cell_size));
                    auto cc = static_cast<long>(std::floor((east - rg.origin_east) / rg.cell_size));
                    if (rc < 0 || cc < 0 || rc >= static_cast<long>(rg.height) ||
                        cc >= static_cast<long>(rg.width))
                        continue;
                    auto j = rg.idx(static_cast<std::size_t>(rc), static_cast<std::size_t>(cc));
                    if (!rg.valid[j]) continue;
                    diffs.push_back(g.value[g.idx(r, c)] - rg.value[j]);
                }
            }
        } else {
            for (const auto& s : report.structures)
                if (s.reference_relative_height)
                    diffs.push_back(s.relative_height - *s.reference_relative_height);
        }
        tomo::CitywideSummary summary = tomo::citywide_histogram(diffs, a.truncate);
        tomo::save_citywide_summary_json(summary, (dir / "citywide.json").string());
    } catch (const std::exception& e) {
        throw StageError("citywide-summary", e.what());
    }

    json cfg;
    cfg["cloud"] = a.cloud;
    cfg["footprints"] = a.footprints;
    cfg["reference"] = a.reference;
    cfg["truncate"] = jnum(a.truncate);
    cfg["cell_size"] = jnum(a.cell_size);
    write_manifest(dir, "compare", cfg, 0);
    return kExitOk;
}

// ------------------------------------------------------------- pipeline

struct PipelineArgs {
    std::string stack;
    std::string geometry;
    std::string out;
    std::string estimator = "two-stage";
    std::string criterion = "bic";
    std::string weight = "tukey";
    std::string footprints;  // optional: also emit comparison reports
    tomo::FilterParams filter;
    bool skip_filter = false;
    bool serial = false;
    bool save_filtered = false;
    double lambda_frac = 0.15;
    double min_coherence = 0.3;
    double cr = 4.685;
    int fusion_radius = 3;
    double cell_size = 2.0;
    double truncate = 15.0;
    double anchor_east = 0.0, anchor_north = 0.0, anchor_height = 0.0, anchor_heading_deg = 0.0;
};

int cmd_pipeline(const PipelineArgs& a) {
    require_exists(a.stack, "stack directory");
    require_exists(a.geometry, "geometry file");
    if (!a.footprints.empty()) require_exists(a.footprints, "footprint file");

    tomo::PipelineParams p;
    p.filter = a.filter;
    p.skip_filter = a.skip_filter;
    p.strategy = tomo::strategy_from_string(a.estimator);
    p.criterion = tomo::criterion_from_string(a.criterion);
    p.lambda_frac = a.lambda_frac;
    p.min_coherence = a.min_coherence;
    p.fusion.weight_family =
        a.weight == "tdist" ? tomo::WeightFamily::TDist : tomo::WeightFamily::Tukey;
    if (a.weight != "tukey" && a.weight != "tdist")
        throw std::invalid_argument("pipeline: unknown weight family " + a.weight);
    p.fusion.c_r = a.cr;
    p.fusion_radius_px = a.fusion_radius;
    p.anchor = {a.anchor_east, a.anchor_north, a.anchor_height,
                a.anchor_heading_deg * M_PI / 180.0};

    tomo::AcquisitionGeometry geom = tomo::load_geometry_json(a.geometry);
    tomo::InterferometricStack stack;
    try {
        stack = tomo::load_stack(a.stack);
    } catch (const std::exception& e) {
        throw StageError("load-stack", e.what());
    }

    fs::path dir = make_out_dir(a.out);
    if (a.save_filtered && !a.skip_filter) {
        try {
            auto filtered = a.serial ? tomo::filter_stack_serial(stack, p.filter)
                                     : tomo::filter_stack(stack, p.filter);
            tomo::save_filtered(filtered, (dir / "filtered").string());
        } catch (const std::exception& e) {
            throw StageError("filter", e.what());
        }
    }

    tomo::PipelineResult res;
    try {
        res = a.serial ? tomo::run_pipeline_serial(stack, geom, p)
                       : tomo::run_pipeline(stack, geom, p);
    } catch (const std::invalid_argument&) {
        throw;  // configuration-level problem
    } catch (const std::exception& e) {
        throw StageError("pipeline", e.what());
    }

    tomo::save_point_cloud_csv(res.cloud, (dir / "cloud.csv").string());
    write_detections_csv(dir / "detections.csv", res.detections, geom);
    write_k_map(dir, res.k_map, stack.width, stack.height);

    if (!a.footprints.empty()) {
        try {
            auto footprints = tomo::load_footprints_json(a.footprints);
            auto ras = tomo::rasterize(res.cloud, footprints, a.cell_size, p.fusion);
            auto report = tomo::structure_stats(ras.polygons);
            tomo::save_structure_report_csv(report, (dir / "structures.csv").string());
            std::vector<double> diffs;
            for (const auto& s : report.structures)
                if (s.reference_relative_height)
                    diffs.push_back(s.relative_height - *s.reference_relative_height);
            auto summary = tomo::citywide_histogram(diffs, a.truncate);
            tomo::save_citywide_summary_json(summary, (dir / "citywide.json").string());
        } catch (const std::exception& e) {
            throw StageError("compare", e.what());
        }
    }

    json cfg;
    cfg["stack"] = a.stack;
    cfg["geometry"] = a.geometry;
    cfg["estimator"] = a.estimator;
    cfg["criterion"] = a.criterion;
    cfg["weight"] = a.weight;
    cfg["skip_filter"] = a.skip_filter;
    cfg["patch"] = a.filter.patch_size;
    cfg["search"] = a.filter.search_size;
    cfg["bandwidth"] = jnum(a.filter.bandwidth);
    cfg["gamma"] = jnum(a.filter.gamma);
    cfg["lambda_frac"] = jnum(a.lambda_frac);
    cfg["min_coherence"] = jnum(a.min_coherence);
    cfg["cr"] = jnum(a.cr);
    cfg["fusion_radius"] = a.fusion_radius;
    cfg["anchor"] = {jnum(a.anchor_east), jnum(a.anchor_north), jnum(a.anchor_height),
                     jnum(a.anchor_heading_deg)};
    write_manifest(dir, "pipeline", cfg, 0);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Small-stack SAR tomography toolchain"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "cap the worker thread count (0 = default)");

    CrlbArgs crlb;
    auto* c_crlb = app.add_subcommand("crlb", "elevation accuracy bounds as CSV");
    c_crlb->add_option("--geometry", crlb.geometry, "geometry JSON")->required();
    c_crlb->add_option("--snr-db", crlb.snr_db, "SNR sweep values in dB");
    c_crlb->add_option("--n", crlb.n_list, "acquisition counts (default: from geometry)");
    c_crlb->add_option("--kappa", crlb.kappa, "normalized double-scatterer distance (0 = single)");
    c_crlb->add_option("--out", crlb.out, "output directory (default: stdout)");

    std::string sim_config, sim_out;
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo accuracy sweep");
    c_sim->add_option("--config", sim_config, "SimulationConfig JSON")->required();
    c_sim->add_option("--out", sim_out, "output directory")->required();

    FilterArgs filt;
    auto* c_filt = app.add_subcommand("filter", "non-local interferogram filtering");
    c_filt->add_option("--stack", filt.stack, "stack directory")->required();
    c_filt->add_option("--out", filt.out, "output directory")->required();
    c_filt->add_option("--patch", filt.params.patch_size, "patch size (odd)");
    c_filt->add_option("--search", filt.params.search_size, "search window size (odd)");
    c_filt->add_option("--bandwidth", filt.params.bandwidth, "kernel bandwidth (0 = calibrate)");
    c_filt->add_option("--gamma", filt.params.gamma, "phase weight in the dissimilarity");
    c_filt->add_flag("--serial", filt.serial, "use the serial reference path");

    InvertArgs inv;
    auto* c_inv = app.add_subcommand("invert", "per-pixel tomographic inversion");
    c_inv->add_option("--filtered", inv.filtered, "filtered parameter directory")->required();
    c_inv->add_option("--geometry", inv.geometry, "geometry JSON")->required();
    c_inv->add_option("--out", inv.out, "output directory")->required();
    c_inv->add_option("--estimator", inv.estimator, "svd | cs | two-stage");
    c_inv->add_option("--criterion", inv.criterion, "bic | aic | mdl");
    c_inv->add_option("--lambda-frac", inv.lambda_frac, "L1 weight as fraction of max |R^H g|");
    c_inv->add_option("--grid-span", inv.grid_span, "grid extent in Rayleigh units (lo hi)")
        ->expected(2);
    c_inv->add_option("--grid-step", inv.grid_step, "grid step in Rayleigh units");
    c_inv->add_option("--min-coherence", inv.min_coherence, "coherence gate");
    c_inv->add_flag("--serial", inv.serial, "use the serial reference path");

    FuseArgs fuse;
    auto* c_fuse = app.add_subcommand("fuse", "robust fusion of height samples");
    c_fuse->add_option("--samples", fuse.samples, "text file, one value per line")->required();
    c_fuse->add_option("--out", fuse.out, "output directory")->required();
    c_fuse->add_option("--weight", fuse.weight, "tukey | tdist");
    c_fuse->add_option("--cr", fuse.cr, "clipping constant in robust-scale units");
    c_fuse->add_option("--radius", fuse.radius, "neighborhood radius (metadata)");
    c_fuse->add_option("--nu", fuse.nu, "t-distribution degrees of freedom");

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "point cloud vs footprints / reference");
    c_cmp->add_option("--cloud", cmp.cloud, "point cloud CSV")->required();
    c_cmp->add_option("--footprints", cmp.footprints, "footprint JSON")->required();
    c_cmp->add_option("--reference", cmp.reference, "reference point cloud CSV");
    c_cmp->add_option("--out", cmp.out, "output directory")->required();
    c_cmp->add_option("--truncate", cmp.truncate, "histogram truncation in m");
    c_cmp->add_option("--cell-size", cmp.cell_size, "raster cell size in m");

    PipelineArgs pipe;
    auto* c_pipe = app.add_subcommand("pipeline", "full filter-to-point-cloud chain");
    c_pipe->add_option("--stack", pipe.stack, "stack directory")->required();
    c_pipe->add_option("--geometry", pipe.geometry, "geometry JSON")->required();
    c_pipe->add_option("--out", pipe.out, "output directory")->required();
    c_pipe->add_option("--estimator", pipe.estimator, "svd | cs | two-stage");
    c_pipe->add_option("--criterion", pipe.criterion, "bic | aic | mdl");
    c_pipe->add_option("--weight", pipe.weight, "tukey | tdist");
    c_pipe->add_option("--patch", pipe.filter.patch_size, "filter patch size");
    c_pipe->add_option("--search", pipe.filter.search_size, "filter search size");
    c_pipe->add_option("--bandwidth", pipe.filter.bandwidth, "filter bandwidth (0 = calibrate)");
    c_pipe->add_option("--gamma", pipe.filter.gamma, "filter phase weight");
    c_pipe->add_flag("--skip-filter", pipe.skip_filter, "bypass the non-local filter");
    c_pipe->add_flag("--save-filtered", pipe.save_filtered, "persist filtered planes");
    c_pipe->add_flag("--serial", pipe.serial, "use the serial reference paths");
    c_pipe->add_option("--lambda-frac", pipe.lambda_frac, "L1 weight fraction");
    c_pipe->add_option("--min-coherence", pipe.min_coherence, "coherence gate");
    c_pipe->add_option("--cr", pipe.cr, "fusion clipping constant");
    c_pipe->add_option("--fusion-radius", pipe.fusion_radius, "fusion disk radius in px");
    c_pipe->add_option("--footprints", pipe.footprints, "footprint JSON for reports");
    c_pipe->add_option("--cell-size", pipe.cell_size, "report raster cell size in m");
    c_pipe->add_option("--truncate", pipe.truncate, "report histogram truncation in m");
    c_pipe->add_option("--anchor-east", pipe.anchor_east, "map east of pixel (0,0)");
    c_pipe->add_option("--anchor-north", pipe.anchor_north, "map north of pixel (0,0)");
    c_pipe->add_option("--anchor-height", pipe.anchor_height, "height datum of pixel (0,0)");
    c_pipe->add_option("--anchor-heading", pipe.anchor_heading_deg, "along-track heading in deg");

    // global flags may follow the subcommand name
    for (auto* sub : {c_crlb, c_sim, c_filt, c_inv, c_fuse, c_cmp, c_pipe})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadConfig;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (c_crlb->parsed()) return cmd_crlb(crlb);
        if (c_sim->parsed()) return cmd_simulate(sim_config, sim_out);
        if (c_filt->parsed()) return cmd_filter(filt);
        if (c_inv->parsed()) return cmd_invert(inv);
        if (c_fuse->parsed()) return cmd_fuse(fuse);
        if (c_cmp->parsed()) return cmd_compare(cmp);
        if (c_pipe->parsed()) return cmd_pipeline(pipe);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitBadConfig;
}
