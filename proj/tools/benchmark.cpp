// Timing comparison of the serial reference kernels against the OpenMP
// paths on a synthetic urban stack.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tomo/nl_filter.hpp"
#include "tomo/pipeline.hpp"
#include "tomo/scene.hpp"
#include "tomo/sim.hpp"

using clk = std::chrono::steady_clock;

static double seconds(clk::time_point a, clk::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

int main() {
    using namespace tomo;

#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (no OpenMP)\n");
#endif

    AcquisitionGeometry geom = munich_geometry();
    MapAnchor anchor{};
    CitySceneConfig scfg;
    scfg.width = 64;
    scfg.height = 48;
    scfg.n_buildings = 12;
    HeightScene scene = build_city_scene(scfg, geom, anchor);
    InterferometricStack stack = render_stack(scene, geom, 10.0, 42);

    FilterParams fp;
    fp.search_size = 15;
    // pre-calibrate so both timed paths share one bandwidth
    std::vector<IfgPlanes> planes;
    for (const auto& pair : stack.acquisitions)
        planes.push_back(make_planes(pair, stack.width, stack.height));
    fp.bandwidth = calibrate_bandwidth(planes, fp.patch_size, fp.gamma);

    auto t0 = clk::now();
    auto filt_serial = filter_stack_serial(stack, fp);
    auto t1 = clk::now();
    auto filt_par = filter_stack(stack, fp);
    auto t2 = clk::now();
    double fs = seconds(t0, t1), fpp = seconds(t1, t2);
    std::printf("filter   %4zux%-4zu serial %8.3f s  parallel %8.3f s  speedup %5.2fx\n",
                stack.width, stack.height, fs, fpp, fs / fpp);

    PipelineParams pp;
    pp.strategy = InversionStrategy::SVD;
    t0 = clk::now();
    auto inv_serial = invert_filtered(filt_serial, geom, pp, false);
    t1 = clk::now();
    auto inv_par = invert_filtered(filt_serial, geom, pp, true);
    t2 = clk::now();
    double is = seconds(t0, t1), ip = seconds(t1, t2);
    std::printf("invert   %4zux%-4zu serial %8.3f s  parallel %8.3f s  speedup %5.2fx\n",
                stack.width, stack.height, is, ip, is / ip);
    std::printf("detections: serial %zu, parallel %zu\n", inv_serial.detections.size(),
                inv_par.detections.size());
    return 0;
}
