// Timing comparison between the serial reference sweep and the OpenMP
// wavefront, plus a residual-audit sweep.  Run manually:
//   ./bench_goursat [n]
// where n is the per-axis node count (default 1200).

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hpnet/goursat.hpp"
#include "hpnet/net_analysis.hpp"
#include "hpnet/oracles.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace hpnet;
using clock_type = std::chrono::steady_clock;

static double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

int main(int argc, char** argv) {
    int n = argc > 1 ? std::atoi(argv[1]) : 1200;
    SpiralField f(SpiralParams::from_asymmetry(1.5));
    auto sys = NormalSystem::cps(2.0, 0.5);
    double L1 = 1.2, L2 = 0.9;
    Curve c1 = f.characteristic(1.0, 0.0, 1, L1, L1 / (n - 1));
    Curve c2 = f.characteristic(1.0, 0.0, 2, L2, L2 / (n - 1));
    InvariantPair corner = f.invariants({1.0, 0.0});

#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP\n");
#endif
    std::printf("grid %d x %d (%d nodes)\n", n, n, n * n);

    auto t0 = clock_type::now();
    CharGrid serial = solve_goursat_serial(sys, c1, c2, corner);
    double t_serial = ms_since(t0);
    std::printf("sweep serial:   %8.1f ms\n", t_serial);

    t0 = clock_type::now();
    CharGrid parallel = solve_goursat(sys, c1, c2, corner);
    double t_parallel = ms_since(t0);
    std::printf("sweep parallel: %8.1f ms   (x%.2f)\n", t_parallel, t_serial / t_parallel);

    bool identical = serial.zeta.size() == parallel.zeta.size();
    for (size_t i = 0; identical && i < serial.zeta.size(); ++i)
        identical = serial.zeta[i] == parallel.zeta[i];
    std::printf("results bitwise identical: %s\n", identical ? "yes" : "NO");

    // residual sweep over a grid of points: embarrassingly parallel
    const int pts = 4000;
    std::vector<double> res(pts);
    t0 = clock_type::now();
    for (int i = 0; i < pts; ++i) {
        cplx z = (1.0 + 0.8 * (i % 63) / 63.0) * unit_dir(-2.0 + 4.0 * i / pts);
        auto [r1, r2] = blowup_residual(f, z, 1e-3);
        res[i] = r1 + r2;
    }
    double t_audit_serial = ms_since(t0);
    std::printf("residual sweep serial:   %8.1f ms\n", t_audit_serial);

    std::vector<double> res2(pts);
    t0 = clock_type::now();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < pts; ++i) {
        cplx z = (1.0 + 0.8 * (i % 63) / 63.0) * unit_dir(-2.0 + 4.0 * i / pts);
        auto [r1, r2] = blowup_residual(f, z, 1e-3);
        res2[i] = r1 + r2;
    }
    double t_audit_parallel = ms_since(t0);
    std::printf("residual sweep parallel: %8.1f ms   (x%.2f)\n", t_audit_parallel,
                t_audit_serial / t_audit_parallel);

    double check = 0;
    for (int i = 0; i < pts; ++i) check += std::fabs(res[i] - res2[i]);
    std::printf("sweep agreement: %s\n", check == 0.0 ? "exact" : "DIFFERS");
    return identical && check == 0.0 ? 0 : 1;
}
