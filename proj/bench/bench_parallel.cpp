// Wall-clock comparison of the serial reference paths against the
// OpenMP-parallel epsilon sweep and coefficient search.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sleepwake/analysis.hpp"
#include "sleepwake/params.hpp"

using Clock = std::chrono::steady_clock;

static double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads = %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled; both lanes run serially\n");
#endif

    const sleepwake::ModelParameters params = sleepwake::default_parameters();

    {
        sleepwake::SweepOptions opt;
        opt.lo = 0.25;
        opt.hi = 0.40;
        opt.resolution = 0.001;

        auto t0 = Clock::now();
        const auto serial = sleepwake::epsilon_stability_sweep_serial(params, opt);
        const double ts = seconds_since(t0);

        t0 = Clock::now();
        const auto parallel = sleepwake::epsilon_stability_sweep(params, opt);
        const double tp = seconds_since(t0);

        std::printf("sweep   (%zu points): serial %.3fs  parallel %.3fs  speedup %.2fx\n",
                    serial.points.size(), ts, tp, ts / tp);
        if (serial.points.size() != parallel.points.size()) {
            std::printf("MISMATCH in sweep point counts\n");
            return 1;
        }
    }

    {
        sleepwake::SearchConstraints cons;
        cons.bounds = sleepwake::default_search_bounds();
        cons.seed = 424242;
        cons.max_iterations = 4096;
        cons.max_real_part = -1.0;  // unattainably strict: full budget runs

        cons.parallel = false;
        auto t0 = Clock::now();
        const auto serial = sleepwake::search_coefficients(cons);
        const double ts = seconds_since(t0);

        cons.parallel = true;
        t0 = Clock::now();
        const auto parallel = sleepwake::search_coefficients(cons);
        const double tp = seconds_since(t0);

        std::printf("search  (%d candidates): serial %.3fs  parallel %.3fs  speedup %.2fx\n",
                    cons.max_iterations, ts, tp, ts / tp);
        if (serial.best_max_real_part != parallel.best_max_real_part) {
            std::printf("MISMATCH in search results\n");
            return 1;
        }
    }
    return 0;
}
