#include <chrono>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "aot/ensemble.h"

int main(int argc, char** argv) {
    CLI::App app{"timing comparison of the serial and parallel ensemble runners"};
    long long d = 2, paths = 40;
    std::vector<long long> N_list = {50, 100};
    std::uint64_t seed = 1;
    app.add_option("--d", d, "spatial dimension");
    app.add_option("--N-list", N_list, "comma-separated horizons")->delimiter(',');
    app.add_option("--paths", paths, "independent draws per horizon");
    app.add_option("--seed", seed, "base seed");
    CLI11_PARSE(app, argc, argv);

    aot::EnsembleConfig config;
    config.d = d;
    config.N_values.assign(N_list.begin(), N_list.end());
    config.paths = paths;
    config.base_seed = seed;

    const auto t0 = std::chrono::steady_clock::now();
    const auto serial = aot::run_ensemble_serial(config);
    const auto t1 = std::chrono::steady_clock::now();
    const auto parallel = aot::run_ensemble(config);
    const auto t2 = std::chrono::steady_clock::now();

    const double ts = std::chrono::duration<double>(t1 - t0).count();
    const double tp = std::chrono::duration<double>(t2 - t1).count();
    const bool identical = serial == parallel;
    std::printf("records      %zu per run\n", serial.size());
    std::printf("serial       %.3f s\n", ts);
    std::printf("parallel     %.3f s\n", tp);
    std::printf("speedup      %.2fx\n", tp > 0.0 ? ts / tp : 0.0);
    std::printf("identical    %s\n", identical ? "yes" : "no");
    return identical ? 0 : 1;
}
