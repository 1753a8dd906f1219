// Serial reference kernels against their OpenMP counterparts on grid lattices.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "lattassoc/kernels.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/synthetic.hpp"
#include "lattassoc/weights.hpp"

namespace {

using namespace lattassoc;

struct Fixture {
    WeightMatrix w;
    std::vector<double> x;
    std::vector<double> y;
};

const Fixture& fixture(std::size_t side) {
    static std::vector<std::pair<std::size_t, Fixture>> cache;
    for (const auto& [s, f] : cache) {
        if (s == side) return f;
    }
    const Lattice lattice = grid_lattice(side, side);
    Fixture f;
    f.w = row_standardize(build_weights(lattice, NeighborSpec::queen()));
    f.x = gaussian_noise(lattice.size(), 1.0, 11, 0);
    f.y = gaussian_noise(lattice.size(), 1.0, 11, 1);
    cache.emplace_back(side, std::move(f));
    return cache.back().second;
}

template <bool Parallel>
void bm_spatial_lag(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(f.x.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::parallel::spatial_lag(f.w.view(), f.x, out);
        } else {
            kernels::serial::spatial_lag(f.w.view(), f.x, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void bm_cross_sum(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        double s = Parallel ? kernels::parallel::cross_sum(f.w.view(), f.x, f.y)
                            : kernels::serial::cross_sum(f.w.view(), f.x, f.y);
        benchmark::DoNotOptimize(s);
    }
}

template <bool Parallel>
void bm_conditional_permutation(benchmark::State& state) {
    const Fixture& f = fixture(static_cast<std::size_t>(state.range(0)));
    const LocalTerms terms = local_terms(f.x, f.y);
    kernels::ConditionalPermutationInput in{f.w.view(), terms.coeff, terms.lagged, 199, 5,
                                            kernels::Extremeness::TwoSided};
    std::vector<kernels::SiteCount> out(f.x.size());
    for (auto _ : state) {
        if constexpr (Parallel) {
            kernels::parallel::conditional_permutation(in, out);
        } else {
            kernels::serial::conditional_permutation(in, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(bm_spatial_lag<false>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(bm_spatial_lag<true>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(bm_cross_sum<false>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(bm_cross_sum<true>)->Arg(32)->Arg(128)->Arg(256);
BENCHMARK(bm_conditional_permutation<false>)->Arg(16)->Arg(48);
BENCHMARK(bm_conditional_permutation<true>)->Arg(16)->Arg(48);

BENCHMARK_MAIN();
