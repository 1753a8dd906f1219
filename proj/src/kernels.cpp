#include "lattassoc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lattassoc/rng.hpp"

namespace lattassoc::kernels {

double pairwise_sum(std::span<const double> values) {
    constexpr std::size_t block = 32;
    if (values.size() <= block) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

bool at_least_as_extreme(double replicate, double observed, double centre, Extremeness e) noexcept {
    const double scale = std::max({std::abs(replicate), std::abs(observed), std::abs(centre)});
    const double slack = tie_tolerance * scale;
    switch (e) {
        case Extremeness::Greater: return replicate >= observed - slack;
        case Extremeness::Less: return replicate <= observed + slack;
        case Extremeness::TwoSided: break;
    }
    return std::abs(replicate - centre) >= std::abs(observed - centre) - slack;
}

double conditional_centre(const ConditionalPermutationInput& in, double lagged_total, std::size_t site) {
    if (in.extremeness != Extremeness::TwoSided) return 0.0;
    double row = 0.0;
    for (std::size_t e = in.w.row_ptr[site]; e < in.w.row_ptr[site + 1]; ++e) row += in.w.vals[e];
    const double others = (lagged_total - in.lagged[site]) / static_cast<double>(in.w.n - 1);
    return in.coeff[site] * row * others;
}

namespace {

// One site of the conditional permutation kernel; shared verbatim by the
// serial and parallel drivers so both produce identical counts.
SiteCount permute_site(const ConditionalPermutationInput& in, double lagged_total, std::size_t site,
                       std::vector<std::size_t>& pool, std::vector<double>& reps) {
    const std::size_t begin = in.w.row_ptr[site];
    const std::size_t end = in.w.row_ptr[site + 1];
    const std::size_t degree = end - begin;
    if (degree == 0) return {0, true};

    const std::size_t n = in.w.n;
    pool.clear();
    for (std::size_t j = 0; j < n; ++j) {
        if (j != site) pool.push_back(j);
    }

    double observed_lag = 0.0;
    for (std::size_t e = begin; e < end; ++e) observed_lag += in.w.vals[e] * in.lagged[in.w.cols[e]];
    const double coeff = in.coeff[site];
    const double observed = coeff * observed_lag;

    RandomStream rng(in.seed, site);
    reps.resize(in.replicates);
    const std::size_t available = pool.size();
    for (std::size_t r = 0; r < in.replicates; ++r) {
        double lag = 0.0;
        for (std::size_t t = 0; t < degree; ++t) {
            const std::size_t pick = t + static_cast<std::size_t>(rng.below(available - t));
            std::swap(pool[t], pool[pick]);
            lag += in.w.vals[begin + t] * in.lagged[pool[t]];
        }
        reps[r] = coeff * lag;
    }

    const double centre = conditional_centre(in, lagged_total, site);
    std::size_t extreme = 0;
    for (double v : reps) {
        if (at_least_as_extreme(v, observed, centre, in.extremeness)) ++extreme;
    }
    return {extreme, false};
}

}  // namespace

namespace serial {

void spatial_lag(const CsrView& w, std::span<const double> x, std::span<double> out) {
    for (std::size_t i = 0; i < w.n; ++i) {
        double s = 0.0;
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) s += w.vals[e] * x[w.cols[e]];
        out[i] = s;
    }
}

double cross_sum(const CsrView& w, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) s += w.vals[e] * a[i] * b[w.cols[e]];
    }
    return s;
}

double squared_difference_sum(const CsrView& w, std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.n; ++i) {
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) {
            const double d = a[i] - b[w.cols[e]];
            s += w.vals[e] * d * d;
        }
    }
    return s;
}

void conditional_permutation(const ConditionalPermutationInput& in, std::span<SiteCount> out) {
    std::vector<std::size_t> pool;
    std::vector<double> reps;
    const double total = pairwise_sum(in.lagged);
    for (std::size_t i = 0; i < in.w.n; ++i) out[i] = permute_site(in, total, i, pool, reps);
}

}  // namespace serial

namespace parallel {

void spatial_lag(const CsrView& w, std::span<const double> x, std::span<double> out) {
    const auto n = static_cast<std::ptrdiff_t>(w.n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) s += w.vals[e] * x[w.cols[e]];
        out[i] = s;
    }
}

double cross_sum(const CsrView& w, std::span<const double> a, std::span<const double> b) {
    std::vector<double> rows(w.n);
    const auto n = static_cast<std::ptrdiff_t>(w.n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) s += w.vals[e] * b[w.cols[e]];
        rows[i] = a[i] * s;
    }
    return pairwise_sum(rows);
}

double squared_difference_sum(const CsrView& w, std::span<const double> a, std::span<const double> b) {
    std::vector<double> rows(w.n);
    const auto n = static_cast<std::ptrdiff_t>(w.n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t e = w.row_ptr[i]; e < w.row_ptr[i + 1]; ++e) {
            const double d = a[i] - b[w.cols[e]];
            s += w.vals[e] * d * d;
        }
        rows[i] = s;
    }
    return pairwise_sum(rows);
}

void conditional_permutation(const ConditionalPermutationInput& in, std::span<SiteCount> out) {
    const auto n = static_cast<std::ptrdiff_t>(in.w.n);
    const double total = pairwise_sum(in.lagged);
#pragma omp parallel
    {
        std::vector<std::size_t> pool;
        std::vector<double> reps;
#pragma omp for schedule(dynamic, 8)
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            out[i] = permute_site(in, total, static_cast<std::size_t>(i), pool, reps);
        }
    }
}

}  // namespace parallel

}  // namespace lattassoc::kernels
