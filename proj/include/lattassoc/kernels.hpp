#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace lattassoc::kernels {

// Read-only compressed-sparse-row view of a weight matrix.
struct CsrView {
    std::size_t n = 0;
    std::span<const std::size_t> row_ptr;  // n + 1 offsets
    std::span<const std::size_t> cols;
    std::span<const double> vals;
};

// Fixed-order pairwise summation; the result depends only on the input order.
double pairwise_sum(std::span<const double> values);

enum class Extremeness { TwoSided, Greater, Less };

// Per-site result of a conditional permutation run.
struct SiteCount {
    std::size_t extreme = 0;
    bool island = false;
};

// Inputs to the conditional (site-fixed) permutation kernel. For site i the
// observed statistic is coeff[i] * sum_j w_ij lagged[j]; replicates draw the
// neighbour values from lagged[] at the other n-1 sites without replacement.
struct ConditionalPermutationInput {
    CsrView w;
    std::span<const double> coeff;
    std::span<const double> lagged;
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    Extremeness extremeness = Extremeness::TwoSided;
};

// Single-threaded reference implementations, kept for testing and benchmarks.
namespace serial {

void spatial_lag(const CsrView& w, std::span<const double> x, std::span<double> out);
// sum_i sum_j w_ij a_i b_j
double cross_sum(const CsrView& w, std::span<const double> a, std::span<const double> b);
// sum_i sum_j w_ij (a_i - b_j)^2
double squared_difference_sum(const CsrView& w, std::span<const double> a, std::span<const double> b);
void conditional_permutation(const ConditionalPermutationInput& in, std::span<SiteCount> out);

}  // namespace serial

// OpenMP implementations. Reductions go through per-row partials and
// pairwise_sum, so results are bit-identical for any thread count.
namespace parallel {

void spatial_lag(const CsrView& w, std::span<const double> x, std::span<double> out);
double cross_sum(const CsrView& w, std::span<const double> a, std::span<const double> b);
double squared_difference_sum(const CsrView& w, std::span<const double> a, std::span<const double> b);
void conditional_permutation(const ConditionalPermutationInput& in, std::span<SiteCount> out);

}  // namespace parallel

// Relative slack when testing "at least as extreme"; absorbs summation-order
// rounding between values that are mathematically tied.
// Exact mean of the site's statistic over all arrangements of the other
// n-1 lagged values; two-sided extremeness is measured from here.
double conditional_centre(const ConditionalPermutationInput& in, double lagged_total, std::size_t site);

inline constexpr double tie_tolerance = 1e-12;

bool at_least_as_extreme(double replicate, double observed, double centre, Extremeness e) noexcept;

}  // namespace lattassoc::kernels
