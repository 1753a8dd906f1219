#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lattassoc/global_assoc.hpp"
#include "lattassoc/kernels.hpp"
#include "lattassoc/lattice.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc {

enum class PermutationScheme { Total, ConditionalOnSite };
using Alternative = kernels::Extremeness;

std::string to_string(Alternative alternative);

struct PermutationPlan {
    std::size_t replicates = 999;
    std::uint64_t seed = 0;
    PermutationScheme scheme = PermutationScheme::Total;
    Alternative alternative = Alternative::TwoSided;

    // replicates >= 19, the smallest count that resolves p = 0.05.
    void validate() const;
};

// (r + 1) / (M + 1)
inline double pseudo_p_value(std::size_t extreme, std::size_t replicates) {
    return static_cast<double>(extreme + 1) / static_cast<double>(replicates + 1);
}

struct VariableSelection {
    std::string i;
    std::string j;  // ignored by univariate statistics
    std::vector<std::string> given;
};

// ---------------------------------------------------------------------------
// Global inference

enum class GlobalStatistic { MoranI, GearyC, MoranIBiv, GearyCBiv, MoranIPartial, GearyCPartial };

using PairFunction = std::function<double(std::span<const double>, std::span<const double>)>;

struct PermutationDraws {
    double observed = 0.0;
    std::vector<double> replicates;
    std::size_t extreme = 0;
    double pseudo_p = 1.0;
};

/// Total permutation of `permuted`'s site labels while `fixed` keeps its
/// arrangement. With `univariate`, the statistic sees the permuted vector in
/// both slots. Replicate r uses stream (seed, r), so the result does not
/// depend on the thread count.
PermutationDraws permute_pair(const PairFunction& stat, std::span<const double> fixed,
                              std::span<const double> permuted, const PermutationPlan& plan, bool univariate);

// Observed statistic with null moments (where defined) plus pseudo_p.
AssocResult permute_global(GlobalStatistic stat, const AttributeTable& table, const VariableSelection& vars,
                           const WeightMatrix& w, const PermutationPlan& plan);

// ---------------------------------------------------------------------------
// Local inference

enum class LocalStatistic { LocalMoran, LocalMoranBiv, LocalMoranPartial };

struct LocalPermutation {
    std::vector<std::optional<double>> pseudo_p;  // nullopt at islands
    std::vector<std::size_t> extreme;
    std::size_t replicates = 0;
};

// Conditional permutation on prepared fields (xi held at the focal site,
// xj values of the other n - 1 sites redistributed).
LocalPermutation permute_local_fields(std::span<const double> xi, std::span<const double> xj,
                                      const WeightMatrix& w, const PermutationPlan& plan);

// Serial reference for the same computation; identical output.
LocalPermutation permute_local_fields_serial(std::span<const double> xi, std::span<const double> xj,
                                             const WeightMatrix& w, const PermutationPlan& plan);

LocalPermutation permute_local(LocalStatistic stat, const AttributeTable& table, const VariableSelection& vars,
                               const WeightMatrix& w, const PermutationPlan& plan);

// Every one of the (n-1)! conditional arrangements per site. n <= 10.
LocalPermutation permute_local_exhaustive(std::span<const double> xi, std::span<const double> xj,
                                          const WeightMatrix& w, Alternative alternative);

// Fields the local statistic is evaluated on (residuals for the partial case).
struct LocalFields {
    std::vector<double> xi;
    std::vector<double> xj;
};

LocalFields local_fields(LocalStatistic stat, const AttributeTable& table, const VariableSelection& vars);
LocalAssocMap local_map(LocalStatistic stat, const LocalFields& fields, const WeightMatrix& w);

// ---------------------------------------------------------------------------
// Significance maps

enum class Quadrant { HH, HL, LH, LL, NotSignificant, Island };

std::string to_string(Quadrant q);

struct SiteSignificance {
    double value = 0.0;
    double z_value = 0.0;
    double z_lag = 0.0;
    std::optional<double> pseudo_p;
    Quadrant quadrant = Quadrant::NotSignificant;
};

struct SignificanceMap {
    std::vector<SiteSignificance> sites;
    double alpha = 0.05;
    double cutoff = 0.05;  // effective p threshold (alpha, or the FDR cutoff)
};

struct QuadrantOptions {
    bool fdr = false;  // Benjamini-Hochberg cutoff instead of plain alpha
};

// Largest p_(k) with p_(k) <= k alpha / m; 0 when nothing passes.
double fdr_cutoff(std::span<const std::optional<double>> pseudo_p, double alpha);

/// Standardizes xi and the row-standardized spatial lag of standardized xj,
/// then classes each site with pseudo_p <= cutoff by the sign pair.
/// `local_values` fills SiteSignificance::value when given.
SignificanceMap classify_quadrants(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w,
                                   std::span<const std::optional<double>> pseudo_p, double alpha,
                                   std::span<const double> local_values = {}, QuadrantOptions options = {});

// Structural check of the class/sign/p invariants of a map.
bool is_consistent(const SignificanceMap& map);

}  // namespace lattassoc
