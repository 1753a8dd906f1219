#pragma once

#include <span>
#include <string>
#include <vector>

#include "lattassoc/lattice.hpp"

namespace lattassoc {

// Target pair (i, j) and the conditioning variables c.
struct ConditioningSet {
    std::string i;
    std::string j;
    std::vector<std::string> given;

    // i != j, neither in given, every name present in the table.
    void validate(const AttributeTable& table) const;
};

// X_{i|c}: the target with the linear effect of the given variables removed.
struct ConditionalField {
    std::string name;
    std::vector<double> values;
    double mean = 0.0;
    // Given variables skipped because they have zero variance.
    std::vector<std::string> dropped;
};

// Smallest/largest singular value ratio below which the design is rank deficient.
inline constexpr double rank_tolerance = 1e-10;

/// Residual of `target` after least-squares projection onto span{1, given}.
/// A residual whose norm is below 1e-10 of the centred target's norm is
/// returned as exact zeros (perfect fit).
std::vector<double> residualize(std::span<const double> target,
                                const std::vector<std::span<const double>>& given,
                                std::vector<std::size_t>* dropped = nullptr);

ConditionalField residualize(const AttributeTable& table, const std::string& target,
                             std::span<const std::string> given);

}  // namespace lattassoc
