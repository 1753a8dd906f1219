#pragma once

#include <span>
#include <string>
#include <vector>

#include "lattassoc/lattice.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc {

enum class LocalKind { LocalMoran, LocalMoranBiv, LocalMoranPartial };

std::string to_string(LocalKind kind);

// Per-site local Moran values. Island sites carry value 0 and are flagged in
// island_mask; consumers report them as not available.
struct LocalAssocMap {
    LocalKind kind = LocalKind::LocalMoran;
    std::vector<double> values;
    std::vector<bool> island_mask;
    std::vector<double> expected;  // -sum_j w_ij / (n - 1)
};

// Centred fields feeding the local statistic:
//   I_a = coeff_a * sum_b w_ab lagged_b,
//   coeff_a = (xi_a - mean_i) / m2_i,  m2_i = sum_k (xi_k - mean_i)^2 / (n - 1),
//   lagged_b = xj_b - mean_j.
struct LocalTerms {
    std::vector<double> coeff;
    std::vector<double> lagged;
};

LocalTerms local_terms(std::span<const double> xi, std::span<const double> xj);

LocalAssocMap local_moran(std::span<const double> x, const WeightMatrix& w);
LocalAssocMap local_moran_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w);
LocalAssocMap local_moran_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                                  std::span<const std::string> given, const WeightMatrix& w);

}  // namespace lattassoc
