#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lattassoc/lattice.hpp"
#include "lattassoc/weights.hpp"

namespace lattassoc {

enum class StatKind { MoranI, GearyC };
enum class Variant { Univariate, Bivariate, Partial, SemiPartial };

std::string to_string(StatKind kind);
std::string to_string(Variant variant);

struct AssocResult {
    double statistic = 0.0;
    StatKind kind = StatKind::MoranI;
    Variant variant = Variant::Univariate;
    std::optional<double> null_mean;
    std::optional<double> null_variance;  // >= 0 when present
    std::size_t n = 0;
    double s0 = 0.0;
    std::vector<std::string> vars;
    std::vector<std::string> given;
    std::optional<double> pseudo_p;
    std::size_t permutations = 0;
    // Conditioning variables skipped for zero variance.
    std::vector<std::string> dropped_given;
};

// Guard used by the recursion formulas: 1 - a^2 below this is degenerate.
inline constexpr double conditioning_guard = 1e-12;

// Value-only kernels shared by the result-building functions and the
// permutation engine. Both validate inputs and throw on degenerate data.
//
// moran_statistic:  sum w_ab (xi_a - mi)(xj_b - mj) / (s0 * sd_i * sd_j), sd with /n
// geary_statistic:  sum w_ab (xi_a - xj_b)^2 / (2 s0 * sd_i * sd_j),    sd with /(n-1)
double moran_statistic(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w);
double geary_statistic(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w);

AssocResult geary_c(std::span<const double> x, const WeightMatrix& w);
AssocResult moran_i(std::span<const double> x, const WeightMatrix& w);

/// Closed-form null variance of Moran's I:
///
///   [n^2 (n-1) S1 - n (n-1) S2 - 2 S0^2] / [(n+1) (n-1)^2 S0^2]
///
/// with S1 = 1/2 sum_{i!=j} (w_ij + w_ji)^2 and
/// S2 = sum_k (sum_j w_kj + sum_i w_ik)^2. Evaluated as written; it can go
/// negative for tiny dense graphs (K3 gives -1/4).
double moran_null_variance(const WeightMatrix& w, std::size_t n);

AssocResult geary_c_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w);
AssocResult moran_i_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w);

// (a_ij - a_ik a_jk) / (sqrt(1 - a_ik^2) sqrt(1 - a_jk^2))
double partial_from_bivariate(double a_ij, double a_ik, double a_jk);
// (a_ij - a_ik a_kj) / sqrt(1 - a_jk^2)
double semipartial_from_bivariate(double a_ij, double a_ik, double a_kj, double a_jk);

// Partial statistics on least-squares residuals X_{i|c}, X_{j|c}. The Geary
// variant adds each target's sample mean back onto its residual, because the
// bivariate C compares raw levels; with c empty both reduce to the bivariate
// statistic.
AssocResult geary_c_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                            std::span<const std::string> given, const WeightMatrix& w);
AssocResult moran_i_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                            std::span<const std::string> given, const WeightMatrix& w);

// Single-variable conditioning through the bivariate recursion.
AssocResult geary_c_partial_recursive(const AttributeTable& table, const std::string& i, const std::string& j,
                                      const std::string& k, const WeightMatrix& w);
AssocResult moran_i_partial_recursive(const AttributeTable& table, const std::string& i, const std::string& j,
                                      const std::string& k, const WeightMatrix& w);

AssocResult geary_c_semipartial(const AttributeTable& table, const std::string& i, const std::string& j,
                                const std::string& k, const WeightMatrix& w);
AssocResult moran_i_semipartial(const AttributeTable& table, const std::string& i, const std::string& j,
                                const std::string& k, const WeightMatrix& w);

}  // namespace lattassoc
