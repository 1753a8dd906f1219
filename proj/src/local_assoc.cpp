#include "lattassoc/local_assoc.hpp"

#include <cmath>

#include "lattassoc/conditioning.hpp"
#include "lattassoc/error.hpp"
#include "lattassoc/kernels.hpp"

namespace lattassoc {

std::string to_string(LocalKind kind) {
    switch (kind) {
        case LocalKind::LocalMoran: return "local_moran";
        case LocalKind::LocalMoranBiv: return "local_moran_biv";
        case LocalKind::LocalMoranPartial: return "local_moran_partial";
    }
    return "local_moran";
}

namespace {

std::vector<double> deviations(std::span<const double> x, double& ss) {
    const std::size_t n = x.size();
    const double mean = kernels::pairwise_sum(x) / static_cast<double>(n);
    std::vector<double> z(n);
    std::vector<double> sq(n);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = x[i] - mean;
        sq[i] = z[i] * z[i];
        max_abs = std::max(max_abs, std::abs(x[i]));
    }
    ss = kernels::pairwise_sum(sq);
    if (ss <= 0.0 || std::sqrt(ss / static_cast<double>(n)) <= 1e-13 * max_abs) {
        throw Error(ErrorCode::ZeroVariance, "variable has zero sample variance");
    }
    return z;
}

LocalAssocMap assemble(LocalKind kind, std::span<const double> xi, std::span<const double> xj,
                       const WeightMatrix& w) {
    const std::size_t n = w.size();
    if (xi.size() != n || xj.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "vector length does not match the " + std::to_string(n) +
                                                   "-site weight matrix");
    }
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "local statistics need n >= 3");
    const LocalTerms terms = local_terms(xi, xj);

    LocalAssocMap map;
    map.kind = kind;
    map.values.resize(n);
    kernels::parallel::spatial_lag(w.view(), terms.lagged, map.values);
    map.island_mask.resize(n);
    map.expected.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        map.island_mask[a] = w.is_island(a);
        map.values[a] = map.island_mask[a] ? 0.0 : terms.coeff[a] * map.values[a];
        map.expected[a] = map.island_mask[a] ? 0.0 : -w.row_sum(a) / (static_cast<double>(n) - 1.0);
    }
    return map;
}

}  // namespace

LocalTerms local_terms(std::span<const double> xi, std::span<const double> xj) {
    if (xi.size() != xj.size()) throw Error(ErrorCode::LengthMismatch, "local statistic inputs differ in length");
    const double n = static_cast<double>(xi.size());
    double ss_i = 0.0;
    double ss_j = 0.0;
    LocalTerms t;
    t.coeff = deviations(xi, ss_i);
    t.lagged = deviations(xj, ss_j);
    const double m2 = ss_i / (n - 1.0);
    for (double& c : t.coeff) c /= m2;
    return t;
}

LocalAssocMap local_moran(std::span<const double> x, const WeightMatrix& w) {
    return assemble(LocalKind::LocalMoran, x, x, w);
}

LocalAssocMap local_moran_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w) {
    return assemble(LocalKind::LocalMoranBiv, xi, xj, w);
}

LocalAssocMap local_moran_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                                  std::span<const std::string> given, const WeightMatrix& w) {
    ConditioningSet set{i, j, {given.begin(), given.end()}};
    set.validate(table);
    const ConditionalField fi = residualize(table, i, given);
    const ConditionalField fj = residualize(table, j, given);
    return assemble(LocalKind::LocalMoranPartial, fi.values, fj.values, w);
}

}  // namespace lattassoc
