#include "lattassoc/global_assoc.hpp"

#include <cmath>

#include "lattassoc/conditioning.hpp"
#include "lattassoc/error.hpp"
#include "lattassoc/kernels.hpp"

namespace lattassoc {

std::string to_string(StatKind kind) { return kind == StatKind::MoranI ? "moran" : "geary"; }

std::string to_string(Variant variant) {
    switch (variant) {
        case Variant::Univariate: return "uni";
        case Variant::Bivariate: return "biv";
        case Variant::Partial: return "partial";
        case Variant::SemiPartial: return "semipartial";
    }
    return "uni";
}

namespace {

struct Centred {
    std::vector<double> z;
    double mean = 0.0;
    double ss = 0.0;  // sum of squared deviations
};

Centred centre(std::span<const double> x) {
    const std::size_t n = x.size();
    Centred c;
    c.mean = kernels::pairwise_sum(x) / static_cast<double>(n);
    c.z.resize(n);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        c.z[i] = x[i] - c.mean;
        max_abs = std::max(max_abs, std::abs(x[i]));
    }
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = c.z[i] * c.z[i];
    c.ss = kernels::pairwise_sum(sq);
    if (c.ss <= 0.0 || std::sqrt(c.ss / static_cast<double>(n)) <= 1e-13 * max_abs) {
        throw Error(ErrorCode::ZeroVariance, "variable has zero sample variance");
    }
    return c;
}

double checked_s0(std::size_t len_i, std::size_t len_j, const WeightMatrix& w) {
    if (len_i != w.size() || len_j != w.size()) {
        throw Error(ErrorCode::LengthMismatch, "vector length does not match the " + std::to_string(w.size()) +
                                                   "-site weight matrix");
    }
    if (w.size() < 3) throw Error(ErrorCode::InvalidArgument, "global statistics need n >= 3");
    const double s0 = w.s0();
    if (!(s0 > 0.0)) throw Error(ErrorCode::EmptyWeights, "weight matrix has no entries (S0 = 0)");
    return s0;
}

AssocResult make_result(double value, StatKind kind, Variant variant, const WeightMatrix& w) {
    AssocResult r;
    r.statistic = value;
    r.kind = kind;
    r.variant = variant;
    r.n = w.size();
    r.s0 = w.s0();
    return r;
}

using PairStat = double (*)(std::span<const double>, std::span<const double>, const WeightMatrix&);

PairStat pair_stat(StatKind kind) { return kind == StatKind::MoranI ? &moran_statistic : &geary_statistic; }

AssocResult partial_impl(StatKind kind, const AttributeTable& table, const std::string& i, const std::string& j,
                         std::span<const std::string> given, const WeightMatrix& w) {
    ConditioningSet set{i, j, {given.begin(), given.end()}};
    set.validate(table);
    ConditionalField fi = residualize(table, i, given);
    ConditionalField fj = residualize(table, j, given);
    if (kind == StatKind::GearyC) {
        const double mi = kernels::pairwise_sum(table.variable(i)) / static_cast<double>(table.sites());
        const double mj = kernels::pairwise_sum(table.variable(j)) / static_cast<double>(table.sites());
        for (double& v : fi.values) v += mi;
        for (double& v : fj.values) v += mj;
    }
    AssocResult r = make_result(pair_stat(kind)(fi.values, fj.values, w), kind, Variant::Partial, w);
    r.vars = {i, j};
    r.given = set.given;
    r.dropped_given = fi.dropped;
    return r;
}

AssocResult recursion_impl(StatKind kind, bool semi, const AttributeTable& table, const std::string& i,
                           const std::string& j, const std::string& k, const WeightMatrix& w) {
    ConditioningSet set{i, j, {k}};
    set.validate(table);
    const auto& xi = table.variable(i);
    const auto& xj = table.variable(j);
    const auto& xk = table.variable(k);
    const PairStat stat = pair_stat(kind);
    const double a_ij = stat(xi, xj, w);
    const double a_ik = stat(xi, xk, w);
    const double a_jk = stat(xj, xk, w);
    double value;
    if (semi) {
        value = semipartial_from_bivariate(a_ij, a_ik, stat(xk, xj, w), a_jk);
    } else {
        value = partial_from_bivariate(a_ij, a_ik, a_jk);
    }
    AssocResult r = make_result(value, kind, semi ? Variant::SemiPartial : Variant::Partial, w);
    r.vars = {i, j};
    r.given = {k};
    return r;
}

}  // namespace

double moran_statistic(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w) {
    const double s0 = checked_s0(xi.size(), xj.size(), w);
    const Centred ci = centre(xi);
    const Centred cj = centre(xj);
    const double n = static_cast<double>(w.size());
    const double cross = kernels::parallel::cross_sum(w.view(), ci.z, cj.z);
    return cross / (s0 * (std::sqrt(ci.ss * cj.ss) / n));
}

double geary_statistic(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w) {
    const double s0 = checked_s0(xi.size(), xj.size(), w);
    const Centred ci = centre(xi);
    const Centred cj = centre(xj);
    const double n = static_cast<double>(w.size());
    const double diff = kernels::parallel::squared_difference_sum(w.view(), xi, xj);
    return diff / (2.0 * s0 * (std::sqrt(ci.ss * cj.ss) / (n - 1.0)));
}

AssocResult geary_c(std::span<const double> x, const WeightMatrix& w) {
    AssocResult r = make_result(geary_statistic(x, x, w), StatKind::GearyC, Variant::Univariate, w);
    r.null_mean = 1.0;
    return r;
}

AssocResult moran_i(std::span<const double> x, const WeightMatrix& w) {
    AssocResult r = make_result(moran_statistic(x, x, w), StatKind::MoranI, Variant::Univariate, w);
    r.null_mean = -1.0 / (static_cast<double>(r.n) - 1.0);
    const double variance = moran_null_variance(w, r.n);
    if (variance >= 0.0) r.null_variance = variance;
    return r;
}

double moran_null_variance(const WeightMatrix& w, std::size_t n) {
    if (n != w.size()) throw Error(ErrorCode::LengthMismatch, "n does not match the weight matrix");
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "Moran null variance needs n >= 3");
    const double s0 = w.s0();
    if (!(s0 > 0.0)) throw Error(ErrorCode::EmptyWeights, "weight matrix has no entries (S0 = 0)");

    std::vector<double> col_sums(n, 0.0);
    std::vector<double> s1_terms;
    s1_terms.reserve(w.nnz());
    for (std::size_t i = 0; i < n; ++i) {
        auto cols = w.neighbors(i);
        auto vals = w.row_weights(i);
        for (std::size_t e = 0; e < cols.size(); ++e) {
            col_sums[cols[e]] += vals[e];
            const double back = w.weight(cols[e], i);
            const double pair = vals[e] + back;
            // An entry without its transpose stands for both ordered pairs.
            s1_terms.push_back(back > 0.0 ? pair * pair : 2.0 * pair * pair);
        }
    }
    const double s1 = 0.5 * kernels::pairwise_sum(s1_terms);
    std::vector<double> s2_terms(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = w.row_sum(k) + col_sums[k];
        s2_terms[k] = t * t;
    }
    const double s2 = kernels::pairwise_sum(s2_terms);

    const double nn = static_cast<double>(n);
    const double numerator = nn * nn * (nn - 1.0) * s1 - nn * (nn - 1.0) * s2 - 2.0 * s0 * s0;
    const double denominator = (nn + 1.0) * (nn - 1.0) * (nn - 1.0) * s0 * s0;
    return numerator / denominator;
}

AssocResult geary_c_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w) {
    return make_result(geary_statistic(xi, xj, w), StatKind::GearyC, Variant::Bivariate, w);
}

AssocResult moran_i_biv(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w) {
    return make_result(moran_statistic(xi, xj, w), StatKind::MoranI, Variant::Bivariate, w);
}

double partial_from_bivariate(double a_ij, double a_ik, double a_jk) {
    const double gi = 1.0 - a_ik * a_ik;
    const double gj = 1.0 - a_jk * a_jk;
    if (gi < conditioning_guard || gj < conditioning_guard) {
        throw Error(ErrorCode::DegenerateConditioning, "partial recursion needs |a_ik| < 1 and |a_jk| < 1");
    }
    return (a_ij - a_ik * a_jk) / (std::sqrt(gi) * std::sqrt(gj));
}

double semipartial_from_bivariate(double a_ij, double a_ik, double a_kj, double a_jk) {
    const double gj = 1.0 - a_jk * a_jk;
    if (gj < conditioning_guard) {
        throw Error(ErrorCode::DegenerateConditioning, "semi-partial recursion needs |a_jk| < 1");
    }
    return (a_ij - a_ik * a_kj) / std::sqrt(gj);
}

AssocResult geary_c_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                            std::span<const std::string> given, const WeightMatrix& w) {
    return partial_impl(StatKind::GearyC, table, i, j, given, w);
}

AssocResult moran_i_partial(const AttributeTable& table, const std::string& i, const std::string& j,
                            std::span<const std::string> given, const WeightMatrix& w) {
    return partial_impl(StatKind::MoranI, table, i, j, given, w);
}

AssocResult geary_c_partial_recursive(const AttributeTable& table, const std::string& i, const std::string& j,
                                      const std::string& k, const WeightMatrix& w) {
    return recursion_impl(StatKind::GearyC, false, table, i, j, k, w);
}

AssocResult moran_i_partial_recursive(const AttributeTable& table, const std::string& i, const std::string& j,
                                      const std::string& k, const WeightMatrix& w) {
    return recursion_impl(StatKind::MoranI, false, table, i, j, k, w);
}

AssocResult geary_c_semipartial(const AttributeTable& table, const std::string& i, const std::string& j,
                                const std::string& k, const WeightMatrix& w) {
    return recursion_impl(StatKind::GearyC, true, table, i, j, k, w);
}

AssocResult moran_i_semipartial(const AttributeTable& table, const std::string& i, const std::string& j,
                                const std::string& k, const WeightMatrix& w) {
    return recursion_impl(StatKind::MoranI, true, table, i, j, k, w);
}

}  // namespace lattassoc
