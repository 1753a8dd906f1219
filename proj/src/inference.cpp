#include "lattassoc/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lattassoc/conditioning.hpp"
#include "lattassoc/error.hpp"
#include "lattassoc/rng.hpp"

namespace lattassoc {

std::string to_string(Alternative alternative) {
    switch (alternative) {
        case Alternative::TwoSided: return "two-sided";
        case Alternative::Greater: return "greater";
        case Alternative::Less: return "less";
    }
    return "two-sided";
}

std::string to_string(Quadrant q) {
    switch (q) {
        case Quadrant::HH: return "HH";
        case Quadrant::HL: return "HL";
        case Quadrant::LH: return "LH";
        case Quadrant::LL: return "LL";
        case Quadrant::NotSignificant: return "NS";
        case Quadrant::Island: return "island";
    }
    return "NS";
}

void PermutationPlan::validate() const {
    if (replicates < 19) {
        throw Error(ErrorCode::InvalidArgument,
                    "permutation plans need at least 19 replicates (got " + std::to_string(replicates) + ")");
    }
}

namespace {

std::size_t count_extreme(std::span<const double> reps, double observed, Alternative alternative) {
    double centre = 0.0;
    if (alternative == Alternative::TwoSided) {
        centre = kernels::pairwise_sum(reps) / static_cast<double>(reps.size());
    }
    std::size_t r = 0;
    for (double v : reps) {
        if (kernels::at_least_as_extreme(v, observed, centre, alternative)) ++r;
    }
    return r;
}

std::vector<double> with_mean(std::vector<double> residual, std::span<const double> original) {
    const double mean = kernels::pairwise_sum(original) / static_cast<double>(original.size());
    for (double& v : residual) v += mean;
    return residual;
}

std::vector<double> residual_field(const AttributeTable& table, const VariableSelection& vars,
                                   const std::string& target) {
    return residualize(table, target, vars.given).values;
}

}  // namespace

PermutationDraws permute_pair(const PairFunction& stat, std::span<const double> fixed,
                              std::span<const double> permuted, const PermutationPlan& plan, bool univariate) {
    plan.validate();
    PermutationDraws draws;
    draws.observed = univariate ? stat(permuted, permuted) : stat(fixed, permuted);
    draws.replicates.resize(plan.replicates);

    // Shuffles start from the sorted values, so the replicate stream depends
    // only on the multiset of values and the seed, not on their arrangement.
    std::vector<double> start(permuted.begin(), permuted.end());
    std::sort(start.begin(), start.end());

    const auto m = static_cast<std::ptrdiff_t>(plan.replicates);
#pragma omp parallel
    {
        std::vector<double> buffer(start);
#pragma omp for schedule(static)
        for (std::ptrdiff_t r = 0; r < m; ++r) {
            std::copy(start.begin(), start.end(), buffer.begin());
            RandomStream rng(plan.seed, static_cast<std::uint64_t>(r));
            rng.shuffle(std::span<double>(buffer));
            draws.replicates[r] = univariate ? stat(buffer, buffer) : stat(fixed, buffer);
        }
    }
    draws.extreme = count_extreme(draws.replicates, draws.observed, plan.alternative);
    draws.pseudo_p = pseudo_p_value(draws.extreme, plan.replicates);
    return draws;
}

AssocResult permute_global(GlobalStatistic stat, const AttributeTable& table, const VariableSelection& vars,
                           const WeightMatrix& w, const PermutationPlan& plan) {
    if (plan.scheme != PermutationScheme::Total) {
        throw Error(ErrorCode::InvalidArgument, "global inference uses total permutation");
    }
    plan.validate();
    const PairFunction moran = [&w](std::span<const double> a, std::span<const double> b) {
        return moran_statistic(a, b, w);
    };
    const PairFunction geary = [&w](std::span<const double> a, std::span<const double> b) {
        return geary_statistic(a, b, w);
    };

    AssocResult result;
    PermutationDraws draws;
    switch (stat) {
        case GlobalStatistic::MoranI:
        case GlobalStatistic::GearyC: {
            const auto& x = table.variable(vars.i);
            const bool is_moran = stat == GlobalStatistic::MoranI;
            result = is_moran ? moran_i(x, w) : geary_c(x, w);
            result.vars = {vars.i};
            draws = permute_pair(is_moran ? moran : geary, x, x, plan, true);
            break;
        }
        case GlobalStatistic::MoranIBiv:
        case GlobalStatistic::GearyCBiv: {
            const auto& xi = table.variable(vars.i);
            const auto& xj = table.variable(vars.j);
            const bool is_moran = stat == GlobalStatistic::MoranIBiv;
            result = is_moran ? moran_i_biv(xi, xj, w) : geary_c_biv(xi, xj, w);
            result.vars = {vars.i, vars.j};
            draws = permute_pair(is_moran ? moran : geary, xi, xj, plan, false);
            break;
        }
        case GlobalStatistic::MoranIPartial:
        case GlobalStatistic::GearyCPartial: {
            const bool is_moran = stat == GlobalStatistic::MoranIPartial;
            result = is_moran ? moran_i_partial(table, vars.i, vars.j, vars.given, w)
                              : geary_c_partial(table, vars.i, vars.j, vars.given, w);
            std::vector<double> fi = residual_field(table, vars, vars.i);
            std::vector<double> fj = residual_field(table, vars, vars.j);
            if (!is_moran) {
                fi = with_mean(std::move(fi), table.variable(vars.i));
                fj = with_mean(std::move(fj), table.variable(vars.j));
            }
            draws = permute_pair(is_moran ? moran : geary, fi, fj, plan, false);
            break;
        }
    }
    result.pseudo_p = draws.pseudo_p;
    result.permutations = plan.replicates;
    return result;
}

namespace {

LocalPermutation run_conditional(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w,
                                 const PermutationPlan& plan, bool parallel) {
    plan.validate();
    if (plan.scheme != PermutationScheme::ConditionalOnSite) {
        throw Error(ErrorCode::InvalidArgument, "local inference uses conditional (site-fixed) permutation");
    }
    if (xi.size() != w.size() || xj.size() != w.size()) {
        throw Error(ErrorCode::LengthMismatch, "local inference inputs do not match the weight matrix");
    }
    const LocalTerms terms = local_terms(xi, xj);
    kernels::ConditionalPermutationInput in{w.view(), terms.coeff, terms.lagged, plan.replicates, plan.seed,
                                            plan.alternative};
    std::vector<kernels::SiteCount> counts(w.size());
    if (parallel) {
        kernels::parallel::conditional_permutation(in, counts);
    } else {
        kernels::serial::conditional_permutation(in, counts);
    }
    LocalPermutation out;
    out.replicates = plan.replicates;
    out.pseudo_p.resize(w.size());
    out.extreme.resize(w.size());
    for (std::size_t a = 0; a < w.size(); ++a) {
        out.extreme[a] = counts[a].extreme;
        if (!counts[a].island) out.pseudo_p[a] = pseudo_p_value(counts[a].extreme, plan.replicates);
    }
    return out;
}

}  // namespace

LocalPermutation permute_local_fields(std::span<const double> xi, std::span<const double> xj,
                                      const WeightMatrix& w, const PermutationPlan& plan) {
    return run_conditional(xi, xj, w, plan, true);
}

LocalPermutation permute_local_fields_serial(std::span<const double> xi, std::span<const double> xj,
                                             const WeightMatrix& w, const PermutationPlan& plan) {
    return run_conditional(xi, xj, w, plan, false);
}

LocalFields local_fields(LocalStatistic stat, const AttributeTable& table, const VariableSelection& vars) {
    switch (stat) {
        case LocalStatistic::LocalMoran: {
            const auto& x = table.variable(vars.i);
            return {{x.begin(), x.end()}, {x.begin(), x.end()}};
        }
        case LocalStatistic::LocalMoranBiv: {
            const auto& xi = table.variable(vars.i);
            const auto& xj = table.variable(vars.j);
            return {{xi.begin(), xi.end()}, {xj.begin(), xj.end()}};
        }
        case LocalStatistic::LocalMoranPartial: {
            ConditioningSet set{vars.i, vars.j, vars.given};
            set.validate(table);
            return {residual_field(table, vars, vars.i), residual_field(table, vars, vars.j)};
        }
    }
    return {};
}

LocalAssocMap local_map(LocalStatistic stat, const LocalFields& fields, const WeightMatrix& w) {
    LocalAssocMap map = local_moran_biv(fields.xi, fields.xj, w);
    switch (stat) {
        case LocalStatistic::LocalMoran: map.kind = LocalKind::LocalMoran; break;
        case LocalStatistic::LocalMoranBiv: map.kind = LocalKind::LocalMoranBiv; break;
        case LocalStatistic::LocalMoranPartial: map.kind = LocalKind::LocalMoranPartial; break;
    }
    return map;
}

LocalPermutation permute_local(LocalStatistic stat, const AttributeTable& table, const VariableSelection& vars,
                               const WeightMatrix& w, const PermutationPlan& plan) {
    const LocalFields fields = local_fields(stat, table, vars);
    return permute_local_fields(fields.xi, fields.xj, w, plan);
}

LocalPermutation permute_local_exhaustive(std::span<const double> xi, std::span<const double> xj,
                                          const WeightMatrix& w, Alternative alternative) {
    const std::size_t n = w.size();
    if (xi.size() != n || xj.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "local inference inputs do not match the weight matrix");
    }
    if (n > 10) throw Error(ErrorCode::InvalidArgument, "exhaustive conditional enumeration is limited to n <= 10");
    const LocalTerms terms = local_terms(xi, xj);

    std::size_t total = 1;
    for (std::size_t k = 2; k < n; ++k) total *= k;

    LocalPermutation out;
    out.replicates = total;
    out.pseudo_p.resize(n);
    out.extreme.assign(n, 0);
    const double lagged_total = kernels::pairwise_sum(terms.lagged);
    std::vector<double> reps;
    reps.reserve(total);
    for (std::size_t site = 0; site < n; ++site) {
        if (w.is_island(site)) continue;
        auto cols = w.neighbors(site);
        auto vals = w.row_weights(site);
        std::vector<double> pool;  // lagged values of the other sites, index order
        for (std::size_t b = 0; b < n; ++b) {
            if (b != site) pool.push_back(terms.lagged[b]);
        }
        auto position = [site](std::size_t b) { return b < site ? b : b - 1; };

        double observed_lag = 0.0;
        for (std::size_t e = 0; e < cols.size(); ++e) observed_lag += vals[e] * terms.lagged[cols[e]];
        const double observed = terms.coeff[site] * observed_lag;

        std::vector<std::size_t> perm(n - 1);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        reps.clear();
        do {
            double lag = 0.0;
            for (std::size_t e = 0; e < cols.size(); ++e) lag += vals[e] * pool[perm[position(cols[e])]];
            reps.push_back(terms.coeff[site] * lag);
        } while (std::next_permutation(perm.begin(), perm.end()));

        const kernels::ConditionalPermutationInput in{w.view(), terms.coeff, terms.lagged, total, 0, alternative};
        const double centre = kernels::conditional_centre(in, lagged_total, site);
        std::size_t extreme = 0;
        for (double v : reps) {
            if (kernels::at_least_as_extreme(v, observed, centre, alternative)) ++extreme;
        }
        out.extreme[site] = extreme;
        out.pseudo_p[site] = pseudo_p_value(out.extreme[site], total);
    }
    return out;
}

double fdr_cutoff(std::span<const std::optional<double>> pseudo_p, double alpha) {
    std::vector<double> p;
    for (const auto& v : pseudo_p) {
        if (v) p.push_back(*v);
    }
    std::sort(p.begin(), p.end());
    const double m = static_cast<double>(p.size());
    double cutoff = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] <= static_cast<double>(k + 1) * alpha / m) cutoff = p[k];
    }
    return cutoff;
}

SignificanceMap classify_quadrants(std::span<const double> xi, std::span<const double> xj, const WeightMatrix& w,
                                   std::span<const std::optional<double>> pseudo_p, double alpha,
                                   std::span<const double> local_values, QuadrantOptions options) {
    const std::size_t n = w.size();
    if (xi.size() != n || xj.size() != n || pseudo_p.size() != n || (!local_values.empty() && local_values.size() != n)) {
        throw Error(ErrorCode::LengthMismatch, "classify_quadrants: input lengths disagree");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");

    auto standardize = [n](std::span<const double> x) {
        const double mean = kernels::pairwise_sum(x) / static_cast<double>(n);
        std::vector<double> z(n);
        std::vector<double> sq(n);
        for (std::size_t a = 0; a < n; ++a) {
            z[a] = x[a] - mean;
            sq[a] = z[a] * z[a];
        }
        const double sd = std::sqrt(kernels::pairwise_sum(sq) / static_cast<double>(n));
        if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "variable has zero sample variance");
        for (double& v : z) v /= sd;
        return z;
    };
    const std::vector<double> zi = standardize(xi);
    const std::vector<double> zj = standardize(xj);
    const WeightMatrix row_w = w.standardization() == Standardization::RowStandardized ? w : row_standardize(w);
    const std::vector<double> lag = spatial_lag(row_w, zj);

    SignificanceMap map;
    map.alpha = alpha;
    map.cutoff = options.fdr ? fdr_cutoff(pseudo_p, alpha) : alpha;
    map.sites.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        SiteSignificance& s = map.sites[a];
        s.value = local_values.empty() ? 0.0 : local_values[a];
        s.z_value = zi[a];
        s.pseudo_p = pseudo_p[a];
        if (w.is_island(a) || !pseudo_p[a]) {
            s.quadrant = Quadrant::Island;
            s.pseudo_p.reset();
            continue;
        }
        s.z_lag = lag[a];
        if (*pseudo_p[a] > map.cutoff || s.z_value == 0.0 || s.z_lag == 0.0) {
            s.quadrant = Quadrant::NotSignificant;
        } else if (s.z_value > 0.0) {
            s.quadrant = s.z_lag > 0.0 ? Quadrant::HH : Quadrant::HL;
        } else {
            s.quadrant = s.z_lag > 0.0 ? Quadrant::LH : Quadrant::LL;
        }
    }
    return map;
}

bool is_consistent(const SignificanceMap& map) {
    for (const SiteSignificance& s : map.sites) {
        if (s.quadrant == Quadrant::Island) {
            if (s.pseudo_p) return false;
            continue;
        }
        if (!s.pseudo_p) return false;
        if (s.quadrant == Quadrant::NotSignificant) continue;
        if (*s.pseudo_p > map.alpha || *s.pseudo_p > map.cutoff) return false;
        const bool high = s.z_value > 0.0;
        const bool low = s.z_value < 0.0;
        const bool lag_high = s.z_lag > 0.0;
        const bool lag_low = s.z_lag < 0.0;
        switch (s.quadrant) {
            case Quadrant::HH: if (!(high && lag_high)) return false; break;
            case Quadrant::HL: if (!(high && lag_low)) return false; break;
            case Quadrant::LH: if (!(low && lag_high)) return false; break;
            case Quadrant::LL: if (!(low && lag_low)) return false; break;
            default: break;
        }
    }
    return true;
}

}  // namespace lattassoc
