// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lattassoc/global_assoc.hpp"
#include "lattassoc/inference.hpp"
#include "lattassoc/io.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/synthetic.hpp"
#include "oracle.hpp"

using namespace lattassoc;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, double limit_seconds, const std::function<Verdict()>& body) {
    const auto start = Clock::now();
    Verdict v;
    try {
        v = body();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    bool pass = v.pass;
    if (limit_seconds > 0.0 && seconds >= limit_seconds) {
        pass = false;
        v.detail += " [over time limit]";
    }
    if (!pass) ++failures;
    std::printf("[%s] %d %s: %s (%.3fs", pass ? "PASS" : "FAIL", id, title.c_str(), v.detail.c_str(), seconds);
    if (limit_seconds > 0.0) std::printf(" < %.0fs", limit_seconds);
    std::printf(")\n");
    std::fflush(stdout);
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::vector<double> normals(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

oracle::Dense random_weights(std::size_t n, std::mt19937_64& rng, int flavour) {
    oracle::Dense d = oracle::random_binary(n, std::min(0.5, 5.0 / double(n)), rng, flavour % 2 == 0);
    d[0][n - 1] = 1.0;
    d[n - 1][0] = 1.0;
    if (flavour % 3 == 0) d = oracle::row_standardized(d);
    return d;
}

Standardization mode_of(int flavour) {
    return flavour % 3 == 0 ? Standardization::RowStandardized : Standardization::Binary;
}

// 1 -----------------------------------------------------------------------
Verdict checkerboard() {
    const oracle::Dense binary = oracle::grid(2, 2, false);
    const oracle::Dense rowstd = oracle::row_standardized(binary);
    const WeightMatrix wb = build_weights(grid_lattice(2, 2), NeighborSpec::rook());
    const WeightMatrix wr = row_standardize(wb);
    const std::vector<double> x{1, -1, -1, 1};
    const double i = moran_i(x, wr).statistic;
    const double c = geary_c(x, wb).statistic;
    const double oi = oracle::moran(x, x, rowstd);
    const double oc = oracle::geary(x, x, binary);
    const bool ok = i == -1.0 && std::abs(c - 1.5) <= 1e-12 && std::abs(i - oi) <= 1e-12 && std::abs(c - oc) <= 1e-12;
    return {ok, "I=" + fmt(i) + " (oracle " + fmt(oi) + "), C=" + fmt(c) + " (oracle " + fmt(oc) + ")"};
}

// 2 -----------------------------------------------------------------------
Verdict randomization_means() {
    struct Fixture {
        std::string name;
        oracle::Dense w;
        bool row;
    };
    std::mt19937_64 rng(2);
    std::vector<Fixture> fixtures{
        {"2x2 rook", oracle::grid(2, 2, false), false},
        {"1x5 rook row", oracle::grid(1, 5, false), true},
        {"2x3 queen", oracle::grid(2, 3, true), false},
        {"2x3 rook row", oracle::grid(2, 3, false), true},
        {"1x7 rook", oracle::grid(1, 7, false), false},
        {"7-site random", random_weights(7, rng, 1), false},
    };
    double worst_i = 0.0, worst_c = 0.0;
    for (Fixture& f : fixtures) {
        if (f.row) f.w = oracle::row_standardized(f.w);
        const std::size_t n = f.w.size();
        const WeightMatrix w =
            oracle::to_matrix(f.w, f.row ? Standardization::RowStandardized : Standardization::Binary);
        const std::vector<double> x = normals(n, rng);
        const double mi = oracle::permutation_mean(x, [&](const std::vector<double>& y) {
            return moran_i(y, w).statistic;
        });
        const double mc = oracle::permutation_mean(x, [&](const std::vector<double>& y) {
            return geary_c(y, w).statistic;
        });
        worst_i = std::max(worst_i, std::abs(mi + 1.0 / double(n - 1)));
        worst_c = std::max(worst_c, std::abs(mc - 1.0));
    }
    return {worst_i <= 1e-12 && worst_c <= 1e-12, std::to_string(fixtures.size()) +
                                                       " lattices (n=4..7), max |mean I + 1/(n-1)|=" + fmt(worst_i) +
                                                       ", max |mean C - 1|=" + fmt(worst_c)};
}

// 3 -----------------------------------------------------------------------
Verdict null_variance() {
    std::mt19937_64 rng(3);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 5 + rng() % 60;
        const oracle::Dense d = random_weights(n, rng, rep);
        const WeightMatrix w = oracle::to_matrix(d, mode_of(rep));
        worst = std::max(worst, std::abs(moran_null_variance(w, n) - oracle::moran_variance(d)));
    }
    return {worst <= 1e-10, "20 random matrices, max abs difference " + fmt(worst)};
}

// 4 -----------------------------------------------------------------------
Verdict reductions() {
    std::mt19937_64 rng(4);
    double worst_uni = 0.0, worst_partial = 0.0, worst_rec = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + rng() % 100;
        const oracle::Dense d = random_weights(n, rng, rep);
        const WeightMatrix w = oracle::to_matrix(d, mode_of(rep));
        const auto x = normals(n, rng), y = normals(n, rng);
        worst_uni = std::max(worst_uni, std::abs(moran_i_biv(x, x, w).statistic - moran_i(x, w).statistic));
        worst_uni = std::max(worst_uni, std::abs(geary_c_biv(x, x, w).statistic - geary_c(x, w).statistic));

        std::vector<std::string> ids(n);
        for (std::size_t s = 0; s < n; ++s) ids[s] = std::to_string(s);
        const AttributeTable t(std::make_shared<const Lattice>(Lattice::from_ids(ids)), {{"x", x}, {"y", y}});
        worst_partial = std::max(worst_partial, std::abs(moran_i_partial(t, "x", "y", {}, w).statistic -
                                                         moran_i_biv(x, y, w).statistic));
        worst_partial = std::max(worst_partial, std::abs(geary_c_partial(t, "x", "y", {}, w).statistic -
                                                         geary_c_biv(x, y, w).statistic));

        const double a = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        worst_rec = std::max(worst_rec, std::abs(partial_from_bivariate(a, 0.0, 0.0) - a));
    }
    const bool ok = worst_uni <= 1e-12 && worst_partial <= 1e-12 && worst_rec <= 1e-12;
    return {ok, "100 instances, max diffs: biv(x,x)-uni " + fmt(worst_uni) + ", partial{}-biv " + fmt(worst_partial) +
                    ", recursion(a,0,0)-a " + fmt(worst_rec)};
}

// 5 -----------------------------------------------------------------------
Verdict sum_identity() {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 5 + rng() % 196;
        const oracle::Dense d = random_weights(n, rng, rep);
        const WeightMatrix w = oracle::to_matrix(d, mode_of(rep));
        const auto x = normals(n, rng);
        const auto local = local_moran(x, w).values;
        const double total = std::accumulate(local.begin(), local.end(), 0.0);
        const double target = moran_i(x, w).statistic * w.s0() * double(n - 1) / double(n);
        worst = std::max(worst, std::abs(total - target));
    }
    return {worst <= 1e-10, "100 instances n<=200, max |sum I_i - I s0 (n-1)/n| " + fmt(worst)};
}

// 6 -----------------------------------------------------------------------
Verdict test_size() {
    const Lattice lattice = grid_lattice(15, 15);
    const WeightMatrix w = row_standardize(build_weights(lattice, NeighborSpec::queen()));
    const auto l = std::make_shared<const Lattice>(lattice);
    std::size_t rejected = 0;
    const std::size_t outer = 500;
    for (std::uint64_t r = 0; r < outer; ++r) {
        const AttributeTable t(l, {{"x", gaussian_noise(lattice.size(), 1.0, 600 + r)}});
        PermutationPlan plan;
        plan.replicates = 199;
        plan.seed = r;
        const AssocResult res = permute_global(GlobalStatistic::MoranI, t, {"x", "", {}}, w, plan);
        if (*res.pseudo_p <= 0.05) ++rejected;
    }
    const double rate = double(rejected) / double(outer);
    return {rate >= 0.03 && rate <= 0.07, "rejection rate " + fmt(rate) + " (" + std::to_string(rejected) + "/500)"};
}

// 7 -----------------------------------------------------------------------
Verdict spurious_association() {
    const std::size_t rows = 16, cols = 16;
    const Lattice lattice = grid_lattice(rows, cols);
    const WeightMatrix w = row_standardize(build_weights(lattice, NeighborSpec::queen()));
    const auto l = std::make_shared<const Lattice>(lattice);
    const std::vector<std::size_t> block = grid_block(rows, cols, 5, 5, 5, 5);
    const std::vector<std::string> given{"z"};
    const std::size_t seeds = 200;

    std::vector<double> biv_abs, part_abs;
    std::size_t seeds_with_hh = 0, seeds_changed = 0;
    for (std::uint64_t seed = 0; seed < seeds; ++seed) {
        CommonDriverSpec spec;
        spec.driver = {0.5, 1.0, 7000 + seed};
        spec.a = 1.0;
        spec.b = 1.0;
        spec.noise_sd = 1.0;
        spec.hotspot_sites = block;
        spec.hotspot_shift = 3.0;
        const DriverTriple t = simulate_common_driver(w, spec);
        const AttributeTable table(l, {{"x", t.xi}, {"y", t.xj}, {"z", t.z}});
        biv_abs.push_back(std::abs(moran_i_biv(t.xi, t.xj, w).statistic));
        part_abs.push_back(std::abs(moran_i_partial(table, "x", "y", given, w).statistic));

        PermutationPlan plan;
        plan.replicates = 499;
        plan.seed = seed;
        plan.scheme = PermutationScheme::ConditionalOnSite;
        const VariableSelection vars{"x", "y", given};
        const LocalFields fb = local_fields(LocalStatistic::LocalMoranBiv, table, vars);
        const LocalFields fp = local_fields(LocalStatistic::LocalMoranPartial, table, vars);
        const auto pb = permute_local_fields(fb.xi, fb.xj, w, plan);
        const auto pp = permute_local_fields(fp.xi, fp.xj, w, plan);
        const SignificanceMap mb = classify_quadrants(fb.xi, fb.xj, w, pb.pseudo_p, 0.05);
        const SignificanceMap mp = classify_quadrants(fp.xi, fp.xj, w, pp.pseudo_p, 0.05);

        std::size_t hh = 0, changed = 0;
        for (std::size_t s : block) {
            if (mb.sites[s].quadrant != Quadrant::HH) continue;
            ++hh;
            if (mp.sites[s].quadrant != Quadrant::HH) ++changed;
        }
        if (hh > 0) {
            ++seeds_with_hh;
            if (2 * changed > hh) ++seeds_changed;
        }
    }
    const double mb = median(biv_abs), mp = median(part_abs);
    const bool ok = mp < 0.5 * mb && 2 * seeds_changed > seeds;
    return {ok, "median |I_ij|=" + fmt(mb) + ", median |I_ij|z|=" + fmt(mp) + "; hotspot HH under bivariate in " +
                    std::to_string(seeds_with_hh) + "/200 seeds, mostly lost or flipped under partial in " +
                    std::to_string(seeds_changed) + "/200"};
}

// 8 -----------------------------------------------------------------------
Verdict determinism() {
    const std::filesystem::path dir = std::filesystem::path(LATTASSOC_TEST_TMP) / "acceptance";
    std::filesystem::create_directories(dir);
    const std::string cli = LATTASSOC_CLI;
    auto run = [&](const std::string& args) {
        const std::string cmd = "\"" + cli + "\" " + args + " > \"" + (dir / "log.txt").string() + "\" 2>&1";
        return std::system(cmd.c_str());
    };
    const std::string csv = (dir / "driver.csv").string();
    const std::string geo = (dir / "driver.geojson").string();
    if (run("simulate --rows 18 --cols 18 --model driver --rho 0.6 --hotspot 4,4,5,5 --seed 11 --out \"" + csv +
            "\" --geojson-out \"" + geo + "\"") != 0) {
        return {false, "simulate failed"};
    }
    const std::vector<std::string> stats{"--stat moran --variant biv --i x --j y",
                                         "--stat moran-partial --i x --j y --given z", "--stat moran --i x"};
    std::size_t compared = 0;
    for (std::size_t k = 0; k < stats.size(); ++k) {
        std::string ref_csv, ref_geo;
        for (int threads : {1, 2, 3, 4, 8}) {
            const std::string tag = std::to_string(k) + "_" + std::to_string(threads);
            const std::string out = (dir / ("sig_" + tag + ".csv")).string();
            const std::string gout = (dir / ("sig_" + tag + ".geojson")).string();
            if (run("sigmap --geojson \"" + geo + "\" --data \"" + csv + "\" " + stats[k] +
                    " --permutations 999 --seed 7 --threads " + std::to_string(threads) + " --out \"" + out +
                    "\" --geojson-out \"" + gout + "\"") != 0) {
                return {false, "sigmap failed for " + tag};
            }
            const std::string a = io::read_text_file(out), b = io::read_text_file(gout);
            if (threads == 1) {
                ref_csv = a;
                ref_geo = b;
            } else if (a != ref_csv || b != ref_geo) {
                return {false, "output differs at " + std::to_string(threads) + " threads (" + stats[k] + ")"};
            }
            ++compared;
        }
    }
    return {true, std::to_string(compared) + " sigmap runs (3 statistics x threads 1,2,3,4,8), byte-identical CSV "
                                              "and GeoJSON"};
}

// 9 -----------------------------------------------------------------------
// At n = 6 there are 5! = 120 arrangements of the other sites. The exhaustive
// path reports (r+1)/(120+1); a sampled path estimates the exact proportion
// r/120, so the two agree within 1/121 plus sampling error.
Verdict conditional_permutation() {
    std::mt19937_64 rng(9);
    std::vector<oracle::Dense> lattices{oracle::grid(1, 6, false), oracle::row_standardized(oracle::grid(2, 3, true)),
                                        oracle::grid(2, 3, false)};
    std::size_t sites = 0, exact_match = 0;
    std::vector<double> err(3, 0.0);
    const std::vector<std::size_t> budgets{1000, 10000, 1000000};
    double worst_gap = 0.0;
    bool within = true;
    for (std::size_t k = 0; k < lattices.size(); ++k) {
        const oracle::Dense& d = lattices[k];
        const bool row = k == 1;
        const WeightMatrix w = oracle::to_matrix(d, row ? Standardization::RowStandardized : Standardization::Binary);
        const auto x = normals(6, rng), y = normals(6, rng);
        const LocalPermutation full = permute_local_exhaustive(x, y, w, Alternative::TwoSided);
        if (full.replicates != 120) return {false, "expected 5! = 120 arrangements"};
        std::vector<LocalPermutation> sampled;
        for (std::size_t m : budgets) {
            PermutationPlan plan;
            plan.replicates = m;
            plan.seed = 100 + k;
            plan.scheme = PermutationScheme::ConditionalOnSite;
            sampled.push_back(permute_local_fields(x, y, w, plan));
        }
        for (std::size_t a = 0; a < 6; ++a) {
            ++sites;
            const double p = *full.pseudo_p[a];
            if (p == oracle::conditional_p_exact(x, y, d, a)) ++exact_match;
            const double q = double(full.extreme[a]) / 120.0;
            for (std::size_t b = 0; b < budgets.size(); ++b) {
                err[b] = std::max(err[b], std::abs(*sampled[b].pseudo_p[a] - q));
            }
            const double m = double(budgets.back());
            const double noise = 5.0 * std::sqrt(q * (1.0 - q) / m) + 1.0 / (m + 1.0);
            const double sampled_p = *sampled.back().pseudo_p[a];
            worst_gap = std::max(worst_gap, std::abs(sampled_p - p));
            if (std::abs(sampled_p - q) > noise || std::abs(sampled_p - p) > 1.0 / 121.0 + noise) within = false;
        }
    }
    const bool ok = exact_match == sites && within && err[2] < err[0];
    return {ok, "exhaustive = oracle at " + std::to_string(exact_match) + "/" + std::to_string(sites) +
                    " sites; max |p_M - r/120| at M=1e3,1e4,1e6: " + fmt(err[0]) + ", " + fmt(err[1]) + ", " +
                    fmt(err[2]) + "; max |p_1e6 - p_exhaustive| " + fmt(worst_gap) + " (bound 1/121 = " +
                    fmt(1.0 / 121.0) + ")"};
}

}  // namespace

int main() {
    report(1, "checkerboard oracles", 1.0, checkerboard);
    report(2, "randomization means", 30.0, randomization_means);
    report(3, "null variance cross-check", 0.0, null_variance);
    report(4, "reduction identities", 0.0, reductions);
    report(5, "local-global sum identity", 0.0, sum_identity);
    report(6, "permutation test size", 120.0, test_size);
    report(7, "spurious association", 300.0, spurious_association);
    report(8, "thread-count determinism", 0.0, determinism);
    report(9, "conditional permutation", 0.0, conditional_permutation);
    std::printf("%s: %d of 9 criteria failed\n", failures == 0 ? "OK" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
