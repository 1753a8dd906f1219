#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "lattassoc/error.hpp"
#include "lattassoc/global_assoc.hpp"
#include "lattassoc/local_assoc.hpp"
#include "lattassoc/synthetic.hpp"
#include "oracle.hpp"

using namespace lattassoc;

namespace {

std::vector<double> normals(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

}  // namespace

TEST_SUITE("local") {

TEST_CASE("local values match the dense oracle") {
    std::mt19937_64 rng(21);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 6 + rng() % 80;
        oracle::Dense d = oracle::random_binary(n, 0.15, rng, rep % 2 == 0);
        if (rep % 3 == 0) d = oracle::row_standardized(d);
        const WeightMatrix w =
            oracle::to_matrix(d, rep % 3 == 0 ? Standardization::RowStandardized : Standardization::Binary);
        const auto x = normals(n, rng), y = normals(n, rng);
        const auto uni = local_moran(x, w);
        const auto biv = local_moran_biv(x, y, w);
        const auto eu = oracle::local_moran(x, x, d);
        const auto eb = oracle::local_moran(x, y, d);
        for (std::size_t a = 0; a < n; ++a) {
            CHECK(uni.values[a] == doctest::Approx(eu[a]).epsilon(1e-12).scale(1.0));
            CHECK(biv.values[a] == doctest::Approx(eb[a]).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("sum of local values equals the scaled global statistic") {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 5 + rng() % 196;
        oracle::Dense d = oracle::random_binary(n, 4.0 / double(n), rng, rep % 2 == 1);
        d[0][n - 1] = 1.0;
        if (rep % 2 == 0) d = oracle::row_standardized(d);
        const WeightMatrix w =
            oracle::to_matrix(d, rep % 2 == 0 ? Standardization::RowStandardized : Standardization::Binary);
        const auto x = normals(n, rng);
        double total = 0.0;
        for (double v : local_moran(x, w).values) total += v;
        const double global = moran_i(x, w).statistic;
        CHECK(total == doctest::Approx(global * w.s0() * double(n - 1) / double(n)).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("bivariate local with equal inputs is the univariate map") {
    std::mt19937_64 rng(23);
    const WeightMatrix w = row_standardize(build_weights(grid_lattice(6, 5), NeighborSpec::queen()));
    const auto x = normals(30, rng);
    CHECK(local_moran_biv(x, x, w).values == local_moran(x, w).values);
}

TEST_CASE("islands carry zero with a mask and expected values") {
    const WeightMatrix w = WeightMatrix::from_triplets(4, {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}});
    const auto m = local_moran(std::vector<double>{1, 3, 2, 9}, w);
    CHECK(m.island_mask == std::vector<bool>{false, false, false, true});
    CHECK(m.values[3] == 0.0);
    CHECK(m.expected[1] == doctest::Approx(-2.0 / 3.0));
    CHECK(m.expected[3] == 0.0);
    CHECK(m.expected[0] == doctest::Approx(-1.0 / 3.0));
    CHECK(m.kind == LocalKind::LocalMoran);
}

TEST_CASE("partial local map uses residual fields") {
    std::mt19937_64 rng(24);
    const Lattice lattice = grid_lattice(6, 6);
    const oracle::Dense d = oracle::row_standardized(oracle::grid(6, 6, true));
    const WeightMatrix w = oracle::to_matrix(d, Standardization::RowStandardized);
    const auto x = normals(36, rng), y = normals(36, rng), z = normals(36, rng);
    const AttributeTable t(std::make_shared<const Lattice>(lattice), {{"x", x}, {"y", y}, {"z", z}});
    const std::vector<std::string> given{"z"};
    const auto got = local_moran_partial(t, "x", "y", given, w);
    const auto expect = oracle::local_moran(oracle::residualize(x, {z}), oracle::residualize(y, {z}), d);
    for (std::size_t a = 0; a < 36; ++a) CHECK(got.values[a] == doctest::Approx(expect[a]).epsilon(1e-10).scale(1.0));
    CHECK(got.kind == LocalKind::LocalMoranPartial);

    const auto empty = local_moran_partial(t, "x", "y", {}, w);
    const auto biv = local_moran_biv(x, y, w);
    for (std::size_t a = 0; a < 36; ++a) CHECK(empty.values[a] == doctest::Approx(biv.values[a]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("local errors") {
    const WeightMatrix w = build_weights(grid_lattice(2, 2), NeighborSpec::rook());
    CHECK_THROWS_AS(local_moran(std::vector<double>{1, 2, 3}, w), Error);
    CHECK_THROWS_AS(local_moran(std::vector<double>{1, 1, 1, 1}, w), Error);
}

TEST_CASE("binary checkerboard is negative everywhere") {
    const WeightMatrix rook = build_weights(grid_lattice(2, 2), NeighborSpec::rook());
    for (double v : local_moran(std::vector<double>{1, -1, -1, 1}, rook).values) CHECK(v < 0.0);
}

TEST_CASE("high site among high neighbours is positive") {
    const WeightMatrix w = build_weights(grid_lattice(3, 3), NeighborSpec::rook());
    const std::vector<double> x{0, 5, 0, 5, 6, 5, 0, 5, 0};
    CHECK(local_moran(x, w).values[4] > 0.0);
}

TEST_CASE("negated second field negates the map") {
    std::mt19937_64 rng(25);
    const WeightMatrix w = build_weights(grid_lattice(5, 5), NeighborSpec::queen());
    const auto x = normals(25, rng);
    std::vector<double> neg(25);
    for (std::size_t s = 0; s < 25; ++s) neg[s] = -x[s];
    const auto a = local_moran(x, w).values;
    const auto b = local_moran_biv(x, neg, w).values;
    for (std::size_t s = 0; s < 25; ++s) CHECK(b[s] == doctest::Approx(-a[s]).epsilon(1e-14).scale(1.0));
}

TEST_CASE("partial local with a linear target fails") {
    std::mt19937_64 rng(26);
    const Lattice lattice = grid_lattice(4, 4);
    const WeightMatrix w = build_weights(lattice, NeighborSpec::queen());
    const auto x = normals(16, rng), z = normals(16, rng);
    std::vector<double> y(16);
    for (std::size_t s = 0; s < 16; ++s) y[s] = -z[s];
    const AttributeTable t(std::make_shared<const Lattice>(lattice), {{"x", x}, {"y", y}, {"z", z}});
    const std::vector<std::string> given{"z"};
    CHECK_THROWS_AS(local_moran_partial(t, "x", "y", given, w), Error);
}

TEST_CASE("partial local on a SAR triple matches the dense pipeline") {
    const Lattice lattice = grid_lattice(10, 10);
    const oracle::Dense d = oracle::row_standardized(oracle::grid(10, 10, false));
    const WeightMatrix w = oracle::to_matrix(d, Standardization::RowStandardized);
    CommonDriverSpec spec;
    spec.driver = {0.5, 1.0, 8};
    const DriverTriple t = simulate_common_driver(w, spec);
    const AttributeTable table(std::make_shared<const Lattice>(lattice), {{"x", t.xi}, {"y", t.xj}, {"z", t.z}});
    const std::vector<std::string> given{"z"};
    const auto got = local_moran_partial(table, "x", "y", given, w).values;
    const auto expect = oracle::local_moran(oracle::residualize(t.xi, {t.z}), oracle::residualize(t.xj, {t.z}), d);
    for (std::size_t s = 0; s < 100; ++s) CHECK(got[s] == doctest::Approx(expect[s]).epsilon(1e-10).scale(1.0));
}

}
