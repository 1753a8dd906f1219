#include <cmath>
#include <memory>
#include <random>

#include "doctest.h"
#include "lattassoc/conditioning.hpp"
#include "lattassoc/error.hpp"
#include "oracle.hpp"

using namespace lattassoc;

namespace {

std::vector<double> normals(std::size_t n, std::mt19937_64& rng, double scale = 1.0, double shift = 0.0) {
    std::normal_distribution<double> g(shift, scale);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

TEST_SUITE("conditioning") {

TEST_CASE("residual matches normal-equation oracle") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 30 + rep;
        const auto y = normals(n, rng, 3.0, 10.0);
        std::vector<std::vector<double>> g{normals(n, rng), normals(n, rng, 100.0, -5.0)};
        const auto expect = oracle::residualize(y, g);
        const auto got = residualize(y, {g[0], g[1]});
        for (std::size_t s = 0; s < n; ++s) CHECK(got[s] == doctest::Approx(expect[s]).epsilon(1e-9).scale(1.0));
    }
}

TEST_CASE("residual is orthogonal to the design") {
    std::mt19937_64 rng(2);
    const std::size_t n = 50;
    const auto y = normals(n, rng);
    const auto g1 = normals(n, rng, 1e4);
    const auto got = residualize(y, {g1});
    const std::vector<double> ones(n, 1.0);
    CHECK(std::abs(dot(got, ones)) < 1e-10);
    CHECK(std::abs(dot(got, g1)) < 1e-10 * 1e4 * std::sqrt(double(n)));
}

TEST_CASE("empty conditioning set centres the target") {
    const std::vector<double> y{1, 2, 3, 10};
    const auto r = residualize(y, {});
    CHECK(r[0] == doctest::Approx(-3.0));
    CHECK(r[3] == doctest::Approx(6.0));
}

TEST_CASE("target inside the span snaps to zero") {
    std::mt19937_64 rng(3);
    const auto g = normals(20, rng);
    std::vector<double> y(20);
    for (std::size_t s = 0; s < 20; ++s) y[s] = 2.0 * g[s] - 7.0;
    for (double v : residualize(y, {g})) CHECK(v == 0.0);
}

TEST_CASE("collinear conditioning is rank deficient") {
    std::mt19937_64 rng(4);
    const auto y = normals(20, rng);
    const auto g = normals(20, rng);
    std::vector<double> g2(20);
    for (std::size_t s = 0; s < 20; ++s) g2[s] = 3.0 * g[s] + 1.0;
    CHECK_THROWS_AS(residualize(y, {g, g2}), Error);
    try {
        residualize(y, {g, g2});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
}

TEST_CASE("constant conditioning column is dropped") {
    std::mt19937_64 rng(5);
    const auto y = normals(15, rng);
    const std::vector<double> c(15, 4.0);
    std::vector<std::size_t> dropped;
    const auto r = residualize(y, {c}, &dropped);
    CHECK(dropped == std::vector<std::size_t>{0});
    const auto centred = residualize(y, {});
    for (std::size_t s = 0; s < 15; ++s) CHECK(r[s] == doctest::Approx(centred[s]));
}

TEST_CASE("too few sites for the conditioning set") {
    const std::vector<double> y{1, 2, 3};
    const std::vector<double> a{1, 0, 2}, b{0, 5, 1};
    CHECK_THROWS_AS(residualize(y, {a, b}), Error);
}

TEST_CASE("table front end and set validation") {
    auto l = std::make_shared<const Lattice>(Lattice::from_ids({"a", "b", "c", "d", "e"}));
    const AttributeTable t(l, {{"x", {1, 2, 3, 4, 6}}, {"y", {2, 1, 0, 3, 3}}, {"z", {0, 1, 0, 1, 5}}});
    const std::vector<std::string> given{"z"};
    const ConditionalField f = residualize(t, "x", given);
    const auto expect = oracle::residualize(t.variable("x"), {t.variable("z")});
    for (std::size_t s = 0; s < 5; ++s) CHECK(f.values[s] == doctest::Approx(expect[s]));
    CHECK(std::abs(f.mean) < 1e-12);

    CHECK_NOTHROW([&] { ConditioningSet{"x", "y", {"z"}}.validate(t); }());
    CHECK_THROWS([&] { ConditioningSet{"x", "x", {}}.validate(t); }());
    CHECK_THROWS([&] { ConditioningSet{"x", "y", {"x"}}.validate(t); }());
    CHECK_THROWS([&] { ConditioningSet{"x", "y", {"z", "z"}}.validate(t); }());
    CHECK_THROWS([&] { ConditioningSet{"x", "q", {}}.validate(t); }());
}

TEST_CASE("fitted line example") {
    const std::vector<double> y{1, 2, 3, 5}, g{1, 2, 3, 4};
    // Normal equations by hand: slope 1.3, intercept -0.5.
    const std::vector<double> expect{1 - 0.8, 2 - 2.1, 3 - 3.4, 5 - 4.7};
    const auto got = residualize(y, {g});
    for (std::size_t s = 0; s < 4; ++s) CHECK(got[s] == doctest::Approx(expect[s]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("target equal to a given variable") {
    auto l = std::make_shared<const Lattice>(Lattice::from_ids({"a", "b", "c", "d"}));
    const AttributeTable t(l, {{"x", {1, 4, 2, 8}}, {"z", {1, 4, 2, 8}}});
    const std::vector<std::string> given{"z"};
    for (double v : residualize(t, "x", given).values) CHECK(v == 0.0);
}

}
