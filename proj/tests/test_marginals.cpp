#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "comolife/marginals.hpp"
#include "oracles.hpp"

using namespace comolife;

TEST_CASE("parametric survival functions") {
    const auto e = NetSurvival::exponential(0.7);
    const auto w = NetSurvival::weibull(1.5, 3.0);
    const auto g = NetSurvival::gompertz(0.001, 1.1);
    for (double t : {0.0, 0.3, 1.0, 4.0, 25.0}) {
        CHECK(e.survival(t) == doctest::Approx(std::exp(-0.7 * t)).epsilon(1e-14));
        CHECK(w.survival(t) == doctest::Approx(oracle::weibull_survival(t, 1.5, 3.0)).epsilon(1e-14));
        CHECK(g.survival(t) == doctest::Approx(oracle::gompertz_survival(t, 0.001, 1.1)).epsilon(1e-13));
        CHECK(e.cdf(t) == doctest::Approx(1.0 - e.survival(t)));
        CHECK_FALSE(e.evaluate(t).extrapolated);
    }
    CHECK(e.kind() == "exponential");
    CHECK(w.kind() == "weibull");
    CHECK(g.kind() == "gompertz");
}

TEST_CASE("densities are minus the derivative of survival") {
    const double h = 1e-6;
    for (const auto& net : {NetSurvival::exponential(2.0), NetSurvival::weibull(0.8, 4.0),
                            NetSurvival::gompertz(0.0005, 1.09)}) {
        for (double t : {0.5, 2.0, 7.0}) {
            const double fd = (net.survival(t - h) - net.survival(t + h)) / (2 * h);
            CHECK(net.density(t) == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(NetSurvival::exponential(0.0), DomainError);
    CHECK_THROWS_AS(NetSurvival::exponential(std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(NetSurvival::weibull(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(NetSurvival::weibull(1.0, -1.0), DomainError);
    CHECK_THROWS_AS(NetSurvival::gompertz(0.0, 1.1), DomainError);
    CHECK_THROWS_AS(NetSurvival::gompertz(0.001, 1.0), DomainError);
    CHECK_THROWS_AS(NetSurvival::exponential(1.0).survival(-0.1), DomainError);
}

TEST_CASE("tabular law interpolates linearly and holds past the grid") {
    const auto tab = NetSurvival::tabular({0.0, 1.0, 2.0}, {1.0, 0.8, 0.5}, "x.death");
    CHECK(tab.kind() == "tabular");
    CHECK(tab.is_tabular());
    CHECK(tab.label() == "x.death");
    CHECK(tab.survival(0.5) == doctest::Approx(0.9));
    CHECK(tab.survival(1.5) == doctest::Approx(0.65));
    const auto beyond = tab.evaluate(3.0);
    CHECK(beyond.value == 0.5);
    CHECK(beyond.extrapolated);
    CHECK_FALSE(tab.evaluate(2.0).extrapolated);
    CHECK(tab.density(0.5) == doctest::Approx(0.2));
    CHECK(tab.density(1.0) == doctest::Approx(0.3));  // right derivative at a knot
    CHECK(tab.density(5.0) == 0.0);
}

TEST_CASE("tabular validation") {
    CHECK_THROWS_AS(NetSurvival::tabular({0.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.0, 1.0}, {1.0}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.5, 1.0}, {1.0, 0.9}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.0, 1.0}, {0.9, 0.8}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.0, 1.0, 1.0}, {1.0, 0.9, 0.8}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.0, 1.0, 2.0}, {1.0, 0.8, 0.9}), DomainError);
    CHECK_THROWS_AS(NetSurvival::tabular({0.0, 1.0}, {1.0, -0.1}), DomainError);
}

TEST_CASE("quantiles invert the cdf") {
    for (const auto& net : {NetSurvival::exponential(1.3), NetSurvival::weibull(2.0, 5.0),
                            NetSurvival::gompertz(0.0002, 1.1)}) {
        CHECK(net.quantile(0.0) == 0.0);
        for (double p : {1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999}) {
            const double t = quantile(net, p);
            CHECK(net.cdf(t) == doctest::Approx(p).epsilon(1e-12));
        }
    }
    CHECK(NetSurvival::exponential(2.0).quantile(0.5) == doctest::Approx(std::log(2.0) / 2.0).epsilon(1e-15));
    CHECK_THROWS_AS(NetSurvival::exponential(1.0).quantile(1.0), DomainError);
    CHECK_THROWS_AS(NetSurvival::exponential(1.0).quantile(-0.1), DomainError);
}

TEST_CASE("tabular quantile is the generalized inverse") {
    const auto tab = NetSurvival::tabular({0.0, 1.0, 2.0, 3.0}, {1.0, 0.8, 0.8, 0.5});
    CHECK(tab.quantile(0.1) == doctest::Approx(0.5));
    // F is flat at 0.2 on [1, 2]; the smallest t reaching it is 1.
    CHECK(tab.quantile(0.2) == doctest::Approx(1.0));
    CHECK(tab.quantile(0.35) == doctest::Approx(2.5));
    CHECK(std::isinf(tab.quantile(0.6)));
    for (double p : {0.05, 0.2, 0.21, 0.4, 0.5}) {
        const double t = tab.quantile(p);
        CHECK(tab.cdf(t) >= p - 1e-15);
        if (t > 1e-9) CHECK(tab.cdf(t * (1 - 1e-9)) < p);
    }
}

TEST_CASE("life table ingestion") {
    const std::vector<LifeTableRecord> rows = {
        {"x", "death", 1.0, 0.01}, {"x", "death", 2.0, 0.03}, {"y", "death", 1.0, 0.02},
        {"x", "lapse", 1.0, 0.1},  {"x", "lapse", 2.0, 0.2},
    };
    const auto net = from_life_table(rows, "x", "death");
    CHECK(net.label() == "x.death");
    CHECK(net.survival(0.0) == 1.0);
    CHECK(net.survival(1.0) == doctest::Approx(0.99));
    CHECK(net.survival(2.0) == doctest::Approx(0.97));
    CHECK(net.evaluate(2.5).extrapolated);
    CHECK_THROWS_AS(from_life_table(rows, "z", "death"), NotFound);
    CHECK_THROWS_AS(from_life_table(rows, "y", "lapse"), NotFound);

    const std::vector<LifeTableRecord> unordered = {{"x", "d", 2.0, 0.1}, {"x", "d", 1.0, 0.2}};
    CHECK_THROWS_AS(from_life_table(unordered, "x", "d"), ValidationError);
    const std::vector<LifeTableRecord> decreasing = {{"x", "d", 1.0, 0.2}, {"x", "d", 2.0, 0.1}};
    CHECK_THROWS_AS(from_life_table(decreasing, "x", "d"), ValidationError);
    const std::vector<LifeTableRecord> out_of_range = {{"x", "d", 1.0, 1.5}};
    CHECK_THROWS_AS(from_life_table(out_of_range, "x", "d"), ValidationError);
    const std::vector<LifeTableRecord> only_origin = {{"x", "d", 0.0, 0.0}};
    CHECK_THROWS_AS(from_life_table(only_origin, "x", "d"), ValidationError);
    const std::vector<LifeTableRecord> bad_origin = {{"x", "d", 0.0, 0.1}, {"x", "d", 1.0, 0.2}};
    CHECK_THROWS_AS(from_life_table(bad_origin, "x", "d"), ValidationError);
}
