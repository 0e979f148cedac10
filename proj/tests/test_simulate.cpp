#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "comolife/decrement.hpp"
#include "comolife/simulate.hpp"
#include "oracles.hpp"

using namespace comolife;

namespace {

const std::vector<NetSurvival> exp12{NetSurvival::exponential(1.0), NetSurvival::exponential(2.0)};

} // namespace

TEST_CASE("sample matrix layout and validation") {
    const SampleMatrix m(2, 2, 3, 9, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(m.columns() == 6);
    CHECK(m.at(1, 0) == 6);
    CHECK(m.at(1, 1, 2) == 11);
    CHECK(m.row(1).size() == 6);
    CHECK(m.row(1)[0] == 6);
    CHECK(m.column(3) == std::vector<double>{3, 9});
    CHECK(m.seed() == 9);
    CHECK_THROWS_AS(m.column(6), DomainError);
    CHECK_THROWS_AS(SampleMatrix(2, 1, 1, 0, {1.0}), DomainError);
    CHECK_THROWS_AS(SampleMatrix(1, 1, 1, 0, {-1.0}), DomainError);
    CHECK_THROWS_AS(SampleMatrix(1, 1, 1, 0, {std::nan("")}), DomainError);
    CHECK_THROWS_AS(SampleMatrix(1, 0, 1, 0, {}), DomainError);
}

TEST_CASE("copula draws are deterministic and in the unit cube") {
    for (const auto& c : {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(3.0), CopulaSpec::independence(4),
                          CopulaSpec::comonotone(3)}) {
        for (std::uint64_t s = 0; s < 50; ++s) {
            const auto v = draw_copula(c, 11, s);
            REQUIRE(v.size() == c.dimension());
            CHECK(v == draw_copula(c, 11, s));
            for (double x : v) {
                CHECK(x >= 0.0);
                CHECK(x < 1.0);
            }
        }
    }
    const auto co = draw_copula(CopulaSpec::comonotone(3), 1, 1);
    CHECK(co[0] == co[1]);
    CHECK(co[1] == co[2]);
    CHECK_THROWS_AS(draw_copula(CopulaSpec::clayton(1.0, 3), 1, 1), UnsupportedDimension);
}

TEST_CASE("copula draws reproduce the copula cdf") {
    const std::size_t n = 40000;
    for (const auto& c : {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0)}) {
        for (const auto& probe : {std::array<double, 2>{0.3, 0.4}, std::array<double, 2>{0.7, 0.6}}) {
            std::size_t hits = 0;
            for (std::size_t s = 0; s < n; ++s) {
                const auto v = draw_copula(c, 5, s);
                hits += v[0] <= probe[0] && v[1] <= probe[1];
            }
            const double p = copula_cdf(c, probe);
            const double se = std::sqrt(p * (1 - p) / n);
            CHECK(std::abs(static_cast<double>(hits) / n - p) < 4.0 * se);
        }
    }
}

TEST_CASE("sampling is independent of the thread split") {
    const auto a = sample_dependent_causes(CopulaSpec::clayton(1.0), exp12, 10000, 77);
    const auto b = sample_dependent_causes(CopulaSpec::clayton(1.0), exp12, 10000, 77);
    CHECK(a == b);
    const auto head = sample_dependent_causes(CopulaSpec::clayton(1.0), exp12, 100, 77);
    for (std::size_t r = 0; r < 100; ++r)
        for (std::size_t c = 0; c < 2; ++c) CHECK(head.at(r, c) == a.at(r, c));
    const auto other = sample_dependent_causes(CopulaSpec::clayton(1.0), exp12, 100, 78);
    CHECK_FALSE(other.draws() == head.draws());
}

TEST_CASE("sampling argument checks") {
    CHECK_THROWS_AS(sample_dependent_causes(CopulaSpec::clayton(1.0, 3), exp12, 10, 1), DomainError);
    const std::vector<NetSurvival> short_table{NetSurvival::tabular({0.0, 1.0}, {1.0, 0.9}),
                                               NetSurvival::exponential(1.0)};
    CHECK_THROWS_AS(sample_dependent_causes(CopulaSpec::independence(), short_table, 1000, 1), DomainError);
}

TEST_CASE("empirical crude against the competing risks closed form") {
    const std::size_t n = 50000;
    const auto s = sample_dependent_causes(CopulaSpec::independence(), exp12, n, 3);
    for (double t : {0.0, 0.2, 0.5, 1.0}) {
        for (std::size_t j = 0; j < 2; ++j) {
            const auto e = empirical_crude(s, j, t);
            const double p = oracle::crude_exponential(j == 0 ? 1.0 : 2.0, 3.0, t, INFINITY);
            CHECK(e.std_error == doctest::Approx(std::sqrt(e.value * (1 - e.value) / n)));
            CHECK(std::abs(e.value - p) < 4.0 * std::sqrt(p * (1 - p) / n));
        }
        const auto o = empirical_overall_survival(s, t);
        CHECK(std::abs(o.value - std::exp(-3 * t)) < 4.0 * std::sqrt(o.value * (1 - o.value) / n) + 1e-12);
    }
    CHECK_THROWS_AS(empirical_crude(s, 2, 0.1), DomainError);
}

TEST_CASE("empirical crude counts ties and sends them to the lowest cause") {
    const SampleMatrix m(3, 2, 1, 0, {1.0, 1.0, 2.0, 3.0, 5.0, 4.0});
    const auto first = empirical_crude(m, 0, 0.5);
    CHECK(first.value == doctest::Approx(2.0 / 3.0));
    CHECK(first.ties == 1);
    CHECK(empirical_crude(m, 1, 0.5).value == doctest::Approx(1.0 / 3.0));
    const SampleMatrix group(1, 2, 2, 0, {1.0, 2.0, 3.0, 4.0});
    CHECK_THROWS_AS(empirical_crude(group, 0, 0.5), DomainError);
    CHECK(empirical_overall_survival(m, 1.5).value == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("empirical joint cdf and survival") {
    const SampleMatrix m(4, 2, 1, 0, {1, 1, 2, 3, 3, 2, 4, 4});
    const std::array<double, 2> x{2.0, 3.0};
    CHECK(empirical_joint_cdf(m, x).value == doctest::Approx(0.5));
    CHECK(empirical_joint_survival(m, x).value == doctest::Approx(0.25));
    const std::array<double, 1> bad{1.0};
    CHECK_THROWS_AS(empirical_joint_cdf(m, bad), DomainError);
    CHECK_THROWS_AS(empirical_joint_survival(m, bad), DomainError);
}

TEST_CASE("kendall tau estimator matches the pair count") {
    const auto s = sample_dependent_causes(CopulaSpec::gumbel(2.0), exp12, 700, 21);
    const auto x = s.column(0), y = s.column(1);
    const auto e = empirical_kendall_tau(s, 0, 1);
    CHECK(e.value == doctest::Approx(oracle::kendall_tau_pairs(x, y)).epsilon(1e-12));
    CHECK(e.std_error > 0.0);
    CHECK(e.ties == 0);

    const std::vector<double> tx{1, 2, 2, 3, 4, 4}, ty{1, 3, 2, 2, 5, 5};
    const auto t = empirical_kendall_tau(tx, ty);
    CHECK(t.value == doctest::Approx(oracle::kendall_tau_pairs(tx, ty)).epsilon(1e-14));
    CHECK(t.ties == 3);  // two pairs tied in x, two in y, one of them in both

    const std::vector<double> one{1.0};
    CHECK_THROWS_AS(empirical_kendall_tau(one, one), EmptySample);
    const std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(empirical_kendall_tau(two, one), DomainError);
}

TEST_CASE("kendall tau of perfectly ordered data") {
    const std::vector<double> up{1, 2, 3, 4, 5}, down{5, 4, 3, 2, 1};
    CHECK(empirical_kendall_tau(up, up).value == 1.0);
    CHECK(empirical_kendall_tau(up, down).value == -1.0);
}

TEST_CASE("comonotonic group rows are ordered") {
    const GroupStatus g({{"x", {NetSurvival::exponential(0.5), NetSurvival::exponential(1.0)}},
                         {"y", {NetSurvival::weibull(2.0, 3.0), NetSurvival::exponential(0.2)}},
                         {"z", {NetSurvival::gompertz(0.01, 1.2), NetSurvival::exponential(3.0)}}},
                        Status::joint_survival);
    const auto s = sample_comonotonic_group(g, 0, 500, 8);
    CHECK(s.causes() == 1);
    CHECK(s.lives() == 3);
    for (std::size_t a = 0; a < s.scenarios(); ++a)
        for (std::size_t b = a + 1; b < s.scenarios(); ++b) {
            bool le = true, ge = true;
            for (std::size_t c = 0; c < 3; ++c) {
                le = le && s.at(a, c) <= s.at(b, c);
                ge = ge && s.at(a, c) >= s.at(b, c);
            }
            CHECK((le || ge));
        }
    CHECK_THROWS_AS(sample_comonotonic_group(g, 2, 10, 8), DomainError);

    const auto full = sample_group_model(g, CopulaSpec::clayton(1.0), 200, 8);
    CHECK(full.causes() == 2);
    CHECK(full.lives() == 3);
    // Lives share one uniform per cause, so their cdf levels agree.
    for (std::size_t r = 0; r < full.scenarios(); ++r)
        for (std::size_t i = 0; i < 2; ++i) {
            const double level = g.marginal(0, i).cdf(full.at(r, i, 0));
            for (std::size_t l = 1; l < 3; ++l)
                CHECK(g.marginal(l, i).cdf(full.at(r, i, l)) == doctest::Approx(level).epsilon(1e-9));
        }
    CHECK_THROWS_AS(sample_group_model(g, CopulaSpec::clayton(1.0, 3), 10, 8), DomainError);
}
