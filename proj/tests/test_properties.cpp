// Randomized invariants across modules. Every generator is seeded.
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "comolife/decrement.hpp"
#include "comolife/group.hpp"
#include "comolife/simulate.hpp"
#include "oracles.hpp"

using namespace comolife;

namespace {

std::vector<CopulaSpec> all_families(std::size_t m = 2) {
    std::vector<CopulaSpec> out;
    for (double t : {0.5, 1.0, 2.0, 5.0}) out.push_back(CopulaSpec::clayton(t, m));
    for (double t : {1.0, 1.5, 2.0, 4.0}) out.push_back(CopulaSpec::gumbel(t, m));
    out.push_back(CopulaSpec::independence(m));
    out.push_back(CopulaSpec::comonotone(m));
    return out;
}

std::vector<double> uniform_point(std::mt19937_64& rng, std::size_t m) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(m);
    for (auto& x : p) x = u(rng);
    return p;
}

} // namespace

TEST_CASE("grounding, margins and Frechet bounds in two and three dimensions") {
    std::mt19937_64 rng(1);
    for (std::size_t m : {2u, 3u}) {
        for (const auto& c : all_families(m)) {
            for (int i = 0; i < 300; ++i) {
                auto u = uniform_point(rng, m);
                const double v = copula_cdf(c, u);
                double sum = 0.0;
                for (double x : u) sum += x;
                CHECK(v >= std::max(sum - static_cast<double>(m) + 1.0, 0.0) - 1e-12);
                CHECK(v <= *std::min_element(u.begin(), u.end()) + 1e-12);
                const std::size_t j = static_cast<std::size_t>(i) % m;
                auto grounded = u;
                grounded[j] = 0.0;
                CHECK(copula_cdf(c, grounded) == 0.0);
                std::vector<double> margin(m, 1.0);
                margin[j] = u[j];
                CHECK(copula_cdf(c, margin) == doctest::Approx(u[j]).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("2-increasing rectangles") {
    std::mt19937_64 rng(2);
    for (const auto& c : all_families()) {
        for (int i = 0; i < 500; ++i) {
            auto a = uniform_point(rng, 2), b = uniform_point(rng, 2);
            for (int k = 0; k < 2; ++k)
                if (a[k] > b[k]) std::swap(a[k], b[k]);
            const std::array<double, 2> bb{b[0], b[1]}, ab{a[0], b[1]}, ba{b[0], a[1]}, aa{a[0], a[1]};
            CHECK(copula_cdf(c, bb) - copula_cdf(c, ab) - copula_cdf(c, ba) + copula_cdf(c, aa) >= -1e-12);
        }
    }
}

TEST_CASE("gumbel with theta 1 is independence") {
    std::mt19937_64 rng(3);
    for (std::size_t m : {2u, 4u}) {
        for (int i = 0; i < 200; ++i) {
            const auto u = uniform_point(rng, m);
            CHECK(copula_cdf(CopulaSpec::gumbel(1.0, m), u) ==
                  doctest::Approx(copula_cdf(CopulaSpec::independence(m), u)).epsilon(1e-12));
        }
    }
}

TEST_CASE("survival copula of independence and comonotone is exact") {
    std::mt19937_64 rng(4);
    for (std::size_t m : {2u, 3u, 5u}) {
        for (int i = 0; i < 100; ++i) {
            const auto s = uniform_point(rng, m);
            double prod = 1.0;
            for (double x : s) prod *= x;
            CHECK(survival_copula_value(CopulaSpec::independence(m), s) == prod);
            CHECK(survival_copula_value(CopulaSpec::comonotone(m), s) == *std::min_element(s.begin(), s.end()));
        }
    }
}

TEST_CASE("partials are conditional probabilities") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> inner(0.01, 0.99);
    for (const auto& c : all_families()) {
        if (c.family() == CopulaFamily::comonotone) continue;
        for (int i = 0; i < 300; ++i) {
            const std::array<double, 2> u{inner(rng), inner(rng)};
            for (std::size_t j = 0; j < 2; ++j) {
                const double p = copula_partial(c, u, j);
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
                const double q = survival_copula_partial(c, u, j);
                CHECK(q >= -1e-12);
                CHECK(q <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("quantile Galois property and survival plus cdf") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> level(0.0, 0.999);
    std::uniform_real_distribution<double> when(0.0, 20.0);
    const std::vector<NetSurvival> nets{NetSurvival::exponential(0.4), NetSurvival::weibull(1.7, 6.0),
                                        NetSurvival::gompertz(0.002, 1.12),
                                        NetSurvival::tabular({0, 2, 5, 9, 15}, {1, 0.9, 0.9, 0.4, 0.05})};
    for (const auto& net : nets) {
        for (int i = 0; i < 2000; ++i) {
            const double p = level(rng);
            const double t = when(rng);
            const double q = net.quantile(p);
            CHECK((net.cdf(t) >= p) == (t >= q));
            CHECK(net.survival(t) + net.cdf(t) == 1.0);
            if (!net.is_tabular()) CHECK(std::abs(net.cdf(q) - p) <= 1e-9);
        }
    }
}

TEST_CASE("dominance inequalities for random time vectors") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> when(0.0, 8.0);
    std::uniform_real_distribution<double> rate(0.05, 1.5);
    for (std::size_t n : {2u, 3u}) {
        for (const auto& c : {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(1.5), CopulaSpec::independence()}) {
            for (int trial = 0; trial < 100; ++trial) {
                std::vector<Life> lives;
                for (std::size_t l = 0; l < n; ++l)
                    lives.push_back({"l" + std::to_string(l), {NetSurvival::exponential(rate(rng)),
                                                               NetSurvival::weibull(1.3, 1.0 / rate(rng))}});
                const GroupStatus g(lives, Status::joint_survival);
                std::vector<GroupTimeVector> tv;
                for (std::size_t i = 0; i < 2; ++i) {
                    GroupTimeVector v{i, {}};
                    for (std::size_t l = 0; l < n; ++l) v.times.push_back(when(rng));
                    tv.push_back(v);
                }
                const double lower = group_joint_cdf(g, c, tv);
                const double upper = group_envelope_cdf(g, c, tv);
                for (std::size_t l = 0; l < n; ++l) {
                    const double rep = representative_joint_cdf(g, c, tv, l);
                    CHECK(lower <= rep + 1e-12);
                    CHECK(rep <= upper + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("literal survival composition does not dominate a representative cdf") {
    // C(F_l) <= C(1 - max F) fails once the decrement probabilities are large:
    // the left side tends to 1 while the right side tends to 0.
    const GroupStatus g({{"x", {NetSurvival::exponential(1.0), NetSurvival::exponential(1.0)}},
                         {"y", {NetSurvival::exponential(2.0), NetSurvival::exponential(2.0)}}},
                        Status::joint_survival);
    const std::vector<GroupTimeVector> tv{{0, {3.0, 3.0}}, {1, {3.0, 3.0}}};
    const auto c = CopulaSpec::clayton(1.0);
    CHECK(representative_joint_cdf(g, c, tv, 0) > group_joint_survival(g, c, tv, SurvivalComposition::literal));
}

TEST_CASE("group joint functions are monotone in every coordinate") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> when(0.0, 5.0);
    const GroupStatus g({{"x", {NetSurvival::exponential(0.3), NetSurvival::weibull(2.0, 4.0)}},
                         {"y", {NetSurvival::exponential(0.8), NetSurvival::gompertz(0.01, 1.3)}}},
                        Status::joint_survival);
    const auto c = CopulaSpec::gumbel(2.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<GroupTimeVector> tv{{0, {when(rng), when(rng)}}, {1, {when(rng), when(rng)}}};
        const double cdf = group_joint_cdf(g, c, tv);
        const double surv = group_joint_survival(g, c, tv);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t l = 0; l < 2; ++l) {
                auto later = tv;
                later[i].times[l] += 0.5;
                CHECK(group_joint_cdf(g, c, later) >= cdf - 1e-15);
                CHECK(group_joint_survival(g, c, later) <= surv + 1e-15);
            }
    }
}

TEST_CASE("joint and last-survivor statuses coincide for identical lives") {
    const std::vector<NetSurvival> causes{NetSurvival::weibull(1.2, 7.0), NetSurvival::exponential(0.2)};
    const GroupStatus joint({{"x", causes}, {"y", causes}, {"z", causes}}, Status::joint_survival);
    const GroupStatus last({{"x", causes}, {"y", causes}, {"z", causes}}, Status::last_survivor);
    for (double t : {0.0, 0.5, 2.0, 10.0})
        for (std::size_t i = 0; i < 2; ++i) CHECK(status_cause_cdf(joint, i, t) == status_cause_cdf(last, i, t));
}

TEST_CASE("consistent composition matches the group sampler") {
    const std::size_t n = 100000;
    const GroupStatus g({{"x", {NetSurvival::exponential(0.5), NetSurvival::exponential(1.0)}},
                         {"y", {NetSurvival::exponential(1.5), NetSurvival::exponential(0.4)}}},
                        Status::joint_survival);
    const auto c = CopulaSpec::clayton(1.0);
    const auto s = sample_group_model(g, c, n, 31);
    for (const auto& probe : {std::array<double, 4>{0.3, 0.2, 0.4, 0.5}, std::array<double, 4>{1.0, 0.5, 0.2, 1.5}}) {
        const std::vector<GroupTimeVector> tv{{0, {probe[0], probe[1]}}, {1, {probe[2], probe[3]}}};
        const double p = group_joint_survival(g, c, tv);
        // Columns are cause-major: cause 0 lives x, y, then cause 1.
        const auto e = empirical_joint_survival(s, probe);
        CHECK(std::abs(e.value - p) <= 3.0 * std::sqrt(p * (1 - p) / n));
    }
}

TEST_CASE("partition identity and boundary for random parametric nets") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    std::uniform_real_distribution<double> shape(0.7, 2.5);
    SolverConfig cfg;
    cfg.step = 0.05;
    cfg.horizon = 10.0;
    for (const auto& c : all_families()) {
        const std::vector<NetSurvival> nets{NetSurvival::exponential(rate(rng)),
                                            NetSurvival::weibull(shape(rng), 1.0 / rate(rng))};
        const auto crude = crude_from_nets(c, nets, cfg);
        const std::size_t last = crude.grid().size() - 1;
        CHECK(crude.truncation_remainder() == doctest::Approx(overall_survival(c, nets, cfg.horizon)));
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(crude.curve(j)[last] == 0.0);
            for (std::size_t k = 1; k <= last; ++k) CHECK(crude.curve(j)[k] <= crude.curve(j)[k - 1]);
        }
        for (std::size_t k = 0; k <= last; ++k) {
            const double total = crude.curve(0)[k] + crude.curve(1)[k] + crude.truncation_remainder();
            CHECK(std::abs(total - overall_survival(c, nets, crude.grid()[k])) <= 1e-6);
        }
    }
}

TEST_CASE("halving the step moves recovered nets by less than the round-trip tolerance") {
    const std::vector<NetSurvival> nets{NetSurvival::exponential(1.0), NetSurvival::weibull(1.5, 2.0)};
    for (const auto& c : {CopulaSpec::clayton(1.0), CopulaSpec::gumbel(2.0)}) {
        SolverConfig coarse;
        coarse.step = 0.02;
        coarse.horizon = 4.0;
        SolverConfig fine = coarse;
        fine.step = 0.01;
        const auto a = nets_from_crude(c, crude_from_nets(c, nets, coarse), coarse);
        const auto b = nets_from_crude(c, crude_from_nets(c, nets, fine), fine);
        for (std::size_t j = 0; j < 2; ++j)
            for (double t : make_grid(coarse))
                CHECK(std::abs(a.nets[j].survival(t) - b.nets[j].survival(t)) <= 1e-3);
    }
}

TEST_CASE("sampled marginals lie in the DKW band") {
    const std::size_t n = 100000;
    const std::vector<NetSurvival> nets{NetSurvival::exponential(1.0), NetSurvival::weibull(2.0, 1.5)};
    const double band = oracle::dkw_band(n, 0.01);
    for (const auto& c : {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0), CopulaSpec::independence()}) {
        const auto s = sample_dependent_causes(c, nets, n, 12);
        for (std::size_t j = 0; j < 2; ++j) {
            auto col = s.column(j);
            std::sort(col.begin(), col.end());
            double worst = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double f = nets[j].cdf(col[k]);
                worst = std::max({worst, std::abs(static_cast<double>(k + 1) / n - f),
                                  std::abs(static_cast<double>(k) / n - f)});
            }
            CHECK(worst <= band);
        }
    }
}

TEST_CASE("identical seeds give identical samples") {
    const std::vector<NetSurvival> nets{NetSurvival::gompertz(0.001, 1.1), NetSurvival::weibull(2.0, 1.5)};
    for (const auto& c : {CopulaSpec::clayton(2.0), CopulaSpec::gumbel(2.0)})
        CHECK(sample_dependent_causes(c, nets, 20000, 99) == sample_dependent_causes(c, nets, 20000, 99));
}
