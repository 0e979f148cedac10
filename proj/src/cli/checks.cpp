#include <algorithm>
#include <cmath>
#include <functional>

#include "comolife/cli.hpp"
#include "comolife/errors.hpp"
#include "comolife/rng.hpp"
#include "comolife/simulate.hpp"

namespace comolife::cli {

using nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kCheckSeed = 20261015;

struct Outcome {
    double measured;
    double threshold;
    std::string detail;
};

std::vector<CopulaSpec> axiom_families() {
    return {CopulaSpec::clayton(0.5), CopulaSpec::clayton(1), CopulaSpec::clayton(2), CopulaSpec::clayton(5),
            CopulaSpec::gumbel(1),    CopulaSpec::gumbel(1.5), CopulaSpec::gumbel(2), CopulaSpec::gumbel(4),
            CopulaSpec::independence(), CopulaSpec::comonotone()};
}

Outcome copula_axioms() {
    double worst = 0.0;
    for (const auto& spec : axiom_families()) {
        ScenarioStream rng(kCheckSeed, 1);
        for (int k = 0; k < 2000; ++k) {
            const double a = rng.uniform(), b = rng.uniform(), c = rng.uniform(), d = rng.uniform();
            const double u[2] = {a, b};
            const double cu = copula_cdf(spec, u);
            const double g1[2] = {0.0, b}, g2[2] = {a, 0.0}, m1[2] = {a, 1.0}, m2[2] = {1.0, b};
            worst = std::max({worst, std::abs(copula_cdf(spec, g1)), std::abs(copula_cdf(spec, g2)),
                              std::abs(copula_cdf(spec, m1) - a), std::abs(copula_cdf(spec, m2) - b),
                              std::max(0.0, std::max(a + b - 1.0, 0.0) - cu), std::max(0.0, cu - std::min(a, b))});
            const double lo[2] = {std::min(a, c), std::min(b, d)}, hi[2] = {std::max(a, c), std::max(b, d)};
            const double p11[2] = {hi[0], hi[1]}, p10[2] = {hi[0], lo[1]}, p01[2] = {lo[0], hi[1]};
            const double vol = copula_cdf(spec, p11) - copula_cdf(spec, p10) - copula_cdf(spec, p01) +
                               copula_cdf(spec, lo);
            worst = std::max(worst, -vol);
        }
    }
    return {worst, 1e-12, "grounding, margins, Frechet bounds, 2-increasing; 2000 points per family"};
}

Outcome tau_round_trip() {
    double worst = 0.0;
    for (auto family : {CopulaFamily::clayton, CopulaFamily::gumbel}) {
        for (int k = 1; k <= 9; ++k) {
            const double tau = 0.1 * k;
            const double theta = theta_from_tau(family, tau);
            worst = std::max(worst, std::abs(kendall_tau(CopulaSpec(family, theta, 2)) - tau));
        }
    }
    return {worst, 1e-9, "theta_from_tau then kendall_tau, tau = 0.1..0.9"};
}

Outcome partial_derivatives() {
    double worst = 0.0;
    const std::vector<CopulaSpec> specs = {CopulaSpec::clayton(1), CopulaSpec::gumbel(2), CopulaSpec::independence()};
    for (const auto& spec : specs) {
        ScenarioStream rng(kCheckSeed, 2);
        for (int k = 0; k < 200; ++k) {
            double u[2] = {0.05 + 0.9 * rng.uniform(), 0.05 + 0.9 * rng.uniform()};
            for (std::size_t j = 0; j < 2; ++j) {
                auto fd = [&](double h) {
                    double up[2] = {u[0], u[1]}, dn[2] = {u[0], u[1]};
                    up[j] += h;
                    dn[j] -= h;
                    return (copula_cdf(spec, up) - copula_cdf(spec, dn)) / (2.0 * h);
                };
                const double numeric = (4.0 * fd(5e-4) - fd(1e-3)) / 3.0;
                const double analytic = copula_partial(spec, u, j);
                worst = std::max(worst, std::abs(numeric - analytic) / std::max(std::abs(analytic), 1e-300));
            }
        }
    }
    return {worst, 1e-6, "relative error of copula_partial against Richardson central differences"};
}

struct Setup {
    CopulaSpec copula;
    std::vector<NetSurvival> nets;
    std::string label;
};

Setup decrement_setup(const RunConfig& rc) {
    if (rc.has_copula() && rc.lives.size() == 1 && rc.causes.size() >= 2) {
        const auto nets = rc.nets_of_single_life();
        const auto copula = rc.copula(nets.size());
        return {copula, nets, copula.describe() + " with configured marginals"};
    }
    return {CopulaSpec::clayton(1),
            {NetSurvival::exponential(1.0, "1"), NetSurvival::exponential(2.0, "2")},
            "clayton(theta=1), exponential nets 1 and 2"};
}

Outcome partition_identity(const Setup& s, const SolverConfig& cfg) {
    const auto crude = crude_from_nets(s.copula, s.nets, cfg);
    double worst = 0.0;
    for (std::size_t k = 0; k < crude.grid().size(); ++k) {
        double total = crude.truncation_remainder();
        for (const auto& c : crude.curves()) total += c[k];
        worst = std::max(worst, std::abs(total - overall_survival(s.copula, s.nets, crude.grid()[k])));
    }
    return {worst, 1e-6, "sum of crude curves plus truncation remainder against overall survival; " + s.label};
}

Outcome net_round_trip(const Setup& s, const SolverConfig& cfg, double& max_residual) {
    const auto crude = crude_from_nets(s.copula, s.nets, cfg);
    const auto rec = nets_from_crude(s.copula, crude, cfg);
    double worst = 0.0;
    for (std::size_t j = 0; j < s.nets.size(); ++j)
        for (double t : crude.grid()) worst = std::max(worst, std::abs(rec.nets[j].survival(t) - s.nets[j].survival(t)));
    max_residual = rec.max_residual;
    return {worst, 1e-3, "nets -> crude -> nets sup error; " + s.label};
}

Outcome monte_carlo_crude(const Setup& s, const SolverConfig& cfg, std::uint64_t seed, std::size_t n) {
    const auto crude = crude_from_nets(s.copula, s.nets, cfg);
    const auto samples = sample_dependent_causes(s.copula, s.nets, n, seed);
    double worst = 0.0;  // in standard errors
    const std::size_t points = crude.grid().size() - 1;
    for (int q = 0; q < 10; ++q) {
        const std::size_t k = points * static_cast<std::size_t>(q) / 20;
        for (std::size_t j = 0; j < s.nets.size(); ++j) {
            const double model = crude.curve(j)[k];
            const auto e = empirical_crude(samples, j, crude.grid()[k]);
            const double se = std::sqrt(std::max(model * (1.0 - model), 1e-300) / static_cast<double>(n));
            // Curves are truncated at the horizon; the tail beyond it belongs to
            // the empirical frequency as well, so compare against an upper
            // bound that includes it.
            const double diff = std::abs(e.value - model) > crude.truncation_remainder()
                                    ? std::abs(e.value - model) - crude.truncation_remainder()
                                    : 0.0;
            worst = std::max(worst, diff / se);
        }
    }
    return {worst, 4.0, "empirical crude frequencies vs crude_from_nets in binomial standard errors, N=" +
                            std::to_string(n) + "; " + s.label};
}

Outcome example_total_decrement() {
    const double p1[2] = {0.2, 0.3}, p2[2] = {0.5, 0.5};
    const double e1 = std::abs(total_decrement_from_status_cdfs(CopulaSpec::independence(), p1) - 0.44);
    const double e2 = std::abs(total_decrement_from_status_cdfs(CopulaSpec::clayton(1), p2) - 2.0 / 3.0);
    return {std::max(e1, e2), 1e-12, "independence (0.2, 0.3) -> 0.44; clayton(1) (0.5, 0.5) -> 2/3"};
}

GroupStatus sample_group(std::size_t n) {
    std::vector<Life> lives;
    for (std::size_t l = 0; l < n; ++l) {
        const double k = static_cast<double>(l);
        lives.push_back({"l" + std::to_string(l + 1),
                         {NetSurvival::exponential(0.5 + 0.5 * k), NetSurvival::weibull(1.5 + 0.25 * k, 2.0)}});
    }
    return GroupStatus(std::move(lives), Status::joint_survival);
}

Outcome comonotonic_support() {
    const auto group = sample_group(3);
    const auto samples = sample_comonotonic_group(group, 0, 1000, kCheckSeed);
    std::size_t bad = 0;
    for (std::size_t a = 0; a < samples.scenarios(); ++a) {
        for (std::size_t b = a + 1; b < samples.scenarios(); ++b) {
            bool le = true, ge = true;
            for (std::size_t c = 0; c < samples.columns(); ++c) {
                le = le && samples.at(a, c) <= samples.at(b, c);
                ge = ge && samples.at(a, c) >= samples.at(b, c);
            }
            bad += !(le || ge);
        }
    }
    return {static_cast<double>(bad), 0.0, "unordered row pairs among 1000 comonotonic rows"};
}

Outcome dominance() {
    double worst = 0.0;
    const std::vector<CopulaSpec> specs = {CopulaSpec::clayton(1), CopulaSpec::gumbel(2), CopulaSpec::independence()};
    for (std::size_t n : {2u, 3u}) {
        const auto group = sample_group(n);
        ScenarioStream rng(kCheckSeed, 3 + n);
        for (int k = 0; k < 1000; ++k) {
            std::vector<GroupTimeVector> tv(2);
            for (std::size_t i = 0; i < 2; ++i) {
                tv[i].cause = i;
                for (std::size_t l = 0; l < n; ++l) tv[i].times.push_back(5.0 * rng.uniform());
            }
            for (const auto& spec : specs) {
                const double lower = group_joint_cdf(group, spec, tv);
                const double upper = group_envelope_cdf(group, spec, tv);
                for (std::size_t l = 0; l < n; ++l) {
                    const double mid = representative_joint_cdf(group, spec, tv, l);
                    worst = std::max({worst, lower - mid, mid - upper});
                }
            }
        }
    }
    return {worst, 1e-12, "C(min F) <= C(F_l) <= C(max F) over 1000 random time vectors, n = 2, 3"};
}

Outcome mixed_partials(const SolverConfig& cfg) {
    double worst = 0.0;
    std::vector<Life> lives = {{"x", {NetSurvival::exponential(0.5), NetSurvival::exponential(1.5)}},
                               {"y", {NetSurvival::exponential(1.0), NetSurvival::exponential(0.8)}}};
    const GroupStatus group(lives, Status::joint_survival);
    const std::vector<CopulaSpec> specs = {CopulaSpec::independence(), CopulaSpec::clayton(1), CopulaSpec::gumbel(2)};
    ScenarioStream rng(kCheckSeed, 9);
    for (const auto& spec : specs) {
        for (int k = 0; k < 10; ++k) {
            const double t[2] = {0.1 + 2.0 * rng.uniform(), 0.1 + 2.0 * rng.uniform()};
            try {
                const auto r = mixed_partial_check(spec, group, 0, t, cfg);
                worst = std::max(worst, r.residual / r.tolerance);
            } catch (const NonDifferentiable&) {
            }
        }
    }
    return {worst, 1.0, "mixed partial residual as a fraction of its tolerance, smooth points only"};
}

} // namespace

Report run_checks(const RunConfig& rc) {
    Report rep;
    rep.command = "check";
    Table table{"checks", "check", {"check", "passed", "measured", "threshold", "detail"}, {}};
    std::size_t passed = 0, failed = 0;
    auto record = [&](const std::string& name, const std::function<Outcome()>& fn) {
        try {
            const auto o = fn();
            const bool ok = o.measured <= o.threshold;
            (ok ? passed : failed)++;
            table.rows.push_back({name, ok, o.measured, o.threshold, o.detail});
        } catch (const Error& e) {
            ++failed;
            table.rows.push_back({name, false, ordered_json(), ordered_json(),
                                  std::string(e.kind()) + ": " + e.what()});
        }
    };

    const auto setup = decrement_setup(rc);
    const std::uint64_t seed = rc.seed.value_or(kCheckSeed);
    double residual = 0.0;

    record("copula_axioms", copula_axioms);
    record("tau_round_trip", tau_round_trip);
    record("partial_derivatives", partial_derivatives);
    record("partition_identity", [&] { return partition_identity(setup, rc.solver); });
    if (setup.copula.family() != CopulaFamily::comonotone) {
        record("net_round_trip", [&] { return net_round_trip(setup, rc.solver, residual); });
        record("newton_residual", [&] {
            return Outcome{residual, 1e-8, "largest Newton residual of the round trip"};
        });
    }
    if (setup.copula.family() != CopulaFamily::comonotone &&
        (setup.copula.dimension() == 2 || setup.copula.family() == CopulaFamily::independence))
        record("monte_carlo_crude", [&] { return monte_carlo_crude(setup, rc.solver, seed, 20000); });
    record("example_total_decrement", example_total_decrement);
    record("comonotonic_support", comonotonic_support);
    record("dominance_inequalities", dominance);
    record("mixed_partial_identity", [&] { return mixed_partials(rc.solver); });

    rep.tables.push_back(std::move(table));
    rep.diagnostics["passed"] = passed;
    rep.diagnostics["failed"] = failed;
    rep.success = failed == 0;
    if (!rep.success) rep.warnings.push_back(std::to_string(failed) + " check(s) failed");
    return rep;
}

} // namespace comolife::cli
