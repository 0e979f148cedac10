#include "comolife/marginals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace comolife {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& message) {
    if (!ok) throw DomainError(message);
}

void validate(const NetSurvival::Law& law) {
    std::visit(overloaded{
                   [](const Exponential& e) {
                       require(e.rate > 0.0 && std::isfinite(e.rate), "exponential rate must be > 0");
                   },
                   [](const Weibull& w) {
                       require(w.shape > 0.0 && std::isfinite(w.shape), "weibull shape must be > 0");
                       require(w.scale > 0.0 && std::isfinite(w.scale), "weibull scale must be > 0");
                   },
                   [](const Gompertz& g) {
                       require(g.b > 0.0 && std::isfinite(g.b), "gompertz B must be > 0");
                       require(g.c > 1.0 && std::isfinite(g.c), "gompertz c must be > 1");
                   },
                   [](const Tabular& tab) {
                       require(tab.times.size() == tab.survival.size(),
                               "tabular law needs one survival value per time");
                       require(tab.times.size() >= 2, "tabular law needs at least two knots");
                       require(tab.times.front() == 0.0 && tab.survival.front() == 1.0,
                               "tabular law must start at (0, 1)");
                       for (std::size_t k = 1; k < tab.times.size(); ++k) {
                           std::ostringstream os;
                           os << "tabular knot " << k << " (t=" << tab.times[k]
                              << ", S=" << tab.survival[k] << ")";
                           require(tab.times[k] > tab.times[k - 1] && std::isfinite(tab.times[k]),
                                   os.str() + ": times must be strictly increasing");
                           require(tab.survival[k] >= 0.0 && tab.survival[k] <= 1.0,
                                   os.str() + ": survival outside [0, 1]");
                           require(tab.survival[k] <= tab.survival[k - 1],
                                   os.str() + ": survival must be nonincreasing");
                       }
                   },
               },
               law);
}

// Index k of the segment [t_k, t_{k+1}) containing t; assumes t < t_back.
std::size_t segment_of(const Tabular& tab, double t) {
    const auto it = std::upper_bound(tab.times.begin(), tab.times.end(), t);
    return static_cast<std::size_t>(it - tab.times.begin()) - 1;
}

// Narrows q to the smallest double with cdf(q) >= p by bracketing and then
// bisecting on the bit patterns of nonnegative doubles.
template <typename Cdf>
double generalized_inverse(const Cdf& cdf, double p, double guess) {
    if (p <= 0.0) return 0.0;
    if (!std::isfinite(guess)) guess = 1.0;
    guess = std::max(guess, 0.0);

    double hi = guess;
    double step = std::max(std::abs(guess) * 1e-12, 1e-300);
    while (cdf(hi) < p) {
        hi = guess + step;
        step *= 2.0;
        if (!std::isfinite(hi)) return inf;
    }
    double lo = std::min(guess, hi);
    step = std::max(std::abs(guess) * 1e-12, 1e-300);
    while (lo > 0.0 && cdf(lo) >= p) {
        lo = std::max(guess - step, 0.0);
        step *= 2.0;
    }
    if (cdf(lo) >= p) return lo;  // only when lo == 0

    auto lo_bits = std::bit_cast<std::uint64_t>(lo);
    auto hi_bits = std::bit_cast<std::uint64_t>(hi);
    while (hi_bits - lo_bits > 1) {
        const std::uint64_t mid_bits = lo_bits + (hi_bits - lo_bits) / 2;
        if (cdf(std::bit_cast<double>(mid_bits)) >= p)
            hi_bits = mid_bits;
        else
            lo_bits = mid_bits;
    }
    return std::bit_cast<double>(hi_bits);
}

} // namespace

NetSurvival::NetSurvival(Law law, std::string label) : law_(std::move(law)), label_(std::move(label)) {
    validate(law_);
}

std::string_view NetSurvival::kind() const noexcept {
    return std::visit(overloaded{
                          [](const Exponential&) { return std::string_view("exponential"); },
                          [](const Weibull&) { return std::string_view("weibull"); },
                          [](const Gompertz&) { return std::string_view("gompertz"); },
                          [](const Tabular&) { return std::string_view("tabular"); },
                      },
                      law_);
}

SurvivalPoint NetSurvival::evaluate(double t) const {
    if (!(t >= 0.0)) {
        std::ostringstream os;
        os << "survival queried at negative time " << t;
        throw DomainError(os.str());
    }
    return std::visit(
        overloaded{
            [t](const Exponential& e) { return SurvivalPoint{std::exp(-e.rate * t), false}; },
            [t](const Weibull& w) {
                return SurvivalPoint{std::exp(-std::pow(t / w.scale, w.shape)), false};
            },
            [t](const Gompertz& g) {
                const double lc = std::log(g.c);
                return SurvivalPoint{std::exp(-g.b / lc * std::expm1(t * lc)), false};
            },
            [t](const Tabular& tab) {
                if (t >= tab.times.back()) return SurvivalPoint{tab.survival.back(), t > tab.times.back()};
                const std::size_t k = segment_of(tab, t);
                const double w = (t - tab.times[k]) / (tab.times[k + 1] - tab.times[k]);
                const double s = tab.survival[k] + w * (tab.survival[k + 1] - tab.survival[k]);
                return SurvivalPoint{std::clamp(s, tab.survival[k + 1], tab.survival[k]), false};
            },
        },
        law_);
}

double NetSurvival::density(double t) const {
    const double s = survival(t);
    return std::visit(overloaded{
                          [&](const Exponential& e) { return e.rate * s; },
                          [&](const Weibull& w) {
                              const double z = t / w.scale;
                              return w.shape / w.scale * std::pow(z, w.shape - 1.0) * s;
                          },
                          [&](const Gompertz& g) { return g.b * std::pow(g.c, t) * s; },
                          [&](const Tabular& tab) {
                              if (t >= tab.times.back()) return 0.0;
                              const std::size_t k = segment_of(tab, t);
                              return (tab.survival[k] - tab.survival[k + 1]) /
                                     (tab.times[k + 1] - tab.times[k]);
                          },
                      },
                      law_);
}

double NetSurvival::quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) {
        std::ostringstream os;
        os << "quantile level " << p << " outside [0, 1)";
        throw DomainError(os.str());
    }
    if (p == 0.0) return 0.0;
    const double guess = std::visit(
        overloaded{
            [p](const Exponential& e) { return -std::log1p(-p) / e.rate; },
            [p](const Weibull& w) { return w.scale * std::pow(-std::log1p(-p), 1.0 / w.shape); },
            [p](const Gompertz& g) {
                const double lc = std::log(g.c);
                return std::log1p(-std::log1p(-p) * lc / g.b) / lc;
            },
            [p](const Tabular& tab) {
                // Work in survival terms: 1 - p is exact where 1 - S(t) may not be.
                const double q = 1.0 - p;
                for (std::size_t k = 1; k < tab.times.size(); ++k) {
                    if (tab.survival[k] > q) continue;
                    const double w = (tab.survival[k - 1] - q) / (tab.survival[k - 1] - tab.survival[k]);
                    return tab.times[k - 1] + w * (tab.times[k] - tab.times[k - 1]);
                }
                return inf;
            },
        },
        law_);
    if (!std::isfinite(guess) || std::holds_alternative<Tabular>(law_)) return guess;
    return generalized_inverse([this](double t) { return cdf(t); }, p, guess);
}

double survival_at(const NetSurvival& net, double t) { return net.survival(t); }

double quantile(const NetSurvival& net, double p) { return net.quantile(p); }

NetSurvival from_life_table(std::span<const LifeTableRecord> records, std::string_view life,
                            std::string_view cause) {
    std::vector<double> times;
    std::vector<double> survival;
    double last_t = -1.0;
    double last_q = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.life != life || r.cause != cause) continue;
        auto fail = [&](const char* why) {
            std::ostringstream os;
            os << "life table record " << i << " (life=" << r.life << ", cause=" << r.cause
               << ", t=" << r.t << ", q=" << r.q << "): " << why;
            throw ValidationError(os.str());
        };
        if (!(r.t >= 0.0) || !std::isfinite(r.t)) fail("t must be a finite time >= 0");
        if (!(r.q >= 0.0 && r.q <= 1.0)) fail("q must lie in [0, 1]");
        if (r.t <= last_t) fail("t must be strictly increasing within a (life, cause) key");
        if (r.q < last_q) fail("q must be nondecreasing in t");
        if (r.t == 0.0 && r.q != 0.0) fail("q at t = 0 must be 0");
        if (times.empty() && r.t > 0.0) {
            times.push_back(0.0);
            survival.push_back(1.0);
        }
        times.push_back(r.t);
        survival.push_back(1.0 - r.q);
        last_t = r.t;
        last_q = r.q;
    }
    if (times.empty()) {
        throw NotFound("no life table records for life '" + std::string(life) + "' and cause '" +
                       std::string(cause) + "'");
    }
    if (times.size() == 1) {
        throw ValidationError("life table key (" + std::string(life) + ", " + std::string(cause) +
                              ") has only the t = 0 record");
    }
    std::string label = std::string(life) + "." + std::string(cause);
    return NetSurvival::tabular(std::move(times), std::move(survival), std::move(label));
}

} // namespace comolife
