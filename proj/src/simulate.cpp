#include "comolife/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numeric>
#include <string>
#include <thread>

#include <boost/math/tools/roots.hpp>

#include "comolife/errors.hpp"
#include "comolife/rng.hpp"

namespace comolife {

namespace {

constexpr double kLargestBelowOne = 1.0 - 0x1.0p-53;
constexpr std::size_t kMinRowsPerThread = 4096;

double clamp_unit(double v) { return std::clamp(v, 0.0, kLargestBelowOne); }

// log(1 + exp(x)) without overflow.
double log1p_exp(double x) {
    if (x > 30.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

// Solves C_1(v1, v2) = w for v2 in closed form.
double clayton_conditional(double theta, double v1, double w) {
    const double lead = -theta * std::log(v1);
    const double tail = std::expm1(-theta / (1.0 + theta) * std::log(w));
    if (tail <= 0.0) return kLargestBelowOne;
    return clamp_unit(std::exp(-log1p_exp(lead + std::log(tail)) / theta));
}

double gumbel_conditional(const CopulaSpec& copula, double v1, double w) {
    if (*copula.theta() == 1.0) return w;
    auto f = [&](double v2) {
        const double u[2] = {v1, v2};
        return copula_partial(copula, u, 0) - w;
    };
    auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13; };
    std::uintmax_t iterations = 200;
    const auto bracket = boost::math::tools::toms748_solve(f, 0.0, 1.0, -w, 1.0 - w, tol, iterations);
    if (iterations >= 200) throw NumericalError("gumbel conditional inversion did not converge");
    return clamp_unit(0.5 * (bracket.first + bracket.second));
}

double lifetime(const NetSurvival& net, double p, std::size_t scenario) {
    const double t = net.quantile(p);
    if (!std::isfinite(t)) {
        throw DomainError("net survival '" + net.label() + "' never reaches probability " + std::to_string(p) +
                          " (scenario " + std::to_string(scenario) + "); extend the table");
    }
    return t;
}

void require_sampleable(const CopulaSpec& copula) {
    const auto family = copula.family();
    if ((family == CopulaFamily::clayton || family == CopulaFamily::gumbel) && copula.dimension() != 2) {
        throw UnsupportedDimension(std::string(to_string(family)) + " sampling supports dimension 2 only, got " +
                                   std::to_string(copula.dimension()));
    }
}

// Fills `rows` rows of `width` values in parallel. Each row depends only on
// its index, so the result does not depend on the thread count.
template <class RowFn>
std::vector<double> fill_rows(std::size_t rows, std::size_t width, RowFn row_fn) {
    std::vector<double> out(rows * width);
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::clamp<std::size_t>(rows / kMinRowsPerThread, 1, hw);
    if (workers == 1) {
        for (std::size_t r = 0; r < rows; ++r) row_fn(r, out.data() + r * width);
        return out;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (rows + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                const std::size_t end = std::min(rows, (w + 1) * chunk);
                for (std::size_t r = w * chunk; r < end; ++r) row_fn(r, out.data() + r * width);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

void require_rows(const SampleMatrix& samples) {
    if (samples.scenarios() == 0) throw EmptySample("sample matrix has no scenarios");
}

Estimate frequency(std::size_t hits, std::size_t n, std::size_t ties = 0) {
    const double p = static_cast<double>(hits) / static_cast<double>(n);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n)), ties};
}

// Dense ranks 1..K of `values`.
std::vector<std::size_t> dense_ranks(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<std::size_t> ranks(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        ranks[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), values[i]) -
                                            sorted.begin()) + 1;
    return ranks;
}

class Fenwick {
public:
    explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
    void add(std::size_t i) {
        for (; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
    }
    std::int64_t prefix(std::size_t i) const {
        std::int64_t s = 0;
        for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
        return s;
    }

private:
    std::vector<std::int64_t> tree_;
};

std::int64_t tied_pairs(std::vector<std::size_t> keys) {
    std::sort(keys.begin(), keys.end());
    std::int64_t total = 0;
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) ++j;
        const auto k = static_cast<std::int64_t>(j - i);
        total += k * (k - 1) / 2;
        i = j;
    }
    return total;
}

} // namespace

SampleMatrix::SampleMatrix(std::size_t scenarios, std::size_t causes, std::size_t lives, std::uint64_t seed,
                           std::vector<double> draws)
    : scenarios_(scenarios), causes_(causes), lives_(lives), seed_(seed), draws_(std::move(draws)) {
    if (causes_ == 0 || lives_ == 0) throw DomainError("sample matrix needs at least one cause and one life");
    if (draws_.size() != scenarios_ * causes_ * lives_) {
        throw DomainError("sample matrix has " + std::to_string(draws_.size()) + " draws, expected " +
                          std::to_string(scenarios_ * causes_ * lives_));
    }
    for (std::size_t k = 0; k < draws_.size(); ++k) {
        if (!std::isfinite(draws_[k]) || draws_[k] < 0.0)
            throw DomainError("lifetime at flat index " + std::to_string(k) + " is negative or not finite");
    }
}

std::vector<double> SampleMatrix::column(std::size_t c) const {
    if (c >= columns()) throw DomainError("column " + std::to_string(c) + " out of range");
    std::vector<double> out(scenarios_);
    for (std::size_t r = 0; r < scenarios_; ++r) out[r] = at(r, c);
    return out;
}

std::vector<double> draw_copula(const CopulaSpec& copula, std::uint64_t seed, std::uint64_t scenario) {
    require_sampleable(copula);
    ScenarioStream stream(seed, scenario);
    const std::size_t m = copula.dimension();
    std::vector<double> v(m);
    switch (copula.family()) {
    case CopulaFamily::independence:
        for (auto& x : v) x = stream.uniform();
        break;
    case CopulaFamily::comonotone:
        std::fill(v.begin(), v.end(), stream.uniform());
        break;
    case CopulaFamily::clayton: {
        v[0] = stream.uniform();
        v[1] = clayton_conditional(*copula.theta(), v[0], stream.uniform());
        break;
    }
    case CopulaFamily::gumbel: {
        v[0] = stream.uniform();
        v[1] = gumbel_conditional(copula, v[0], stream.uniform());
        break;
    }
    }
    return v;
}

SampleMatrix sample_dependent_causes(const CopulaSpec& copula, std::span<const NetSurvival> nets,
                                     std::size_t scenarios, std::uint64_t seed) {
    const std::size_t m = nets.size();
    if (m != copula.dimension()) {
        throw DomainError("copula dimension " + std::to_string(copula.dimension()) + " does not match " +
                          std::to_string(m) + " net laws");
    }
    require_sampleable(copula);
    auto draws = fill_rows(scenarios, m, [&](std::size_t r, double* row) {
        const auto v = draw_copula(copula, seed, r);
        for (std::size_t j = 0; j < m; ++j) row[j] = lifetime(nets[j], v[j], r);
    });
    return SampleMatrix(scenarios, m, 1, seed, std::move(draws));
}

SampleMatrix sample_comonotonic_group(const GroupStatus& group, std::size_t cause, std::size_t scenarios,
                                      std::uint64_t seed) {
    if (cause >= group.causes()) throw DomainError("cause index " + std::to_string(cause) + " out of range");
    const auto marginals = group.cause_marginals(cause);
    const std::size_t n = marginals.size();
    auto draws = fill_rows(scenarios, n, [&](std::size_t r, double* row) {
        ScenarioStream stream(seed, r);
        const double u = stream.uniform();
        for (std::size_t l = 0; l < n; ++l) row[l] = lifetime(marginals[l], u, r);
    });
    return SampleMatrix(scenarios, 1, n, seed, std::move(draws));
}

SampleMatrix sample_group_model(const GroupStatus& group, const CopulaSpec& copula, std::size_t scenarios,
                                std::uint64_t seed) {
    const std::size_t m = group.causes();
    const std::size_t n = group.lives();
    if (m != copula.dimension()) {
        throw DomainError("copula dimension " + std::to_string(copula.dimension()) + " does not match " +
                          std::to_string(m) + " causes");
    }
    require_sampleable(copula);
    auto draws = fill_rows(scenarios, m * n, [&](std::size_t r, double* row) {
        const auto v = draw_copula(copula, seed, r);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t l = 0; l < n; ++l) row[i * n + l] = lifetime(group.marginal(l, i), v[i], r);
    });
    return SampleMatrix(scenarios, m, n, seed, std::move(draws));
}

Estimate empirical_crude(const SampleMatrix& samples, std::size_t cause, double t) {
    require_rows(samples);
    if (samples.lives() != 1) throw DomainError("crude frequencies need single-life cause rows");
    if (cause >= samples.causes()) throw DomainError("cause index " + std::to_string(cause) + " out of range");
    std::size_t hits = 0, ties = 0;
    for (std::size_t r = 0; r < samples.scenarios(); ++r) {
        const auto row = samples.row(r);
        const auto it = std::min_element(row.begin(), row.end());
        if (std::count(row.begin(), row.end(), *it) > 1) ++ties;
        if (*it > t && static_cast<std::size_t>(it - row.begin()) == cause) ++hits;
    }
    return frequency(hits, samples.scenarios(), ties);
}

Estimate empirical_overall_survival(const SampleMatrix& samples, double t) {
    require_rows(samples);
    std::size_t hits = 0;
    for (std::size_t r = 0; r < samples.scenarios(); ++r) {
        const auto row = samples.row(r);
        if (*std::min_element(row.begin(), row.end()) > t) ++hits;
    }
    return frequency(hits, samples.scenarios());
}

Estimate empirical_joint_cdf(const SampleMatrix& samples, std::span<const double> x) {
    require_rows(samples);
    if (x.size() != samples.columns()) throw DomainError("probe point has the wrong number of coordinates");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < samples.scenarios(); ++r) {
        const auto row = samples.row(r);
        bool inside = true;
        for (std::size_t c = 0; c < x.size() && inside; ++c) inside = row[c] <= x[c];
        hits += inside;
    }
    return frequency(hits, samples.scenarios());
}

Estimate empirical_joint_survival(const SampleMatrix& samples, std::span<const double> x) {
    require_rows(samples);
    if (x.size() != samples.columns()) throw DomainError("probe point has the wrong number of coordinates");
    std::size_t hits = 0;
    for (std::size_t r = 0; r < samples.scenarios(); ++r) {
        const auto row = samples.row(r);
        bool inside = true;
        for (std::size_t c = 0; c < x.size() && inside; ++c) inside = row[c] > x[c];
        hits += inside;
    }
    return frequency(hits, samples.scenarios());
}

Estimate empirical_kendall_tau(const SampleMatrix& samples, std::size_t column_a, std::size_t column_b) {
    const auto a = samples.column(column_a);
    const auto b = samples.column(column_b);
    return empirical_kendall_tau(a, b);
}

Estimate empirical_kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw DomainError("tau columns differ in length");
    const std::size_t n = x.size();
    if (n < 2) throw EmptySample("kendall tau needs at least two observations");

    const auto rx = dense_ranks(x);
    const auto ry = dense_ranks(y);
    const std::size_t ky = *std::max_element(ry.begin(), ry.end());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return rx[i] < rx[j]; });

    // Per observation: concordant minus discordant partners.
    std::vector<std::int64_t> score(n);
    std::vector<std::int64_t> below_y(ky + 2, 0);
    for (std::size_t i = 0; i < n; ++i) ++below_y[ry[i]];
    std::partial_sum(below_y.begin(), below_y.end(), below_y.begin());  // below_y[r] = #{y rank <= r}

    Fenwick tree(ky);
    std::int64_t inserted = 0;
    std::vector<std::int64_t> lower_less(n), lower_greater(n);
    for (std::size_t g = 0; g < n;) {
        std::size_t h = g;
        while (h < n && rx[order[h]] == rx[order[g]]) ++h;
        for (std::size_t k = g; k < h; ++k) {
            const std::size_t i = order[k];
            lower_less[i] = tree.prefix(ry[i] - 1);
            lower_greater[i] = inserted - tree.prefix(ry[i]);
        }
        for (std::size_t k = g; k < h; ++k) tree.add(ry[order[k]]);
        inserted += static_cast<std::int64_t>(h - g);
        for (std::size_t k = g; k < h; ++k) {
            const std::size_t i = order[k];
            const std::int64_t upto_less = tree.prefix(ry[i] - 1);
            const std::int64_t upto_greater = inserted - tree.prefix(ry[i]);
            const std::int64_t all_less = below_y[ry[i] - 1];
            const std::int64_t all_greater = static_cast<std::int64_t>(n) - below_y[ry[i]];
            const std::int64_t upper_less = all_less - upto_less;
            const std::int64_t upper_greater = all_greater - upto_greater;
            score[i] = (lower_less[i] + upper_greater) - (lower_greater[i] + upper_less);
        }
        g = h;
    }

    const std::int64_t total = std::accumulate(score.begin(), score.end(), std::int64_t{0});
    const double nn = static_cast<double>(n);
    const double tau = static_cast<double>(total) / (nn * (nn - 1.0));

    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = static_cast<double>(score[i]) / (nn - 1.0) - tau;
        var += d * d;
    }
    var /= (n > 2 ? nn - 1.0 : nn);

    std::vector<std::size_t> joint(n);
    for (std::size_t i = 0; i < n; ++i) joint[i] = rx[i] * (ky + 1) + ry[i];
    const std::int64_t ties = tied_pairs(rx) + tied_pairs(ry) - tied_pairs(joint);

    return {std::clamp(tau, -1.0, 1.0), 2.0 * std::sqrt(var / nn), static_cast<std::size_t>(ties)};
}

} // namespace comolife
