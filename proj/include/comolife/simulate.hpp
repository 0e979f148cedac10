#ifndef COMOLIFE_SIMULATE_HPP
#define COMOLIFE_SIMULATE_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "comolife/copulas.hpp"
#include "comolife/group.hpp"
#include "comolife/marginals.hpp"

namespace comolife {

// Monte Carlo lifetimes, row-major: one row per scenario, columns ordered
// cause-major (column = cause * lives + life).
class SampleMatrix {
public:
    SampleMatrix(std::size_t scenarios, std::size_t causes, std::size_t lives, std::uint64_t seed,
                 std::vector<double> draws);

    std::size_t scenarios() const noexcept { return scenarios_; }
    std::size_t causes() const noexcept { return causes_; }
    std::size_t lives() const noexcept { return lives_; }
    std::size_t columns() const noexcept { return causes_ * lives_; }
    std::uint64_t seed() const noexcept { return seed_; }

    double at(std::size_t row, std::size_t column) const { return draws_[row * columns() + column]; }
    double at(std::size_t row, std::size_t cause, std::size_t life) const {
        return at(row, cause * lives_ + life);
    }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(draws_).subspan(r * columns(), columns());
    }
    std::vector<double> column(std::size_t c) const;
    const std::vector<double>& draws() const noexcept { return draws_; }

    bool operator==(const SampleMatrix&) const = default;

private:
    std::size_t scenarios_;
    std::size_t causes_;
    std::size_t lives_;
    std::uint64_t seed_;
    std::vector<double> draws_;
};

// A frequency (or other statistic) with its standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::size_t ties = 0;
};

// (V_1, ..., V_m) ~ C for one scenario. Clayton and Gumbel are drawn by
// conditional inversion and are limited to m = 2.
std::vector<double> draw_copula(const CopulaSpec& copula, std::uint64_t seed, std::uint64_t scenario);

// Rows (T_1, ..., T_m) with T_j = quantile(net_j, V_j), V ~ C.
SampleMatrix sample_dependent_causes(const CopulaSpec& copula, std::span<const NetSurvival> nets,
                                     std::size_t scenarios, std::uint64_t seed);

// Rows (F_1^-1(U), ..., F_n^-1(U)) for one cause of the group, one uniform U
// per row.
SampleMatrix sample_comonotonic_group(const GroupStatus& group, std::size_t cause, std::size_t scenarios,
                                      std::uint64_t seed);

// Rows T_i(x_l) = F_il^-1(V_i) with (V_1, ..., V_m) ~ C drawn once per
// scenario: comonotone within a cause, coupled by C across causes.
SampleMatrix sample_group_model(const GroupStatus& group, const CopulaSpec& copula, std::size_t scenarios,
                                std::uint64_t seed);

// Frequency of {min of row > t and the minimum is attained by cause j}.
// Rows must be single-life cause lifetimes. Ties go to the lowest index and
// are counted.
Estimate empirical_crude(const SampleMatrix& samples, std::size_t cause, double t);

// Frequency of {min of row > t}.
Estimate empirical_overall_survival(const SampleMatrix& samples, double t);

// Frequency of rows lying entirely at or below x (joint CDF) or entirely
// above x (joint survival); x has one entry per column.
Estimate empirical_joint_cdf(const SampleMatrix& samples, std::span<const double> x);
Estimate empirical_joint_survival(const SampleMatrix& samples, std::span<const double> x);

// Kendall's tau-a between two columns in O(N log N), with a U-statistic
// standard error. `ties` counts pairs tied in either column.
Estimate empirical_kendall_tau(const SampleMatrix& samples, std::size_t column_a, std::size_t column_b);
Estimate empirical_kendall_tau(std::span<const double> x, std::span<const double> y);

} // namespace comolife

#endif // COMOLIFE_SIMULATE_HPP
