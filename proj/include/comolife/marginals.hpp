#ifndef COMOLIFE_MARGINALS_HPP
#define COMOLIFE_MARGINALS_HPP

#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "comolife/errors.hpp"

namespace comolife {

// Parametric and tabulated lifetime laws. Times are in years.
struct Exponential {
    double rate;  // hazard per year
};

struct Weibull {
    double shape;
    double scale;  // years
};

// Hazard b * c^t.
struct Gompertz {
    double b;
    double c;
};

// Survival values at knots, linearly interpolated between them and held at
// the last value beyond the final knot.
struct Tabular {
    std::vector<double> times;
    std::vector<double> survival;
};

struct SurvivalPoint {
    double value;
    bool extrapolated;  // t lies beyond a tabular grid
};

// Marginal ("net") survival law of one cause-lifetime, S(t) = P(T > t).
class NetSurvival {
public:
    using Law = std::variant<Exponential, Weibull, Gompertz, Tabular>;

    NetSurvival(Law law, std::string label = {});

    static NetSurvival exponential(double rate, std::string label = {}) {
        return {Exponential{rate}, std::move(label)};
    }
    static NetSurvival weibull(double shape, double scale, std::string label = {}) {
        return {Weibull{shape, scale}, std::move(label)};
    }
    static NetSurvival gompertz(double b, double c, std::string label = {}) {
        return {Gompertz{b, c}, std::move(label)};
    }
    static NetSurvival tabular(std::vector<double> times, std::vector<double> survival,
                               std::string label = {}) {
        return {Tabular{std::move(times), std::move(survival)}, std::move(label)};
    }

    const Law& law() const noexcept { return law_; }
    const std::string& label() const noexcept { return label_; }
    std::string_view kind() const noexcept;
    bool is_tabular() const noexcept { return std::holds_alternative<Tabular>(law_); }

    SurvivalPoint evaluate(double t) const;
    double survival(double t) const { return evaluate(t).value; }
    double cdf(double t) const { return 1.0 - survival(t); }

    // -dS/dt; right derivative at tabular knots, zero beyond the grid.
    double density(double t) const;

    // Generalized inverse inf{t >= 0 : F(t) >= p} of the cdf() above, for p in
    // [0, 1). Infinite when a tabular law never reaches p.
    double quantile(double p) const;

private:
    Law law_;
    std::string label_;
};

double survival_at(const NetSurvival& net, double t);
double quantile(const NetSurvival& net, double p);

// One row of a decrement table: t-year decrement probability of a life from
// a cause, measured from the life's current age.
struct LifeTableRecord {
    std::string life;
    std::string cause;
    double t;
    double q;
};

// Tabular law S(t) = 1 - q(t) for one (life, cause) key. Records for the key
// must be listed in strictly increasing t with nondecreasing q.
NetSurvival from_life_table(std::span<const LifeTableRecord> records, std::string_view life,
                            std::string_view cause);

} // namespace comolife

#endif // COMOLIFE_MARGINALS_HPP
