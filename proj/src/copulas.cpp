#include "comolife/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace comolife {

namespace {

// log(e^x - 1) for x >= 0 without overflow; -inf at x == 0.
double log_expm1(double x) {
    if (x > 30.0) return x + std::log1p(-std::exp(-x));
    return std::log(std::expm1(x));
}

void check_probabilities(const CopulaSpec& spec, std::span<const double> u, const char* what) {
    if (u.size() != spec.dimension()) {
        std::ostringstream os;
        os << what << ": expected " << spec.dimension() << " coordinates, got " << u.size();
        throw DomainError(os.str());
    }
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] >= 0.0 && u[i] <= 1.0)) {
            std::ostringstream os;
            os << what << ": coordinate " << i << " = " << u[i] << " is outside [0, 1]";
            throw DomainError(os.str());
        }
    }
}

void check_index(const CopulaSpec& spec, std::size_t j) {
    if (j >= spec.dimension()) {
        std::ostringstream os;
        os << "cause index " << j << " out of range for dimension " << spec.dimension();
        throw DomainError(os.str());
    }
}

bool has_zero_except(std::span<const double> u, std::size_t j) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (i != j && u[i] == 0.0) return true;
    return false;
}

// theta * log(u_ref) + log(u_i^-theta - 1): the log of u_ref^theta (u_i^-theta - 1).
double clayton_scaled_term(double theta, double log_ref, double u_i) {
    return std::exp(theta * log_ref + log_expm1(-theta * std::log(u_i)));
}

// x_j = u_j^theta * sum_{i != j} (u_i^-theta - 1); C / u_j = (1 + x_j)^(-1/theta).
double clayton_excess(double theta, std::span<const double> u, std::size_t j) {
    const double log_ref = std::log(u[j]);
    double x = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i == j) continue;
        x += clayton_scaled_term(theta, log_ref, u[i]);
    }
    return x;
}

double clayton_cdf(double theta, std::span<const double> u) {
    const auto it = std::min_element(u.begin(), u.end());
    if (*it == 0.0) return 0.0;
    const auto j = static_cast<std::size_t>(it - u.begin());
    const double x = clayton_excess(theta, u, j);
    return u[j] * std::exp(-std::log1p(x) / theta);
}

double clayton_partial(double theta, std::span<const double> u, std::size_t j) {
    if (has_zero_except(u, j)) return 0.0;
    if (u[j] == 0.0) return 1.0;
    const double x = clayton_excess(theta, u, j);
    return std::exp(-(1.0 + theta) / theta * std::log1p(x));
}

double clayton_second(double theta, std::span<const double> u, std::size_t j, std::size_t k) {
    if (j == k) {
        if (has_zero_except(u, j)) return 0.0;
        const double x = clayton_excess(theta, u, j);
        const double cj = std::exp(-(1.0 + theta) / theta * std::log1p(x));
        return -(1.0 + theta) * cj * x / ((1.0 + x) * u[j]);
    }
    const double c = clayton_cdf(theta, u);
    if (c == 0.0) return 0.0;
    return (1.0 + theta) * clayton_partial(theta, u, j) * clayton_partial(theta, u, k) / c;
}

double gumbel_cdf(double theta, std::span<const double> u) {
    double a = 0.0;
    for (double v : u) {
        if (v == 0.0) return 0.0;
        a += std::pow(-std::log(v), theta);
    }
    return std::exp(-std::pow(a, 1.0 / theta));
}

struct GumbelTerms {
    double c;  // copula value
    double a;  // sum of (-log u_i)^theta
};

GumbelTerms gumbel_terms(double theta, std::span<const double> u) {
    double a = 0.0;
    for (double v : u) a += std::pow(-std::log(v), theta);
    return {std::exp(-std::pow(a, 1.0 / theta)), a};
}

// g_j = dR/du_j with R = A^(1/theta); C_j = -C g_j.
double gumbel_g(double theta, double a, double u_j) {
    const double l = -std::log(u_j);
    return -std::pow(a, 1.0 / theta - 1.0) * std::pow(l, theta - 1.0) / u_j;
}

double gumbel_partial(double theta, std::span<const double> u, std::size_t j) {
    if (has_zero_except(u, j)) return 0.0;
    if (u[j] == 0.0) return 1.0;
    if (u[j] == 1.0) {
        // On this face (-log u_j)^(theta-1) vanishes unless every other
        // coordinate is 1 too, where C reduces to the margin u_j.
        return std::all_of(u.begin(), u.end(), [](double v) { return v == 1.0; }) ? 1.0 : 0.0;
    }
    const auto t = gumbel_terms(theta, u);
    return -t.c * gumbel_g(theta, t.a, u[j]);
}

double gumbel_second(double theta, std::span<const double> u, std::size_t j, std::size_t k) {
    if (has_zero_except(u, j) || u[j] == 0.0) return 0.0;
    if (j != k && u[k] == 0.0) return 0.0;
    if (u[j] == 1.0 || u[k] == 1.0) return 0.0;
    const auto t = gumbel_terms(theta, u);
    const double gj = gumbel_g(theta, t.a, u[j]);
    const double gk = gumbel_g(theta, t.a, u[k]);
    const double lj = -std::log(u[j]);
    double dg;
    if (j != k) {
        const double lk = -std::log(u[k]);
        dg = (1.0 - theta) * std::pow(t.a, 1.0 / theta - 2.0) * std::pow(lk, theta - 1.0) *
             std::pow(lj, theta - 1.0) / (u[k] * u[j]);
    } else {
        const double uj2 = u[j] * u[j];
        dg = (1.0 - theta) * std::pow(t.a, 1.0 / theta - 2.0) * std::pow(lj, 2.0 * theta - 2.0) / uj2 +
             std::pow(t.a, 1.0 / theta - 1.0) *
                 ((theta - 1.0) * std::pow(lj, theta - 2.0) + std::pow(lj, theta - 1.0)) / uj2;
    }
    return t.c * (gj * gk - dg);
}

double product_except(std::span<const double> u, std::size_t j, std::size_t k) {
    double p = 1.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (i != j && i != k) p *= u[i];
    return p;
}

// Comonotone partial: 1 when u_j is the unique minimum, 0 when above it.
double min_partial(std::span<const double> u, std::size_t j, const char* what) {
    bool below_all = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (i == j) continue;
        if (u[i] == u[j]) {
            std::ostringstream os;
            os << what << ": coordinate " << j << " ties coordinate " << i
               << " at the minimum kink (value " << u[j] << ")";
            if (u[j] == *std::min_element(u.begin(), u.end())) throw NonDifferentiable(os.str());
        }
        if (u[i] <= u[j]) below_all = false;
    }
    return below_all ? 1.0 : 0.0;
}

bool is_independent(const CopulaSpec& spec) {
    return spec.family() == CopulaFamily::independence ||
           (spec.family() == CopulaFamily::gumbel && *spec.theta() == 1.0);
}

// Kernels below assume validated input.
double cdf_kernel(const CopulaSpec& spec, std::span<const double> u) {
    if (is_independent(spec)) {
        double p = 1.0;
        for (double v : u) p *= v;
        return p;
    }
    switch (spec.family()) {
    case CopulaFamily::clayton: return clayton_cdf(*spec.theta(), u);
    case CopulaFamily::gumbel: return gumbel_cdf(*spec.theta(), u);
    case CopulaFamily::comonotone: return *std::min_element(u.begin(), u.end());
    case CopulaFamily::independence: break;
    }
    return 0.0;
}

double partial_kernel(const CopulaSpec& spec, std::span<const double> u, std::size_t j) {
    if (is_independent(spec)) return product_except(u, j, j);
    switch (spec.family()) {
    case CopulaFamily::clayton: return clayton_partial(*spec.theta(), u, j);
    case CopulaFamily::gumbel: return gumbel_partial(*spec.theta(), u, j);
    case CopulaFamily::comonotone: return min_partial(u, j, "copula partial");
    case CopulaFamily::independence: break;
    }
    return 0.0;
}

double second_kernel(const CopulaSpec& spec, std::span<const double> u, std::size_t j, std::size_t k) {
    if (is_independent(spec)) return j == k ? 0.0 : product_except(u, j, k);
    switch (spec.family()) {
    case CopulaFamily::clayton: return clayton_second(*spec.theta(), u, j, k);
    case CopulaFamily::gumbel: return gumbel_second(*spec.theta(), u, j, k);
    case CopulaFamily::comonotone:
        // Piecewise linear: zero curvature away from the kinks, refused on them.
        min_partial(u, j, "copula second partial");
        min_partial(u, k, "copula second partial");
        return 0.0;
    case CopulaFamily::independence: break;
    }
    return 0.0;
}

// Sum over subsets S with required bits set of sign(S) * f(v_S), where v_S has
// 1 - s_i on S and 1 elsewhere.
template <typename F>
double inclusion_exclusion(std::span<const double> s, unsigned required, bool odd_positive, F&& f) {
    const std::size_t m = s.size();
    std::vector<double> v(m);
    long double total = 0.0L;
    const unsigned limit = 1u << m;
    for (unsigned mask = 0; mask < limit; ++mask) {
        if ((mask & required) != required) continue;
        int bits = 0;
        for (std::size_t i = 0; i < m; ++i) {
            if (mask & (1u << i)) {
                v[i] = 1.0 - s[i];
                ++bits;
            } else {
                v[i] = 1.0;
            }
        }
        const bool odd = bits % 2 == 1;
        const double term = f(std::span<const double>(v));
        total += (odd == odd_positive) ? term : -term;
    }
    return static_cast<double>(total);
}

} // namespace

std::string_view to_string(CopulaFamily family) {
    switch (family) {
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::comonotone: return "comonotone";
    }
    return "unknown";
}

CopulaFamily parse_copula_family(std::string_view name) {
    for (auto f : {CopulaFamily::clayton, CopulaFamily::gumbel, CopulaFamily::independence,
                   CopulaFamily::comonotone}) {
        if (to_string(f) == name) return f;
    }
    throw DomainError("unknown copula family '" + std::string(name) + "'");
}

CopulaSpec::CopulaSpec(CopulaFamily family, std::optional<double> theta, std::size_t dimension)
    : family_(family), theta_(theta), dimension_(dimension) {
    if (dimension_ < 2) throw DomainError("copula dimension must be at least 2");
    if (dimension_ > max_dimension) {
        std::ostringstream os;
        os << "copula dimension " << dimension_ << " exceeds the supported maximum of " << max_dimension;
        throw CapacityError(os.str());
    }
    switch (family_) {
    case CopulaFamily::clayton:
        if (!theta_ || !(*theta_ > 0.0) || !std::isfinite(*theta_))
            throw DomainError("clayton copula requires theta > 0");
        break;
    case CopulaFamily::gumbel:
        if (!theta_ || !(*theta_ >= 1.0) || !std::isfinite(*theta_))
            throw DomainError("gumbel copula requires theta >= 1");
        break;
    case CopulaFamily::independence:
    case CopulaFamily::comonotone:
        if (theta_) throw DomainError(std::string(to_string(family_)) + " copula takes no theta");
        break;
    }
}

std::string CopulaSpec::describe() const {
    std::ostringstream os;
    os << to_string(family_);
    if (theta_) os << "(theta=" << *theta_ << ")";
    os << " m=" << dimension_;
    return os.str();
}

double copula_cdf(const CopulaSpec& spec, std::span<const double> u) {
    check_probabilities(spec, u, "copula_cdf");
    return std::clamp(cdf_kernel(spec, u), 0.0, 1.0);
}

double survival_copula_value(const CopulaSpec& spec, std::span<const double> s) {
    check_probabilities(spec, s, "survival_copula_value");
    if (spec.family() == CopulaFamily::independence) {
        double p = 1.0;
        for (double v : s) p *= v;
        return p;
    }
    if (spec.family() == CopulaFamily::comonotone) return *std::min_element(s.begin(), s.end());
    const double value = inclusion_exclusion(s, 0u, false, [&](std::span<const double> v) {
        return cdf_kernel(spec, v);
    });
    return std::clamp(value, 0.0, 1.0);
}

double copula_partial(const CopulaSpec& spec, std::span<const double> u, std::size_t j) {
    check_probabilities(spec, u, "copula_partial");
    check_index(spec, j);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0 || u[i] == 1.0)
            throw DomainError("copula_partial: point lies on the boundary of the unit cube");
    }
    return partial_kernel(spec, u, j);
}

double copula_second_partial(const CopulaSpec& spec, std::span<const double> u, std::size_t j,
                             std::size_t k) {
    check_probabilities(spec, u, "copula_second_partial");
    check_index(spec, j);
    check_index(spec, k);
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i] == 0.0 || u[i] == 1.0)
            throw DomainError("copula_second_partial: point lies on the boundary of the unit cube");
    }
    return second_kernel(spec, u, j, k);
}

double survival_copula_partial(const CopulaSpec& spec, std::span<const double> s, std::size_t j) {
    check_probabilities(spec, s, "survival_copula_partial");
    check_index(spec, j);
    if (spec.family() == CopulaFamily::independence) return product_except(s, j, j);
    if (spec.family() == CopulaFamily::comonotone) return min_partial(s, j, "survival copula partial");
    // Every term has j in S; differentiating 1 - s_j flips the sign once more.
    return inclusion_exclusion(s, 1u << j, true, [&](std::span<const double> v) {
        return partial_kernel(spec, v, j);
    });
}

double survival_copula_second_partial(const CopulaSpec& spec, std::span<const double> s,
                                      std::size_t j, std::size_t k) {
    check_probabilities(spec, s, "survival_copula_second_partial");
    check_index(spec, j);
    check_index(spec, k);
    if (s[j] == 0.0 || s[j] == 1.0 || s[k] == 0.0 || s[k] == 1.0)
        throw DomainError("survival_copula_second_partial: differentiated coordinates must lie in (0, 1)");
    if (spec.family() == CopulaFamily::independence) return j == k ? 0.0 : product_except(s, j, k);
    if (spec.family() == CopulaFamily::comonotone) {
        min_partial(s, j, "survival copula second partial");
        min_partial(s, k, "survival copula second partial");
        return 0.0;
    }
    const unsigned required = (1u << j) | (1u << k);
    return inclusion_exclusion(s, required, false, [&](std::span<const double> v) {
        return second_kernel(spec, v, j, k);
    });
}

double kendall_tau(const CopulaSpec& spec) {
    switch (spec.family()) {
    case CopulaFamily::clayton: return *spec.theta() / (*spec.theta() + 2.0);
    case CopulaFamily::gumbel: return 1.0 - 1.0 / *spec.theta();
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::comonotone: return 1.0;
    }
    return 0.0;
}

double theta_from_tau(CopulaFamily family, double tau) {
    switch (family) {
    case CopulaFamily::gumbel:
        if (!(tau >= 0.0 && tau < 1.0))
            throw DomainError("gumbel copula attains tau in [0, 1) only");
        return 1.0 / (1.0 - tau);
    case CopulaFamily::clayton:
        if (!(tau > 0.0 && tau < 1.0))
            throw DomainError("clayton copula attains tau in (0, 1) only");
        return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::independence:
    case CopulaFamily::comonotone:
        break;
    }
    throw DomainError(std::string(to_string(family)) + " copula has no parameter to calibrate");
}

} // namespace comolife
