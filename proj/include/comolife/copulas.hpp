#ifndef COMOLIFE_COPULAS_HPP
#define COMOLIFE_COPULAS_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "comolife/errors.hpp"

namespace comolife {

enum class CopulaFamily { clayton, gumbel, independence, comonotone };

std::string_view to_string(CopulaFamily family);

// Accepts the lower-case family names used in configs; throws DomainError
// on anything else.
CopulaFamily parse_copula_family(std::string_view name);

// A dependence model over m causes. Immutable once built.
//
// Clayton requires theta > 0, Gumbel theta >= 1. Independence and comonotone
// carry no parameter. The dimension is bounded by max_dimension because the
// survival copula is evaluated by inclusion-exclusion over 2^m corners.
class CopulaSpec {
public:
    static constexpr std::size_t max_dimension = 16;

    CopulaSpec(CopulaFamily family, std::optional<double> theta, std::size_t dimension = 2);

    static CopulaSpec clayton(double theta, std::size_t dimension = 2) {
        return {CopulaFamily::clayton, theta, dimension};
    }
    static CopulaSpec gumbel(double theta, std::size_t dimension = 2) {
        return {CopulaFamily::gumbel, theta, dimension};
    }
    static CopulaSpec independence(std::size_t dimension = 2) {
        return {CopulaFamily::independence, std::nullopt, dimension};
    }
    static CopulaSpec comonotone(std::size_t dimension = 2) {
        return {CopulaFamily::comonotone, std::nullopt, dimension};
    }

    CopulaFamily family() const noexcept { return family_; }
    std::optional<double> theta() const noexcept { return theta_; }
    std::size_t dimension() const noexcept { return dimension_; }

    // Same family and parameter, different number of causes.
    CopulaSpec with_dimension(std::size_t dimension) const {
        return {family_, theta_, dimension};
    }

    std::string describe() const;

    bool operator==(const CopulaSpec&) const = default;

private:
    CopulaFamily family_;
    std::optional<double> theta_;
    std::size_t dimension_;
};

// C(u_1, ..., u_m). u must have length m with entries in [0, 1].
double copula_cdf(const CopulaSpec& spec, std::span<const double> u);

// P(U_1 > 1 - s_1, ..., U_m > 1 - s_m) for U ~ C, i.e. the survival copula
// evaluated at marginal survival probabilities s.
double survival_copula_value(const CopulaSpec& spec, std::span<const double> s);

// dC/du_j at an interior point of the unit cube (j is zero-based).
// Comonotone refuses points where u_j ties the minimum.
double copula_partial(const CopulaSpec& spec, std::span<const double> u, std::size_t j);

// d^2 C / du_j du_k at an interior point (j == k allowed).
double copula_second_partial(const CopulaSpec& spec, std::span<const double> u,
                             std::size_t j, std::size_t k);

// d(survival copula)/ds_j. Accepts the closed cube; on faces the one-sided
// limit is returned.
double survival_copula_partial(const CopulaSpec& spec, std::span<const double> s, std::size_t j);

// Second partials of the survival copula; the differentiated coordinates
// must lie in (0, 1).
double survival_copula_second_partial(const CopulaSpec& spec, std::span<const double> s,
                                      std::size_t j, std::size_t k);

// Pairwise Kendall's tau of the family.
double kendall_tau(const CopulaSpec& spec);

// Parameter reproducing a target tau. Only clayton and gumbel are
// parameterised; other families throw DomainError.
double theta_from_tau(CopulaFamily family, double tau);

} // namespace comolife

#endif // COMOLIFE_COPULAS_HPP
