#ifndef COMOLIFE_DECREMENT_HPP
#define COMOLIFE_DECREMENT_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "comolife/copulas.hpp"
#include "comolife/group.hpp"
#include "comolife/marginals.hpp"

namespace comolife {

struct SolverConfig {
    double step = 0.01;           // grid spacing, years
    double horizon = 10.0;        // last grid time, years
    double newton_tol = 1e-12;    // max-norm residual per forward step
    int newton_max_iter = 50;
    double fd_step = 1e-4;        // finite-difference step for derivative checks
    double quadrature_tol = 1e-13;  // absolute error budget per grid interval

    // Throws DomainError unless every field is positive and horizon is a
    // whole number of steps.
    void validate() const;
};

// t_0 = 0, t_k = k * step, ..., horizon.
std::vector<double> make_grid(const SolverConfig& cfg);

// Crude survival curves S^(j)(t_k) = P(min_i T_i > t_k, min_i T_i = T_j) on a
// shared grid, one row per cause.
class CrudeCurveSet {
public:
    CrudeCurveSet(std::vector<double> grid, std::vector<std::vector<double>> curves,
                  std::vector<std::string> causes = {}, double truncation_remainder = 0.0);

    const std::vector<double>& grid() const noexcept { return grid_; }
    const std::vector<std::vector<double>>& curves() const noexcept { return curves_; }
    const std::vector<double>& curve(std::size_t j) const { return curves_.at(j); }
    const std::vector<std::string>& causes() const noexcept { return causes_; }
    std::size_t cause_count() const noexcept { return curves_.size(); }

    // Overall survival beyond the horizon, i.e. the mass the truncated
    // integrals leave out.
    double truncation_remainder() const noexcept { return truncation_remainder_; }

private:
    std::vector<double> grid_;
    std::vector<std::vector<double>> curves_;
    std::vector<std::string> causes_;
    double truncation_remainder_;
};

// P(T_1 > t, ..., T_m > t) for causes coupled by `copula`. A single net law
// is its own overall survival and ignores the copula.
double overall_survival(const CopulaSpec& copula, std::span<const NetSurvival> nets, double t);

// Crude curves from net laws:
//   S^(j)(t) = int_t^horizon  Cbar_j(S_1(s), ..., S_m(s)) f_j(s) ds
// where Cbar_j is the partial of the survival copula of `copula` in its j-th
// argument. Each grid interval is integrated adaptively.
CrudeCurveSet crude_from_nets(const CopulaSpec& copula, std::span<const NetSurvival> nets,
                              const SolverConfig& cfg);

struct NetRecovery {
    std::vector<NetSurvival> nets;     // tabular, on the crude grid
    std::vector<double> residuals;     // Newton residual per grid step
    double max_residual = 0.0;
    int max_iterations = 0;            // worst Newton iteration count over steps
};

// Inverts crude_from_nets by marching forward from S_j(0) = 1 and solving,
// per step, Delta S^(j) = Cbar_j(midpoint of nets) * Delta S_j with damped
// Newton. The increments are rescaled by Cbar(mid) / (observed overall
// survival at mid) to keep the march stable in the tail; residuals are in
// probability units. Rows whose partial rounds to zero are solved by
// bracketing. Throws ConvergenceError if a step still fails.
NetRecovery nets_from_crude(const CopulaSpec& copula, const CrudeCurveSet& crude,
                            const SolverConfig& cfg);

struct MixedPartialReport {
    std::size_t order;  // 1 for a single-life group, 2 for a pair
    double lhs;         // finite-difference derivative of the composed survival
    double rhs;         // chain-rule value from analytic copula partials
    double residual;
    double tolerance;
    bool within_tolerance;
};

// Compares the finite-difference mixed partial d^2/dt_1 dt_2 of
// C(S_1(t_1vec), ..., S_m(t_mvec)), taken in cause j's coordinates with every
// cause evaluated at (t_1, t_2), against
//   dS_j/dt_1 * C_jj * dS_j/dt_2 + C_j * d^2 S_j/dt_1 dt_2.
// A single-life group reduces to the first-order identity
// d/dt C(...) = C_j * dS_j/dt. Throws NonDifferentiable when the stencil
// straddles a kink of the comonotonic vector survival.
MixedPartialReport mixed_partial_check(const CopulaSpec& copula, const GroupStatus& group,
                                       std::size_t cause, std::span<const double> t,
                                       const SolverConfig& cfg,
                                       SurvivalComposition mode = SurvivalComposition::literal);

} // namespace comolife

#endif // COMOLIFE_DECREMENT_HPP
