#include "comolife/decrement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "quadrature.hpp"

namespace comolife {

namespace {

// Largest positive net increment tolerated before a step is declared
// non-monotone; smaller ones are clipped to zero.
constexpr double monotonicity_slack = 1e-9;

constexpr double eps = std::numeric_limits<double>::epsilon();

void check_dimension(const CopulaSpec& copula, std::size_t m) {
    if (m == 0) throw DomainError("at least one cause is required");
    if (m > 1 && copula.dimension() != m) {
        std::ostringstream os;
        os << "copula dimension " << copula.dimension() << " does not match " << m << " causes";
        throw DomainError(os.str());
    }
}

// Partial of the survival copula; identically 1 for a single cause.
double cbar_partial(const CopulaSpec& copula, std::span<const double> s, std::size_t j) {
    return s.size() == 1 ? 1.0 : survival_copula_partial(copula, s, j);
}

double cbar_value(const CopulaSpec& copula, std::span<const double> s) {
    return s.size() == 1 ? s[0] : survival_copula_value(copula, s);
}

bool interior(double v) { return v > 0.0 && v < 1.0; }

std::vector<std::string> cause_labels(std::span<const NetSurvival> nets) {
    std::vector<std::string> labels(nets.size());
    for (std::size_t j = 0; j < nets.size(); ++j)
        labels[j] = nets[j].label().empty() ? std::to_string(j + 1) : nets[j].label();
    return labels;
}

} // namespace

void SolverConfig::validate() const {
    if (!(step > 0.0) || !(horizon > 0.0) || !(newton_tol > 0.0) || newton_max_iter <= 0 ||
        !(fd_step > 0.0) || !(quadrature_tol > 0.0)) {
        throw DomainError("solver configuration values must all be positive");
    }
    const double k = horizon / step;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
        throw DomainError("horizon must be a whole number of grid steps");
}

std::vector<double> make_grid(const SolverConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.step));
    std::vector<double> grid(n + 1);
    for (std::size_t k = 0; k < n; ++k) grid[k] = static_cast<double>(k) * cfg.step;
    grid[n] = cfg.horizon;
    return grid;
}

CrudeCurveSet::CrudeCurveSet(std::vector<double> grid, std::vector<std::vector<double>> curves,
                             std::vector<std::string> causes, double truncation_remainder)
    : grid_(std::move(grid)), curves_(std::move(curves)), causes_(std::move(causes)),
      truncation_remainder_(truncation_remainder) {
    constexpr double slack = 1e-12;
    if (grid_.size() < 2 || grid_.front() != 0.0)
        throw ValidationError("crude grid must start at t = 0 and hold at least two points");
    for (std::size_t k = 1; k < grid_.size(); ++k) {
        if (!(grid_[k] > grid_[k - 1])) {
            std::ostringstream os;
            os << "crude grid not strictly increasing at index " << k << " (t=" << grid_[k] << ")";
            throw ValidationError(os.str());
        }
    }
    if (curves_.empty()) throw ValidationError("crude curve set has no causes");
    if (causes_.empty()) {
        for (std::size_t j = 0; j < curves_.size(); ++j) causes_.push_back(std::to_string(j + 1));
    }
    if (causes_.size() != curves_.size()) throw ValidationError("one cause label per crude curve required");
    for (std::size_t j = 0; j < curves_.size(); ++j) {
        const auto& row = curves_[j];
        if (row.size() != grid_.size()) {
            std::ostringstream os;
            os << "crude curve for cause " << causes_[j] << " has " << row.size() << " values, grid has "
               << grid_.size();
            throw ValidationError(os.str());
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
            std::ostringstream where;
            where << "crude curve for cause " << causes_[j] << " at t=" << grid_[k];
            if (!(row[k] >= 0.0 && row[k] <= 1.0))
                throw ValidationError(where.str() + ": value outside [0, 1]");
            if (k > 0 && row[k] > row[k - 1] + slack)
                throw ValidationError(where.str() + ": curve increases");
        }
    }
    double previous_total = 1.0 + slack;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
        double total = 0.0;
        for (const auto& row : curves_) total += row[k];
        if (total > previous_total + slack) {
            std::ostringstream os;
            os << "summed crude survival increases (or exceeds 1) at t=" << grid_[k];
            throw ValidationError(os.str());
        }
        previous_total = total;
    }
    if (!(truncation_remainder_ >= 0.0 && truncation_remainder_ <= 1.0))
        throw ValidationError("truncation remainder outside [0, 1]");
}

double overall_survival(const CopulaSpec& copula, std::span<const NetSurvival> nets, double t) {
    check_dimension(copula, nets.size());
    std::vector<double> s(nets.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = nets[j].survival(t);
    if (s.size() == 1) return s[0];
    return survival_copula_value(copula, s);
}

CrudeCurveSet crude_from_nets(const CopulaSpec& copula, std::span<const NetSurvival> nets,
                              const SolverConfig& cfg) {
    check_dimension(copula, nets.size());
    const auto grid = make_grid(cfg);
    const std::size_t m = nets.size();
    const std::size_t intervals = grid.size() - 1;

    std::vector<double> s(m);
    std::vector<std::vector<double>> curves(m, std::vector<double>(grid.size(), 0.0));
    for (std::size_t j = 0; j < m; ++j) {
        auto integrand = [&](double t) {
            const double f = nets[j].density(t);
            if (f == 0.0) return 0.0;
            for (std::size_t i = 0; i < m; ++i) s[i] = nets[i].survival(t);
            return cbar_partial(copula, s, j) * f;
        };
        long double tail = 0.0L;
        for (std::size_t k = intervals; k-- > 0;) {
            const auto r = detail::integrate_adaptive(integrand, grid[k], grid[k + 1], cfg.quadrature_tol, 1e-12);
            if (!r.converged) {
                std::ostringstream os;
                os << "quadrature for cause " << j + 1 << " on [" << grid[k] << ", " << grid[k + 1]
                   << "] stopped at error " << r.error;
                throw NumericalError(os.str());
            }
            tail += std::max(r.value, 0.0);
            curves[j][k] = std::min(static_cast<double>(tail), 1.0);
        }
    }
    const double remainder = overall_survival(copula, nets, cfg.horizon);
    return CrudeCurveSet(grid, std::move(curves), cause_labels(nets), remainder);
}

NetRecovery nets_from_crude(const CopulaSpec& copula, const CrudeCurveSet& crude, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t m = crude.cause_count();
    check_dimension(copula, m);
    if (m > 1 && copula.family() == CopulaFamily::comonotone)
        throw NonDifferentiable("the comonotone copula has no usable partials; nets cannot be recovered");

    const auto& grid = crude.grid();
    const std::size_t points = grid.size();
    std::vector<std::vector<double>> nets(m, std::vector<double>(points, 1.0));

    NetRecovery out;
    out.residuals.reserve(points - 1);

    std::vector<double> a(m, 1.0), x(m), trial(m), d(m), mid(m), cbar(m), F(m);
    std::vector<double> last_cbar(m, 1.0);

    // Overall survival implied by the data at each knot.
    std::vector<double> overall(points, crude.truncation_remainder());
    for (std::size_t k = 0; k < points; ++k)
        for (std::size_t j = 0; j < m; ++j) overall[k] += crude.curve(j)[k];

    // Each increment is scaled by Cbar(mid) / overall(mid), which is 1 + O(h^2)
    // along the exact solution. Without it, errors in the product of the nets
    // grow like 1 / overall survival as the march proceeds. Residuals are
    // measured relative to overall(mid) so the tail is still solved.
    double cbar_mid = 1.0;
    double overall_mid = 1.0;

    // Fills mid, cbar and F for candidate x; returns the max-norm residual.
    auto evaluate = [&](const std::vector<double>& cand) {
        for (std::size_t j = 0; j < m; ++j) mid[j] = 0.5 * (a[j] + cand[j]);
        cbar_mid = cbar_value(copula, mid);
        double r = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            cbar[j] = cbar_partial(copula, mid, j);
            F[j] = (cbar[j] * (cand[j] - a[j]) - d[j] * cbar_mid / overall_mid) / overall_mid;
            r = std::max(r, std::abs(F[j]));
        }
        return r;
    };

    // Survival copula values come from inclusion-exclusion over 2^m terms, so
    // their absolute rounding error is about 2^m eps. Equation j cannot be
    // resolved below that error carried through its two copula terms.
    const double rounding = std::ldexp(4.0 * eps, static_cast<int>(std::min<std::size_t>(m, 16)));
    auto converged = [&](const std::vector<double>& cand) {
        for (std::size_t j = 0; j < m; ++j) {
            const double noise = rounding * (std::abs(cand[j] - a[j]) + std::abs(d[j]) / overall_mid) / overall_mid;
            if (!(std::abs(F[j]) <= cfg.newton_tol + noise)) return false;
        }
        return true;
    };

    for (std::size_t k = 0; k + 1 < points; ++k) {
        overall_mid = 0.5 * (overall[k] + overall[k + 1]);
        if (!(overall_mid > 0.0)) {
            // Nothing left to observe: the nets are not identified past here.
            for (std::size_t j = 0; j < m; ++j) nets[j][k + 1] = a[j];
            out.residuals.push_back(0.0);
            continue;
        }
        const double scale = overall[k] > 0.0 ? cbar_value(copula, a) / overall[k] : 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            d[j] = crude.curve(j)[k + 1] - crude.curve(j)[k];
            x[j] = std::clamp(a[j] + d[j] * scale / std::max(last_cbar[j], 1e-3), 0.0, a[j]);
        }
        double residual = evaluate(x);
        int iter = 0;
        while (!converged(x)) {
            if (++iter > cfg.newton_max_iter) {
                std::ostringstream os;
                os << "Newton solve failed at step " << k << " (t=" << grid[k + 1] << "), residual " << residual;
                throw ConvergenceError(os.str(), k, residual);
            }
            Eigen::MatrixXd J = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
            Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
            for (std::size_t j = 0; j < m; ++j) {
                const auto jj = static_cast<Eigen::Index>(j);
                J(jj, jj) = cbar[j] / overall_mid;
                rhs(jj) = -F[j];
                for (std::size_t i = 0; i < m; ++i) {
                    const auto ii = static_cast<Eigen::Index>(i);
                    J(jj, ii) -= 0.5 * d[j] * cbar[i] / (overall_mid * overall_mid);
                    if (m == 1 || !interior(mid[j]) || !interior(mid[i])) continue;
                    J(jj, ii) +=
                        0.5 * survival_copula_second_partial(copula, mid, j, i) * (x[j] - a[j]) / overall_mid;
                }
            }
            if (!J.allFinite()) {
                std::ostringstream os;
                os << "non-finite Newton system at step " << k << " (t=" << grid[k + 1] << ")";
                throw ConvergenceError(os.str(), k, residual);
            }
            // Where a cause's partial vanishes its net does not enter the step
            // at all; the minimum-norm correction leaves it at the prediction.
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
            const Eigen::VectorXd delta =
                lu.isInvertible() ? Eigen::VectorXd(lu.solve(rhs))
                                  : Eigen::VectorXd(J.completeOrthogonalDecomposition().solve(rhs));

            double lambda = 1.0;
            double trial_residual = residual;
            for (int halvings = 0; halvings < 40; ++halvings, lambda *= 0.5) {
                for (std::size_t j = 0; j < m; ++j)
                    trial[j] = std::clamp(x[j] + lambda * delta(static_cast<Eigen::Index>(j)), 0.0, 1.0);
                trial_residual = evaluate(trial);
                if (trial_residual < residual) break;
            }
            if (trial_residual < residual) {
                x = trial;
                residual = trial_residual;
                continue;
            }
            // No descent: a partial that rounds to zero leaves its row flat.
            // Solve the rows one at a time on [0, a_j], where they change sign.
            residual = evaluate(x);
            for (std::size_t j = 0; j < m; ++j) {
                trial = x;
                auto row = [&](double v) {
                    trial[j] = v;
                    evaluate(trial);
                    return F[j];
                };
                const double hi = row(a[j]);
                const double lo = row(0.0);
                if (!(lo * hi < 0.0)) continue;
                std::uintmax_t budget = 200;
                const auto bracket = boost::math::tools::toms748_solve(
                    row, 0.0, a[j], lo, hi, boost::math::tools::eps_tolerance<double>(52), budget);
                x[j] = std::abs(row(bracket.first)) <= std::abs(row(bracket.second)) ? bracket.first
                                                                                     : bracket.second;
            }
            trial_residual = evaluate(x);
            if (!(trial_residual < residual)) {
                iter = cfg.newton_max_iter;  // stalled; report on the next pass
            }
            residual = trial_residual;
        }
        evaluate(x);
        for (std::size_t j = 0; j < m; ++j) {
            if (x[j] > a[j] + monotonicity_slack) {
                std::ostringstream os;
                os << "recovered net survival for cause " << crude.causes()[j] << " increases at t=" << grid[k + 1]
                   << " (by " << x[j] - a[j] << ")";
                throw MonotonicityError(os.str());
            }
            x[j] = std::min(x[j], a[j]);
            nets[j][k + 1] = x[j];
            last_cbar[j] = cbar[j];
        }
        a = x;
        // Reported in probability units, the scale of the crude increments.
        residual *= overall_mid;
        out.residuals.push_back(residual);
        out.max_residual = std::max(out.max_residual, residual);
        out.max_iterations = std::max(out.max_iterations, iter);
    }

    out.nets.reserve(m);
    for (std::size_t j = 0; j < m; ++j)
        out.nets.push_back(NetSurvival::tabular(grid, std::move(nets[j]), crude.causes()[j]));
    return out;
}

MixedPartialReport mixed_partial_check(const CopulaSpec& copula, const GroupStatus& group, std::size_t cause,
                                       std::span<const double> t, const SolverConfig& cfg,
                                       SurvivalComposition mode) {
    const std::size_t n = group.lives();
    const std::size_t m = group.causes();
    if (n > 2) throw DomainError("mixed_partial_check handles groups of one or two lives");
    if (t.size() != n) throw DomainError("mixed_partial_check needs one time per life");
    if (cause >= m) throw DomainError("cause index out of range");
    check_dimension(copula, m);
    const double h = cfg.fd_step;
    for (double ti : t) {
        if (!(ti - h > 0.0)) throw DomainError("mixed_partial_check needs interior times (t > fd_step)");
    }

    // Vector survival 1 - max_l F_kl(tau_l) of cause k.
    auto vector_survival = [&](std::size_t k, double tau1, double tau2) {
        double f = group.marginal(0, k).cdf(tau1);
        if (n == 2) f = std::max(f, group.marginal(1, k).cdf(tau2));
        return 1.0 - f;
    };
    const double t1 = t[0];
    const double t2 = n == 2 ? t[1] : t[0];

    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = vector_survival(k, t1, t2);

    auto compose = [&](double tau1, double tau2) {
        std::vector<double> w = v;
        w[cause] = vector_survival(cause, tau1, tau2);
        return mode == SurvivalComposition::literal ? copula_cdf(copula, w) : survival_copula_value(copula, w);
    };
    auto first = [&](std::span<const double> p) {
        return mode == SurvivalComposition::literal ? copula_partial(copula, p, cause)
                                                    : survival_copula_partial(copula, p, cause);
    };
    auto second = [&](std::span<const double> p) {
        return mode == SurvivalComposition::literal ? copula_second_partial(copula, p, cause, cause)
                                                    : survival_copula_second_partial(copula, p, cause, cause);
    };

    MixedPartialReport report{};
    report.order = n;
    if (n == 1) {
        report.lhs = (compose(t1 + h, t1 + h) - compose(t1 - h, t1 - h)) / (2.0 * h);
        report.rhs = first(v) * -group.marginal(0, cause).density(t1);
    } else {
        const auto& f1 = group.marginal(0, cause);
        const auto& f2 = group.marginal(1, cause);
        // The vector survival is a function of max(F_1(t_1), F_2(t_2)); the
        // stencil must stay on one side of the switch.
        auto side = [&](double a1, double a2) {
            const double diff = f1.cdf(a1) - f2.cdf(a2);
            return diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
        };
        const int s0 = side(t1, t2);
        const bool kink = s0 == 0 || side(t1 + h, t2 + h) != s0 || side(t1 + h, t2 - h) != s0 ||
                          side(t1 - h, t2 + h) != s0 || side(t1 - h, t2 - h) != s0;
        if (kink) {
            std::ostringstream os;
            os << "vector survival of cause " << cause + 1 << " has a kink near (" << t1 << ", " << t2
               << "): F_1(t_1) = " << f1.cdf(t1) << ", F_2(t_2) = " << f2.cdf(t2);
            throw NonDifferentiable(os.str());
        }
        report.lhs = (compose(t1 + h, t2 + h) - compose(t1 + h, t2 - h) - compose(t1 - h, t2 + h) +
                      compose(t1 - h, t2 - h)) /
                     (4.0 * h * h);
        const double ds1 = s0 > 0 ? -f1.density(t1) : 0.0;
        const double ds2 = s0 < 0 ? -f2.density(t2) : 0.0;
        const double ds12 = 0.0;  // off the kink only one coordinate enters the max
        report.rhs = ds1 * second(v) * ds2 + first(v) * ds12;
    }
    report.residual = std::abs(report.lhs - report.rhs);
    report.tolerance = std::max(1e-5, 1e-3 * std::abs(report.rhs));
    report.within_tolerance = report.residual <= report.tolerance;
    return report;
}

} // namespace comolife
