#ifndef COMOLIFE_SRC_QUADRATURE_HPP
#define COMOLIFE_SRC_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace comolife::detail {

struct QuadratureResult {
    double value;
    double error;
    bool converged;
};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

// Gauss-Kronrod 7/15 on [a, b]; error is |K15 - G7|. Nodes are interior, so
// integrands are never evaluated at the endpoints.
template <typename F>
Panel gauss_kronrod_panel(const F& f, double a, double b) {
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
    using gauss = boost::math::quadrature::gauss<double, 7>;
    const auto& x = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    const double f0 = f(mid);
    double k15 = wk[0] * f0;
    double g7 = wg[0] * f0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double sum = f(mid - half * x[i]) + f(mid + half * x[i]);
        k15 += wk[i] * sum;
        if (i % 2 == 0) g7 += wg[i / 2] * sum;
    }
    return {a, b, k15 * half, std::abs(k15 - g7) * half};
}

// Globally adaptive integration: bisects the panel with the largest error
// until the summed error meets max(abs_tol, rel_tol * |value|).
template <typename F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double abs_tol, double rel_tol,
                                    int max_panels = 2000) {
    if (b <= a) return {0.0, 0.0, true};
    std::priority_queue<Panel> panels;
    panels.push(gauss_kronrod_panel(f, a, b));
    double value = panels.top().value;
    double error = panels.top().error;
    int count = 1;
    while (error > std::max(abs_tol, rel_tol * std::abs(value)) && count < max_panels) {
        const Panel worst = panels.top();
        panels.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            panels.push(worst);
            break;
        }
        const Panel left = gauss_kronrod_panel(f, worst.a, mid);
        const Panel right = gauss_kronrod_panel(f, mid, worst.b);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        panels.push(left);
        panels.push(right);
        ++count;
    }
    // Re-sum to shed drift from the incremental updates.
    value = 0.0;
    error = 0.0;
    while (!panels.empty()) {
        value += panels.top().value;
        error += panels.top().error;
        panels.pop();
    }
    return {value, error, error <= std::max(abs_tol, rel_tol * std::abs(value))};
}

} // namespace comolife::detail

#endif // COMOLIFE_SRC_QUADRATURE_HPP
