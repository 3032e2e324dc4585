#pragma once

#include <cstddef>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace ddessm {

/// Gauss-Legendre nodes and weights on [-1, 1], expanded from boost's half-rule.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

template <unsigned N>
const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        using G = boost::math::quadrature::gauss<double, N>;
        const auto& x = G::abscissa();
        const auto& w = G::weights();
        GaussRule r;
        // boost stores the non-negative half; zero (odd N) appears once
        for (std::size_t i = x.size(); i-- > 0;) {
            if (x[i] == 0.0) continue;
            r.nodes.push_back(-x[i]);
            r.weights.push_back(w[i]);
        }
        for (std::size_t i = 0; i < x.size(); ++i) {
            r.nodes.push_back(x[i]);
            r.weights.push_back(w[i]);
        }
        return r;
    }();
    return rule;
}

/// Composite rule: `panels` equal sub-intervals of [a, b], each with `rule`.
/// `T` must support `T + T` and `double * T`; `zero` seeds the sum.
template <class F, class T>
T integrate_composite(F&& f, double a, double b, int panels, const GaussRule& rule, T zero) {
    T sum = zero;
    if (b == a || panels <= 0) return sum;
    const double width = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * width;
        const double half = 0.5 * width;
        const double mid = lo + half;
        for (std::size_t k = 0; k < rule.size(); ++k)
            sum = sum + (half * rule.weights[k]) * f(mid + half * rule.nodes[k]);
    }
    return sum;
}

} // namespace ddessm
