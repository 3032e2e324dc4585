#pragma once

#include <algorithm>
#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ddessm/ssm/expansion.hpp"

namespace ddessm::testing {

/// Coefficient-wise residual of the invariance equation for a 3-jet, computed
/// without reusing any formula from the solver.
struct InvarianceResidual {
    double shift = 0.0;    ///< d/dtheta K_a versus [DK H]_a on [-h, 0]
    double boundary = 0.0; ///< [DK H]_a(0) versus L K_a + [R o K]_a
};

/// L applied to a history, by direct quadrature against the kernel.
inline VecC apply_kernel(const DelayKernel& k, const ExpSum& u) {
    VecC out = VecC::Zero(k.n());
    for (const auto& at : k.atoms()) out += at.B.cast<cplx>() * u(-at.tau);
    for (const auto& d : k.densities())
        for (int i = 0; i < k.n(); ++i)
            for (int part = 0; part < 2; ++part) {
                auto f = [&](double t) {
                    const VecC v = d.at(t).row(i).cast<cplx>() * u(-t);
                    return part == 0 ? v[0].real() : v[0].imag();
                };
                const double val =
                    boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, d.a, d.b, 15, 1e-14);
                out[i] += part == 0 ? cplx(val, 0.0) : cplx(0.0, val);
            }
    return out;
}

/// Coefficient of y^alpha in the product DK(y) H(y), evaluated at theta.
inline VecC dk_times_h(const SSMModel& m, const MultiIndex& alpha, double theta) {
    VecC out = VecC::Zero(m.n);
    const int d = m.dim();
    for (const auto& [beta, kb] : m.K)
        for (const auto& [gamma, hg] : m.H)
            for (int j = 0; j < d; ++j) {
                if (beta[j] == 0) continue;
                bool match = true;
                for (int i = 0; i < d; ++i)
                    if (beta[i] - (i == j ? 1 : 0) + gamma[i] != alpha[i]) match = false;
                if (match) out += double(beta[j]) * hg[j] * kb(theta);
            }
    return out;
}

/// Coefficient of y^alpha in R(K(y)) by sampling y on a torus and discrete Fourier extraction.
/// R o K has degree at most 9 in each variable, so 10 nodes per circle do not alias.
inline VecC composed_coefficient(const SSMModel& m, const NonlinearityJet& jet, const MultiIndex& alpha) {
    constexpr int P = 10;
    const int d = m.dim();
    std::vector<std::pair<MultiIndex, VecC>> evals;
    for (const auto& [beta, kb] : m.K) {
        VecC v(jet.stacked_dim());
        for (int l = 0; l < jet.lag_count(); ++l) v.segment(l * m.n, m.n) = kb(jet.lags()[l]);
        evals.emplace_back(beta, v);
    }
    int total = 1;
    for (int i = 0; i < d; ++i) total *= P;
    VecC acc = VecC::Zero(m.n);
    for (int flat = 0; flat < total; ++flat) {
        VecC y(d);
        cplx weight = 1.0;
        int rest = flat;
        for (int i = 0; i < d; ++i) {
            const int k = rest % P;
            rest /= P;
            const double ang = 2.0 * pi * k / P;
            y[i] = std::polar(1.0, ang);
            weight *= std::polar(1.0, -ang * alpha[i]);
        }
        VecC v = VecC::Zero(jet.stacked_dim());
        for (const auto& [beta, e] : evals) v += monomial(y, beta) * e;
        acc += weight * (0.5 * jet.apply2(v, v) + jet.apply3(v, v, v) / 6.0);
    }
    return acc / double(total);
}

inline InvarianceResidual invariance_residual(const DDESystem& sys, const SSMModel& m) {
    InvarianceResidual r;
    for (const auto& [alpha, ka] : m.K) {
        double scale = 1.0;
        for (double th : history_grid(m.h, 33)) scale = std::max(scale, sup_norm(ka.derivative(th)));
        for (double th : history_grid(m.h, 33))
            r.shift = std::max(r.shift, sup_norm(VecC(ka.derivative(th) - dk_times_h(m, alpha, th))) / scale);
        const VecC lhs = dk_times_h(m, alpha, 0.0);
        const VecC rhs = apply_kernel(sys.kernel(), ka) + composed_coefficient(m, sys.jet(), alpha);
        r.boundary = std::max(r.boundary, sup_norm(VecC(lhs - rhs)) / std::max({1.0, sup_norm(lhs), sup_norm(rhs)}));
    }
    return r;
}

} // namespace ddessm::testing
