#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <utility>

#include "ddessm/ssm/expansion.hpp"

namespace ddessm {

/// Polynomial in (q, qbar) truncated at degree 3; key (a, b) is the monomial q^a qbar^b.
using Exponents = std::pair<int, int>;
using Poly2 = std::map<Exponents, cplx>;

namespace detail {

inline Poly2 truncated_product(const Poly2& f, const Poly2& g, int max_degree = 3) {
    Poly2 out;
    for (const auto& [ea, ca] : f)
        for (const auto& [eb, cb] : g) {
            const Exponents e{ea.first + eb.first, ea.second + eb.second};
            if (e.first + e.second <= max_degree) out[e] += ca * cb;
        }
    return out;
}

/// Same polynomial with the roles of q and qbar exchanged and coefficients conjugated.
inline Poly2 mirrored(const Poly2& p) {
    Poly2 out;
    for (const auto& [e, c] : p) out[{e.second, e.first}] = std::conj(c);
    return out;
}

} // namespace detail

struct PolarField {
    double radial_linear = 0.0; ///< r' = radial_linear r + radial_cubic r^3
    double radial_cubic = 0.0;
    double angular_const = 0.0; ///< phi' = angular_const + angular_quad r^2
    double angular_quad = 0.0;
};

/// Cubic normal form q' = lambda q - beta21 |q|^2 q for a conjugate pair, with the
/// change of coordinates z = q + p(q, qbar) and the manifold in the new chart.
struct NormalFormData {
    cplx lambda;
    cplx beta21;
    Poly2 p;                                  ///< degree 2 and 3 coefficients of the coordinate change
    PolarField polar;
    std::map<Exponents, ExpSum> manifold;     ///< Ktilde coefficients of q^a qbar^b, degree 1 to 3
    double h = 1.0;
    int n = 1;

    [[nodiscard]] const ExpSum& coefficient(int a, int b) const { return manifold.at({a, b}); }

    /// Ktilde(r, phi) as a real history.
    [[nodiscard]] ExpSum eval(double r, double phi) const {
        ExpSum out(n);
        for (const auto& [e, k] : manifold)
            out += std::pow(r, e.first + e.second) * std::polar(1.0, (e.first - e.second) * phi) * k;
        return out;
    }
};

struct NormalFormOptions {
    double tol_divisor = 1e-10; ///< |divisor| below this (relative to |lambda|) is a resonance
};

inline NormalFormData normal_form(const SSMModel& m, const NormalFormOptions& opt = {}) {
    require(m.dim() == 2 && m.lambda(0).imag() > 0.0 &&
                std::abs(m.lambda(1) - std::conj(m.lambda(0))) <= 1e-9 * (1.0 + std::abs(m.lambda(0))),
            ErrorCode::WrongSigmaShape, "normal form needs a conjugate pair (upper root first)");
    require(m.order >= 3, ErrorCode::NotComputed, "normal form needs the third-order expansion");
    const cplx l1 = m.lambda(0), l2 = m.lambda(1);
    require(std::abs(l1) > 0.0, ErrorCode::HomologicalResonance, "zero eigenvalue");
    const double tol = opt.tol_divisor * std::max(1.0, std::abs(l1));

    NormalFormData nf;
    nf.lambda = l1;
    nf.h = m.h;
    nf.n = m.n;

    Poly2 F;
    for (const auto& [a, c] : m.H)
        if (degree(a) >= 2) F[{a[0], a[1]}] = c[0];

    auto divisor = [&](const Exponents& e) { return double(e.first) * l1 + double(e.second) * l2 - l1; };

    // degree 2: everything is removable for a non-real pair
    Poly2 p2;
    for (const auto& [e, c] : F) {
        if (e.first + e.second != 2 || c == 0.0) continue;
        const cplx dv = divisor(e);
        require(std::abs(dv) > tol, ErrorCode::HomologicalResonance, "quadratic divisor vanishes");
        p2[e] = c / dv;
    }

    // degree 3 field after the quadratic change: F3 + dF2/dz p2 + dF2/dzbar conj(p2)
    Poly2 G3;
    for (const auto& [e, c] : F)
        if (e.first + e.second == 3) G3[e] += c;
    const Poly2 p2bar = detail::mirrored(p2);
    for (const auto& [e, c] : F) {
        if (e.first + e.second != 2) continue;
        if (e.first > 0) {
            Poly2 d{{{e.first - 1, e.second}, double(e.first) * c}};
            for (const auto& [ee, cc] : detail::truncated_product(d, p2)) G3[ee] += cc;
        }
        if (e.second > 0) {
            Poly2 d{{{e.first, e.second - 1}, double(e.second) * c}};
            for (const auto& [ee, cc] : detail::truncated_product(d, p2bar)) G3[ee] += cc;
        }
    }

    Poly2 p3;
    nf.beta21 = 0.0;
    for (int a = 3; a >= 0; --a) {
        const Exponents e{a, 3 - a};
        const cplx g = G3.count(e) ? G3.at(e) : cplx(0.0);
        const cplx dv = divisor(e);
        if (std::abs(dv.imag()) <= tol) {
            nf.beta21 = -g; // kept in the normal form
            continue;
        }
        require(std::abs(dv) > tol, ErrorCode::HomologicalResonance, "cubic divisor vanishes");
        p3[e] = g / dv;
    }
    for (const auto& [e, c] : p2) nf.p[e] = c;
    for (const auto& [e, c] : p3) nf.p[e] = c;

    nf.polar = {l1.real(), -nf.beta21.real(), l1.imag(), -nf.beta21.imag()};

    // Ktilde = K(q + p, qbar + pbar) up to degree 3
    Poly2 z1{{{1, 0}, 1.0}}, z2{{{0, 1}, 1.0}};
    for (const auto& [e, c] : nf.p) z1[e] += c;
    for (const auto& [e, c] : detail::mirrored(nf.p)) z2[e] += c;
    for (const auto& [a, k] : m.K) {
        Poly2 mono{{{0, 0}, 1.0}};
        for (int i = 0; i < a[0]; ++i) mono = detail::truncated_product(mono, z1);
        for (int i = 0; i < a[1]; ++i) mono = detail::truncated_product(mono, z2);
        for (const auto& [e, c] : mono) {
            if (std::abs(c) == 0.0) continue;
            auto it = nf.manifold.try_emplace(e, ExpSum(m.n)).first;
            it->second += c * k;
        }
    }
    return nf;
}

struct LimitCycle {
    bool exists = false;
    bool stable = false;
    double radius = 0.0;    ///< r-hat in the normal-form chart
    double frequency = 0.0; ///< angular frequency on the cycle

    [[nodiscard]] double period() const { return 2.0 * pi / std::abs(frequency); }
};

/// Nontrivial equilibrium of the radial equation r' = Re(lambda) r - Re(beta21) r^3.
inline LimitCycle predict_limit_cycle(const NormalFormData& nf, double tol = 1e-12) {
    const double a = nf.lambda.real(), b = nf.beta21.real();
    require(std::abs(b) > tol * (1.0 + std::abs(nf.beta21)), ErrorCode::DegenerateHopf,
            "real part of the cubic coefficient vanishes");
    LimitCycle lc;
    const double ratio = a / b;
    if (ratio < 0.0) return lc;
    lc.exists = true;
    lc.radius = std::sqrt(ratio);
    lc.frequency = nf.lambda.imag() - nf.beta21.imag() * ratio;
    lc.stable = a > 0.0 && b > 0.0;
    return lc;
}

/// Half peak-to-peak of component `i` of Ktilde(r, phi)(0) over phi.
inline double predicted_amplitude(const NormalFormData& nf, double r, int i = 0, int samples = 720) {
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k < samples; ++k) {
        const double v = nf.eval(r, 2.0 * pi * k / samples)(0.0)[i].real();
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return 0.5 * (hi - lo);
}

/// Ktilde(r, phi) sampled on [-h, 0].
inline std::vector<VecC> manifold_eval(const NormalFormData& nf, double r, double phi, int samples = 512) {
    const ExpSum u = nf.eval(r, phi);
    std::vector<VecC> out;
    for (double th : history_grid(nf.h, samples)) out.push_back(u(th));
    return out;
}

} // namespace ddessm
