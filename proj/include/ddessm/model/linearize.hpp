#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "ddessm/model/system.hpp"

namespace ddessm {

/// One history evaluation u_component(lag).
struct Factor {
    int component = 0;
    int lag = 0; // index into PolynomialRhs::lags
};

/// coef * prod(factors), contributing to output component `out`.
struct Monomial {
    int out = 0;
    double coef = 0.0;
    std::vector<Factor> factors;
};

/// Right-hand side given as an explicit linear kernel plus a polynomial of
/// degree <= 3 in finitely many history evaluations.
struct PolynomialRhs {
    struct XMinusSin {
        int component = 0;
        int lag = 0;
        double a = 1.0;
    };

    int n = 1;
    double h = 1.0;
    std::vector<double> lags{0.0};
    std::vector<Atom> atoms;
    std::vector<Density> densities;
    std::vector<Monomial> terms;
    std::optional<XMinusSin> x_minus_sin;
    std::optional<double> lip_global;
    std::optional<double> lip_f;
    std::string label;
};

/// Split f into Df(0) (kernel) and the remainder jet.
inline DDESystem linearize(const PolynomialRhs& rhs) {
    const int n = rhs.n;
    const int m = static_cast<int>(rhs.lags.size());
    require(n > 0 && m > 0, ErrorCode::InvalidArgument, "empty system description");
    const std::size_t N = static_cast<std::size_t>(n) * m;
    std::vector<double> d2(n * N * N, 0.0), d3(n * N * N * N, 0.0);
    auto atoms = rhs.atoms;
    bool any2 = false, any3 = false;

    for (const auto& t : rhs.terms) {
        require(t.out >= 0 && t.out < n, ErrorCode::InvalidArgument, "monomial output out of range");
        std::vector<std::size_t> idx;
        for (const auto& f : t.factors) {
            require(f.component >= 0 && f.component < n && f.lag >= 0 && f.lag < m,
                    ErrorCode::InvalidArgument, "monomial factor out of range");
            idx.push_back(static_cast<std::size_t>(f.lag) * n + f.component);
        }
        if (t.coef == 0.0) continue;
        switch (idx.size()) {
        case 0:
            throw Error(ErrorCode::NotAnEquilibrium,
                        "f(0) != 0; shift the equilibrium to the origin first");
        case 1: {
            const double tau = -rhs.lags[t.factors[0].lag];
            auto it = std::find_if(atoms.begin(), atoms.end(),
                                   [&](const Atom& a) { return a.tau == tau; });
            if (it == atoms.end()) {
                atoms.push_back({tau, MatR::Zero(n, n)});
                it = atoms.end() - 1;
            }
            it->B(t.out, t.factors[0].component) += t.coef;
            break;
        }
        case 2: {
            std::array<std::size_t, 2> p{idx[0], idx[1]};
            std::sort(p.begin(), p.end());
            do d2[(t.out * N + p[0]) * N + p[1]] += t.coef;
            while (std::next_permutation(p.begin(), p.end()));
            if (p[0] == p[1]) d2[(t.out * N + p[0]) * N + p[1]] += t.coef;
            any2 = true;
            break;
        }
        case 3: {
            std::array<std::size_t, 3> p{idx[0], idx[1], idx[2]};
            std::sort(p.begin(), p.end());
            // every ordering of the tuple gets coef: distinct orderings times multiplicity
            const int mult = (p[0] == p[1] ? 1 : 0) + (p[1] == p[2] ? 1 : 0);
            const double w = mult == 0 ? 1.0 : (mult == 1 ? 2.0 : 6.0);
            do d3[((t.out * N + p[0]) * N + p[1]) * N + p[2]] += w * t.coef;
            while (std::next_permutation(p.begin(), p.end()));
            any3 = true;
            break;
        }
        default:
            throw Error(ErrorCode::InvalidArgument, "monomials above degree 3 are not supported");
        }
    }

    if (!any2) d2.clear();
    if (!any3) d3.clear();

    NonlinearityJet jet(n, rhs.lags, d2, d3);
    if (rhs.x_minus_sin) {
        const auto& b = *rhs.x_minus_sin;
        auto base = NonlinearityJet::x_minus_sin(n, rhs.lags, b.component, b.lag, b.a);
        std::vector<double> c3 = base.cubic();
        if (any3)
            for (std::size_t k = 0; k < c3.size(); ++k) c3[k] += d3[k];
        NonlinearityJet merged(n, rhs.lags, d2, c3);
        const NonlinearityJet poly = jet;
        const auto sin_part = base.exact();
        merged.set_exact([poly, sin_part](const VecR& v) { return VecR(sin_part(v) + poly.eval(v)); });
        if (!rhs.terms.empty() && (any2 || any3)) {
            merged.lip_global = rhs.lip_global;
        } else {
            merged.lip_global = base.lip_global;
        }
        jet = std::move(merged);
    }
    if (rhs.lip_global) jet.lip_global = rhs.lip_global;

    DDESystem sys(DelayKernel(n, rhs.h, std::move(atoms), rhs.densities), std::move(jet), rhs.label);
    sys.lip_f = rhs.lip_f;
    return sys;
}

/// An already split system linearizes to itself.
inline DDESystem linearize(const DDESystem& sys) { return sys; }

/// Monomial form of a split system's jet, the inverse of linearize() on polynomial systems.
inline PolynomialRhs to_polynomial(const DDESystem& sys) {
    const auto& jet = sys.jet();
    PolynomialRhs rhs;
    rhs.n = sys.n();
    rhs.h = sys.h();
    rhs.lags = jet.lags();
    rhs.atoms = sys.kernel().atoms();
    rhs.densities = sys.kernel().densities();
    rhs.lip_global = jet.lip_global;
    rhs.lip_f = sys.lip_f;
    rhs.label = sys.label();
    const int n = sys.n();
    const int N = jet.stacked_dim();
    auto factor = [n](int p) { return Factor{p % n, p / n}; };
    for (int i = 0; i < n; ++i) {
        for (int p = 0; p < N; ++p)
            for (int q = p; q < N; ++q) {
                const double c = jet.d2(i, p, q) * (p == q ? 0.5 : 1.0);
                if (c != 0.0) rhs.terms.push_back({i, c, {factor(p), factor(q)}});
            }
        for (int p = 0; p < N; ++p)
            for (int q = p; q < N; ++q)
                for (int r = q; r < N; ++r) {
                    const int distinct_orders = (p == q && q == r) ? 1 : (p == q || q == r) ? 3 : 6;
                    const double c = jet.d3(i, p, q, r) * distinct_orders / 6.0;
                    if (c != 0.0) rhs.terms.push_back({i, c, {factor(p), factor(q), factor(r)}});
                }
    }
    return rhs;
}

} // namespace ddessm
