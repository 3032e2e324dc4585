#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ddessm/model/kernel.hpp"

namespace ddessm {

namespace detail {

/// Atoms at a common delay, summed.
inline std::vector<Atom> merged_atoms(const DelayKernel& k) {
    std::vector<Atom> out;
    const double tol = 1e-13 * k.h();
    for (const auto& at : k.atoms()) {
        auto it = std::find_if(out.begin(), out.end(),
                               [&](const Atom& o) { return std::abs(o.tau - at.tau) <= tol; });
        if (it == out.end())
            out.push_back(at);
        else
            it->B += at.B;
    }
    return out;
}

/// Integral over [0, h] of norm(sum of active densities at t), split at all breakpoints.
inline double density_variation(const DelayKernel& k, const std::function<double(const MatR&)>& norm) {
    const auto& dens = k.densities();
    if (dens.empty()) return 0.0;
    std::vector<double> cuts;
    for (const auto& d : dens) {
        cuts.push_back(d.a);
        cuts.push_back(d.b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        const double mid = 0.5 * (lo + hi);
        auto f = [&](double t) {
            MatR sum = MatR::Zero(k.n(), k.n());
            bool any = false;
            for (const auto& d : dens)
                if (d.a <= mid && mid <= d.b) {
                    sum += d.at(t);
                    any = true;
                }
            return any ? norm(sum) : 0.0;
        };
        total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-13);
    }
    return total;
}

inline double pow0(double base, double expo) {
    if (base == 0.0 && expo == 0.0) return 1.0;
    return std::pow(base, expo);
}

/// Permanent of a small nonnegative matrix by direct expansion over permutations.
inline double permanent(const MatR& m) {
    const int n = static_cast<int>(m.rows());
    if (n == 0) return 1.0;
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double total = 0.0;
    do {
        double prod = 1.0;
        for (int i = 0; i < n; ++i) prod *= m(i, perm[i]);
        total += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return total;
}

} // namespace detail

/// Total variation of the kernel, with matrix entries reduced by the operator max-norm.
inline double total_variation(const DelayKernel& k) {
    double tv = 0.0;
    for (const auto& at : detail::merged_atoms(k)) tv += inf_norm(at.B);
    tv += detail::density_variation(k, [](const MatR& m) { return inf_norm(m); });
    return tv;
}

/// Integral of exp(-x t) d|zeta|(t) with the max-norm; bounds |Laplace transform at z| for Re z >= x.
inline double weighted_variation(const DelayKernel& k, double x) {
    double v = 0.0;
    for (const auto& at : detail::merged_atoms(k)) v += inf_norm(at.B) * std::exp(-x * at.tau);
    for (const auto& d : k.densities()) {
        auto f = [&](double t) { return inf_norm(d.at(t)) * std::exp(-x * t); };
        v += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, d.a, d.b, 15, 1e-12);
    }
    return v;
}

/// Entrywise total variations V_ij of the kernel.
inline MatR entry_variations(const DelayKernel& k) {
    const int n = k.n();
    MatR V = MatR::Zero(n, n);
    for (const auto& at : detail::merged_atoms(k)) V += at.B.cwiseAbs();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            V(i, j) += detail::density_variation(k, [i, j](const MatR& m) { return std::abs(m(i, j)); });
    return V;
}

/// Small-delay constant Q. The j-th determinant factor variation is taken as
/// T_j = sum of permanents of the principal j x j blocks of entry_variations().
inline double q_constant(const DelayKernel& k) {
    const int n = k.n();
    const MatR V = entry_variations(k);
    double q = 0.0;
    for (int j = 1; j <= n; ++j) {
        double Tj = 0.0;
        std::vector<bool> pick(static_cast<std::size_t>(n), false);
        std::fill(pick.begin(), pick.begin() + j, true);
        do {
            std::vector<int> idx;
            for (int i = 0; i < n; ++i)
                if (pick[i]) idx.push_back(i);
            MatR sub(j, j);
            for (int a = 0; a < j; ++a)
                for (int b = 0; b < j; ++b) sub(a, b) = V(idx[a], idx[b]);
            Tj += detail::permanent(sub);
        } while (std::prev_permutation(pick.begin(), pick.end()));
        const double e = double(n) / j;
        q += (double(j) / n) * detail::pow0(Tj, e) * detail::pow0(2.0 * (n - j), e - 1.0);
    }
    return q;
}

} // namespace ddessm
