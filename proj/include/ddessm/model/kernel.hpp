#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ddessm/core/error.hpp"
#include "ddessm/core/types.hpp"

namespace ddessm {

/// J_k(z, L) = integral over [0, L] of s^k exp(-z s) ds for k = 0..kmax.
/// Power series for small |z L|, upward recurrence otherwise.
inline std::vector<cplx> exp_moments(cplx z, double L, int kmax) {
    std::vector<cplx> J(static_cast<std::size_t>(kmax + 1));
    const double zl = std::abs(z) * L;
    if (zl <= kmax + 2.0) {
        const cplx w = -z * L;
        for (int k = 0; k <= kmax; ++k) {
            cplx sum = 0.0, term = 1.0; // term = w^m / m!
            for (int m = 0; m < 400; ++m) {
                const cplx add = term / double(k + m + 1);
                sum += add;
                if (m > zl && std::abs(add) <= 1e-17 * std::abs(sum)) break;
                term *= w / double(m + 1);
            }
            J[k] = std::pow(L, k + 1) * sum;
        }
        return J;
    }
    const cplx e = std::exp(-z * L);
    J[0] = (1.0 - e) / z;
    double Lk = 1.0;
    for (int k = 1; k <= kmax; ++k) {
        Lk *= L;
        J[k] = (double(k) * J[k - 1] - Lk * e) / z;
    }
    return J;
}

/// Point delay: contributes B * u(-tau) to the linear part.
struct Atom {
    double tau = 0.0;
    MatR B;
};

/// Distributed delay on [a, b]: contributes the integral of C(t) u(-t) dt,
/// with C(t) = sum_k coeffs[k] (t - a)^k.
struct Density {
    double a = 0.0;
    double b = 0.0;
    std::vector<MatR> coeffs;

    [[nodiscard]] int degree() const { return static_cast<int>(coeffs.size()) - 1; }

    [[nodiscard]] MatR at(double t) const {
        MatR sum = MatR::Zero(coeffs.front().rows(), coeffs.front().cols());
        for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) sum = sum * (t - a) + *it;
        return sum;
    }

    /// Integral over [lo, hi] (inside [a, b]) of t^weight C(t) exp(-z t) dt, weight in {0, 1}.
    [[nodiscard]] MatC laplace(cplx z, double lo, double hi, int weight = 0) const {
        const Eigen::Index n = coeffs.front().rows();
        MatC out = MatC::Zero(n, n);
        if (hi <= lo) return out;
        const int deg = degree();
        // re-expand C in powers of (t - lo)
        std::vector<MatR> shifted(static_cast<std::size_t>(deg + 1), MatR::Zero(n, n));
        const double d = lo - a;
        for (int k = 0; k <= deg; ++k) {
            double binom = 1.0;
            for (int j = 0; j <= k; ++j) {
                shifted[j] += binom * std::pow(d, k - j) * coeffs[k];
                binom = binom * (k - j) / (j + 1);
            }
        }
        const auto J = exp_moments(z, hi - lo, deg + 1);
        for (int j = 0; j <= deg; ++j) {
            const cplx w = weight == 0 ? J[j] : lo * J[j] + J[j + 1];
            out += w * shifted[j].cast<cplx>();
        }
        return std::exp(-z * lo) * out;
    }
};

/// Linear part of the delay equation: a normalized-bounded-variation kernel
/// made of point delays plus piecewise-polynomial densities on [0, h].
class DelayKernel {
public:
    DelayKernel() = default;

    DelayKernel(int n, double h, std::vector<Atom> atoms = {}, std::vector<Density> densities = {})
        : n_(n), h_(h), atoms_(std::move(atoms)), densities_(std::move(densities)) {
        validate();
    }

    static DelayKernel zero(int n, double h) { return DelayKernel(n, h); }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    [[nodiscard]] const std::vector<Density>& densities() const noexcept { return densities_; }
    [[nodiscard]] bool empty() const noexcept { return atoms_.empty() && densities_.empty(); }

    /// Laplace-Stieltjes transform: integral of exp(-z t) d zeta(t).
    [[nodiscard]] MatC laplace(cplx z) const {
        MatC out = MatC::Zero(n_, n_);
        for (const auto& at : atoms_) out += std::exp(-z * at.tau) * at.B.cast<cplx>();
        for (const auto& d : densities_) out += d.laplace(z, d.a, d.b, 0);
        return out;
    }

    /// Integral of t exp(-z t) d zeta(t); equals minus the z-derivative of laplace().
    [[nodiscard]] MatC laplace_moment(cplx z) const {
        MatC out = MatC::Zero(n_, n_);
        for (const auto& at : atoms_) out += (at.tau * std::exp(-z * at.tau)) * at.B.cast<cplx>();
        for (const auto& d : densities_) out += d.laplace(z, d.a, d.b, 1);
        return out;
    }

    /// Smallest strictly positive atom delay, or h when there is none.
    [[nodiscard]] double min_positive_delay() const {
        double m = h_;
        for (const auto& at : atoms_)
            if (at.tau > 0.0) m = std::min(m, at.tau);
        return m;
    }

    [[nodiscard]] DelayKernel scaled(double c) const {
        DelayKernel k = *this;
        for (auto& at : k.atoms_) at.B *= c;
        for (auto& d : k.densities_)
            for (auto& m : d.coeffs) m *= c;
        return k;
    }

    /// Sum of two kernels (supports are concatenated, h is the larger one).
    [[nodiscard]] DelayKernel plus(const DelayKernel& other) const {
        require(other.n_ == n_, ErrorCode::InvalidArgument, "kernel dimensions differ");
        auto atoms = atoms_;
        atoms.insert(atoms.end(), other.atoms_.begin(), other.atoms_.end());
        auto dens = densities_;
        dens.insert(dens.end(), other.densities_.begin(), other.densities_.end());
        return DelayKernel(n_, std::max(h_, other.h_), std::move(atoms), std::move(dens));
    }

private:
    void validate() const {
        require(n_ > 0, ErrorCode::InvalidArgument, "state dimension must be positive");
        require(h_ > 0.0 && std::isfinite(h_), ErrorCode::InvalidArgument, "maximal delay must be positive");
        const double slack = 1e-12 * std::max(1.0, h_);
        for (const auto& at : atoms_) {
            require(at.tau >= -slack && at.tau <= h_ + slack, ErrorCode::InvalidArgument,
                    "atom delay " + std::to_string(at.tau) + " outside [0, h]");
            require(at.B.rows() == n_ && at.B.cols() == n_, ErrorCode::InvalidArgument,
                    "atom matrix has wrong shape");
        }
        for (const auto& d : densities_) {
            require(d.a >= -slack && d.b <= h_ + slack && d.a < d.b, ErrorCode::InvalidArgument,
                    "density interval outside [0, h]");
            require(!d.coeffs.empty(), ErrorCode::InvalidArgument, "density without coefficients");
            for (const auto& m : d.coeffs)
                require(m.rows() == n_ && m.cols() == n_, ErrorCode::InvalidArgument,
                        "density coefficient has wrong shape");
        }
    }

    int n_ = 1;
    double h_ = 1.0;
    std::vector<Atom> atoms_;
    std::vector<Density> densities_;
};

} // namespace ddessm
