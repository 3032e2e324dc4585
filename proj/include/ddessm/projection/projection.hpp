#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ddessm/core/expsum.hpp"
#include "ddessm/core/quadrature.hpp"
#include "ddessm/spectrum/char_matrix.hpp"

namespace ddessm {

/// Pairing of a history with the kernel at z:
/// u(0) + sum over the kernel of the integral of exp(-z (sigma + s)) u(sigma), sigma in [-s, 0].
/// P_lambda u = exp(lambda .) xi(lambda) pairing(lambda, u) for simple lambda.
inline VecC pairing(const DelayKernel& k, cplx z, const History& u) {
    const auto& rule = gauss_rule<16>();
    VecC out = u(0.0);
    auto panels_for = [&](double len) { return 4 + static_cast<int>(std::ceil(2.0 * (std::abs(z) + 1.0) * len)); };
    const VecC zero = VecC::Zero(k.n());
    for (const auto& at : k.atoms()) {
        if (at.tau <= 0.0) continue;
        const VecC acc = integrate_composite(
            [&](double s) -> VecC { return std::exp(-z * (s + at.tau)) * u(s); }, -at.tau, 0.0,
            panels_for(at.tau), rule, zero);
        out += at.B.cast<cplx>() * acc;
    }
    for (const auto& d : k.densities()) {
        // sigma in [-a, 0]: the full density acts; sigma in [-b, -a]: only s >= -sigma
        const MatC full = d.laplace(z, d.a, d.b, 0);
        out += full * integrate_composite([&](double s) -> VecC { return std::exp(-z * s) * u(s); }, -d.a, 0.0,
                                          panels_for(d.a), rule, zero);
        out += integrate_composite(
            [&](double s) -> VecC { return std::exp(-z * s) * (d.laplace(z, -s, d.b, 0) * u(s)); }, -d.b, -d.a,
            panels_for(d.b - d.a), rule, zero);
    }
    return out;
}

/// Closed-form pairing of q exp(nu .): (Delta(nu) - Delta(z)) q / (nu - z), Delta'(z) q at nu = z.
inline VecC pairing(const CharMatrix& chi, cplx z, const ExpSum& u) {
    VecC out = VecC::Zero(chi.n());
    for (const auto& t : u.terms()) {
        const cplx gap = t.rate - z;
        if (std::abs(gap) <= 1e-5 * (1.0 + std::abs(z)))
            out += chi.delta_prime(z + 0.5 * gap) * t.coeff;
        else
            out += (chi.delta(t.rate) - chi.delta(z)) * t.coeff / gap;
    }
    return out;
}

/// Data attached to a simple characteristic root.
struct EigenData {
    cplx lambda;
    VecC c;      ///< right null vector of Delta(lambda), first nonzero entry real positive, unit max-norm
    VecC d;      ///< left null vector: d^T Delta(lambda) = 0
    cplx scale;  ///< d^T Delta'(lambda) c
    MatC xi;     ///< residue of Delta^{-1} at lambda
};

inline void normalize_direction(VecC& c) {
    const double m = sup_norm(c);
    require(m > 0.0, ErrorCode::InvalidArgument, "zero null vector");
    for (Eigen::Index i = 0; i < c.size(); ++i)
        if (std::abs(c[i]) > 1e-12 * m) {
            c *= std::abs(c[i]) / c[i];
            break;
        }
    c /= sup_norm(c);
}

/// Residue adj Delta(lambda) / (det Delta)'(lambda); throws MultipleRoot unless simple.
inline MatC xi_residue(const CharMatrix& chi, cplx lambda, double tol_deriv = 1e-8) {
    const auto d = chi.det(lambda);
    require(std::abs(d.derivative) > tol_deriv, ErrorCode::MultipleRoot,
            "root is not simple; the residue formula does not apply");
    if (chi.n() == 1) return MatC::Constant(1, 1, 1.0 / chi.delta_prime(lambda)(0, 0));
    return adjugate(chi.delta(lambda)) / d.derivative;
}

inline MatC xi_residue(const DelayKernel& k, cplx lambda, double tol_deriv = 1e-8) {
    return xi_residue(CharMatrix(k), lambda, tol_deriv);
}

inline EigenData eigen_data(const CharMatrix& chi, cplx lambda, double tol_deriv = 1e-8) {
    EigenData e;
    e.lambda = lambda;
    e.xi = xi_residue(chi, lambda, tol_deriv);
    const MatC D = chi.delta(lambda);
    const int n = chi.n();
    if (n == 1) {
        e.c = VecC::Ones(1);
        e.d = VecC::Ones(1);
    } else {
        Eigen::JacobiSVD<MatC> svd(D, Eigen::ComputeFullU | Eigen::ComputeFullV);
        e.c = svd.matrixV().col(n - 1);
        e.d = svd.matrixU().col(n - 1).conjugate();
        normalize_direction(e.c);
    }
    e.scale = (e.d.transpose() * chi.delta_prime(lambda) * e.c)(0, 0);
    return e;
}

/// Spectral projection onto the span of eigenfunctions for a set of simple roots.
class SpectralProjector {
public:
    SpectralProjector(DelayKernel kernel, const std::vector<cplx>& sigma, double tol_deriv = 1e-8)
        : chi_(std::move(kernel)) {
        for (cplx l : sigma) eig_.push_back(eigen_data(chi_, l, tol_deriv));
    }

    [[nodiscard]] const std::vector<EigenData>& eigen() const noexcept { return eig_; }
    [[nodiscard]] const CharMatrix& chi() const noexcept { return chi_; }
    [[nodiscard]] int size() const noexcept { return static_cast<int>(eig_.size()); }

    /// Coordinates y with P u = sum_j y_j c_j exp(lambda_j .).
    [[nodiscard]] VecC coords(const History& u) const {
        VecC y(size());
        for (int j = 0; j < size(); ++j) {
            const auto& e = eig_[j];
            y[j] = (e.d.transpose() * pairing(chi_.kernel(), e.lambda, u))(0, 0) / e.scale;
        }
        return y;
    }

    [[nodiscard]] VecC coords(const ExpSum& u) const {
        VecC y(size());
        for (int j = 0; j < size(); ++j) {
            const auto& e = eig_[j];
            y[j] = (e.d.transpose() * pairing(chi_, e.lambda, u))(0, 0) / e.scale;
        }
        return y;
    }

    [[nodiscard]] ExpSum lift(const VecC& y) const {
        ExpSum out(chi_.n());
        for (int j = 0; j < size(); ++j) out.add(eig_[j].lambda, y[j] * eig_[j].c);
        return out;
    }

    [[nodiscard]] ExpSum apply(const ExpSum& u) const { return lift(coords(u)); }
    [[nodiscard]] History apply(const History& u) const { return lift(coords(u)).as_history(); }

    /// Operator norm on C([-h, 0]) with the max norm, from the representing measure
    /// of theta -> (P u)(theta)_i, maximized over theta.
    [[nodiscard]] double norm(int theta_samples = 129) const {
        const auto& k = chi_.kernel();
        const double h = k.h();
        std::vector<double> cuts{-h, 0.0};
        for (const auto& at : k.atoms())
            if (at.tau > 0.0) cuts.push_back(-at.tau);
        for (const auto& d : k.densities()) {
            cuts.push_back(-d.a);
            cuts.push_back(-d.b);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        // row vector r_j(sigma) so that the sigma-density of the j-th coordinate is r_j(sigma) u(sigma)
        auto weight = [&](int j, double s) -> Eigen::RowVectorXcd {
            const auto& e = eig_[j];
            MatC acc = MatC::Zero(k.n(), k.n());
            for (const auto& at : k.atoms())
                if (at.tau > 0.0 && at.tau >= -s) acc += std::exp(-e.lambda * at.tau) * at.B.cast<cplx>();
            for (const auto& d : k.densities())
                if (d.b > -s) acc += d.laplace(e.lambda, std::max(d.a, -s), d.b, 0);
            return std::exp(-e.lambda * s) * (e.d.transpose() * acc) / e.scale;
        };

        auto value = [&](double th) {
            double best = 0.0;
            for (int i = 0; i < chi_.n(); ++i) {
                Eigen::RowVectorXcd atom = Eigen::RowVectorXcd::Zero(chi_.n());
                for (int j = 0; j < size(); ++j)
                    atom += std::exp(eig_[j].lambda * th) * eig_[j].c[i] * eig_[j].d.transpose() / eig_[j].scale;
                double total = atom.cwiseAbs().sum();
                auto dens = [&](double s) {
                    Eigen::RowVectorXcd r = Eigen::RowVectorXcd::Zero(chi_.n());
                    for (int j = 0; j < size(); ++j)
                        r += std::exp(eig_[j].lambda * th) * eig_[j].c[i] * weight(j, s);
                    return r.cwiseAbs().sum();
                };
                for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
                    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(dens, cuts[p], cuts[p + 1],
                                                                                          10, 1e-12);
                best = std::max(best, total);
            }
            return best;
        };

        double best = 0.0, arg = 0.0;
        for (int s = 0; s < theta_samples; ++s) {
            const double th = -h * s / (theta_samples - 1);
            const double v = value(th);
            if (v > best) {
                best = v;
                arg = th;
            }
        }
        // golden-section polish around the best grid point
        const double step = h / (theta_samples - 1);
        double lo = std::max(-h, arg - step), hi = std::min(0.0, arg + step);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = value(x1), f2 = value(x2);
        for (int it = 0; it < 40; ++it) {
            if (f1 > f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = value(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = value(x2);
            }
        }
        return std::max({best, f1, f2});
    }

private:
    CharMatrix chi_;
    std::vector<EigenData> eig_;
};

/// Projection onto the generalized eigenspace of a single root. Simple roots use the
/// residue formula; multiple roots use a small circle around lambda (trapezoid rule).
inline History project_history(const DelayKernel& k, cplx lambda, const History& u, double tol_deriv = 1e-8) {
    const CharMatrix chi(k);
    const auto d = chi.det(lambda);
    if (std::abs(d.derivative) > tol_deriv) {
        const VecC v = xi_residue(chi, lambda, tol_deriv) * pairing(k, lambda, u);
        return [v, lambda](double th) { return VecC(std::exp(lambda * th) * v); };
    }
    constexpr int nodes = 64;
    const double radius = 1e-3 * (1.0 + std::abs(lambda));
    std::vector<cplx> z(nodes);
    std::vector<VecC> w(nodes);
    for (int m = 0; m < nodes; ++m) {
        const cplx off = std::polar(radius, 2.0 * pi * (m + 0.5) / nodes);
        z[m] = lambda + off;
        w[m] = off / double(nodes) * chi.delta(z[m]).partialPivLu().solve(pairing(k, z[m], u));
    }
    return [z, w, n = k.n()](double th) {
        VecC v = VecC::Zero(n);
        for (std::size_t m = 0; m < z.size(); ++m) v += std::exp(z[m] * th) * w[m];
        return v;
    };
}

} // namespace ddessm
