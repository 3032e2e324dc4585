#pragma once

#include "ddessm/model/kernel.hpp"

namespace ddessm {

/// Adjugate (transposed cofactor matrix); adj(A) A = det(A) I.
inline MatC adjugate(const MatC& A) {
    const Eigen::Index n = A.rows();
    if (n == 1) return MatC::Ones(1, 1);
    if (n == 2) {
        MatC adj(2, 2);
        adj << A(1, 1), -A(0, 1), -A(1, 0), A(0, 0);
        return adj;
    }
    MatC adj(n, n);
    MatC minor(n - 1, n - 1);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
                if (r == i) continue;
                for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
                    if (c == j) continue;
                    minor(rr, cc++) = A(r, c);
                }
                ++rr;
            }
            const double sign = ((i + j) % 2 == 0) ? 1.0 : -1.0;
            adj(j, i) = sign * minor.determinant();
        }
    return adj;
}

/// det(Delta(z)) together with its z-derivative.
struct DetValue {
    cplx value;
    cplx derivative;
};

/// Characteristic matrix Delta(z) = z I - integral of exp(-z t) d zeta(t), in closed form.
class CharMatrix {
public:
    explicit CharMatrix(DelayKernel kernel) : kernel_(std::move(kernel)) {}

    [[nodiscard]] const DelayKernel& kernel() const noexcept { return kernel_; }
    [[nodiscard]] int n() const noexcept { return kernel_.n(); }

    [[nodiscard]] MatC delta(cplx z) const {
        MatC d = -kernel_.laplace(z);
        d.diagonal().array() += z;
        return d;
    }

    [[nodiscard]] MatC delta_prime(cplx z) const {
        MatC d = kernel_.laplace_moment(z);
        d.diagonal().array() += 1.0;
        return d;
    }

    /// det and d/dz det via Jacobi's formula tr(adj(Delta) Delta').
    [[nodiscard]] DetValue det(cplx z) const {
        const MatC D = delta(z);
        const MatC Dp = delta_prime(z);
        if (n() == 1) return {D(0, 0), Dp(0, 0)};
        return {D.determinant(), (adjugate(D) * Dp).trace()};
    }

private:
    DelayKernel kernel_;
};

} // namespace ddessm
