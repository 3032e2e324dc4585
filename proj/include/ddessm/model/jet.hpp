#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ddessm/core/error.hpp"
#include "ddessm/core/types.hpp"

namespace ddessm {

/// Taylor data of the nonlinear remainder R through order three.
///
/// R acts on the stacked vector v = (u(lag_0), ..., u(lag_{m-1})) in R^{n m}.
/// The derivative tensors are stored dense and row-major:
/// quadratic[(i * N + p) * N + q] = D^2R(0)[e_p, e_q]_i and similarly for the
/// cubic tensor, with N = n m. An empty vector stands for the zero map.
class NonlinearityJet {
public:
    using ExactMap = std::function<VecR(const VecR&)>;

    NonlinearityJet() = default;

    NonlinearityJet(int n, std::vector<double> lags, std::vector<double> quadratic = {},
                    std::vector<double> cubic = {})
        : n_(n), lags_(std::move(lags)), d2_(std::move(quadratic)), d3_(std::move(cubic)) {
        validate();
    }

    static NonlinearityJet zero(int n) { return NonlinearityJet(n, {0.0}); }

    /// a (x - sin x) applied to one component at one lag; not polynomial, so the
    /// exact map is kept for simulation and Lip(R) = 2|a| is attached.
    static NonlinearityJet x_minus_sin(int n, std::vector<double> lags, int component, int lag_index,
                                       double a) {
        const int N = n * static_cast<int>(lags.size());
        const int p = lag_index * n + component;
        std::vector<double> d3(static_cast<std::size_t>(n) * N * N * N, 0.0);
        d3[((static_cast<std::size_t>(component) * N + p) * N + p) * N + p] = a;
        NonlinearityJet jet(n, std::move(lags), {}, std::move(d3));
        jet.exact_ = [n, component, p, a](const VecR& v) {
            VecR out = VecR::Zero(n);
            out[component] = a * (v[p] - std::sin(v[p]));
            return out;
        };
        jet.lip_global = 2.0 * std::abs(a);
        return jet;
    }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] const std::vector<double>& lags() const noexcept { return lags_; }
    [[nodiscard]] int lag_count() const noexcept { return static_cast<int>(lags_.size()); }
    [[nodiscard]] int stacked_dim() const noexcept { return n_ * lag_count(); }
    [[nodiscard]] const std::vector<double>& quadratic() const noexcept { return d2_; }
    [[nodiscard]] const std::vector<double>& cubic() const noexcept { return d3_; }

    [[nodiscard]] bool has_quadratic() const {
        for (double c : d2_)
            if (c != 0.0) return true;
        return false;
    }
    [[nodiscard]] bool has_cubic() const {
        for (double c : d3_)
            if (c != 0.0) return true;
        return false;
    }
    [[nodiscard]] bool is_zero() const { return !has_quadratic() && !has_cubic() && !exact_; }

    /// True when R equals its cubic Taylor polynomial.
    [[nodiscard]] bool polynomial() const noexcept { return !exact_; }

    void set_exact(ExactMap f) { exact_ = std::move(f); }
    [[nodiscard]] const ExactMap& exact() const noexcept { return exact_; }

    [[nodiscard]] double d2(int i, int p, int q) const {
        if (d2_.empty()) return 0.0;
        const std::size_t N = stacked_dim();
        return d2_[(i * N + p) * N + q];
    }
    [[nodiscard]] double d3(int i, int p, int q, int r) const {
        if (d3_.empty()) return 0.0;
        const std::size_t N = stacked_dim();
        return d3_[((i * N + p) * N + q) * N + r];
    }

    /// D^2R(0)[a, b] for complex stacked vectors.
    [[nodiscard]] VecC apply2(const VecC& a, const VecC& b) const {
        VecC out = VecC::Zero(n_);
        if (d2_.empty()) return out;
        const int N = stacked_dim();
        for (int i = 0; i < n_; ++i)
            for (int p = 0; p < N; ++p) {
                if (a[p] == 0.0) continue;
                for (int q = 0; q < N; ++q) out[i] += d2(i, p, q) * a[p] * b[q];
            }
        return out;
    }

    /// D^3R(0)[a, b, c] for complex stacked vectors.
    [[nodiscard]] VecC apply3(const VecC& a, const VecC& b, const VecC& c) const {
        VecC out = VecC::Zero(n_);
        if (d3_.empty()) return out;
        const int N = stacked_dim();
        for (int i = 0; i < n_; ++i)
            for (int p = 0; p < N; ++p) {
                if (a[p] == 0.0) continue;
                for (int q = 0; q < N; ++q) {
                    if (b[q] == 0.0) continue;
                    for (int r = 0; r < N; ++r) out[i] += d3(i, p, q, r) * a[p] * b[q] * c[r];
                }
            }
        return out;
    }

    /// R(v): the exact map when one is attached, the cubic jet otherwise.
    [[nodiscard]] VecR eval(const VecR& v) const {
        if (exact_) return exact_(v);
        const VecC vc = v.cast<cplx>();
        return (0.5 * apply2(vc, vc) + apply3(vc, vc, vc) / 6.0).real();
    }

    /// max_i sum_{p,q} |D^2R_ipq|: the norm of D^2R(0) as a bilinear map in sup norms.
    [[nodiscard]] double quadratic_norm() const { return tensor_norm(d2_, 2); }
    [[nodiscard]] double cubic_norm() const { return tensor_norm(d3_, 3); }

    /// Lipschitz constant of R on the closed ball of radius delta.
    [[nodiscard]] double lip_on_ball(double delta) const {
        if (lip_ball) return lip_ball(delta);
        require(polynomial(), ErrorCode::MissingBallLipschitz,
                "nonlinearity is not polynomial and no ball Lipschitz function was given");
        return quadratic_norm() * delta + 0.5 * cubic_norm() * delta * delta;
    }

    std::optional<double> lip_global;
    std::function<double(double)> lip_ball;

private:
    [[nodiscard]] double tensor_norm(const std::vector<double>& t, int order) const {
        if (t.empty()) return 0.0;
        std::size_t block = 1;
        for (int k = 0; k < order; ++k) block *= static_cast<std::size_t>(stacked_dim());
        double best = 0.0;
        for (int i = 0; i < n_; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < block; ++k) s += std::abs(t[i * block + k]);
            best = std::max(best, s);
        }
        return best;
    }

    void validate() const {
        require(n_ > 0, ErrorCode::InvalidArgument, "jet dimension must be positive");
        require(!lags_.empty(), ErrorCode::InvalidArgument, "jet needs at least one evaluation lag");
        for (double th : lags_)
            require(th <= 0.0, ErrorCode::InvalidArgument, "evaluation lags must lie in [-h, 0]");
        const std::size_t N = stacked_dim();
        require(d2_.empty() || d2_.size() == n_ * N * N, ErrorCode::InvalidArgument,
                "quadratic tensor must have n*N*N entries");
        require(d3_.empty() || d3_.size() == n_ * N * N * N, ErrorCode::InvalidArgument,
                "cubic tensor must have n*N*N*N entries");
        const auto close = [](double x, double y) {
            return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
        };
        const int Ni = static_cast<int>(N);
        for (int i = 0; i < n_ && !d2_.empty(); ++i)
            for (int p = 0; p < Ni; ++p)
                for (int q = p + 1; q < Ni; ++q)
                    require(close(d2(i, p, q), d2(i, q, p)), ErrorCode::InvalidArgument,
                            "quadratic tensor is not symmetric");
        for (int i = 0; i < n_ && !d3_.empty(); ++i)
            for (int p = 0; p < Ni; ++p)
                for (int q = 0; q < Ni; ++q)
                    for (int r = 0; r < Ni; ++r) {
                        const double v = d3(i, p, q, r);
                        require(close(v, d3(i, q, p, r)) && close(v, d3(i, p, r, q)),
                                ErrorCode::InvalidArgument, "cubic tensor is not symmetric");
                    }
    }

    int n_ = 1;
    std::vector<double> lags_{0.0};
    std::vector<double> d2_;
    std::vector<double> d3_;
    ExactMap exact_;
};

} // namespace ddessm
