#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "ddessm/core/types.hpp"

namespace ddessm {

/// History function on [-h, 0] given as a callable; complex values allowed.
using History = std::function<VecC(double)>;

/// Finite sum of vector exponentials theta -> sum_k coeff_k exp(rate_k theta).
class ExpSum {
public:
    struct Term {
        cplx rate;
        VecC coeff;
    };

    ExpSum() = default;
    explicit ExpSum(int n) : n_(n) {}
    ExpSum(int n, cplx rate, VecC coeff) : n_(n) { add(rate, std::move(coeff)); }

    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }

    /// Adds coeff exp(rate theta), merging with a term of the same rate.
    void add(cplx rate, const VecC& coeff) {
        for (auto& t : terms_)
            if (std::abs(t.rate - rate) <= 1e-13 * (1.0 + std::abs(rate))) {
                t.coeff += coeff;
                return;
            }
        terms_.push_back({rate, coeff});
    }

    [[nodiscard]] VecC operator()(double theta) const {
        VecC v = VecC::Zero(n_);
        for (const auto& t : terms_) v += std::exp(t.rate * theta) * t.coeff;
        return v;
    }

    [[nodiscard]] VecC derivative(double theta) const {
        VecC v = VecC::Zero(n_);
        for (const auto& t : terms_) v += (t.rate * std::exp(t.rate * theta)) * t.coeff;
        return v;
    }

    ExpSum& operator+=(const ExpSum& o) {
        if (n_ == 0) n_ = o.n_;
        for (const auto& t : o.terms_) add(t.rate, t.coeff);
        return *this;
    }

    ExpSum& operator*=(cplx s) {
        for (auto& t : terms_) t.coeff *= s;
        return *this;
    }

    friend ExpSum operator+(ExpSum a, const ExpSum& b) { return a += b; }
    friend ExpSum operator*(cplx s, ExpSum a) { return a *= s; }

    [[nodiscard]] ExpSum conj() const {
        ExpSum out(n_);
        for (const auto& t : terms_) out.terms_.push_back({std::conj(t.rate), t.coeff.conjugate()});
        return out;
    }

    [[nodiscard]] History as_history() const {
        return [self = *this](double th) { return self(th); };
    }

    /// Max over a uniform grid of `samples` points on [-h, 0].
    [[nodiscard]] double sup_norm(double h, int samples = 512) const {
        double m = 0.0;
        for (int k = 0; k < samples; ++k) m = std::max(m, ddessm::sup_norm((*this)(-h * k / (samples - 1))));
        return m;
    }

private:
    int n_ = 0;
    std::vector<Term> terms_;
};

/// Uniform grid of `samples` points on [-h, 0], left to right.
inline std::vector<double> history_grid(double h, int samples = 512) {
    std::vector<double> g(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) g[k] = -h + h * k / (samples - 1);
    return g;
}

inline double sup_norm(const History& u, double h, int samples = 512) {
    double m = 0.0;
    for (double th : history_grid(h, samples)) m = std::max(m, sup_norm(u(th)));
    return m;
}

} // namespace ddessm
