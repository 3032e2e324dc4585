#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "ddessm/core/expsum.hpp"
#include "ddessm/core/quadrature.hpp"
#include "ddessm/model/system.hpp"

namespace ddessm {

/// Piecewise cubic Hermite interpolant on a uniform grid t_k = k dt, preceded by
/// the initial history for t <= 0.
class HermiteTrack {
public:
    HermiteTrack() = default;
    HermiteTrack(History before, double dt, double t0 = 0.0) : before_(std::move(before)), t0_(t0), dt_(dt) {}

    void push(VecR x, VecR dx) {
        x_.push_back(std::move(x));
        dx_.push_back(std::move(dx));
    }

    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double t0() const noexcept { return t0_; }
    [[nodiscard]] std::size_t size() const noexcept { return x_.size(); }
    [[nodiscard]] double time(std::size_t k) const noexcept { return t0_ + dt_ * double(k); }
    [[nodiscard]] double t_last() const noexcept { return x_.empty() ? t0_ : time(x_.size() - 1); }
    [[nodiscard]] const VecR& state(std::size_t k) const { return x_.at(k); }
    [[nodiscard]] const VecR& slope(std::size_t k) const { return dx_.at(k); }

    [[nodiscard]] VecR operator()(double t) const {
        if (x_.empty() || t < t0_) return before_(t).real();
        const double u = (t - t0_) / dt_;
        auto k = static_cast<std::size_t>(std::floor(u));
        if (k + 1 >= x_.size()) {
            if (k >= x_.size() - 1 && t <= t_last() + 1e-12 * dt_) return x_.back();
            k = x_.size() - 2;
        }
        const double s = u - double(k);
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * x_[k] + (s3 - 2 * s2 + s) * dt_ * dx_[k] + (-2 * s3 + 3 * s2) * x_[k + 1] +
               (s3 - s2) * dt_ * dx_[k + 1];
    }

    /// Copy of the part needed to evaluate [from, to]; values before the first kept node come
    /// from this track, so the copy never refers back to it.
    [[nodiscard]] HermiteTrack window(double from, double to) const {
        if (x_.empty() || to < t0_) return *this;
        const double u = std::max(0.0, std::floor((from - t0_) / dt_) - 1.0);
        const auto first = std::min(static_cast<std::size_t>(u), x_.size() - 1);
        const auto last = std::min(x_.size() - 1, static_cast<std::size_t>(std::ceil((to - t0_) / dt_)) + 1);
        HermiteTrack w;
        w.dt_ = dt_;
        w.t0_ = time(first);
        w.x_.assign(x_.begin() + first, x_.begin() + last + 1);
        w.dx_.assign(dx_.begin() + first, dx_.begin() + last + 1);
        if (first == 0)
            w.before_ = before_;
        else // never reached for t >= from
            w.before_ = [x = x_[first]](double) { return VecC(x.cast<cplx>()); };
        return w;
    }

private:
    History before_;
    double t0_ = 0.0;
    double dt_ = 0.0;
    std::vector<VecR> x_;
    std::vector<VecR> dx_;
};

struct SimOptions {
    double dt = 0.0;            ///< 0 picks min(h/64, smallest atom delay/8)
    double blowup_bound = 1e8;  ///< |x| beyond this aborts with Blowup
};

class Trajectory {
public:
    Trajectory(DDESystem sys, History initial, HermiteTrack track)
        : sys_(std::move(sys)), initial_(std::move(initial)), track_(std::move(track)) {}

    [[nodiscard]] const DDESystem& system() const noexcept { return sys_; }
    [[nodiscard]] const History& initial() const noexcept { return initial_; }
    [[nodiscard]] const HermiteTrack& track() const noexcept { return track_; }
    [[nodiscard]] double dt() const noexcept { return track_.dt(); }
    [[nodiscard]] double t_end() const noexcept { return track_.t_last(); }
    [[nodiscard]] std::size_t steps() const noexcept { return track_.size() - 1; }
    [[nodiscard]] double time(std::size_t k) const noexcept { return track_.time(k); }
    [[nodiscard]] const VecR& state(std::size_t k) const { return track_.state(k); }

    /// x(t) for -h <= t <= t_end.
    [[nodiscard]] VecR at(double t) const { return track_(t); }

    /// History segment x_t: theta -> x(t + theta) on [-h, 0]. Owns its data.
    [[nodiscard]] History segment(double t) const {
        require(t <= t_end() + 1e-9 * dt(), ErrorCode::InvalidArgument, "segment beyond the integrated range");
        auto w = std::make_shared<const HermiteTrack>(track_.window(t - sys_.h(), t));
        return [w, t](double th) { return VecC((*w)(t + th).cast<cplx>()); };
    }

private:
    DDESystem sys_;
    History initial_;
    HermiteTrack track_;
};

/// Step that divides the smallest positive atom delay and is at most `target`.
inline double aligned_step(const DelayKernel& k, double target) {
    double tau = 0.0;
    for (const auto& a : k.atoms())
        if (a.tau > 0.0) tau = tau == 0.0 ? a.tau : std::min(tau, a.tau);
    if (tau == 0.0) return target;
    return tau / std::ceil(tau / target - 1e-9);
}

inline double default_step(const DelayKernel& k) {
    double dt = k.h() / 64.0;
    for (const auto& a : k.atoms())
        if (a.tau > 0.0) dt = std::min(dt, a.tau / 8.0);
    return aligned_step(k, dt);
}

namespace detail {

// Evaluates f(x_t) with x supplied by `x_at`; densities use 4-node Gauss cells aligned with the step grid
template <class Lookup>
VecR rhs(const DDESystem& sys, double t, double dt, double phase, const Lookup& x_at) {
    const auto& k = sys.kernel();
    VecR out = VecR::Zero(sys.n());
    for (const auto& a : k.atoms()) out += a.B * x_at(t - a.tau);
    const auto& g = gauss_rule<4>();
    for (const auto& d : k.densities()) {
        // breakpoints of the interpolant, seen from lag s: s = phase + m dt
        double lo = d.a;
        while (lo < d.b) {
            const double m = std::floor((lo - phase) / dt + 1e-9) + 1.0;
            const double hi = std::min(d.b, std::max(phase + m * dt, lo + 1e-12));
            const double half = 0.5 * (hi - lo), mid = lo + half;
            for (std::size_t q = 0; q < g.size(); ++q) {
                const double s = mid + half * g.nodes[q];
                out += (half * g.weights[q]) * (d.at(s) * x_at(t - s));
            }
            lo = hi;
        }
    }
    const auto& jet = sys.jet();
    if (!jet.is_zero()) {
        VecR v(jet.stacked_dim());
        for (int i = 0; i < jet.lag_count(); ++i) v.segment(i * sys.n(), sys.n()) = x_at(t + jet.lags()[i]);
        out += jet.eval(v);
    }
    return out;
}

} // namespace detail

/// Classical RK4 by the method of steps. Lagged values come from the Hermite
/// interpolant of past steps; lookups inside the current step use a quadratic
/// through x_k, x'_k and the stage state.
inline Trajectory integrate(const DDESystem& sys, const History& initial, double t_end, const SimOptions& opt = {}) {
    require(t_end >= 0.0, ErrorCode::InvalidArgument, "t_end must be non-negative");
    const auto& k = sys.kernel();
    const double dt = opt.dt > 0.0 ? aligned_step(k, opt.dt) : default_step(k);
    for (const auto& a : k.atoms())
        require(a.tau == 0.0 || dt <= a.tau * (1.0 + 1e-12), ErrorCode::InvalidArgument,
                "step longer than a point delay");
    const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));

    HermiteTrack track(initial, dt);
    const VecR x0 = initial(0.0).real();
    auto past = [&](double s) { return track(s); };
    track.push(x0, detail::rhs(sys, 0.0, dt, 0.0, past));

    for (std::size_t step = 0; step < steps; ++step) {
        const double tk = track.t_last();
        const VecR& xk = track.state(step);
        const VecR& fk = track.slope(step);
        auto stage = [&](double c, const VecR& y) {
            auto x_at = [&](double s) -> VecR {
                if (s <= tk + 1e-12 * dt) return track(s);
                const double sig = (s - tk) / (c * dt);
                return xk + fk * (s - tk) + (y - xk - fk * (c * dt)) * (sig * sig);
            };
            return detail::rhs(sys, tk + c * dt, dt, c * dt, x_at);
        };
        const VecR k1 = fk;
        const VecR k2 = stage(0.5, xk + 0.5 * dt * k1);
        const VecR k3 = stage(0.5, xk + 0.5 * dt * k2);
        const VecR k4 = stage(1.0, xk + dt * k3);
        VecR next = xk + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        require(next.allFinite() && next.cwiseAbs().maxCoeff() <= opt.blowup_bound, ErrorCode::Blowup,
                "state left the bound at t = " + std::to_string(tk + dt));
        track.push(next, stage(1.0, next));
    }
    return {sys, initial, std::move(track)};
}

} // namespace ddessm
