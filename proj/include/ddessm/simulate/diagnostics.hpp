#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "ddessm/projection/projection.hpp"
#include "ddessm/simulate/integrate.hpp"
#include "ddessm/ssm/expansion.hpp"

namespace ddessm {

/// Sup norm of x_t, from the grid nodes in [t - h, t] plus the endpoints.
inline double segment_norm(const Trajectory& tr, double t) {
    const double lo = t - tr.system().h();
    double m = std::max(sup_norm(VecC(tr.at(lo).cast<cplx>())), sup_norm(VecC(tr.at(t).cast<cplx>())));
    const double dt = tr.dt();
    for (double s = std::ceil(lo / dt) * dt; s < t; s += dt) m = std::max(m, tr.at(s).cwiseAbs().maxCoeff());
    return m;
}

struct DecayFit {
    double exponent = 0.0;
    double intercept = 0.0;
    bool non_decaying = false;
};

/// Least-squares slope of ln |x_t| over [t_from, t_to].
inline DecayFit measure_decay(const Trajectory& tr, double t_from, double t_to, int samples = 400) {
    t_to = std::min(t_to, tr.t_end());
    require(t_from < t_to && samples >= 2, ErrorCode::InvalidArgument, "empty decay window");
    std::vector<double> ts, ls;
    for (int k = 0; k < samples; ++k) {
        const double t = t_from + (t_to - t_from) * k / (samples - 1);
        const double v = segment_norm(tr, t);
        if (v <= 0.0 || !std::isfinite(v)) continue;
        ts.push_back(t);
        ls.push_back(std::log(v));
    }
    DecayFit f;
    if (ts.size() < 2) {
        f.exponent = -std::numeric_limits<double>::infinity();
        return f;
    }
    const double n = double(ts.size());
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / n;
    const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - mt) * (ts[i] - mt);
        sxy += (ts[i] - mt) * (ls[i] - ml);
    }
    f.exponent = sxy / sxx;
    f.intercept = ml - f.exponent * mt;
    f.non_decaying = f.exponent >= 0.0;
    return f;
}

/// Times of upward crossings of `level` by component i, linearly refined between nodes.
inline std::vector<double> upward_crossings(const Trajectory& tr, double t_from, int i = 0, double level = 0.0) {
    std::vector<double> out;
    for (std::size_t k = 1; k <= tr.steps(); ++k) {
        if (tr.time(k) <= t_from) continue;
        const double a = tr.state(k - 1)[i] - level, b = tr.state(k)[i] - level;
        if (a < 0.0 && b >= 0.0) out.push_back(tr.time(k - 1) + tr.dt() * a / (a - b));
    }
    return out;
}

/// Angular frequency from the mean spacing of upward zero crossings.
inline double oscillation_frequency(const Trajectory& tr, double t_from, int i = 0) {
    const auto z = upward_crossings(tr, t_from, i);
    require(z.size() >= 2, ErrorCode::NoCycle, "fewer than two zero crossings");
    return 2.0 * pi * double(z.size() - 1) / (z.back() - z.front());
}

struct CycleEstimate {
    double amplitude = 0.0;
    double period = 0.0;
    double mean = 0.0;
};

/// Amplitude (half peak-to-peak) and period of a settled oscillation in component i.
inline CycleEstimate extract_limit_cycle(const Trajectory& tr, double t_from, int i = 0, double settle_tol = 1e-3) {
    std::vector<double> peaks, troughs;
    for (std::size_t k = 1; k < tr.steps(); ++k) {
        if (tr.time(k) <= t_from) continue;
        const double a = tr.state(k - 1)[i], b = tr.state(k)[i], c = tr.state(k + 1)[i];
        // parabola through three nodes
        const double curv = a - 2.0 * b + c;
        const double top = curv != 0.0 ? b - 0.125 * (c - a) * (c - a) / curv : b;
        if (b > a && b >= c) peaks.push_back(top);
        if (b < a && b <= c) troughs.push_back(top);
    }
    require(peaks.size() >= 4 && troughs.size() >= 4, ErrorCode::NoCycle, "too few oscillations after the transient");
    const double p1 = peaks[peaks.size() - 1], p0 = peaks[peaks.size() - 2];
    const double q1 = troughs[troughs.size() - 1];
    const double amp = 0.5 * (p1 - q1);
    require(amp > 1e-8 && std::abs(p1 - p0) <= settle_tol * std::abs(p1 - q1), ErrorCode::NoCycle,
            "successive peaks still drift; no settled cycle");
    CycleEstimate c;
    c.amplitude = amp;
    c.mean = 0.5 * (p1 + q1);
    const auto z = upward_crossings(tr, t_from, i, c.mean);
    require(z.size() >= 2, ErrorCode::NoCycle, "fewer than two crossings of the cycle mean");
    c.period = (z.back() - z.front()) / double(z.size() - 1);
    return c;
}

struct ChartOptions {
    double radius = 0.5; ///< |P x_t| beyond this is outside the jet's validity
    int max_iter = 50;
    double tol = 1e-14;
};

/// Sup-norm gap between u and the manifold point with the same spectral coordinates.
/// The coordinates y solve P K(y) = P u by fixed-point iteration.
inline double distance_to_manifold(const History& u, const SSMModel& m, const SpectralProjector& proj,
                                   const ChartOptions& opt = {}) {
    const VecC target = proj.coords(u);
    require(proj.lift(target).sup_norm(m.h) <= opt.radius, ErrorCode::OutOfChart,
            "projected state lies outside the chart radius");
    VecC y = target;
    for (int it = 0; it < opt.max_iter; ++it) {
        const VecC step = target - proj.coords(m.eval(y));
        y += step;
        if (step.cwiseAbs().maxCoeff() <= opt.tol * (1.0 + y.cwiseAbs().maxCoeff())) break;
    }
    const ExpSum k = m.eval(y);
    double d = 0.0;
    for (double th : history_grid(m.h, 513)) d = std::max(d, sup_norm(VecC(u(th).real().cast<cplx>() - k(th))));
    return d;
}

inline double distance_to_manifold(const Trajectory& tr, const SSMModel& m, double t, const ChartOptions& opt = {}) {
    std::vector<cplx> sigma;
    for (const auto& e : m.eigen) sigma.push_back(e.lambda);
    const SpectralProjector proj(tr.system().kernel(), sigma);
    return distance_to_manifold(tr.segment(t), m, proj, opt);
}

} // namespace ddessm
