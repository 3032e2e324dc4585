#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "ddessm/inertial/rho.hpp"
#include "ddessm/model/system.hpp"
#include "ddessm/projection/dichotomy.hpp"
#include "ddessm/projection/projection.hpp"
#include "ddessm/spectrum/spectrum.hpp"

namespace ddessm {

enum class Route { gap, small_delay, f_form, cutoff };
enum class Verdict { certified, not_certified, not_applicable };

constexpr const char* to_string(Route r) noexcept {
    switch (r) {
    case Route::gap: return "gap";
    case Route::small_delay: return "small_delay";
    case Route::f_form: return "f_form";
    case Route::cutoff: return "cutoff";
    }
    return "?";
}

constexpr const char* to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::certified: return "certified";
    case Verdict::not_certified: return "not_certified";
    case Verdict::not_applicable: return "not_applicable";
    }
    return "?";
}

/// lhs < rhs. Inequalities marked `alternative` only need one member of their group to hold.
struct Inequality {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    bool alternative = false;

    [[nodiscard]] bool holds() const { return lhs < rhs; }
};

struct IMCertificate {
    Route route = Route::gap;
    Verdict verdict = Verdict::not_certified;
    std::string failing; ///< first failing inequality when not certified
    std::map<std::string, double> witnesses;
    std::vector<Inequality> inequalities;
    std::optional<RhoRoots> rates; ///< kappa = rates->gamma2
    int smoothness = 1;

    [[nodiscard]] bool certified() const noexcept { return verdict == Verdict::certified; }
    [[nodiscard]] std::optional<double> kappa() const {
        if (rates) return rates->gamma2;
        return std::nullopt;
    }
    [[nodiscard]] double witness(const std::string& k) const { return witnesses.at(k); }
};

namespace detail {

inline double ln2() { return std::numbers::ln2; }

inline double nu_limit(double alpha, double beta, double e1, double e2) { return (alpha - beta - e1 - e2) / ln2(); }

// rhs of Lip < omega / (2 M (e^{omega/nu} - 1))
inline double lip_replacement_rhs(double M, double omega, double nu) {
    return omega / (2.0 * M * std::expm1(omega / nu));
}

inline double gap_lhs(double K1, double K2, double M, double lip) {
    const double s = std::sqrt(K1) + std::sqrt(K2);
    return s * s * 4.0 * M * M * lip;
}
inline double gap_rhs(double alpha, double e1, double omega, double nu) {
    return omega * std::exp((alpha - e1 - omega) / nu) / std::expm1(omega / nu);
}

inline double simplified_lhs(double K1, double K2, double M, double lip, double omega, double e1, double alpha) {
    const double s = std::sqrt(K1) + std::sqrt(K2);
    return s * s * 8.0 * M * M * lip * std::exp((omega + e1 - alpha) / std::abs(omega));
}

inline double rho_min_lhs(double C1, double C2, double a1, double a2, double lip_n) {
    const double s = std::sqrt(C1) + std::sqrt(C2);
    return s * s / (a1 - a2) * lip_n;
}

/// Evaluates every inequality of a route from the witness table alone.
inline std::vector<Inequality> route_inequalities(Route route, const std::map<std::string, double>& w) {
    auto get = [&](const char* k) { return w.at(k); };
    std::vector<Inequality> out;
    switch (route) {
    case Route::gap: {
        const double nu = get("nu"), M = get("M"), om = get("omega"), lip = get("lip"), al = get("alpha");
        const double K1 = get("K1"), K2 = get("K2"), e1 = get("eps1"), e2 = get("eps2");
        out.push_back({"nu_range", nu, nu_limit(al, get("beta"), e1, e2)});
        out.push_back({"lip_replacement", lip, lip_replacement_rhs(M, om, nu)});
        out.push_back({"gap_condition", gap_lhs(K1, K2, M, lip), gap_rhs(al, e1, om, nu), true});
        if (nu > std::abs(om))
            out.push_back({"simplified_gap_condition", simplified_lhs(K1, K2, M, lip, om, e1, al), nu, true});
        out.push_back({"rho_minimum",
                       rho_min_lhs(get("C1"), get("C2"), get("alpha1"), get("alpha2"), lip_time_map(M, om, nu, lip)),
                       1.0, true});
        if (w.count("kappa")) out.push_back({"negative_decay", get("kappa"), 0.0});
        break;
    }
    case Route::small_delay:
        out.push_back({"delay_bound", get("h"), get("h_bound")});
        break;
    case Route::f_form: {
        const double nu = get("nu"), lip = get("lip"), b2 = get("beta2"), h = get("h");
        const double s = 1.0 + std::exp(-b2 * h / 2.0);
        out.push_back({"lip_replacement", lip, lip_replacement_rhs(1.0, 1.0, nu)});
        out.push_back({"f_form_condition", 16.0 * s * s * lip, std::abs(b2)});
        break;
    }
    case Route::cutoff: {
        const double nu = get("nu"), M = get("M"), om = get("omega"), lip = get("lip");
        const double s = std::sqrt(get("C1")) + std::sqrt(get("C2"));
        const double denom = s * s * lip_time_map(M, om, nu, 1.0);
        out.push_back({"nu_range", nu, nu_limit(get("alpha"), get("beta"), get("eps1"), get("eps2"))});
        out.push_back({"lip_replacement", lip, lip_replacement_rhs(M, om, nu)});
        out.push_back({"cutoff_condition", lip, (get("alpha1") - get("alpha2")) / denom});
        break;
    }
    }
    return out;
}

inline Verdict judge(const std::vector<Inequality>& ineq, std::string& failing) {
    bool any_alt = false, alt_ok = false;
    for (const auto& q : ineq) {
        if (q.alternative) {
            any_alt = true;
            alt_ok = alt_ok || q.holds();
        } else if (!q.holds()) {
            failing = q.id;
            return Verdict::not_certified;
        }
    }
    if (any_alt && !alt_ok) {
        for (const auto& q : ineq)
            if (q.alternative) {
                failing = q.id;
                break;
            }
        return Verdict::not_certified;
    }
    failing.clear();
    return Verdict::certified;
}

inline void finish(IMCertificate& c) {
    c.inequalities = route_inequalities(c.route, c.witnesses);
    c.verdict = judge(c.inequalities, c.failing);
}

} // namespace detail

/// Replays a certificate: recomputes every inequality from the stored witnesses
/// and confirms both the numbers and the verdict.
inline bool recheck(const IMCertificate& c, double rel_tol = 1e-12) {
    if (c.verdict == Verdict::not_applicable) return true;
    const auto fresh = detail::route_inequalities(c.route, c.witnesses);
    if (fresh.size() != c.inequalities.size()) return false;
    auto close = [&](double a, double b) {
        return a == b || std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
    };
    for (std::size_t i = 0; i < fresh.size(); ++i)
        if (fresh[i].id != c.inequalities[i].id || !close(fresh[i].lhs, c.inequalities[i].lhs) ||
            !close(fresh[i].rhs, c.inequalities[i].rhs))
            return false;
    std::string failing;
    return detail::judge(fresh, failing) == c.verdict;
}

// ---------------------------------------------------------------- spectral gap

struct GapOptions {
    int nu_samples = 300;
    int k_max = 10; ///< cap for the reported smoothness
};

/// Certificate for a spectral gap alpha > beta with global Lipschitz constant lip.
inline IMCertificate certify_gap(double lip, double alpha, double beta, const DichotomyConstants& dc,
                                 const GapOptions& opt = {}) {
    IMCertificate c;
    c.route = Route::gap;
    auto& w = c.witnesses;
    w = {{"lip", lip},   {"alpha", alpha}, {"beta", beta}, {"M", dc.M},       {"omega", dc.omega},
         {"K1", dc.K1},  {"K2", dc.K2},    {"C1", dc.K1},  {"C2", dc.K2},     {"eps1", dc.eps1},
         {"eps2", dc.eps2}};
    const double nu_max = detail::nu_limit(alpha, beta, dc.eps1, dc.eps2);
    if (nu_max <= 0.0 || dc.omega == 0.0) {
        w["nu"] = std::max(nu_max, 0.0);
        c.verdict = Verdict::not_certified;
        c.failing = "nu_range";
        return c;
    }

    auto set_nu = [&](double nu) {
        w["nu"] = nu;
        w["alpha1"] = std::exp((alpha - dc.eps1) / nu);
        w["alpha2"] = std::exp((beta + dc.eps2) / nu);
        w.erase("kappa");
    };
    // log-slack of the binding requirement
    auto slack = [&](double nu) {
        set_nu(nu);
        double req = 1e300, alt = -1e300;
        for (const auto& q : detail::route_inequalities(Route::gap, w)) {
            const double s = std::log(q.rhs / q.lhs);
            const double v = std::isnan(s) ? (q.holds() ? 1e300 : -1e300) : s;
            if (q.alternative)
                alt = std::max(alt, v);
            else if (q.id != "nu_range")
                req = std::min(req, v);
        }
        return std::min(req, alt);
    };

    std::vector<double> grid;
    for (int k = 0; k < opt.nu_samples; ++k)
        grid.push_back(nu_max * std::pow(1e-4, double(opt.nu_samples - 1 - k) / (opt.nu_samples - 1)) *
                       (k == opt.nu_samples - 1 ? 1.0 - 1e-9 : 1.0));
    grid.push_back(detail::nu_limit(alpha, beta, dc.eps1, dc.eps2) - std::min(dc.eps1, dc.eps2) / detail::ln2());
    std::size_t best = 0;
    std::vector<double> vals;
    for (double nu : grid) vals.push_back(slack(nu));
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (vals[i] > vals[best]) best = i;
    double nu_best = grid[best], f_best = vals[best];
    if (best + 1 < opt.nu_samples && best > 0) {
        // golden-section polish inside the neighbouring bracket
        double lo = grid[best - 1], hi = grid[best + 1];
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = slack(x1), f2 = slack(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 > f2) {
                hi = x2, x2 = x1, f2 = f1, x1 = hi - g * (hi - lo), f1 = slack(x1);
            } else {
                lo = x1, x1 = x2, f1 = f2, x2 = lo + g * (hi - lo), f2 = slack(x2);
            }
        }
        if (f1 > f_best) nu_best = x1, f_best = f1;
        if (f2 > f_best) nu_best = x2, f_best = f2;
    }
    set_nu(nu_best);

    // decay rate from the rho curve at the chosen nu
    const RhoParams p{w["alpha1"], w["alpha2"], w["C1"], w["C2"], nu_best};
    if (lip < detail::lip_replacement_rhs(dc.M, dc.omega, nu_best)) {
        c.rates = rho_decay_rate(p, lip_time_map(dc.M, dc.omega, nu_best, lip));
        if (c.rates) c.smoothness = smoothness_degree(c.rates->gamma1, c.rates->gamma2, opt.k_max);
    }
    // with an unstable retained part the manifold only attracts when the decay rate is negative
    if (alpha > 0.0) w["kappa"] = c.rates ? c.rates->gamma2 : std::numeric_limits<double>::infinity();
    detail::finish(c);
    return c;
}

inline IMCertificate certify_gap(const DDESystem& sys, const SpectrumSlice& slice, const DichotomyConstants& dc,
                                 const GapOptions& opt = {}) {
    require(slice.beta().has_value(), ErrorCode::InsufficientDepth, "no root below the cut; the gap is unknown");
    return certify_gap(sys.lip_global(), slice.alpha(), *slice.beta(), dc, opt);
}

// ---------------------------------------------------------------- small delay

/// r from the three-term maximum in the small-delay bound.
inline double small_delay_rate(const DichotomyConstants& dc, double lip, double alpha, double gamma) {
    const double om = dc.omega;
    const double t1 = detail::simplified_lhs(dc.K1, dc.K2, dc.M, lip, om, dc.eps1, alpha);
    const double arg = om / (2.0 * dc.M * lip) + 1.0;
    const double t3 = (lip > 0.0 && arg > 0.0 && arg != 1.0) ? om / std::log(arg) : 0.0;
    return std::max({t1, std::abs(om), t3}) * detail::ln2() - gamma + dc.eps1 + dc.eps2;
}

inline double small_delay_bound(double Q, int n, double r, double gamma) {
    const double scale = std::pow(2.0 * Q, -1.0 / n);
    return std::min(std::log(scale * r) / r, std::log(scale * std::abs(gamma)) / std::abs(gamma));
}

inline double small_delay_cut(double Q, int n) { return -std::pow(2.0 * Q, 1.0 / n) - 1.0; }

/// Certificate from the delay bound, with alpha the lowest real part right of the cut.
inline IMCertificate certify_small_delay(double lip, double Q, int n, double h, double alpha,
                                         const DichotomyConstants& dc) {
    IMCertificate c;
    c.route = Route::small_delay;
    auto& w = c.witnesses;
    w = {{"lip", lip}, {"Q", Q}, {"n", double(n)}, {"h", h}, {"alpha", alpha}, {"M", dc.M}, {"omega", dc.omega},
         {"K1", dc.K1}, {"K2", dc.K2}, {"eps1", dc.eps1}, {"eps2", dc.eps2}};
    if (Q <= 0.0) {
        c.verdict = Verdict::not_applicable;
        c.failing = "degenerate_Q";
        return c;
    }
    const double gamma = small_delay_cut(Q, n);
    const double r = small_delay_rate(dc, lip, alpha, gamma);
    w["gamma"] = gamma;
    w["r"] = r;
    w["h_bound"] = small_delay_bound(Q, n, r, gamma);
    detail::finish(c);
    return c;
}

inline IMCertificate certify_small_delay(const DDESystem& sys, double eps = 1e-5) {
    const double Q = q_constant(sys.kernel());
    if (Q <= 0.0) return certify_small_delay(sys.lip_global(), Q, sys.n(), sys.h(), 0.0, {});
    const auto slice = roots_right_of(sys.kernel(), small_delay_cut(Q, sys.n()));
    require(!slice.roots.empty(), ErrorCode::NotComputed, "no roots right of the small-delay cut");
    return certify_small_delay(sys.lip_global(), Q, sys.n(), sys.h(), slice.alpha(),
                               dichotomy_series(slice, eps, eps));
}

// ---------------------------------------------------------------- full right-hand side

/// Largest h with 16 (1 + e^{-beta2 h / 2})^2 lip_f < |beta2|; zero when no h works.
inline double h_max(double beta2, double lip_f) {
    require(beta2 < -1.0, ErrorCode::BadBeta2, "beta2 must be below -1");
    if (lip_f <= 0.0) return std::numeric_limits<double>::infinity();
    const double root = std::sqrt(std::abs(beta2) / (16.0 * lip_f)) - 1.0;
    if (root <= 1.0) return 0.0;
    return 2.0 / std::abs(beta2) * std::log(root);
}

/// beta2 at which h_max reaches zero.
inline double beta2_boundary(double lip_f) { return -64.0 * lip_f; }

inline RhoParams tau_f_params(double beta2, double h, double eps = 1e-5) {
    const double nu = (-beta2 - 2.0 * eps) / detail::ln2();
    return {std::exp(-eps / nu), std::exp(beta2 / nu), 1.0, std::exp(-h * beta2), nu};
}

inline IMCertificate certify_f_form(double lip_f, double h, double beta2, double eps = 1e-5, int k_max = 10) {
    require(beta2 < -1.0, ErrorCode::BadBeta2, "beta2 must be below -1");
    IMCertificate c;
    c.route = Route::f_form;
    const auto p = tau_f_params(beta2, h, eps);
    c.witnesses = {{"lip", lip_f}, {"h", h},         {"beta2", beta2}, {"eps1", eps}, {"eps2", eps},
                   {"M", 1.0},     {"omega", 1.0},   {"K1", 1.0},      {"K2", std::exp(-beta2 * h)},
                   {"nu", p.nu},   {"alpha1", p.alpha1}, {"alpha2", p.alpha2}};
    detail::finish(c);
    if (c.certified()) {
        c.rates = rho_decay_rate(p, lip_time_map(1.0, 1.0, p.nu, lip_f));
        if (c.rates) c.smoothness = smoothness_degree(c.rates->gamma1, c.rates->gamma2, k_max);
    }
    return c;
}

inline IMCertificate certify_f_form(const DDESystem& sys, double beta2, double eps = 1e-5) {
    return certify_f_form(sys.lip_full(), sys.h(), beta2, eps);
}

// ---------------------------------------------------------------- decay curves

/// Rate-curve parameters for a real gap alpha > beta: nu = (alpha - beta - 3 eps)/ln 2.
inline RhoParams tau_r_params(double alpha, double beta, double eps = 1e-5, double C1 = 1.0, double C2 = 1.0) {
    const double nu = (alpha - beta - 3.0 * eps) / detail::ln2();
    return {std::exp((alpha - eps) / nu), std::exp((beta + eps) / nu), C1, C2, nu};
}

enum class CurveVariant { R, F };

struct CurveRequest {
    CurveVariant variant = CurveVariant::R;
    double alpha = 0.0; ///< R: top of the retained spectrum
    double beta = 0.0;  ///< R: top of the discarded spectrum
    double lip = 0.0;   ///< Lip(R) for R, Lip(F) for F
    double beta2 = -500.0;
    double h = 0.0;
    double eps = 1e-5;
    double M = 1.0;
    int samples = 1000;
};

inline RhoCurve tau_curves(const CurveRequest& q) {
    if (q.variant == CurveVariant::R) {
        const auto p = tau_r_params(q.alpha, q.beta, q.eps);
        return sample_rho(p, lip_time_map(q.M, q.alpha + q.eps, p.nu, q.lip), q.samples);
    }
    const auto p = tau_f_params(q.beta2, q.h, q.eps);
    return sample_rho(p, lip_time_map(1.0, 1.0, p.nu, q.lip), q.samples);
}

// ---------------------------------------------------------------- cutoff

enum class CutoffMode {
    weighted, ///< dichotomy bounds carry the projection norms: C1 = K1 |P|, C2 = K2 (1 + |P|)
    literal,  ///< C1 = K1, C2 = K2
};

struct CutoffResult {
    IMCertificate certificate;
    double rho_crit = 0.0; ///< largest radius for which the condition holds
};

/// Cutoff certificate for the ball of radius rho, given |P_Sigma| and lip_ball(delta) = Lip of R on a ball.
inline CutoffResult certify_with_cutoff(const std::function<double(double)>& lip_ball, double rho, double alpha,
                                        double beta, double proj_norm, const DichotomyConstants& dc,
                                        CutoffMode mode = CutoffMode::weighted) {
    require(static_cast<bool>(lip_ball), ErrorCode::MissingBallLipschitz, "no ball Lipschitz function");
    const double eps = std::min(dc.eps1, dc.eps2);
    const double nu = (alpha - beta - dc.eps1 - dc.eps2 - eps) / detail::ln2();
    require(nu > 0.0, ErrorCode::InvalidArgument, "no spectral gap");
    const double C = 2.0 * (1.0 + 2.0 * proj_norm);
    const double C1 = mode == CutoffMode::weighted ? dc.K1 * proj_norm : dc.K1;
    const double C2 = mode == CutoffMode::weighted ? dc.K2 * (1.0 + proj_norm) : dc.K2;

    CutoffResult out;
    auto& c = out.certificate;
    c.route = Route::cutoff;
    c.witnesses = {{"rho", rho},
                   {"proj_norm", proj_norm},
                   {"cutoff_factor", C},
                   {"lip", C * lip_ball(4.0 * rho)},
                   {"alpha", alpha},
                   {"beta", beta},
                   {"M", dc.M},
                   {"omega", dc.omega},
                   {"K1", dc.K1},
                   {"K2", dc.K2},
                   {"C1", C1},
                   {"C2", C2},
                   {"eps1", dc.eps1},
                   {"eps2", dc.eps2},
                   {"nu", nu},
                   {"alpha1", std::exp((alpha - dc.eps1) / nu)},
                   {"alpha2", std::exp((beta + dc.eps2) / nu)}};
    detail::finish(c);

    const auto& w = c.witnesses;
    const double s = std::sqrt(C1) + std::sqrt(C2);
    const double bound = std::min((w.at("alpha1") - w.at("alpha2")) / (s * s * lip_time_map(dc.M, dc.omega, nu, 1.0)),
                                  detail::lip_replacement_rhs(dc.M, dc.omega, nu));
    // lip_ball is increasing: bisect C lip_ball(4 rho) = bound
    double lo = 0.0, hi = 1.0;
    while (C * lip_ball(4.0 * hi) < bound && hi < 1e12) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (C * lip_ball(4.0 * mid) < bound ? lo : hi) = mid;
    }
    out.rho_crit = lo;
    c.witnesses["rho_crit"] = lo;
    return out;
}

inline CutoffResult certify_with_cutoff(const DDESystem& sys, double rho, const SpectrumSlice& slice,
                                        const DichotomyConstants& dc, CutoffMode mode = CutoffMode::weighted) {
    require(slice.beta().has_value(), ErrorCode::InsufficientDepth, "no root below the cut; the gap is unknown");
    const SpectralProjector proj(sys.kernel(), slice.values());
    const auto& jet = sys.jet();
    std::function<double(double)> lb = [&jet](double d) { return jet.lip_on_ball(d); };
    if (!jet.polynomial() && !jet.lip_ball) lb = nullptr;
    return certify_with_cutoff(lb, rho, slice.alpha(), *slice.beta(), proj.norm(), dc, mode);
}

} // namespace ddessm
