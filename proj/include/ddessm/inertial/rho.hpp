#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "ddessm/core/error.hpp"

namespace ddessm {

/// rho(x) = C1 / (alpha1 - x) + C2 / (x - alpha2) on (alpha2, alpha1), evaluated at x = exp(s / nu).
struct RhoParams {
    double alpha1 = 1.0;
    double alpha2 = 0.0;
    double C1 = 1.0;
    double C2 = 1.0;
    double nu = 1.0;

    [[nodiscard]] double operator()(double x) const { return C1 / (alpha1 - x) + C2 / (x - alpha2); }
    [[nodiscard]] double at_rate(double s) const { return (*this)(std::exp(s / nu)); }

    [[nodiscard]] double argmin() const {
        const double a = std::sqrt(C1), b = std::sqrt(C2);
        return (b * alpha1 + a * alpha2) / (a + b);
    }
    [[nodiscard]] double minimum() const {
        const double a = std::sqrt(C1) + std::sqrt(C2);
        return a * a / (alpha1 - alpha2);
    }
    [[nodiscard]] double rate_lo() const { return nu * std::log(alpha2); }
    [[nodiscard]] double rate_hi() const { return nu * std::log(alpha1); }
};

/// Lipschitz bound for the time-1/nu nonlinearity: (2 M^2 / omega)(e^{omega/nu} - 1) e^{omega/nu} Lip.
inline double lip_time_map(double M, double omega, double nu, double lip) {
    require(omega != 0.0 && nu > 0.0, ErrorCode::InvalidArgument, "omega must be nonzero and nu positive");
    const double e = std::exp(omega / nu);
    return 2.0 * M * M / omega * std::expm1(omega / nu) * e * lip;
}

/// Crossings gamma2 <= gamma1 (as rates s) of rho(e^{s/nu}) lip_n = 1.
struct RhoRoots {
    double gamma2 = 0.0;
    double gamma1 = 0.0;
    bool degenerate = false; ///< lip_n == 0: the whole interval qualifies
};

inline std::optional<RhoRoots> rho_decay_rate(const RhoParams& p, double lip_n) {
    require(p.alpha2 < p.alpha1 && p.alpha2 > 0.0, ErrorCode::InvalidArgument, "need 0 < alpha2 < alpha1");
    if (lip_n <= 0.0) return RhoRoots{p.rate_lo(), p.rate_hi(), true};
    if (p.minimum() * lip_n >= 1.0) return std::nullopt;

    auto g = [&](double x) { return p(x) * lip_n - 1.0; };
    const double xm = p.argmin();
    auto tol = [](double a, double b) { return std::abs(a - b) <= 4e-16 * std::max(std::abs(a), std::abs(b)); };
    auto solve = [&](double inner, double outer) {
        // move the outer end toward the pole until the sign flips
        double end = inner + 0.5 * (outer - inner);
        while (g(end) < 0.0) end = outer - 0.5 * (outer - end);
        std::uintmax_t iters = 200;
        const auto [a, b] = boost::math::tools::bisect(g, std::min(inner, end), std::max(inner, end), tol, iters);
        return 0.5 * (a + b);
    };
    const double x2 = solve(xm, p.alpha2);
    const double x1 = solve(xm, p.alpha1);
    return RhoRoots{p.nu * std::log(x2), p.nu * std::log(x1), false};
}

/// Samples of s -> rho(e^{s/nu}) lip_n on the open rate interval plus its unit crossings.
struct RhoCurve {
    RhoParams params;
    double lip_n = 0.0;
    std::vector<double> s;
    std::vector<double> values;
    std::optional<RhoRoots> roots;
};

inline RhoCurve sample_rho(const RhoParams& p, double lip_n, int samples = 1000) {
    RhoCurve c{p, lip_n, {}, {}, rho_decay_rate(p, lip_n)};
    const double lo = p.rate_lo(), hi = p.rate_hi();
    for (int k = 0; k < samples; ++k) {
        const double s = lo + (hi - lo) * (k + 0.5) / samples;
        c.s.push_back(s);
        c.values.push_back(p.at_rate(s) * lip_n);
    }
    return c;
}

} // namespace ddessm
