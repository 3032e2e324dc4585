#pragma once

#include <algorithm>
#include <cmath>

#include "ddessm/spectrum/spectrum.hpp"

namespace ddessm {

/// Growth bounds |T(t)| <= M exp(omega t) and the dichotomy constants K1, K2
/// for slack parameters eps1, eps2.
struct DichotomyConstants {
    double M = 1.0;
    double omega = 0.0;
    double K1 = 1.0;
    double K2 = 1.0;
    double eps1 = 1e-5;
    double eps2 = 1e-5;
};

/// Convergent eigen-expansion regime: unit constants, omega just above the top of the spectrum.
inline DichotomyConstants dichotomy_series(const SpectrumSlice& s, double eps1 = 1e-5, double eps2 = 1e-5) {
    require(s.all_simple(), ErrorCode::SeriesModeUnjustified,
            "series mode needs simple roots; supply conservative constants");
    require(!s.roots.empty(), ErrorCode::NotComputed, "empty spectral set");
    double top = s.roots.front().value.real();
    for (const auto& r : s.roots) top = std::max(top, r.value.real());
    return {1.0, top + 1e-6, 1.0, 1.0, eps1, eps2};
}

/// Constants for the right-hand-side form with a shifted linear part: K2 exp(beta2 h) = 1, omega = 1.
inline DichotomyConstants dichotomy_f_form(double beta2, double h, double eps1 = 1e-5, double eps2 = 1e-5) {
    require(beta2 < -1.0, ErrorCode::BadBeta2, "beta2 must be below -1");
    return {1.0, 1.0, 1.0, std::exp(-beta2 * h), eps1, eps2};
}

/// User-supplied constants, validated.
inline DichotomyConstants dichotomy_conservative(double M, double omega, double K1, double K2, double eps1 = 1e-5,
                                                 double eps2 = 1e-5) {
    require(M >= 1.0 && K1 > 0.0 && K2 > 0.0 && eps1 > 0.0 && eps2 > 0.0, ErrorCode::InvalidArgument,
            "dichotomy constants must be positive (M >= 1)");
    require(std::isfinite(omega), ErrorCode::InvalidArgument, "omega must be finite");
    return {M, omega, K1, K2, eps1, eps2};
}

} // namespace ddessm
