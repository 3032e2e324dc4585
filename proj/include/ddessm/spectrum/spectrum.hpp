#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "ddessm/model/constants.hpp"
#include "ddessm/spectrum/roots.hpp"

namespace ddessm {

/// Characteristic roots right of a cut line, plus the nearest roots below it.
struct SpectrumSlice {
    double gamma = 0.0;
    std::vector<Root> roots;    ///< Re >= gamma, sorted by decreasing real part
    std::vector<Root> below;    ///< roots of the first non-empty band under gamma
    double complete_to = 0.0;   ///< every root with Re >= complete_to is in roots or below
    bool conjugate_closed = true;

    [[nodiscard]] double alpha() const {
        require(!roots.empty(), ErrorCode::NotComputed, "empty spectral set");
        double a = roots.front().value.real();
        for (const auto& r : roots) a = std::min(a, r.value.real());
        return a;
    }

    /// Largest real part under the cut; empty when none was found within the search depth.
    [[nodiscard]] std::optional<double> beta() const {
        if (below.empty()) return std::nullopt;
        double b = below.front().value.real();
        for (const auto& r : below) b = std::max(b, r.value.real());
        return b;
    }

    [[nodiscard]] std::vector<cplx> values() const {
        std::vector<cplx> v;
        for (const auto& r : roots) v.push_back(r.value);
        return v;
    }

    [[nodiscard]] bool all_simple() const {
        return std::all_of(roots.begin(), roots.end(), [](const Root& r) { return r.multiplicity == 1; }) &&
               std::all_of(below.begin(), below.end(), [](const Root& r) { return r.multiplicity == 1; });
    }

    /// Roots counted with multiplicity.
    [[nodiscard]] int dimension() const {
        int d = 0;
        for (const auto& r : roots) d += r.multiplicity;
        return d;
    }
};

/// Default C1 for the root localization |z| <= C1 exp(h max(0, -Re z)).
inline double strip_constant(const DelayKernel& k, const RootOptions& opt = {}) {
    if (opt.strip_constant) return *opt.strip_constant;
    return total_variation(k) * k.n() * std::numbers::e;
}

/// Box containing every root with Re z >= re_lo. Any root is an eigenvalue of the
/// transformed kernel, so |z| is at most the weighted variation at Re z; a user
/// strip constant replaces that bound.
inline Rect strip_box(const DelayKernel& k, double re_lo, const RootOptions& opt = {}) {
    if (opt.box) return *opt.box;
    double height = 0.0, right = 0.0;
    if (opt.strip_constant) {
        height = *opt.strip_constant * std::exp(k.h() * std::max(0.0, -re_lo));
        right = *opt.strip_constant;
    } else {
        height = weighted_variation(k, std::min(re_lo, 0.0));
        right = weighted_variation(k, 0.0);
    }
    height += 1.0;
    require(std::isfinite(height) && height <= opt.strip_height_cap, ErrorCode::StripBoundUnavailable,
            "root strip too tall for a contour search; supply a search box");
    return {re_lo, right + 1.0, -height, height};
}

/// Lowest real part whose strip still fits under the height cap.
inline double strip_floor(const DelayKernel& k, const RootOptions& opt = {}) {
    if (opt.box) return opt.box->re_lo;
    auto fits = [&](double x) {
        try {
            (void)strip_box(k, x, opt);
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    double hi = 0.0, lo = -1.0;
    if (!fits(hi)) return 0.0;
    while (fits(lo)) {
        hi = lo;
        lo *= 2.0;
        if (lo < -1e8) return lo;
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fits(mid) ? hi : lo) = mid;
    }
    return hi;
}

namespace detail {

inline Rect band_box(const CharMatrix& chi, double lo, double hi, const RootOptions& opt) {
    Rect box = strip_box(chi.kernel(), lo, opt);
    box.re_lo = std::max(box.re_lo, lo);
    box.re_hi = std::min(box.re_hi, hi);
    return box;
}

/// Roots of the highest non-empty unit-width sub-band of [lo, hi); `lo` is
/// updated to the lower edge of the band that was resolved.
inline std::vector<Root> top_band(const CharMatrix& chi, double& lo, double hi, const RootOptions& opt) {
    for (;;) {
        const Rect box = band_box(chi, lo, hi, opt);
        if (box.re_hi <= box.re_lo) return {};
        if (hi - lo > 1.0) {
            const double mid = 0.5 * (lo + hi);
            Rect upper = band_box(chi, mid, hi, opt);
            int count = 0;
            for (int k = 0; k < 8; ++k) {
                try {
                    count = count_roots_in_rect(chi, upper, opt);
                    break;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::BoundaryRoot || k == 7) throw;
                    upper.re_lo -= 3e-6 * (k + 1) * (k + 1) * (1.0 + std::abs(mid) + upper.height());
                }
            }
            if (count > 0)
                lo = upper.re_lo;
            else
                hi = upper.re_lo;
            if (count > 0 || count_roots_in_rect(chi, band_box(chi, lo, hi, opt), opt) > 0) continue;
            return {};
        }
        auto found = RootFinder(chi, opt).find(box);
        std::erase_if(found, [&](const Root& r) { return r.value.real() < lo || r.value.real() >= hi; });
        return found;
    }
}

} // namespace detail

/// All roots with Re >= gamma, then a downward search of widening bands
/// [gamma - depth, gamma) that stops at the first band holding roots.
inline SpectrumSlice roots_right_of(const DelayKernel& kernel, double gamma, const RootOptions& opt = {},
                                    std::optional<double> depth = std::nullopt) {
    const CharMatrix chi(kernel);
    SpectrumSlice s;
    s.gamma = gamma;
    {
        Rect box = strip_box(kernel, gamma, opt);
        box.re_lo = std::max(box.re_lo, gamma);
        s.roots = RootFinder(chi, opt).find(box);
        std::erase_if(s.roots, [&](const Root& r) { return r.value.real() < gamma; });
    }
    s.conjugate_closed = conjugate_close(s.roots);

    const double reach = depth.value_or(3.0 * std::abs(gamma) + 5.0);
    double hi = gamma, width = 1.0;
    s.complete_to = gamma;
    const double floor = strip_floor(kernel, opt);
    while (gamma - hi < reach && hi > floor) {
        double lo = std::max({hi - width, gamma - reach, floor});
        const double band_lo = lo;
        std::vector<Root> band;
        try {
            band = detail::top_band(chi, lo, hi, opt);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::StripBoundUnavailable) break;
            throw;
        }
        if (!band.empty()) {
            s.complete_to = lo;
            s.conjugate_closed = conjugate_close(band) && s.conjugate_closed;
            s.below = std::move(band);
            break;
        }
        s.complete_to = band_lo;
        hi = band_lo;
        width *= 2.0;
    }
    return s;
}

/// Re-cut a slice: roots left of `cut` move to the discarded side.
inline SpectrumSlice restrict_slice(const SpectrumSlice& s, double cut) {
    require(cut >= s.gamma, ErrorCode::InsufficientDepth, "cut lies below the searched region");
    SpectrumSlice out = s;
    out.gamma = cut;
    out.roots.clear();
    std::vector<Root> moved;
    for (const auto& r : s.roots) (r.value.real() >= cut ? out.roots : moved).push_back(r);
    if (!moved.empty()) out.below = std::move(moved);
    return out;
}

/// Largest l <= k_max with beta < l alpha (at least 1); k_max when alpha >= 0.
inline int smoothness_degree(double alpha, std::optional<double> beta, int k_max) {
    require(k_max >= 1, ErrorCode::InvalidArgument, "k_max must be positive");
    if (alpha >= 0.0 || !beta) return k_max;
    int ell = 1;
    for (int l = 1; l <= k_max; ++l)
        if (*beta < l * alpha) ell = l;
    return ell;
}

inline int smoothness_degree(const SpectrumSlice& s, int k_max) {
    return smoothness_degree(s.alpha(), s.beta(), k_max);
}

enum class SubsetKind { stable, unstable };

struct Resonance {
    int order = 0; ///< number of summands
    int split = 0; ///< how many come from the complementary set (stable case)
    cplx combination;
    cplx target;
};

struct NonresonanceReport {
    int r = 0;
    bool satisfied = true;
    std::vector<Resonance> violations;
};

namespace detail {

/// Multisets of `count` entries of `pool` (sorted by decreasing real part), with pruning on real parts.
template <class Visit>
void for_each_multiset(const std::vector<cplx>& pool, int count, std::size_t start, cplx partial, double floor,
                       double step_bound, Visit&& visit) {
    if (count == 0) {
        visit(partial);
        return;
    }
    for (std::size_t k = start; k < pool.size(); ++k) {
        const cplx next = partial + pool[k];
        // each further term lowers the real part by at least |step_bound|
        if (next.real() + (count - 1) * step_bound < floor) break;
        for_each_multiset(pool, count - 1, k, next, floor, step_bound, visit);
    }
}

inline bool in_set(const std::vector<cplx>& set, cplx z, double tol) {
    return std::any_of(set.begin(), set.end(),
                       [&](cplx w) { return std::abs(w - z) <= tol * std::max(1.0, std::abs(w)); });
}

} // namespace detail

/// Nonresonance of a spectral subset. `spectrum` must hold every root with Re >= complete_to.
/// Stable subsets: the gaps inside sigma may not be hit by sums mixing gap roots and the rest
/// of the stable spectrum. Unstable subsets: sums of sigma may not hit other roots with Re > 0
/// (Re > -tol when an order r is forced).
inline NonresonanceReport nonresonance_check(const std::vector<cplx>& spectrum, double complete_to,
                                             const std::vector<cplx>& sigma, SubsetKind kind,
                                             double tol = 1e-8, std::optional<int> r_override = std::nullopt) {
    require(!sigma.empty(), ErrorCode::InvalidArgument, "empty spectral subset");
    constexpr int r_cap = 64;
    auto by_re = [](cplx a, cplx b) { return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag(); };
    std::vector<cplx> rest;
    for (cplx z : spectrum)
        if (!detail::in_set(sigma, z, tol)) rest.push_back(z);
    std::sort(rest.begin(), rest.end(), by_re);

    NonresonanceReport rep;
    if (kind == SubsetKind::stable) {
        double inf_sigma = 0.0;
        for (cplx z : sigma) {
            require(z.real() < 0.0, ErrorCode::InvalidArgument, "stable subset must lie in Re < 0");
            inf_sigma = std::min(inf_sigma, z.real());
        }
        require(complete_to <= inf_sigma, ErrorCode::InsufficientDepth,
                "spectrum not known down to the leftmost root of the subset");
        std::vector<cplx> gap, other;
        double sup_stable = -std::numeric_limits<double>::infinity();
        for (cplx z : spectrum)
            if (z.real() < 0.0) sup_stable = std::max(sup_stable, z.real());
        for (cplx z : rest)
            if (z.real() < 0.0 && z.real() >= inf_sigma) gap.push_back(z);
        for (cplx z : spectrum)
            if (z.real() < 0.0 && !detail::in_set(gap, z, tol)) other.push_back(z);
        std::sort(other.begin(), other.end(), by_re);
        if (gap.empty()) {
            rep.r = r_override.value_or(0);
            return rep;
        }
        double m = gap.front().real();
        for (cplx z : gap) m = std::min(m, z.real());
        rep.r = r_override.value_or(static_cast<int>(std::floor(m / sup_stable)));
        require(rep.r <= r_cap, ErrorCode::InvalidArgument, "nonresonance order too large to enumerate");
        const double floor = m - tol * std::max(1.0, std::abs(m));
        for (int i = 2; i <= rep.r; ++i)
            for (int j = 1; j <= i; ++j)
                detail::for_each_multiset(gap, i - j, 0, cplx{}, floor - (j * sup_stable), sup_stable, [&](cplx head) {
                    detail::for_each_multiset(other, j, 0, head, floor, sup_stable, [&](cplx sum) {
                        for (cplx t : gap)
                            if (std::abs(sum - t) <= tol * std::max(1.0, std::abs(t)))
                                rep.violations.push_back({i, j, sum, t});
                    });
                });
    } else {
        double inf_sigma = std::numeric_limits<double>::infinity();
        for (cplx z : sigma) inf_sigma = std::min(inf_sigma, z.real());
        require(r_override || inf_sigma > 0.0, ErrorCode::InvalidArgument,
                "unstable subset must lie in Re > 0 unless an order is given");
        const double cutoff = r_override ? -tol : 0.0;
        require(complete_to <= cutoff, ErrorCode::InsufficientDepth, "spectrum not known down to the imaginary axis");
        std::vector<cplx> targets;
        double sup_rest = -std::numeric_limits<double>::infinity();
        for (cplx z : rest) {
            sup_rest = std::max(sup_rest, z.real());
            if (z.real() > cutoff) targets.push_back(z);
        }
        if (r_override)
            rep.r = *r_override;
        else
            rep.r = sup_rest < 0.0 ? 0 : static_cast<int>(std::floor(sup_rest / inf_sigma));
        require(rep.r <= r_cap, ErrorCode::InvalidArgument, "nonresonance order too large to enumerate");
        std::vector<cplx> pool = sigma;
        std::sort(pool.begin(), pool.end(), by_re);
        const double lowest = -std::numeric_limits<double>::infinity();
        for (int j = 2; j <= rep.r; ++j)
            detail::for_each_multiset(pool, j, 0, cplx{}, lowest, 0.0, [&](cplx sum) {
                for (cplx t : targets)
                    if (std::abs(sum - t) <= tol * std::max(1.0, std::abs(t)))
                        rep.violations.push_back({j, 0, sum, t});
            });
    }
    rep.satisfied = rep.violations.empty();
    return rep;
}

struct DensityReport {
    int count = 0;          ///< roots in |z| < radius
    double asymptote = 0.0; ///< exponential type * radius / pi
    double ratio = 0.0;     ///< count / asymptote
};

/// Winding count on a circle against the asymptotic root density. The exponential
/// type defaults to n h.
inline DensityReport root_density_check(const DelayKernel& kernel, double radius,
                                        std::optional<double> exp_type = std::nullopt,
                                        const RootOptions& opt = {}) {
    require(radius > 0.0, ErrorCode::InvalidArgument, "radius must be positive");
    const CharMatrix chi(kernel);
    const double E = exp_type.value_or(kernel.n() * kernel.h());
    for (int attempt = 0; attempt < 10; ++attempt) {
        const double rad = radius * (1.0 + 1e-4 * attempt);
        // trapezoid on the circle: count = mean of z f'/f
        auto count_with = [&](int nodes) {
            cplx acc;
            for (int k = 0; k < nodes; ++k) {
                const cplx z = std::polar(rad, 2.0 * pi * (k + 0.5) / nodes);
                const auto d = chi.det(z);
                if (std::abs(d.value) <= opt.tol_boundary * std::max(1.0, rad) * std::abs(d.derivative))
                    throw Error(ErrorCode::BoundaryRoot, "root on the density circle");
                acc += z * d.derivative / d.value;
            }
            return acc / double(nodes);
        };
        try {
            int nodes = 256 * (1 + static_cast<int>(std::ceil(rad * kernel.h())));
            cplx prev = count_with(nodes);
            for (int it = 0; it < 8; ++it) {
                nodes *= 2;
                const cplx next = count_with(nodes);
                const bool done = std::abs(next - prev) < 1e-6;
                prev = next;
                if (done) break;
            }
            DensityReport rep;
            rep.count = static_cast<int>(std::lround(prev.real()));
            rep.asymptote = E * rad / pi;
            rep.ratio = rep.asymptote > 0.0 ? rep.count / rep.asymptote : 0.0;
            return rep;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::BoundaryRoot) throw;
        }
    }
    throw Error(ErrorCode::BoundaryRoot, "could not place a root-free circle");
}

} // namespace ddessm
