#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "ddessm/spectrum/contour.hpp"

namespace ddessm {

struct Root {
    cplx value;
    int multiplicity = 1;
    double residual = 0.0; ///< |det Delta| at the polished value
};

namespace detail {

inline double residual_scale(cplx z, int n) { return std::max(1.0, std::pow(std::abs(z), n)); }

/// Newton (modified by the multiplicity) on det Delta.
inline Root polish(const CharMatrix& chi, cplx z, int mult) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double last = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 80; ++it) {
        const auto d = chi.det(z);
        if (d.value == 0.0 || d.derivative == 0.0) break;
        const cplx step = double(mult) * d.value / d.derivative;
        z -= step;
        const double s = std::abs(step);
        if (s <= 4.0 * eps * (1.0 + std::abs(z))) break;
        // stalled: rounding noise dominates
        if (it > 8 && s >= last) break;
        last = s;
    }
    return {z, mult, std::abs(chi.det(z).value)};
}

} // namespace detail

/// Recursive rectangle bisection on winding counts, Newton polishing per isolated root.
class RootFinder {
public:
    RootFinder(const CharMatrix& chi, RootOptions opt) : chi_(chi), opt_(opt) {}

    /// All roots inside r. The outer boundary is nudged outward if it passes through a root;
    /// roots outside the nominal rectangle are dropped.
    [[nodiscard]] std::vector<Root> find(const Rect& r) const {
        for (int attempt = 0; attempt < 12; ++attempt) {
            // the near-root test on an edge is relative to its length, so the nudge must be too
            const double pad = 3e-6 * attempt * attempt * (1.0 + std::max(r.width(), r.height()));
            Rect outer{r.re_lo - pad, r.re_hi + 0.7 * pad, r.im_lo - 0.9 * pad, r.im_hi + 1.1 * pad};
            ContourMoments m;
            try {
                m = contour_moments(chi_, outer, opt_);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::BoundaryRoot) continue;
                throw;
            }
            std::vector<Root> out;
            search(outer, m, 0, out);
            std::erase_if(out, [&](const Root& x) {
                return x.value.real() < r.re_lo || x.value.real() > r.re_hi || x.value.imag() < r.im_lo ||
                       x.value.imag() > r.im_hi;
            });
            return out;
        }
        throw Error(ErrorCode::BoundaryRoot, "could not place a root-free contour around the search box");
    }

private:
    void search(const Rect& r, const ContourMoments& m, int depth, std::vector<Root>& out) const {
        if (m.count <= 0) return;
        require(depth < 200, ErrorCode::InvalidArgument, "root search recursion too deep");
        const double size = std::max(r.width(), r.height());
        const cplx mean = m.s1 / double(m.count);
        const double pad = 1e-9 * (1.0 + size);

        if (m.count == 1) {
            Root x = detail::polish(chi_, mean, 1);
            if (r.contains(x.value, pad) && converged(x)) {
                out.push_back(x);
                return;
            }
        } else if (size <= opt_.tol_sep * std::max(1.0, std::abs(mean)) || clustered(m, mean)) {
            Root x = detail::polish(chi_, mean, m.count);
            out.push_back(x);
            return;
        }

        for (int k = 0; k < 16; ++k) {
            const double frac = 0.5 + ((k % 2 == 0) ? 1.0 : -1.0) * 0.0123 * ((k + 1) / 2);
            Rect a = r, b = r;
            if (r.width() >= r.height()) {
                const double cut = r.re_lo + frac * r.width();
                a.re_hi = cut;
                b.re_lo = cut;
            } else {
                const double cut = r.im_lo + frac * r.height();
                a.im_hi = cut;
                b.im_lo = cut;
            }
            ContourMoments ma, mb;
            try {
                ma = contour_moments(chi_, a, opt_);
                mb = contour_moments(chi_, b, opt_);
            } catch (const Error& e) {
                if (e.code() == ErrorCode::BoundaryRoot) continue;
                throw;
            }
            if (ma.count + mb.count != m.count) continue;
            search(a, ma, depth + 1, out);
            search(b, mb, depth + 1, out);
            return;
        }
        throw Error(ErrorCode::BoundaryRoot, "could not split a rectangle consistently");
    }

    [[nodiscard]] bool converged(const Root& x) const {
        return x.residual <= opt_.tol_root * detail::residual_scale(x.value, chi_.n()) * 1e3 &&
               std::isfinite(x.value.real()) && std::isfinite(x.value.imag());
    }

    /// All `count` roots sit within a tol_sep-sized square around `mean`.
    [[nodiscard]] bool clustered(const ContourMoments& m, cplx mean) const {
        const double half = 10.0 * opt_.tol_sep * std::max(1.0, std::abs(mean));
        const cplx spread = m.s2 / double(m.count) - mean * mean;
        if (std::abs(spread) > 100.0 * half * half) return false;
        const Rect tiny{mean.real() - half, mean.real() + half, mean.imag() - half, mean.imag() + half};
        try {
            return contour_moments(chi_, tiny, opt_).count == m.count;
        } catch (const Error& e) {
            if (e.code() == ErrorCode::BoundaryRoot) return false;
            throw;
        }
    }

    const CharMatrix& chi_;
    RootOptions opt_;
};

/// Snap near-real roots onto the axis, make conjugate pairs exact and sort
/// by decreasing real part, then decreasing imaginary part.
inline bool conjugate_close(std::vector<Root>& roots) {
    for (auto& x : roots)
        if (std::abs(x.value.imag()) <= 1e-9 * std::max(1.0, std::abs(x.value))) x.value.imag(0.0);
    bool closed = true;
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (roots[i].value.imag() <= 0.0 || used[i]) continue;
        const cplx target = std::conj(roots[i].value);
        std::size_t best = roots.size();
        double dist = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < roots.size(); ++j) {
            if (used[j] || roots[j].value.imag() >= 0.0) continue;
            const double d = std::abs(roots[j].value - target);
            if (d < dist) {
                dist = d;
                best = j;
            }
        }
        if (best == roots.size() || dist > 1e-7 * (1.0 + std::abs(target)) ||
            roots[best].multiplicity != roots[i].multiplicity) {
            closed = false;
            continue;
        }
        used[i] = used[best] = true;
        roots[best].value = target;
    }
    for (std::size_t i = 0; i < roots.size(); ++i)
        if (roots[i].value.imag() < 0.0 && !used[i]) closed = false;
    std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
        if (a.value.real() != b.value.real()) return a.value.real() > b.value.real();
        return a.value.imag() > b.value.imag();
    });
    return closed;
}

} // namespace ddessm
