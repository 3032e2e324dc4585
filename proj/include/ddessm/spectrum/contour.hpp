#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "ddessm/core/quadrature.hpp"
#include "ddessm/spectrum/char_matrix.hpp"

namespace ddessm {

/// Axis-aligned rectangle [re_lo, re_hi] x [im_lo, im_hi].
struct Rect {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;

    [[nodiscard]] double width() const { return re_hi - re_lo; }
    [[nodiscard]] double height() const { return im_hi - im_lo; }
    [[nodiscard]] cplx center() const { return {0.5 * (re_lo + re_hi), 0.5 * (im_lo + im_hi)}; }
    [[nodiscard]] bool contains(cplx z, double pad = 0.0) const {
        return z.real() >= re_lo - pad && z.real() <= re_hi + pad && z.imag() >= im_lo - pad &&
               z.imag() <= im_hi + pad;
    }
};

struct RootOptions {
    double tol_root = 1e-12;     ///< residual target for polished roots (relative to |z|^n when large)
    double tol_sep = 1e-8;       ///< below this size a multi-count rectangle is one multiple root
    double tol_boundary = 1e-10; ///< boundary samples with |f/f'| below this (times max(1,|z|)) reject the contour
    double tol_deriv = 1e-8;     ///< |d det| below this marks a root as non-simple
    double strip_height_cap = 2e4;
    std::optional<double> strip_constant; ///< C1 in |z| <= C1 exp(-h Re z), replacing the weighted-variation bound
    std::optional<Rect> box;              ///< user search box, bypasses the strip bound
};

/// (1 / 2 pi i) times the contour integrals of z^k f'/f, k = 0, 1, 2.
struct ContourMoments {
    int count = 0;
    cplx s0, s1, s2;
};

namespace detail {

struct EdgeSums {
    cplx i0, i1, i2;

    EdgeSums& operator+=(const EdgeSums& o) {
        i0 += o.i0;
        i1 += o.i1;
        i2 += o.i2;
        return *this;
    }
};

/// 16-point Gauss rule on the segment [a, b]; throws BoundaryRoot when a node
/// is within `near` (Newton distance estimate) of a root.
inline EdgeSums panel_sums(const CharMatrix& chi, cplx a, cplx b, double near, const RootOptions& opt) {
    const auto& rule = gauss_rule<16>();
    const cplx half = 0.5 * (b - a), mid = 0.5 * (a + b);
    EdgeSums s{};
    for (std::size_t k = 0; k < rule.size(); ++k) {
        const cplx z = mid + rule.nodes[k] * half;
        const auto d = chi.det(z);
        const double dist = std::max(opt.tol_boundary * std::max(1.0, std::abs(z)), near);
        if (std::abs(d.value) <= dist * std::abs(d.derivative) || d.value == 0.0)
            throw Error(ErrorCode::BoundaryRoot, "characteristic root on or near the contour");
        const cplx g = rule.weights[k] * half * d.derivative / d.value;
        s.i0 += g;
        s.i1 += z * g;
        s.i2 += z * z * g;
    }
    return s;
}

inline EdgeSums adapt(const CharMatrix& chi, cplx a, cplx b, const EdgeSums& whole, double tol, double near,
                      int depth, const RootOptions& opt) {
    const cplx m = 0.5 * (a + b);
    const auto left = panel_sums(chi, a, m, near, opt);
    const auto right = panel_sums(chi, m, b, near, opt);
    EdgeSums both = left;
    both += right;
    const double err = std::max(std::abs(both.i0 - whole.i0),
                                std::abs(both.i1 - whole.i1) / (1.0 + std::abs(m)));
    // halving tol per level would otherwise sink below rounding next to a close root
    const double floor = 64.0 * std::numeric_limits<double>::epsilon() *
                         (1.0 + std::abs(left.i0) + std::abs(right.i0));
    if (err <= std::max(tol, floor)) return both;
    require(depth < 40, ErrorCode::BoundaryRoot, "contour integral did not settle near the boundary");
    EdgeSums out = adapt(chi, a, m, left, 0.5 * tol, near, depth + 1, opt);
    out += adapt(chi, m, b, right, 0.5 * tol, near, depth + 1, opt);
    return out;
}

/// Adaptive composite Gauss-Legendre along one edge.
inline EdgeSums edge_sums(const CharMatrix& chi, cplx a, cplx b, const RootOptions& opt) {
    const cplx dz = b - a;
    const double len = std::abs(dz);
    // a root closer than this to the edge forces a perturbed contour instead of endless refinement
    const double near = 1e-6 * len;
    const int panels = 1 + static_cast<int>(std::ceil(len * std::max(1.0, chi.kernel().h()) / 2.0));
    const double tol = 1e-8 * 2.0 * pi / panels;
    EdgeSums total{};
    for (int p = 0; p < panels; ++p) {
        const cplx pa = a + dz * (double(p) / panels), pb = a + dz * (double(p + 1) / panels);
        total += adapt(chi, pa, pb, panel_sums(chi, pa, pb, near, opt), tol, near, 0, opt);
    }
    return total;
}

} // namespace detail

/// Argument-principle moments over the rectangle boundary. Panels are bisected
/// adaptively until each edge settles; the total must land within 0.25 of an integer.
inline ContourMoments contour_moments(const CharMatrix& chi, const Rect& r, const RootOptions& opt = {}) {
    const std::array<cplx, 5> corners{cplx(r.re_lo, r.im_lo), cplx(r.re_hi, r.im_lo), cplx(r.re_hi, r.im_hi),
                                      cplx(r.re_lo, r.im_hi), cplx(r.re_lo, r.im_lo)};
    detail::EdgeSums total{};
    for (int e = 0; e < 4; ++e) total += detail::edge_sums(chi, corners[e], corners[e + 1], opt);
    const cplx twopi_i(0.0, 2.0 * pi);
    ContourMoments m;
    m.s0 = total.i0 / twopi_i;
    m.s1 = total.i1 / twopi_i;
    m.s2 = total.i2 / twopi_i;
    const double nearest = std::round(m.s0.real());
    require(std::abs(m.s0 - nearest) < 0.25, ErrorCode::BoundaryRoot,
            "winding number is not close to an integer");
    m.count = static_cast<int>(nearest);
    return m;
}

/// Number of characteristic roots (with multiplicity) inside the rectangle.
inline int count_roots_in_rect(const CharMatrix& chi, const Rect& r, const RootOptions& opt = {}) {
    return contour_moments(chi, r, opt).count;
}

} // namespace ddessm
