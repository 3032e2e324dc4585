#include <random>

#include <catch2/catch_amalgamated.hpp>

#include <boost/math/special_functions/lambert_w.hpp>
#include <boost/math/tools/roots.hpp>

#include "ddessm/model/catalog.hpp"
#include "ddessm/spectrum/spectrum.hpp"

using namespace ddessm;
using Catch::Approx;

namespace {

MatR scalar(double v) { return MatR::Constant(1, 1, v); }

DelayKernel delayed_feedback(double h) { return DelayKernel(1, h, {Atom{h, scalar(-1.0)}}); }

DelayKernel cushing_kernel(double b, double h = 1.0) {
    return DelayKernel(1, h, {}, {Density{0.0, h, {scalar(b)}}});
}

// branch k of w exp(w) = x by Newton from the large-|k| asymptotic
cplx lambert_w(int k, double x) {
    const cplx L1 = std::log(cplx(x)) + cplx(0.0, 2.0 * pi * k);
    cplx w = k == 0 ? cplx(0.5, 1.0) : L1 - std::log(L1);
    for (int it = 0; it < 100; ++it) {
        const cplx f = w * std::exp(w) - x;
        const cplx step = f / (std::exp(w) * (1.0 + w));
        w -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(w))) break;
    }
    return w;
}

// characteristic roots of x' = -x(t - h): lambda h exp(lambda h) = -h
std::vector<cplx> lambert_roots(double h, double gamma) {
    std::vector<cplx> out;
    for (int k = -40; k <= 40; ++k) {
        const cplx l = lambert_w(k, -h) / h;
        if (l.real() >= gamma) out.push_back(l);
    }
    return out;
}

// z^2 - b (1 - exp(-z h)) = z Delta(z), polished independently
cplx cushing_newton(double b, double h, cplx z) {
    for (int it = 0; it < 60; ++it) {
        const cplx e = std::exp(-z * h);
        const cplx f = z * z - b * (1.0 - e);
        const cplx df = 2.0 * z - b * h * e;
        z -= f / df;
    }
    return z;
}

double nearest(const std::vector<Root>& roots, cplx z) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& r : roots) d = std::min(d, std::abs(r.value - z));
    return d;
}

} // namespace

TEST_CASE("characteristic matrix closed forms") {
    const CharMatrix cush(cushing_kernel(-0.3));
    for (cplx z : {cplx(1.0, 2.0), cplx(-0.5, 0.1), cplx(3.0, -4.0)}) {
        const cplx expect = z - (-0.3) * (1.0 - std::exp(-z)) / z;
        CHECK(std::abs(cush.delta(z)(0, 0) - expect) < 1e-13 * std::abs(expect));
    }
    // removable singularity at the origin: Delta(0) = -b h
    CHECK(std::abs(cush.delta(cplx(0.0))(0, 0) - 0.3) < 1e-14);
    CHECK(std::abs(cush.delta(cplx(1e-9, 0.0))(0, 0) - 0.3) < 1e-8);

    const CharMatrix fb(delayed_feedback(0.7));
    for (cplx z : {cplx(1.0, 2.0), cplx(-2.0, 5.0)})
        CHECK(std::abs(fb.delta(z)(0, 0) - (z + std::exp(-0.7 * z))) < 1e-13 * std::abs(z));

    const CharMatrix zero(DelayKernel::zero(1, 1.0));
    CHECK(zero.delta(cplx(0.3, -2.0))(0, 0) == cplx(0.3, -2.0));
}

TEST_CASE("analytic derivative of det Delta against central differences") {
    MatR B(2, 2);
    B << -1.0, 0.5, 0.2, -0.8;
    const DelayKernel k(2, 2.0, {Atom{1.0, B}, Atom{2.0, 0.3 * B.transpose()}},
                        {Density{0.0, 1.5, {scalar(1.0).replicate(2, 2) * 0.1, -0.2 * MatR::Identity(2, 2)}}});
    const CharMatrix chi(k);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> re(-3.0, 2.0), im(-20.0, 20.0);
    for (int i = 0; i < 100; ++i) {
        const cplx z(re(rng), im(rng));
        const double step = 1e-5;
        const cplx fd = (chi.det(z + step).value - chi.det(z - step).value) / (2.0 * step);
        const cplx an = chi.det(z).derivative;
        CHECK(std::abs(an - fd) <= 1e-6 * (1.0 + std::abs(an)));
    }
}

TEST_CASE("winding counts in rectangles") {
    CHECK(count_roots_in_rect(CharMatrix(DelayKernel::zero(1, 1.0)), Rect{-1, 1, -1, 1}) == 1);
    CHECK(count_roots_in_rect(CharMatrix(cushing_kernel(-0.3)), Rect{-5, 0, -1, 1}) == 2);
    CHECK(count_roots_in_rect(CharMatrix(delayed_feedback(1.0)), Rect{-1, 0, 0.5, 2}) == 1);
    CHECK(count_roots_in_rect(CharMatrix(DelayKernel::zero(3, 1.0)), Rect{-1, 1, -1, 1}) == 3);
}

TEST_CASE("winding counts are additive over partitions") {
    const CharMatrix chi(cushing_kernel(-3.0));
    const Rect whole{-4.013, 1.07, -20.11, 20.03};
    const int total = count_roots_in_rect(chi, whole);
    CHECK(total == 4);
    for (double cut_re : {-2.517, -0.913}) {
        for (double cut_im : {0.377, 5.51}) {
            int sum = 0;
            for (const Rect& r : {Rect{whole.re_lo, cut_re, whole.im_lo, cut_im}, Rect{cut_re, whole.re_hi, whole.im_lo, cut_im},
                                  Rect{whole.re_lo, cut_re, cut_im, whole.im_hi}, Rect{cut_re, whole.re_hi, cut_im, whole.im_hi}})
                sum += count_roots_in_rect(chi, r);
            CHECK(sum == total);
        }
    }
}

TEST_CASE("a root on the contour is reported") {
    try {
        (void)count_roots_in_rect(CharMatrix(DelayKernel::zero(1, 1.0)), Rect{0.0, 1.0, -1.0, 1.0});
        FAIL("expected BoundaryRoot");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BoundaryRoot);
    }
}

TEST_CASE("roots of x' = -x(t - h) match the Lambert W branches") {
    for (double h : {1.0, 0.3, 2.5}) {
        const double gamma = -3.0 / h;
        const auto s = roots_right_of(delayed_feedback(h), gamma);
        const auto oracle = lambert_roots(h, gamma);
        CAPTURE(h);
        REQUIRE(s.roots.size() == oracle.size());
        for (cplx z : oracle) CHECK(nearest(s.roots, z) < 1e-9 * std::max(1.0, std::abs(z)));
    }
    // real pair below 1/e, from the real branches
    const double h = 0.2;
    const auto s = roots_right_of(delayed_feedback(h), -15.0);
    const double l1 = boost::math::lambert_w0(-h) / h, l2 = boost::math::lambert_wm1(-h) / h;
    CHECK(nearest(s.roots, l1) < 1e-10);
    CHECK(nearest(s.roots, l2) < 1e-9);
}

TEST_CASE("Cushing spectrum") {
    SECTION("b = -0.3: two real roots, checked against real-axis bracketing") {
        const auto s = roots_right_of(cushing_kernel(-0.3), -5.0);
        REQUIRE(s.roots.size() == 2);
        auto g = [](double z) { return z * z + 0.3 * (1.0 - std::exp(-z)); };
        boost::math::tools::eps_tolerance<double> tol(50);
        std::uintmax_t it = 200;
        const auto r1 = boost::math::tools::toms748_solve(g, -1.0, -0.1, tol, it);
        it = 200;
        const auto r2 = boost::math::tools::toms748_solve(g, -4.5, -3.0, tol, it);
        CHECK(nearest(s.roots, 0.5 * (r1.first + r1.second)) < 1e-10);
        CHECK(nearest(s.roots, 0.5 * (r2.first + r2.second)) < 1e-10);
        CHECK(s.roots.front().value.real() == Approx(-0.361).margin(5e-4));
        CHECK(s.alpha() == Approx(-3.99).margin(5e-3));
    }
    SECTION("b = -3: two conjugate pairs") {
        const auto s = roots_right_of(cushing_kernel(-3.0), -4.0);
        REQUIRE(s.roots.size() == 4);
        for (cplx guess : {cplx(-0.387, 2.66), cplx(-3.33, 8.67)}) {
            const cplx z = cushing_newton(-3.0, 1.0, guess);
            CHECK(nearest(s.roots, z) < 1e-10);
            CHECK(nearest(s.roots, std::conj(z)) < 1e-10);
        }
    }
}

TEST_CASE("zero kernel has a root of full multiplicity at the origin") {
    for (int n : {1, 2, 3}) {
        const auto s = roots_right_of(DelayKernel::zero(n, 1.0), -1.0);
        REQUIRE(s.roots.size() == 1);
        CHECK(std::abs(s.roots[0].value) < 1e-12);
        CHECK(s.roots[0].multiplicity == n);
    }
}

TEST_CASE("spectrum slices are conjugate closed and polished") {
    MatR B(2, 2);
    B << -1.0, 2.0, -0.5, -0.2;
    const std::vector<DelayKernel> kernels{cushing_kernel(-3.0), delayed_feedback(1.7),
                                           DelayKernel(2, 2.0, {Atom{1.0, B}, Atom{2.0, -0.3 * B}})};
    for (const auto& k : kernels) {
        const auto s = roots_right_of(k, -2.5);
        CHECK(s.conjugate_closed);
        for (const auto& r : s.roots) {
            bool paired = false;
            for (const auto& q : s.roots)
                paired |= std::abs(q.value - std::conj(r.value)) < 1e-9 && q.multiplicity == r.multiplicity;
            CHECK(paired);
            CHECK(r.residual <= 1e-12 * detail::residual_scale(r.value, k.n()));
            CHECK(r.value.real() >= s.gamma);
        }
        for (const auto& r : s.below) CHECK(r.value.real() < s.gamma);
    }
}

TEST_CASE("Newton converges quadratically at a simple root") {
    const CharMatrix chi(delayed_feedback(1.0));
    const cplx root = lambert_w(1, -1.0);
    cplx z = root + cplx(1e-2, -1e-2);
    double prev = std::abs(z - root);
    for (int k = 0; k < 3; ++k) {
        const auto d = chi.det(z);
        z -= d.value / d.derivative;
        const double err = std::abs(z - root);
        if (err < 1e-14) break;
        CHECK(err < 10.0 * prev * prev);
        prev = err;
    }
}

TEST_CASE("beta comes from the band below the cut") {
    const auto s = roots_right_of(cushing_kernel(-0.3), -1.0);
    REQUIRE(s.roots.size() == 1);
    REQUIRE(s.beta());
    CHECK(*s.beta() == Approx(-3.99).margin(5e-3));
    const auto r = restrict_slice(roots_right_of(cushing_kernel(-0.3), -5.0), -1.0);
    REQUIRE(r.roots.size() == 1);
    CHECK(*r.beta() == Approx(*s.beta()).epsilon(1e-10));
}

TEST_CASE("smoothness degree") {
    CHECK(smoothness_degree(-0.361, -3.99, 10) == 10);
    CHECK(smoothness_degree(-1.0, -1.5, 5) == 1);
    CHECK(smoothness_degree(0.5, -2.0, 7) == 7);
    CHECK(smoothness_degree(-0.361, -3.99, 20) == 11);

    // enlarging the gap never lowers the degree
    int last = 0;
    for (double beta = -1.0; beta > -20.0; beta -= 0.37) {
        const int l = smoothness_degree(-0.9, beta, 30);
        CHECK(l >= last);
        last = l;
    }
}

TEST_CASE("nonresonance checks") {
    SECTION("single real root in generic position") {
        const auto rep = nonresonance_check({-0.361, -3.99}, -8.0, {-0.361}, SubsetKind::stable);
        CHECK(rep.satisfied);
    }
    SECTION("sums landing inside the retained set") {
        const std::vector<cplx> spec{-0.5, -1.0, -3.0, -5.0};
        const auto rep = nonresonance_check(spec, -20.0, {-0.5, -3.0}, SubsetKind::stable);
        CHECK_FALSE(rep.satisfied);
        bool found = false;
        for (const auto& v : rep.violations) found |= v.order == 2 && std::abs(v.target - cplx(-1.0)) < 1e-12;
        CHECK(found);
    }
    SECTION("Hopf pair with no roots at its multiples") {
        const double w = 1.0;
        const std::vector<cplx> spec{cplx(0, w), cplx(0, -w), cplx(-1.0, 5.0), cplx(-1.0, -5.0)};
        const auto rep = nonresonance_check(spec, -3.0, {cplx(0, w), cplx(0, -w)}, SubsetKind::unstable, 1e-8, 3);
        CHECK(rep.r == 3);
        CHECK(rep.satisfied);
    }
    SECTION("unstable subset hitting another unstable root") {
        const std::vector<cplx> spec{0.5, 1.0, -2.0};
        const auto rep = nonresonance_check(spec, -5.0, {0.5}, SubsetKind::unstable);
        CHECK_FALSE(rep.satisfied);
    }
}

TEST_CASE("root density against the exponential type") {
    const auto d = root_density_check(delayed_feedback(1.0), 50.0);
    CHECK(d.ratio == Approx(1.0).epsilon(0.25));

    const auto z = root_density_check(DelayKernel::zero(2, 1.0), 10.0, 0.0);
    CHECK(z.count == 2);

    const auto near = root_density_check(cushing_kernel(-3.0), 50.0, 1.0);
    const auto far = root_density_check(cushing_kernel(-3.0), 100.0, 1.0);
    CHECK(std::abs(far.ratio - 1.0) <= std::abs(near.ratio - 1.0) + 0.02);
}
