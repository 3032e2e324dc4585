#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "ddessm/model/catalog.hpp"
#include "ddessm/ssm/normal_form.hpp"
#include "support/invariance.hpp"

using namespace ddessm;
using Catch::Approx;

namespace {

MatR scalar(double v) { return MatR::Constant(1, 1, v); }

// x' = b int_0^1 x(t - s) ds + q x^2 + c x^3
DDESystem quadratic_cushing(double b, double q, double c = 0.0) {
    DelayKernel k(1, 1.0, {}, {Density{0.0, 1.0, {scalar(b)}}});
    return {std::move(k), NonlinearityJet(1, {0.0}, {2.0 * q}, {6.0 * c}), "quadratic"};
}

SSMModel model_for(const DDESystem& sys, double cut, double search = -5.0) {
    const auto s = restrict_slice(roots_right_of(sys.kernel(), search), cut);
    return expansion_coeffs(sys, s, smoothness_degree(s, 10));
}

void check_invariance(const DDESystem& sys, const SSMModel& m) {
    const auto r = testing::invariance_residual(sys, m);
    CHECK(r.shift <= 1e-8);
    CHECK(r.boundary <= 1e-8);
}

} // namespace

TEST_CASE("invariance equation holds through third order") {
    SECTION("Cushing, single real root") { check_invariance(catalog::cushing(1.0, -0.3), model_for(catalog::cushing(1.0, -0.3), -1.0)); }
    SECTION("Cushing, oscillatory pair") { check_invariance(catalog::cushing(1.0, -3.0), model_for(catalog::cushing(1.0, -3.0), -1.0)); }
    SECTION("delayed cubic near the Hopf point") {
        const auto sys = catalog::delayed_cubic(pi / 2 + 0.05);
        check_invariance(sys, model_for(sys, -0.5, -0.5));
    }
    SECTION("quadratic and cubic terms together") {
        const auto sys = quadratic_cushing(-0.3, 0.7, -0.4);
        check_invariance(sys, model_for(sys, -1.0));
    }
    SECTION("two pairs retained") {
        const auto sys = catalog::cushing(1.0, -3.0);
        check_invariance(sys, model_for(sys, -4.0, -4.0));
    }
    SECTION("two-dimensional system with a lagged quadratic term") {
        MatR B(2, 2);
        B << -1.0, 0.5, -0.4, -0.6;
        DelayKernel k(2, 1.0, {Atom{1.0, B}, Atom{0.0, -0.2 * MatR::Identity(2, 2)}});
        std::vector<double> d2(2 * 4 * 4, 0.0);
        d2[(0 * 4 + 0) * 4 + 3] = d2[(0 * 4 + 3) * 4 + 0] = 1.0; // x1(t) x2(t - 1) in component 1
        d2[(1 * 4 + 1) * 4 + 1] = -0.6;
        const DDESystem sys(std::move(k), NonlinearityJet(2, {0.0, -1.0}, d2), "coupled");
        check_invariance(sys, model_for(sys, -1.5, -3.0));
    }
}

TEST_CASE("Cushing reduced dynamics") {
    for (double a : {1.0, 0.37}) {
        const auto sys = catalog::cushing(a, -0.3);
        const auto m = model_for(sys, -1.0);
        const auto rr = reduce_real(m);
        const double xi = m.eigen[0].xi(0, 0).real();
        CHECK(rr.lambda == Approx(-0.361).margin(5e-4));
        CHECK(rr.c2 == 0.0);
        CHECK(rr.c3 == Approx(xi * a / 6.0).epsilon(1e-12));
        // no quadratic jet: the second-order manifold coefficient vanishes
        if (auto it = m.K.find({2}); it != m.K.end())
            for (double th : history_grid(1.0, 17)) CHECK(sup_norm(it->second(th)) == 0.0);
    }
}

TEST_CASE("delayed cubic: closed-form third-order coefficients") {
    SECTION("real root, h = 0.1") {
        const double h = 0.1;
        const auto sys = catalog::delayed_cubic(h);
        const auto m = model_for(sys, -2.0, -2.0);
        REQUIRE(m.dim() == 1);
        const double l = m.lambda(0).real();
        const double xi = 1.0 / (1.0 + l * h);
        CHECK(reduce_real(m).c3 == Approx(-xi).epsilon(1e-12));
        const CharMatrix chi(sys.kernel());
        const cplx d3 = chi.delta(3.0 * l)(0, 0);
        const auto& K3 = m.K.at({3});
        for (double th : history_grid(h, 9)) {
            const cplx expect = -(std::exp(3.0 * l * th) - std::exp(l * th) * xi * d3 / (2.0 * l)) / d3;
            CHECK(std::abs(K3(th)[0] - expect) < 1e-12);
        }
    }
    SECTION("conjugate pair, h = pi/2 + 0.05") {
        const double h = pi / 2 + 0.05;
        const auto sys = catalog::delayed_cubic(h);
        const auto m = model_for(sys, -0.5, -0.5);
        REQUIRE(m.dim() == 2);
        const cplx l = m.lambda(0), lb = m.lambda(1);
        const cplx xi = 1.0 / (1.0 + l * h);
        CHECK(std::abs(m.eigen[0].xi(0, 0) - xi) < 1e-13);
        const CharMatrix chi(sys.kernel());
        const auto& K30 = m.K.at({3, 0});
        for (double th : history_grid(h, 9)) {
            const cplx expect = -(std::exp(3.0 * l * th) / chi.delta(3.0 * l)(0, 0) - xi / (2.0 * l) * std::exp(l * th) -
                                  std::conj(xi) / (3.0 * l - lb) * std::exp(lb * th));
            CHECK(std::abs(K30(th)[0] - expect) < 1e-12);
        }
    }
}

TEST_CASE("linear systems give a flat manifold") {
    const auto sys = catalog::linear_part(catalog::cushing(1.0, -3.0));
    const auto m = model_for(sys, -1.0);
    CHECK(m.jet_zero);
    for (const auto& [a, k] : m.K) {
        if (degree(a) == 1) continue;
        for (double th : history_grid(1.0, 9)) CHECK(sup_norm(k(th)) < 1e-14);
    }
    for (const auto& [a, c] : m.H)
        if (degree(a) > 1) CHECK(sup_norm(c) < 1e-14);
    const auto pf = reduce_planar(m);
    const cplx l = m.lambda(0);
    CHECK(pf.terms.at({1, 0}).isApprox(Eigen::Vector2d(l.real(), l.imag())));
    CHECK(pf.terms.at({0, 1}).isApprox(Eigen::Vector2d(-l.imag(), l.real())));
}

TEST_CASE("tangency and realness") {
    const auto sys = catalog::cushing(1.0, -3.0);
    const auto m = model_for(sys, -1.0);
    for (int j = 0; j < m.dim(); ++j) {
        const auto& kj = m.K.at(unit_index(m.dim(), j));
        for (double th : history_grid(1.0, 9))
            CHECK(std::abs(kj(th)[0] - m.eigen[j].c[0] * std::exp(m.lambda(j) * th)) < 1e-15);
    }
    CHECK(sup_norm(m.eval(VecC::Zero(2)).as_history(), 1.0) == 0.0);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 0.3);
    for (int t = 0; t < 10; ++t) {
        const cplx z(g(rng), g(rng));
        VecC y(2);
        y << z, std::conj(z);
        const auto samples = manifold_eval(m, y, 65);
        double scale = 0.0, imag = 0.0;
        for (const auto& v : samples) {
            scale = std::max(scale, std::abs(v[0]));
            imag = std::max(imag, std::abs(v[0].imag()));
        }
        CHECK(imag <= 1e-10 * scale);
    }
}

TEST_CASE("planar field matches the complex chart") {
    for (double b : {-3.0, -2.0}) {
        const auto sys = catalog::cushing(0.8, b);
        const auto m = model_for(sys, -1.0);
        const auto pf = reduce_planar(m);
        const cplx xi = m.eigen[0].xi(0, 0);
        // only the x^3 term survives at third order: R(2x)/6 projected by xi
        CHECK(pf.terms.at({3, 0}).isApprox(4.0 / 3.0 * 0.8 * Eigen::Vector2d(xi.real(), xi.imag()), 1e-12));
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            const double x = u(rng), y = u(rng);
            VecC q(2);
            q << cplx(x, y), cplx(x, -y);
            const cplx dz = m.field(q)[0];
            const Eigen::Vector2d v = pf(x, y);
            CHECK(std::abs(v[0] - dz.real()) <= 1e-10 * (1.0 + std::abs(dz)));
            CHECK(std::abs(v[1] - dz.imag()) <= 1e-10 * (1.0 + std::abs(dz)));
        }
    }
}

TEST_CASE("normal form of the delayed cubic") {
    const double h = pi / 2 + 0.05;
    const auto sys = catalog::delayed_cubic(h);
    const auto m = model_for(sys, -0.5, -0.5);
    const auto nf = normal_form(m);
    const cplx l = m.lambda(0), l2 = m.lambda(1);
    const cplx xi = 1.0 / (1.0 + l * h);
    CHECK(std::abs(nf.beta21 - 3.0 * xi) < 1e-12);

    const std::map<std::pair<int, int>, cplx> expect{
        {{3, 0}, -xi / (2.0 * l)}, {{1, 2}, -3.0 * xi / (2.0 * l2)}, {{0, 3}, -xi / (3.0 * l2 - l)}};
    for (const auto& [e, c] : expect) {
        REQUIRE(nf.p.count(e) == 1);
        CHECK(std::abs(nf.p.at(e) - c) < 1e-12);
    }
    // homological equation: the transformed field leaves only the resonant monomial
    for (const auto& [e, c] : nf.p) {
        const cplx div = double(e.first) * l + double(e.second) * l2 - l;
        if (e == std::pair{2, 1}) continue;
        cplx forcing = 0.0;
        if (auto it = m.H.find({e.first, e.second}); it != m.H.end()) forcing = it->second[0];
        CHECK(std::abs(div * c - forcing) < 1e-10 * (1.0 + std::abs(forcing)));
    }

    const CharMatrix chi(sys.kernel());
    for (double th : {0.0, -0.4, -h}) {
        const cplx k30 = -std::exp(3.0 * l * th) / chi.delta(3.0 * l)(0, 0);
        const cplx k21 =
            -3.0 * (std::exp((2.0 * l + l2) * th) / chi.delta(2.0 * l + l2)(0, 0) - xi / (l + l2) * std::exp(l * th));
        CHECK(std::abs(nf.coefficient(3, 0)(th)[0] - k30) < 1e-12);
        CHECK(std::abs(nf.coefficient(2, 1)(th)[0] - k21) < 1e-12);
    }

    CHECK(nf.polar.radial_linear == Approx(l.real()));
    CHECK(nf.polar.radial_cubic == Approx(-3.0 * xi.real()));
    CHECK(nf.polar.angular_const == Approx(l.imag()));
    CHECK(nf.polar.angular_quad == Approx(-3.0 * xi.imag()));
}

TEST_CASE("limit cycle prediction") {
    auto nf_at = [](double h) {
        const auto sys = catalog::delayed_cubic(h);
        return normal_form(model_for(sys, -0.5, -0.5));
    };
    SECTION("past the critical delay") {
        const auto nf = nf_at(pi / 2 + 0.05);
        const auto lc = predict_limit_cycle(nf);
        REQUIRE(lc.exists);
        CHECK(lc.stable);
        const cplx xi = nf.beta21 / 3.0;
        const double r = std::sqrt(nf.lambda.real() / (3.0 * xi.real()));
        CHECK(lc.radius == Approx(r).epsilon(1e-12));
        CHECK(lc.frequency == Approx(nf.lambda.imag() - 3.0 * xi.imag() * r * r).epsilon(1e-12));
        // the periodic orbit is a real history
        for (double phi : {0.0, 1.0, 2.5}) {
            const auto u = nf.eval(lc.radius, phi);
            for (double th : history_grid(nf.h, 17)) CHECK(std::abs(u(th)[0].imag()) < 1e-12);
        }
    }
    SECTION("at the critical delay the radius collapses") {
        const auto lc = predict_limit_cycle(nf_at(pi / 2));
        CHECK((!lc.exists || lc.radius < 1e-6));
    }
    SECTION("before the critical delay there is no cycle") {
        CHECK_FALSE(predict_limit_cycle(nf_at(pi / 2 - 0.05)).exists);
    }
}

TEST_CASE("shape and resonance errors") {
    const auto pair = model_for(catalog::cushing(1.0, -3.0), -1.0);
    const auto single = model_for(catalog::cushing(1.0, -0.3), -1.0);
    auto code_of = [](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::InvalidArgument;
    };
    CHECK(code_of([&] { (void)reduce_real(pair); }) == ErrorCode::WrongSigmaShape);
    CHECK(code_of([&] { (void)reduce_planar(single); }) == ErrorCode::WrongSigmaShape);
    CHECK(code_of([&] { (void)normal_form(single); }) == ErrorCode::WrongSigmaShape);

    // x' = diag(-1, -2) x + x_1^2 e_2: twice the retained root is the other eigenvalue
    MatR A = MatR::Zero(2, 2);
    A(0, 0) = -1.0;
    A(1, 1) = -2.0;
    std::vector<double> d2(8, 0.0);
    d2[(1 * 2 + 0) * 2 + 0] = 2.0;
    const DDESystem sys(DelayKernel(2, 1.0, {Atom{0.0, A}}), NonlinearityJet(2, {0.0}, d2));
    CHECK(code_of([&] { (void)expansion_coeffs(sys, std::vector<cplx>{-1.0}, 1); }) == ErrorCode::ResolventPole);
}

TEST_CASE("low smoothness marks the model formal") {
    const auto sys = catalog::cushing(1.0, -0.3);
    const auto s = restrict_slice(roots_right_of(sys.kernel(), -5.0), -1.0);
    CHECK_FALSE(expansion_coeffs(sys, s, 10).formal);
    CHECK(expansion_coeffs(sys, s, 2).formal);
}

TEST_CASE("the invariance oracle rejects a perturbed expansion") {
    const auto sys = catalog::cushing(1.0, -3.0);
    auto m = model_for(sys, -1.0);
    auto& k21 = m.K.at({2, 1});
    k21.add(m.lambda(0) * 2.0 + m.lambda(1), VecC::Constant(1, 1e-4));
    const auto r = testing::invariance_residual(sys, m);
    CHECK(std::max(r.shift, r.boundary) > 1e-6);

    auto m2 = model_for(sys, -1.0);
    m2.H.at({2, 1})[0] += 1e-5;
    const auto r2 = testing::invariance_residual(sys, m2);
    CHECK(std::max(r2.shift, r2.boundary) > 1e-7);
}
