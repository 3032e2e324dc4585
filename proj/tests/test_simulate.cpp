#include <catch2/catch_amalgamated.hpp>

#include "ddessm/model/catalog.hpp"
#include "ddessm/simulate/diagnostics.hpp"
#include "ddessm/ssm/normal_form.hpp"

using namespace ddessm;
using Catch::Approx;

namespace {

MatR scalar(double v) { return MatR::Constant(1, 1, v); }

History constant(double v, int n = 1) {
    return [v, n](double) { return VecC::Constant(n, v); };
}

// x' = -x(t - 1) from x = 1: polynomial pieces by the method of steps
double feedback_exact(double t) {
    if (t <= 1.0) return 1.0 - t;
    if (t <= 2.0) return 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
    const double u = t - 2.0;
    return 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0) - u * u * u / 6.0;
}

DDESystem feedback(double h) { return {DelayKernel(1, h, {Atom{h, scalar(-1.0)}}), NonlinearityJet::zero(1), "feedback"}; }

DDESystem quadratic_cushing(double b, double q) {
    return {DelayKernel(1, 1.0, {}, {Density{0.0, 1.0, {scalar(b)}}}), NonlinearityJet(1, {0.0}, {2.0 * q}), "quadratic"};
}

} // namespace

TEST_CASE("method-of-steps solution is reproduced") {
    const auto tr = integrate(feedback(1.0), constant(1.0), 3.0, {1.0 / 32});
    for (double t : {0.3, 1.0, 1.7, 2.5, 3.0}) CHECK(tr.at(t)[0] == Approx(feedback_exact(t)).margin(1e-10));
    for (double t : {-1.0, -0.4}) CHECK(tr.at(t)[0] == 1.0);
}

TEST_CASE("ordinary equation matches the exponential") {
    const DDESystem ode(DelayKernel(1, 1.0, {Atom{0.0, scalar(-0.7)}}), NonlinearityJet::zero(1));
    const auto tr = integrate(ode, constant(2.0), 5.0, {0.01});
    CHECK(tr.at(5.0)[0] == Approx(2.0 * std::exp(-3.5)).epsilon(1e-9));
}

TEST_CASE("RK4 converges at fourth order") {
    SECTION("point delay") {
        const auto sys = catalog::linear_part(catalog::delayed_sine(1.0));
        const double ref = integrate(sys, constant(1.0), 5.0, {1.0 / 1024}).at(5.0)[0];
        const double e1 = std::abs(integrate(sys, constant(1.0), 5.0, {1.0 / 16}).at(5.0)[0] - ref);
        const double e2 = std::abs(integrate(sys, constant(1.0), 5.0, {1.0 / 32}).at(5.0)[0] - ref);
        CHECK(std::log2(e1 / e2) == Approx(4.0).margin(0.5));
    }
    SECTION("distributed delay") {
        const auto sys = catalog::linear_part(catalog::cushing(1.0, -3.0));
        const double ref = integrate(sys, constant(1.0), 4.0, {1.0 / 256}).at(4.0)[0];
        const double e1 = std::abs(integrate(sys, constant(1.0), 4.0, {1.0 / 8}).at(4.0)[0] - ref);
        const double e2 = std::abs(integrate(sys, constant(1.0), 4.0, {1.0 / 16}).at(4.0)[0] - ref);
        CHECK(std::log2(e1 / e2) == Approx(4.0).margin(0.6));
    }
}

TEST_CASE("zero history stays at the equilibrium") {
    for (const auto& sys : {catalog::cushing(1.0, -3.0), catalog::delayed_cubic(2.0), catalog::delayed_sine(0.5)}) {
        const auto tr = integrate(sys, constant(0.0), 10.0);
        for (std::size_t k = 0; k <= tr.steps(); ++k) CHECK(tr.state(k)[0] == 0.0);
    }
}

TEST_CASE("linear decay follows the leading root") {
    const auto s03 = roots_right_of(catalog::cushing(1.0, -0.3).kernel(), -1.0);
    const auto tr = integrate(catalog::linear_part(catalog::cushing(1.0, -0.3)), constant(1.0), 40.0);
    const auto fit = measure_decay(tr, 10.0, 40.0);
    CHECK_FALSE(fit.non_decaying);
    CHECK(fit.exponent == Approx(s03.roots.front().value.real()).epsilon(0.02));

    const auto s3 = roots_right_of(catalog::cushing(1.0, -3.0).kernel(), -1.0);
    REQUIRE(s3.roots.size() == 2);
    const auto tr3 = integrate(catalog::linear_part(catalog::cushing(1.0, -3.0)), constant(1.0), 40.0);
    CHECK(measure_decay(tr3, 10.0, 40.0).exponent == Approx(s3.roots[0].value.real()).epsilon(0.05));
    CHECK(oscillation_frequency(tr3, 5.0) == Approx(std::abs(s3.roots[0].value.imag())).epsilon(0.01));
}

TEST_CASE("Hopf cycle agrees with the normal form") {
    const double h = pi / 2 + 0.05;
    const auto sys = catalog::delayed_cubic(h);
    const auto tr = integrate(sys, constant(0.1), 500.0);
    const auto cyc = extract_limit_cycle(tr, 400.0);

    const auto m = expansion_coeffs(sys, roots_right_of(sys.kernel(), -0.5), 10);
    const auto nf = normal_form(m);
    const auto lc = predict_limit_cycle(nf);
    REQUIRE(lc.exists);
    CHECK(cyc.amplitude == Approx(predicted_amplitude(nf, lc.radius)).epsilon(0.1));
    CHECK(cyc.period == Approx(lc.period()).epsilon(0.05));
    CHECK(std::abs(cyc.mean) < 1e-3);
}

TEST_CASE("distance to the manifold shrinks like the truncation error") {
    const auto sys = quadratic_cushing(-0.3, 0.6);
    const auto m = expansion_coeffs(sys, restrict_slice(roots_right_of(sys.kernel(), -5.0), -1.0), 10);
    std::vector<double> amps, dists;
    for (double a : {0.08, 0.04, 0.02, 0.01}) {
        VecC y(1);
        y[0] = a;
        const auto tr = integrate(sys, m.eval(y).as_history(), 2.0, {1.0 / 128});
        CHECK(distance_to_manifold(tr, m, 0.0) < 1e-12);
        amps.push_back(std::log(a));
        dists.push_back(std::log(distance_to_manifold(tr, m, 2.0)));
    }
    for (std::size_t i = 1; i < amps.size(); ++i) {
        const double slope = (dists[i] - dists[i - 1]) / (amps[i] - amps[i - 1]);
        CAPTURE(i, slope);
        CHECK(slope >= 3.5);
        CHECK(slope <= 4.5);
    }
}

TEST_CASE("diagnostics report their failure modes") {
    const auto decaying = integrate(catalog::linear_part(catalog::cushing(1.0, -0.3)), constant(1.0), 30.0);
    try {
        (void)extract_limit_cycle(decaying, 10.0);
        FAIL("expected NoCycle");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoCycle);
    }

    const auto sys = catalog::cushing(1.0, -0.3);
    const auto m = expansion_coeffs(sys, restrict_slice(roots_right_of(sys.kernel(), -5.0), -1.0), 10);
    const auto far = integrate(sys, constant(5.0), 1.0);
    try {
        (void)distance_to_manifold(far, m, 0.0);
        FAIL("expected OutOfChart");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfChart);
    }

    // x' = x + x^2 escapes in finite time
    const DDESystem blow(DelayKernel(1, 1.0, {Atom{0.0, scalar(1.0)}}), NonlinearityJet(1, {0.0}, {2.0}));
    try {
        (void)integrate(blow, constant(1.0), 5.0);
        FAIL("expected Blowup");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::Blowup);
    }
}
