#pragma once

#include "ddessm/model/system.hpp"

namespace ddessm::catalog {

/// x' = b * integral_0^h x(t - s) ds + a (x - sin x).
inline DDESystem cushing(double a, double b, double h = 1.0) {
    DelayKernel k(1, h, {}, {Density{0.0, h, {MatR::Constant(1, 1, b)}}});
    return {std::move(k), NonlinearityJet::x_minus_sin(1, {0.0}, 0, 0, a), "cushing"};
}

/// x' = -x(t - h) + x - sin x.
inline DDESystem delayed_sine(double h) {
    DelayKernel k(1, h, {Atom{h, MatR::Constant(1, 1, -1.0)}});
    return {std::move(k), NonlinearityJet::x_minus_sin(1, {0.0}, 0, 0, 1.0), "delayed-sine"};
}

/// x' = -x(t - h) - x^3.
inline DDESystem delayed_cubic(double h) {
    DelayKernel k(1, h, {Atom{h, MatR::Constant(1, 1, -1.0)}});
    return {std::move(k), NonlinearityJet(1, {0.0}, {}, {-6.0}), "delayed-cubic"};
}

/// Same linear part with the nonlinearity removed.
inline DDESystem linear_part(const DDESystem& sys) {
    return {sys.kernel(), NonlinearityJet::zero(sys.n()), sys.label() + "-linear"};
}

} // namespace ddessm::catalog
