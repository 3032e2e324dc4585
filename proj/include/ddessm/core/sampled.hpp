#pragma once

#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "ddessm/core/error.hpp"
#include "ddessm/core/expsum.hpp"

namespace ddessm {

/// Cubic B-spline interpolant through samples on the uniform grid history_grid(h, samples.size()).
inline History sampled_history(double h, const std::vector<VecR>& samples) {
    require(samples.size() >= 4, ErrorCode::InvalidArgument, "need at least four history samples");
    const int n = static_cast<int>(samples.front().size());
    const double step = h / double(samples.size() - 1);
    using Spline = boost::math::interpolators::cardinal_cubic_b_spline<double>;
    std::vector<Spline> parts;
    for (int i = 0; i < n; ++i) {
        std::vector<double> y;
        y.reserve(samples.size());
        for (const auto& s : samples) {
            require(s.size() == n, ErrorCode::InvalidArgument, "history samples of mixed dimension");
            y.push_back(s[i]);
        }
        parts.emplace_back(y.begin(), y.end(), -h, step);
    }
    return [parts = std::move(parts), n, h](double th) {
        VecC v(n);
        const double t = std::clamp(th, -h, 0.0);
        for (int i = 0; i < n; ++i) v[i] = parts[i](t);
        return v;
    };
}

} // namespace ddessm
