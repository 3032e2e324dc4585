#pragma once

#include <optional>
#include <string>
#include <utility>

#include "ddessm/model/constants.hpp"
#include "ddessm/model/jet.hpp"
#include "ddessm/model/kernel.hpp"

namespace ddessm {

/// x'(t) = L x_t + R(x_t): linear kernel plus nonlinearity jet.
class DDESystem {
public:
    DDESystem() = default;

    DDESystem(DelayKernel kernel, NonlinearityJet jet, std::string label = {})
        : kernel_(std::move(kernel)), jet_(std::move(jet)), label_(std::move(label)) {
        require(jet_.n() == kernel_.n(), ErrorCode::InvalidArgument,
                "jet dimension does not match the kernel");
        for (double th : jet_.lags())
            require(th >= -kernel_.h() * (1.0 + 1e-12), ErrorCode::InvalidArgument,
                    "evaluation lag beyond the maximal delay");
    }

    [[nodiscard]] const DelayKernel& kernel() const noexcept { return kernel_; }
    [[nodiscard]] const NonlinearityJet& jet() const noexcept { return jet_; }
    [[nodiscard]] const std::string& label() const noexcept { return label_; }
    [[nodiscard]] int n() const noexcept { return kernel_.n(); }
    [[nodiscard]] double h() const noexcept { return kernel_.h(); }

    /// Global Lipschitz constant of R; throws NoGlobalLipschitz when unknown.
    [[nodiscard]] double lip_global() const {
        if (jet_.lip_global) return *jet_.lip_global;
        require(jet_.is_zero(), ErrorCode::NoGlobalLipschitz,
                "no global Lipschitz constant for the nonlinearity; use the cutoff route");
        return 0.0;
    }

    /// Lipschitz constant of the full right-hand side u -> f(u).
    [[nodiscard]] double lip_full() const {
        if (lip_f) return *lip_f;
        return total_variation(kernel_) + lip_global();
    }

    std::optional<double> lip_f;

private:
    DelayKernel kernel_;
    NonlinearityJet jet_;
    std::string label_;
};

} // namespace ddessm
