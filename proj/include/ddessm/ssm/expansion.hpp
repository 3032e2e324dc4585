#pragma once

#include <map>
#include <numeric>
#include <vector>

#include "ddessm/model/system.hpp"
#include "ddessm/projection/projection.hpp"
#include "ddessm/spectrum/spectrum.hpp"

namespace ddessm {

/// Exponent vector of a monomial y^alpha in the reduced coordinates.
using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& a) { return std::accumulate(a.begin(), a.end(), 0); }

inline MultiIndex unit_index(int d, int j) {
    MultiIndex e(static_cast<std::size_t>(d), 0);
    e[j] = 1;
    return e;
}

/// All exponent vectors of total degree `deg` in d variables, lexicographically descending.
inline std::vector<MultiIndex> multi_indices(int d, int deg) {
    std::vector<MultiIndex> out;
    MultiIndex cur(static_cast<std::size_t>(d), 0);
    auto rec = [&](auto&& self, int pos, int left) -> void {
        if (pos == d - 1) {
            cur[pos] = left;
            out.push_back(cur);
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[pos] = k;
            self(self, pos + 1, left - k);
        }
    };
    if (d > 0) rec(rec, 0, deg);
    return out;
}

inline cplx monomial(const VecC& y, const MultiIndex& a) {
    cplx m = 1.0;
    for (std::size_t j = 0; j < a.size(); ++j)
        for (int k = 0; k < a[j]; ++k) m *= y[static_cast<Eigen::Index>(j)];
    return m;
}

/// Third-order graph-style parameterization K of the spectral submanifold and
/// its reduced field H, both as Taylor coefficients in the eigen-coordinates y.
struct SSMModel {
    int n = 1;
    double h = 1.0;
    int order = 3;
    int ell = 0;          ///< smoothness degree from the spectral gap
    bool formal = false;  ///< coefficients computed but not backed by enough smoothness
    bool jet_zero = false;
    std::vector<EigenData> eigen;
    std::map<MultiIndex, ExpSum> K; ///< history-valued coefficients, including the linear ones
    std::map<MultiIndex, VecC> H;   ///< reduced-field coefficients (d-vectors)
    std::vector<MultiIndex> resonant; ///< indices with lambda . alpha on a retained root

    [[nodiscard]] int dim() const noexcept { return static_cast<int>(eigen.size()); }
    [[nodiscard]] cplx lambda(int j) const { return eigen.at(j).lambda; }

    [[nodiscard]] ExpSum eval(const VecC& y) const {
        ExpSum out(n);
        for (const auto& [a, k] : K) out += monomial(y, a) * k;
        return out;
    }

    [[nodiscard]] VecC field(const VecC& y) const {
        VecC out = VecC::Zero(dim());
        for (const auto& [a, c] : H) out += monomial(y, a) * c;
        return out;
    }
};

struct SsmOptions {
    int order = 3;
    double tol_res = 1e-8;      ///< lambda . alpha this close to a retained root counts as resonant
    double pole_distance = 1e-6; ///< minimum distance of lambda . alpha from any other root
    double tol_deriv = 1e-8;
};

namespace detail {

/// Stacked evaluations [u(lag_1); ...; u(lag_m)].
inline VecC stacked(const ExpSum& u, const std::vector<double>& lags) {
    VecC v(u.n() * static_cast<int>(lags.size()));
    for (std::size_t i = 0; i < lags.size(); ++i) v.segment(static_cast<Eigen::Index>(i) * u.n(), u.n()) = u(lags[i]);
    return v;
}

inline bool leq(const MultiIndex& a, const MultiIndex& b) {
    for (std::size_t j = 0; j < a.size(); ++j)
        if (a[j] > b[j]) return false;
    return true;
}

inline MultiIndex minus(const MultiIndex& a, const MultiIndex& b) {
    MultiIndex c = a;
    for (std::size_t j = 0; j < a.size(); ++j) c[j] -= b[j];
    return c;
}

/// All beta <= alpha with 1 <= |beta| <= |alpha| - 1.
inline std::vector<MultiIndex> proper_parts(const MultiIndex& alpha) {
    std::vector<MultiIndex> out;
    const int d = static_cast<int>(alpha.size());
    for (int deg = 1; deg < degree(alpha); ++deg)
        for (const auto& b : multi_indices(d, deg))
            if (leq(b, alpha)) out.push_back(b);
    return out;
}

} // namespace detail

/// Taylor coefficients of K and H up to `opt.order` for the retained roots of `sigma`
/// (all simple), solving the invariance equation degree by degree.
inline SSMModel expansion_coeffs(const DDESystem& sys, const std::vector<cplx>& sigma, int ell,
                                 const SsmOptions& opt = {}) {
    require(!sigma.empty(), ErrorCode::WrongSigmaShape, "empty spectral set");
    require(opt.order >= 1 && opt.order <= 3, ErrorCode::InvalidArgument, "order must be 1, 2 or 3");
    const CharMatrix chi(sys.kernel());
    const auto& jet = sys.jet();
    const int d = static_cast<int>(sigma.size());

    SSMModel m;
    m.n = sys.n();
    m.h = sys.h();
    m.order = opt.order;
    m.ell = ell;
    m.formal = opt.order >= 3 && ell < 4;
    m.jet_zero = jet.is_zero();
    for (cplx l : sigma) m.eigen.push_back(eigen_data(chi, l, opt.tol_deriv));

    std::map<MultiIndex, VecC> evals; // stacked lag evaluations of K_alpha
    for (int j = 0; j < d; ++j) {
        const auto e = unit_index(d, j);
        m.K[e] = ExpSum(m.n, m.eigen[j].lambda, m.eigen[j].c);
        VecC hj = VecC::Zero(d);
        hj[j] = m.eigen[j].lambda;
        m.H[e] = hj;
        evals[e] = detail::stacked(m.K[e], jet.lags());
    }

    for (int deg = 2; deg <= opt.order; ++deg) {
        for (const auto& alpha : multi_indices(d, deg)) {
            cplx mu = 0.0;
            for (int j = 0; j < d; ++j) mu += double(alpha[j]) * m.eigen[j].lambda;

            // coefficient of y^alpha in R(K(y))
            VecC N = VecC::Zero(m.n);
            for (const auto& b : detail::proper_parts(alpha)) {
                const auto rest = detail::minus(alpha, b);
                N += 0.5 * jet.apply2(evals.at(b), evals.at(rest));
                for (const auto& c : detail::proper_parts(rest)) {
                    const auto last = detail::minus(rest, c);
                    if (degree(b) == 1 && degree(c) == 1 && degree(last) == 1)
                        N += jet.apply3(evals.at(b), evals.at(c), evals.at(last)) / 6.0;
                }
            }

            // cross terms sum beta_j K_beta H_{j,gamma}, |beta|, |gamma| >= 2
            ExpSum forcing(m.n);
            for (int j = 0; j < d; ++j)
                for (const auto& b : detail::proper_parts(alpha)) {
                    if (degree(b) < 1) continue;
                    MultiIndex beta = b;
                    beta[j] += 1; // beta - e_j + gamma = alpha with gamma = alpha - b
                    const auto gamma = detail::minus(alpha, b);
                    if (degree(beta) < 2 || degree(gamma) < 2) continue;
                    forcing += cplx(beta[j]) * m.H.at(gamma)[j] * m.K.at(beta);
                }

            std::vector<int> inner;
            for (int j = 0; j < d; ++j)
                if (std::abs(mu - m.eigen[j].lambda) <= opt.tol_res * (1.0 + std::abs(mu))) inner.push_back(j);
            if (inner.empty()) {
                const auto dv = chi.det(mu);
                require(std::abs(dv.value) > opt.pole_distance * std::max(1.0, std::abs(mu)) * std::abs(dv.derivative),
                        ErrorCode::ResolventPole, "a sum of retained roots lies on another characteristic root");
            } else {
                m.resonant.push_back(alpha);
                m.formal = true;
            }

            // particular solution of K' - mu K = forcing
            ExpSum particular(m.n);
            VecC w = N;
            for (const auto& t : forcing.terms()) {
                if (t.coeff.isZero(0.0)) continue;
                require(std::abs(t.rate - mu) > opt.tol_res * (1.0 + std::abs(mu)), ErrorCode::HomologicalResonance,
                        "forcing resonant with the homological operator");
                const VecC q = t.coeff / (t.rate - mu);
                particular.add(t.rate, q);
                w -= chi.delta(t.rate) * q;
            }

            // graph style: H_{j,alpha} = (mu - lambda_j) l_j(K0), in a form regular at mu = lambda_j
            VecC Ha = VecC::Zero(d);
            for (int j = 0; j < d; ++j) {
                const auto& e = m.eigen[j];
                cplx val = (e.d.transpose() * w)(0, 0);
                for (const auto& t : particular.terms())
                    val += (mu - e.lambda) * (e.d.transpose() * pairing(chi, e.lambda, ExpSum(m.n, t.rate, t.coeff)))(0, 0);
                Ha[j] = val / e.scale;
            }

            ExpSum Ka = particular;
            if (inner.empty()) {
                Ka.add(mu, chi.delta(mu).partialPivLu().solve(w));
                for (int j = 0; j < d; ++j)
                    Ka.add(m.eigen[j].lambda, Ha[j] / (m.eigen[j].lambda - mu) * m.eigen[j].c);
            } else {
                // no graph-style solution exists at exact resonance; keep the minimum-norm part
                Ka.add(mu, chi.delta(mu).completeOrthogonalDecomposition().solve(w));
            }
            m.K[alpha] = Ka;
            m.H[alpha] = Ha;
            evals[alpha] = detail::stacked(Ka, jet.lags());
        }
    }
    return m;
}

inline SSMModel expansion_coeffs(const DDESystem& sys, const SpectrumSlice& sigma, int ell,
                                 const SsmOptions& opt = {}) {
    return expansion_coeffs(sys, sigma.values(), ell, opt);
}

/// y' = lambda y + c2 y^2 + c3 y^3 on a single real root.
struct RealReduction {
    double lambda = 0.0;
    double c2 = 0.0;
    double c3 = 0.0;
};

inline RealReduction reduce_real(const SSMModel& m) {
    require(m.dim() == 1 && m.lambda(0).imag() == 0.0, ErrorCode::WrongSigmaShape,
            "real reduction needs a single real root");
    RealReduction r;
    r.lambda = m.lambda(0).real();
    if (auto it = m.H.find({2}); it != m.H.end()) r.c2 = it->second[0].real();
    if (auto it = m.H.find({3}); it != m.H.end()) r.c3 = it->second[0].real();
    return r;
}

/// Real planar field in the chart z = x + i y for a conjugate pair; coefficient of
/// x^a y^b stored per component.
struct PlanarField {
    std::map<std::pair<int, int>, Eigen::Vector2d> terms;

    [[nodiscard]] Eigen::Vector2d operator()(double x, double y) const {
        Eigen::Vector2d v = Eigen::Vector2d::Zero();
        for (const auto& [ab, c] : terms) v += std::pow(x, ab.first) * std::pow(y, ab.second) * c;
        return v;
    }
};

inline PlanarField reduce_planar(const SSMModel& m) {
    require(m.dim() == 2 && m.lambda(0).imag() > 0.0 &&
                std::abs(m.lambda(1) - std::conj(m.lambda(0))) <= 1e-9 * (1.0 + std::abs(m.lambda(0))),
            ErrorCode::WrongSigmaShape, "planar reduction needs a conjugate pair (upper root first)");
    PlanarField f;
    auto binom = [](int n, int k) {
        double b = 1.0;
        for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
        return b;
    };
    const cplx I(0.0, 1.0);
    for (const auto& [a, c] : m.H) {
        const cplx coef = c[0];
        // z^p zbar^q with z = x + i y
        const int p = a[0], q = a[1];
        for (int s = 0; s <= p; ++s)
            for (int t = 0; t <= q; ++t) {
                const cplx w = coef * binom(p, s) * binom(q, t) * std::pow(I, s) * std::pow(-I, t);
                const int xa = (p - s) + (q - t), yb = s + t;
                auto it = f.terms.try_emplace({xa, yb}, Eigen::Vector2d::Zero()).first;
                it->second += Eigen::Vector2d(w.real(), w.imag());
            }
    }
    return f;
}

/// K(y) sampled on `samples` points of [-h, 0] (left to right).
inline std::vector<VecC> manifold_eval(const SSMModel& m, const VecC& y, int samples = 512) {
    const ExpSum u = m.eval(y);
    std::vector<VecC> out;
    for (double th : history_grid(m.h, samples)) out.push_back(u(th));
    return out;
}

} // namespace ddessm
