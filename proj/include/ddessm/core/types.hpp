#pragma once

#include <complex>

#include <Eigen/Dense>

namespace ddessm {

using cplx = std::complex<double>;

using MatR = Eigen::MatrixXd;
using MatC = Eigen::MatrixXcd;
using VecR = Eigen::VectorXd;
using VecC = Eigen::VectorXcd;

inline constexpr double pi = 3.14159265358979323846;

/// Infinity norm of a complex vector (max modulus).
inline double sup_norm(const VecC& v) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

/// Operator norm induced by the max norm: largest absolute row sum.
template <class Derived>
double inf_norm(const Eigen::MatrixBase<Derived>& m) {
    if (m.size() == 0) return 0.0;
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace ddessm
