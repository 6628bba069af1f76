// pfaffian.hpp: skew-symmetric Wick matrices, Pfaffian by Parlett-Reid and |Pf|^2 by determinant
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

namespace qpc {

struct NotSkewSymmetric : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

template <class Derived>
bool is_skew(const Eigen::MatrixBase<Derived>& S, double tol = 1e-12) {
    if (S.rows() != S.cols()) return false;
    if (S.size() == 0) return true;
    const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
    return (S + S.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

// Pfaffian by Gaussian elimination with pivoting that keeps skew symmetry.
template <class Scalar>
Scalar pfaffian(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A) {
    const Eigen::Index n = A.rows();
    if (!is_skew(A)) throw NotSkewSymmetric("pfaffian: matrix is not skew-symmetric");
    if (n % 2) return Scalar(0);
    Scalar pf(1);
    for (Eigen::Index k = 0; k + 1 < n; k += 2) {
        Eigen::Index p = k + 1;
        A.col(k).tail(n - k - 1).cwiseAbs().maxCoeff(&p);
        p += k + 1;
        if (p != k + 1) {
            A.row(k + 1).swap(A.row(p));
            A.col(k + 1).swap(A.col(p));
            pf = -pf;
        }
        const Scalar piv = A(k + 1, k);
        if (piv == Scalar(0)) return Scalar(0);
        pf *= A(k, k + 1);
        if (k + 2 < n) {
            // eliminate column k below row k+1 using row/col k+1
            const Eigen::Index m = n - k - 2;
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> tau = A.col(k).tail(m) / piv;
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r = A.col(k + 1).tail(m);
            A.bottomRightCorner(m, m) += tau * r.transpose() - r * tau.transpose();
        }
    }
    return pf;
}

// |Pf(S)|^2 = |det S|; this is the form the element computations consume.
template <class Derived>
double wick_modulus_squared(const Eigen::MatrixBase<Derived>& S, bool check = true) {
    if (check && !is_skew(S)) throw NotSkewSymmetric("wick_modulus_squared: matrix is not skew-symmetric");
    if (S.rows() % 2) return 0.0;
    if (S.rows() == 0) return 1.0;
    using M = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    return std::abs(Eigen::PartialPivLU<M>(M(S)).determinant());
}

}  // namespace qpc
