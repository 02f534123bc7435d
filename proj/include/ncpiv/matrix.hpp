#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ncpiv {

using cplx = std::complex<double>;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// diagonal of J_N, 2J_N, ...
using IntDiag = std::vector<int>;

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

inline IntDiag j_exponents(int n, int scale = 1) {
    IntDiag d(n);
    for (int i = 0; i < n; ++i) d[i] = scale * (n - 1 - i);
    return d;
}

inline RMat diag_matrix(const IntDiag& d) {
    RMat m = RMat::Zero(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

// nu on the first superdiagonal
inline RMat shift_matrix(int n, double nu) {
    RMat a = RMat::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = nu;
    return a;
}

template <typename S>
double max_abs(const Mat<S>& m) {
    return m.size() ? m.cwiseAbs().maxCoeff() : 0.0;
}

namespace detail {
template <typename S>
void require_nilpotent(const Mat<S>& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("shape mismatch");
    Mat<S> p = Mat<S>::Identity(a.rows(), a.cols());
    for (Eigen::Index k = 0; k < a.rows(); ++k) p = p * a;
    if (max_abs(p) > 1e-12) throw numerical_error("not nilpotent");
}
}  // namespace detail

template <typename S>
Mat<S> nilpotent_exp(const Mat<S>& a, double x) {
    detail::require_nilpotent(a);
    const auto n = a.rows();
    Mat<S> term = Mat<S>::Identity(n, n);
    Mat<S> sum = term;
    for (Eigen::Index k = 1; k < n; ++k) {
        term = term * a * S(x / double(k));
        sum += term;
    }
    return sum;
}

// (I + A)^p, binomial series terminates since A is nilpotent
template <typename S>
Mat<S> nilpotent_power(const Mat<S>& a, double p) {
    detail::require_nilpotent(a);
    const auto n = a.rows();
    Mat<S> term = Mat<S>::Identity(n, n);
    Mat<S> sum = term;
    double c = 1.0;
    for (Eigen::Index k = 1; k < n; ++k) {
        c *= (p - double(k - 1)) / double(k);
        term = term * a;
        sum += S(c) * term;
    }
    return sum;
}

// integer power by squaring; no log, no branch cut
inline cplx ipow(cplx z, int k) {
    if (k < 0) {
        if (z == cplx(0.0)) throw numerical_error("pole at origin");
        return 1.0 / ipow(z, -k);
    }
    cplx r(1.0), b = z;
    while (k) {
        if (k & 1) r *= b;
        b *= b;
        k >>= 1;
    }
    return r;
}

// z^diag(left) M z^diag(right); rectangular M allowed
inline CMat power_scale(const IntDiag& left, const CMat& m, const IntDiag& right, cplx z) {
    if (Eigen::Index(left.size()) != m.rows() || Eigen::Index(right.size()) != m.cols())
        throw std::invalid_argument("shape mismatch");
    CMat out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            const int e = left[i] + right[j];
            if (m(i, j) == cplx(0.0) && !(e < 0 && z == cplx(0.0)))
                out(i, j) = 0.0;
            else
                out(i, j) = m(i, j) * ipow(z, e);
        }
    return out;
}

inline IntDiag negated(IntDiag d) {
    for (auto& v : d) v = -v;
    return d;
}

// z^D M z^{-D}: entry (i,j) picks up z^(d_i - d_j)
inline CMat power_conjugate(const IntDiag& d, const CMat& m, cplx z) {
    return power_scale(d, m, negated(d), z);
}

// z^{D_l} M z^{-D_r}
inline CMat power_conjugate(const IntDiag& dl, const CMat& m, const IntDiag& dr, cplx z) {
    return power_scale(dl, m, negated(dr), z);
}

template <typename S>
Mat<S> right_inverse(const Mat<S>& m) {
    if (m.rows() > m.cols()) throw std::invalid_argument("right inverse needs rows <= cols");
    Mat<S> g = m * m.transpose();
    Eigen::JacobiSVD<Mat<S>> svd(g);
    const auto& sv = svd.singularValues();
    const double smax = std::abs(sv(0));
    const double smin = std::abs(sv(sv.size() - 1));
    if (!(smin > 0.0) || smax / smin > 1e12) throw numerical_error("rank deficient");
    return m.transpose() * g.partialPivLu().inverse();
}

template <typename S>
Mat<S> commutator(const Mat<S>& x, const Mat<S>& y) {
    if (x.rows() != x.cols() || x.rows() != y.rows() || y.rows() != y.cols())
        throw std::invalid_argument("shape mismatch");
    return x * y - y * x;
}

template <typename S>
Mat<S> anticommutator(const Mat<S>& x, const Mat<S>& y) {
    if (x.rows() != x.cols() || x.rows() != y.rows() || y.rows() != y.cols())
        throw std::invalid_argument("shape mismatch");
    return x * y + y * x;
}

// symmetric square root and inverse square root of an SPD matrix
inline RMat spd_sqrt(const RMat& m, bool inverse = false) {
    Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (m + m.transpose()));
    RVec ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) throw numerical_error("matrix not positive definite");
    for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = inverse ? 1.0 / std::sqrt(ev(i)) : std::sqrt(ev(i));
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

inline RMat spd_inv_sqrt(const RMat& m) { return spd_sqrt(m, true); }

inline CMat to_complex(const RMat& m) { return m.cast<cplx>(); }

}  // namespace ncpiv
