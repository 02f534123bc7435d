#pragma once

#include "matrix.hpp"

#include <algorithm>
#include <vector>

namespace ncpiv {

// Truncated Taylor series in t = s - s0 with matrix coefficients:
// value = sum_k c[k] t^k. A 1x1 series multiplies any shape as a scalar.
class Series {
public:
    std::vector<RMat> c;

    Series() = default;
    explicit Series(const RMat& value, int order = 0) : c(order + 1, RMat::Zero(value.rows(), value.cols())) { c[0] = value; }

    static Series scalar(double v, int order = 0) { return Series(RMat::Constant(1, 1, v), order); }

    // s0 + t
    static Series variable(double s0, int order) {
        Series s = scalar(s0, order);
        if (order >= 1) s.c[1](0, 0) = 1.0;
        return s;
    }

    int order() const { return int(c.size()) - 1; }
    Eigen::Index rows() const { return c[0].rows(); }
    Eigen::Index cols() const { return c[0].cols(); }
    bool is_scalar() const { return rows() == 1 && cols() == 1; }
    const RMat& value() const { return c[0]; }

    // k-th derivative at t = 0
    RMat deriv(int k) const {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f * c[k];
    }

    Series derivative() const {
        Series d;
        const int m = std::max(order(), 1);
        d.c.assign(m, RMat::Zero(rows(), cols()));
        for (int k = 1; k <= order(); ++k) d.c[k - 1] = double(k) * c[k];
        return d;
    }

    // antiderivative with the given constant term
    Series integrate(const RMat& c0) const {
        Series s;
        s.c.resize(c.size() + 1);
        s.c[0] = c0;
        for (std::size_t k = 0; k < c.size(); ++k) s.c[k + 1] = c[k] / double(k + 1);
        return s;
    }

    Series truncated(int order) const {
        Series s;
        s.c.assign(c.begin(), c.begin() + std::min<std::size_t>(c.size(), order + 1));
        return s;
    }

    Series transpose() const {
        Series s;
        for (const auto& m : c) s.c.push_back(m.transpose());
        return s;
    }

    friend Series operator+(const Series& a, const Series& b) {
        const int o = std::min(a.order(), b.order());
        Series s;
        for (int k = 0; k <= o; ++k) s.c.push_back(a.c[k] + b.c[k]);
        return s;
    }

    friend Series operator-(const Series& a, const Series& b) {
        const int o = std::min(a.order(), b.order());
        Series s;
        for (int k = 0; k <= o; ++k) s.c.push_back(a.c[k] - b.c[k]);
        return s;
    }

    friend Series operator-(const Series& a) {
        Series s;
        for (const auto& m : a.c) s.c.push_back(-m);
        return s;
    }

    friend Series operator*(double f, const Series& a) {
        Series s;
        for (const auto& m : a.c) s.c.push_back(f * m);
        return s;
    }

    friend Series operator*(const Series& a, const Series& b) {
        const int o = std::min(a.order(), b.order());
        Series s;
        const bool sa = a.is_scalar() && !b.is_scalar();
        const bool sb = b.is_scalar() && !a.is_scalar();
        for (int k = 0; k <= o; ++k) {
            RMat acc;
            for (int j = 0; j <= k; ++j) {
                RMat t = sa ? RMat(a.c[j](0, 0) * b.c[k - j]) : sb ? RMat(a.c[j] * b.c[k - j](0, 0)) : RMat(a.c[j] * b.c[k - j]);
                if (j == 0) acc = std::move(t); else acc += t;
            }
            s.c.push_back(std::move(acc));
        }
        return s;
    }

    friend Series operator*(const RMat& m, const Series& a) { return Series(m, a.order()) * a; }
    friend Series operator*(const Series& a, const RMat& m) { return a * Series(m, a.order()); }
    friend Series operator+(const Series& a, const RMat& m) { return a + Series(m, a.order()); }
    friend Series operator-(const Series& a, const RMat& m) { return a - Series(m, a.order()); }
};

// b0 = a0^{-1}, b_k = -a0^{-1} sum_{j>=1} a_j b_{k-j}
inline Series inverse(const Series& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("inverse of non-square series");
    const auto lu = a.c[0].partialPivLu();
    Series b;
    b.c.push_back(lu.inverse());
    for (int k = 1; k <= a.order(); ++k) {
        RMat acc = RMat::Zero(a.rows(), a.cols());
        for (int j = 1; j <= k; ++j) acc += a.c[j] * b.c[k - j];
        b.c.push_back(-(b.c[0] * acc));
    }
    return b;
}

inline Series commutator(const Series& x, const Series& y) { return x * y - y * x; }
inline Series anticommutator(const Series& x, const Series& y) { return x * y + y * x; }

}  // namespace ncpiv
