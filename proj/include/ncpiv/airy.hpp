#pragma once

#include "kernels.hpp"
#include "mop.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ncpiv {

struct AiryValue {
    double x = 0.0;
    double ai = 0.0;
    double aip = 0.0;
};

namespace detail {

// Ai(0) and -Ai'(0)
inline constexpr long double airy_c1 = 0.355028053887817239260063186004183176L;
inline constexpr long double airy_c2 = 0.258819403792806798405183560189203963L;

// Maclaurin series summed in long double; fine on [-8, 6]
inline AiryValue airy_series(double xd) {
    const long double x = xd, x3 = x * x * x;
    long double f = 1.0L, g = x, fp = 0.5L * x * x, gp = 1.0L;
    long double tf = 1.0L, tg = x, tfp = fp, tgp = 1.0L;
    for (int k = 0; k < 200; ++k) {
        tf *= x3 / ((3.0L * k + 2.0L) * (3.0L * k + 3.0L));
        tg *= x3 / ((3.0L * k + 3.0L) * (3.0L * k + 4.0L));
        tfp *= x3 / ((3.0L * k + 3.0L) * (3.0L * k + 5.0L));
        tgp *= x3 / ((3.0L * k + 1.0L) * (3.0L * k + 3.0L));
        f += tf;
        g += tg;
        fp += tfp;
        gp += tgp;
        const long double m = std::max({std::abs(tf), std::abs(tg), std::abs(tfp), std::abs(tgp)});
        if (m < 1e-22L && k > 3) break;
    }
    return {xd, double(airy_c1 * f - airy_c2 * g), double(airy_c1 * fp - airy_c2 * gp)};
}

// u_k and v_k of the standard asymptotic expansions
inline void airy_uv(int count, std::vector<double>& u, std::vector<double>& v) {
    u.assign(count, 1.0);
    v.assign(count, 1.0);
    for (int k = 1; k < count; ++k) {
        u[k] = u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
        v[k] = -u[k] * (6.0 * k + 1.0) / (6.0 * k - 1.0);
    }
}

inline AiryValue airy_asymptotic(double x) {
    std::vector<double> u, v;
    airy_uv(30, u, v);
    const double sqpi = std::sqrt(std::numbers::pi);
    if (x > 0.0) {
        const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
        double su = 0.0, sv = 0.0, p = 1.0, last = INFINITY;
        for (int k = 0; k < 30; ++k) {
            const double tu = u[k] * p, tv = v[k] * p;
            const double mag = std::max(std::abs(tu), std::abs(tv));
            if (mag > last) break;  // asymptotic series: stop at the smallest term
            su += tu;
            sv += tv;
            last = mag;
            if (mag < 1e-17) break;
            p *= -1.0 / zeta;
        }
        const double e = std::exp(-zeta);
        const double x4 = std::pow(x, 0.25);
        return {x, e / (2.0 * sqpi * x4) * su, -x4 * e / (2.0 * sqpi) * sv};
    }
    const double z = -x;
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    double pu = 0.0, qu = 0.0, pv = 0.0, qv = 0.0, last = INFINITY;
    double p = 1.0;  // zeta^{-k}
    for (int k = 0; k < 30; ++k) {
        const double tu = u[k] * p, tv = v[k] * p;
        const double mag = std::max(std::abs(tu), std::abs(tv));
        if (mag > last) break;
        // (-1)^{floor(k/2)} split into even (P) and odd (Q) parts
        const double sgn = ((k / 2) % 2) ? -1.0 : 1.0;
        if (k % 2 == 0) {
            pu += sgn * tu;
            pv += sgn * tv;
        } else {
            qu += sgn * tu;
            qv += sgn * tv;
        }
        last = mag;
        if (mag < 1e-17) break;
        p /= zeta;
    }
    const double th = zeta - std::numbers::pi / 4.0;
    const double c = std::cos(th), s = std::sin(th);
    const double z4 = std::pow(z, 0.25);
    return {x, (c * pu + s * qu) / (sqpi * z4), z4 * (s * pv - c * qv) / sqpi};
}

}  // namespace detail

inline AiryValue airy_ai(double x) {
    if (!(x >= -12.0 && x <= 20.0)) throw std::domain_error("Airy argument outside [-12, 20]");
    if (x > 6.0 || x < -8.0) return detail::airy_asymptotic(x);
    return detail::airy_series(x);
}

inline double airy_kernel(double x, double y) {
    if (std::abs(x - y) < 1e-6) {
        // symmetric kernel, so the midpoint diagonal is off by O(|x-y|^2)
        const double m = 0.5 * (x + y);
        const AiryValue a = airy_ai(m);
        return a.aip * a.aip - m * a.ai * a.ai;
    }
    const AiryValue a = airy_ai(x), b = airy_ai(y);
    return (a.ai * b.aip - a.aip * b.ai) / (x - y);
}

struct ScalingError {
    double sup_error = 0.0;
    double offdiag_max = 0.0;
};

// (1/(sqrt2 n^{1/6})) K_n(sqrt(2n) + x/(sqrt2 n^{1/6}), ...) against K_Ai(x,y) I
inline ScalingError scaling_limit_error(const MOPFamily& f, int n, const std::vector<double>& grid) {
    if (n < 1 || n > 64) throw std::invalid_argument("n beyond the stable budget (1..64)");
    if (n > f.nmax) throw std::out_of_range("n beyond nmax");
    for (double g : grid)
        if (g < -2.0 || g > 2.0) throw std::invalid_argument("grid must lie in [-2, 2]");
    if (f.orthonormality_residual > 1e-8) throw numerical_error("precision diagnostic: orthonormality residual above 1e-8");
    const int N = f.dim();
    const double scale = std::sqrt(2.0) * std::pow(double(n), 1.0 / 6.0);
    const double edge = std::sqrt(2.0 * n);
    ScalingError e;
    for (double x : grid)
        for (double y : grid) {
            const RMat k = cd_sum(f, n, edge + x / scale, edge + y / scale) / scale;
            const RMat d = k - airy_kernel(x, y) * RMat::Identity(N, N);
            e.sup_error = std::max(e.sup_error, max_abs<double>(d));
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j)
                    if (i != j) e.offdiag_max = std::max(e.offdiag_max, std::abs(k(i, j)));
        }
    return e;
}

inline std::vector<double> uniform_grid(double a, double b, int count) {
    std::vector<double> g(count);
    for (int i = 0; i < count; ++i) g[i] = count == 1 ? a : a + (b - a) * i / (count - 1);
    return g;
}

}  // namespace ncpiv
