#pragma once

#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace ncpiv {

enum class RuleKind { RealLine, Circle, VLine, Panel };

struct QuadRule {
    std::vector<cplx> nodes;
    std::vector<cplx> weights;
    RuleKind kind = RuleKind::RealLine;
    double radius = 0.0;    // circle
    double abscissa = 0.0;  // vline
    double trunc = 0.0;     // vline

    std::size_t size() const { return nodes.size(); }
    double x(std::size_t k) const { return nodes[k].real(); }
    double w(std::size_t k) const { return weights[k].real(); }
};

// deterministic reduction, independent of how the terms were produced
template <typename T>
T pairwise_sum(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo <= 8) {
        T acc = v[lo];
        for (std::size_t i = lo + 1; i < hi; ++i) acc = acc + v[i];
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    if (v.empty()) throw std::invalid_argument("empty sum");
    return pairwise_sum(v, 0, v.size());
}

namespace detail {

// Hermite functions h_k(x) = p_k(x) e^{-x^2/2}, p_k orthonormal for e^{-x^2}.
// Returns h_{m-1}, h_m and optionally accumulates sum of h_k^2 for k < m.
inline void hermite_functions(double x, int m, double& hm1, double& hm, double* sumsq = nullptr) {
    double prev = 0.0;
    double cur = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    double acc = 0.0;
    for (int k = 0; k < m; ++k) {
        acc += cur * cur;
        const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
        prev = cur;
        cur = next;
    }
    hm1 = prev;
    hm = cur;
    if (sumsq) *sumsq = acc;
}

}  // namespace detail

// Golub-Welsch nodes, Newton polish, Christoffel weights.
// Weights include e^{-x^2}.
inline QuadRule gauss_hermite(int m) {
    if (m < 1) throw std::invalid_argument("gauss_hermite: m >= 1");
    RVec diag = RVec::Zero(m);
    RVec sub(std::max(m - 1, 0));
    for (int k = 1; k < m; ++k) sub(k - 1) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<RMat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    std::vector<double> xs(es.eigenvalues().data(), es.eigenvalues().data() + m);

    QuadRule r;
    r.kind = RuleKind::RealLine;
    for (double x : xs) {
        for (int it = 0; it < 4; ++it) {
            double hm1, hm;
            detail::hermite_functions(x, m, hm1, hm);
            if (hm1 == 0.0) break;
            const double dx = hm / (std::sqrt(2.0 * m) * hm1);
            x -= dx;
            if (std::abs(dx) < 1e-16 * (1.0 + std::abs(x))) break;
        }
        double hm1, hm, s;
        detail::hermite_functions(x, m, hm1, hm, &s);
        r.nodes.emplace_back(x);
        r.weights.emplace_back(std::exp(-x * x) / s);
    }
    // symmetrize: the rule is exactly even
    for (int i = 0; i < m / 2; ++i) {
        const double xv = 0.5 * (r.nodes[m - 1 - i].real() - r.nodes[i].real());
        const double wv = 0.5 * (r.weights[i].real() + r.weights[m - 1 - i].real());
        r.nodes[i] = -xv;
        r.nodes[m - 1 - i] = xv;
        r.weights[i] = r.weights[m - 1 - i] = wv;
    }
    if (m % 2) r.nodes[m / 2] = 0.0;
    return r;
}

// Same nodes, weights for integrands that already carry the Gaussian.
inline QuadRule gauss_hermite_unweighted(int m) {
    QuadRule r = gauss_hermite(m);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const double x = r.x(k);
        double hm1, hm, s;
        detail::hermite_functions(x, m, hm1, hm, &s);
        r.weights[k] = 1.0 / s;
    }
    return r;
}

// Gauss-Legendre on [a,b], Newton on the Legendre recurrence
inline QuadRule gauss_legendre(int m, double a = -1.0, double b = 1.0) {
    if (m < 1) throw std::invalid_argument("gauss_legendre: m >= 1");
    QuadRule r;
    r.kind = RuleKind::Panel;
    r.nodes.resize(m);
    r.weights.resize(m);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= m; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) p0 = 1.0;
            dp = m * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = c - h * x;
        r.nodes[m - 1 - i] = c + h * x;
        r.weights[i] = r.weights[m - 1 - i] = h * w;
    }
    return r;
}

// counterclockwise circle |z| = r; weights carry dz
inline QuadRule circle_rule(double radius, int m) {
    if (!(radius > 0.0)) throw std::invalid_argument("circle_rule: radius > 0");
    if (m < 1) throw std::invalid_argument("circle_rule: m >= 1");
    QuadRule r;
    r.kind = RuleKind::Circle;
    r.radius = radius;
    for (int k = 0; k < m; ++k) {
        const double t = 2.0 * std::numbers::pi * k / m;
        const cplx z = std::polar(radius, t);
        r.nodes.push_back(z);
        r.weights.push_back(cplx(0.0, 2.0 * std::numbers::pi / m) * z);
    }
    return r;
}

// L + i t, t in [-T, T] traversed upward; weights carry dw = i dt
inline QuadRule vline_rule(double abscissa, double trunc, int m) {
    if (!(trunc > 0.0)) throw std::invalid_argument("vline_rule: truncation > 0");
    if (m < 2) throw std::invalid_argument("vline_rule: m >= 2");
    QuadRule r;
    r.kind = RuleKind::VLine;
    r.abscissa = abscissa;
    r.trunc = trunc;
    const double h = 2.0 * trunc / (m - 1);
    for (int k = 0; k < m; ++k) {
        const double t = -trunc + h * k;
        r.nodes.emplace_back(abscissa, t);
        const double end = (k == 0 || k == m - 1) ? 0.5 : 1.0;
        r.weights.emplace_back(0.0, h * end);
    }
    return r;
}

inline void check_contour_ordering(double radius, double abscissa) {
    if (!(radius > 0.0) || !(radius < abscissa)) throw std::invalid_argument("contours intersect ordering");
}

struct ContourSettings {
    double radius = 1.0;
    int circle_nodes = 256;
    double line_re = 2.0;
    double line_trunc = std::sqrt(2.0 * 2.0 + 40.0);
    int line_nodes = 400;

    void validate() const { check_contour_ordering(radius, line_re); }
    QuadRule circle() const { return circle_rule(radius, circle_nodes); }
    QuadRule line() const { return vline_rule(line_re, line_trunc, line_nodes); }
};

// Panels of width `width` from s going outward (dir = -1 left, +1 right) until
// the Gaussian-times-polynomial envelope of the given degree is negligible.
inline QuadRule tail_panels(double s, int dir, int degree, double width = 0.5, int per_panel = 24) {
    auto envelope = [degree](double x) {
        return std::exp(-x * x + degree * std::log1p(std::abs(x)));
    };
    const double xpeak = std::sqrt(0.5 * degree);
    QuadRule out;
    out.kind = RuleKind::Panel;
    double a = s, peak = envelope(s);
    for (int p = 0; p < 400; ++p) {
        const double b = a + dir * width;
        const QuadRule g = gauss_legendre(per_panel, std::min(a, b), std::max(a, b));
        out.nodes.insert(out.nodes.end(), g.nodes.begin(), g.nodes.end());
        out.weights.insert(out.weights.end(), g.weights.begin(), g.weights.end());
        a = b;
        const double e = envelope(a);
        peak = std::max(peak, e);
        if (dir * a > xpeak && e < 1e-18 * peak) return out;
    }
    throw numerical_error("divergent tail");
}

// int_s^inf f for f ~ e^{-x^2} poly(x); matrix valued
template <typename F>
RMat tail_integral(F&& f, double s, double tol = 1e-14, double width = 0.5) {
    auto panel = [&](double a, double b) {
        const QuadRule g = gauss_legendre(24, a, b);
        RMat acc = g.w(0) * f(g.x(0));
        for (std::size_t k = 1; k < g.size(); ++k) acc += g.w(k) * f(g.x(k));
        return acc;
    };
    auto sweep = [&](double start, int dir, double scale) {
        RMat acc;
        double a = start;
        double prev = INFINITY;
        int growing = 0, quiet = 0;
        for (int p = 0; p < 2000; ++p) {
            const double b = a + dir * width;
            RMat c = panel(std::min(a, b), std::max(a, b));
            acc = acc.size() ? RMat(acc + c) : c;
            const double mag = max_abs<double>(c);
            const double ref = std::max(scale, max_abs<double>(acc));
            // three quiet panels in a row, so a sign change inside one panel cannot stop us
            quiet = (mag <= tol * std::max(ref, 1e-300)) ? quiet + 1 : 0;
            if (quiet >= 3) return acc;
            growing = (mag >= prev && dir * a > 8.0) ? growing + 1 : 0;
            if (growing > 20) break;
            prev = mag;
            a = b;
        }
        throw numerical_error("divergent tail");
    };
    if (s > 0.0) return sweep(s, +1, 0.0);
    // total minus left part; total by Gauss-Hermite on the already-Gaussian integrand
    static const QuadRule gh = gauss_hermite_unweighted(200);
    RMat total = gh.w(0) * f(gh.x(0));
    for (std::size_t k = 1; k < gh.size(); ++k) total += gh.w(k) * f(gh.x(k));
    return total - sweep(s, -1, max_abs<double>(total));
}

}  // namespace ncpiv
