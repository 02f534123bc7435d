#pragma once

#include "kernels.hpp"
#include "matrix.hpp"
#include "mop.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ncpiv {

struct GramSystem {
    double s = 0.0;
    RMat g;  // blocks int_s^inf Phi_j Phi_k^T
    RMat b;  // blocks Phi_j(s) Phi_k^T(s) = -dG/ds
};

namespace detail {

// stacked Phi_0..Phi_{n-1} as an (nN x N) matrix
inline RMat phi_stack(const MOPFamily& f, int n, double x) {
    const int N = f.dim();
    RMat out(n * N, N);
    const auto v = f.phi_values(x, n);
    for (int k = 0; k < n; ++k) out.block(k * N, 0, N, N) = v[k];
    return out;
}

inline void require_n(const MOPFamily& f, int n) {
    if (n < 1 || n > f.nmax) throw std::out_of_range("n must satisfy 1 <= n <= nmax");
}

}  // namespace detail

inline GramSystem gram_system(const MOPFamily& f, int n, double s) {
    detail::require_n(f, n);
    GramSystem gs;
    gs.s = s;
    gs.g = tail_integral([&](double x) {
        const RMat p = detail::phi_stack(f, n, x);
        return RMat(p * p.transpose());
    }, s);
    gs.g = 0.5 * (gs.g + gs.g.transpose());
    const RMat ps = detail::phi_stack(f, n, s);
    gs.b = ps * ps.transpose();
    return gs;
}

inline double gram_det(const MOPFamily& f, int n, double s) {
    const GramSystem gs = gram_system(f, n, s);
    return (RMat::Identity(gs.g.rows(), gs.g.cols()) - gs.g).partialPivLu().determinant();
}

// R = tr(M B), R' = tr(-MBMB + MB') straight from the Gram system; fine when F is not small
struct ResolventTraces {
    double r = 0.0, rp = 0.0;
};

inline ResolventTraces gram_resolvent(const MOPFamily& f, int n, double s) {
    const GramSystem gs = gram_system(f, n, s);
    const int N = f.dim();
    const RMat h = RMat::Identity(gs.g.rows(), gs.g.cols()) - gs.g;
    std::vector<RMat> ph, dph;
    f.phi_values_d(s, n, ph, dph);
    RMat p(n * N, N), dp(n * N, N);
    for (int k = 0; k < n; ++k) {
        p.block(k * N, 0, N, N) = ph[k];
        dp.block(k * N, 0, N, N) = dph[k];
    }
    const auto lu = h.partialPivLu();
    const RMat mp = lu.solve(p);   // M Phi
    const RMat mdp = lu.solve(dp);
    const RMat core = p.transpose() * mp;
    ResolventTraces t;
    t.r = core.trace();
    t.rp = -(core * core).trace() + 2.0 * (p.transpose() * mdp).trace();
    return t;
}

// Orthonormal description of span{Phi_k restricted to (-inf, s]}: the left part
// H = int_{-inf}^s Phi Phi^T = I - G is factored without ever forming it.
struct TruncatedSpan {
    double s = 0.0;
    double logdet = 0.0;  // log det(I - G)
    double r = 0.0;       // d/ds log det
    double rp = 0.0;      // d^2/ds^2 log det
};

inline TruncatedSpan truncated_span(const MOPFamily& f, int n, double s) {
    detail::require_n(f, n);
    const int N = f.dim();
    const WeightFamily& wf = f.weight;
    const int degree = 2 * (n + wf.t_degree()) + 4;
    const QuadRule rule = tail_panels(s, -1, degree);
    const std::size_t q = rule.size();

    // scalar Lanczos for the measure e^{-x^2} dx on (-inf, s]
    RVec sw(q), xs(q);
    for (std::size_t i = 0; i < q; ++i) {
        xs(i) = rule.x(i);
        sw(i) = std::sqrt(rule.w(i)) * std::exp(-0.5 * xs(i) * xs(i));
    }
    const double mu0 = sw.squaredNorm();
    if (!(mu0 > 0.0)) throw numerical_error("determinant vanishes");
    std::vector<double> a(n), b(n + 1, 0.0);
    std::vector<RVec> vs;
    vs.push_back(sw / std::sqrt(mu0));
    for (int k = 0; k < n; ++k) {
        RVec v = xs.cwiseProduct(vs[k]);
        a[k] = vs[k].dot(v);
        v -= a[k] * vs[k];
        if (k > 0) v -= b[k] * vs[k - 1];
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : vs) v -= u.dot(v) * u;
        b[k + 1] = v.norm();
        if (k + 1 < n) vs.push_back(v / b[k + 1]);
    }
    // pi_k(x) and derivatives by the recurrence
    auto pis = [&](double x, std::vector<double>& p, std::vector<double>& dp) {
        p.assign(n, 0.0);
        dp.assign(n, 0.0);
        p[0] = 1.0 / std::sqrt(mu0);
        for (int k = 0; k + 1 < n; ++k) {
            const double pm = k ? p[k - 1] : 0.0, dpm = k ? dp[k - 1] : 0.0;
            p[k + 1] = ((x - a[k]) * p[k] - b[k] * pm) / b[k + 1];
            dp[k + 1] = (p[k] + (x - a[k]) * dp[k] - b[k] * dpm) / b[k + 1];
        }
    };
    double log_kappa = -0.5 * std::log(mu0), sum_log_kappa = 0.0;
    for (int k = 0; k < n; ++k) {
        if (k > 0) log_kappa -= std::log(b[k]);
        sum_log_kappa += log_kappa;
    }

    // V[(i,c),(k,a)] = sqrt(w_i) e^{-x^2/2} pi_k(x_i) T_{ac}(x_i)
    RMat v(q * N, n * N);
    std::vector<double> p, dp;
    for (std::size_t i = 0; i < q; ++i) {
        pis(xs(i), p, dp);
        const RMat t = wf.t_factor(xs(i));
        for (int k = 0; k < n; ++k)
            for (int aa = 0; aa < N; ++aa)
                for (int c = 0; c < N; ++c) v(i * N + c, k * N + aa) = sw(i) * p[k] * t(aa, c);
    }
    Eigen::HouseholderQR<RMat> qr(v);
    const RMat rt = qr.matrixQR().topRows(n * N).triangularView<Eigen::Upper>();

    pis(s, p, dp);
    const double g = std::exp(-0.5 * s * s);
    const RMat t = wf.t_factor(s), dt = wf.t_factor_dx(s);
    RMat fs(n * N, N), fx(n * N, N);
    for (int k = 0; k < n; ++k)
        for (int aa = 0; aa < N; ++aa)
            for (int c = 0; c < N; ++c) {
                fs(k * N + aa, c) = g * p[k] * t(aa, c);
                fx(k * N + aa, c) = g * ((dp[k] - s * p[k]) * t(aa, c) + p[k] * dt(aa, c));
            }
    const auto rtt = rt.transpose().triangularView<Eigen::Lower>();
    const RMat psi = rtt.solve(fs);
    const RMat psix = rtt.solve(fx);

    TruncatedSpan out;
    out.s = s;
    double logr = 0.0;
    for (int i = 0; i < n * N; ++i) logr += std::log(std::abs(rt(i, i)));
    double loglead = 0.0;
    for (int k = 0; k < n; ++k) loglead += std::log(std::abs(f.lead[k].determinant()));
    out.logdet = 2.0 * logr + 2.0 * loglead - 2.0 * N * sum_log_kappa;
    const RMat core = psi.transpose() * psi;
    out.r = core.trace();
    out.rp = -core.squaredNorm() + 2.0 * (psi.transpose() * psix).trace();
    return out;
}

// order 0: log det(I - G); 1: R = d/ds log det; 2: R'
inline double log_deriv(const MOPFamily& f, int n, double s, int order) {
    if (order < 0 || order > 2) throw std::invalid_argument("order must be 0, 1 or 2");
    const TruncatedSpan t = truncated_span(f, n, s);
    if (!(t.logdet > std::log(1e-300))) throw numerical_error("determinant vanishes");
    return order == 0 ? t.logdet : order == 1 ? t.r : t.rp;
}

struct SigmaPiv {
    double r = 0.0, rp = 0.0, rpp = 0.0, residual = 0.0;
};

inline SigmaPiv sigma_piv(const MOPFamily& f, int n, double s, double h = 1e-4) {
    if (f.weight.kind != FamilyKind::Scalar) throw std::invalid_argument("sigma form is scalar only");
    const TruncatedSpan mid = truncated_span(f, n, s);
    if (!(mid.logdet > std::log(1e-300))) throw numerical_error("determinant vanishes");
    SigmaPiv out;
    out.r = mid.r;
    out.rp = mid.rp;
    out.rpp = (truncated_span(f, n, s + h).rp - truncated_span(f, n, s - h).rp) / (2.0 * h);
    const double a = s * out.rp - out.r;
    out.residual = out.rpp * out.rpp + 4.0 * out.rp * out.rp * (out.rp + 2.0 * n) - 4.0 * a * a;
    return out;
}

inline double sigma_piv_residual(const MOPFamily& f, int n, double s) { return sigma_piv(f, n, s).residual; }

inline double sigma_piv_residual(int n, double s) {
    return sigma_piv_residual(build_family(WeightFamily::scalar(), n), n, s);
}

// theta_n(lambda, s) = lambda^2 - 2 lambda s + n log lambda; only e^theta is ever used
struct ThetaPhase {
    cplx lambda;
    double s;
    int n;
    cplx exp_value() const { return std::exp(lambda * lambda - 2.0 * lambda * s) * ipow(lambda, n); }
};

// Smaller rules than the kernel defaults: the Nystrom matrix is dense and the
// integrands here are as smooth as those of the kernel.
inline ContourSettings nystrom_settings() {
    ContourSettings cs;
    cs.circle_nodes = 96;
    cs.line_nodes = 160;
    return cs;
}

struct ContourDet {
    double value = 0.0;
    double imag = 0.0;
};

// det(Id - F_s o G) on the line, inner circle integral done by the circle rule
inline ContourDet contour_det(const KernelPayload& p, int dim, int n, double s, const ContourSettings& cs = nystrom_settings()) {
    cs.validate();
    if (n < 1) throw std::invalid_argument("contour determinant needs n >= 1");
    const QuadRule circ = cs.circle();
    const QuadRule line = cs.line();
    const Eigen::Index mc = circ.size(), ml = line.size();
    const CMat probe = p.left(circ.nodes[0]);
    const Eigen::Index N = dim, P = probe.cols();
    if (probe.rows() != N) throw std::invalid_argument("payload shape");
    if (ml * N > 3000) throw std::invalid_argument("budget exceeded");

    const cplx twopii(0.0, 2.0 * std::numbers::pi);
    std::vector<CMat> ak(mc);
    for (Eigen::Index k = 0; k < mc; ++k) {
        const cplx z = circ.nodes[k];
        ak[k] = p.left(z) * (circ.weights[k] * std::exp(-z * z + 2.0 * s * z) * ipow(z, -n));
    }
    CMat x(ml * N, mc * P), y(mc * P, ml * N);
    for (Eigen::Index i = 0; i < ml; ++i) {
        const cplx lam = line.nodes[i];
        const cplx rowf = std::exp(-2.0 * s * lam);
        for (Eigen::Index k = 0; k < mc; ++k) x.block(i * N, k * P, N, P) = ak[k] * (rowf / (lam - circ.nodes[k]));
    }
    for (Eigen::Index j = 0; j < ml; ++j) {
        const cplx w = line.nodes[j];
        const CMat rj = p.right(w) * (line.weights[j] * std::exp(w * w) * ipow(w, n) / (twopii * twopii));
        for (Eigen::Index k = 0; k < mc; ++k) y.block(k * P, j * N, P, N) = rj / (w - circ.nodes[k]);
    }
    // det(I - XY) = det(I - YX); use the smaller side
    CMat m = (mc * P <= ml * N) ? CMat(y * x) : CMat(x * y);
    m = CMat::Identity(m.rows(), m.cols()) - m;
    const cplx d = m.partialPivLu().determinant();
    ContourDet out{d.real(), d.imag()};
    if (std::abs(d.imag()) > 1e-6 * std::max(1.0, std::abs(d.real()))) throw numerical_error("non-real determinant");
    return out;
}

inline ContourDet contour_det(const WeightFamily& w, int n, double s, const ContourSettings& cs = nystrom_settings()) {
    return contour_det(family_payload(w, n), w.dim, n, s, cs);
}

}  // namespace ncpiv
