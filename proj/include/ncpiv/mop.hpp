#pragma once

#include "matrix.hpp"
#include "quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace ncpiv {

enum class FamilyKind { ExampleA, ExampleB, Scalar };

struct WeightFamily {
    FamilyKind kind = FamilyKind::Scalar;
    double nu = 0.0;
    int dim = 1;

    static WeightFamily example_a(double nu, int dim = 2) { return {FamilyKind::ExampleA, nu, dim}; }
    static WeightFamily example_b(double nu, int dim = 2) { return {FamilyKind::ExampleB, nu, dim}; }
    static WeightFamily scalar() { return {FamilyKind::Scalar, 0.0, 1}; }

    bool is_matrix() const { return kind != FamilyKind::Scalar; }

    RMat a() const { return kind == FamilyKind::Scalar ? RMat::Zero(1, 1) : shift_matrix(dim, nu); }

    // B = A (I + A)^{-1}; equals A when N = 2
    RMat b() const {
        const RMat am = a();
        return am * nilpotent_power<double>(am, -1.0);
    }

    // the factor that turns polynomials into weighted functions
    RMat t_factor(double x) const {
        switch (kind) {
            case FamilyKind::ExampleA: return nilpotent_exp<double>(a(), x);
            case FamilyKind::ExampleB: return nilpotent_exp<double>(b(), x * x);
            default: return RMat::Identity(1, 1);
        }
    }

    RMat t_factor_dx(double x) const {
        switch (kind) {
            case FamilyKind::ExampleA: return a() * t_factor(x);
            case FamilyKind::ExampleB: return 2.0 * x * b() * t_factor(x);
            default: return RMat::Zero(1, 1);
        }
    }

    int t_degree() const {
        switch (kind) {
            case FamilyKind::ExampleA: return dim - 1;
            case FamilyKind::ExampleB: return 2 * (dim - 1);
            default: return 0;
        }
    }

    // P_n = E_n * monic
    RMat normalization(int n) const {
        switch (kind) {
            case FamilyKind::ExampleA: {
                const RMat am = a();
                return nilpotent_exp<double>(RMat(am * am), -0.25);
            }
            case FamilyKind::ExampleB: return nilpotent_power<double>(a(), -(2.0 * n + 1.0) / 2.0);
            default: return RMat::Identity(1, 1);
        }
    }

    IntDiag j() const { return j_exponents(dim); }
};

inline RMat weight_eval(const WeightFamily& w, double x) {
    const RMat t = w.t_factor(x);
    return std::exp(-x * x) * t * t.transpose();
}

class MatrixPoly {
public:
    MatrixPoly() = default;
    explicit MatrixPoly(std::vector<RMat> c) : coeffs_(std::move(c)) {
        if (coeffs_.empty()) throw std::invalid_argument("empty polynomial");
    }

    static MatrixPoly constant(const RMat& c) { return MatrixPoly({c}); }

    int degree() const { return int(coeffs_.size()) - 1; }
    int dim() const { return int(coeffs_.front().rows()); }
    const std::vector<RMat>& coeffs() const { return coeffs_; }
    const RMat& operator[](int k) const { return coeffs_[k]; }

    RMat operator()(double x) const {
        RMat acc = coeffs_.back();
        for (int k = degree() - 1; k >= 0; --k) acc = (acc * x + coeffs_[k]).eval();
        return acc;
    }

    MatrixPoly derivative() const {
        if (degree() == 0) return constant(RMat::Zero(coeffs_[0].rows(), coeffs_[0].cols()));
        std::vector<RMat> d;
        for (int k = 1; k <= degree(); ++k) d.push_back(double(k) * coeffs_[k]);
        return MatrixPoly(std::move(d));
    }

    // x * P
    MatrixPoly times_x() const {
        std::vector<RMat> c;
        c.push_back(RMat::Zero(coeffs_[0].rows(), coeffs_[0].cols()));
        c.insert(c.end(), coeffs_.begin(), coeffs_.end());
        return MatrixPoly(std::move(c));
    }

    friend MatrixPoly operator*(const RMat& m, const MatrixPoly& p) {
        std::vector<RMat> c;
        for (const auto& a : p.coeffs_) c.push_back(m * a);
        return MatrixPoly(std::move(c));
    }

    friend MatrixPoly operator*(const MatrixPoly& p, const RMat& m) {
        std::vector<RMat> c;
        for (const auto& a : p.coeffs_) c.push_back(a * m);
        return MatrixPoly(std::move(c));
    }

    friend MatrixPoly operator-(const MatrixPoly& a, const MatrixPoly& b) {
        const int d = std::max(a.degree(), b.degree());
        std::vector<RMat> c;
        const RMat zero = RMat::Zero(a.coeffs_[0].rows(), a.coeffs_[0].cols());
        for (int k = 0; k <= d; ++k)
            c.push_back((k <= a.degree() ? a.coeffs_[k] : zero) - (k <= b.degree() ? b.coeffs_[k] : zero));
        return MatrixPoly(std::move(c));
    }

private:
    std::vector<RMat> coeffs_;
};

struct MOPFamily {
    WeightFamily weight;
    int nmax = 0;
    std::vector<MatrixPoly> monic;
    std::vector<RMat> normalization;  // E_n
    std::vector<RMat> norms;          // ||P_n||^2
    std::vector<RMat> lead;           // ||P_n||^{-1} E_n, leading coefficient of the orthonormal polynomial
    std::vector<RMat> alpha, beta;    // x P^_k = P^_{k+1} + alpha_k P^_k + beta_k P^_{k-1}
    std::vector<RMat> monic_norms;    // S_k = <P^_k, P^_k>
    double orthonormality_residual = 0.0;
    int quad_nodes = 0;

    int dim() const { return weight.dim; }

    // P^_k(x), k < count, by the monic recurrence
    std::vector<RMat> monic_values(double x, int count) const {
        check(count - 1);
        const int N = dim();
        std::vector<RMat> v;
        v.reserve(count);
        if (count == 0) return v;
        v.push_back(RMat::Identity(N, N));
        for (int k = 0; k + 1 < count; ++k) {
            RMat next = x * v[k] - alpha[k] * v[k];
            if (k > 0) next -= beta[k] * v[k - 1];
            v.push_back(std::move(next));
        }
        return v;
    }

    // values and x-derivatives together
    void monic_values_d(double x, int count, std::vector<RMat>& v, std::vector<RMat>& dv) const {
        check(count - 1);
        const int N = dim();
        v.clear();
        dv.clear();
        if (count == 0) return;
        v.push_back(RMat::Identity(N, N));
        dv.push_back(RMat::Zero(N, N));
        for (int k = 0; k + 1 < count; ++k) {
            RMat next = x * v[k] - alpha[k] * v[k];
            RMat dnext = v[k] + x * dv[k] - alpha[k] * dv[k];
            if (k > 0) {
                next -= beta[k] * v[k - 1];
                dnext -= beta[k] * dv[k - 1];
            }
            v.push_back(std::move(next));
            dv.push_back(std::move(dnext));
        }
    }

    // P_n(x) via the recurrence
    RMat poly(int n, double x) const { return normalization[n] * monic_values(x, n + 1)[n]; }

    // Phi_k(x) for k < count
    std::vector<RMat> phi_values(double x, int count) const {
        auto v = monic_values(x, count);
        const RMat t = std::exp(-0.5 * x * x) * weight.t_factor(x);
        for (int k = 0; k < count; ++k) v[k] = lead[k] * v[k] * t;
        return v;
    }

    void phi_values_d(double x, int count, std::vector<RMat>& phi, std::vector<RMat>& dphi) const {
        std::vector<RMat> v, dv;
        monic_values_d(x, count, v, dv);
        const double g = std::exp(-0.5 * x * x);
        const RMat t = weight.t_factor(x);
        const RMat dt = weight.t_factor_dx(x);
        phi.resize(count);
        dphi.resize(count);
        for (int k = 0; k < count; ++k) {
            phi[k] = g * lead[k] * v[k] * t;
            dphi[k] = g * lead[k] * ((dv[k] - x * v[k]) * t + v[k] * dt);
        }
    }

    void check(int n) const {
        if (n < -1 || n >= nmax) throw std::out_of_range("index beyond nmax");
    }
};

inline int reference_nodes(int nmax) { return std::max(200, 3 * nmax); }

// Matrix Stieltjes procedure in monic form on a Gauss-Hermite rule.
inline MOPFamily build_family(const WeightFamily& w, int nmax, const QuadRule& quad) {
    if (nmax < 1) throw std::invalid_argument("nmax >= 1");
    if (w.kind == FamilyKind::Scalar && w.dim != 1) throw std::invalid_argument("scalar family has N = 1");
    const int N = w.dim;
    const std::size_t m = quad.size();

    MOPFamily f;
    f.weight = w;
    f.nmax = nmax;
    f.quad_nodes = int(m);

    // Y_k(x_i) = P^_k(x_i) T(x_i)
    std::vector<RMat> ts(m);
    for (std::size_t i = 0; i < m; ++i) ts[i] = w.t_factor(quad.x(i));
    std::vector<RMat> prev(m), cur(m, RMat::Identity(N, N));

    auto gram = [&](const std::vector<RMat>& p, const std::vector<RMat>& q, bool with_x) {
        RMat acc = RMat::Zero(N, N);
        for (std::size_t i = 0; i < m; ++i) {
            const double c = quad.w(i) * (with_x ? quad.x(i) : 1.0);
            acc += c * (p[i] * ts[i]) * (q[i] * ts[i]).transpose();
        }
        return acc;
    };

    MatrixPoly pprev, pcur = MatrixPoly::constant(RMat::Identity(N, N));
    for (int k = 0; k < nmax; ++k) {
        const RMat s = gram(cur, cur, false);
        const RMat sx = gram(cur, cur, true);
        const RMat sinv = s.partialPivLu().inverse();
        f.monic.push_back(pcur);
        f.monic_norms.push_back(0.5 * (s + s.transpose()));
        f.alpha.push_back(sx * sinv);
        f.beta.push_back(k == 0 ? RMat::Zero(N, N) : RMat(s * f.monic_norms[k - 1].partialPivLu().inverse()));

        std::vector<RMat> next(m);
        for (std::size_t i = 0; i < m; ++i) {
            next[i] = quad.x(i) * cur[i] - f.alpha[k] * cur[i];
            if (k > 0) next[i] -= f.beta[k] * prev[i];
        }
        MatrixPoly pnext = pcur.times_x() - f.alpha[k] * pcur;
        if (k > 0) pnext = pnext - f.beta[k] * pprev;
        prev = std::move(cur);
        cur = std::move(next);
        pprev = std::move(pcur);
        pcur = std::move(pnext);
    }

    for (int k = 0; k < nmax; ++k) {
        const RMat e = w.normalization(k);
        RMat nk = e * f.monic_norms[k] * e.transpose();
        nk = 0.5 * (nk + nk.transpose());
        f.normalization.push_back(e);
        f.norms.push_back(nk);
        f.lead.push_back(spd_inv_sqrt(nk) * e);
    }

    // orthonormality of Phi under the same rule
    std::vector<std::vector<RMat>> phis(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto v = f.monic_values(quad.x(i), nmax);
        for (int k = 0; k < nmax; ++k) v[k] = f.lead[k] * v[k] * ts[i];
        phis[i] = std::move(v);
    }
    double worst = 0.0;
    for (int j = 0; j < nmax; ++j)
        for (int k = j; k < nmax; ++k) {
            RMat acc = RMat::Zero(N, N);
            for (std::size_t i = 0; i < m; ++i) acc += quad.w(i) * phis[i][j] * phis[i][k].transpose();
            if (j == k) acc -= RMat::Identity(N, N);
            worst = std::max(worst, max_abs<double>(acc));
        }
    f.orthonormality_residual = worst;
    if (worst > 1e-6) throw numerical_error("insufficient quadrature");
    return f;
}

inline MOPFamily build_family(const WeightFamily& w, int nmax) {
    return build_family(w, nmax, gauss_hermite(reference_nodes(nmax)));
}

inline RMat phi(const MOPFamily& f, int n, double x) {
    f.check(n);
    return f.phi_values(x, n + 1)[n];
}

// ODE coefficients F1(x), F0 and eigenvalue matrix Gamma_n
struct OdeCoefficients {
    RMat f1_const, f1_x, f0, gamma;
};

inline OdeCoefficients ode_coefficients(const WeightFamily& w, int n) {
    const int N = w.dim;
    const RMat I = RMat::Identity(N, N);
    const RMat J = diag_matrix(w.j());
    OdeCoefficients c;
    switch (w.kind) {
        case FamilyKind::ExampleA: {
            const RMat a = w.a();
            c.f1_x = -2.0 * I;
            c.f1_const = 2.0 * a;
            c.f0 = a * a - 2.0 * J;
            c.gamma = -2.0 * n * I - 2.0 * J;
            break;
        }
        case FamilyKind::ExampleB: {
            const RMat b = w.b();
            c.f1_x = 2.0 * (2.0 * b - I);
            c.f1_const = RMat::Zero(N, N);
            c.f0 = 2.0 * (b - 2.0 * J);
            c.gamma = -2.0 * n * I - 4.0 * J;
            break;
        }
        default:
            c.f1_x = -2.0 * I;
            c.f1_const = RMat::Zero(1, 1);
            c.f0 = RMat::Zero(1, 1);
            c.gamma = RMat::Constant(1, 1, -2.0 * n);
    }
    return c;
}

// P'' + P' F1 + P F0 - Gamma_n P, with P_n from its coefficients
inline RMat ode_residual(const MOPFamily& f, int n, double x) {
    f.check(n);
    const MatrixPoly p = f.normalization[n] * f.monic[n];
    const MatrixPoly dp = p.derivative();
    const MatrixPoly ddp = dp.derivative();
    const OdeCoefficients c = ode_coefficients(f.weight, n);
    const RMat f1 = x * c.f1_x + c.f1_const;
    const RMat pv = p(x);
    return ddp(x) + dp(x) * f1 + pv * c.f0 - c.gamma * pv;
}

struct FamilyConstants {
    CMat c, d;
    RMat b, b_hat;
    RMat norm;
};

inline double gamma2(double nu, int n) { return 1.0 + n * nu * nu / 2.0; }
inline double delta2(double nu, int n) { return 1.0 + n * (n - 1.0) * nu * nu / 4.0; }

inline double factorial(int n) { return std::tgamma(n + 1.0); }

// closed-form ||P_n||^2
inline RMat closed_form_norm(const WeightFamily& w, int n) {
    const double s = factorial(n) * std::sqrt(std::numbers::pi) / std::ldexp(1.0, n);
    RMat m = RMat::Zero(w.dim, w.dim);
    switch (w.kind) {
        case FamilyKind::ExampleA:
            m(0, 0) = gamma2(w.nu, n + 1);
            m(1, 1) = 1.0 / gamma2(w.nu, n);
            break;
        case FamilyKind::ExampleB:
            m(0, 0) = delta2(w.nu, n + 2);
            m(1, 1) = 1.0 / delta2(w.nu, n);
            break;
        default: m(0, 0) = 1.0;
    }
    return s * m;
}

inline FamilyConstants family_constants(const WeightFamily& w, int n) {
    if (w.kind == FamilyKind::Scalar) throw std::invalid_argument("no matrix constants");
    if (w.dim != 2) throw std::invalid_argument("closed-form constants only for N = 2");
    if (n < 0) throw std::invalid_argument("n >= 0");
    const double nu = w.nu;
    const cplx i(0.0, 1.0);
    const cplx cpref = factorial(n) / (std::ldexp(1.0, n + 1) * std::numbers::pi * i);
    const cplx dpref = 1.0 / (i * std::sqrt(std::numbers::pi));
    FamilyConstants k;
    k.norm = closed_form_norm(w, n);
    k.c.resize(2, 2);
    k.d.resize(2, 2);
    if (w.kind == FamilyKind::ExampleA) {
        const double g = gamma2(nu, n);
        k.c << 1.0, nu * (n + 1) / 2.0, -nu / g, 1.0 / g;
        k.d << 1.0, nu, -n * nu / (2.0 * g), 1.0 / g;
        k.b.resize(2, 2);
        k.b << 1.0, -nu, n * nu / 2.0, 1.0;
        k.b_hat = k.b.inverse();
    } else {
        const double d0 = delta2(nu, n), d1 = delta2(nu, n + 1);
        k.c << 1.0, nu * (n + 1) * (n + 2) / 4.0, -nu / d0, 1.0 / d0;
        k.d << 1.0, nu, -n * (n - 1.0) * nu / (4.0 * d0), 1.0 / d0;
        k.b.resize(2, 3);
        k.b << 1.0 / d1, n * nu * nu / (2.0 * d1 * d0), -nu,
               nu * n * (n + 1.0) / (4.0 * d1), -n * nu / (2.0 * d1 * d0), 1.0;
        k.b_hat.resize(3, 2);
        k.b_hat << 1.0, nu,
                   1.0, nu,
                   -nu * n * (n - 1.0) / (4.0 * d0), 1.0 / d0;
    }
    k.c *= cpref;
    k.d *= dpref;
    return k;
}

}  // namespace ncpiv
