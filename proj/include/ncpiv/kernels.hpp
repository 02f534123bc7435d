#pragma once

#include "matrix.hpp"
#include "mop.hpp"
#include "quadrature.hpp"

#include <functional>
#include <numbers>
#include <optional>
#include <random>

namespace ncpiv {

enum class KernelForm { Sum, DoubleIntA, DoubleIntB, Generic };

// B_n(z) (N x p) and its partner Bhat_n(w) (p x N)
struct KernelPayload {
    std::function<CMat(cplx)> left;
    std::function<CMat(cplx)> right;
};

struct KernelSpec {
    WeightFamily family;
    int n = 0;
    KernelForm form = KernelForm::Sum;
    std::optional<KernelPayload> payload;
};

// B(z) Bhat(z) = I at 10 pseudo-random points
inline void validate_payload(const KernelPayload& p, int dim) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int k = 0; k < 10; ++k) {
        const cplx z(u(rng), u(rng));
        const CMat prod = p.left(z) * p.right(z);
        if (prod.rows() != dim || prod.cols() != dim ||
            max_abs<cplx>(CMat(prod - CMat::Identity(dim, dim))) > 1e-10)
            throw std::invalid_argument("payload is not a right-inverse pair");
    }
}

inline KernelPayload family_payload(const WeightFamily& w, int n) {
    if (w.kind == FamilyKind::Scalar) {
        auto one = [](cplx) { return CMat::Identity(1, 1); };
        return {one, one};
    }
    const FamilyConstants k = family_constants(w, n);
    const IntDiag j2 = j_exponents(2);
    if (w.kind == FamilyKind::ExampleA) {
        const CMat b = to_complex(k.b), bi = to_complex(k.b_hat);
        return {[=](cplx z) { return power_conjugate(j2, b, z); },
                [=](cplx z) { return power_conjugate(j2, bi, z); }};
    }
    const IntDiag j22 = j_exponents(2, 2), j3 = j_exponents(3);
    const CMat b = to_complex(k.b), bh = to_complex(k.b_hat);
    return {[=](cplx z) { return power_conjugate(j22, b, j3, z); },
            [=](cplx z) { return power_conjugate(j3, bh, j22, z); }};
}

inline RMat cd_sum(const MOPFamily& f, int n, double x, double y) {
    const int N = f.dim();
    if (n < 0 || n > f.nmax) throw std::out_of_range("n beyond nmax");
    RMat k = RMat::Zero(N, N);
    if (n == 0) return k;
    const auto px = f.phi_values(x, n);
    const auto py = f.phi_values(y, n);
    for (int j = 0; j < n; ++j) k += py[j].transpose() * px[j];
    return k;
}

// (2/(2 pi i)^2) e^{(x^2-y^2)/2} int_I dw oint dz B(z) Bhat(w) e^{w^2-2xw-z^2+2zy} (w/z)^n / (w-z)
inline CMat cd_double_integral(const KernelPayload& p, int n, double x, double y, const ContourSettings& cs = {}) {
    cs.validate();
    if (n < 1) throw std::invalid_argument("double integral needs n >= 1");
    const QuadRule circ = cs.circle();
    const QuadRule line = cs.line();
    std::vector<CMat> a(circ.size());
    for (std::size_t k = 0; k < circ.size(); ++k) {
        const cplx z = circ.nodes[k];
        a[k] = p.left(z) * (circ.weights[k] * std::exp(-z * z + 2.0 * z * y) * ipow(z, -n));
    }
    const Eigen::Index N = a[0].rows(), P = a[0].cols();
    std::vector<CMat> terms(line.size());
    for (std::size_t j = 0; j < line.size(); ++j) {
        const cplx w = line.nodes[j];
        CMat m = CMat::Zero(N, P);
        for (std::size_t k = 0; k < circ.size(); ++k) m += a[k] / (w - circ.nodes[k]);
        terms[j] = m * (p.right(w) * (line.weights[j] * std::exp(w * w - 2.0 * x * w) * ipow(w, n)));
    }
    const cplx twopii(0.0, 2.0 * std::numbers::pi);
    return (2.0 / (twopii * twopii)) * std::exp(0.5 * (x * x - y * y)) * pairwise_sum(terms);
}

inline CMat cd_double_integral(const KernelSpec& spec, double x, double y, const ContourSettings& cs = {}) {
    if (spec.form == KernelForm::Generic) {
        if (!spec.payload) throw std::invalid_argument("generic form needs a payload");
        validate_payload(*spec.payload, spec.family.dim);
        return cd_double_integral(*spec.payload, spec.n, x, y, cs);
    }
    if (spec.form == KernelForm::DoubleIntA && spec.family.kind != FamilyKind::ExampleA)
        throw std::invalid_argument("form does not match family");
    if (spec.form == KernelForm::DoubleIntB && spec.family.kind != FamilyKind::ExampleB)
        throw std::invalid_argument("form does not match family");
    return cd_double_integral(family_payload(spec.family, spec.n), spec.n, x, y, cs);
}

// max |double integral - sum| over a grid, for user-supplied payloads
inline double generic_kernel_deviation(const MOPFamily& f, const KernelPayload& p, int n,
                                       const std::vector<double>& grid, const ContourSettings& cs = {}) {
    validate_payload(p, f.dim());
    double worst = 0.0;
    for (double x : grid)
        for (double y : grid) {
            const CMat d = cd_double_integral(p, n, x, y, cs) - to_complex(cd_sum(f, n, x, y));
            worst = std::max(worst, max_abs<cplx>(d));
        }
    return worst;
}

namespace detail {
inline IntDiag intrep_exponents(const WeightFamily& w) {
    if (w.kind == FamilyKind::Scalar) throw std::invalid_argument("no matrix constants");
    return j_exponents(w.dim, w.kind == FamilyKind::ExampleB ? 2 : 1);
}
}  // namespace detail

// oint z^{-J} C_n z^{J} e^{-z^2+2zx} dz / z^{n+1}
inline CMat intrep_loop(const WeightFamily& w, int n, double x, const ContourSettings& cs = {}) {
    const IntDiag j = detail::intrep_exponents(w);
    const CMat c = family_constants(w, n).c;
    const QuadRule circ = cs.circle();
    std::vector<CMat> terms(circ.size());
    for (std::size_t k = 0; k < circ.size(); ++k) {
        const cplx z = circ.nodes[k];
        terms[k] = power_conjugate(negated(j), c, z) * (circ.weights[k] * std::exp(-z * z + 2.0 * z * x) * ipow(z, -n - 1));
    }
    return pairwise_sum(terms);
}

// e^{x^2} int_I w^{J} D_n w^{-J} e^{w^2-2xw} w^n dw
inline CMat intrep_line(const WeightFamily& w, int n, double x, const ContourSettings& cs = {}) {
    const IntDiag j = detail::intrep_exponents(w);
    const CMat d = family_constants(w, n).d;
    const QuadRule line = cs.line();
    std::vector<CMat> terms(line.size());
    for (std::size_t k = 0; k < line.size(); ++k) {
        const cplx v = line.nodes[k];
        terms[k] = power_conjugate(j, d, v) * (line.weights[k] * std::exp(v * v - 2.0 * x * v + x * x) * ipow(v, n));
    }
    return pairwise_sum(terms);
}

// P_n(x) T(x) by direct evaluation
inline RMat intrep_direct(const MOPFamily& f, int n, double x) {
    f.check(n);
    return f.poly(n, x) * f.weight.t_factor(x);
}

// int K_n(x,y) K_n(z,x) dx - K_n(z,y)
inline RMat reproducing_residual(const MOPFamily& f, int n, double y, double z, const QuadRule& quad) {
    if (n > f.nmax) throw std::out_of_range("n beyond nmax");
    const int N = f.dim();
    RMat acc = RMat::Zero(N, N);
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const double x = quad.x(i);
        acc += quad.w(i) * cd_sum(f, n, x, y) * cd_sum(f, n, z, x);
    }
    return acc - cd_sum(f, n, z, y);
}

}  // namespace ncpiv
