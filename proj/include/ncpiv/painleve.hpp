#pragma once

#include "matrix.hpp"
#include "series.hpp"

#include <cmath>
#include <complex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace ncpiv {

enum class Variant { A, B };

// LaxConsistent carries the 2c[z, J2] term that compatibility of the Lax pair requires
enum class CoupledForm { LaxConsistent, Uncorrected };

struct PIVState {
    double s = 0.0;
    RMat y, z, zp, u;
    Variant variant = Variant::A;
    int n = 0;
};

struct PIVDerivative {
    RMat y, z, zp, u;
};

inline int variant_width(Variant v) { return v == Variant::A ? 2 : 3; }
inline double variant_c(Variant v) { return v == Variant::A ? 1.0 : 2.0; }

inline void validate_state(const PIVState& st) {
    const int p = variant_width(st.variant);
    auto shape = [](const RMat& m, int r, int c) { return m.rows() == r && m.cols() == c; };
    if (!shape(st.y, 2, p) || !shape(st.z, 2, 2) || !shape(st.zp, 2, 2) || !shape(st.u, 2, 2))
        throw std::invalid_argument("state shapes do not match the variant");
    if (st.n < 0) throw std::invalid_argument("n must be a non-negative integer");
}

namespace detail {

inline void check_y(const RMat& y0, Variant v) {
    const RMat g = v == Variant::A ? y0 : RMat(y0 * y0.transpose());
    Eigen::JacobiSVD<RMat> svd(g);
    const auto& sv = svd.singularValues();
    const double bound = v == Variant::A ? 1e10 : 1e12;
    if (!(sv(sv.size() - 1) > 0.0) || sv(0) / sv(sv.size() - 1) > bound) throw numerical_error("y singular");
}

// y^{-1} (A) or y^T (y y^T)^{-1} (B)
inline Series y_inverse(const Series& y, Variant v) {
    check_y(y.value(), v);
    if (v == Variant::A) return inverse(y);
    const Series yt = y.transpose();
    return yt * inverse(y * yt);
}

inline Series v_series(const Series& y, const Series& yinv, Variant v) {
    const RMat j2 = diag_matrix(j_exponents(2));
    if (v == Variant::A) return 2.0 * ((j2 * y - y * j2) * yinv);
    const RMat j3 = diag_matrix(j_exponents(3));
    return Series(4.0 * j2, y.order()) - 2.0 * (y * j3 * yinv);
}

struct Jets {
    Series s, y, z, zp, u;
};

struct JetRhs {
    Series y, z, zp, u;
};

inline JetRhs rhs_series(const Jets& j, Variant v, int n, CoupledForm form) {
    const int o = j.y.order();
    const RMat I = RMat::Identity(2, 2);
    const RMat j2 = diag_matrix(j_exponents(2));
    const Series yinv = y_inverse(j.y, v);
    const Series vv = v_series(j.y, yinv, v);
    JetRhs r;
    r.y = (j.u - 2.0 * (j.s * Series(I, o))) * j.y;
    r.u = -(j.u * j.u) + 2.0 * (j.s * j.u) + 4.0 * j.z - Series(2.0 * n * I, o) + vv;
    r.z = j.zp;
    r.zp = 2.0 * (r.u * j.z) + 2.0 * (j.u * j.zp) - 2.0 * (j.s * j.zp);
    if (form == CoupledForm::LaxConsistent) r.zp = r.zp + 2.0 * variant_c(v) * (j.z * j2 - j2 * j.z);
    return r;
}

// Picard iteration: every pass fixes one more Taylor coefficient
inline Jets state_jets(const PIVState& st, int order, CoupledForm form) {
    Jets j{Series::scalar(st.s), Series(st.y), Series(st.z), Series(st.zp), Series(st.u)};
    for (int k = 0; k < order; ++k) {
        j.s = Series::variable(st.s, k);
        const JetRhs r = rhs_series(j, st.variant, st.n, form);
        j.y = r.y.integrate(st.y);
        j.z = r.z.integrate(st.z);
        j.zp = r.zp.integrate(st.zp);
        j.u = r.u.integrate(st.u);
    }
    j.s = Series::variable(st.s, order);
    return j;
}

}  // namespace detail

inline RMat v_term(Variant v, const RMat& y) {
    const Series ys(y);
    return detail::v_series(ys, detail::y_inverse(ys, v), v).value();
}

inline PIVDerivative rhs(const PIVState& st, CoupledForm form = CoupledForm::LaxConsistent) {
    validate_state(st);
    detail::Jets j{Series::scalar(st.s), Series(st.y), Series(st.z), Series(st.zp), Series(st.u)};
    const auto r = detail::rhs_series(j, st.variant, st.n, form);
    return {r.y.value(), r.z.value(), r.zp.value(), r.u.value()};
}

struct Trajectory {
    std::vector<PIVState> states;
    double error_estimate = 0.0;
};

struct singularity_error : numerical_error {
    Trajectory partial;
    double s;
    singularity_error(Trajectory t, double at)
        : numerical_error(message(at)), partial(std::move(t)), s(at) {}
    static std::string message(double at) {
        std::ostringstream os;
        os.precision(17);
        os << "singularity encountered at s=" << at;
        return os.str();
    }
};

namespace detail {

inline PIVState axpy(const PIVState& st, double h, const PIVDerivative& d) {
    PIVState o = st;
    o.s += h;
    o.y += h * d.y;
    o.z += h * d.z;
    o.zp += h * d.zp;
    o.u += h * d.u;
    return o;
}

inline double state_size(const PIVState& st) {
    double m = 0.0;
    for (const RMat* p : {&st.y, &st.z, &st.zp, &st.u}) {
        if (!p->allFinite()) return INFINITY;
        m = std::max(m, max_abs<double>(*p));
    }
    return m;
}

inline PIVState rk4_step(const PIVState& st, double h, CoupledForm form) {
    const PIVDerivative k1 = rhs(st, form);
    const PIVDerivative k2 = rhs(axpy(st, 0.5 * h, k1), form);
    const PIVDerivative k3 = rhs(axpy(st, 0.5 * h, k2), form);
    const PIVDerivative k4 = rhs(axpy(st, h, k3), form);
    PIVState o = st;
    o.s += h;
    o.y += h / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    o.z += h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    o.zp += h / 6.0 * (k1.zp + 2.0 * k2.zp + 2.0 * k3.zp + k4.zp);
    o.u += h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    return o;
}

inline Trajectory march(const PIVState& st0, double s_end, double h, CoupledForm form) {
    const double span = s_end - st0.s;
    const long steps = std::lround(std::abs(span) / h);
    if (steps > 1000000) throw std::invalid_argument("too many steps");
    const double hh = steps ? span / steps : 0.0;
    Trajectory t;
    t.states.reserve(steps + 1);
    t.states.push_back(st0);
    PIVState cur = st0;
    for (long k = 0; k < steps; ++k) {
        PIVState next;
        try {
            next = rk4_step(cur, hh, form);
        } catch (const numerical_error&) {
            throw singularity_error(std::move(t), cur.s);
        }
        next.s = st0.s + (k + 1) * hh;
        if (state_size(next) > 1e8) throw singularity_error(std::move(t), next.s);
        t.states.push_back(next);
        cur = std::move(next);
    }
    return t;
}

}  // namespace detail

// classical RK4, fixed step; error estimate from a half-step rerun
inline Trajectory integrate(const PIVState& st0, double s_end, double h, CoupledForm form = CoupledForm::LaxConsistent) {
    validate_state(st0);
    if (!(h > 0.0)) throw std::invalid_argument("step must be positive");
    Trajectory t = detail::march(st0, s_end, h, form);
    const Trajectory half = detail::march(st0, s_end, 0.5 * h, form);
    const PIVState& a = t.states.back();
    const PIVState& b = half.states.back();
    double e = 0.0;
    e = std::max(e, max_abs<double>(RMat(a.y - b.y)));
    e = std::max(e, max_abs<double>(RMat(a.z - b.z)));
    e = std::max(e, max_abs<double>(RMat(a.zp - b.zp)));
    e = std::max(e, max_abs<double>(RMat(a.u - b.u)));
    t.error_estimate = e / 15.0;
    return t;
}

struct NcPivReport {
    RMat consistent;  // vanishes on solutions of the Lax-consistent system
    RMat uncorrected;  // same left-hand side without the commutator corrections
};

inline NcPivReport ncpiv_report(const PIVState& st, CoupledForm form = CoupledForm::LaxConsistent) {
    validate_state(st);
    const detail::Jets j = detail::state_jets(st, 4, form);
    const Variant v = st.variant;
    const RMat I = RMat::Identity(2, 2);
    const RMat j2 = diag_matrix(j_exponents(2));
    const Series& u = j.u;
    const Series& s = j.s;
    const Series vv = detail::v_series(j.y, detail::y_inverse(j.y, v), v);
    const Series u1 = u.derivative(), u2 = u1.derivative(), u3 = u2.derivative();
    const Series v1 = vv.derivative();
    const Series w = v1 - 2.0 * (u * vv);
    const Series w1 = w.derivative();
    const int n = st.n;
    const Series core = u3 + commutator(u2, u) - 4.0 * ((Series::scalar(n + 1.0, 4) + s * s) * u1) -
                        2.0 * (anticommutator(u1, u * u) + u * u1 * u) + 6.0 * (s * anticommutator(u1, u)) +
                        4.0 * (u * (u - s * Series(I, 4)));
    const Series extra = u1 + u * u - 2.0 * (s * u) - vv;
    NcPivReport r;
    const Series cons = core - w1 - 2.0 * (s * v1) - 2.0 * variant_c(v) * (extra * j2 - j2 * extra);
    const Series unc = core + w1 + 2.0 * (s * v1);
    r.consistent = cons.value();
    r.uncorrected = unc.value();
    return r;
}

inline RMat ncpiv_residual(const PIVState& st) { return ncpiv_report(st).consistent; }

// A(lambda) = lambda A1 + A0 + A_{-1}/lambda, U(lambda) = lambda U1 + U0, as real blocks
struct LaxBlocks {
    RMat a1, a0, am1, u1, u0;
};

namespace detail {

struct LaxSeries {
    Series a0, am1, u0;
    RMat a1, u1;
};

inline LaxSeries lax_series(const Jets& j, Variant v, int n) {
    const int p = variant_width(v);
    const int o = j.y.order();
    const RMat I2 = RMat::Identity(2, 2), Ip = RMat::Identity(p, p);
    const RMat j2 = diag_matrix(j_exponents(2)), jp = diag_matrix(j_exponents(p));
    const double c = variant_c(v);
    const Series yi = y_inverse(j.y, v);
    const int d = 2 + p;
    auto place = [&](Series& dst, int r0, int c0, const Series& blk) {
        for (int k = 0; k <= o; ++k) dst.c[k].block(r0, c0, blk.rows(), blk.cols()) = blk.c[k];
    };
    LaxSeries l;
    l.a1 = RMat::Zero(d, d);
    l.a1.topLeftCorner(2, 2) = I2;
    l.a1.bottomRightCorner(p, p) = -Ip;
    l.u1 = -l.a1;
    l.a0 = Series(RMat::Zero(d, d), o);
    l.am1 = Series(RMat::Zero(d, d), o);
    l.u0 = Series(RMat::Zero(d, d), o);
    place(l.a0, 0, 0, -1.0 * (j.s * Series(I2, o)));
    place(l.a0, 0, 2, j.y);
    place(l.a0, 2, 0, 2.0 * (yi * j.z));
    place(l.a0, 2, 2, j.s * Series(Ip, o));
    place(l.am1, 0, 0, Series(0.5 * n * I2 - c * j2, o) - j.z);
    place(l.am1, 0, 2, -0.5 * (j.u * j.y));
    place(l.am1, 2, 0, yi * j.zp - yi * j.u * j.z);
    place(l.am1, 2, 2, yi * j.z * j.y - Series(0.5 * n * Ip + jp, o));
    place(l.u0, 0, 2, -1.0 * j.y);
    place(l.u0, 2, 0, -2.0 * (yi * j.z));
    return l;
}

}  // namespace detail

inline LaxBlocks lax_blocks(const PIVState& st) {
    validate_state(st);
    const detail::Jets j = detail::state_jets(st, 0, CoupledForm::LaxConsistent);
    const auto l = detail::lax_series(j, st.variant, st.n);
    return {l.a1, l.a0.value(), l.am1.value(), l.u1, l.u0.value()};
}

struct LaxPair {
    LaxBlocks blocks;
    CMat a(cplx lambda) const {
        if (lambda == cplx(0.0)) throw std::invalid_argument("pole of A");
        return lambda * to_complex(blocks.a1) + to_complex(blocks.a0) + to_complex(blocks.am1) / lambda;
    }
    CMat u(cplx lambda) const { return lambda * to_complex(blocks.u1) + to_complex(blocks.u0); }
};

inline LaxPair lax_matrices(const PIVState& st) { return {lax_blocks(st)}; }

// d_s A - d_lambda U - [U, A]
inline CMat lax_compat_residual(const PIVState& st, cplx lambda, CoupledForm form = CoupledForm::LaxConsistent) {
    if (lambda == cplx(0.0)) throw std::invalid_argument("pole of A");
    validate_state(st);
    const detail::Jets j = detail::state_jets(st, 1, form);
    const auto l = detail::lax_series(j, st.variant, st.n);
    const CMat A = lambda * to_complex(l.a1) + to_complex(l.a0.value()) + to_complex(l.am1.value()) / lambda;
    const CMat U = lambda * to_complex(l.u1) + to_complex(l.u0.value());
    const CMat dA = to_complex(l.a0.deriv(1)) + to_complex(l.am1.deriv(1)) / lambda;
    const CMat dU = to_complex(l.u1);
    return dA - dU - (U * A - A * U);
}

// ---- symmetric formulation ----

struct SymState {
    double s = 0.0;
    RMat q, qp, r, rp;
    Variant variant = Variant::A;
    int n = 0;
};

struct SymDerivative {
    RMat q, qp, r, rp;
};

enum class SymForm { Derived, Uncorrected };

namespace detail {

struct SymJets {
    Series s, q, qp, r, rp;
};

inline void sym_j(Variant v, RMat& ja, RMat& jb) {
    const RMat j2 = diag_matrix(j_exponents(2));
    ja = v == Variant::A ? j2 : RMat(2.0 * j2);
    jb = v == Variant::A ? j2 : diag_matrix(j_exponents(3));
}

inline std::pair<Series, Series> sym_second(const SymJets& j, Variant v, int n, SymForm form) {
    RMat ja, jb;
    sym_j(v, ja, jb);
    const Series& q = j.q;
    const Series& r = j.r;
    Series qpp, rpp;
    if (form == SymForm::Derived) {
        qpp = -2.0 * (j.s * j.qp) + 2.0 * (q * r * q) - 2.0 * (1.0 + n) * q - 2.0 * (q * jb - ja * q);
        rpp = 2.0 * (j.s * j.rp) + 2.0 * (r * q * r) - 2.0 * (n - 1.0) * r + 2.0 * (r * ja - jb * r);
    } else {
        // uncorrected form, [q,J] read as q J_p - J_2 q for the rectangular case
        const RMat j2 = diag_matrix(j_exponents(2));
        const RMat jp = diag_matrix(j_exponents(variant_width(v)));
        const double cq = v == Variant::A ? 2.0 : 4.0;
        qpp = -2.0 * (j.s * j.qp) + 2.0 * (q * r * q) - 2.0 * (1.0 + 2.0 * n) * q - 2.0 * cq * (q * jp - j2 * q);
        rpp = 2.0 * (j.s * j.rp) + 2.0 * (r * q * r) - 2.0 * (2.0 * n - 1.0) * r - 4.0 * (r * j2 - jp * r);
    }
    return {qpp, rpp};
}

inline SymJets sym_jets(const SymState& st, int order, SymForm form) {
    SymJets j{Series::scalar(st.s), Series(st.q), Series(st.qp), Series(st.r), Series(st.rp)};
    for (int k = 0; k < order; ++k) {
        j.s = Series::variable(st.s, k);
        const auto [qpp, rpp] = sym_second(j, st.variant, st.n, form);
        const Series q = j.qp.integrate(st.q), r = j.rp.integrate(st.r);
        j.qp = qpp.integrate(st.qp);
        j.rp = rpp.integrate(st.rp);
        j.q = q;
        j.r = r;
    }
    j.s = Series::variable(st.s, order);
    return j;
}

}  // namespace detail

inline void validate_sym(const SymState& st) {
    const int p = variant_width(st.variant);
    if (st.q.rows() != 2 || st.q.cols() != p || st.qp.rows() != 2 || st.qp.cols() != p || st.r.rows() != p ||
        st.r.cols() != 2 || st.rp.rows() != p || st.rp.cols() != 2)
        throw std::invalid_argument("state shapes do not match the variant");
}

inline SymDerivative sym_rhs(const SymState& st, SymForm form = SymForm::Derived) {
    validate_sym(st);
    detail::SymJets j{Series::scalar(st.s), Series(st.q), Series(st.qp), Series(st.r), Series(st.rp)};
    const auto [qpp, rpp] = detail::sym_second(j, st.variant, st.n, form);
    return {st.qp, qpp.value(), st.rp, rpp.value()};
}

// compatibility residual of the symmetric Lax pair with rho_R' = -2qr, rho_L' = -2rq
inline CMat sym_compat_residual(const SymState& st, cplx lambda, SymForm form = SymForm::Derived) {
    if (lambda == cplx(0.0)) throw std::invalid_argument("pole of A");
    validate_sym(st);
    const int p = variant_width(st.variant);
    const int d = 2 + p;
    const auto j = detail::sym_jets(st, 1, form);
    RMat ja, jb;
    detail::sym_j(st.variant, ja, jb);
    const RMat I2 = RMat::Identity(2, 2), Ip = RMat::Identity(p, p);
    const int o = 1;
    Series a0(RMat::Zero(d, d), o), am1(RMat::Zero(d, d), o), u0(RMat::Zero(d, d), o);
    auto place = [&](Series& dst, int r0, int c0, const Series& blk) {
        for (int k = 0; k <= o; ++k) dst.c[k].block(r0, c0, blk.rows(), blk.cols()) = blk.c[k];
    };
    place(a0, 0, 0, -1.0 * (j.s * Series(I2, o)));
    place(a0, 2, 2, j.s * Series(Ip, o));
    place(a0, 0, 2, -1.0 * j.q);
    place(a0, 2, 0, -1.0 * j.r);
    place(am1, 0, 0, 0.25 * (-2.0 * (j.q * j.r) + Series(2.0 * st.n * I2 - 4.0 * ja, o)));
    place(am1, 0, 2, 0.25 * (4.0 * (j.s * j.q) + 2.0 * j.qp));
    place(am1, 2, 0, 0.25 * (4.0 * (j.s * j.r) - 2.0 * j.rp));
    place(am1, 2, 2, 0.25 * (2.0 * (j.r * j.q) - Series(2.0 * st.n * Ip + 4.0 * jb, o)));
    place(u0, 0, 2, j.q);
    place(u0, 2, 0, j.r);
    RMat a1 = RMat::Zero(d, d);
    a1.topLeftCorner(2, 2) = I2;
    a1.bottomRightCorner(p, p) = -Ip;
    const CMat A = lambda * to_complex(a1) + to_complex(a0.value()) + to_complex(am1.value()) / lambda;
    const CMat U = -lambda * to_complex(a1) + to_complex(u0.value());
    const CMat dA = to_complex(a0.deriv(1)) + to_complex(am1.deriv(1)) / lambda;
    return dA + to_complex(a1) - (U * A - A * U);
}

struct SymReport {
    double compat = 0.0;           // max over sample lambda
    double rho_c1 = 0.0;           // |d/ds rho_R + qr|
    double rho_c2 = 0.0;           // |d/ds rho_R + 2qr|
    double uncorrected_defect = 0.0;  // |q''_uncorrected - q''_derived| + |r''_uncorrected - r''_derived|
    double scalar_agreement = 0.0; // diagonal data only; NaN otherwise
};

inline SymReport sym_residuals(const SymState& st) {
    validate_sym(st);
    SymReport rep;
    for (cplx l : {cplx(1.0), cplx(-1.0), cplx(0.0, 2.0), cplx(0.0, -2.0), cplx(0.5)})
        rep.compat = std::max(rep.compat, max_abs<cplx>(sym_compat_residual(st, l)));
    const auto j = detail::sym_jets(st, 2, SymForm::Derived);
    const Series rho = 2.0 * (j.s * j.q * j.r) + j.qp * j.r - j.q * j.rp;
    const RMat drho = rho.deriv(1);
    const RMat qr = st.q * st.r;
    rep.rho_c1 = max_abs<double>(RMat(drho + qr));
    rep.rho_c2 = max_abs<double>(RMat(drho + 2.0 * qr));
    const SymDerivative dd = sym_rhs(st, SymForm::Derived), dp = sym_rhs(st, SymForm::Uncorrected);
    rep.uncorrected_defect = max_abs<double>(RMat(dd.qp - dp.qp)) + max_abs<double>(RMat(dd.rp - dp.rp));
    const bool diag = st.variant == Variant::A && st.q.isDiagonal(0.0) && st.r.isDiagonal(0.0) &&
                      st.qp.isDiagonal(0.0) && st.rp.isDiagonal(0.0);
    if (diag) {
        // each diagonal entry is a copy of the 1x1 system, which has J = 0
        double worst = 0.0;
        for (int i = 0; i < 2; ++i) {
            const double s = st.s, q = st.q(i, i), r = st.r(i, i);
            const double qpp = -2.0 * s * st.qp(i, i) + 2.0 * q * r * q - 2.0 * (1.0 + st.n) * q;
            const double rpp = 2.0 * s * st.rp(i, i) + 2.0 * r * q * r - 2.0 * (st.n - 1.0) * r;
            worst = std::max({worst, std::abs(dd.qp(i, i) - qpp), std::abs(dd.rp(i, i) - rpp)});
        }
        rep.scalar_agreement = worst;
    } else {
        rep.scalar_agreement = std::nan("");
    }
    return rep;
}

// ---- scalar PIV ----

inline double scalar_piv_rhs(double u, double up, double s, int n) {
    if (u == 0.0) throw numerical_error("PIV singular term");
    return up * up / (2.0 * u) + 1.5 * u * u * u - 4.0 * s * u * u + 2.0 * (s * s + 1.0 + n) * u - 2.0 * n * n / u;
}

// derivative of the PIV right-hand side along the flow
inline double scalar_piv_rhs_ds(double u, double up, double upp, double s, int n) {
    if (u == 0.0) throw numerical_error("PIV singular term");
    const double fs = -4.0 * u * u + 4.0 * s * u;
    const double fu = -up * up / (2.0 * u * u) + 4.5 * u * u - 8.0 * s * u + 2.0 * (s * s + 1.0 + n) + 2.0 * n * n / (u * u);
    const double fup = up / u;
    return fs + fu * up + fup * upp;
}

inline double scalar_piv_residual(double u, double up, double upp, double s, int n) {
    return upp - scalar_piv_rhs(u, up, s, n);
}

enum class DerivedReading { SUU, PlainUU };

// u''' - 4u' - 6u^2 u' + 12 s u u' - 4n u' + 4u^2 - 4su - 4 s^2 u'
inline double scalar_derived_residual(double u, double up, double upp, double uppp, double s, int n,
                                      DerivedReading reading = DerivedReading::SUU) {
    (void)upp;
    const double t12 = reading == DerivedReading::SUU ? 12.0 * s * u * up : 12.0 * up * u;
    return uppp - 4.0 * up - 6.0 * u * u * up + t12 - 4.0 * n * up + 4.0 * u * u - 4.0 * s * u - 4.0 * s * s * up;
}

struct ScalarPivPoint {
    double s, u, up;
};

inline std::vector<ScalarPivPoint> integrate_scalar_piv(double u0, double up0, double s0, double s1, double h, int n) {
    const long steps = std::lround(std::abs(s1 - s0) / h);
    const double hh = (s1 - s0) / steps;
    std::vector<ScalarPivPoint> out{{s0, u0, up0}};
    double u = u0, up = up0;
    for (long k = 0; k < steps; ++k) {
        const double s = s0 + k * hh;
        auto f = [n](double ss, double a, double b) { return std::pair{b, scalar_piv_rhs(a, b, ss, n)}; };
        const auto k1 = f(s, u, up);
        const auto k2 = f(s + 0.5 * hh, u + 0.5 * hh * k1.first, up + 0.5 * hh * k1.second);
        const auto k3 = f(s + 0.5 * hh, u + 0.5 * hh * k2.first, up + 0.5 * hh * k2.second);
        const auto k4 = f(s + hh, u + hh * k3.first, up + hh * k3.second);
        u += hh / 6.0 * (k1.first + 2.0 * k2.first + 2.0 * k3.first + k4.first);
        up += hh / 6.0 * (k1.second + 2.0 * k2.second + 2.0 * k3.second + k4.second);
        out.push_back({s0 + (k + 1) * hh, u, up});
    }
    return out;
}

// ---- test data ----

// u starts near shift*I: the diagonal of u obeys a Riccati-type law and a
// positive start pushes the first movable pole past s = 1
inline PIVState random_state(std::uint64_t seed, Variant v, int n = 1, double scale = 0.2, double shift = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    auto rnd = [&](int r, int c) {
        RMat m(r, c);
        for (int i = 0; i < r; ++i)
            for (int k = 0; k < c; ++k) m(i, k) = scale * d(rng);
        return m;
    };
    PIVState st;
    st.variant = v;
    st.n = n;
    st.s = 0.0;
    if (v == Variant::A) {
        st.y = RMat::Identity(2, 2) + rnd(2, 2);
    } else {
        // J3 must map ker y into itself; keep ker y = e3
        st.y = RMat::Zero(2, 3);
        st.y.leftCols(2) = RMat::Identity(2, 2) + rnd(2, 2);
    }
    st.z = rnd(2, 2);
    st.zp = rnd(2, 2);
    st.u = shift * RMat::Identity(2, 2) + rnd(2, 2);
    return st;
}

inline PIVState diagonal_state(std::uint64_t seed, int n = 1, double scale = 0.2, double shift = 2.0) {
    PIVState st = random_state(seed, Variant::A, n, scale, shift);
    for (RMat* m : {&st.y, &st.z, &st.zp, &st.u}) *m = RMat(m->diagonal().asDiagonal());
    return st;
}

}  // namespace ncpiv
