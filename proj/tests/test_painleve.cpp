#include <ncpiv/painleve.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace ncpiv;

namespace {

const cplx lambdas[] = {cplx(1.0), cplx(-1.0), cplx(0.0, 2.0), cplx(0.0, -2.0), cplx(0.5), cplx(1.3)};

PIVState zero_state() {
    PIVState st;
    st.y = RMat::Identity(2, 2);
    st.z = st.zp = st.u = RMat::Zero(2, 2);
    return st;
}

SymState random_sym(std::uint64_t seed, Variant v) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    const int p = variant_width(v);
    auto m = [&](int r, int c) { return RMat(RMat::NullaryExpr(r, c, [&] { return u(g); })); };
    SymState s;
    s.variant = v;
    s.n = 1;
    s.s = 0.2;
    s.q = m(2, p);
    s.qp = m(2, p);
    s.r = m(p, 2);
    s.rp = m(p, 2);
    return s;
}

}  // namespace

TEST(VTerm, DiagonalYGivesZero) {
    RMat y = RMat::Zero(2, 2);
    y.diagonal() << 1.7, -0.4;
    EXPECT_EQ(max_abs<double>(v_term(Variant::A, y)), 0.0);
}

TEST(VTerm, UpperTriangularY) {
    RMat y(2, 2);
    y << 1.0, 1.0, 0.0, 1.0;
    RMat c(2, 2);
    c << 0.0, 2.0, 0.0, 0.0;
    EXPECT_LE(max_abs<double>(RMat(v_term(Variant::A, y) - c * y.inverse())), 1e-15);
}

TEST(VTerm, SecondVariantBlockValue) {
    RMat y = RMat::Zero(2, 3);
    y.leftCols(2) = RMat::Identity(2, 2);
    RMat want = RMat::Zero(2, 2);
    want(1, 1) = -2.0;
    EXPECT_LE(max_abs<double>(RMat(v_term(Variant::B, y) - want)), 1e-15);
}

TEST(Rhs, ZeroDataIsStationaryAtOrigin) {
    const PIVDerivative d = rhs(zero_state());
    EXPECT_EQ(max_abs<double>(d.y), 0.0);
    EXPECT_EQ(max_abs<double>(d.z), 0.0);
    EXPECT_EQ(max_abs<double>(d.zp), 0.0);
    EXPECT_EQ(max_abs<double>(d.u), 0.0);
}

TEST(Rhs, ShapeValidation) {
    PIVState st = zero_state();
    st.variant = Variant::B;
    EXPECT_THROW(rhs(st), std::invalid_argument);
    st = zero_state();
    st.y = RMat::Zero(2, 2);
    EXPECT_THROW(rhs(st), numerical_error);
}

TEST(Integrate, FourthOrderConvergence) {
    const PIVState st = random_state(3, Variant::A);
    const auto end = [&](double h) { return integrate(st, 0.5, h).states.back().u; };
    const RMat a = end(0.02), b = end(0.01), c = end(0.005);
    const double ratio = max_abs<double>(RMat(a - b)) / max_abs<double>(RMat(b - c));
    EXPECT_GT(ratio, 12.0);
    EXPECT_LT(ratio, 20.0);
}

TEST(Integrate, DiagonalDataStaysDiagonal) {
    const Trajectory t = integrate(diagonal_state(5), 1.0, 1e-3);
    for (const auto& x : t.states)
        for (const RMat* m : {&x.y, &x.z, &x.zp, &x.u}) {
            EXPECT_LE(std::abs((*m)(0, 1)), 1e-12);
            EXPECT_LE(std::abs((*m)(1, 0)), 1e-12);
        }
}

TEST(Integrate, MovablePoleIsReported) {
    PIVState st = zero_state();
    st.u = -6.0 * RMat::Identity(2, 2);
    st.n = 1;
    try {
        integrate(st, 3.0, 1e-3);
        FAIL() << "expected a singularity";
    } catch (const singularity_error& e) {
        EXPECT_GT(e.s, 0.0);
        EXPECT_LT(e.s, 3.0);
        EXPECT_FALSE(e.partial.states.empty());
        EXPECT_EQ(std::string(e.what()).rfind("singularity encountered at s=", 0), 0u);
    }
}

TEST(NcPiv, DiagonalReducesToScalarDerivedEquation) {
    const Trajectory t = integrate(diagonal_state(9), 1.0, 1e-3);
    for (std::size_t k = 0; k < t.states.size(); k += 50) {
        const PIVState& x = t.states[k];
        const RMat r = ncpiv_residual(x);
        const auto j = detail::state_jets(x, 4, CoupledForm::LaxConsistent);
        for (int i = 0; i < 2; ++i) {
            const double sc = scalar_derived_residual(x.u(i, i), j.u.deriv(1)(i, i), j.u.deriv(2)(i, i), j.u.deriv(3)(i, i), x.s, x.n);
            EXPECT_NEAR(r(i, i), sc, 1e-8);
        }
        EXPECT_LE(std::abs(r(0, 1)) + std::abs(r(1, 0)), 1e-12);
    }
}

TEST(NcPiv, RandomTrajectoriesBothVariants) {
    for (Variant v : {Variant::A, Variant::B})
        for (std::uint64_t seed : {1u, 2u}) {
            const Trajectory t = integrate(random_state(seed, v), 1.0, 1e-3);
            for (std::size_t k = 0; k < t.states.size(); k += 100)
                EXPECT_LE(max_abs<double>(ncpiv_residual(t.states[k])), 1e-6);
        }
}

TEST(Lax, LeadingBlockIsTraceless) {
    const LaxPair lp = lax_matrices(random_state(4, Variant::A));
    EXPECT_EQ(lp.blocks.a1.trace(), 0.0);
    EXPECT_THROW(lp.a(cplx(0.0)), std::invalid_argument);
}

TEST(Lax, ZeroDataCompatibility) {
    for (cplx l : lambdas) EXPECT_LE(max_abs<cplx>(lax_compat_residual(zero_state(), l)), 1e-12);
}

TEST(Lax, RandomDataCompatibility) {
    const Trajectory ta = integrate(random_state(6, Variant::A), 1.0, 1e-3);
    const Trajectory tb = integrate(random_state(6, Variant::B), 1.0, 1e-3);
    for (std::size_t k = 0; k < ta.states.size(); k += 100) {
        EXPECT_LE(max_abs<cplx>(lax_compat_residual(ta.states[k], cplx(1.3))), 1e-8);
        EXPECT_LE(max_abs<cplx>(lax_compat_residual(tb.states[k], cplx(0.0, -2.0))), 1e-8);
    }
}

TEST(Lax, UncorrectedCouplingIsNotCompatible) {
    const PIVState st = random_state(6, Variant::A);
    EXPECT_GT(max_abs<cplx>(lax_compat_residual(st, cplx(1.3), CoupledForm::Uncorrected)), 1e-3);
}

TEST(Symmetric, CommutingDataIsCompatible) {
    SymState s;
    s.n = 2;
    s.s = 0.4;
    s.q = RMat::Zero(2, 2);
    s.q.diagonal() << 0.3, -0.2;
    s.qp = RMat::Zero(2, 2);
    s.qp.diagonal() << 0.1, 0.4;
    s.r = RMat::Zero(2, 2);
    s.r.diagonal() << 0.5, 0.2;
    s.rp = RMat::Zero(2, 2);
    s.rp.diagonal() << -0.3, 0.1;
    const SymReport r = sym_residuals(s);
    EXPECT_LE(r.compat, 1e-8);
    EXPECT_LE(r.scalar_agreement, 1e-12);
    EXPECT_LE(r.rho_c2, 1e-12);
}

TEST(Symmetric, ZeroDataIsFixedPoint) {
    for (Variant v : {Variant::A, Variant::B}) {
        SymState s = random_sym(1, v);
        s.q.setZero();
        s.qp.setZero();
        s.r.setZero();
        s.rp.setZero();
        const SymDerivative d = sym_rhs(s);
        EXPECT_EQ(max_abs<double>(d.qp), 0.0);
        EXPECT_EQ(max_abs<double>(d.rp), 0.0);
        const SymReport r = sym_residuals(s);
        EXPECT_LE(r.compat, 1e-15);
        EXPECT_EQ(r.rho_c1, 0.0);
        EXPECT_EQ(r.rho_c2, 0.0);
    }
}

TEST(Symmetric, RandomDataCompatibleBothVariants) {
    for (Variant v : {Variant::A, Variant::B})
        for (std::uint64_t seed : {3u, 4u}) {
            const SymReport r = sym_residuals(random_sym(seed, v));
            EXPECT_LE(r.compat, 1e-8);
            EXPECT_TRUE(std::isnan(r.scalar_agreement));
        }
}

TEST(ScalarPiv, DerivedResidualAlongSolution) {
    const auto pts = integrate_scalar_piv(1.0, 0.0, 0.0, 1.0, 1e-3, 1);
    ASSERT_EQ(pts.size(), 1001u);
    for (const auto& p : pts) {
        const double upp = scalar_piv_rhs(p.u, p.up, p.s, 1);
        const double uppp = scalar_piv_rhs_ds(p.u, p.up, upp, p.s, 1);
        EXPECT_LE(std::abs(scalar_derived_residual(p.u, p.up, upp, uppp, p.s, 1)), 1e-7);
    }
}

TEST(ScalarPiv, ConstantSolutionRoot) {
    // n = 0, u' = u'' = 0: PIV gives u(1.5u^2 - 4su + 2(s^2+1)) = 0 and the derived
    // equation gives 4u^2 - 4su = 0, so u = s and s^2 = 4
    const double s = 2.0;
    double u = 1.8;
    for (int it = 0; it < 50; ++it) {
        const double g = 1.5 * u * u - 4.0 * s * u + 2.0 * (s * s + 1.0);
        const double dg = 3.0 * u - 4.0 * s;
        u -= g / dg;
    }
    EXPECT_LE(std::abs(scalar_piv_residual(u, 0.0, 0.0, s, 0)), 1e-10);
    EXPECT_LE(std::abs(scalar_derived_residual(u, 0.0, 0.0, 0.0, s, 0)), 1e-10);
    EXPECT_THROW(scalar_piv_rhs(0.0, 1.0, 0.0, 1), numerical_error);
}
