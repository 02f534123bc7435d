#include <ncpiv/matrix.hpp>
#include <ncpiv/mop.hpp>

#include <gtest/gtest.h>
#include <unsupported/Eigen/MatrixFunctions>

#include <random>

using namespace ncpiv;

namespace {

RMat random_matrix(int r, int c, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return RMat::NullaryExpr(r, c, [&] { return u(g); });
}

}  // namespace

TEST(NilpotentExp, ZeroMatrixGivesIdentity) {
    const RMat e = nilpotent_exp<double>(RMat::Zero(2, 2), 3.7);
    EXPECT_EQ(e, RMat::Identity(2, 2));
}

TEST(NilpotentExp, ShiftMatrixIsLinearInX) {
    const double nu = 1.3, x = -0.8;
    const RMat e = nilpotent_exp<double>(shift_matrix(2, nu), x);
    RMat want = RMat::Identity(2, 2);
    want(0, 1) = nu * x;
    EXPECT_LE(max_abs<double>(RMat(e - want)), 1e-15);
}

TEST(NilpotentExp, MatchesGeneralExponential) {
    RMat a = random_matrix(3, 3, 11).triangularView<Eigen::StrictlyUpper>();
    const RMat oracle = (0.7 * a).exp();
    EXPECT_LE(max_abs<double>(RMat(nilpotent_exp<double>(a, 0.7) - oracle)), 1e-13);
}

TEST(NilpotentExp, InverseIsNegatedArgument) {
    for (std::uint64_t seed = 1; seed < 6; ++seed) {
        RMat a = random_matrix(4, 4, seed).triangularView<Eigen::StrictlyUpper>();
        for (double x : {-2.0, 0.3, 1.9}) {
            const RMat p = nilpotent_exp<double>(a, x) * nilpotent_exp<double>(a, -x);
            EXPECT_LE(max_abs<double>(RMat(p - RMat::Identity(4, 4))), 1e-12);
        }
    }
}

TEST(NilpotentExp, RejectsNonNilpotent) {
    EXPECT_THROW(nilpotent_exp<double>(RMat::Identity(2, 2), 1.0), numerical_error);
    EXPECT_THROW(nilpotent_exp<double>(RMat::Zero(2, 3), 1.0), std::invalid_argument);
}

TEST(NilpotentPower, BinomialSeriesTerminates) {
    const RMat a = shift_matrix(3, 0.6);
    const RMat half = nilpotent_power<double>(a, 0.5);
    const RMat sq = half * half;
    EXPECT_LE(max_abs<double>(RMat(sq - (RMat::Identity(3, 3) + a))), 1e-15);
    const RMat inv = nilpotent_power<double>(a, -1.0);
    EXPECT_LE(max_abs<double>(RMat(inv * (RMat::Identity(3, 3) + a) - RMat::Identity(3, 3))), 1e-15);
}

TEST(JExponents, NonIncreasingAndScaled) {
    EXPECT_EQ(j_exponents(3), (IntDiag{2, 1, 0}));
    EXPECT_EQ(j_exponents(2, 2), (IntDiag{2, 0}));
}

TEST(PowerConjugate, ZeroExponentsLeaveMatrixUnchanged) {
    const CMat m = to_complex(random_matrix(3, 3, 2));
    EXPECT_LE(max_abs<cplx>(CMat(power_conjugate(IntDiag{0, 0, 0}, m, cplx(0.3, 1.2)) - m)), 0.0);
}

// z^D M z^{-D} with D = diag(1, 0): entry (0,1) picks up z, entry (1,0) picks up 1/z
TEST(PowerConjugate, ScalesOffDiagonalEntries) {
    const FamilyConstants k = family_constants(WeightFamily::example_a(1.0), 0);
    const CMat b = to_complex(k.b);
    const CMat r = power_conjugate(j_exponents(2), b, cplx(2.0));
    EXPECT_EQ(r(0, 0), b(0, 0));
    EXPECT_EQ(r(1, 1), b(1, 1));
    EXPECT_EQ(r(0, 1), 2.0 * b(0, 1));
    EXPECT_EQ(r(1, 0), 0.5 * b(1, 0));
}

TEST(PowerConjugate, ReciprocalArgumentInverts) {
    std::mt19937_64 g(5);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int t = 0; t < 10; ++t) {
        const CMat m = to_complex(random_matrix(3, 3, 100 + t));
        const cplx z(u(g), u(g));
        const IntDiag d = j_exponents(3, 2);
        const CMat back = power_conjugate(d, power_conjugate(d, m, z), 1.0 / z);
        EXPECT_LE(max_abs<cplx>(CMat(back - m)), 1e-12);
    }
}

TEST(PowerConjugate, RectangularAndShapeChecks) {
    const CMat m = to_complex(random_matrix(2, 3, 8));
    const CMat r = power_conjugate(j_exponents(2, 2), m, j_exponents(3), cplx(0.0, 1.5));
    EXPECT_EQ(r.rows(), 2);
    EXPECT_EQ(r.cols(), 3);
    EXPECT_THROW(power_conjugate(j_exponents(2), m, cplx(1.0)), std::invalid_argument);
}

TEST(Ipow, RepeatedSquaringAndPole) {
    const cplx z(0.6, -0.8);
    EXPECT_LE(std::abs(ipow(z, 7) - std::pow(z, 7)), 1e-14);
    EXPECT_LE(std::abs(ipow(z, -5) * ipow(z, 5) - 1.0), 1e-14);
    EXPECT_THROW(ipow(cplx(0.0), -1), numerical_error);
    EXPECT_EQ(ipow(cplx(0.0), 0), cplx(1.0));
}

TEST(RightInverse, SquareCaseIsInverse) {
    const RMat m = random_matrix(3, 3, 4) + 3.0 * RMat::Identity(3, 3);
    EXPECT_LE(max_abs<double>(RMat(right_inverse<double>(m) - m.inverse())), 1e-13);
}

TEST(RightInverse, SecondFamilyPairMultipliesToIdentity) {
    for (int n : {0, 1, 3, 7}) {
        const FamilyConstants k = family_constants(WeightFamily::example_b(0.7), n);
        EXPECT_LE(max_abs<double>(RMat(k.b * k.b_hat - RMat::Identity(2, 2))), 1e-14) << n;
    }
}

TEST(RightInverse, RandomWideMatrix) {
    const RMat m = random_matrix(2, 3, 9);
    EXPECT_LE(max_abs<double>(RMat(m * right_inverse<double>(m) - RMat::Identity(2, 2))), 1e-10);
}

TEST(RightInverse, Failures) {
    RMat m = RMat::Zero(2, 3);
    m(0, 0) = 1.0;
    m(1, 0) = 2.0;
    EXPECT_THROW(right_inverse<double>(m), numerical_error);
    EXPECT_THROW(right_inverse<double>(RMat::Zero(3, 2)), std::invalid_argument);
}

TEST(Commutator, ShiftAgainstJ) {
    const RMat a = shift_matrix(2, 0.9);
    const RMat j = diag_matrix(j_exponents(2));
    EXPECT_LE(max_abs<double>(RMat(commutator<double>(a, j) + a)), 0.0);
}

TEST(Commutator, SelfAndIdentity) {
    const RMat x = random_matrix(3, 3, 21);
    EXPECT_LE(max_abs<double>(commutator<double>(x, x)), 1e-15);
    EXPECT_LE(max_abs<double>(RMat(anticommutator<double>(RMat::Identity(3, 3), x) - 2.0 * x)), 1e-15);
    EXPECT_THROW(commutator<double>(x, RMat::Zero(2, 2)), std::invalid_argument);
}

TEST(SpdSqrt, SquaresBack) {
    RMat m = random_matrix(3, 3, 30);
    m = m * m.transpose() + RMat::Identity(3, 3);
    const RMat r = spd_sqrt(m);
    EXPECT_LE(max_abs<double>(RMat(r * r - m)), 1e-13);
    EXPECT_LE(max_abs<double>(RMat(spd_inv_sqrt(m) * r - RMat::Identity(3, 3))), 1e-13);
    EXPECT_THROW(spd_sqrt(-RMat::Identity(2, 2)), numerical_error);
}
