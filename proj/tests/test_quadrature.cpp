#include <ncpiv/mop.hpp>
#include <ncpiv/quadrature.hpp>

#include <gtest/gtest.h>

#include <numbers>

using namespace ncpiv;

namespace {

const double sqrt_pi = std::sqrt(std::numbers::pi);

// orthonormal Hermite polynomials for e^{-x^2}
std::vector<double> hermite_orthonormal(double x, int count) {
    std::vector<double> p(count);
    p[0] = std::pow(std::numbers::pi, -0.25);
    if (count > 1) p[1] = std::sqrt(2.0) * x * p[0];
    for (int k = 1; k + 1 < count; ++k)
        p[k + 1] = std::sqrt(2.0 / (k + 1)) * x * p[k] - std::sqrt(double(k) / (k + 1)) * p[k - 1];
    return p;
}

}  // namespace

TEST(GaussHermite, GaussianIntegralAndSecondMoment) {
    const QuadRule r = gauss_hermite(50);
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        m0 += r.w(k);
        m2 += r.w(k) * r.x(k) * r.x(k);
    }
    EXPECT_NEAR(m0, sqrt_pi, 1e-13);
    EXPECT_NEAR(m2, sqrt_pi / 2.0, 1e-13);
}

TEST(GaussHermite, OrthogonalityOfHermitePolynomials) {
    const QuadRule r = gauss_hermite(100);
    double s79 = 0.0, s99 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const auto p = hermite_orthonormal(r.x(k), 10);
        s79 += r.w(k) * p[7] * p[9];
        s99 += r.w(k) * p[9] * p[9];
    }
    EXPECT_NEAR(s79, 0.0, 1e-12);
    EXPECT_NEAR(s99, 1.0, 1e-12);
}

TEST(GaussHermite, SymmetricNodesAndLargeRule) {
    const QuadRule r = gauss_hermite(200);
    ASSERT_EQ(r.size(), 200u);
    for (std::size_t k = 0; k < r.size(); ++k) {
        EXPECT_EQ(r.x(k), -r.x(r.size() - 1 - k));
        EXPECT_GE(r.w(k), 0.0);
    }
    double m0 = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) m0 += r.w(k);
    EXPECT_NEAR(m0, sqrt_pi, 1e-13);
}

TEST(GaussHermite, UnweightedRuleCarriesNoGaussian) {
    const QuadRule r = gauss_hermite_unweighted(120);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += r.w(k) * std::exp(-r.x(k) * r.x(k)) * r.x(k) * r.x(k);
    EXPECT_NEAR(acc, sqrt_pi / 2.0, 1e-13);
    EXPECT_THROW(gauss_hermite(0), std::invalid_argument);
}

TEST(GaussLegendre, PolynomialExactness) {
    const QuadRule r = gauss_legendre(10, -1.0, 2.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < r.size(); ++k) acc += r.w(k) * std::pow(r.x(k), 19);
    EXPECT_NEAR(acc, (std::pow(2.0, 20) - 1.0) / 20.0, 1e-9);
}

TEST(CircleRule, WindingAndLaurentOrthogonality) {
    const QuadRule c = circle_rule(1.0, 64);
    const cplx twopii(0.0, 2.0 * std::numbers::pi);
    cplx wind = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        EXPECT_NEAR(std::abs(c.nodes[k]), 1.0, 1e-15);
        wind += c.weights[k] / c.nodes[k];
    }
    EXPECT_LE(std::abs(wind / twopii - 1.0), 1e-13);
    for (int p : {-5, -3, -2, 0, 1, 2, 6}) {
        cplx acc = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) acc += c.weights[k] * ipow(c.nodes[k], p);
        EXPECT_LE(std::abs(acc), 1e-13) << p;
    }
}

TEST(CircleRule, ScaledRadius) {
    const QuadRule c = circle_rule(0.5, 40);
    cplx acc = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) acc += c.weights[k] * std::exp(c.nodes[k]) / ipow(c.nodes[k], 3);
    EXPECT_LE(std::abs(acc - cplx(0.0, std::numbers::pi)), 1e-13);  // 2 pi i / 2!
    EXPECT_THROW(circle_rule(0.0, 10), std::invalid_argument);
}

TEST(VLineRule, ShiftedGaussian) {
    const ContourSettings cs;
    const QuadRule l = cs.line();
    cplx acc = 0.0;
    for (std::size_t k = 0; k < l.size(); ++k) {
        const cplx w = l.nodes[k];
        EXPECT_EQ(w.real(), 2.0);
        EXPECT_LE(std::abs(w.imag()), cs.line_trunc + 1e-12);
        EXPECT_NEAR(w.imag(), -l.nodes[l.size() - 1 - k].imag(), 1e-12);
        acc += l.weights[k] * std::exp(w * w - 2.0 * w);
    }
    // w^2 - 2w = (w-1)^2 - 1 and the vertical line integral of e^{t^2} is i sqrt(pi)
    const cplx want(0.0, sqrt_pi * std::exp(-1.0));
    EXPECT_LE(std::abs(acc - want), 1e-13);
}

TEST(ContourSettings, DefaultsAndOrdering) {
    const ContourSettings cs;
    EXPECT_EQ(cs.radius, 1.0);
    EXPECT_EQ(cs.line_re, 2.0);
    EXPECT_EQ(cs.circle_nodes, 256);
    EXPECT_EQ(cs.line_nodes, 400);
    EXPECT_NEAR(cs.line_trunc, std::sqrt(44.0), 1e-15);
    EXPECT_NO_THROW(cs.validate());
    try {
        check_contour_ordering(3.0, 2.0);
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_STREQ(e.what(), "contours intersect ordering");
    }
}

TEST(TailIntegral, GaussianHalfAndEmptyTail) {
    auto f = [](double x) { return RMat::Constant(1, 1, std::exp(-x * x) / sqrt_pi); };
    EXPECT_NEAR(tail_integral(f, 0.0)(0, 0), 0.5, 1e-14);
    EXPECT_NEAR(tail_integral(f, 1.0)(0, 0), 0.5 * std::erfc(1.0), 1e-15);
    EXPECT_NEAR(tail_integral(f, -1.3)(0, 0), 0.5 * std::erfc(-1.3), 1e-14);
    EXPECT_NEAR(tail_integral(f, 30.0)(0, 0), 0.0, 1e-300);
}

TEST(TailIntegral, MatrixIntegrandAgainstRiemannSum) {
    const MOPFamily f = build_family(WeightFamily::example_a(1.0), 3);
    auto g = [&](double x) {
        const RMat p = phi(f, 1, x);
        return RMat(p * p.transpose());
    };
    const RMat t = tail_integral(g, 0.5);
    const int m = 1000000;
    const double a = 0.5, b = 12.0, h = (b - a) / m;
    RMat acc = RMat::Zero(2, 2);
    for (int i = 0; i < m; ++i) acc += g(a + (i + 0.5) * h);
    acc *= h;
    EXPECT_LE(max_abs<double>(RMat(t - acc)), 1e-8);
}

TEST(TailIntegral, DivergentIntegrandIsReported) {
    auto f = [](double x) { return RMat::Constant(1, 1, std::exp(0.1 * x)); };
    EXPECT_THROW(tail_integral(f, 1.0), numerical_error);
}

TEST(PairwiseSum, OrderIndependentOfProducer) {
    std::vector<double> v(1000);
    for (int i = 0; i < 1000; ++i) v[i] = 1.0 / (i + 1.0);
    EXPECT_EQ(pairwise_sum(v), pairwise_sum(std::vector<double>(v)));
    EXPECT_THROW(pairwise_sum(std::vector<double>{}), std::invalid_argument);
}
