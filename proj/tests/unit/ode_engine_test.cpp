#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <numbers>

#include "qspec/identities.hpp"
#include "qspec/integrator.hpp"
#include "qspec/laurent.hpp"
#include "support/fixtures.hpp"

namespace qspec {
namespace {

using std::numbers::pi;

ProblemDefinition zero_problem(OperatorClass cls, int n, int points = 201) {
    return build_problem(testing::zero_set(cls, n, points));
}

TEST(Fundamental, PolynomialAtZeroLambda) {
    // F is the shift matrix, so C(x, 0) = exp(F x) has entries x^{j-i}/(j-i)!
    const ProblemDefinition p = zero_problem(OperatorClass::RegularEven, 4);
    const FundamentalSolution C = integrate_fundamental(p, 0.0);
    for (int node : {50, 137, 200}) {
        const double x = p.grid.x(node);
        const CMat m = C.matrix(node);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                const double want = j >= i ? std::pow(x, j - i) / std::tgamma(j - i + 1) : 0.0;
                EXPECT_NEAR(std::abs(m(i, j) - want), 0.0, 1e-12) << i << "," << j << " x=" << x;
            }
    }
}

TEST(Fundamental, SecondOrderSine) {
    const ProblemDefinition p = zero_problem(OperatorClass::SchrodingerN2, 2, 401);
    for (double rho : {1.3, 7.0, 40.0}) {
        const FundamentalSolution C = integrate_fundamental(p, -rho * rho);
        for (int node : {100, 250, 400}) {
            const double x = p.grid.x(node);
            const CMat m = C.matrix(node);
            EXPECT_NEAR(std::abs(m(0, 1) - std::sin(rho * x) / rho), 0.0, 1e-10);
            EXPECT_NEAR(std::abs(m(0, 0) - std::cos(rho * x)), 0.0, 1e-10);
        }
    }
}

TEST(Fundamental, DeterminantStaysOne) {
    const ProblemDefinition p = build_problem(testing::n4_regular_fixture(201));
    for (cplx lambda : {cplx(3, 1), cplx(-500, 200), cplx(4000, -10)}) EXPECT_LT(determinant_drift(p, lambda), 1e-10);
}

TEST(CharacteristicMinor, SecondOrderZeroAtPiSquared) {
    const ProblemDefinition p = zero_problem(OperatorClass::SchrodingerN2, 2, 401);
    for (int l = 1; l <= 4; ++l) {
        const double at_root = std::abs(char_minor(p, -std::pow(pi * l, 2), 1, 1).value());
        const double away = std::abs(char_minor(p, -std::pow(pi * (l + 0.5), 2), 1, 1).value());
        EXPECT_LT(at_root, 1e-9 * away) << "l=" << l;
    }
}

TEST(CharacteristicMinor, FullDeterminantIsLastForm) {
    // Delta_{n-1,n-1} = U_{n,1}(C_n) with C_n the last fundamental column
    const ProblemDefinition p = build_problem(testing::n3_fixture(201));
    for (cplx lambda : {cplx(2, 1), cplx(-40, 30)}) {
        const FundamentalSolution C = integrate_fundamental(p, lambda);
        const CVec last = C.matrix(p.grid.points - 1).col(2);
        const cplx direct = apply_boundary_form(p.boundary, 3, 1, last);
        const cplx minor = char_minor(p, lambda, 2, 2).value();
        EXPECT_LE(std::abs(direct - minor), 1e-10 * std::abs(direct));
    }
}

TEST(WeylMatrix, UnitLowerTriangular) {
    const ProblemDefinition p = build_problem(testing::n4_distributional_fixture(201));
    for (cplx lambda : {cplx(5, 2), cplx(-300, 90)}) {
        const CMat M = weyl_matrix(p, lambda);
        for (int k = 0; k < 4; ++k) {
            EXPECT_NEAR(std::abs(M(k, k) - 1.0), 0.0, 1e-12);
            for (int j = k + 1; j < 4; ++j) EXPECT_EQ(M(k, j), cplx(0.0));
        }
    }
}

TEST(WeylMatrix, DualityWithStarProblem) {
    const ProblemDefinition p = build_problem(testing::n3_fixture(201));
    for (cplx lambda : {cplx(10, 5), cplx(-300, 400), cplx(900, -100)}) {
        EXPECT_LT(weyl_duality_defect(p, lambda), 1e-9);
        const std::array<int, 3> nodes = {0, 100, 200};
        EXPECT_LT(solution_duality_defect(p, lambda, nodes), 1e-9);
    }
}

TEST(WeylSolution, BoundaryConditions) {
    const ProblemDefinition p = build_problem(testing::n4_regular_fixture(201));
    const int n = 4;
    const cplx lambda(37, -12);
    const std::vector<SolutionField> phi = weyl_solutions(p, lambda);
    ASSERT_EQ(static_cast<int>(phi.size()), n);
    for (int k = 1; k <= n; ++k) {
        const CVec left = phi[k - 1].vec(0), right = phi[k - 1].vec(p.grid.points - 1);
        double scale = 1.0;
        for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(left(i)));
        for (int s = 1; s <= k; ++s)
            EXPECT_NEAR(std::abs(apply_boundary_form(p.boundary, s, 0, left) - (s == k ? 1.0 : 0.0)), 0.0,
                        1e-10 * scale);
        for (int s = k + 1; s <= n; ++s)
            EXPECT_NEAR(std::abs(apply_boundary_form(p.boundary, s, 1, right)), 0.0, 1e-10 * scale);
    }
}

TEST(WeylSolution, BracketDerivative) {
    const ProblemDefinition p = build_problem(testing::n3_fixture(401));
    EXPECT_LT(bracket_derivative_defect(p, cplx(10, 5), cplx(-7, 3)), 1e-6);
    EXPECT_LT(kernel_derivative_defect(p, cplx(10, 5), cplx(-7, 3)), 1e-6);
    EXPECT_LT(bracket_derivative_defect(p, cplx(200, 50), cplx(-70, 30)), 1e-5);
    EXPECT_LT(kernel_derivative_defect(p, cplx(200, 50), cplx(-70, 30)), 1e-5);
}

TEST(Laurent, SimplePoleAndZero) {
    const cplx z0(3.0, -1.0);
    auto pole = [&](cplx z) { return 1.0 / (z - z0); };
    EXPECT_NEAR(std::abs(laurent_coefficient(pole, z0, 0.2, -1, 32) - 1.0), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(laurent_coefficient(pole, z0, 0.2, 0, 32)), 0.0, 1e-14);
    auto square = [&](cplx z) { return (z - z0) * (z - z0); };
    EXPECT_NEAR(std::abs(laurent_coefficient(square, z0, 0.2, 2, 32) - 1.0), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(laurent_coefficient(square, z0, 0.2, 1, 32)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(laurent_coefficient(square, z0, 0.2, -1, 32)), 0.0, 1e-14);
}

TEST(Laurent, ScaledSamplesShareScale) {
    std::vector<Scaled> s;
    for (cplx z : circle_nodes(0.0, 0.5, 16)) s.push_back({1.0 / z, 700.0});
    const Scaled a = laurent_from_samples(s, 0.5, -1);
    EXPECT_DOUBLE_EQ(a.log_scale, 700.0);
    EXPECT_NEAR(std::abs(a.mantissa - 1.0), 0.0, 1e-14);
}

// C(x, lambda) is entire in lambda: its circle mean is the centre value.
TEST(Fundamental, EntireInLambda) {
    const ProblemDefinition p = build_problem(testing::n3_fixture(201));
    const cplx c(-20, 15);
    const int node = 150;
    const CMat centre = integrate_fundamental(p, c).matrix(node);
    auto f = [&](cplx z) { return integrate_fundamental(p, z).matrix(node); };
    const CMat mean = laurent_coefficient(f, c, 4.0, 0, 24);
    EXPECT_LT((mean - centre).cwiseAbs().maxCoeff(), 1e-10 * centre.cwiseAbs().maxCoeff());
}

TEST(Fundamental, FourthOrderGridConvergence) {
    auto value = [](int points) {
        const ProblemDefinition p = build_problem(testing::n3_fixture(points));
        return char_minor(p, cplx(150, 40), 1, 1).value();
    };
    const cplx ref = value(1601);
    const double e1 = std::abs(value(51) - ref), e2 = std::abs(value(101) - ref);
    EXPECT_GT(std::log2(e1 / e2), 3.5);
}

TEST(Propagators, DerivativeMatchesDifference) {
    // |lambda| < 1 keeps the balancing factor at 1 on both sides
    const ProblemDefinition p = build_problem(testing::n3_fixture(101));
    const cplx lambda(0.5, 0.3), h(1e-5, 0);
    const PropagatorSet a = build_propagators(p, lambda, true);
    const PropagatorSet plus = build_propagators(p, lambda + h);
    const PropagatorSet minus = build_propagators(p, lambda - h);
    ASSERT_EQ(a.dP.size(), a.P.size());
    ASSERT_EQ(a.s, 1.0);
    ASSERT_EQ(plus.s, 1.0);
    for (int i : {0, 40, 99}) {
        const CMat fd = (plus.P[i] - minus.P[i]) / (2.0 * h);
        EXPECT_LT((fd - a.dP[i]).cwiseAbs().maxCoeff(), 1e-8);
    }
}

}  // namespace
}  // namespace qspec
