#include <gtest/gtest.h>

#include <cmath>

#include "qspec/pipeline.hpp"
#include "qspec/reconstruction.hpp"
#include "support/fixtures.hpp"

namespace qspec {
namespace {

double sup_abs(const std::vector<cplx>& f) {
    double m = 0;
    for (cplx z : f) m = std::max(m, std::abs(z));
    return m;
}

TEST(StepCoefficients, IdentitiesVanishForEvenOrders) {
    for (int n = 2; n <= 8; n += 2)
        for (int s = 1; s <= n - 1; ++s) {
            EXPECT_EQ(regularity_identity(n, s), 0) << "n=" << n << " s=" << s;
            EXPECT_EQ(alternating_identity(n, s), 0) << "n=" << n << " s=" << s;
            EXPECT_EQ(step_coefficients_b(n, s).back(), 0) << "n=" << n << " s=" << s;
        }
}

TEST(StepCoefficients, KnownRows) {
    EXPECT_EQ(step_coefficients_a(4, 1), (std::vector<long long>{4, 4}));
    EXPECT_EQ(step_coefficients_a(4, 2), (std::vector<long long>{6, 8, 2}));
    EXPECT_EQ(step_coefficients_b(4, 2), (std::vector<long long>{6, 2, 0}));
    EXPECT_EQ(step_coefficients_a(6, 1), (std::vector<long long>{6, 6}));
    EXPECT_EQ(step_coefficients_b(2, 1), (std::vector<long long>{2, 0}));
}

TEST(StepCoefficients, OddOrderIdentityFails) {
    // the cancellation is special to even n
    EXPECT_NE(regularity_identity(3, 1), 0);
}

TEST(PFromTau, FourthOrderSingleCoefficient) {
    CoefficientSet c = testing::zero_set(OperatorClass::RegularEven, 4, 201);
    assign_coefficient(c, "tau2", sample_expression({"poly:0,0,1"}, c.grid));
    const auto p = p_from_tau(c);
    for (int i = 0; i < 201; ++i) {
        const double x = c.grid.x(i);
        EXPECT_NEAR(p[2][i], x * x, 1e-12);
        EXPECT_NEAR(p[1][i], 2 * x, 1e-9);
        EXPECT_NEAR(p[0][i], 0.0, 1e-9);
    }
}

TEST(PFromTau, SixthOrderPolynomialAction) {
    // tau4 = x, tau3 = x^2, tau2 = 1 + x, tau1 = x, tau0 = 2 acting on y = x^5
    CoefficientSet c = testing::zero_set(OperatorClass::RegularEven, 6, 201);
    assign_coefficient(c, "tau4", sample_expression({"poly:0,1"}, c.grid));
    assign_coefficient(c, "tau3", sample_expression({"poly:0,0,1"}, c.grid));
    assign_coefficient(c, "tau2", sample_expression({"poly:1,1"}, c.grid));
    assign_coefficient(c, "tau1", sample_expression({"poly:0,1"}, c.grid));
    assign_coefficient(c, "tau0", sample_expression({"const:2"}, c.grid));
    const auto p = p_from_tau(c);
    for (int i = 10; i <= 190; i += 20) {
        const double x = c.grid.x(i);
        const double dy[6] = {std::pow(x, 5), 5 * std::pow(x, 4), 20 * std::pow(x, 3), 60 * x * x, 120 * x, 120};
        double l6 = 0;  // y^{(6)} = 0
        for (int s = 0; s <= 4; ++s) l6 += p[s][i] * dy[s];
        const double want = 13 * std::pow(x, 5) + 275 * std::pow(x, 4) + 20 * std::pow(x, 3) + 240 * x * x;
        EXPECT_NEAR(l6, want, 1e-7 * (1 + std::abs(want))) << "x=" << x;
    }
}

struct ThirdOrderRun {
    InverseProblem ip;
    RecoveredPhi rec;
    SeriesFactors f;
};

ThirdOrderRun third_order_run(const CoefficientSet& truth, int L) {
    const ProblemDefinition p = build_problem(truth);
    const SpectralData d = assemble_spectral_data(p, L);
    const ProblemDefinition m = build_problem(first_step_model(d));
    const SpectralData md = assemble_spectral_data(m, L);
    InverseOptions o;
    o.truncation = L;
    ThirdOrderRun r{prepare_inverse(m, d, md, o), {}, {}};
    r.rec = recover_phi(r.ip, 1);
    r.f = series_factors(r.ip, r.rec, m.F, 1, 1);
    return r;
}

TEST(Series, ThirdOrderT00VanishesAtLeftEnd) {
    const ThirdOrderRun r = third_order_run(testing::n3_fixture(201), 8);
    const SeriesValue T00 = series_T(r.f, 0, 0);
    EXPECT_LT(std::abs(T00.values.front()), 1e-10 * (1 + sup_abs(T00.values)));
    ASSERT_EQ(static_cast<int>(T00.level_sup.size()), 8);
    EXPECT_EQ(T00.tail, T00.level_sup.back());
}

TEST(Series, ThirdOrderMeanOfTau1IsPreserved) {
    CoefficientSet c = testing::n3_fixture(201);
    assign_coefficient(c, "tau1", sample_expression({"const:0.3", "cos:0.4:2"}, c.grid));
    const ThirdOrderRun r = third_order_run(c, 10);
    const N3Result out = reconstruct_n3(r.f, r.ip.model.coefficients->values.at("tau1"));
    EXPECT_NEAR(integrate(out.tau1), 0.3, 1e-3);
    EXPECT_NEAR(integrate(out.sigma0), 0.0, 1e-12);
    for (const SeriesReport& s : out.series) EXPECT_LT(s.max_imag, 1e-8) << s.name;
}

// Shared setup for the fourth-order regular class with a zero step-1 model.
struct FourthOrderRun {
    CoefficientSet truth;
    SpectralData data;
};

const FourthOrderRun& fourth_order_run() {
    static const FourthOrderRun run = [] {
        FourthOrderRun r;
        r.truth = testing::zero_set(OperatorClass::RegularEven, 4, 201);
        assign_coefficient(r.truth, "tau2", sample_expression({"cos:0.4:2"}, r.truth.grid));
        assign_coefficient(r.truth, "tau1", sample_expression({"sin:0.3:2"}, r.truth.grid));
        assign_coefficient(r.truth, "tau0", sample_expression({"cos:0.3:1"}, r.truth.grid));
        r.data = assemble_spectral_data(build_problem(r.truth), 8);
        return r;
    }();
    return run;
}

TEST(Series, GeneralFormulaMatchesFirstStep) {
    const FourthOrderRun& run = fourth_order_run();
    const ProblemDefinition m = build_problem(first_step_model(run.data));
    for (const auto& [name, v] : m.coefficients->values)
        for (double x : v) ASSERT_LT(std::abs(x), 1e-15) << name;
    const SpectralData md = assemble_spectral_data(m, 8);
    InverseOptions o;
    o.truncation = 8;
    const InverseProblem ip = prepare_inverse(m, run.data, md, o);
    const RecoveredPhi rec = recover_phi(ip, 3);
    const auto p = p_from_series(series_factors_ordinary(ip, rec, 3));
    const StepResult step = reconstruct_even_step(1, series_factors(ip, rec, m.F, 1, 1), std::vector<double>(201, 0.0));
    double diff = 0, scale = 0;
    for (int i = 0; i < 201; ++i) {
        diff = std::max(diff, std::abs(p[2][i] - step.values[i]));
        scale = std::max(scale, std::abs(step.values[i]));
    }
    EXPECT_LT(diff, 1e-8 * scale);
}

TEST(Series, FourthOrderSecondStepT00Vanishes) {
    // with tau2 known the model shares the top coefficient, and T00 drops out
    // (up to the grid error of the quasi-derivatives)
    const FourthOrderRun& run = fourth_order_run();
    CoefficientSet known = testing::zero_set(OperatorClass::RegularEven, 4, 201);
    assign_coefficient(known, "tau2", run.truth["tau2"]);
    const ProblemDefinition m = build_problem(step_model(known, 2, 0.0));
    const SpectralData md = assemble_spectral_data(m, 8);
    InverseOptions o;
    o.truncation = 8;
    const InverseProblem ip = prepare_inverse(m, run.data, md, o);
    const RecoveredPhi rec = recover_phi(ip, 2);
    const SeriesFactors f = series_factors(ip, rec, build_problem(known).F, 2, 2);
    const SeriesValue T00 = series_T(f, 0, 0), T11 = series_T(f, 1, 1);
    EXPECT_LT(sup_abs(T00.values), 1e-4 * sup_abs(T11.values));
}

TEST(Summability, PartialSumsAndIncrement) {
    XiSequence xi;
    for (int l = 1; l <= 20; ++l) xi.xi.push_back(1.0 / (l * l));
    const SummabilityReport r = summability(xi, 1);
    ASSERT_EQ(r.partial_sums.size(), 20u);
    EXPECT_NEAR(r.partial_sums[0], 1.0, 1e-15);
    EXPECT_NEAR(r.partial_sums[1], 1.25, 1e-15);
    for (size_t i = 1; i < r.partial_sums.size(); ++i) EXPECT_GE(r.partial_sums[i], r.partial_sums[i - 1]);
    EXPECT_GT(r.last_decade_increment, 0.0);
    EXPECT_LT(r.last_decade_increment, 0.05);
}

}  // namespace
}  // namespace qspec
