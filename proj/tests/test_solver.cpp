#include <gtest/gtest.h>

#include <cmath>

#include "mdode/fields.hpp"
#include "mdode/solver.hpp"

using namespace mdode;

namespace {

ParametricMeasure square_field() {
    // y' = y^2, exact solution y0 / (1 - y0 t)
    std::vector<SeparableTerm> terms;
    terms.push_back({[](std::span<const double> y, std::span<double> k) { k[0] = y[0] * y[0]; }, BMeasure::lebesgue()});
    auto bounds = BoundFamily::from([](int j) {
        const auto leb = BMeasure::lebesgue();
        return BallBounds{PositiveMeasure(double(j * j) * leb), PositiveMeasure(2.0 * j * leb), Modulus::identity()};
    });
    return separable(1, 1, std::move(terms), bounds);
}

}  // namespace

TEST(Euler, TelescopesForStateIndependentMeasures) {
    const auto c = BMeasure::cantor();
    const auto nu = constant_parametric(c, PositiveMeasure(c));
    for (double h : {0.1, 0.013, 1e-3}) {
        const auto path = solve_euler(nu, 0.0, Vec{0.5}, 1.0, h);
        for (std::size_t k = 0; k < path.size(); ++k)
            EXPECT_NEAR(path.values[k][0], 0.5 + cantor_cdf(path.times[k]), 1e-14);
        EXPECT_NEAR(path.back()[0], 1.5, 1e-14);
    }
}

TEST(Euler, ConvergesAtFirstOrderForLinearDecay) {
    const auto nu = fields::Linear(1, {-1.0}, {0.0}).measure();
    const double e1 = std::abs(euler_endpoint(nu, 0.0, Vec{1.0}, 1.0, 1e-2)[0] - std::exp(-1.0));
    const double e2 = std::abs(euler_endpoint(nu, 0.0, Vec{1.0}, 1.0, 5e-3)[0] - std::exp(-1.0));
    EXPECT_LT(e1, 1e-2);
    EXPECT_NEAR(e1 / e2, 2.0, 0.05);
}

TEST(Euler, BackwardSolveReversesTime) {
    const auto nu = fields::Linear(1, {-1.0}, {0.0}).measure();
    const auto path = solve_euler(nu, 1.0, Vec{std::exp(-1.0)}, 0.0, 1e-4);
    EXPECT_DOUBLE_EQ(path.times.front(), 1.0);
    EXPECT_DOUBLE_EQ(path.times.back(), 0.0);
    EXPECT_NEAR(path.back()[0], 1.0, 1e-4);
    // the interpolant accepts decreasing time grids
    EXPECT_NEAR(path.at(0.5)[0], std::exp(-0.5), 1e-4);
}

TEST(Euler, EquilibriumOfUnforcedRiccati) {
    const auto nu = fields::RiccatiCantor({10, 100, 0.01, true}, 0.0, 2.0).measure();
    const auto path = solve_euler(nu, 0.0, Vec{std::sqrt(2.0)}, 5.0, 1e-3);
    for (const auto& v : path.values) EXPECT_NEAR(v[0], std::sqrt(2.0), 1e-12);
}

TEST(Euler, EndpointMatchesFullPath) {
    const auto nu = fields::RiccatiCantor().measure();
    const auto path = solve_euler(nu, 0.0, Vec{0.3}, 1.2, 1e-3);
    EXPECT_EQ(euler_endpoint(nu, 0.0, Vec{0.3}, 1.2, 1e-3)[0], path.back()[0]);
}

TEST(Blowup, ReportedWithPartialPath) {
    const auto nu = square_field();
    try {
        solve_euler(nu, 0.0, Vec{1.0}, 2.0, 1e-4, 1e6);
        FAIL() << "expected blowup";
    } catch (const BlowupError& e) {
        const auto& p = e.partial();
        ASSERT_GE(p.size(), 2u);
        EXPECT_GT(p.times.back(), 0.99);
        EXPECT_LT(p.times.back(), 1.1);
        EXPECT_GT(std::abs(p.back()[0]), 1e6);
    }
}

TEST(MaximalExtension, StopsAtBlowupOrHorizon) {
    const auto nu = square_field();
    const auto up = extend_maximal(nu, 0.0, Vec{1.0}, 1e6, 5.0, 1e-4);
    EXPECT_EQ(up.reason, Termination::blowup);
    EXPECT_NEAR(up.path.times.back(), 1.0, 0.05);
    // backward the exact solution 1/(1 - t) decays, so the horizon is reached
    const auto down = extend_maximal(nu, 0.0, Vec{1.0}, 1e6, -5.0, 1e-3);
    EXPECT_EQ(down.reason, Termination::horizon);
    EXPECT_DOUBLE_EQ(down.path.times.back(), -5.0);
    EXPECT_NEAR(down.path.back()[0], 1.0 / 6.0, 1e-3);
    EXPECT_THROW(extend_maximal(nu, 0.0, Vec{2.0}, 1.0, 1.0, 1e-3), PreconditionError);
}

TEST(Picard, AgreesWithFineEulerOnSmoothField) {
    const auto nu = fields::Linear(1, {-1.0}, {0.5}).measure();
    const auto res = solve_picard(nu, 0.0, Vec{1.0}, 1.0, {});
    // y' = -y + 1/2: y = 1/2 + e^{-t}/2
    EXPECT_NEAR(res.path.back()[0], 0.5 + 0.5 * std::exp(-1.0), 1e-5);
    ASSERT_FALSE(res.windows.empty());
    for (const auto& w : res.windows) {
        EXPECT_GT(w.delta, 0.0);
        EXPECT_LT(w.contraction, 1.0);
    }
}

TEST(Picard, WindowsCoverTheIntervalForForcedRiccati) {
    const auto nu = fields::RiccatiCantor().measure();
    const auto res = solve_picard(nu, 0.0, Vec{0.0}, 1.5, {});
    double covered = 0.0;
    for (const auto& w : res.windows) covered += w.delta;
    EXPECT_NEAR(covered, 1.5, 1e-9);
    EXPECT_DOUBLE_EQ(res.path.times.back(), 1.5);
    const double h = res.windows.front().delta / 2048.0;
    const auto euler = solve_euler(nu, 0.0, Vec{0.0}, 1.5, h);
    EXPECT_NEAR(res.path.back()[0], euler.back()[0], 5e-3);
    for (const auto& w : res.windows) EXPECT_LT(w.contraction, 1.0);
}

TEST(Picard, RequiresBounds) {
    std::vector<SeparableTerm> terms;
    terms.push_back({[](std::span<const double>, std::span<double> k) { k[0] = 1.0; }, BMeasure::lebesgue()});
    const auto nu = separable(1, 1, std::move(terms));
    EXPECT_THROW(solve_picard(nu, 0.0, Vec{0.0}, 1.0, {}), ConfigurationError);
}

TEST(SkewProduct, IdentityAtZeroAndCocycle) {
    const auto nu = fields::RiccatiCantor().measure();
    const Vec y0{0.4};
    const auto id = skew_product_step(0.0, nu, y0, 1e-3);
    EXPECT_EQ(id.fiber, y0);
    EXPECT_EQ(id.base.shift(), nu.shift());
    const double h = 1.0 / 1024.0;
    const auto st = skew_product_step(0.75, nu, y0, h);
    const auto s = skew_product_step(0.5, nu, y0, h);
    const auto t = skew_product_step(0.25, s.base, s.fiber, h);
    EXPECT_NEAR(t.fiber[0], st.fiber[0], 1e-12);
    EXPECT_DOUBLE_EQ(t.base.shift(), st.base.shift());
}

TEST(IntegralEquation, ResidualShrinksWithStep) {
    const auto nu = fields::RiccatiCantor().measure();
    IntegrationOptions opts;
    opts.tol = 1e-10;
    const auto coarse = solve_euler(nu, 0.0, Vec{0.0}, 1.0, 1e-2);
    const auto fine = solve_euler(nu, 0.0, Vec{0.0}, 1.0, 1e-3);
    const double rc = integral_equation_residual(nu, coarse, opts);
    const double rf = integral_equation_residual(nu, fine, opts);
    EXPECT_LT(rf, rc);
    EXPECT_LT(rf, 1e-2);
}

TEST(SolutionPath, VariationAndMaxNorm) {
    const auto c = BMeasure::cantor();
    const auto nu = constant_parametric(c, PositiveMeasure(c));
    const auto p = solve_euler(nu, 0.0, Vec{-1.0}, 1.0, 0.01);
    EXPECT_NEAR(p.variation(), 1.0, 1e-14);
    EXPECT_NEAR(p.max_norm(), 1.0, 1e-14);
}
