#include <gtest/gtest.h>

#include <cmath>

#include "mdode/fields.hpp"
#include "mdode/integration.hpp"

using namespace mdode;

namespace {

Curve sin_curve(Interval I, double amp = 1.0) {
    return Curve::from_function(I, 1, [amp](double t, std::span<double> out) { out[0] = amp * std::sin(t); });
}

}  // namespace

TEST(TaggedPartition, UniformMeshAndFineness) {
    const auto p = TaggedPartition::uniform({0.0, 2.0}, 8);
    EXPECT_DOUBLE_EQ(p.mesh(), 0.25);
    EXPECT_EQ(p.tags.size(), 8u);
    EXPECT_DOUBLE_EQ(p.tags[0], 0.125);
    EXPECT_TRUE(p.is_delta_fine(0.3));
    EXPECT_FALSE(p.is_delta_fine(0.25));  // fineness is strict: mesh < delta
    EXPECT_THROW(TaggedPartition::uniform({0.0, 1.0}, 0), ConfigurationError);
}

TEST(CurveIntegral, ConstantMeasureGivesTheMass) {
    const auto c = BMeasure::cantor();
    const auto nu = constant_parametric(c, PositiveMeasure(c));
    const auto r = integrate_along(nu, sin_curve({0.0, 1.0}), {0.0, 1.0});
    EXPECT_NEAR(r.scalar(), 1.0, 1e-12);
    EXPECT_EQ(integrate_along(nu, sin_curve({0.0, 1.0}), {0.5, 0.5}).scalar(), 0.0);
}

TEST(CurveIntegral, SmoothFieldAgainstClosedForm) {
    // d nu_y = (-y^2 + 2) dt along y = sin t: int_0^1 = 2 - (1/2 - sin 2 / 4)
    const auto nu = fields::RiccatiCantor({10, 100, 0.01, true}, 0.0, 2.0).measure();
    const auto r = integrate_along(nu, sin_curve({0.0, 1.0}), {0.0, 1.0});
    EXPECT_NEAR(r.scalar(), 2.0 - (0.5 - std::sin(2.0) / 4.0), 1e-9);
}

TEST(CurveIntegral, ForcedFieldSplitsIntoSmoothAndForcingParts) {
    const fields::RiccatiCantor field;
    const auto nu = field.measure();
    const Interval I{0.0, 1.5};
    IntegrationOptions opts;
    opts.tol = default_integration_tol(true);
    const auto r = integrate_along(nu, sin_curve(I), I, opts);
    const double smooth = 2.0 * 1.5 - (0.75 - std::sin(3.0) / 4.0);
    EXPECT_NEAR(r.scalar(), smooth + field.forcing().sum_as_combo().eval(I), 1e-6);
}

TEST(CurveIntegral, CantorWeightedLinearCurve) {
    // int_0^1 t dC(t) = 1/2 by the symmetry C(1-t) = 1 - C(t)
    std::vector<SeparableTerm> terms;
    terms.push_back({[](std::span<const double> y, std::span<double> k) { k[0] = y[0]; }, BMeasure::cantor()});
    const auto nu = separable(1, 1, std::move(terms));
    const auto y = Curve::piecewise_linear({0.0, 1.0}, {{0.0}, {1.0}});
    IntegrationOptions opts;
    opts.tol = 1e-7;
    EXPECT_NEAR(integrate_along(nu, y, {0.0, 1.0}, opts).scalar(), 0.5, 1e-6);
}

TEST(CurveIntegral, VectorValuedLinearField) {
    // nu_y = (A y) dt with A = [[0, 1], [-1, 0]] along the constant curve (1, 2)
    const auto nu = fields::Linear(2, {0.0, 1.0, -1.0, 0.0}, {0.0, 0.0}).measure();
    const auto y = Curve::constant({0.0, 3.0}, {1.0, 2.0});
    const auto r = integrate_along(nu, y, {0.0, 3.0});
    EXPECT_NEAR(r.value[0], 6.0, 1e-12);
    EXPECT_NEAR(r.value[1], -3.0, 1e-12);
}

TEST(CurveIntegral, DimensionMismatchThrows) {
    const auto nu = fields::Linear(2, {0.0, 1.0, -1.0, 0.0}, {0.0, 0.0}).measure();
    EXPECT_THROW(integrate_along(nu, sin_curve({0.0, 1.0}), {0.0, 1.0}), PreconditionError);
}

TEST(IntegralBounds, HoldAlongCurvesInTheBall) {
    const auto nu = fields::RiccatiCantor().measure();
    const Interval I{0.0, 1.2};
    const auto x = sin_curve(I, 0.9);
    const auto y = Curve::from_function(I, 1, [](double t, std::span<double> out) { out[0] = 0.5 * std::cos(3 * t); });
    IntegrationOptions opts;
    opts.tol = 1e-7;
    const auto r = check_bounds_along(nu, x, y, I, 1, opts);
    EXPECT_TRUE(r.m_bound_holds) << r.m_ratio;
    EXPECT_TRUE(r.l_bound_holds) << r.l_ratio;
    EXPECT_THROW(check_bounds_along(nu, sin_curve(I, 1.5), y, I, 1, opts), PreconditionError);
}

TEST(TranslationIdentity, HoldsForForcedField) {
    const auto nu = fields::RiccatiCantor().measure();
    const auto y = sin_curve({0.0, 1.0});
    for (double t : {0.01, 0.3, -0.25, 1.0}) {
        const auto c = translation_identity_check(nu, y, t, 1e-8);
        EXPECT_TRUE(c.holds) << t << " residual " << c.residual;
    }
}

TEST(Curve, ShiftAndTableInterpolation) {
    const auto c = Curve::piecewise_linear({0.0, 1.0, 2.0}, {{0.0}, {2.0}, {0.0}});
    EXPECT_DOUBLE_EQ(c(0.5)[0], 1.0);
    EXPECT_DOUBLE_EQ(c(1.5)[0], 1.0);
    const auto s = c.shifted(1.0);
    EXPECT_EQ(s.domain(), (Interval{1.0, 3.0}));
    EXPECT_DOUBLE_EQ(s(2.0)[0], 2.0);
    EXPECT_THROW(Curve::piecewise_linear({0.0, 0.0}, {{0.0}, {1.0}}), ConfigurationError);
}
