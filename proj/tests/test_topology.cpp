#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "mdode/fields.hpp"
#include "mdode/topology.hpp"

using namespace mdode;

namespace {

ParametricMeasure scaled_lebesgue(double a) {
    const auto leb = BMeasure::lebesgue();
    return constant_parametric(a * leb, PositiveMeasure(std::abs(a) * leb));
}

ParametricMeasure zero_measure() { return constant_parametric(BMeasure{}, PositiveMeasure(BMeasure{})); }

}  // namespace

TEST(SigmaD, ZeroOnIdenticalAndSymmetric) {
    const auto nu = fields::RiccatiCantor().measure();
    EXPECT_EQ(dist_sigma_D(nu, nu), 0.0);
    const auto mu = nu.translated(0.37);
    EXPECT_DOUBLE_EQ(dist_sigma_D(nu, mu), dist_sigma_D(mu, nu));
    EXPECT_GT(dist_sigma_D(nu, mu), 0.0);
    EXPECT_LE(dist_sigma_D(nu, mu), 1.0);
}

TEST(SigmaD, TriangleInequality) {
    const auto nu = fields::RiccatiCantor().measure();
    const Vec shifts{0.0, 0.013, 0.25, 0.5, 1.3};
    for (double a : shifts)
        for (double b : shifts)
            for (double c : shifts) {
                const double ab = dist_sigma_D(nu.translated(a), nu.translated(b));
                const double bc = dist_sigma_D(nu.translated(b), nu.translated(c));
                const double ac = dist_sigma_D(nu.translated(a), nu.translated(c));
                EXPECT_LE(ac, ab + bc + 1e-15);
            }
}

TEST(SigmaD, ScaledLebesgueAgainstZeroHasClosedForm) {
    // p_k = a * (length of [-min(k,10), min(k,10)]); the tail repeats p_10.
    for (double a : {0.01, 0.3, 2.0}) {
        double expected = 0.0;
        for (int k = 1; k <= 10; ++k) {
            const double p = a * 2.0 * std::min(k, 10);
            expected += std::ldexp(1.0, -k) * p / (1.0 + p);
        }
        const double p10 = a * 20.0;
        expected += std::ldexp(1.0, -10) * p10 / (1.0 + p10);
        EXPECT_NEAR(dist_sigma_D(scaled_lebesgue(a), zero_measure()), expected, 1e-14) << a;
    }
}

TEST(SigmaD, LevelSeminormsAreNondecreasing) {
    const auto nu = fields::RiccatiCantor().measure();
    const auto d = dist_sigma_D_detail(nu, nu.translated(0.1));
    SeminormIndexSet idx;
    ASSERT_EQ(d.level_seminorms.size(), static_cast<std::size_t>(idx.saturation_level()));
    for (std::size_t k = 1; k < d.level_seminorms.size(); ++k)
        EXPECT_GE(d.level_seminorms[k], d.level_seminorms[k - 1] - 1e-15);
}

TEST(SigmaD, SmallTranslatesAreClose) {
    const auto nu = fields::RiccatiCantor({10, 100, 0.01, false}).measure();
    double prev = INFINITY;
    for (double s : {0.1, 0.01, 1e-3, 1e-4, 1e-5}) {
        const double d = dist_sigma_D(nu, nu.translated(s));
        EXPECT_LT(d, prev);
        prev = d;
    }
    EXPECT_LT(prev, 1e-2);
}

TEST(SigmaD, DimensionMismatchThrows) {
    const auto a = fields::Linear(1, {-1.0}, {0.0}).measure();
    const auto b = fields::Linear(2, {-1.0, 0.0, 0.0, -1.0}, {0.0, 0.0}).measure();
    EXPECT_THROW(dist_sigma_D(a, b), PreconditionError);
}

TEST(SigmaD, IndexSetEnumeration) {
    const Vec q = SeminormIndexSet::rationals(2, 1.0);
    EXPECT_EQ(q, (Vec{-1.0, -0.5, 0.0, 0.5, 1.0}));
    SeminormIndexSet idx;
    EXPECT_EQ(idx.saturation_level(), 10);
    EXPECT_EQ(idx.points(1, 1).size(), 9u);
    EXPECT_EQ(idx.points(1, 2).size(), 49u);  // lattice points of step 1/4 in the unit disc
}

TEST(SeminormD, IsTheNormOfTheIntervalMass) {
    const auto nu = fields::Linear(2, {0.0, 1.0, -1.0, 0.0}, {0.0, 0.0}).measure();
    EXPECT_NEAR(seminorm_D(nu, {0.0, 2.0}, Vec{3.0, 4.0}), 10.0, 1e-12);
}

TEST(ThetaModulus, LebesgueAndCantor) {
    const PositiveMeasure leb(BMeasure::lebesgue());
    EXPECT_NEAR(theta_modulus(leb, {0.0, 5.0}, 0.3), 0.3, 1e-14);
    EXPECT_EQ(theta_modulus(leb, {0.0, 5.0}, 0.0), 0.0);
    const PositiveMeasure c(BMeasure::cantor());
    for (int k = 0; k <= 6; ++k)
        EXPECT_NEAR(theta_modulus(c, {0.0, 1.0}, std::pow(3.0, -k), 729), std::ldexp(1.0, -k), 1e-12) << k;
    EXPECT_THROW(theta_modulus(c, {0.0, 1.0}, -1.0), PreconditionError);
}

TEST(FamilyDiagnostics, MultiplesOfLebesgue) {
    std::vector<PositiveMeasure> family;
    for (int n = 1; n <= 10; ++n) family.emplace_back(double(n) * BMeasure::lebesgue());
    const auto d = family_diagnostics(family);
    EXPECT_NEAR(d.c, 10.0, 1e-12);
    EXPECT_TRUE(d.bounded);
    EXPECT_TRUE(d.equicontinuous);
    for (const auto& row : d.table) EXPECT_NEAR(row.delta, row.epsilon / 10.0, 1e-12);
    FamilyProbe p;
    p.claimed_bound = 5.0;
    EXPECT_FALSE(family_diagnostics(family, p).bounded);
}

TEST(FamilyDiagnostics, CantorTranslates) {
    std::vector<PositiveMeasure> family;
    for (double s : {0.0, -1.0, -2.5}) family.push_back(PositiveMeasure(BMeasure::cantor()).translated(s));
    FamilyProbe p;
    p.epsilons = {0.5};
    const auto d = family_diagnostics(family, p);
    EXPECT_NEAR(d.c, 1.0, 1e-12);
    ASSERT_EQ(d.table.size(), 1u);
    EXPECT_NEAR(d.table[0].delta, 1.0 / 3.0, 1e-9);
}

TEST(CurveFamily, SampledCurvesAreAdmissible) {
    const auto nu = fields::RiccatiCantor().measure();
    CurveFamilySampler::Config cfg;
    cfg.interval = {0.0, 1.0};
    cfg.ball = 2;
    const CurveFamilySampler sampler(cfg, make_theta({nu.bounds().ball(2).m}, cfg.interval));
    const auto curves = sampler.curves();
    EXPECT_EQ(curves.size(), cfg.n_constant + cfg.n_curves);
    for (const auto& c : curves) EXPECT_TRUE(sampler.admissible(c));
}

TEST(ThetaSeminorm, BracketedByConstantCurveAndMBound) {
    const fields::RiccatiCantor field;
    const auto nu = field.measure();
    const Interval I{0.0, 1.0};
    CurveFamilySampler::Config cfg;
    cfg.interval = I;
    cfg.ball = 1;
    cfg.seed = 42;
    const CurveFamilySampler sampler(cfg, make_theta({nu.bounds().ball(1).m}, I));
    IntegrationOptions opts;
    opts.tol = 1e-7;
    const auto r = seminorm_Theta(nu, I, sampler, opts);
    EXPECT_EQ(r.failures, 0u);
    const double at_zero = std::abs(2.0 + field.forcing().sum().eval(I));
    EXPECT_GE(r.value, at_zero - 1e-9);
    EXPECT_LE(r.value, nu.bounds().ball(1).m.eval(I) + 1e-9);
    const CurveFamilySampler again(cfg, make_theta({nu.bounds().ball(1).m}, I));
    EXPECT_EQ(seminorm_Theta(nu, I, again, opts).value, r.value);
}

TEST(Hull, SingleShiftIsTrivial) {
    const auto h = hull_sample(fields::RiccatiCantor().measure(), {0.0});
    ASSERT_EQ(h.distances.size(), 1u);
    EXPECT_EQ(h.distances[0][0], 0.0);
    EXPECT_EQ(h.cover_radius, (Vec{0.0}));
    EXPECT_TRUE(h.epsilon.empty());
    EXPECT_TRUE(h.flow.identity_exact);
    EXPECT_TRUE(h.flow.composition_holds);
}

TEST(Hull, FlowAndCoverRadii) {
    const auto nu = fields::RiccatiCantor().measure();
    const auto h = hull_sample(nu, {0.0, 0.5, 1.0, 2.0, 4.0});
    EXPECT_TRUE(h.flow.identity_exact);
    EXPECT_TRUE(h.flow.composition_holds) << h.flow.composition_max_distance;
    EXPECT_EQ(h.flow.pairs_checked, 16u);
    ASSERT_EQ(h.cover_radius.size(), 5u);
    for (std::size_t i = 1; i < h.cover_radius.size(); ++i) EXPECT_LE(h.cover_radius[i], h.cover_radius[i - 1]);
    EXPECT_EQ(h.cover_radius.back(), 0.0);
}

TEST(Hull, PeriodicFieldReturnsToItself) {
    std::vector<SeparableTerm> terms;
    terms.push_back({[](std::span<const double> y, std::span<double> k) { k[0] = -y[0]; },
                     BMeasure::primitive_defined([](double t) { return -std::cos(t); })});
    const auto nu = separable(1, 1, std::move(terms));
    const double period = 2.0 * std::numbers::pi;
    EXPECT_LT(dist_sigma_D(nu, nu.translated(period)), 1e-8);
    EXPECT_GT(dist_sigma_D(nu, nu.translated(period / 2)), 1e-2);
}
