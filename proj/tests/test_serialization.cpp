#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mdode/serialization.hpp"

using namespace mdode;

namespace {

void expect_same_masses(const BMeasure& a, const BMeasure& b, Interval range, double tol = 1e-12) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(range.a, range.b);
    for (int s = 0; s < 100; ++s) {
        double x = u(rng), y = u(rng);
        if (x > y) std::swap(x, y);
        EXPECT_NEAR(a.eval({x, y}), b.eval({x, y}), tol) << "[" << x << "," << y << "]";
    }
}

}  // namespace

TEST(MeasureJson, RoundTripsEveryKind) {
    const char* docs[] = {
        R"({"kind":"lebesgue"})",
        R"({"kind":"cantor","support":[-1,2],"depth":40})",
        R"({"kind":"density","function":"sin","amplitude":2,"frequency":3})",
        R"({"kind":"density","function":"polynomial","coefficients":[1,0,-2]})",
        R"({"kind":"piecewise-constant","breaks":[0,1,2.5],"values":[3,-1]})",
        R"({"kind":"cantor-iteration","level":4})",
        R"({"kind":"cantor-forcing","iterations":3,"translates":5,"shift":0.05,"alternating":true})",
        R"({"kind":"cantor-forcing","iterations":3,"translates":5,"absolute":true})",
        R"({"kind":"combo","terms":[{"coefficient":2,"measure":{"kind":"cantor"}},{"measure":{"kind":"lebesgue"}}]})",
        R"({"kind":"translate","shift":0.5,"measure":{"kind":"cantor"}})",
        R"({"kind":"primitive-table","t":[0,1,2],"F":[0,1,1.5]})",
    };
    for (const char* d : docs) {
        const auto mu = measure_from_json_text(d);
        const auto back = measure_from_json(measure_to_json(mu));
        expect_same_masses(mu, back, {-2.0, 3.0});
    }
}

TEST(MeasureJson, ValuesMatchIndependentFormulas) {
    EXPECT_NEAR(measure_from_json_text(R"({"kind":"cantor","support":[-1,2]})").eval({-1.0, 0.5}), 0.5, 1e-15);
    EXPECT_NEAR(measure_from_json_text(R"({"kind":"density","function":"polynomial","coefficients":[1,0,3]})")
                    .eval({0.0, 2.0}),
                2.0 + 8.0, 1e-9);
    EXPECT_NEAR(measure_from_json_text(R"({"kind":"translate","shift":-0.5,"measure":{"kind":"cantor"}})")
                    .eval({0.5, 1.5}),
                1.0, 1e-15);
    EXPECT_NEAR(measure_from_json_text(R"({"kind":"primitive-table","t":[0,1,2],"F":[0,1,1.5]})").eval({0.5, 1.5}),
                0.75, 1e-15);
}

TEST(MeasureJson, RejectsUnknownKeysAndKinds) {
    EXPECT_THROW(measure_from_json_text(R"({"kind":"lebesgue","scale":2})"), SerializationError);
    EXPECT_THROW(measure_from_json_text(R"({"kind":"dirac"})"), SerializationError);
    EXPECT_THROW(measure_from_json_text(R"({"support":[0,1]})"), SerializationError);
    EXPECT_THROW(measure_from_json_text(R"({"kind":"cantor-forcing","iterations":3,"colour":1})"), SerializationError);
    EXPECT_THROW(measure_from_json_text(R"({"kind":"piecewise-constant","breaks":[1,0],"values":[1]})"),
                 SerializationError);
    EXPECT_THROW(measure_from_json_text("{not json"), SerializationError);
    EXPECT_THROW(measure_from_json_text(R"({"kind":"density","function":"tanh"})"), SerializationError);
}

TEST(MeasureJson, OpaqueMeasuresNeedTabulation) {
    const auto rho = BMeasure::density([](double t) { return t * t; });
    EXPECT_THROW(measure_to_json(rho), SerializationError);
    const auto tab = tabulate(rho, {0.0, 1.0}, 1024);
    const auto back = measure_from_json(measure_to_json(tab));
    EXPECT_NEAR(back.eval({0.0, 1.0}), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(back.eval({0.25, 0.75}), (0.75 * 0.75 * 0.75 - 0.25 * 0.25 * 0.25) / 3.0, 1e-6);
}

TEST(FieldJson, BuiltinKinds) {
    const auto ric = field_from_json(json::parse(R"({"kind":"riccati-cantor","forcing":{"iterations":3,"translates":2}})"));
    const Vec y{1.0};
    EXPECT_NEAR(ric.eval_scalar(y, {5.0, 6.0}), 1.0, 1e-12);  // past the forcing support: (-1 + 2) * 1
    const auto lin = field_from_json(json::parse(R"({"kind":"linear","A":[[0,1],[-1,0]],"b":[1,0]})"));
    const auto v = lin.eval(Vec{2.0, 3.0}, {0.0, 0.5});
    EXPECT_NEAR(v[0], 2.0, 1e-14);
    EXPECT_NEAR(v[1], -1.0, 1e-14);
    const auto tab = field_from_json(json::parse(R"({"kind":"custom-table","y":[0,1],"t":[0,1],"values":[[0,0],[2,2]]})"));
    EXPECT_NEAR(tab.eval_scalar(Vec{0.5}, {0.0, 1.0}), 1.0, 1e-14);
    const auto meas = field_from_json(
        json::parse(R"({"kind":"measure","measure":{"kind":"cantor"},"bound":{"kind":"cantor"}})"));
    EXPECT_NEAR(meas.eval_scalar(Vec{7.0}, {0.0, 1.0}), 1.0, 1e-15);
    EXPECT_NO_THROW(field_from_spec("riccati-cantor"));
    EXPECT_NO_THROW(field_from_spec(R"({"kind":"linear","A":[[-1]]})"));
}

TEST(FieldJson, RejectsMalformedDocuments) {
    EXPECT_THROW(field_from_json(json::parse(R"({"kind":"riccati-cantor","gain":1})")), SerializationError);
    EXPECT_THROW(field_from_json(json::parse(R"({"kind":"linear","A":[[1,2]]})")), SerializationError);
    EXPECT_THROW(field_from_json(json::parse(R"({"kind":"measure","measure":{"kind":"cantor"}})")),
                 SerializationError);
    EXPECT_THROW(field_from_json(json::parse(R"({"kind":"vortex"})")), SerializationError);
    EXPECT_THROW(field_from_spec("custom-table"), SerializationError);
}
