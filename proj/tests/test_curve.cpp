#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>

#include "flatknot/curve.hpp"
#include "test_support.hpp"

using namespace flatknot;
using testsupport::circle;
using testsupport::figure_eight;
using testsupport::limacon;
using testsupport::trefoil_shadow;

TEST_CASE("turning number of simple closed curves") {
    CHECK(turning_number(circle()) == 1);
    PlanarCurve cw = circle();
    std::reverse(cw.vertices.begin(), cw.vertices.end());
    CHECK(turning_number(cw) == -1);
    PlanarCurve hex{{{1, 0}, {0.5, 0.9}, {-0.5, 0.9}, {-1, 0}, {-0.5, -0.9}, {0.5, -0.9}}};
    CHECK(turning_number(hex) == 1);
}

TEST_CASE("turning number of curves with crossings") {
    CHECK(turning_number(figure_eight()) == 0);
    CHECK(turning_number(limacon()) == 2);
    CHECK(turning_number(trefoil_shadow()) == 2);
}

TEST_CASE("total turning magnitudes") {
    CHECK_THAT(total_signed_turning(circle()),
               Catch::Matchers::WithinAbs(2 * std::numbers::pi, 1e-9));
    CHECK(total_abs_turning(figure_eight()) > 2 * std::numbers::pi);
}

TEST_CASE("self intersections are found with ordered parameters") {
    auto xs = self_intersections(figure_eight());
    REQUIRE(xs.size() == 1);
    CHECK(xs[0].si < xs[0].sj);
    CHECK_THAT(xs[0].point.x, Catch::Matchers::WithinAbs(0.0, 0.05));
    CHECK_THAT(xs[0].point.y, Catch::Matchers::WithinAbs(0.0, 0.05));

    CHECK(self_intersections(circle()).empty());
    CHECK(self_intersections(limacon()).size() == 1);
    CHECK(self_intersections(trefoil_shadow()).size() == 3);
}

TEST_CASE("genericity validation") {
    CHECK(validate_generic(circle()).ok);
    CHECK(validate_generic(trefoil_shadow()).ok);

    PlanarCurve bad = circle();
    bad.vertices.push_back(bad.vertices.back() + Vec2{1e-12, 0});
    auto rep = validate_generic(bad);
    CHECK_FALSE(rep.ok);
    bool short_edge = false;
    for (const auto& d : rep.defects)
        if (d.kind == GenericityDefect::Kind::ShortEdge) short_edge = true;
    CHECK(short_edge);
}

TEST_CASE("degenerate curves are rejected") {
    PlanarCurve two{{{0, 0}, {1, 0}}};
    CHECK_THROWS_AS(turning_number(two), DegenerateCurve);
    PlanarCurve spike{{{0, 0}, {1, 0}, {2, 0}, {1, 0}, {0.5, 1}}};
    CHECK_THROWS_AS(total_signed_turning(spike), NonGeneric);
}

TEST_CASE("resample keeps the shape") {
    PlanarCurve c = trefoil_shadow();
    PlanarCurve r = resample(c, 100);
    REQUIRE(r.vertices.size() == 100);
    CHECK_THAT(r.length(), Catch::Matchers::WithinRel(c.length(), 1e-2));
    CHECK(turning_number(r) == turning_number(c));
    CHECK(self_intersections(r).size() == 3);
    // Equal spacing.
    double step = r.edge(0).norm();
    for (std::size_t i = 1; i < r.size(); ++i)
        CHECK_THAT(r.edge(i).norm(), Catch::Matchers::WithinRel(step, 1e-2));
}
