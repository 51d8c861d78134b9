#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

#include "flatknot/curve.hpp"

namespace testsupport {

// Phase offset keeps self-intersections away from sample vertices.
inline flatknot::PlanarCurve sampled(const std::function<flatknot::Vec2(double)>& f, std::size_t n,
                                     double phase = 0.1234) {
    flatknot::PlanarCurve c;
    c.vertices.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = phase + 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        c.vertices.push_back(f(t));
    }
    return c;
}

// Embedded circle, counterclockwise when r > 0 traversed forward.
inline flatknot::PlanarCurve circle(double r = 1.0, std::size_t n = 40) {
    return sampled([&](double t) { return flatknot::Vec2{r * std::cos(t), r * std::sin(t)}; }, n);
}

// Vertical figure-eight with one crossing, turning number 0.
inline flatknot::PlanarCurve figure_eight(std::size_t n = 80) {
    return sampled([](double t) { return flatknot::Vec2{std::sin(2 * t), std::sin(t)}; }, n);
}

// Limacon with an inner loop: one crossing, turning number 2.
inline flatknot::PlanarCurve limacon(std::size_t n = 120) {
    return sampled(
        [](double t) {
            double r = 1 + 2 * std::cos(t);
            return flatknot::Vec2{r * std::cos(t), r * std::sin(t)};
        },
        n);
}

// Standard three-crossing torus-curve shadow (trefoil projection).
inline flatknot::PlanarCurve trefoil_shadow(std::size_t n = 240) {
    return sampled(
        [](double t) {
            double r = 2 + std::cos(3 * t);
            return flatknot::Vec2{r * std::cos(2 * t), r * std::sin(2 * t)};
        },
        n);
}

}  // namespace testsupport
