#pragma once

#include <cmath>
#include <optional>

namespace flatknot {

struct Vec2 {
    double x = 0, y = 0;
    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    double norm() const { return std::hypot(x, y); }
    double norm2() const { return x * x + y * y; }
    Vec2 normalized() const { double n = norm(); return {x / n, y / n}; }
    Vec2 perp() const { return {-y, x}; }  // 90 degrees counterclockwise
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

// Signed angle from a to b in (-pi, pi].
inline double signed_angle(Vec2 a, Vec2 b) {
    return std::atan2(cross(a, b), dot(a, b));
}

struct SegIntersection {
    double s;  // parameter on segment (p0,p1), in (0,1)
    double t;  // parameter on segment (q0,q1), in (0,1)
    Vec2 point;
};

// Proper (interior, transversal) intersection of two open segments.
inline std::optional<SegIntersection> segment_intersect(Vec2 p0, Vec2 p1, Vec2 q0, Vec2 q1,
                                                        double eps = 0.0) {
    Vec2 r = p1 - p0, d = q1 - q0;
    double denom = cross(r, d);
    if (denom == 0) return std::nullopt;
    Vec2 w = q0 - p0;
    double s = cross(w, d) / denom;
    double t = cross(w, r) / denom;
    if (s <= eps || s >= 1 - eps || t <= eps || t >= 1 - eps) return std::nullopt;
    return SegIntersection{s, t, p0 + r * s};
}

}  // namespace flatknot
