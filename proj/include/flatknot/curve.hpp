#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "flatknot/errors.hpp"
#include "flatknot/geom.hpp"

namespace flatknot {

// Closed polyline in the plane; the edge from the last vertex back to the
// first is implicit.
struct PlanarCurve {
    std::vector<Vec2> vertices;

    std::size_t size() const { return vertices.size(); }
    Vec2 vertex(std::size_t i) const { return vertices[i % vertices.size()]; }
    // Edge i runs from vertex i to vertex i+1 (mod n).
    Vec2 edge(std::size_t i) const { return vertex(i + 1) - vertex(i); }
    double length() const {
        double L = 0;
        for (std::size_t i = 0; i < vertices.size(); ++i) L += edge(i).norm();
        return L;
    }
};

struct SpatialPolyline {
    std::vector<Vec3> vertices;

    PlanarCurve project() const {
        PlanarCurve c;
        c.vertices.reserve(vertices.size());
        for (const auto& v : vertices) c.vertices.push_back({v.x, v.y});
        return c;
    }
};

struct GenericityDefect {
    enum class Kind { NearTangency, TriplePoint, ShortEdge, SmallAngle };
    Kind kind;
    std::string location;
    double magnitude;
};

struct GenericityReport {
    bool ok = true;
    std::vector<GenericityDefect> defects;
};

namespace detail {
inline void require_vertices(const PlanarCurve& c) {
    if (c.size() < 3) throw DegenerateCurve("curve needs at least 3 vertices");
    for (std::size_t i = 0; i < c.size(); ++i)
        if (c.edge(i).norm() == 0) throw DegenerateCurve("zero-length edge at " + std::to_string(i));
}
}  // namespace detail

// Sum of signed exterior angles; throws NonGeneric on a reversal (angle ~ pi).
inline double total_signed_turning(const PlanarCurve& c, double reversal_tol = 1e-9) {
    detail::require_vertices(c);
    double sum = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        Vec2 a = c.edge(i), b = c.edge(i + 1);
        double th = signed_angle(a, b);
        if (std::abs(std::abs(th) - std::numbers::pi) < reversal_tol)
            throw NonGeneric("tangent reversal at vertex " + std::to_string((i + 1) % c.size()));
        sum += th;
    }
    return sum;
}

inline int turning_number(const PlanarCurve& c) {
    double sum = total_signed_turning(c);
    double w = sum / (2 * std::numbers::pi);
    double r = std::round(w);
    if (std::abs(w - r) > 1e-9)
        throw NonGeneric("turning sum not an integer multiple of 2*pi: " + std::to_string(sum));
    return static_cast<int>(r);
}

inline double total_abs_turning(const PlanarCurve& c, double reversal_tol = 1e-9) {
    detail::require_vertices(c);
    double sum = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        double th = signed_angle(c.edge(i), c.edge(i + 1));
        if (std::abs(std::abs(th) - std::numbers::pi) < reversal_tol)
            throw NonGeneric("tangent reversal at vertex " + std::to_string((i + 1) % c.size()));
        sum += std::abs(th);
    }
    return sum;
}

// One transverse self-intersection of the curve, with arclength-ordered
// passage coordinates.  si < sj always.
struct CurveCrossing {
    std::size_t edge_i, edge_j;  // edge indices, edge_i < edge_j
    double si, sj;               // curve parameters (edge index + fraction)
    Vec2 point;
    Vec2 dir_i, dir_j;  // unit edge directions at the two passages
};

// All proper pairwise edge intersections, sorted by (si, sj).
inline std::vector<CurveCrossing> self_intersections(const PlanarCurve& c) {
    detail::require_vertices(c);
    std::size_t n = c.size();
    std::vector<CurveCrossing> out;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;  // adjacent edges
            auto hit = segment_intersect(c.vertex(i), c.vertex(i + 1), c.vertex(j), c.vertex(j + 1));
            if (hit)
                out.push_back({i, j, i + hit->s, j + hit->t, hit->point,
                               c.edge(i).normalized(), c.edge(j).normalized()});
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CurveCrossing& a, const CurveCrossing& b) { return a.si < b.si; });
    return out;
}

// Deterministic genericity scan; ok implies diagram extraction will not error.
// Default tolerance is 1e-7 of the curve length.
inline GenericityReport validate_generic(const PlanarCurve& c, double tol = -1) {
    GenericityReport rep;
    if (c.size() < 3) {
        rep.ok = false;
        rep.defects.push_back({GenericityDefect::Kind::ShortEdge, "curve", 0.0});
        return rep;
    }
    double L = c.length();
    if (tol < 0) tol = 1e-7 * L;
    std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        double el = c.edge(i).norm();
        if (el < tol)
            rep.defects.push_back({GenericityDefect::Kind::ShortEdge, "edge " + std::to_string(i), el});
    }
    for (std::size_t i = 0; i < n; ++i) {
        double th = std::abs(signed_angle(c.edge(i), c.edge(i + 1)));
        double margin = std::numbers::pi - th;
        if (margin < 1e-6)
            rep.defects.push_back(
                {GenericityDefect::Kind::SmallAngle, "vertex " + std::to_string((i + 1) % n), margin});
    }
    // Near-tangency: non-adjacent edge pairs that pass within tol of each other
    // without a proper transversal intersection, or meet near an endpoint.
    auto seg_dist = [](Vec2 p0, Vec2 p1, Vec2 q) {
        Vec2 d = p1 - p0;
        double t = std::clamp(dot(q - p0, d) / d.norm2(), 0.0, 1.0);
        return (q - (p0 + d * t)).norm();
    };
    std::vector<Vec2> points;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            Vec2 p0 = c.vertex(i), p1 = c.vertex(i + 1), q0 = c.vertex(j), q1 = c.vertex(j + 1);
            auto hit = segment_intersect(p0, p1, q0, q1);
            if (hit) {
                double endgap = std::min({hit->s, 1 - hit->s, hit->t, 1 - hit->t}) *
                                std::min((p1 - p0).norm(), (q1 - q0).norm());
                if (endgap < tol)
                    rep.defects.push_back({GenericityDefect::Kind::NearTangency,
                                           "edges " + std::to_string(i) + "," + std::to_string(j),
                                           endgap});
                double ang = std::abs(signed_angle(p1 - p0, q1 - q0));
                double trans = std::min(ang, std::numbers::pi - ang);
                if (trans < 1e-6)
                    rep.defects.push_back({GenericityDefect::Kind::NearTangency,
                                           "edges " + std::to_string(i) + "," + std::to_string(j),
                                           trans});
                points.push_back(hit->point);
            } else {
                double d = std::min(
                    std::min(seg_dist(p0, p1, q0), seg_dist(p0, p1, q1)),
                    std::min(seg_dist(q0, q1, p0), seg_dist(q0, q1, p1)));
                if (d < tol)
                    rep.defects.push_back({GenericityDefect::Kind::NearTangency,
                                           "edges " + std::to_string(i) + "," + std::to_string(j), d});
            }
        }
    }
    // Triple points: distinct intersection points closer than tol.
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b) {
            double d = (points[a] - points[b]).norm();
            if (d < tol)
                rep.defects.push_back({GenericityDefect::Kind::TriplePoint, "intersection cluster", d});
        }
    rep.ok = rep.defects.empty();
    return rep;
}

// n vertices at equal arclength spacing along the polygon.
inline PlanarCurve resample(const PlanarCurve& c, std::size_t n) {
    if (n < 3) throw DegenerateCurve("resample needs n >= 3");
    detail::require_vertices(c);
    double L = c.length();
    PlanarCurve out;
    out.vertices.reserve(n);
    double step = L / static_cast<double>(n);
    double want = 0, walked = 0;
    std::size_t e = 0;
    double elen = c.edge(0).norm();
    for (std::size_t k = 0; k < n; ++k, want = step * static_cast<double>(k)) {
        while (walked + elen < want) {
            walked += elen;
            ++e;
            elen = c.edge(e).norm();
        }
        double t = (want - walked) / elen;
        out.vertices.push_back(c.vertex(e) + c.edge(e) * t);
    }
    return out;
}

}  // namespace flatknot
