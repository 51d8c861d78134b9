#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flatknot/curve.hpp"
#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"

namespace flatknot {

// Diagram extracted from a generic planar curve, together with the geometric
// data of each crossing.  Crossing ids are 0..V-1 in order of first passage.
struct ExtractResult {
    Diagram diagram;
    std::vector<CurveCrossing> geometry;  // index == crossing id
    std::vector<bool> first_over;         // index == crossing id
};

// overs[k]: is the first passage (smaller curve parameter) the overpass at
// crossing k?  Crossings are numbered by first-passage parameter.
inline ExtractResult extract_full(const PlanarCurve& c, const std::vector<bool>& overs) {
    auto xs = self_intersections(c);
    std::size_t V = xs.size();
    if (overs.size() != V)
        throw MissingOvers("need " + std::to_string(V) + " over flags, got " +
                           std::to_string(overs.size()));
    ExtractResult res;
    res.geometry = xs;
    res.first_over = overs;
    Diagram& d = res.diagram;
    if (V == 0) {
        d.trivial_whitney = turning_number(c);
        if (d.trivial_whitney != 1 && d.trivial_whitney != -1)
            throw NonGeneric("embedded curve with turning number " +
                             std::to_string(d.trivial_whitney));
        return res;
    }
    // Passages in curve-parameter order.
    struct Passage {
        double s;
        int crossing;
        int visit;  // 0: first, 1: second
    };
    std::vector<Passage> ps;
    ps.reserve(2 * V);
    for (std::size_t k = 0; k < V; ++k) {
        ps.push_back({xs[k].si, static_cast<int>(k), 0});
        ps.push_back({xs[k].sj, static_cast<int>(k), 1});
    }
    std::sort(ps.begin(), ps.end(), [](const Passage& a, const Passage& b) { return a.s < b.s; });
    for (std::size_t g = 1; g < ps.size(); ++g)
        if (!(ps[g - 1].s < ps[g].s)) throw NonGeneric("coincident passages on the curve");

    int n2 = static_cast<int>(2 * V);
    for (int t = 0; t < n2; ++t) d.arcs[t] = Arc{};
    // Global passage index of each (crossing, visit).
    std::vector<std::array<int, 2>> gidx(V);
    for (int g = 0; g < n2; ++g) gidx[static_cast<std::size_t>(ps[g].crossing)][ps[g].visit] = g;
    for (std::size_t k = 0; k < V; ++k) {
        Crossing cr;
        cr.over_axis = overs[k] ? 0 : 1;
        // First passage exits port 0; ports counterclockwise, so the second
        // passage exits port 1 when its direction is counterclockwise from
        // the first passage direction.
        int e2 = cross(xs[k].dir_i, xs[k].dir_j) > 0 ? 1 : 3;
        int g1 = gidx[k][0], g2 = gidx[k][1];
        auto in_arc = [&](int g) { return (g + n2 - 1) % n2; };
        int cid = static_cast<int>(k);
        cr.ports[2] = {in_arc(g1), 1};
        cr.ports[0] = {g1, 0};
        cr.ports[(e2 + 2) % 4] = {in_arc(g2), 1};
        cr.ports[e2] = {g2, 0};
        d.crossings[cid] = cr;
        d.arcs[in_arc(g1)].ends[1] = {cid, 2};
        d.arcs[g1].ends[0] = {cid, 0};
        d.arcs[in_arc(g2)].ends[1] = {cid, (e2 + 2) % 4};
        d.arcs[g2].ends[0] = {cid, e2};
    }
    // Arc t spans passages t -> t+1; the wrap-around arc contains vertex 0.
    d.basepoint = {n2 - 1, 0};

    // Outer face: at the leftmost vertex the unbounded region lies to the
    // west; pick the side of the local travel direction accordingly.
    std::size_t vmin = 0;
    for (std::size_t i = 1; i < c.size(); ++i) {
        Vec2 v = c.vertices[i], m = c.vertices[vmin];
        if (v.x < m.x || (v.x == m.x && v.y < m.y)) vmin = i;
    }
    Vec2 a = c.edge((vmin + c.size() - 1) % c.size()).normalized();
    Vec2 b = c.edge(vmin).normalized();
    Vec2 t = a + b;
    if (std::abs(t.y) < 1e-12) throw NonGeneric("degenerate corner at extreme vertex");
    // Arc whose parameter interval contains the extreme vertex.
    double param = static_cast<double>(vmin);
    int arc_at = n2 - 1;  // wrap-around arc by default
    for (int g = 0; g + 1 < n2; ++g) {
        if (ps[static_cast<std::size_t>(g)].s < param && param < ps[static_cast<std::size_t>(g) + 1].s) {
            arc_at = g;
            break;
        }
    }
    FaceSet fs = faces(d);
    Dart at{arc_at, 0};
    int outer = t.y > 0 ? fs.face_of_dart(at) : fs.face_of_dart(at.reversed());
    d.outer_face = fs.corners[static_cast<std::size_t>(outer)].front();
    validate(d);
    return res;
}

// Lift variant: over/under read off from the heights of the two passages.
inline ExtractResult extract_full(const SpatialPolyline& lift) {
    if (lift.vertices.size() < 3) throw DegenerateCurve("lift needs at least 3 vertices");
    PlanarCurve c = lift.project();
    auto xs = self_intersections(c);
    auto z_at = [&](double s) {
        std::size_t e = static_cast<std::size_t>(s);
        double frac = s - static_cast<double>(e);
        double z0 = lift.vertices[e % lift.vertices.size()].z;
        double z1 = lift.vertices[(e + 1) % lift.vertices.size()].z;
        return z0 + frac * (z1 - z0);
    };
    std::vector<bool> overs;
    overs.reserve(xs.size());
    for (const auto& x : xs) {
        double zi = z_at(x.si), zj = z_at(x.sj);
        if (zi == zj)
            throw InconsistentLift("equal heights above crossing near parameter " +
                                   std::to_string(x.si));
        overs.push_back(zi > zj);
    }
    return extract_full(c, overs);
}

inline Diagram extract_diagram(const PlanarCurve& c, const std::vector<bool>& overs) {
    return extract_full(c, overs).diagram;
}

inline Diagram extract_diagram(const SpatialPolyline& lift) { return extract_full(lift).diagram; }

}  // namespace flatknot
