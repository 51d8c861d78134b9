#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "flatknot/curve.hpp"
#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"
#include "flatknot/extract.hpp"

namespace flatknot {

// Geometric realization of a combinatorial diagram: a generic planar curve
// whose extracted diagram is canonically equal to the input, with the
// drawing's unbounded face matching the diagram's outer face.
struct RealizeResult {
    PlanarCurve curve;
    std::map<int, std::size_t> crossing_index;  // crossing id -> self_intersections index
    std::vector<bool> overs;                    // extraction over flags reproducing the diagram
};

namespace detail {

// One harmonic-embedding attempt with `subs` subdivision points per arc.
// Positions every map element, then threads the curve along the traversal
// with crossing corners cut so the two passages intersect transversally.
struct RealizeAttempt {
    PlanarCurve curve;                 // raw (non-uniform) polyline
    std::map<int, Vec2> crossing_pos;  // crossing id -> drawn position
    std::map<int, bool> first_over;    // crossing id -> first passage is the overpass
};

inline RealizeAttempt realize_attempt(const Diagram& d, int subs) {
    FaceSet fs = faces(d);
    int outer = outer_face_index(d, fs);

    // Triangulated-disk harmonic layout (Tutte/Floater).  Nodes: crossings,
    // `subs` chain nodes per arc, and per face a ring node for every walk
    // dart plus (for bounded faces of degree >= 3) a center.  Each face
    // interior is fan triangulated between its boundary walk and its ring,
    // so the complex is a simple triangulated disk whose boundary is the
    // OUTER face's ring -- a simple cycle even when the outer walk repeats
    // a crossing -- and the harmonic solve with that ring pinned convex is
    // injective.  Plain star stellation is not enough: a pendant block
    // hanging off a cut vertex would see only one crossing and one center
    // as anchors and collapse onto the segment between them.
    std::map<int, int> cross_node, arc_base, face_center, face_ring;
    int next = 0;
    for (const auto& [cid, cr] : d.crossings) cross_node[cid] = next++;
    for (const auto& [aid, arc] : d.arcs) {
        arc_base[aid] = next;
        next += subs;
    }
    for (int f = 0; f < static_cast<int>(fs.count()); ++f) {
        face_ring[f] = next;
        next += fs.degree(f) * (subs + 1);  // one ring node per boundary occurrence
        if (f != outer) face_center[f] = next++;
    }
    int N = next;

    std::map<std::pair<int, int>, double> weight;
    auto link = [&](int a, int b) {
        if (a == b) return;
        if (a > b) std::swap(a, b);
        weight[{a, b}] += 1.0;
    };
    for (const auto& [aid, arc] : d.arcs) {
        int prev = cross_node.at(arc.ends[0].crossing);
        for (int k = 0; k < subs; ++k) {
            link(prev, arc_base.at(aid) + k);
            prev = arc_base.at(aid) + k;
        }
        link(prev, cross_node.at(arc.ends[1].crossing));
    }
    // Boundary node occurrences along a face walk, in walk order.
    auto walk_nodes = [&](int f) {
        std::vector<int> out;
        for (const Dart& m : fs.darts[static_cast<std::size_t>(f)]) {
            for (int k = 0; k < subs; ++k)
                out.push_back(arc_base.at(m.arc) + (m.dir == 0 ? k : subs - 1 - k));
            out.push_back(cross_node.at(d.head(m).crossing));
        }
        return out;
    };
    for (int f = 0; f < static_cast<int>(fs.count()); ++f) {
        std::vector<int> b = walk_nodes(f);
        std::size_t m = b.size();
        for (std::size_t k = 0; k < m; ++k) {
            int rk = face_ring.at(f) + static_cast<int>(k);
            link(rk, b[k]);
            // The diagonal to the next boundary node and the ring edge close
            // the strip between walk and ring into triangles.
            link(rk, b[(k + 1) % m]);
            link(rk, face_ring.at(f) + static_cast<int>((k + 1) % m));
            auto cit = face_center.find(f);
            if (cit != face_center.end()) link(rk, cit->second);
        }
    }

    // Pin the outer ring on the unit circle, clockwise so the unbounded
    // region lies on the curve's outside; every curve node stays free.
    std::vector<bool> fixed(static_cast<std::size_t>(N), false);
    std::vector<Vec2> pos(static_cast<std::size_t>(N));
    int outer_m = fs.degree(outer) * (subs + 1);
    for (int k = 0; k < outer_m; ++k) {
        double th = -2.0 * std::numbers::pi * static_cast<double>(k) /
                    static_cast<double>(outer_m);
        int v = face_ring.at(outer) + k;
        fixed[static_cast<std::size_t>(v)] = true;
        pos[static_cast<std::size_t>(v)] = {std::cos(th), std::sin(th)};
    }

    // Harmonic positions for the free nodes.
    std::vector<int> free_index(static_cast<std::size_t>(N), -1);
    int F = 0;
    for (int v = 0; v < N; ++v)
        if (!fixed[static_cast<std::size_t>(v)]) free_index[static_cast<std::size_t>(v)] = F++;
    if (F > 0) {
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(F, F);
        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(F, 2);
        for (const auto& [e, w] : weight) {
            auto [u, v] = e;
            int fu = free_index[static_cast<std::size_t>(u)];
            int fv = free_index[static_cast<std::size_t>(v)];
            if (fu >= 0) L(fu, fu) += w;
            if (fv >= 0) L(fv, fv) += w;
            if (fu >= 0 && fv >= 0) {
                L(fu, fv) -= w;
                L(fv, fu) -= w;
            } else if (fu >= 0) {
                b(fu, 0) += w * pos[static_cast<std::size_t>(v)].x;
                b(fu, 1) += w * pos[static_cast<std::size_t>(v)].y;
            } else if (fv >= 0) {
                b(fv, 0) += w * pos[static_cast<std::size_t>(u)].x;
                b(fv, 1) += w * pos[static_cast<std::size_t>(u)].y;
            }
        }
        Eigen::MatrixXd x = L.partialPivLu().solve(b);
        for (int v = 0; v < N; ++v) {
            int fv = free_index[static_cast<std::size_t>(v)];
            if (fv >= 0) pos[static_cast<std::size_t>(v)] = {x(fv, 0), x(fv, 1)};
        }
    }

    // Thread the curve: chain nodes of each traversal dart, then its head
    // crossing.  Starting on the first chain node keeps every crossing visit
    // interior to the list.
    RealizeAttempt out;
    struct Entry {
        Vec2 p;
        int crossing;  // -1 for chain nodes
    };
    std::vector<Entry> raw;
    std::map<int, int> visits;
    for (const Dart& t : curve_traversal(d)) {
        for (int k = 0; k < subs; ++k)
            raw.push_back({pos[static_cast<std::size_t>(
                               arc_base.at(t.arc) + (t.dir == 0 ? k : subs - 1 - k))],
                           -1});
        PortRef h = d.head(t);
        raw.push_back({pos[static_cast<std::size_t>(cross_node.at(h.crossing))], h.crossing});
        if (visits[h.crossing]++ == 0)
            out.first_over[h.crossing] =
                (h.port % 2) == d.crossings.at(h.crossing).over_axis;
    }
    for (const auto& [cid, node] : cross_node)
        out.crossing_pos[cid] = pos[static_cast<std::size_t>(node)];

    // Cut each crossing corner: both passages become short chords through
    // nearly-opposite ports, so they cross transversally near the crossing.
    std::size_t M = raw.size();
    for (std::size_t i = 0; i < M; ++i) {
        if (raw[i].crossing < 0) {
            out.curve.vertices.push_back(raw[i].p);
            continue;
        }
        Vec2 P = raw[i].p;
        Vec2 A = raw[(i + M - 1) % M].p, B = raw[(i + 1) % M].p;
        double eps = 0.35 * std::min((A - P).norm(), (B - P).norm());
        if (eps <= 0) throw RealizationFailed("collapsed chain at a crossing");
        out.curve.vertices.push_back(P + (A - P).normalized() * eps);
        out.curve.vertices.push_back(P + (B - P).normalized() * eps);
    }
    return out;
}

// Check a candidate curve against the diagram; fills the registry on success.
inline bool realize_verify(const Diagram& d, const RealizeAttempt& at, const PlanarCurve& c,
                           RealizeResult& res) {
    try {
        auto xs = self_intersections(c);
        if (xs.size() != d.crossings.size()) return false;
        std::map<int, std::size_t> index;
        std::vector<bool> overs(xs.size());
        for (std::size_t k = 0; k < xs.size(); ++k) {
            int best = -1;
            double best_d = 0;
            double second = std::numeric_limits<double>::infinity();
            for (const auto& [cid, p] : at.crossing_pos) {
                double dist = (xs[k].point - p).norm();
                if (best < 0 || dist < best_d) {
                    if (best >= 0) second = best_d;
                    best_d = dist;
                    best = cid;
                } else if (dist < second) {
                    second = dist;
                }
            }
            (void)second;
            if (index.count(best)) return false;
            index[best] = k;
            overs[k] = at.first_over.at(best);
        }
        Diagram got = extract_diagram(c, overs);
        if (canonical_code(got).code != canonical_code(d).code) return false;
        res.curve = c;
        res.crossing_index = std::move(index);
        res.overs = std::move(overs);
        return true;
    } catch (const Error&) {
        return false;
    }
}

}  // namespace detail

inline RealizeResult realize_diagram(const Diagram& d, std::size_t n = 0) {
    std::size_t floor_n = 8 * (static_cast<std::size_t>(d.n_crossings()) + 1);
    if (n < floor_n) n = floor_n;
    RealizeResult res;
    if (d.trivial()) {
        for (std::size_t k = 0; k < n; ++k) {
            double th = 2.0 * std::numbers::pi * static_cast<double>(k) /
                        static_cast<double>(n) * (d.trivial_whitney > 0 ? 1.0 : -1.0);
            res.curve.vertices.push_back({std::cos(th), std::sin(th)});
        }
        return res;
    }
    validate(d);
    std::string why = "no attempt succeeded";
    for (int subs : {2, 4, 8}) {
        detail::RealizeAttempt at;
        try {
            at = detail::realize_attempt(d, subs);
        } catch (const Error& e) {
            why = e.what();
            continue;
        }
        // Prefer a near-uniform resampling at the requested resolution; fall
        // back to finer samplings, the raw construction polyline, and last a
        // sampling fine enough to keep every construction feature.
        for (std::size_t m : {n, 2 * n, 4 * n}) {
            try {
                if (detail::realize_verify(d, at, resample(at.curve, m), res)) return res;
            } catch (const Error& e) {
                why = e.what();
            }
        }
        if (detail::realize_verify(d, at, at.curve, res)) return res;
        double shortest = at.curve.length();
        for (std::size_t i = 0; i < at.curve.size(); ++i)
            shortest = std::min(shortest, at.curve.edge(i).norm());
        if (shortest > 0) {
            std::size_t fine = std::min<std::size_t>(
                20000, std::max(8 * n, static_cast<std::size_t>(
                                           3.0 * at.curve.length() / shortest)));
            try {
                if (detail::realize_verify(d, at, resample(at.curve, fine), res)) return res;
            } catch (const Error& e) {
                why = e.what();
            }
        }
        why = "round-trip extraction mismatch at subdivision " + std::to_string(subs);
    }
    throw RealizationFailed(why);
}

}  // namespace flatknot
