#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "flatknot/errors.hpp"

namespace flatknot {

// A knot diagram as an oriented combinatorial map on the sphere with a
// designated outer face.  Each crossing has four ports in counterclockwise
// order; the curve passes straight through on the (0,2) and (1,3) axes.
// over_axis names the axis whose strand is the overpass.

struct ArcEnd {
    int arc = -1;
    int end = -1;  // 0 or 1
    bool operator==(const ArcEnd& o) const { return arc == o.arc && end == o.end; }
};

struct PortRef {
    int crossing = -1;
    int port = -1;  // 0..3
    bool operator==(const PortRef& o) const { return crossing == o.crossing && port == o.port; }
};

struct Crossing {
    std::array<ArcEnd, 4> ports;
    int over_axis = 0;  // 0: axis {0,2} over; 1: axis {1,3} over
};

struct Arc {
    std::array<PortRef, 2> ends;
};

// Directed arc: runs from ends[dir] to ends[1-dir].
struct Dart {
    int arc = -1;
    int dir = 0;
    bool operator==(const Dart& o) const { return arc == o.arc && dir == o.dir; }
    bool operator<(const Dart& o) const { return arc != o.arc ? arc < o.arc : dir < o.dir; }
    Dart reversed() const { return {arc, 1 - dir}; }
};

// Face corner k of a crossing sits between ports k and k+1 (mod 4).
struct CornerRef {
    int crossing = -1;
    int corner = -1;
    bool operator==(const CornerRef& o) const { return crossing == o.crossing && corner == o.corner; }
    bool operator<(const CornerRef& o) const {
        return crossing != o.crossing ? crossing < o.crossing : corner < o.corner;
    }
};

struct Diagram {
    std::map<int, Crossing> crossings;
    std::map<int, Arc> arcs;
    Dart basepoint;                    // traversal start (unused when trivial)
    CornerRef outer_face;              // any corner on the outer face (unused when trivial)
    int trivial_whitney = 1;           // only meaningful when crossings is empty

    bool trivial() const { return crossings.empty(); }
    int n_crossings() const { return static_cast<int>(crossings.size()); }

    PortRef head(Dart d) const {
        const Arc& a = arcs.at(d.arc);
        return a.ends[1 - d.dir];
    }
    PortRef tail(Dart d) const { return arcs.at(d.arc).ends[d.dir]; }
    Dart dart_out_of(PortRef p) const {
        ArcEnd ae = crossings.at(p.crossing).ports[p.port];
        return {ae.arc, ae.end};
    }

    int fresh_crossing_id() const { return crossings.empty() ? 0 : crossings.rbegin()->first + 1; }
    int fresh_arc_id() const { return arcs.empty() ? 0 : arcs.rbegin()->first + 1; }
};

inline Dart next_along_curve(const Diagram& d, Dart cur) {
    PortRef h = d.head(cur);
    return d.dart_out_of({h.crossing, (h.port + 2) % 4});
}

// Full curve traversal starting at d.basepoint: 2V darts, each arc once.
inline std::vector<Dart> curve_traversal(const Diagram& d) {
    std::vector<Dart> out;
    if (d.trivial()) return out;
    Dart cur = d.basepoint;
    for (std::size_t i = 0; i < 2 * d.crossings.size(); ++i) {
        out.push_back(cur);
        cur = next_along_curve(d, cur);
    }
    return out;
}

struct FaceSet {
    // Per face: boundary darts (face on the left) and corners in walk order.
    std::vector<std::vector<Dart>> darts;
    std::vector<std::vector<CornerRef>> corners;
    std::map<std::pair<int, int>, int> face_of_dart_;  // (arc, dir) -> face index
    std::map<CornerRef, int> face_of_corner_;

    int face_of_dart(Dart d) const { return face_of_dart_.at({d.arc, d.dir}); }
    int face_of_corner(CornerRef c) const { return face_of_corner_.at(c); }
    int degree(int f) const { return static_cast<int>(darts[f].size()); }
    std::size_t count() const { return darts.size(); }
};

// Face walks with the face on the left of each dart: arriving at port p, the
// walk leaves through port p-1 (mod 4), registering corner p-1.
inline FaceSet faces(const Diagram& d) {
    FaceSet fs;
    if (d.trivial()) return fs;
    std::set<Dart> seen;
    for (const auto& [aid, arc] : d.arcs) {
        for (int dir = 0; dir < 2; ++dir) {
            Dart start{aid, dir};
            if (seen.count(start)) continue;
            std::vector<Dart> walk;
            std::vector<CornerRef> cs;
            Dart cur = start;
            do {
                walk.push_back(cur);
                seen.insert(cur);
                PortRef h = d.head(cur);
                int out_port = (h.port + 3) % 4;
                cs.push_back({h.crossing, out_port});
                cur = d.dart_out_of({h.crossing, out_port});
            } while (!(cur == start));
            int f = static_cast<int>(fs.darts.size());
            for (const Dart& w : walk) fs.face_of_dart_[{w.arc, w.dir}] = f;
            for (const CornerRef& c : cs) fs.face_of_corner_[c] = f;
            fs.darts.push_back(std::move(walk));
            fs.corners.push_back(std::move(cs));
        }
    }
    return fs;
}

inline void validate(const Diagram& d) {
    if (d.trivial()) {
        if (d.trivial_whitney != 1 && d.trivial_whitney != -1)
            throw InvalidDiagram("trivial_whitney must be +1 or -1");
        if (!d.arcs.empty()) throw InvalidDiagram("trivial diagram must have no arcs");
        return;
    }
    std::size_t V = d.crossings.size();
    if (d.arcs.size() != 2 * V)
        throw InvalidDiagram("arc count must be twice the crossing count");
    // Port / arc-end mutual consistency; every end used exactly once.
    std::map<std::pair<int, int>, int> end_uses;
    for (const auto& [cid, cr] : d.crossings) {
        for (int p = 0; p < 4; ++p) {
            ArcEnd ae = cr.ports[p];
            auto it = d.arcs.find(ae.arc);
            if (ae.end < 0 || ae.end > 1 || it == d.arcs.end())
                throw InvalidDiagram("bad port reference");
            if (!(it->second.ends[ae.end] == PortRef{cid, p}))
                throw InvalidDiagram("arc end does not point back to its port");
            ++end_uses[{ae.arc, ae.end}];
        }
        if (cr.over_axis != 0 && cr.over_axis != 1) throw InvalidDiagram("bad over_axis");
    }
    if (end_uses.size() != 4 * V) throw InvalidDiagram("arc ends not all used");
    for (auto& [k, n] : end_uses)
        if (n != 1) throw InvalidDiagram("arc end used more than once");
    if (!d.arcs.count(d.basepoint.arc) || (d.basepoint.dir != 0 && d.basepoint.dir != 1))
        throw InvalidDiagram("bad basepoint");
    // Single closed component visiting every arc once.
    auto trav = curve_traversal(d);
    std::set<int> arcs_seen;
    for (const Dart& t : trav) arcs_seen.insert(t.arc);
    if (arcs_seen.size() != d.arcs.size())
        throw InvalidDiagram("traversal does not cover every arc (multiple components?)");
    if (!(next_along_curve(d, trav.back()) == d.basepoint))
        throw InvalidDiagram("traversal does not close up");
    // Sphere condition.
    FaceSet fs = faces(d);
    long euler = static_cast<long>(V) - static_cast<long>(d.arcs.size()) +
                 static_cast<long>(fs.count());
    if (euler != 2) throw InvalidDiagram("Euler characteristic " + std::to_string(euler));
    if (!d.crossings.count(d.outer_face.crossing) || d.outer_face.corner < 0 ||
        d.outer_face.corner > 3)
        throw InvalidDiagram("bad outer face corner");
}

inline bool is_valid(const Diagram& d) {
    try {
        validate(d);
        return true;
    } catch (const Error&) {
        return false;
    }
}

inline int outer_face_index(const Diagram& d, const FaceSet& fs) {
    return fs.face_of_corner(d.outer_face);
}

// Traversal direction of each arc (which dart the curve uses).
inline std::map<int, int> arc_directions(const Diagram& d) {
    std::map<int, int> out;
    for (const Dart& t : curve_traversal(d)) out[t.arc] = t.dir;
    return out;
}

// Exit port of the axis containing `port`, given curve directions.
inline int axis_exit_port(const Diagram& d, const std::map<int, int>& dirs, int cid, int port) {
    const Crossing& cr = d.crossings.at(cid);
    for (int p : {port, (port + 2) % 4}) {
        ArcEnd ae = cr.ports[p];
        // The curve leaves through p iff it traverses that arc starting at this end.
        if (dirs.at(ae.arc) == ae.end) return p;
    }
    throw InvalidDiagram("axis has no exit");
}

inline int crossing_sign(const Diagram& d, int cid) {
    auto it = d.crossings.find(cid);
    if (it == d.crossings.end()) throw UnknownCrossing(std::to_string(cid));
    auto dirs = arc_directions(d);
    int over_port = it->second.over_axis == 0 ? 0 : 1;
    int under_port = it->second.over_axis == 0 ? 1 : 0;
    int eo = axis_exit_port(d, dirs, cid, over_port);
    int eu = axis_exit_port(d, dirs, cid, under_port);
    return ((eu - eo) % 4 + 4) % 4 == 1 ? +1 : -1;
}

// Whitney's formula with a basepoint moved onto the outer face:
// w = mu + sum over crossings of the sign of (first-passage, second-passage).
inline int whitney_index(const Diagram& d) {
    if (d.trivial()) return d.trivial_whitney;
    FaceSet fs = faces(d);
    int outer = outer_face_index(d, fs);
    auto trav = curve_traversal(d);
    // First curve dart bordering the outer face.
    std::size_t start = trav.size();
    int mu = 0;
    for (std::size_t i = 0; i < trav.size(); ++i) {
        int lf = fs.face_of_dart(trav[i]);
        int rf = fs.face_of_dart(trav[i].reversed());
        if (rf == outer) {
            start = i;
            mu = +1;
            break;
        }
        if (lf == outer) {
            start = i;
            mu = -1;
            break;
        }
    }
    if (start == trav.size()) throw InvalidDiagram("outer face not adjacent to the curve");
    std::map<int, int> first_exit;
    int sum = 0;
    for (std::size_t k = 0; k < trav.size(); ++k) {
        const Dart& t = trav[(start + k) % trav.size()];
        PortRef h = d.head(t);
        int exit = (h.port + 2) % 4;
        auto it = first_exit.find(h.crossing);
        if (it == first_exit.end()) {
            first_exit[h.crossing] = exit;
        } else {
            // Sign of cross(second passage direction, first passage direction).
            sum += ((exit - it->second) % 4 + 4) % 4 == 3 ? +1 : -1;
        }
    }
    return mu + sum;
}

inline int writhe(const Diagram& d) {
    int w = 0;
    for (const auto& [cid, _] : d.crossings) w += crossing_sign(d, cid);
    return w;
}

// ---------------------------------------------------------------------------
// Canonical codes

// Traversal string from a given start dart; fully determines the diagram up
// to relabeling.  `flip_sides` encodes the mirrored rotation system.
inline std::string traversal_string(const Diagram& d, const FaceSet& fs, int outer, Dart start,
                                    bool flip_sides) {
    std::map<int, int> label;     // crossing id -> visit order
    std::map<int, int> first_exit;
    std::ostringstream os;
    Dart cur = start;
    for (std::size_t k = 0; k < 2 * d.crossings.size(); ++k) {
        PortRef h = d.head(cur);
        int exit = (h.port + 2) % 4;
        const Crossing& cr = d.crossings.at(h.crossing);
        bool over = (cr.over_axis == 0) == (h.port % 2 == 0);
        int lab;
        int side;  // exit offset of the other strand: 1 or 3
        auto it = label.find(h.crossing);
        if (it == label.end()) {
            lab = static_cast<int>(label.size());
            label[h.crossing] = lab;
            first_exit[h.crossing] = exit;
            side = 0;  // unknown until second visit; mark 0
        } else {
            lab = it->second;
            side = ((first_exit[h.crossing] - exit) % 4 + 4) % 4;
            if (flip_sides) side = 4 - side;
        }
        int ol = fs.face_of_dart(cur) == outer ? 1 : 0;
        int orr = fs.face_of_dart(cur.reversed()) == outer ? 1 : 0;
        if (flip_sides) std::swap(ol, orr);
        os << lab << (over ? 'O' : 'U') << side << ol << orr << ';';
        cur = d.dart_out_of({h.crossing, exit});
    }
    return os.str();
}

struct CanonicalCode {
    std::string code;
    std::string mirror_code;
    bool operator==(const CanonicalCode& o) const { return code == o.code; }
};

// Minimum traversal string over every start dart and both curve directions.
// Equal codes mean: same sphere map, same outer face, same over/under data,
// up to relabeling, rebasing and curve-orientation reversal.  The mirror
// code is the code of the reflected diagram.
inline CanonicalCode canonical_code(const Diagram& d) {
    if (d.trivial()) {
        CanonicalCode c;
        c.code = d.trivial_whitney > 0 ? "T:+1" : "T:-1";
        c.mirror_code = d.trivial_whitney > 0 ? "T:-1" : "T:+1";
        return c;
    }
    FaceSet fs = faces(d);
    int outer = outer_face_index(d, fs);
    CanonicalCode out;
    for (const auto& [aid, arc] : d.arcs) {
        for (int dir = 0; dir < 2; ++dir) {
            std::string s = traversal_string(d, fs, outer, {aid, dir}, false);
            if (out.code.empty() || s < out.code) out.code = s;
            std::string m = traversal_string(d, fs, outer, {aid, dir}, true);
            if (out.mirror_code.empty() || m < out.mirror_code) out.mirror_code = m;
        }
    }
    return out;
}

// Reflected diagram: reverses the cyclic port order (0,1,2,3) -> (0,3,2,1).
inline Diagram mirror(const Diagram& d) {
    if (d.trivial()) {
        Diagram m = d;
        m.trivial_whitney = -d.trivial_whitney;
        return m;
    }
    Diagram m = d;
    for (auto& [cid, cr] : m.crossings) {
        const Crossing& src = d.crossings.at(cid);
        for (int p = 0; p < 4; ++p) cr.ports[(4 - p) % 4] = src.ports[p];
    }
    for (auto& [aid, arc] : m.arcs)
        for (int e = 0; e < 2; ++e) arc.ends[e].port = (4 - arc.ends[e].port) % 4;
    m.outer_face.corner = (3 - d.outer_face.corner + 4) % 4;
    return m;
}

inline bool canonically_equal(const Diagram& a, const Diagram& b) {
    return canonical_code(a).code == canonical_code(b).code;
}

}  // namespace flatknot
