#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"

namespace flatknot {

// Reidemeister moves on diagrams.  Flat (regular-homotopy) legality is
// enforced by the site detectors: only coherent bigons can collapse, only
// non-cyclic trigons admit the triangle move.  R1 moves are provided for
// classical equivalence testing but are never "flat" moves.

enum class MoveKind { R1plus, R1minus, R2plus, R2minus, R3 };

inline const char* move_name(MoveKind k) {
    switch (k) {
        case MoveKind::R1plus: return "R1+";
        case MoveKind::R1minus: return "R1-";
        case MoveKind::R2plus: return "R2+";
        case MoveKind::R2minus: return "R2-";
        case MoveKind::R3: return "R3";
    }
    return "?";
}

struct MoveSite {
    MoveKind kind;
    std::vector<CornerRef> face;  // anchor corners for face-based sites
    int arc = -1;                 // R1plus arc; R2plus first arc
    int arc2 = -1;                // R2plus second arc (-1: self-fold)
    int curl = 0;                 // R1plus curl; fold side for self-folds
    bool over = false;            // R1plus: incoming passage over; R2plus: arc over arc2
};

struct MoveEvent {
    MoveSite site;
    std::vector<int> created, destroyed;  // crossing ids
    int step = -1;
};
using MoveLog = std::vector<MoveEvent>;

namespace detail {

// Tracks where consumed arc ends went during strand re-joining.
struct EndForward {
    std::map<std::pair<int, int>, ArcEnd> m;
    ArcEnd resolve(ArcEnd e) const {
        auto it = m.find({e.arc, e.end});
        while (it != m.end()) {
            e = it->second;
            it = m.find({e.arc, e.end});
        }
        return e;
    }
};

// Joins the strand across a removed crossing: ends x and y become interior
// points of a single arc.  Returns the surviving arc id, or -1 when the two
// ends belonged to one arc, which then closes into a free loop and is erased.
inline int join_ends(Diagram& d, ArcEnd x, ArcEnd y, EndForward& fwd) {
    x = fwd.resolve(x);
    y = fwd.resolve(y);
    if (x.arc == y.arc) {
        d.arcs.erase(x.arc);
        return -1;
    }
    PortRef far = d.arcs.at(y.arc).ends[1 - y.end];
    d.arcs.at(x.arc).ends[x.end] = far;
    if (d.crossings.count(far.crossing))
        d.crossings.at(far.crossing).ports[far.port] = ArcEnd{x.arc, x.end};
    fwd.m[{y.arc, 1 - y.end}] = ArcEnd{x.arc, x.end};
    d.arcs.erase(y.arc);
    return x.arc;
}

// Removes a crossing and reconnects both strands.  Returns the number of
// free loops formed (nonzero only when the diagram becomes trivial).
inline int dissolve(Diagram& d, int cid, EndForward& fwd) {
    Crossing cr = d.crossings.at(cid);
    d.crossings.erase(cid);
    int loops = 0;
    if (join_ends(d, cr.ports[0], cr.ports[2], fwd) < 0) ++loops;
    if (join_ends(d, cr.ports[1], cr.ports[3], fwd) < 0) ++loops;
    return loops;
}

inline void fix_basepoint(Diagram& d, const std::map<int, int>& old_dirs) {
    if (d.trivial()) return;
    if (d.arcs.count(d.basepoint.arc)) return;
    for (const auto& [aid, dir] : old_dirs)
        if (d.arcs.count(aid)) {
            d.basepoint = {aid, dir};
            return;
        }
    throw InvalidDiagram("no surviving arc for the basepoint");
}

// Re-expresses a dart of the pre-move diagram as a dart of the post-move
// diagram by following arc merges: a dart on a consumed arc becomes the dart
// on the surviving merged arc that traverses the same stretch in the same
// direction (so the same side faces the same region).  Returns arc -1 when
// the stretch disappeared entirely (closed off as a free loop).
inline Dart resolve_dart(const Diagram& d, const EndForward& fwd, Dart m) {
    for (int guard = 0; !d.arcs.count(m.arc); ++guard) {
        if (guard > 1000) return {-1, 0};
        auto it0 = fwd.m.find({m.arc, 0});
        auto it1 = fwd.m.find({m.arc, 1});
        if (it0 == fwd.m.end() && it1 == fwd.m.end()) return {-1, 0};
        int e = it0 != fwd.m.end() ? 0 : 1;  // the end that survived a join
        ArcEnd t = e == 0 ? it0->second : it1->second;
        // dart (arc, dir) runs ends[dir] -> ends[1-dir]; heading toward the
        // surviving end lands at end t.end of the merged arc.
        m = (1 - m.dir == e) ? Dart{t.arc, 1 - t.end} : Dart{t.arc, t.end};
    }
    return m;
}

// Transports the outer face across a crossing-destroying move: keep any of
// its corners at a surviving crossing, else find the merged region via a
// walk dart resolved through the arc merges.
inline void set_outer(Diagram& nd, const std::vector<CornerRef>& old_corners,
                      const std::vector<Dart>& old_walk, const EndForward& fwd) {
    if (nd.trivial()) return;
    for (const CornerRef& c : old_corners)
        if (nd.crossings.count(c.crossing)) {
            nd.outer_face = c;
            return;
        }
    FaceSet fs = faces(nd);
    for (const Dart& m : old_walk) {
        Dart r = resolve_dart(nd, fwd, m);
        if (r.arc < 0) continue;
        int f = fs.face_of_dart(r);
        nd.outer_face = fs.corners[static_cast<std::size_t>(f)].front();
        return;
    }
    throw InvalidDiagram("cannot transport the outer face");
}

// Is the strand of arc `a` the overpass at crossing c?
inline bool arc_over_at(const Diagram& d, int a, int cid) {
    const Crossing& cr = d.crossings.at(cid);
    for (int p = 0; p < 4; ++p)
        if (cr.ports[p].arc == a) return p % 2 == cr.over_axis;
    throw UnknownArc(std::to_string(a));
}

// Orientation of the small loop bounded by monogon face f.
inline int monogon_curl(const FaceSet& fs, int f, int outer, const std::map<int, int>& dirs) {
    Dart wd = fs.darts[static_cast<std::size_t>(f)][0];
    int s = dirs.at(wd.arc) == wd.dir ? +1 : -1;
    return f == outer ? -s : s;
}

// Locate the face whose corner set equals the site anchor; throws otherwise.
inline int locate_face(const Diagram& d, const FaceSet& fs, const MoveSite& site) {
    if (site.face.empty()) throw InadmissibleSite("site has no face anchor");
    const CornerRef& c0 = site.face.front();
    if (!d.crossings.count(c0.crossing)) throw InadmissibleSite("site crossing gone");
    int f = fs.face_of_corner(c0);
    std::set<CornerRef> have(fs.corners[static_cast<std::size_t>(f)].begin(),
                             fs.corners[static_cast<std::size_t>(f)].end());
    std::set<CornerRef> want(site.face.begin(), site.face.end());
    if (have != want) throw InadmissibleSite("face changed since the site was found");
    return f;
}

// Non-cyclic trigon pattern: per triangle arc (== strand), at how many of its
// two crossings the strand is the overpass.  The top strand (over at both) is
// the one that slides across the crossing of the other two.  Returns nullopt
// when the pattern is cyclic (every strand over exactly once).
struct TrigonPattern {
    int top_arc;
    int opposite;  // the crossing the top strand slides across
};

inline std::optional<TrigonPattern> trigon_pattern(const Diagram& d, const FaceSet& fs, int f) {
    const auto& walk = fs.darts[static_cast<std::size_t>(f)];
    std::set<int> cids;
    for (const CornerRef& c : fs.corners[static_cast<std::size_t>(f)]) cids.insert(c.crossing);
    if (cids.size() != 3) return std::nullopt;
    for (const Dart& w : walk) {
        int a = w.arc;
        std::array<int, 2> cs{d.arcs.at(a).ends[0].crossing, d.arcs.at(a).ends[1].crossing};
        int over_count = (arc_over_at(d, a, cs[0]) ? 1 : 0) + (arc_over_at(d, a, cs[1]) ? 1 : 0);
        if (over_count == 2) {
            int opp = -1;
            for (int c : cids)
                if (c != cs[0] && c != cs[1]) opp = c;
            return TrigonPattern{a, opp};
        }
    }
    return std::nullopt;  // cyclic: no strand is over at both its crossings
}

// Slides the crossing at one end of strand-arc `t` past the one at its other
// end, along the strand: the triangle arc moves to the opposite ports of its
// axis and the two outside continuations exchange crossings.
inline void slide_along(Diagram& d, int t) {
    PortRef e0 = d.arcs.at(t).ends[0], e1 = d.arcs.at(t).ends[1];
    ArcEnd o0 = d.crossings.at(e0.crossing).ports[(e0.port + 2) % 4];
    ArcEnd o1 = d.crossings.at(e1.crossing).ports[(e1.port + 2) % 4];
    auto put = [&](PortRef where, ArcEnd what) {
        d.crossings.at(where.crossing).ports[where.port] = what;
        d.arcs.at(what.arc).ends[what.end] = where;
    };
    // After the slide the strand meets its two crossings in the opposite
    // order, so the arc's ends swap crossings as well as moving to the
    // opposite ports of their axes.
    put({e0.crossing, (e0.port + 2) % 4}, ArcEnd{t, 1});
    put({e1.crossing, (e1.port + 2) % 4}, ArcEnd{t, 0});
    put(e0, o1);
    put(e1, o0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Site enumeration

inline std::vector<MoveSite> find_moves(const Diagram& d,
                                        const std::set<MoveKind>& kinds = {
                                            MoveKind::R1plus, MoveKind::R1minus, MoveKind::R2plus,
                                            MoveKind::R2minus, MoveKind::R3}) {
    std::vector<MoveSite> out;
    if (d.trivial()) {
        if (kinds.count(MoveKind::R1plus))
            for (int curl : {+1, -1})
                for (bool over : {false, true})
                    out.push_back({MoveKind::R1plus, {}, -1, -1, curl, over});
        if (kinds.count(MoveKind::R2plus))
            for (bool over : {false, true})
                out.push_back({MoveKind::R2plus, {}, -1, -1, +1, over});
        return out;
    }
    FaceSet fs = faces(d);
    int nf = static_cast<int>(fs.count());
    if (kinds.count(MoveKind::R1minus))
        for (int f = 0; f < nf; ++f)
            if (fs.degree(f) == 1)
                out.push_back({MoveKind::R1minus, fs.corners[static_cast<std::size_t>(f)]});
    if (kinds.count(MoveKind::R2minus))
        for (int f = 0; f < nf; ++f) {
            if (fs.degree(f) != 2) continue;
            if (f == outer_face_index(d, fs)) continue;  // unbounded sweep region
            const auto& cs = fs.corners[static_cast<std::size_t>(f)];
            if (cs[0].crossing == cs[1].crossing) continue;
            int a = fs.darts[static_cast<std::size_t>(f)][0].arc;
            if (detail::arc_over_at(d, a, cs[0].crossing) !=
                detail::arc_over_at(d, a, cs[1].crossing))
                continue;  // interleaved bigon: not a flat cancellation site
            out.push_back({MoveKind::R2minus, cs});
        }
    if (kinds.count(MoveKind::R3))
        for (int f = 0; f < nf; ++f) {
            if (fs.degree(f) != 3) continue;
            if (f == outer_face_index(d, fs)) continue;  // unbounded sweep region
            if (!detail::trigon_pattern(d, fs, f)) continue;
            out.push_back({MoveKind::R3, fs.corners[static_cast<std::size_t>(f)]});
        }
    if (kinds.count(MoveKind::R1plus))
        for (const auto& [aid, arc] : d.arcs)
            for (int curl : {+1, -1})
                for (bool over : {false, true})
                    out.push_back({MoveKind::R1plus, {}, aid, -1, curl, over});
    if (kinds.count(MoveKind::R2plus))
        for (int f = 0; f < nf; ++f) {
            const auto& walk = fs.darts[static_cast<std::size_t>(f)];
            for (std::size_t i = 0; i < walk.size(); ++i)
                for (std::size_t j = i + 1; j < walk.size(); ++j) {
                    if (walk[i].arc == walk[j].arc) continue;
                    for (bool over : {false, true})
                        out.push_back({MoveKind::R2plus, fs.corners[static_cast<std::size_t>(f)],
                                       walk[i].arc, walk[j].arc, 0, over});
                }
        }
    return out;
}

// ---------------------------------------------------------------------------
// Application

namespace detail {

inline std::pair<Diagram, MoveEvent> apply_r1minus(const Diagram& d, const MoveSite& site) {
    FaceSet fs = faces(d);
    int f = locate_face(d, fs, site);
    if (fs.degree(f) != 1) throw InadmissibleSite("not a monogon");
    int cid = site.face.front().crossing;
    auto dirs = arc_directions(d);
    int outer = outer_face_index(d, fs);
    int curl = monogon_curl(fs, f, outer, dirs);
    int w_before = whitney_index(d);
    Diagram nd = d;
    EndForward fwd;
    dissolve(nd, cid, fwd);
    if (nd.crossings.empty()) {
        nd.arcs.clear();
        nd.trivial_whitney = w_before - curl;
    } else {
        fix_basepoint(nd, dirs);
        set_outer(nd, fs.corners[static_cast<std::size_t>(outer)],
                  fs.darts[static_cast<std::size_t>(outer)], fwd);
    }
    validate(nd);
    return {nd, MoveEvent{site, {}, {cid}}};
}

inline std::pair<Diagram, MoveEvent> apply_r2minus(const Diagram& d, const MoveSite& site) {
    FaceSet fs = faces(d);
    int f = locate_face(d, fs, site);
    if (fs.degree(f) != 2) throw InadmissibleSite("not a bigon");
    const auto& cs = fs.corners[static_cast<std::size_t>(f)];
    int c1 = cs[0].crossing, c2 = cs[1].crossing;
    if (c1 == c2) throw InadmissibleSite("bigon at a single crossing");
    int a = fs.darts[static_cast<std::size_t>(f)][0].arc;
    if (arc_over_at(d, a, c1) != arc_over_at(d, a, c2))
        throw InadmissibleSite("interleaved bigon cannot collapse flatly");
    auto dirs = arc_directions(d);
    int outer = outer_face_index(d, fs);
    if (outer == f)
        throw InadmissibleSite(
            "the bigon is the outer face: the collapse would sweep an unbounded region");
    int w_before = whitney_index(d);
    Diagram nd = d;
    EndForward fwd;
    dissolve(nd, c1, fwd);
    dissolve(nd, c2, fwd);
    if (nd.crossings.empty()) {
        nd.arcs.clear();
        nd.trivial_whitney = w_before;
    } else {
        fix_basepoint(nd, dirs);
        set_outer(nd, fs.corners[static_cast<std::size_t>(outer)],
                  fs.darts[static_cast<std::size_t>(outer)], fwd);
    }
    validate(nd);
    return {nd, MoveEvent{site, {}, {c1, c2}}};
}

inline std::pair<Diagram, MoveEvent> apply_r3(const Diagram& d, const MoveSite& site) {
    FaceSet fs = faces(d);
    int f = locate_face(d, fs, site);
    if (fs.degree(f) != 3) throw InadmissibleSite("not a trigon");
    auto pat = trigon_pattern(d, fs, f);
    if (!pat) throw InadmissibleSite("cyclic trigon cannot slide flatly");
    std::set<int> tri_crossings, tri_arcs;
    for (const CornerRef& c : fs.corners[static_cast<std::size_t>(f)])
        tri_crossings.insert(c.crossing);
    for (const Dart& w : fs.darts[static_cast<std::size_t>(f)]) tri_arcs.insert(w.arc);
    int outer = outer_face_index(d, fs);
    if (outer == f)
        throw InadmissibleSite(
            "the trigon is the outer face: the slide would sweep an unbounded region");

    Diagram nd = d;
    // As the top strand crosses to the other side of the opposite crossing,
    // the two strands it meets swap left and right.  Every one of the three
    // strand germs therefore exchanges the order of its two triangle
    // crossings, so every triangle side slides.
    for (int a : tri_arcs) slide_along(nd, a);

    // Outer face transport.
    bool placed = false;
    for (const CornerRef& c : fs.corners[static_cast<std::size_t>(outer)])
        if (!tri_crossings.count(c.crossing)) {
            nd.outer_face = c;
            placed = true;
            break;
        }
    if (!placed) {
        for (const Dart& w : fs.darts[static_cast<std::size_t>(outer)])
            if (!tri_arcs.count(w.arc)) {
                FaceSet nfs = faces(nd);
                int g = nfs.face_of_dart(w);
                nd.outer_face = nfs.corners[static_cast<std::size_t>(g)].front();
                placed = true;
                break;
            }
    }
    if (!placed) {
        // The outer face is bounded by the triangle arcs alone yet is not the
        // trigon: a co-trigon on the far sides of the three arcs.  Its region
        // persists; pick the unique face that keeps the turning number.
        FaceSet nfs = faces(nd);
        int want = whitney_index(d);
        int hit = -1;
        for (std::size_t g = 0; g < nfs.count(); ++g) {
            Diagram e = nd;
            e.outer_face = nfs.corners[g].front();
            if (whitney_index(e) == want) {
                if (hit >= 0) throw InvalidDiagram("ambiguous outer-face transport");
                hit = static_cast<int>(g);
            }
        }
        if (hit < 0) throw InvalidDiagram("cannot transport the outer face across the slide");
        nd.outer_face = nfs.corners[static_cast<std::size_t>(hit)].front();
        placed = true;
    }
    validate(nd);
    return {nd, MoveEvent{site, {}, {}}};
}

inline std::pair<Diagram, MoveEvent> apply_r1plus(const Diagram& d, const MoveSite& site) {
    if (site.curl != 1 && site.curl != -1) throw InadmissibleSite("curl must be +1 or -1");
    int e2 = site.curl > 0 ? 3 : 1;
    Diagram nd = d;
    if (d.trivial()) {
        int cid = 0, g = 0, l = 1;
        Crossing cr;
        cr.over_axis = site.over ? 0 : 1;
        cr.ports[2] = {g, 1};
        cr.ports[0] = {l, 0};
        cr.ports[(e2 + 2) % 4] = {l, 1};
        cr.ports[e2] = {g, 0};
        nd.crossings[cid] = cr;
        nd.arcs[g] = Arc{{PortRef{cid, e2}, PortRef{cid, 2}}};
        nd.arcs[l] = Arc{{PortRef{cid, 0}, PortRef{cid, (e2 + 2) % 4}}};
        nd.basepoint = {g, 0};
        int want = d.trivial_whitney + site.curl;
        FaceSet fs = faces(nd);
        bool placed = false;
        for (std::size_t f = 0; f < fs.count() && !placed; ++f) {
            nd.outer_face = fs.corners[f].front();
            if (whitney_index(nd) == want) placed = true;
        }
        if (!placed) throw InvalidDiagram("no outer face realizes the kinked unknot");
        validate(nd);
        return {nd, MoveEvent{site, {0}, {}}};
    }
    if (!d.arcs.count(site.arc)) throw UnknownArc(std::to_string(site.arc));
    auto dirs = arc_directions(d);
    int a = site.arc, da = dirs.at(a);
    int cid = nd.fresh_crossing_id();
    int l = nd.fresh_arc_id(), a2 = l + 1;
    PortRef old_head = d.arcs.at(a).ends[1 - da];
    Crossing cr;
    cr.over_axis = site.over ? 0 : 1;
    cr.ports[2] = {a, 1 - da};
    cr.ports[0] = {l, 0};
    cr.ports[(e2 + 2) % 4] = {l, 1};
    cr.ports[e2] = {a2, 0};
    nd.crossings[cid] = cr;
    nd.arcs.at(a).ends[1 - da] = {cid, 2};
    nd.arcs[l] = Arc{{PortRef{cid, 0}, PortRef{cid, (e2 + 2) % 4}}};
    nd.arcs[a2] = Arc{{PortRef{cid, e2}, old_head}};
    nd.crossings.at(old_head.crossing).ports[old_head.port] = {a2, 1};
    // A split never destroys the old outer anchor.
    validate(nd);
    return {nd, MoveEvent{site, {cid}, {}}};
}

// Self-fold: pushes a tongue of one strand across itself, creating a nested
// pair of opposite kinks (two crossings, one coherent bigon).  With no
// crossings this is the fold of the trivial diagram.
inline std::pair<Diagram, MoveEvent> apply_fold(const Diagram& d, const MoveSite& site) {
    Diagram nd;
    if (d.trivial()) {
        int c1 = 0, c2 = 1, u = 0, ma = 1, mb = 2, v = 3;
        Crossing x1, x2;
        x1.over_axis = site.over ? 1 : 0;  // tongue strand runs on axis (1,3)
        x2.over_axis = site.over ? 1 : 0;
        x1.ports = {ArcEnd{mb, 1}, ArcEnd{ma, 0}, ArcEnd{u, 0}, ArcEnd{u, 1}};
        x2.ports = {ArcEnd{v, 1}, ArcEnd{ma, 1}, ArcEnd{mb, 0}, ArcEnd{v, 0}};
        nd.crossings[c1] = x1;
        nd.crossings[c2] = x2;
        nd.arcs[u] = Arc{{PortRef{c1, 2}, PortRef{c1, 3}}};
        nd.arcs[ma] = Arc{{PortRef{c1, 1}, PortRef{c2, 1}}};
        nd.arcs[mb] = Arc{{PortRef{c2, 2}, PortRef{c1, 0}}};
        nd.arcs[v] = Arc{{PortRef{c2, 3}, PortRef{c2, 0}}};
        nd.basepoint = {u, 0};
        if (d.trivial_whitney < 0) nd = mirror(nd);
        FaceSet fs = faces(nd);
        bool placed = false;
        for (std::size_t f = 0; f < fs.count() && !placed; ++f) {
            nd.outer_face = fs.corners[f].front();
            if (whitney_index(nd) == d.trivial_whitney && fs.degree(static_cast<int>(f)) == 4)
                placed = true;
        }
        if (!placed) throw InvalidDiagram("no outer face realizes the folded unknot");
        validate(nd);
        return {nd, MoveEvent{site, {c1, c2}, {}}};
    }
    if (!d.arcs.count(site.arc)) throw UnknownArc(std::to_string(site.arc));
    nd = d;
    auto dirs = arc_directions(d);
    int a = site.arc, da = dirs.at(a);
    int c1 = nd.fresh_crossing_id(), c2 = c1 + 1;
    int a2 = nd.fresh_arc_id(), ma = a2 + 1, mb = a2 + 2, v = a2 + 3;
    PortRef old_head = d.arcs.at(a).ends[1 - da];
    Crossing x1, x2;
    x1.over_axis = site.over ? 0 : 1;  // returning tongue runs on axis (0,2) at c1
    x2.over_axis = site.over ? 0 : 1;
    auto place = [&](Crossing& cr, std::array<ArcEnd, 4> table) {
        if (site.curl >= 0) {
            cr.ports = table;
        } else {
            for (int p = 0; p < 4; ++p) cr.ports[p] = table[static_cast<std::size_t>((4 - p) % 4)];
        }
    };
    place(x1, {ArcEnd{mb, 1}, ArcEnd{ma, 0}, ArcEnd{a2, 0}, ArcEnd{a, 1 - da}});
    place(x2, {ArcEnd{v, 1}, ArcEnd{ma, 1}, ArcEnd{mb, 0}, ArcEnd{v, 0}});
    nd.crossings[c1] = x1;
    nd.crossings[c2] = x2;
    auto port_of = [&](int cid, int arc_id, int end) {
        const Crossing& cr = nd.crossings.at(cid);
        for (int p = 0; p < 4; ++p)
            if (cr.ports[p] == ArcEnd{arc_id, end}) return PortRef{cid, p};
        throw InvalidDiagram("fold table inconsistency");
    };
    nd.arcs.at(a).ends[1 - da] = port_of(c1, a, 1 - da);
    nd.arcs[a2] = Arc{{port_of(c1, a2, 0), old_head}};
    nd.arcs[ma] = Arc{{port_of(c1, ma, 0), port_of(c2, ma, 1)}};
    nd.arcs[mb] = Arc{{port_of(c2, mb, 0), port_of(c1, mb, 1)}};
    nd.arcs[v] = Arc{{port_of(c2, v, 0), port_of(c2, v, 1)}};
    nd.crossings.at(old_head.crossing).ports[old_head.port] = {a2, 1};
    validate(nd);
    return {nd, MoveEvent{site, {c1, c2}, {}}};
}

inline std::pair<Diagram, MoveEvent> apply_r2plus(const Diagram& d, const MoveSite& site) {
    if (site.arc2 < 0) return apply_fold(d, site);
    FaceSet fs = faces(d);
    int f = locate_face(d, fs, site);
    if (!d.arcs.count(site.arc) || !d.arcs.count(site.arc2))
        throw UnknownArc(std::to_string(site.arc < 0 ? site.arc : site.arc2));
    if (site.arc == site.arc2) throw InadmissibleSite("overlap needs two distinct arcs");
    Dart d_a, d_b;
    bool found_a = false, found_b = false;
    for (const Dart& w : fs.darts[static_cast<std::size_t>(f)]) {
        if (w.arc == site.arc && !found_a) {
            d_a = w;
            found_a = true;
        } else if (w.arc == site.arc2 && !found_b) {
            d_b = w;
            found_b = true;
        }
    }
    if (!found_a || !found_b) throw InadmissibleSite("arcs do not bound the site face");
    Diagram nd = d;
    int a = site.arc, b = site.arc2;
    int da = d_a.dir, db = d_b.dir;
    int c1 = nd.fresh_crossing_id(), c2 = c1 + 1;
    int a2 = nd.fresh_arc_id(), b2 = a2 + 1, ma = a2 + 2, mb = a2 + 3;
    PortRef a_head = d.arcs.at(a).ends[1 - da];
    PortRef b_head = d.arcs.at(b).ends[1 - db];
    Crossing x1, x2;
    x1.over_axis = site.over ? 1 : 0;  // strand of `a` runs on axis (1,3)
    x2.over_axis = site.over ? 1 : 0;
    x1.ports = {ArcEnd{mb, 1}, ArcEnd{ma, 0}, ArcEnd{b2, 0}, ArcEnd{a, 1 - da}};
    x2.ports = {ArcEnd{b, 1 - db}, ArcEnd{ma, 1}, ArcEnd{mb, 0}, ArcEnd{a2, 0}};
    nd.crossings[c1] = x1;
    nd.crossings[c2] = x2;
    nd.arcs.at(a).ends[1 - da] = {c1, 3};
    nd.arcs.at(b).ends[1 - db] = {c2, 0};
    nd.arcs[a2] = Arc{{PortRef{c2, 3}, a_head}};
    nd.arcs[b2] = Arc{{PortRef{c1, 2}, b_head}};
    nd.arcs[ma] = Arc{{PortRef{c1, 1}, PortRef{c2, 1}}};
    nd.arcs[mb] = Arc{{PortRef{c2, 2}, PortRef{c1, 0}}};
    nd.crossings.at(a_head.crossing).ports[a_head.port] = {a2, 1};
    nd.crossings.at(b_head.crossing).ports[b_head.port] = {b2, 1};
    validate(nd);
    return {nd, MoveEvent{site, {c1, c2}, {}}};
}

}  // namespace detail

inline std::pair<Diagram, MoveEvent> apply_move(const Diagram& d, const MoveSite& site) {
    switch (site.kind) {
        case MoveKind::R1minus: return detail::apply_r1minus(d, site);
        case MoveKind::R2minus: return detail::apply_r2minus(d, site);
        case MoveKind::R3: return detail::apply_r3(d, site);
        case MoveKind::R1plus: return detail::apply_r1plus(d, site);
        case MoveKind::R2plus: return detail::apply_r2plus(d, site);
    }
    throw InadmissibleSite("unknown move kind");
}

inline Diagram add_kink(const Diagram& d, int arc, int curl, bool over) {
    return apply_move(d, {MoveKind::R1plus, {}, arc, -1, curl, over}).first;
}

// Creates a nested pair of opposite-curl kinks on `arc` using a single
// strand-with-itself overlap; the log records the composing flat moves.
inline std::pair<Diagram, MoveLog> whitney_trick_create(const Diagram& d, int arc, int side = +1,
                                                        bool over = true) {
    MoveSite site{MoveKind::R2plus, {}, arc, -1, side, over};
    auto [nd, ev] = detail::apply_fold(d, site);
    return {nd, MoveLog{ev}};
}

// Cancels an adjacent opposite pair of kinks: the two crossings must bound a
// coherent bigon, with a monogon hanging off each crossing.
inline std::pair<Diagram, MoveLog> whitney_trick_cancel(const Diagram& d, int ca, int cb) {
    if (!d.crossings.count(ca) || !d.crossings.count(cb) || ca == cb)
        throw InadmissibleSite("need two distinct crossings");
    FaceSet fs = faces(d);
    auto has_monogon = [&](int c) {
        for (int k = 0; k < 4; ++k)
            if (fs.degree(fs.face_of_corner({c, k})) == 1) return true;
        return false;
    };
    if (!has_monogon(ca) && !has_monogon(cb))
        throw InadmissibleSite("crossings do not carry kinks");
    for (std::size_t f = 0; f < fs.count(); ++f) {
        if (fs.degree(static_cast<int>(f)) != 2) continue;
        const auto& cs = fs.corners[f];
        std::set<int> got{cs[0].crossing, cs[1].crossing};
        if (got != std::set<int>{ca, cb}) continue;
        MoveSite site{MoveKind::R2minus, cs};
        auto [nd, ev] = detail::apply_r2minus(d, site);  // rejects interleaved pairs
        return {nd, MoveLog{ev}};
    }
    throw InadmissibleSite("kinks are not adjacent");
}

}  // namespace flatknot
