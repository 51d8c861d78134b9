#pragma once

#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"

namespace flatknot {

namespace detail {
struct GaussToken {
    bool over;
    int id;
    int sign;
};

inline std::vector<GaussToken> tokenize_gauss(const std::string& text) {
    std::istringstream is(text);
    std::string tok;
    std::vector<GaussToken> out;
    while (is >> tok) {
        if (tok.size() < 3) throw BadToken(tok);
        char kind = static_cast<char>(std::toupper(tok.front()));
        char sign = tok.back();
        if ((kind != 'O' && kind != 'U') || (sign != '+' && sign != '-')) throw BadToken(tok);
        std::string num = tok.substr(1, tok.size() - 2);
        for (char ch : num)
            if (!std::isdigit(static_cast<unsigned char>(ch))) throw BadToken(tok);
        out.push_back({kind == 'O', std::stoi(num), sign == '+' ? +1 : -1});
    }
    return out;
}
}  // namespace detail

// Signed Gauss code -> Diagram.  The signs determine the rotation at every
// crossing, so the sphere-realizable assignment, when it exists, is unique.
// The outer face is chosen deterministically: a maximum-degree face,
// tie-broken by minimal canonical code.
inline Diagram parse_gauss(const std::string& text) {
    auto toks = detail::tokenize_gauss(text);
    if (toks.empty()) throw BadToken("empty code");
    // Balance check: each id once O and once U, equal signs.
    std::map<int, std::vector<std::size_t>> occ;
    for (std::size_t i = 0; i < toks.size(); ++i) occ[toks[i].id].push_back(i);
    for (auto& [id, pos] : occ) {
        if (pos.size() != 2 || toks[pos[0]].over == toks[pos[1]].over)
            throw UnbalancedCode("crossing " + std::to_string(id));
        if (toks[pos[0]].sign != toks[pos[1]].sign)
            throw SignMismatch("crossing " + std::to_string(id));
    }
    std::size_t n2 = toks.size();
    if (n2 != 2 * occ.size()) throw UnbalancedCode("token count");
    int n = static_cast<int>(occ.size());

    Diagram d;
    // Arc k runs from passage k to passage k+1 (cyclic); end 0 at passage k+1?
    // Convention: arc k: end0 leaves passage k, end1 arrives at passage k+1.
    for (int k = 0; k < 2 * n; ++k) d.arcs[k] = Arc{};
    std::map<int, int> cid_of;  // external id -> internal crossing id
    int next_cid = 0;
    for (auto& [id, pos] : occ) cid_of[id] = next_cid++;
    for (auto& [id, pos] : occ) {
        int cid = cid_of[id];
        std::size_t p1 = pos[0], p2 = pos[1];
        int sign = toks[p1].sign;
        // First passage on axis (0,2): enters port 2, exits port 0.
        // Second passage on axis (1,3): exit port from the sign convention
        // sign = +1 iff under-exit is one counterclockwise step from over-exit.
        int e2;
        if (toks[p1].over)
            e2 = sign > 0 ? 1 : 3;
        else
            e2 = sign > 0 ? 3 : 1;
        Crossing cr;
        cr.over_axis = toks[p1].over ? 0 : 1;
        auto in_arc = [&](std::size_t pass) { return static_cast<int>((pass + 2 * n - 1) % (2 * n)); };
        auto out_arc = [&](std::size_t pass) { return static_cast<int>(pass); };
        cr.ports[2] = {in_arc(p1), 1};
        cr.ports[0] = {out_arc(p1), 0};
        cr.ports[(e2 + 2) % 4] = {in_arc(p2), 1};
        cr.ports[e2] = {out_arc(p2), 0};
        d.crossings[cid] = cr;
        d.arcs[in_arc(p1)].ends[1] = {cid, 2};
        d.arcs[out_arc(p1)].ends[0] = {cid, 0};
        d.arcs[in_arc(p2)].ends[1] = {cid, (e2 + 2) % 4};
        d.arcs[out_arc(p2)].ends[0] = {cid, e2};
    }
    d.basepoint = {static_cast<int>(2 * n - 1), 0};  // the arc entering the first passage
    // Sphere check; outer face choice.
    d.outer_face = {0, 0};  // placeholder for face computation
    FaceSet fs = faces(d);
    long euler = static_cast<long>(n) - static_cast<long>(2 * n) + static_cast<long>(fs.count());
    if (euler != 2) throw NotRealizable("code is not planar (Euler " + std::to_string(euler) + ")");
    int maxdeg = 0;
    for (std::size_t f = 0; f < fs.count(); ++f) maxdeg = std::max(maxdeg, fs.degree(static_cast<int>(f)));
    std::string best;
    CornerRef best_corner;
    for (std::size_t f = 0; f < fs.count(); ++f) {
        if (fs.degree(static_cast<int>(f)) != maxdeg) continue;
        Diagram cand = d;
        cand.outer_face = fs.corners[f].front();
        std::string code = canonical_code(cand).code;
        if (best.empty() || code < best) {
            best = code;
            best_corner = cand.outer_face;
        }
    }
    d.outer_face = best_corner;
    validate(d);
    return d;
}

// Diagram -> signed Gauss code, crossings renumbered 1..n in first-visit
// order from the basepoint.  Trivial diagrams have no Gauss code; an empty
// string is returned.
inline std::string serialize_gauss(const Diagram& d) {
    if (d.trivial()) return "";
    auto trav = curve_traversal(d);
    std::map<int, int> label, sign;
    std::ostringstream os;
    bool first = true;
    for (const Dart& t : trav) {
        PortRef h = d.head(t);
        const Crossing& cr = d.crossings.at(h.crossing);
        bool over = (cr.over_axis == 0) == (h.port % 2 == 0);
        if (!label.count(h.crossing)) {
            label[h.crossing] = static_cast<int>(label.size()) + 1;
            sign[h.crossing] = crossing_sign(d, h.crossing);
        }
        if (!first) os << ' ';
        first = false;
        os << (over ? 'O' : 'U') << label[h.crossing] << (sign[h.crossing] > 0 ? '+' : '-');
    }
    return os.str();
}

}  // namespace flatknot
