#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"
#include "flatknot/invariants.hpp"
#include "flatknot/moves.hpp"

namespace flatknot {

// Bounded brute-force decision of flat isotopy (plane moves R2/R3 only, or
// classical equivalence with R1 allowed), plus the same-knot pipeline that
// equalizes Whitney indices first.

struct SearchBudget {
    int max_crossings = 8;       // raised to the inputs' sizes if smaller
    long max_states = 20000;     // total states across both search sides
    int max_moves_per_path = 24; // combined path length bound
};

struct IsotopyVerdict {
    enum class Status { equivalent, distinct, unresolved };
    Status status = Status::unresolved;
    MoveLog path;               // equivalent: replayable start -> target
    std::string witness;        // distinct: the separating invariant's name
    std::string witness_values; // distinct: "lhs vs rhs"
    std::string note;           // unresolved reason / caveats
    long states = 0;            // states visited by the search
    int exit_code() const {
        switch (status) {
            case Status::equivalent: return 0;
            case Status::distinct: return 1;
            case Status::unresolved: return 2;
        }
        return 2;
    }
};

// Replays a move path; the verdict contract is that this maps the start
// diagram's canonical code onto the target's.
inline Diagram replay_path(Diagram d, const MoveLog& path) {
    for (const MoveEvent& e : path) d = apply_move(d, e.site).first;
    return d;
}

namespace detail {

// All one-move successors inside the crossing budget.  find_moves covers
// R2plus only for distinct arc pairs; the self-fold (a strand overlapping
// itself) is an equally legal plane move and is enumerated here so that the
// move graph is closed under inverses (a fold's bigon collapses by R2minus).
inline std::vector<std::pair<Diagram, MoveEvent>> search_neighbors(const Diagram& d,
                                                                   bool allow_r1,
                                                                   int max_crossings) {
    std::set<MoveKind> kinds{MoveKind::R2minus, MoveKind::R3};
    bool can_grow2 = d.n_crossings() + 2 <= max_crossings;
    if (can_grow2) kinds.insert(MoveKind::R2plus);
    if (allow_r1) {
        kinds.insert(MoveKind::R1minus);
        if (d.n_crossings() + 1 <= max_crossings) kinds.insert(MoveKind::R1plus);
    }
    std::vector<MoveSite> sites = find_moves(d, kinds);
    if (can_grow2 && !d.trivial())
        for (const auto& [aid, arc] : d.arcs)
            for (int curl : {+1, -1})
                for (bool over : {false, true})
                    sites.push_back({MoveKind::R2plus, {}, aid, -1, curl, over});
    std::vector<std::pair<Diagram, MoveEvent>> out;
    for (const MoveSite& s : sites) {
        try {
            out.push_back(apply_move(d, s));
        } catch (const Error&) {
            // sites that race with each other in enumeration order are skipped
        }
    }
    return out;
}

struct SearchNode {
    Diagram d;
    MoveLog path;  // from that side's root
    int depth = 0;
};

}  // namespace detail

inline IsotopyVerdict flat_isotopic(const Diagram& d1, const Diagram& d2,
                                    const SearchBudget& budget = {}, bool allow_r1 = false) {
    validate(d1);
    validate(d2);
    SearchBudget b = budget;
    b.max_crossings = std::max({b.max_crossings, d1.n_crossings(), d2.n_crossings()});
    IsotopyVerdict v;

    // Invariant prefilter: certified separations, no search needed.  Only
    // valid for plane moves; with R1 allowed none of these is invariant.
    if (!allow_r1) {
        int w1 = whitney_index(d1), w2 = whitney_index(d2);
        if (w1 != w2) {
            v.status = IsotopyVerdict::Status::distinct;
            v.witness = "whitney";
            v.witness_values = std::to_string(w1) + " vs " + std::to_string(w2);
            return v;
        }
        int r1 = writhe(d1), r2 = writhe(d2);
        if (r1 != r2) {
            v.status = IsotopyVerdict::Status::distinct;
            v.witness = "writhe";
            v.witness_values = std::to_string(r1) + " vs " + std::to_string(r2);
            return v;
        }
        try {
            LaurentPoly b1 = kauffman_bracket(d1, 16), b2 = kauffman_bracket(d2, 16);
            if (b1 != b2) {
                v.status = IsotopyVerdict::Status::distinct;
                v.witness = "bracket";
                v.witness_values = b1.str() + " vs " + b2.str();
                return v;
            }
        } catch (const TooManyCrossings&) {
            // bracket prefilter skipped above its state-sum cap
        }
    }

    std::string code1 = canonical_code(d1).code, code2 = canonical_code(d2).code;
    if (code1 == code2) {
        v.status = IsotopyVerdict::Status::equivalent;
        return v;
    }

    // Bidirectional breadth-first search with canonical-code deduplication.
    // The backward half only needs reachability depths: the move set is
    // closed under inverses, so once the frontiers meet, a forward path down
    // the backward depth field reconstructs explicit applicable moves.
    std::map<std::string, detail::SearchNode> vis[2];
    std::vector<std::string> frontier[2];
    vis[0][code1] = {d1, {}, 0};
    vis[1][code2] = {d2, {}, 0};
    frontier[0] = {code1};
    frontier[1] = {code2};
    int depth[2] = {0, 0};
    v.states = 2;

    auto finish = [&](const std::string& meet) {
        detail::SearchNode cur = vis[0].at(meet);
        int k = vis[1].at(meet).depth;
        while (k > 0) {
            const std::string* best_code = nullptr;
            std::pair<Diagram, MoveEvent> best;
            for (auto& [nd, ev] : detail::search_neighbors(cur.d, allow_r1, b.max_crossings)) {
                std::string c = canonical_code(nd).code;
                auto it = vis[1].find(c);
                if (it == vis[1].end() || it->second.depth != k - 1) continue;
                if (!best_code || c < *best_code) {
                    best = {nd, ev};
                    best_code = &it->first;
                }
            }
            if (!best_code) throw InvalidDiagram("isotopy path reconstruction failed");
            cur.d = best.first;
            cur.path.push_back(best.second);
            --k;
        }
        for (std::size_t i = 0; i < cur.path.size(); ++i)
            cur.path[i].step = static_cast<int>(i);
        v.status = IsotopyVerdict::Status::equivalent;
        v.path = std::move(cur.path);
    };

    while (!frontier[0].empty() && !frontier[1].empty()) {
        if (depth[0] + depth[1] >= b.max_moves_per_path || v.states >= b.max_states) break;
        int s = frontier[0].size() <= frontier[1].size() ? 0 : 1;
        std::vector<std::string> next;
        for (const std::string& code : frontier[s]) {
            const detail::SearchNode parent = vis[s].at(code);
            for (auto& [nd, ev] : detail::search_neighbors(parent.d, allow_r1, b.max_crossings)) {
                std::string c = canonical_code(nd).code;
                if (vis[s].count(c)) continue;
                detail::SearchNode node{std::move(nd), parent.path, parent.depth + 1};
                node.path.push_back(ev);
                vis[s].emplace(c, std::move(node));
                next.push_back(c);
                ++v.states;
                if (vis[1 - s].count(c)) {
                    finish(c);
                    return v;
                }
                if (v.states >= b.max_states) break;
            }
            if (v.states >= b.max_states) break;
        }
        std::sort(next.begin(), next.end());
        frontier[s] = std::move(next);
        ++depth[s];
    }
    v.status = IsotopyVerdict::Status::unresolved;
    v.note = v.states >= b.max_states          ? "state budget exhausted"
             : depth[0] + depth[1] >= b.max_moves_per_path ? "path-length budget exhausted"
                                               : "move graph exhausted within the crossing bound";
    return v;
}

// ---------------------------------------------------------------------------
// Whitney-index equalization

struct EqualizeReport {
    int modified = 0;  // 1 or 2: which input received kinks; 0: none
    MoveLog insertions;
};

namespace detail {

inline Diagram add_outer_kink(const Diagram& d, int curl, bool over, MoveLog& log) {
    int arc = -1;  // the trivial diagram needs no site arc
    if (!d.trivial()) {
        FaceSet fs = faces(d);
        arc = fs.darts[static_cast<std::size_t>(outer_face_index(d, fs))].front().arc;
    }
    auto [nd, ev] = apply_move(d, {MoveKind::R1plus, {}, arc, -1, curl, over});
    log.push_back(ev);
    return nd;
}

}  // namespace detail

// Adds |Δw| little loops to one diagram so both have the same Whitney index.
// The simpler diagram (fewer crossings; ties go to the first) receives the
// kinks, each of curl sign(w_other − w_self), on an outer-face arc so the
// insertions never disturb bounded structure.  Kinks change neither the knot
// type nor the realizability of the pair comparison.
inline std::tuple<Diagram, Diagram, EqualizeReport> equalize_whitney(const Diagram& d1,
                                                                     const Diagram& d2,
                                                                     bool over = true) {
    Diagram a = d1, b = d2;
    EqualizeReport rep;
    int w1 = whitney_index(a), w2 = whitney_index(b);
    if (w1 == w2) return {a, b, rep};
    bool first = d1.n_crossings() <= d2.n_crossings();
    Diagram& target = first ? a : b;
    int self = first ? w1 : w2, other = first ? w2 : w1;
    int curl = other > self ? +1 : -1;
    rep.modified = first ? 1 : 2;
    for (int k = 0; k < std::abs(other - self); ++k)
        target = detail::add_outer_kink(target, curl, over, rep.insertions);
    for (std::size_t i = 0; i < rep.insertions.size(); ++i)
        rep.insertions[i].step = static_cast<int>(i);
    return {a, b, rep};
}

// ---------------------------------------------------------------------------
// Same-knot pipeline (search method; the relaxation method lives with the
// relaxation code, which depends on this header for equalization).

struct SameKnotResult {
    IsotopyVerdict verdict;
    EqualizeReport equalized;
    std::string caveat;
};

inline SameKnotResult same_knot_search(const Diagram& d1, const Diagram& d2,
                                       const SearchBudget& budget = {}, bool over = true) {
    SameKnotResult r;
    auto [a, b, rep] = equalize_whitney(d1, d2, over);
    r.equalized = std::move(rep);
    r.verdict = flat_isotopic(a, b, budget, /*allow_r1=*/false);
    if (r.verdict.status == IsotopyVerdict::Status::equivalent)
        r.caveat = "path applies to the whitney-equalized pair";
    else if (r.verdict.status == IsotopyVerdict::Status::unresolved)
        r.caveat = "budget exhaustion is not evidence of distinctness";
    return r;
}

// ---------------------------------------------------------------------------
// Verified flat-unknot classification

// Classifies a diagram by its (whitney, twist) pair after verifying that it
// really presents the trivial knot: a fast necessary check (the bracket of
// any unknot diagram is (−A³)^writhe) followed by a bounded search, with R1
// allowed, for a crossing-free diagram.  Throws NotVerifiedUnknot when the
// bracket rules the unknot out or the budget runs dry.
inline FlatClass classify_verified_unknot(const Diagram& d, const SearchBudget& budget = {}) {
    validate(d);
    SearchBudget b = budget;
    b.max_crossings = std::max(b.max_crossings, d.n_crossings());
    int wr = writhe(d);
    try {
        LaurentPoly want = LaurentPoly::monomial(3 * wr, std::abs(wr) % 2 == 0 ? 1 : -1);
        if (kauffman_bracket(d, 16) != want)
            throw NotVerifiedUnknot("bracket differs from every unknot diagram's value");
    } catch (const TooManyCrossings&) {
        // necessary check skipped above the state-sum cap; the search decides
    }
    if (d.trivial()) return classify_flat_unknot(d);

    std::map<std::string, int> seen{{canonical_code(d).code, 0}};
    std::vector<Diagram> frontier{d};
    long states = 1;
    for (int depth = 0; !frontier.empty() && depth < b.max_moves_per_path; ++depth) {
        std::vector<Diagram> next;
        for (const Diagram& cur : frontier) {
            for (auto& [nd, ev] : detail::search_neighbors(cur, /*allow_r1=*/true,
                                                           b.max_crossings)) {
                if (nd.trivial()) return classify_flat_unknot(d);
                std::string c = canonical_code(nd).code;
                if (!seen.emplace(c, depth + 1).second) continue;
                next.push_back(std::move(nd));
                if (++states >= b.max_states)
                    throw NotVerifiedUnknot("search budget exhausted before a trivial diagram");
            }
        }
        frontier = std::move(next);
    }
    throw NotVerifiedUnknot("no trivial diagram within the move and crossing bounds");
}

}  // namespace flatknot
