#include <catch2/catch_amalgamated.hpp>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "flatknot/gauss.hpp"
#include "flatknot/search.hpp"

using namespace flatknot;

namespace {

Diagram trivial(int w = +1) {
    Diagram d;
    d.trivial_whitney = w;
    return d;
}

// Every equivalent verdict must be replayable: applying the path to the
// start diagram lands exactly on the target's canonical code.
void check_equivalent(const IsotopyVerdict& v, const Diagram& from, const Diagram& to) {
    REQUIRE(v.status == IsotopyVerdict::Status::equivalent);
    CHECK(v.exit_code() == 0);
    CHECK(canonical_code(replay_path(from, v.path)).code == canonical_code(to).code);
}

bool flat_only(const MoveLog& path) {
    for (const MoveEvent& e : path)
        if (e.site.kind == MoveKind::R1plus || e.site.kind == MoveKind::R1minus) return false;
    return true;
}

}  // namespace

TEST_CASE("identical diagrams are equivalent with an empty path") {
    IsotopyVerdict v = flat_isotopic(trivial(), trivial());
    check_equivalent(v, trivial(), trivial());
    CHECK(v.path.empty());
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    check_equivalent(flat_isotopic(tref, tref), tref, tref);
}

TEST_CASE("a kink is flat-distinct from the round circle") {
    // [TRIVIAL] R1 is forbidden, so the whitney prefilter separates them.
    IsotopyVerdict v = flat_isotopic(parse_gauss("O1+ U1+"), trivial());
    CHECK(v.status == IsotopyVerdict::Status::distinct);
    CHECK(v.exit_code() == 1);
    CHECK(v.witness == "whitney");
}

TEST_CASE("a self-fold pair cancels back to the circle") {
    // [DERIVED] the search is the oracle; the path must replay and use
    // plane moves only.
    auto [folded, log] = whitney_trick_create(trivial(), -1);
    REQUIRE(folded.n_crossings() == 2);
    IsotopyVerdict v = flat_isotopic(folded, trivial());
    check_equivalent(v, folded, trivial());
    CHECK(flat_only(v.path));
}

TEST_CASE("trefoil with an extra coherent overlap is equivalent to the trefoil") {
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    bool found = false;
    for (const MoveSite& s : find_moves(tref, {MoveKind::R2plus})) {
        Diagram big = apply_move(tref, s).first;
        IsotopyVerdict v = flat_isotopic(big, tref);
        check_equivalent(v, big, tref);
        CHECK(flat_only(v.path));
        found = true;
        break;
    }
    CHECK(found);
}

TEST_CASE("trefoil vs its reflection: distinct with an invariant witness") {
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    IsotopyVerdict v = flat_isotopic(tref, mirror(tref));
    CHECK(v.status == IsotopyVerdict::Status::distinct);
    CHECK(!v.witness.empty());
}

TEST_CASE("budget exhaustion is an unresolved verdict, not an error") {
    auto [folded, log] = whitney_trick_create(trivial(), -1);
    SearchBudget tiny;
    tiny.max_states = 2;  // just the two roots: no expansion allowed
    IsotopyVerdict v = flat_isotopic(folded, trivial(), tiny);
    CHECK(v.status == IsotopyVerdict::Status::unresolved);
    CHECK(v.exit_code() == 2);
    CHECK(!v.note.empty());
}

TEST_CASE("search verdicts and paths are deterministic") {
    auto [folded, log] = whitney_trick_create(trivial(), -1);
    IsotopyVerdict a = flat_isotopic(folded, trivial());
    IsotopyVerdict b = flat_isotopic(folded, trivial());
    REQUIRE(a.path.size() == b.path.size());
    for (std::size_t i = 0; i < a.path.size(); ++i) {
        CHECK(a.path[i].site.kind == b.path[i].site.kind);
        CHECK(a.path[i].site.arc == b.path[i].site.arc);
    }
    CHECK(a.states == b.states);
}

TEST_CASE("equalize_whitney matches the arithmetic contract") {
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    Diagram tref_kinked = add_kink(tref, faces(tref).darts[0].front().arc, +1, true);
    REQUIRE(whitney_index(tref) == 2);
    REQUIRE(whitney_index(tref_kinked) == 3);
    auto [a, b, rep] = equalize_whitney(tref, tref_kinked);
    CHECK(whitney_index(a) == 3);
    CHECK(whitney_index(b) == 3);
    CHECK(rep.modified == 1);
    CHECK(rep.insertions.size() == 1);

    auto [c, d, rep2] = equalize_whitney(tref, tref);
    CHECK(rep2.modified == 0);
    CHECK(rep2.insertions.empty());
    CHECK(canonical_code(c).code == canonical_code(tref).code);

    // Circle (w=1) against a one-crossing figure-eight diagram (w=0): the
    // crossing-free diagram takes one negative-curl loop.
    Diagram fig8;
    {
        auto sites = find_moves(trivial(), {MoveKind::R1plus});
        for (const MoveSite& s : sites) {
            Diagram k = apply_move(trivial(), s).first;
            if (whitney_index(k) == 0) fig8 = k;
        }
    }
    REQUIRE(whitney_index(fig8) == 0);
    auto [e, f, rep3] = equalize_whitney(trivial(), fig8);
    CHECK(rep3.modified == 1);
    CHECK(rep3.insertions.size() == 1);
    CHECK(rep3.insertions.front().site.curl == -1);
    CHECK(whitney_index(e) == 0);
}

TEST_CASE("equalization never changes the knot type") {
    // With R1 allowed, a diagram and its kinked version reconnect.
    Diagram circle = trivial();
    Diagram kinked = add_kink(circle, -1, +1, true);
    IsotopyVerdict v = flat_isotopic(circle, kinked, {}, /*allow_r1=*/true);
    check_equivalent(v, circle, kinked);
}

TEST_CASE("same-knot pipeline: search method") {
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    // Same knot, different whitney: trefoil vs trefoil with a kink.
    Diagram kinked = add_kink(tref, faces(tref).darts[0].front().arc, +1, true);
    SameKnotResult r = same_knot_search(tref, kinked);
    REQUIRE(r.verdict.status == IsotopyVerdict::Status::equivalent);
    CHECK(flat_only(r.verdict.path));
    // The path applies to the equalized pair.
    auto [a, b, rep] = equalize_whitney(tref, kinked);
    check_equivalent(r.verdict, a, b);

    // Circle vs one-kink unknot: equalization makes them flat-connected.
    SameKnotResult u = same_knot_search(trivial(), add_kink(trivial(), -1, +1, true));
    CHECK(u.verdict.status == IsotopyVerdict::Status::equivalent);

    // Trefoil vs reflected trefoil: distinct by an invariant after
    // equalization (whitney 2 vs -2 means the mirror gets kinks; the
    // bracket still separates).
    SameKnotResult m = same_knot_search(tref, mirror(tref));
    CHECK(m.verdict.status == IsotopyVerdict::Status::distinct);
    CHECK(!m.verdict.witness.empty());
}

TEST_CASE("small-scale completeness: flat classes partition kinked unknots") {
    // Seed unknot diagrams with 0-2 crossings across several flat classes;
    // the search must connect exactly the equal-class pairs (the class pair
    // is complete for flat unknots).
    std::vector<Diagram> seeds{trivial(+1), trivial(-1)};
    for (const MoveSite& s : find_moves(trivial(+1), {MoveKind::R1plus}))
        seeds.push_back(apply_move(trivial(+1), s).first);
    for (const MoveSite& s : find_moves(trivial(-1), {MoveKind::R1plus}))
        seeds.push_back(apply_move(trivial(-1), s).first);
    auto folded = whitney_trick_create(trivial(+1), -1).first;
    seeds.push_back(folded);
    SearchBudget b;
    b.max_crossings = 4;
    b.max_states = 4000;
    int equivalent_pairs = 0, distinct_pairs = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            bool same_class = classify_flat_unknot(seeds[i]) == classify_flat_unknot(seeds[j]);
            IsotopyVerdict v = flat_isotopic(seeds[i], seeds[j], b);
            if (same_class) {
                check_equivalent(v, seeds[i], seeds[j]);
                ++equivalent_pairs;
            } else {
                CHECK(v.status == IsotopyVerdict::Status::distinct);
                ++distinct_pairs;
            }
        }
    CHECK(equivalent_pairs > 0);
    CHECK(distinct_pairs > 0);
}

TEST_CASE("verified flat-unknot classification") {
    CHECK((classify_verified_unknot(trivial()) == FlatClass{1, 0}));
    Diagram kinked = add_kink(trivial(), -1, +1, true);
    FlatClass k = classify_verified_unknot(kinked);
    CHECK(k.whitney == whitney_index(kinked));
    CHECK(k.twist == writhe(kinked));
    auto folded = whitney_trick_create(trivial(), -1).first;
    CHECK((classify_verified_unknot(folded) == FlatClass{1, 0}));
    // The trefoil is not an unknot: the bracket certificate rejects it.
    Diagram tref = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    CHECK_THROWS_AS(classify_verified_unknot(tref), NotVerifiedUnknot);
    // A starved budget cannot verify and must say so, not guess.
    SearchBudget starved;
    starved.max_states = 2;
    CHECK_THROWS_AS(classify_verified_unknot(folded, starved), NotVerifiedUnknot);
}
