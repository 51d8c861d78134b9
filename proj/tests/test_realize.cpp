#include <catch2/catch_amalgamated.hpp>
#include <random>
#include <set>
#include <vector>

#include "flatknot/extract.hpp"
#include "flatknot/gauss.hpp"
#include "flatknot/invariants.hpp"
#include "flatknot/moves.hpp"
#include "flatknot/realize.hpp"
#include "test_support.hpp"

using namespace flatknot;
using testsupport::figure_eight;
using testsupport::limacon;
using testsupport::trefoil_shadow;

namespace {

// Deterministic random walk through move space (same scheme as test_moves).
Diagram random_diagram(unsigned seed, int steps, int max_crossings) {
    std::mt19937 rng(seed);
    Diagram d;
    d.trivial_whitney = 1;
    for (int i = 0; i < steps; ++i) {
        std::set<MoveKind> kinds{MoveKind::R2minus, MoveKind::R3, MoveKind::R1minus};
        if (d.n_crossings() + 2 <= max_crossings) {
            kinds.insert(MoveKind::R2plus);
            kinds.insert(MoveKind::R1plus);
        }
        auto sites = find_moves(d, kinds);
        if (sites.empty()) break;
        d = apply_move(d, sites[rng() % sites.size()]).first;
    }
    return d;
}

// Round trip: the realized curve, extracted with the returned over flags,
// must reproduce the input diagram exactly (canonical code and outer face).
void check_round_trip(const Diagram& d) {
    RealizeResult r = realize_diagram(d);
    REQUIRE(self_intersections(r.curve).size() == static_cast<std::size_t>(d.n_crossings()));
    Diagram back = extract_diagram(r.curve, r.overs);
    CHECK(canonical_code(back).code == canonical_code(d).code);
    CHECK(whitney_index(back) == whitney_index(d));
    CHECK(turning_number(r.curve) == whitney_index(d));
}

}  // namespace

TEST_CASE("trivial diagram realizes as an embedded polygon") {
    // [TRIVIAL] an embedded curve at the requested resolution, turning
    // number equal to the stored plane class.
    for (int w : {+1, -1}) {
        Diagram t;
        t.trivial_whitney = w;
        RealizeResult r = realize_diagram(t, 64);
        CHECK(r.curve.size() == 64);
        CHECK(self_intersections(r.curve).empty());
        CHECK(turning_number(r.curve) == w);
    }
}

TEST_CASE("one-kink diagram realizes with a single crossing") {
    for (const char* code : {"O1+ U1+", "O1- U1-"}) {
        Diagram d = parse_gauss(code);
        RealizeResult r = realize_diagram(d);
        CHECK(self_intersections(r.curve).size() == 1);
        check_round_trip(d);
    }
}

TEST_CASE("standard trefoil realizes and round-trips") {
    // [DERIVED] extraction of the realized curve is the oracle: its
    // canonical code must equal the parsed code's.
    Diagram d = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    RealizeResult r = realize_diagram(d);
    CHECK(self_intersections(r.curve).size() == 3);
    check_round_trip(d);
    check_round_trip(mirror(d));
}

TEST_CASE("registry maps crossing ids to geometric intersections") {
    Diagram d = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
    RealizeResult r = realize_diagram(d);
    auto xs = self_intersections(r.curve);
    std::set<std::size_t> used;
    for (const auto& [cid, k] : r.crossing_index) {
        CHECK(d.crossings.count(cid) == 1);
        CHECK(k < xs.size());
        used.insert(k);
    }
    CHECK(used.size() == xs.size());  // a bijection
}

TEST_CASE("extract then realize preserves the canonical code") {
    for (const auto& curve : {figure_eight(), limacon(), trefoil_shadow()}) {
        std::size_t V = self_intersections(curve).size();
        std::vector<bool> overs(V, true);
        Diagram d = extract_diagram(curve, overs);
        check_round_trip(d);
    }
}

TEST_CASE("turning number of the realization is the Whitney index") {
    // Oracle identity over random move-walk diagrams: the drawn curve's
    // geometric turning number must equal the combinatorial index.
    int realized = 0;
    for (unsigned seed = 1; seed <= 12; ++seed) {
        Diagram d = random_diagram(seed, 30, 8);
        check_round_trip(d);
        if (d.n_crossings() >= 4) ++realized;
    }
    CHECK(realized > 0);  // the walk must reach interesting sizes
}
