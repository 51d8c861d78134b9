#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flatknot/curve.hpp"
#include "flatknot/diagram.hpp"
#include "flatknot/errors.hpp"
#include "flatknot/extract.hpp"
#include "flatknot/invariants.hpp"
#include "flatknot/moves.hpp"
#include "flatknot/realize.hpp"
#include "flatknot/search.hpp"

namespace flatknot {

// Gradient flow of discrete bending energy on an inextensible closed
// polyline, with crossing-event tracking that admits only plane moves
// (R2/R3): the curve settles into a normal form and every combinatorial
// change along the way is certified as a replayable move on the tracked
// diagram.

struct RelaxConfig {
    int n_vertices = 96;
    double dt0 = 1e-3;          // initial step; adapted by reject-halving
    int max_steps = 200000;     // accepted-step bound
    double tol_energy = 1e-8;   // relative energy decrease over the window
    double tol_disp = 1e-6;     // max vertex motion, fraction of length
    int window = 50;
    unsigned seed = 1;
    enum class R2PlusPolicy { random, first_arc_over, reject };
    R2PlusPolicy r2plus_policy = R2PlusPolicy::random;
    double contact_penalty = 1.0;     // transient repulsion strength
    double min_face_perimeter = 0.02; // loop-shrink guard, fraction of length
    int resample_every = 0;           // 0: never
    double length_tol = 1e-6;         // edge-length spread, fraction of length
};

// ---------------------------------------------------------------------------
// Discrete elastica energy

// E = sum_i theta_i^2 / h_i with theta_i the exterior angle at vertex i and
// h_i the mean of the two adjacent edge lengths; scale-covariant,
// E(lambda c) = E(c)/lambda.
inline double bending_energy(const PlanarCurve& c) {
    detail::require_vertices(c);
    std::size_t n = c.size();
    double E = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = c.edge((i + n - 1) % n), b = c.edge(i);
        double th = signed_angle(a, b);
        double h = 0.5 * (a.norm() + b.norm());
        E += th * th / h;
    }
    return E;
}

// Analytic gradient of bending_energy with respect to vertex positions.
inline std::vector<Vec2> bending_gradient(const PlanarCurve& c) {
    detail::require_vertices(c);
    std::size_t n = c.size();
    std::vector<Vec2> g(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 a = c.edge((i + n - 1) % n), b = c.edge(i);
        double la = a.norm(), lb = b.norm();
        double th = signed_angle(a, b);
        double h = 0.5 * (la + lb);
        // d theta/d a = -perp(a)/|a|^2, d theta/d b = perp(b)/|b|^2;
        // d h/d a = unit(a)/2.
        Vec2 dth_da = a.perp() * (-1.0 / (la * la));
        Vec2 dth_db = b.perp() * (1.0 / (lb * lb));
        double q = th * th / (h * h) * 0.5;
        Vec2 dterm_da = dth_da * (2.0 * th / h) - a * (q / la);
        Vec2 dterm_db = dth_db * (2.0 * th / h) - b * (q / lb);
        g[(i + n - 1) % n] -= dterm_da;
        g[i] += dterm_da;
        g[i] -= dterm_db;
        g[(i + 1) % n] += dterm_db;
    }
    return g;
}

namespace detail {

// Transient contact repulsion between non-neighboring vertices closer than
// r; quadratic in the overlap, zero at and beyond r.
inline double contact_energy(const PlanarCurve& c, double r, double k) {
    if (k <= 0 || r <= 0) return 0;
    std::size_t n = c.size();
    auto tangent = [&](std::size_t i) {
        return (c.vertices[(i + 1) % n] - c.vertices[(i + n - 1) % n]).normalized();
    };
    double E = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j >= n - 1) continue;  // circular neighbors
            double d = (c.vertices[i] - c.vertices[j]).norm();
            if (d < r) {
                double a = dot(tangent(i), tangent(j));
                double u = 1.0 - d / r;
                E += k * a * a * u * u;
            }
        }
    return E;
}

// Repulsion between close non-neighboring vertices, weighted by the squared
// alignment of their local tangents: the flat stand-in for tube thickness.
// Nearly parallel contacts (a flattening lens, an incipient tangency) are
// pushed apart hard, while transversal crossings — whose strands must touch
// in the plane — feel almost nothing.  Without the weighting a coherent
// overlap does not annihilate: it flattens into a degenerate tangency that
// sprays spurious crossing pairs instead of closing through a clean R2-.
inline void add_contact_gradient(const PlanarCurve& c, double r, double k, std::vector<Vec2>& g) {
    if (k <= 0 || r <= 0) return;
    std::size_t n = c.size();
    std::vector<Vec2> t(n);
    std::vector<double> wlen(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 w = c.vertices[(i + 1) % n] - c.vertices[(i + n - 1) % n];
        wlen[i] = w.norm();
        t[i] = wlen[i] > 0 ? w / wlen[i] : Vec2{0, 0};
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j >= n - 1) continue;
            Vec2 dvec = c.vertices[i] - c.vertices[j];
            double d = dvec.norm();
            if (d <= 0 || d >= r || wlen[i] <= 0 || wlen[j] <= 0) continue;
            double a = dot(t[i], t[j]);
            double u = 1.0 - d / r;
            // distance part: dU/dd = -2 k a^2 u / r
            Vec2 f = dvec * (-2.0 * k * a * a * u / (r * d));
            g[i] += f;
            g[j] -= f;
            // alignment part: dU/da = 2 k a u^2, with
            // da/d(v_{i+1}) = (t_j - a t_i)/|w_i| (and the opposite sign at
            // v_{i-1}); dropping it leaves a false equilibrium where the
            // inexact direction is uphill in the true objective and every
            // step rejects before a lens can close.
            double ca = 2.0 * k * a * u * u;
            Vec2 qi = (t[j] - t[i] * a) * (ca / wlen[i]);
            Vec2 qj = (t[i] - t[j] * a) * (ca / wlen[j]);
            g[(i + 1) % n] += qi;
            g[(i + n - 1) % n] -= qi;
            g[(j + 1) % n] += qj;
            g[(j + n - 1) % n] -= qj;
        }
}

// Iterative edge-length projection (position-based); returns false when the
// target tolerance is not reached.
inline bool project_lengths(PlanarCurve& c, const std::vector<double>& target, double tol_abs,
                            int max_iter = 400) {
    std::size_t n = c.size();
    auto worst_error = [&]() {
        double worst = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double l = (c.vertices[(i + 1) % n] - c.vertices[i]).norm();
            if (l <= 0) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::abs(l - target[i]));
        }
        return worst;
    };
    for (int iter = 0; iter < max_iter; ++iter) {
        // Measure first: a curve already inside tolerance is left untouched,
        // so the projection is idempotent (a vanishing flow step must not
        // perturb the state, or step control can reject forever).
        if (worst_error() < tol_abs) return true;
        for (std::size_t i = 0; i < n; ++i) {
            Vec2 d = c.vertices[(i + 1) % n] - c.vertices[i];
            double l = d.norm();
            if (l <= 0) return false;
            Vec2 corr = d * (0.5 * (l - target[i]) / l);
            c.vertices[i] += corr;
            c.vertices[(i + 1) % n] -= corr;
        }
    }
    return worst_error() < tol_abs;
}

// Sobolev-type smoothing of a descent direction: applies (I + g*D4)^-1 per
// coordinate, D4 the cyclic fourth-difference operator.  The bending Hessian
// grows like the fourth power of the mode number, so explicit steps are
// capped by the stiffest mode while the shape error lives in the smoothest
// ones; with g chosen so the crossover sits at mode 2, every mode relaxes at
// about the same rate and the step size is limited by geometry (the
// displacement clamp), not stiffness.  The operator is symmetric positive
// definite, so the result is still a descent direction and the energy-accept
// rule stays sound.
struct DirectionSmoother {
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ready = false;

    void build(std::size_t n) {
        using Eigen::MatrixXd;
        double w = 4.0 * 3.14159265358979323846 / static_cast<double>(n);
        double gain = 1.0 / (w * w * w * w);  // crossover at mode 2
        MatrixXd M = MatrixXd::Identity(n, n);
        const double sten[5] = {1, -4, 6, -4, 1};
        for (std::size_t i = 0; i < n; ++i)
            for (int k = -2; k <= 2; ++k)
                M(i, (i + n + static_cast<std::size_t>(k + 2) - 2) % n) += gain * sten[k + 2];
        llt.compute(M);
        ready = llt.info() == Eigen::Success;
    }

    void apply(std::vector<Vec2>& g) const {
        if (!ready) return;
        std::size_t n = g.size();
        Eigen::MatrixXd b(n, 2);
        for (std::size_t i = 0; i < n; ++i) {
            b(i, 0) = g[i].x;
            b(i, 1) = g[i].y;
        }
        Eigen::MatrixXd x = llt.solve(b);
        for (std::size_t i = 0; i < n; ++i) g[i] = {x(i, 0), x(i, 1)};
    }
};

// Removes (approximately) the edge-length-constraint components from a
// descent direction, leaving motion tangent to the inextensibility manifold.
// Without this the tangential part of the raw gradient shrinks near the
// constrained optimum while the normal part stays finite, and step control
// stalls against the projection penalty.
// One extra linear constraint row on the flow direction, sparse over
// vertices: sum of coeff . g[vertex] = 0.
using ConstraintRow = std::vector<std::pair<std::size_t, Vec2>>;

inline void tangentialize(const PlanarCurve& c, std::vector<Vec2>& g,
                          const std::vector<ConstraintRow>& extra = {}) {
    std::size_t n = c.size(), m = extra.size();
    std::vector<Vec2> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = c.edge(i).normalized();
    // Exact projection g -> g - J^T (J J^T)^{-1} J g, J stacking the
    // edge-length Jacobian (J J^T cyclic tridiagonal) and any extra active
    // rows.  An iterative sweep is not good enough for the length part: the
    // smoothed direction is global, its residual length rates are
    // low-frequency, and those are exactly what relaxation sweeps damp
    // slowest, which then starves the position projection downstream.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + m, n + m);
    Eigen::VectorXd r(n + m);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ip = (i + 1) % n;
        A(i, i) = 2.0 + 1e-12;
        A(i, ip) += -dot(u[i], u[ip]);
        A(ip, i) += -dot(u[ip], u[i]);
        r(static_cast<Eigen::Index>(i)) = dot(g[ip] - g[i], u[i]);
    }
    for (std::size_t k = 0; k < m; ++k) {
        double rk = 0;
        for (const auto& [v, cf] : extra[k]) {
            rk += dot(cf, g[v]);
            // overlap with length rows v-1 (coeff +u) and v (coeff -u)
            std::size_t vm = (v + n - 1) % n;
            A(vm, n + k) += dot(u[vm], cf);
            A(n + k, vm) += dot(u[vm], cf);
            A(v, n + k) += -dot(u[v], cf);
            A(n + k, v) += -dot(u[v], cf);
        }
        for (const auto& [v1, c1] : extra[k])
            for (std::size_t k2 = k; k2 < m; ++k2)
                for (const auto& [v2, c2] : extra[k2])
                    if (v1 == v2) {
                        A(n + k, n + k2) += dot(c1, c2);
                        if (k2 != k) A(n + k2, n + k) += dot(c1, c2);
                    }
        A(n + k, n + k) += 1e-12;
        r(static_cast<Eigen::Index>(n + k)) = rk;
    }
    Eigen::VectorXd lam = A.ldlt().solve(r);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t ip = (i + 1) % n;
        Vec2 corr = u[i] * lam(static_cast<Eigen::Index>(i));
        g[ip] -= corr;
        g[i] += corr;
    }
    for (std::size_t k = 0; k < m; ++k)
        for (const auto& [v, cf] : extra[k]) g[v] -= cf * lam(static_cast<Eigen::Index>(n + k));
}

// Appends to `row` the vertex coefficients of uh . dp (scaled by sgn), dp the
// first-order motion of crossing x's intersection point under a vertex flow:
// the moved point must stay on both moving support lines, which pins its
// normal components to the interpolated edge motions.
inline void add_crossing_point_row(const PlanarCurve& c, const CurveCrossing& x, Vec2 uh,
                                   double sgn, ConstraintRow& row) {
    std::size_t n = c.size();
    Vec2 nA = c.edge(static_cast<std::size_t>(x.edge_i)).perp().normalized();
    Vec2 nB = c.edge(static_cast<std::size_t>(x.edge_j)).perp().normalized();
    double det = cross(nA, nB);  // nonzero at a transversal crossing
    if (std::abs(det) < 1e-9) return;
    double w1 = sgn * cross(uh, nB) / det, w2 = sgn * cross(nA, uh) / det;
    double t = x.si - std::floor(x.si), u = x.sj - std::floor(x.sj);
    std::size_t i1 = static_cast<std::size_t>(x.edge_i), i2 = (i1 + 1) % n;
    std::size_t j1 = static_cast<std::size_t>(x.edge_j), j2 = (j1 + 1) % n;
    row.push_back({i1, nA * (w1 * (1 - t))});
    row.push_back({i2, nA * (w1 * t)});
    row.push_back({j1, nB * (w2 * (1 - u))});
    row.push_back({j2, nB * (w2 * u)});
}

// Closest point on the open polyline `pts`.
inline Vec2 closest_on_polyline(const std::vector<Vec2>& pts, Vec2 p) {
    Vec2 best = pts.front();
    double bd = (p - best).norm2();
    for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
        Vec2 a = pts[s], ab = pts[s + 1] - pts[s];
        double den = ab.norm2();
        double t = den > 0 ? std::clamp(dot(p - a, ab) / den, 0.0, 1.0) : 0.0;
        Vec2 q = a + ab * t;
        if ((p - q).norm2() < bd) {
            bd = (p - q).norm2();
            best = q;
        }
    }
    return best;
}

// Crossing pairs that may legitimately come close: corners of a face that
// admits a coherent-bigon annihilation or a strand slide on the current
// diagram.  Any other pair approaching each other is a face collapsing with
// no admissible move behind it (an incoherent bigon pinch, a kink shrink seen
// from the other side, ...), and the geometry must be stopped before the
// crossing points merge into an uncertifiable tangency.  Indices refer to the
// intersection registry (first-passage order), which is also the extracted
// diagram's crossing numbering.
inline std::set<std::pair<int, int>> admissible_close_pairs(const PlanarCurve& c,
                                                            const std::vector<bool>& overs) {
    std::set<std::pair<int, int>> out;
    Diagram dext = extract_diagram(c, overs);
    if (dext.trivial()) return out;
    for (const MoveSite& s : find_moves(dext, {MoveKind::R2minus, MoveKind::R3})) {
        std::vector<int> ids;
        for (const CornerRef& cr : s.face) ids.push_back(cr.crossing);
        for (std::size_t i = 0; i < ids.size(); ++i)
            for (std::size_t j = i + 1; j < ids.size(); ++j)
                out.insert({std::min(ids[i], ids[j]), std::max(ids[i], ids[j])});
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Tracked state

struct RelaxState {
    PlanarCurve curve;
    std::vector<double> target;     // fixed per-edge target lengths
    std::vector<CurveCrossing> xs;  // registry, sorted by first parameter
    std::vector<bool> overs;        // first-passage-over flags, aligned to xs
    Diagram tracked;                // evolves only by certified moves
    MoveLog event_log;
    std::vector<double> energy_trace;  // objective at accepted steps
    int step = 0;                      // accepted steps
    long attempts = 0;
    double dt = 0, dt0 = 0;
    int turning = 0;      // conserved across accepted steps
    int penalty_ttl = 0;  // transient contact penalty countdown
    double last_disp = 0; // max vertex motion of the last accepted step
    std::map<std::string, long> reject_counts;  // diagnostics by reason
    std::mt19937 rng;
    detail::DirectionSmoother smoother;
    std::set<std::pair<int, int>> close_ok;  // registry pairs free to approach
    int surgery_cooldown = 0;                // throttles pass-through attempts
};

// ---------------------------------------------------------------------------
// Event detection

enum class EventKind { none, r2plus, r2minus, r3, illegal };

struct EventScan {
    EventKind kind = EventKind::none;
    std::string why;
    std::vector<CurveCrossing> after;   // intersections of the after curve
    std::vector<std::size_t> match;     // after index -> before index (npos: created)
    std::vector<bool> swapped;          // after crossing's passages exchanged order
    std::vector<std::size_t> created;   // after indices
    std::vector<std::size_t> destroyed; // before indices
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

namespace detail {

inline double circ_param_dist(double a, double b, double n) {
    double d = std::abs(a - b);
    return std::min(d, n - d);
}

// Cyclic Gauss word of before-labels at sorted parameters; rotation-free
// canonical form so drift across parameter zero compares equal.
inline std::vector<std::size_t> canonical_word(std::vector<std::pair<double, std::size_t>> ps) {
    std::sort(ps.begin(), ps.end());
    std::vector<std::size_t> w;
    w.reserve(ps.size());
    for (auto& [p, l] : ps) w.push_back(l);
    if (w.empty()) return w;
    std::vector<std::size_t> best = w;
    for (std::size_t r = 1; r < w.size(); ++r) {
        std::rotate(w.begin(), w.begin() + 1, w.end());
        if (w < best) best = w;
    }
    return best;
}

}  // namespace detail

// Matches the registry against the after curve's intersections (nearest
// parameter pair within two edge lengths) and classifies the difference.
// Single appearances or disappearances are the forbidden first move and
// anything compound is unclassifiable: both come back as illegal.
inline EventScan detect_events(const RelaxState& st, const PlanarCurve& after,
                               double match_radius = 2.0) {
    EventScan scan;
    scan.after = self_intersections(after);
    double n = static_cast<double>(after.size());
    std::size_t A = scan.after.size(), B = st.xs.size();
    scan.match.assign(A, EventScan::npos);
    scan.swapped.assign(A, false);

    struct Cand {
        double d;
        std::size_t a, b;
        bool sw;
    };
    std::vector<Cand> cands;
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t b = 0; b < B; ++b) {
            double straight = std::max(detail::circ_param_dist(scan.after[a].si, st.xs[b].si, n),
                                       detail::circ_param_dist(scan.after[a].sj, st.xs[b].sj, n));
            double crossed = std::max(detail::circ_param_dist(scan.after[a].si, st.xs[b].sj, n),
                                      detail::circ_param_dist(scan.after[a].sj, st.xs[b].si, n));
            double d = std::min(straight, crossed);
            if (d <= match_radius) cands.push_back({d, a, b, crossed < straight});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        return std::tie(x.d, x.a, x.b) < std::tie(y.d, y.a, y.b);
    });
    std::vector<bool> btaken(B, false);
    for (const Cand& c : cands) {
        if (scan.match[c.a] != EventScan::npos || btaken[c.b]) continue;
        scan.match[c.a] = c.b;
        scan.swapped[c.a] = c.sw;
        btaken[c.b] = true;
    }
    for (std::size_t a = 0; a < A; ++a)
        if (scan.match[a] == EventScan::npos) scan.created.push_back(a);
    for (std::size_t b = 0; b < B; ++b)
        if (!btaken[b]) scan.destroyed.push_back(b);

    if (scan.created.empty() && scan.destroyed.empty()) {
        // Same crossing set: silent unless the interleaving order changed,
        // which only a triple-point passage (or something illegal) can do.
        std::vector<std::pair<double, std::size_t>> before_ps, after_ps;
        for (std::size_t b = 0; b < B; ++b) {
            before_ps.push_back({st.xs[b].si, b});
            before_ps.push_back({st.xs[b].sj, b});
        }
        for (std::size_t a = 0; a < A; ++a) {
            after_ps.push_back({scan.after[a].si, scan.match[a]});
            after_ps.push_back({scan.after[a].sj, scan.match[a]});
        }
        scan.kind = detail::canonical_word(before_ps) == detail::canonical_word(after_ps)
                        ? EventKind::none
                        : EventKind::r3;
    } else if (scan.created.size() == 2 && scan.destroyed.empty()) {
        scan.kind = EventKind::r2plus;
    } else if (scan.destroyed.size() == 2 && scan.created.empty()) {
        scan.kind = EventKind::r2minus;
    } else {
        scan.kind = EventKind::illegal;
        scan.why = scan.created.size() + scan.destroyed.size() == 1
                       ? "single crossing change (a forbidden kink move)"
                       : "compound or unmatched crossing change";
    }
    return scan;
}

namespace detail {

// Over flags carried over a silent step (or the matched part of an event):
// a crossing whose two passages traded places across parameter zero flips
// its first-passage flag to keep naming the same geometric over strand.
inline std::vector<bool> carried_overs(const RelaxState& st, const EventScan& scan) {
    std::vector<bool> out(scan.after.size());
    for (std::size_t a = 0; a < scan.after.size(); ++a) {
        if (scan.match[a] == EventScan::npos) continue;  // caller fills created
        bool o = st.overs[scan.match[a]];
        out[a] = scan.swapped[a] ? !o : o;
    }
    return out;
}

// Candidate one-move successors of the tracked diagram for certification.
inline std::vector<std::pair<Diagram, MoveEvent>> certify_candidates(const Diagram& d,
                                                                     MoveKind kind) {
    std::vector<MoveSite> sites = find_moves(d, {kind});
    if (kind == MoveKind::R2plus && !d.trivial())
        for (const auto& [aid, arc] : d.arcs)
            for (int curl : {+1, -1})
                for (bool over : {false, true})
                    sites.push_back({MoveKind::R2plus, {}, aid, -1, curl, over});
    std::vector<std::pair<Diagram, MoveEvent>> out;
    for (const MoveSite& s : sites) {
        try {
            out.push_back(apply_move(d, s));
        } catch (const Error&) {
        }
    }
    return out;
}

// Finds the unique tracked-diagram move whose result matches the after
// extraction; this is what makes the event log a replayable certificate.
inline std::optional<std::pair<Diagram, MoveEvent>> certify(const Diagram& tracked,
                                                            MoveKind kind,
                                                            const std::string& want_code) {
    for (auto& cand : certify_candidates(tracked, kind))
        if (canonical_code(cand.first).code == want_code) return cand;
    return std::nullopt;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Initialization

namespace detail {

inline RelaxState make_state(const PlanarCurve& c, const std::vector<bool>& overs,
                             const Diagram& tracked, const RelaxConfig& cfg) {
    RelaxState st;
    st.curve = c;
    st.xs = self_intersections(st.curve);
    if (st.xs.size() != overs.size())
        throw MissingOvers("over flags do not match the curve's intersections");
    st.overs = overs;
    st.tracked = tracked;
    st.turning = turning_number(st.curve);
    st.dt0 = cfg.dt0;
    st.dt = cfg.dt0;
    st.rng.seed(cfg.seed);

    // Prefer exactly uniform target lengths: project the curve onto them and
    // keep the result when it stays generic with the same diagram; fall back
    // to the raw edge lengths otherwise.
    std::size_t n = st.curve.size();
    double L = st.curve.length();
    std::vector<double> uniform(n, L / static_cast<double>(n));
    PlanarCurve cand = st.curve;
    // Same (tight) tolerance as the per-step projection: a state seeded at a
    // looser tolerance would take one deterministic dt-independent projection
    // jump on its first step, which the guards can then reject forever.
    if (project_lengths(cand, uniform, 0.005 * cfg.length_tol * L)) {
        try {
            auto xs2 = self_intersections(cand);
            if (xs2.size() == st.xs.size() &&
                canonical_code(extract_diagram(cand, st.overs)).code ==
                    canonical_code(tracked).code &&
                turning_number(cand) == st.turning) {
                st.curve = cand;
                st.xs = std::move(xs2);
                st.target = std::move(uniform);
            }
        } catch (const Error&) {
        }
    }
    if (st.target.empty()) {
        st.target.resize(n);
        for (std::size_t i = 0; i < n; ++i) st.target[i] = st.curve.edge(i).norm();
    }
    st.energy_trace.push_back(bending_energy(st.curve));
    st.smoother.build(n);
    st.close_ok = admissible_close_pairs(st.curve, st.overs);
    return st;
}

}  // namespace detail

inline RelaxState relax_init(const PlanarCurve& c, const std::vector<bool>& overs,
                             const RelaxConfig& cfg) {
    PlanarCurve use = c;
    if (cfg.n_vertices > 0 && c.size() != static_cast<std::size_t>(cfg.n_vertices)) {
        PlanarCurve r = resample(c, static_cast<std::size_t>(cfg.n_vertices));
        // only adopt the resampling when it preserves the diagram
        try {
            if (self_intersections(r).size() == overs.size() &&
                canonical_code(extract_diagram(r, overs)).code ==
                    canonical_code(extract_diagram(c, overs)).code)
                use = r;
        } catch (const Error&) {
        }
    }
    return detail::make_state(use, overs, extract_diagram(c, overs), cfg);
}

inline RelaxState relax_init(const Diagram& d, const RelaxConfig& cfg) {
    if (d.trivial()) {
        RealizeResult rr = realize_diagram(d, static_cast<std::size_t>(cfg.n_vertices));
        return detail::make_state(rr.curve, {}, d, cfg);
    }
    validate(d);
    RealizeResult rr = realize_diagram(d, static_cast<std::size_t>(cfg.n_vertices));
    // The realized curve is already verified against d; track d itself so
    // the event log replays from the caller's diagram instance.
    return detail::make_state(rr.curve, rr.overs, d, cfg);
}

namespace detail {

// Atomic pass-through of a shrunken coherent bigon.  Near annihilation the
// lens is an energy-neutral near-tangency: incremental flow cannot cross it
// (the passage shows up as projection-scale noise above the 1e-12 slack and
// single segments wiggling across spray spurious crossing pairs), so the two
// crossings are removed in one proposed move — the thinner lens arc is
// reflected across the other strand, the result is polished by a few
// uncommitted descent iterations, and the composite counts as one accepted
// step only if it ends at or below the starting energy and certifies as a
// single coherent-bigon annihilation.  Returns +1 when a pass-through was
// accepted, 0 when one was tried and declined, -1 when no pair is in reach.
#ifdef FLATKNOT_DEBUG_SURGERY
#define FK_SDBG(...) std::fprintf(stderr, __VA_ARGS__)
#else
#define FK_SDBG(...) ((void)0)
#endif

inline int try_pass_through(RelaxState& st, const RelaxConfig& cfg) {
    std::size_t n = st.curve.size();
    double nn = static_cast<double>(n);
    double L = 0;
    for (double t : st.target) L += t;
    double edge = L / nn;

    // Interior vertex indices of the shorter cyclic interval (u, v); empty
    // optional when another crossing's passage sits inside.
    auto interior = [&](double u, double v) -> std::optional<std::vector<std::size_t>> {
        double fwd = v - u;
        if (fwd < 0) fwd += nn;
        double lo = u, len = fwd;
        if (fwd > nn - fwd) {
            lo = v;
            len = nn - fwd;
        }
        for (const CurveCrossing& x : st.xs)
            for (double p : {x.si, x.sj}) {
                double rel = p - lo;
                if (rel < 0) rel += nn;
                if (rel > 1e-9 && rel < len - 1e-9) return std::nullopt;
            }
        std::vector<std::size_t> out;
        for (double k = std::ceil(lo); k < lo + len; k += 1.0) {
            double kk = k >= nn ? k - nn : k;
            if (circ_param_dist(kk, u, nn) < 1e-9 || circ_param_dist(kk, v, nn) < 1e-9) continue;
            out.push_back(static_cast<std::size_t>(kk));
        }
        return out;
    };

    // A bigon is ripe for pass-through when the lens is THIN — the flip arc
    // hugs the other side — not when its corner crossings are close: the
    // lens flattens laterally first, and mid-arc tangency starts spraying
    // spurious crossing pairs while the corners are still many edges apart.
    // Width = largest distance from the thinner arc to the other side.
    struct Pick {
        int b1, b2;
        std::vector<std::size_t> flip;
        std::vector<Vec2> support;
        double width;
    };
    std::optional<Pick> best;
    for (const auto& [p, q] : st.close_ok) {
        if (p < 0 || q >= static_cast<int>(st.xs.size())) continue;
        const CurveCrossing &xa = st.xs[static_cast<std::size_t>(p)],
                            &xb = st.xs[static_cast<std::size_t>(q)];
        // Pair the four passages into the bigon's two sides.
        bool pair11 = circ_param_dist(xa.si, xb.si, nn) + circ_param_dist(xa.sj, xb.sj, nn) <
                      circ_param_dist(xa.si, xb.sj, nn) + circ_param_dist(xa.sj, xb.si, nn);
        double qa = pair11 ? xb.si : xb.sj, qb = pair11 ? xb.sj : xb.si;
        auto side1 = interior(xa.si, qa), side2 = interior(xa.sj, qb);
        if (!side1 || !side2) continue;
        if (side1->empty() && side2->empty()) continue;
        const std::vector<std::size_t>* flipp;
        if (side1->empty()) flipp = &*side2;
        else if (side2->empty()) flipp = &*side1;
        else flipp = side1->size() <= side2->size() ? &*side1 : &*side2;
        const std::vector<std::size_t>& keep = flipp == &*side1 ? *side2 : *side1;
        std::vector<Vec2> support;
        support.push_back(xa.point);
        for (std::size_t v : keep) support.push_back(st.curve.vertices[v]);
        support.push_back(xb.point);
        double width = 0;
        for (std::size_t v : *flipp)
            width = std::max(
                width, (closest_on_polyline(support, st.curve.vertices[v]) - st.curve.vertices[v])
                           .norm());
        if (!best || width < best->width)
            best = Pick{p, q, *flipp, std::move(support), width};
    }
    if (!best || best->width > 1.5 * edge) return -1;
    int b1 = best->b1, b2 = best->b2;
    const std::vector<std::size_t>& flip = best->flip;
    const std::vector<Vec2>& support = best->support;
    FK_SDBG("[surgery] pair (%d,%d): lens width %.4g (edge %.4g), flipping %zu vertices\n", b1,
            b2, best->width, edge, flip.size());

    // Place the flip arc on the far side of the support with a guaranteed
    // clearance.  A mirror image is not enough: a ripe lens is thinner than
    // the projection's own correction ripple, so reflected vertices would sit
    // within noise of the support and the length projection re-crosses the
    // strands it just separated.
    auto closest_with_normal = [](const std::vector<Vec2>& poly, const Vec2& p, Vec2& nrm) {
        Vec2 best = poly.front();
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s + 1 < poly.size(); ++s) {
            Vec2 a = poly[s], d = poly[s + 1] - poly[s];
            double dd = d.norm2();
            double t = dd > 0 ? std::clamp(dot(p - a, d) / dd, 0.0, 1.0) : 0.0;
            Vec2 q = a + d * t;
            double dist = (p - q).norm2();
            if (dist < bd) {
                bd = dist;
                best = q;
                nrm = d.perp().normalized();
            }
        }
        return best;
    };
    PlanarCurve cand = st.curve;
    double side = 0;  // original side of the flip arc, from its widest vertex
    {
        double wmax = -1;
        for (std::size_t v : flip) {
            Vec2 nrm, q = closest_with_normal(support, st.curve.vertices[v], nrm);
            double off = dot(st.curve.vertices[v] - q, nrm);
            if (std::abs(off) > wmax) {
                wmax = std::abs(off);
                side = off >= 0 ? 1.0 : -1.0;
            }
        }
    }
    double clearance = 0.25 * edge;
    for (std::size_t v : flip) {
        Vec2 nrm, q = closest_with_normal(support, cand.vertices[v], nrm);
        double depth = std::max((cand.vertices[v] - q).norm(), clearance);
        cand.vertices[v] = q - nrm * (side * depth);
    }
    double tolp = 0.005 * cfg.length_tol * L;
    if (!project_lengths(cand, st.target, tolp, 2000)) {
        FK_SDBG("[surgery] pair (%d,%d): reflection projection failed\n", b1, b2);
        return 0;
    }

    // Polish without commitment: plain descent, no event checks inside — the
    // final certification sees only the net change.  Total drift from the
    // starting curve stays under two edge lengths: the polish only has to
    // dissipate the reflection's energy bump, and any more motion slides the
    // surviving crossings past the event matcher's window, which would turn a
    // clean annihilation into an unclassifiable compound change.
    double E1 = bending_energy(cand);
    double dtm = 0;
    for (int it = 0; it < 60; ++it) {
        std::vector<Vec2> g = bending_gradient(cand);
        st.smoother.apply(g);
        tangentialize(cand, g);
        double gmax = 0;
        for (const Vec2& w : g) gmax = std::max(gmax, w.norm());
        if (gmax <= 0) break;
        if (it == 0) dtm = 0.05 * edge / gmax;
        PlanarCurve trial = cand;
        for (std::size_t i = 0; i < n; ++i) trial.vertices[i] -= g[i] * dtm;
        if (!project_lengths(trial, st.target, tolp, 2000)) break;
        double drift = 0;
        for (std::size_t i = 0; i < n; ++i)
            drift = std::max(drift, (trial.vertices[i] - st.curve.vertices[i]).norm());
        if (drift > 2.0 * edge) break;
        double Et = bending_energy(trial);
        if (Et < E1) {
            cand = std::move(trial);
            E1 = Et;
            dtm *= 1.2;
        } else {
            dtm *= 0.5;
            if (dtm < 1e-12 * edge) break;
        }
    }

    double E0 = bending_energy(st.curve);
    if (E1 > E0 + 1e-12) {
        FK_SDBG("[surgery] pair (%d,%d): E1-E0=%.4g > slack\n", b1, b2, E1 - E0);
        return 0;
    }
    EventScan scan;
    try {
        if (turning_number(cand) != st.turning) {
            FK_SDBG("[surgery] pair (%d,%d): turning changed\n", b1, b2);
            return 0;
        }
        // Wide matching radius: surviving glancing crossings of a doubled
        // strand bundle slide far along the bundle under the tiny global
        // ripple of the length projection.  A mis-pairing at this radius is
        // caught by the one-move certificate below.
        scan = detect_events(st, cand, static_cast<double>(n) / 8.0);
    } catch (const Error& e) {
        FK_SDBG("[surgery] pair (%d,%d): scan threw: %s\n", b1, b2, e.what());
        return 0;
    }
    if (scan.kind != EventKind::r2minus) {
        FK_SDBG("[surgery] pair (%d,%d): event kind %d not r2minus (%s; created=%zu destroyed=%zu)\n",
                b1, b2, (int)scan.kind, scan.why.c_str(), scan.created.size(),
                scan.destroyed.size());
#ifdef FLATKNOT_DEBUG_SURGERY
        for (std::size_t a : scan.created)
            FK_SDBG("    created (%.3f,%.3f)\n", scan.after[a].si, scan.after[a].sj);
        for (std::size_t b : scan.destroyed)
            FK_SDBG("    destroyed (%.3f,%.3f)\n", st.xs[b].si, st.xs[b].sj);
#endif
        return 0;
    }
    std::set<std::size_t> gone(scan.destroyed.begin(), scan.destroyed.end());
    if (gone !=
        std::set<std::size_t>{static_cast<std::size_t>(b1), static_cast<std::size_t>(b2)}) {
        FK_SDBG("[surgery] pair (%d,%d): wrong pair destroyed\n", b1, b2);
        return 0;
    }
    std::vector<bool> new_overs = carried_overs(st, scan);
    std::string want;
    try {
        want = canonical_code(extract_diagram(cand, new_overs)).code;
    } catch (const Error& e) {
        FK_SDBG("[surgery] pair (%d,%d): extract threw: %s\n", b1, b2, e.what());
        return 0;
    }
    auto cert = certify(st.tracked, MoveKind::R2minus, want);
    if (!cert) {
        FK_SDBG("[surgery] pair (%d,%d): no certificate\n", b1, b2);
        return 0;
    }

    double moved = 0;
    for (std::size_t i = 0; i < n; ++i)
        moved = std::max(moved, (cand.vertices[i] - st.curve.vertices[i]).norm());
    st.curve = std::move(cand);
    st.xs = std::move(scan.after);
    st.overs = std::move(new_overs);
    st.tracked = std::move(cert->first);
    cert->second.step = st.step;
    st.event_log.push_back(std::move(cert->second));
    try {
        st.close_ok = admissible_close_pairs(st.curve, st.overs);
    } catch (const Error&) {
        st.close_ok.clear();
    }
    st.energy_trace.push_back(E1);
    st.last_disp = moved;
    ++st.step;
    return 1;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// One flow step

// One explicit gradient step, then edge-length projection, then legality:
// energy must not increase (1e-12 slack), the turning number must persist,
// and any crossing change must certify as a single plane move on the
// tracked diagram.  A rejected step halves dt (StepCollapse on underflow);
// illegal contact additionally arms the transient repulsion.  Returns
// whether the step was accepted.
inline bool relax_step(RelaxState& st, const RelaxConfig& cfg) {
    ++st.attempts;
    if (st.dt < st.dt0 * 1e-14) {
        std::string diag;
        for (const auto& [why, cnt] : st.reject_counts)
            diag += " [" + why + " x" + std::to_string(cnt) + "]";
        throw StepCollapse("time step underflow at accepted step " + std::to_string(st.step) +
                           "; rejections:" + diag);
    }
    std::size_t n = st.curve.size();
    double L = 0;
    for (double t : st.target) L += t;

    // A certifiable crossing pair within an edge length of merging gets an
    // atomic pass-through proposal before any incremental step.
    if (st.surgery_cooldown > 0) {
        --st.surgery_cooldown;
    } else {
        int sg = detail::try_pass_through(st, cfg);
        if (sg == 1) return true;
        if (sg == 0) {
            st.surgery_cooldown = 32;
            ++st.reject_counts["pass-through declined"];
        }
    }

    double r_pen = 1.5 * L / static_cast<double>(n);
    // Thickness stand-in, as a transient force bias only (armed by illegal
    // contact): folded into the accepted objective it would put a barrier at
    // strand coincidence and block the very annihilations it should steer.
    double k_pen = st.penalty_ttl > 0 ? cfg.contact_penalty : 0.0;

    // Acceptance and the recorded trace use the bending energy alone; the
    // contact term enters only as a force bias, so arming and expiring it
    // cannot put an increase into the trace.
    auto objective = [&](const PlanarCurve& c) { return bending_energy(c); };
    double E0 = objective(st.curve);
    std::vector<Vec2> g = bending_gradient(st.curve);
    detail::add_contact_gradient(st.curve, r_pen, k_pen, g);
    st.smoother.apply(g);

    // Active separation constraints: a guarded crossing pair near the floor
    // whose distance the flow would shrink gets its distance frozen to first
    // order, so descent slides along the barrier instead of pressing into it
    // (which would only feed the reject loop until dt underflows).
    double edge_len = L / static_cast<double>(n);
    double sep_floor = std::max(0.25 * cfg.min_face_perimeter * L, edge_len);
    std::vector<detail::ConstraintRow> active;
    for (std::size_t b1 = 0; b1 < st.xs.size(); ++b1)
        for (std::size_t b2 = b1 + 1; b2 < st.xs.size(); ++b2) {
            if (st.close_ok.count({static_cast<int>(b1), static_cast<int>(b2)})) continue;
            Vec2 dvec = st.xs[b1].point - st.xs[b2].point;
            double d = dvec.norm();
            if (d <= 0 || d > 1.5 * sep_floor) continue;
            Vec2 uh = dvec / d;
            detail::ConstraintRow row;
            detail::add_crossing_point_row(st.curve, st.xs[b1], uh, +1.0, row);
            detail::add_crossing_point_row(st.curve, st.xs[b2], uh, -1.0, row);
            double rate = 0;  // distance rate under the flow -g
            for (const auto& [v, cf] : row) rate -= dot(cf, g[v]);
            if (rate < 0) active.push_back(std::move(row));
        }
    detail::tangentialize(st.curve, g, active);

    auto reject = [&](bool contact, const char* why) {
        st.dt *= 0.5;
        ++st.reject_counts[why];
        if (contact) st.penalty_ttl = std::max(st.penalty_ttl, 4 * cfg.window);
        return false;
    };

    // Clamp the step so no vertex moves more than a fraction of an edge:
    // large dt accelerates smooth descent but must never tunnel a strand
    // through another between two event scans.
    double gmax = 0;
    for (const Vec2& v : g) gmax = std::max(gmax, v.norm());
    double dt_used = gmax > 0 ? std::min(st.dt, 0.3 * edge_len / gmax) : st.dt;
    PlanarCurve cand = st.curve;
    double moved = 0;
    for (std::size_t i = 0; i < n; ++i) {
        Vec2 delta = g[i] * (-dt_used);
        moved = std::max(moved, delta.norm());
        cand.vertices[i] += delta;
    }
    // Project far below the acceptance tolerance: an accepted state must sit
    // well inside the constraint band, or the next micro-step trips a
    // correction sweep whose energy noise (normal gradient times residual)
    // drowns the descent term and stalls step control.
    if (!detail::project_lengths(cand, st.target, 0.005 * cfg.length_tol * L))
        return reject(false, "length projection failed");

    double E1;
    EventScan scan;
    try {
        E1 = objective(cand);
        if (E1 > E0 + 1e-12) return reject(false, "energy increase");
        if (turning_number(cand) != st.turning) return reject(true, "turning number change");
        scan = detect_events(st, cand);
    } catch (const Error&) {
        return reject(false, "degenerate candidate");
    }
    if (scan.kind == EventKind::illegal) return reject(true, "illegal event");

    // Loop-shrink guard: a monogon loop may not fall below the perimeter
    // floor while shrinking -- discretization must not tunnel through the
    // kink barrier that the bending energy enforces in the continuum.
    double edge = L / static_cast<double>(n);
    double floor_len = std::max(cfg.min_face_perimeter * L, 4.0 * edge);
    // Below a floor, shrinking is tolerated only beneath half the plateau
    // displacement tolerance: exact-zero shrink is unattainable numerically
    // (the active constraints hold it only to first order), and a hard test
    // turns a layout that starts at the floor into a reject cascade.  Any
    // creep this slack admits is too slow to escape the convergence window.
    double floor_slack = 0.5 * cfg.tol_disp * L;
    for (std::size_t a = 0; a < scan.after.size(); ++a) {
        if (scan.match[a] == EventScan::npos) continue;
        auto span = [&](const CurveCrossing& x) {
            double d = x.sj - x.si;
            return std::min(d, static_cast<double>(n) - d) * edge;
        };
        bool monogon = true;  // no other crossing parameter inside the short span
        const CurveCrossing& ax = scan.after[a];
        double lo = ax.si, hi = ax.sj;
        bool short_inside = (hi - lo) <= static_cast<double>(n) - (hi - lo);
        for (std::size_t b = 0; b < scan.after.size() && monogon; ++b) {
            if (b == a) continue;
            for (double p : {scan.after[b].si, scan.after[b].sj}) {
                bool inside = p > lo && p < hi;
                if (inside == short_inside) monogon = false;
            }
        }
        if (!monogon) continue;
        double now = span(ax), before = span(st.xs[scan.match[a]]);
        if (now < floor_len && now < before - floor_slack)
            return reject(true, "loop below perimeter floor");
    }

    // Separation guard: crossing points may only merge through a certifiable
    // move.  Pairs with no admissible annihilation or slide between them are
    // kept a floor apart, so the flow settles against the barrier instead of
    // degenerating into a tangency it is not allowed to resolve.
    if (scan.kind == EventKind::none) {
        for (std::size_t a1 = 0; a1 < scan.after.size(); ++a1)
            for (std::size_t a2 = a1 + 1; a2 < scan.after.size(); ++a2) {
                int b1 = static_cast<int>(scan.match[a1]), b2 = static_cast<int>(scan.match[a2]);
                if (st.close_ok.count({std::min(b1, b2), std::max(b1, b2)})) continue;
                double now = (scan.after[a1].point - scan.after[a2].point).norm();
                double before = (st.xs[static_cast<std::size_t>(b1)].point -
                                 st.xs[static_cast<std::size_t>(b2)].point)
                                    .norm();
                if (now < sep_floor && now < before - floor_slack)
                    return reject(true, "crossings approaching without an admissible move");
            }
    }

    // Certify the combinatorial change, if any, as one tracked-diagram move.
    std::vector<bool> new_overs = detail::carried_overs(st, scan);
    std::optional<std::pair<Diagram, MoveEvent>> cert;
    if (scan.kind != EventKind::none) {
        MoveKind mk;
        if (scan.kind == EventKind::r2plus) {
            if (cfg.r2plus_policy == RelaxConfig::R2PlusPolicy::reject)
                return reject(true, "crossing creation (policy reject)");
            std::size_t k1 = scan.created[0], k2 = scan.created[1];
            const CurveCrossing &x1 = scan.after[k1], &x2 = scan.after[k2];
            double nn = static_cast<double>(n);
            // Group the four passage parameters into the two strands: at each
            // new crossing one strand runs close to its partner's passage.
            bool s1_pairs_s2 = detail::circ_param_dist(x1.si, x2.si, nn) <
                               detail::circ_param_dist(x1.si, x2.sj, nn);
            bool strand_a_over;  // strand containing x1.si
            if (cfg.r2plus_policy == RelaxConfig::R2PlusPolicy::random)
                strand_a_over = (st.rng() & 1u) != 0;
            else  // first_arc_over: the strand met first from the basepoint
                strand_a_over = x1.si <= std::min({x1.sj, x2.si, x2.sj});
            new_overs[k1] = strand_a_over;
            new_overs[k2] = s1_pairs_s2 ? strand_a_over : !strand_a_over;
            mk = MoveKind::R2plus;
        } else {
            mk = scan.kind == EventKind::r2minus ? MoveKind::R2minus : MoveKind::R3;
        }
        std::string want;
        try {
            want = canonical_code(extract_diagram(cand, new_overs)).code;
        } catch (const Error&) {
            return reject(false, "degenerate extraction at event");
        }
        cert = detail::certify(st.tracked, mk, want);
        if (!cert) return reject(true, "uncertified event");
    }

    // Accept.
    bool relabeled = cert.has_value();
    for (std::size_t a = 0; a < scan.match.size() && !relabeled; ++a)
        if (scan.match[a] != a) relabeled = true;
    st.curve = std::move(cand);
    st.xs = std::move(scan.after);
    st.overs = std::move(new_overs);
    if (cert) {
        st.tracked = std::move(cert->first);
        cert->second.step = st.step;
        st.event_log.push_back(std::move(cert->second));
    }
    // Registry indices shifted (event or passage-order drift): the
    // admissible-pair table is keyed by index and must follow.
    if (relabeled) {
        try {
            st.close_ok = detail::admissible_close_pairs(st.curve, st.overs);
        } catch (const Error&) {
            st.close_ok.clear();
        }
    }
    st.energy_trace.push_back(E1);
    st.last_disp = moved;
    ++st.step;
    if (st.penalty_ttl > 0) --st.penalty_ttl;
    st.dt = std::min(st.dt * 1.3, st.dt0 * 1e8);
    return true;
}

// ---------------------------------------------------------------------------
// Full runs and comparison

struct NormalFormResult {
    PlanarCurve final_curve;
    Diagram final_diagram;
    std::vector<bool> final_overs;
    MoveLog event_log;
    bool converged = false;
    int steps_used = 0;
    double energy_final = 0;
    std::vector<double> energy_trace;
};

namespace detail {

inline NormalFormResult run_state(RelaxState st, const RelaxConfig& cfg) {
    double L = 0;
    for (double t : st.target) L += t;
    std::deque<double> Ewin, Dwin;
    NormalFormResult out;
    long attempt_cap = 16L * std::max(cfg.max_steps, 1);
    while (st.step < cfg.max_steps && st.attempts < attempt_cap) {
        try {
            if (!relax_step(st, cfg)) continue;
        } catch (const StepCollapse&) {
            // At a constrained minimum the projection round-off (relative size
            // ~1e-10) exceeds the 1e-12 acceptance slack, so every micro-step
            // rejects and dt underflows.  When the accepted history already
            // meets the convergence criteria this is the plateau itself, not a
            // failure; anywhere else the collapse is reported as-is.
            if (static_cast<int>(Ewin.size()) == cfg.window + 1) {
                double drop = (Ewin.front() - Ewin.back()) /
                              std::max(std::abs(Ewin.back()), 1e-300);
                double dmax = *std::max_element(Dwin.begin(), Dwin.end());
                if (drop < cfg.tol_energy && dmax < cfg.tol_disp * L) {
                    out.converged = true;
                    break;
                }
            }
            throw;
        }
        Ewin.push_back(st.energy_trace.back());
        Dwin.push_back(st.last_disp);
        if (static_cast<int>(Ewin.size()) > cfg.window + 1) {
            Ewin.pop_front();
            Dwin.pop_front();
        }
        if (static_cast<int>(Ewin.size()) == cfg.window + 1) {
            double drop = (Ewin.front() - Ewin.back()) /
                          std::max(std::abs(Ewin.back()), 1e-300);
            double dmax = *std::max_element(Dwin.begin(), Dwin.end());
            if (drop < cfg.tol_energy && dmax < cfg.tol_disp * L) {
                out.converged = true;
                break;
            }
        }
    }
    out.final_curve = st.curve;
    out.final_diagram = st.tracked;
    out.final_overs = st.overs;
    out.event_log = st.event_log;
    out.steps_used = st.step;
    out.energy_final = bending_energy(st.curve);
    out.energy_trace = std::move(st.energy_trace);
    // Certificate check: the tracked diagram must still describe the curve.
    if (!st.xs.empty() || !out.final_diagram.trivial()) {
        std::string drawn = canonical_code(extract_diagram(out.final_curve, out.final_overs)).code;
        if (drawn != canonical_code(out.final_diagram).code)
            throw InvalidDiagram("tracked diagram diverged from the relaxed curve");
    }
    return out;
}

}  // namespace detail

inline NormalFormResult relax_run(const Diagram& d, const RelaxConfig& cfg = {}) {
    return detail::run_state(relax_init(d, cfg), cfg);
}

inline NormalFormResult relax_run(const PlanarCurve& c, const std::vector<bool>& overs,
                                  const RelaxConfig& cfg = {}) {
    return detail::run_state(relax_init(c, overs, cfg), cfg);
}

// Canonical-code comparison of two converged normal forms; with the mirror
// flag a reflection match also counts.
inline bool compare_normal_forms(const NormalFormResult& r1, const NormalFormResult& r2,
                                 bool mirror_ok = false) {
    if (!r1.converged || !r2.converged)
        throw NotConverged("normal forms may only be compared after convergence");
    CanonicalCode c1 = canonical_code(r1.final_diagram), c2 = canonical_code(r2.final_diagram);
    if (c1.code == c2.code) return true;
    return mirror_ok && c1.code == c2.mirror_code;
}

// ---------------------------------------------------------------------------
// Same-knot pipeline, relaxation method

struct RelaxSameKnotResult {
    SameKnotResult base;          // verdict + equalization report + caveat
    NormalFormResult form1, form2;
    bool strict_match = false;
    bool mirror_match = false;
};

// Equalizes Whitney indices, relaxes both diagrams, and compares the normal
// forms.  "Distinct" from this method is conditional on normal-form
// uniqueness (an experimental regularity, solid only at small crossing
// numbers) and is labeled as such; it is never an invariant certificate.
inline RelaxSameKnotResult same_knot_relax(const Diagram& d1, const Diagram& d2,
                                           const RelaxConfig& cfg = {}) {
    RelaxSameKnotResult r;
    auto [a, b, rep] = equalize_whitney(d1, d2);
    r.base.equalized = std::move(rep);
    r.form1 = relax_run(a, cfg);
    r.form2 = relax_run(b, cfg);
    if (!r.form1.converged || !r.form2.converged) {
        r.base.verdict.status = IsotopyVerdict::Status::unresolved;
        r.base.verdict.note = "relaxation did not converge within max_steps";
        return r;
    }
    r.strict_match = compare_normal_forms(r.form1, r.form2, false);
    r.mirror_match = compare_normal_forms(r.form1, r.form2, true);
    if (r.strict_match) {
        r.base.verdict.status = IsotopyVerdict::Status::equivalent;
        r.base.caveat =
            "certified by identical normal forms; each run's event log replays "
            "its own input to the shared form";
    } else {
        r.base.verdict.status = IsotopyVerdict::Status::distinct;
        r.base.verdict.witness = "normal_form";
        r.base.verdict.witness_values = canonical_code(r.form1.final_diagram).code + " vs " +
                                        canonical_code(r.form2.final_diagram).code;
        r.base.caveat =
            "conditional: distinct normal forms separate only if the normal form "
            "is unique for these knots";
    }
    return r;
}

}  // namespace flatknot
