#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "density.hpp"
#include "packing.hpp"

namespace bindisc {

struct certifier_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct straddles_half : certifier_error {
    straddles_half() : certifier_error("stoichiometry interval straddles 1/2; split it there first") {}
};
struct uncalibrated_scheme : certifier_error {
    uncalibrated_scheme() : certifier_error("m/Z not calibrated") {}
};
struct calibration_failed : certifier_error {
    std::string word;
    calibration_failed(radius_class q, std::string w)
        : certifier_error(std::string("no m/Z candidate passes the vertex inequality for class ") + letter_of(q) +
                          ", blocking sequence " + w),
          word(std::move(w))
    {
    }
};
struct unknown_pair_class : certifier_error {
    unknown_pair_class() : certifier_error("unknown disc pair class") {}
};
struct nonpositive_eta : certifier_error {
    nonpositive_eta() : certifier_error("eta must be positive") {}
};

// Base potential of a vertex; the middle letter is the vertex's class.
enum class vertex_label { v111, v11r, v1r1, v1rr, vr1r, vrrr };

inline std::string label_name(vertex_label l)
{
    static const char* names[] = {"111", "11r", "1r1", "1rr", "r1r", "rrr"};
    return names[static_cast<int>(l)];
}

inline vertex_label label_at(radius_class self, radius_class a, radius_class b)
{
    int smalls = (a == radius_class::small) + (b == radius_class::small);
    if (self == radius_class::large) return smalls == 0 ? vertex_label::v111 : smalls == 1 ? vertex_label::v11r : vertex_label::vr1r;
    return smalls == 0 ? vertex_label::v1r1 : smalls == 1 ? vertex_label::v1rr : vertex_label::vrrr;
}

enum class pair_class { p11, p1r, prr };

inline pair_class pair_of(radius_class a, radius_class b)
{
    int smalls = (a == radius_class::small) + (b == radius_class::small);
    return static_cast<pair_class>(smalls);
}

inline std::string pair_name(pair_class p)
{
    static const char* names[] = {"11", "1r", "rr"};
    return names[static_cast<int>(p)];
}

struct edge_param {
    interval l, q;
};

inline edge_param table_edge_param(pair_class p, bool high)
{
    auto dec = [](int n, int d) { return ratio<double>(n, d); };
    switch (p) {
    case pair_class::p11: return {dec(25, 10), high ? dec(2, 100) : dec(38, 100)};
    case pair_class::p1r: return {dec(183, 100), high ? dec(5, 100) : dec(15, 100)};
    case pair_class::prr: return {dec(118, 100), high ? dec(8, 100) : dec(15, 100)};
    }
    throw unknown_pair_class();
}

// Exact linear combination, in twelfths, of E111, Errr, E11r, E1rr and V1rr.
struct combo {
    std::array<std::int64_t, 5> c{};

    friend combo operator+(combo a, const combo& b)
    {
        for (int i = 0; i < 5; ++i) a.c[i] += b.c[i];
        return a;
    }
    friend combo operator-(combo a, const combo& b)
    {
        for (int i = 0; i < 5; ++i) a.c[i] -= b.c[i];
        return a;
    }
    friend combo operator*(std::int64_t k, combo a)
    {
        for (auto& v : a.c) v *= k;
        return a;
    }
    combo divided(std::int64_t k) const
    {
        combo a = *this;
        for (auto& v : a.c) {
            if (v % k != 0) throw std::logic_error("combination leaves the twelfths");
            v /= k;
        }
        return a;
    }
    bool zero() const
    {
        return std::all_of(c.begin(), c.end(), [](std::int64_t v) { return v == 0; });
    }
};

// d * delta + c + v * V1rr with interval coefficients; carried through the
// forward substitution to measure equation residuals in floating point.
struct affine {
    interval d, c, v;

    friend affine operator+(const affine& a, const affine& b) { return {a.d + b.d, a.c + b.c, a.v + b.v}; }
    friend affine operator-(const affine& a, const affine& b) { return {a.d - b.d, a.c - b.c, a.v - b.v}; }
    friend affine operator*(const interval& k, const affine& a) { return {k * a.d, k * a.c, k * a.v}; }
    friend affine operator/(const affine& a, const interval& k) { return {a.d / k, a.c / k, a.v / k}; }
};

struct potential_scheme {
    interval x;
    bool high = false;           // x >= 1/2 branch
    double delta_offset = 0;     // shifts the density used by the potentials (soundness probes)
    interval delta;              // delta_max over x
    interval delta_scheme;       // delta + offset
    interval v1rr;
    std::array<combo, 6> V_combo;
    std::array<combo, 2> alpha_combo; // large, small
    std::array<affine, 6> V_affine;
    std::array<affine, 2> alpha_affine;
    std::array<interval, 6> V;
    interval alpha_1, alpha_r;
    bool calibrated = false;
    interval m_1, m_r, Z_1, Z_r;
    std::array<edge_param, 3> edges;
    double eta = 0;

    regime reg() const { return high ? regime::x_ge_half : regime::x_le_half; }
    const interval& potential(vertex_label l) const { return V[static_cast<int>(l)]; }
    const interval& alpha(radius_class q) const { return q == radius_class::large ? alpha_1 : alpha_r; }
    const interval& m(radius_class q) const { return q == radius_class::large ? m_1 : m_r; }
    const interval& Z(radius_class q) const { return q == radius_class::large ? Z_1 : Z_r; }

    interval value(const combo& k) const
    {
        static const tight_kind order[4] = {tight_kind::t111, tight_kind::trrr, tight_kind::t11r, tight_kind::t1rr};
        interval a = 0, b = 0;
        for (int i = 0; i < 4; ++i) {
            if (k.c[i] == 0) continue;
            const auto& d = tight_data<double>(order[i]);
            a += interval(static_cast<double>(k.c[i])) * d.area;
            b += interval(static_cast<double>(k.c[i])) * d.coverage;
        }
        interval out = delta_scheme * a - b + interval(static_cast<double>(k.c[4])) * v1rr;
        return out / interval(12.0);
    }

    interval value(const affine& a) const { return a.d * delta_scheme + a.c + a.v * v1rr; }
};

struct equation_residual {
    std::string name;
    interval value;
};

namespace detail {

inline interval pinned_v1rr(const interval& x, bool high)
{
    if (high) return ratio<double>(-9, 1000);
    return (interval(7.0) * sqr(x) + interval(6.0) * x - interval(1.0)) / interval(1000.0);
}

// a quantity known both exactly (for cancellations) and as an affine form
struct quantity {
    combo k;
    affine a;

    friend quantity operator+(const quantity& p, const quantity& q) { return {p.k + q.k, p.a + q.a}; }
    friend quantity operator-(const quantity& p, const quantity& q) { return {p.k - q.k, p.a - q.a}; }
    friend quantity operator*(std::int64_t n, const quantity& p)
    {
        return {n * p.k, interval(static_cast<double>(n)) * p.a};
    }
    quantity divided(std::int64_t n) const { return {k.divided(n), a / interval(static_cast<double>(n))}; }
};

inline quantity tight_quantity(tight_kind kind, int slot)
{
    const auto& d = tight_data<double>(kind);
    combo k;
    k.c[slot] = 12;
    return {k, {d.area, -d.coverage, interval(0.0)}};
}

} // namespace detail

inline bool straddles(const interval& x) { return x.lo() < 0.5 && x.hi() > 0.5; }

// Forward substitution through the eight defining equations.
inline potential_scheme solve_base_potentials(const interval& x, double delta_offset = 0)
{
    if (x.lo() < 0 || x.hi() > 1) throw std::out_of_range("stoichiometry outside [0,1]");
    if (straddles(x)) throw straddles_half();
    using detail::quantity;
    potential_scheme s;
    s.x = x;
    s.high = x.lo() >= 0.5;
    s.delta_offset = delta_offset;
    s.delta = delta_max(x);
    s.delta_scheme = s.delta + interval(delta_offset);
    s.v1rr = detail::pinned_v1rr(x, s.high);

    quantity E111 = detail::tight_quantity(tight_kind::t111, 0);
    quantity Errr = detail::tight_quantity(tight_kind::trrr, 1);
    quantity E11r = detail::tight_quantity(tight_kind::t11r, 2);
    quantity E1rr = detail::tight_quantity(tight_kind::t1rr, 3);
    quantity V1rr{{{0, 0, 0, 0, 12}}, {interval(0.0), interval(0.0), interval(1.0)}};

    quantity V111 = E111.divided(3);
    quantity Vrrr = Errr.divided(3);
    quantity V11r, V1r1, a1, ar;
    if (s.high) {
        a1 = 6 * V111;
        V11r = a1.divided(8);
        V1r1 = E11r - 2 * V11r;
        ar = 4 * V1r1;
    } else {
        ar = 6 * Vrrr;
        V1r1 = ar.divided(4);
        V11r = (E11r - V1r1).divided(2);
        a1 = 8 * V11r;
    }
    quantity Vr1r = E1rr - 2 * V1rr;

    const std::array<quantity, 6> all{V111, V11r, V1r1, V1rr, Vr1r, Vrrr};
    for (int i = 0; i < 6; ++i) {
        s.V_combo[i] = all[i].k;
        s.V_affine[i] = all[i].a;
        s.V[i] = s.value(all[i].k);
    }
    s.alpha_combo = {a1.k, ar.k};
    s.alpha_affine = {a1.a, ar.a};
    s.alpha_1 = s.value(a1.k);
    s.alpha_r = s.value(ar.k);
    for (int p = 0; p < 3; ++p) s.edges[p] = table_edge_param(static_cast<pair_class>(p), s.high);
    return s;
}

// Residuals LHS - RHS of the eight equations from the floating-point affine
// forms, so they measure the substitution rather than restate it.
inline std::vector<equation_residual> equation_residuals(const potential_scheme& s)
{
    auto tight = [](tight_kind k) {
        const auto& d = tight_data<double>(k);
        return affine{d.area, -d.coverage, interval(0.0)};
    };
    const auto& V = s.V_affine;
    auto at = [&](vertex_label l) { return V[static_cast<int>(l)]; };
    using L = vertex_label;
    std::vector<std::pair<std::string, affine>> eqs{
        {"3V111 = E111", interval(3.0) * at(L::v111) - tight(tight_kind::t111)},
        {"3Vrrr = Errr", interval(3.0) * at(L::vrrr) - tight(tight_kind::trrr)},
        {"2V11r + V1r1 = E11r", interval(2.0) * at(L::v11r) + at(L::v1r1) - tight(tight_kind::t11r)},
        {"2V1rr + Vr1r = E1rr", interval(2.0) * at(L::v1rr) + at(L::vr1r) - tight(tight_kind::t1rr)},
        {"8V11r = alpha_1", interval(8.0) * at(L::v11r) - s.alpha_affine[0]},
        {"4V1r1 = alpha_r", interval(4.0) * at(L::v1r1) - s.alpha_affine[1]},
        {s.high ? "6V111 = alpha_1" : "6Vrrr = alpha_r",
         s.high ? interval(6.0) * at(L::v111) - s.alpha_affine[0] : interval(6.0) * at(L::vrrr) - s.alpha_affine[1]},
        {"V1rr pinned", at(L::v1rr) - affine{interval(0.0), interval(0.0), interval(1.0)}},
    };
    std::vector<equation_residual> out;
    for (auto& [name, a] : eqs) out.push_back({name, s.value(a)});
    return out;
}

// x alpha_1 + (1-x) alpha_r over the interval. Both alphas are
// delta * a - b with delta = N(x)/D(x) linear-fractional, so the identity
// is a quadratic in x over D(x); its coefficients vanish exactly and are
// enclosed to rounding, which keeps the result tight on wide x.
inline interval check_stoichiometry_identity(const potential_scheme& s)
{
    static const tight_kind order[4] = {tight_kind::t111, tight_kind::trrr, tight_kind::t11r, tight_kind::t1rr};
    auto parts = [&](const combo& k) {
        if (k.c[4] != 0) throw std::logic_error("alpha depends on V1rr");
        interval a = 0, b = 0;
        for (int i = 0; i < 4; ++i) {
            const auto& d = tight_data<double>(order[i]);
            a += interval(static_cast<double>(k.c[i])) * d.area;
            b += interval(static_cast<double>(k.c[i])) * d.coverage;
        }
        return std::pair{a / interval(12.0), b / interval(12.0)};
    };
    auto [a1, b1] = parts(s.alpha_combo[0]);
    auto [ar, br] = parts(s.alpha_combo[1]);
    const auto& pi = constants<double>::pi();
    const auto& r2 = constants<double>::r_squared();
    const auto& s3 = constants<double>::sqrt3();
    interval n0 = pi * r2, n1 = pi * (interval(1.0) - r2);
    interval d0, d1;
    if (s.high) {
        d0 = interval(4.0) - interval(2.0) * s3;
        d1 = interval(4.0) * s3 - interval(4.0);
    } else {
        d0 = interval(2.0) * s3 * r2;
        d1 = interval(4.0) - interval(4.0) * s3 * r2;
    }
    interval g0 = ar, g1 = a1 - ar, h0 = br, h1 = b1 - br;
    interval p0 = n0 * g0 - d0 * h0;
    interval p1 = n0 * g1 + n1 * g0 - d0 * h1 - d1 * h0;
    interval p2 = n1 * g1 - d1 * h1;
    const interval& x = s.x;
    interval identity = (p0 + p1 * x + p2 * sqr(x)) / (d0 + d1 * x);
    return identity + interval(s.delta_offset) * (g0 + g1 * x);
}

enum class edge_role { donor, receiver };

// Antisymmetric transfer across an edge: the donor pays q (|e| - l)^+, the
// receiver gets it.
inline interval edge_potential(const potential_scheme& s, pair_class p, const interval& length, edge_role side)
{
    int i = static_cast<int>(p);
    if (i < 0 || i > 2) throw unknown_pair_class();
    const edge_param& e = s.edges[i];
    interval t = e.q * max(interval(0.0), length - e.l);
    return side == edge_role::donor ? t : -t;
}

namespace detail {

template <class T, class S>
inline basic_interval<T> widen(const basic_interval<S>& a)
{
    return basic_interval<T>(static_cast<T>(a.lo()), static_cast<T>(a.hi()));
}

// Which side of each edge the tangent circles of a triangle box lie on.
// Vertices are placed at (0,0), (s2,0) and above the first side.
struct support_info {
    bool feasible = true;        // false: no tangent circle (below r when saturated) at all
    bool saturated = false;      // some tangent circle certainly has radius < r
    std::array<int, 3> beyond{-1, -1, -1}; // 1: every candidate circle lies beyond side i, 0: none does
};

template <class T>
inline support_info box_support(const std::array<radius_class, 3>& radii, const std::array<basic_interval<T>, 3>& s,
                                const basic_interval<T>& area, bool saturated_only)
{
    using I = basic_interval<T>;
    support_info out;
    const I r = constants<T>::r();
    I ra = radius_value<T>(radii[0]), rb = radius_value<T>(radii[1]), rc = radius_value<T>(radii[2]);
    I bx = s[2];
    I cx = (sqr(s[2]) + sqr(s[1]) - sqr(s[0])) / (T(2) * s[2]);
    I kb = sqr(bx) - sqr(rb) + sqr(ra), lb = T(-2) * (rb - ra);
    I kc = sqr(s[1]) - sqr(rc) + sqr(ra), lc = T(-2) * (rc - ra);
    I X0 = kb / (T(2) * bx), X1 = lb / (T(2) * bx);
    if (saturated_only) {
        // The tangency equation times cy^2 has coefficients free of 1/cy, so
        // it stays sharp on nearly flat boxes. No root in [0, r] at all means
        // no saturated tangent circle.
        I cy2 = area_squared_times16(s) / (T(4) * sqr(s[2]));
        I Y0c = (bx * kc - cx * kb) / (T(2) * bx), Y1c = (bx * lc - cx * lb) / (T(2) * bx);
        I A2 = cy2 * (sqr(X1) - T(1)) + sqr(Y1c);
        I B2 = T(2) * (cy2 * (X0 * X1 - ra) + Y0c * Y1c);
        I C2 = cy2 * (sqr(X0) - sqr(ra)) + sqr(Y0c);
        const int pieces = 8;
        bool root_possible = false;
        for (int k = 0; k < pieces && !root_possible; ++k) {
            I rho = I(T(k), T(k + 1)) * I(r.hi()) / T(pieces);
            I v = C2 + rho * (B2 + rho * A2);
            root_possible = v.contains_zero();
        }
        if (!root_possible) {
            out.feasible = false;
            return out;
        }
    }
    I cy = T(2) * area / s[2];
    if (cy.lo() <= 0) return out;
    I D = T(2) * bx * cy;
    I Y0 = (bx * kc - cx * kb) / D, Y1 = (bx * lc - cx * lb) / D;
    I qa = sqr(X1) + sqr(Y1) - T(1);
    I qb = T(2) * (X0 * X1 + Y0 * Y1 - ra);
    I qc = sqr(X0) + sqr(Y0) - sqr(ra);
    I disc = sqr(qb) - T(4) * qa * qc;
    if (disc.hi() < 0) {
        out.feasible = false;
        return out;
    }
    if (disc.lo() < 0) return out;
    I sq = sqrt(disc);
    std::array<I, 2> roots;
    if (qa.contains_zero()) return out;
    if (!qb.contains_zero()) {
        I q = qb.positive() ? (qb + sq) / T(-2) : (qb - sq) / T(-2);
        if (q.contains_zero()) return out;
        roots = {qc / q, q / qa};
    } else {
        roots = {(-qb + sq) / (T(2) * qa), (-qb - sq) / (T(2) * qa)};
    }
    const std::array<I, 3> sx{I(T(0)), bx, cx}, sy{I(T(0)), I(T(0)), cy}, sr{ra, rb, rc};
    std::array<int, 3> agg{2, 2, 2}; // 2: no candidate yet
    bool any = false;
    for (const I& rho : roots) {
        if (rho.hi() <= 0) continue;
        if (rho.lo() <= 0) return support_info{};
        if (saturated_only && rho.lo() >= r.hi()) continue;
        I X = X0 + rho * X1, Y = Y0 + rho * Y1;
        std::array<I, 3> ux, uy;
        for (int i = 0; i < 3; ++i) {
            I w = rho + sr[i];
            ux[i] = (sx[i] - X) / w;
            uy[i] = (sy[i] - Y) / w;
        }
        I o = (ux[1] - ux[0]) * (uy[2] - uy[0]) - (uy[1] - uy[0]) * (ux[2] - ux[0]);
        if (o.contains_zero()) return support_info{};
        if (!o.positive()) continue;
        any = true;
        if (saturated_only && rho.hi() < r.lo()) out.saturated = true;
        // edge j -> j+1 is opposite vertex j+2; P beyond it iff the cross product is negative
        std::array<I, 3> cross;
        cross[2] = bx * Y;
        cross[0] = (cx - bx) * Y - cy * (X - bx);
        cross[1] = (-cx) * (Y - cy) - (-cy) * (X - cx);
        for (int i = 0; i < 3; ++i) {
            int b = cross[i].negative() ? 1 : cross[i].positive() ? 0 : -1;
            agg[i] = agg[i] == 2 ? b : (agg[i] == b ? b : -1);
        }
    }
    if (!any) {
        out.feasible = false;
        return out;
    }
    if (!saturated_only) out.saturated = true;
    for (int i = 0; i < 3; ++i) out.beyond[i] = agg[i];
    return out;
}

template <class T>
struct local_context {
    tight_kind kind;
    std::array<radius_class, 3> radii;
    std::array<basic_interval<T>, 3> tight, theta0, cap, m, half_r2, l, q;
    basic_interval<T> area0, cov0, delta, offset_term;
};

template <class T>
inline local_context<T> make_context(const potential_scheme& s, tight_kind kind)
{
    if (!s.calibrated) throw uncalibrated_scheme();
    using I = basic_interval<T>;
    local_context<T> c;
    c.kind = kind;
    c.radii = kind_radii(kind);
    auto spec = tight_spec<T>(kind);
    const auto& td = tight_data<T>(kind);
    c.area0 = td.area;
    c.cov0 = td.coverage;
    c.delta = widen<T>(s.delta);
    c.offset_term = I(T(s.delta_offset)) * td.area;
    for (int v = 0; v < 3; ++v) {
        int a = (v + 1) % 3, b = (v + 2) % 3;
        radius_class q = c.radii[v];
        vertex_label lab = label_at(q, c.radii[a], c.radii[b]);
        c.tight[v] = spec.sides[v];
        c.theta0[v] = td.angles[v];
        c.cap[v] = widen<T>(s.Z(q)) - widen<T>(s.potential(lab));
        c.m[v] = widen<T>(s.m(q));
        c.half_r2[v] = radius_squared<T>(q) / T(2);
        const edge_param& e = s.edges[static_cast<int>(pair_of(c.radii[a], c.radii[b]))];
        c.l[v] = widen<T>(e.l);
        c.q[v] = widen<T>(e.q);
    }
    return c;
}

template <class T>
struct local_value {
    bool infeasible = false;
    bool smooth = false;
    bool saturated = false;
    std::array<int, 3> sigma{1, 1, 1}; // +1 donor, -1 receiver
    basic_interval<T> f;
    std::array<basic_interval<T>, 3> grad;
};

// E(T) - U(T) on a box. The base potentials of a triangle sum to its tight
// emptiness, so E - U = delta (A - A0) - (cov - C0) - deviations - edges,
// which vanishes exactly at the tight triangle.
template <class T>
inline local_value<T> evaluate_local(const local_context<T>& c, const std::array<basic_interval<T>, 3>& s,
                                     bool with_grad, const std::array<int, 3>* fixed_sigma = nullptr)
{
    using I = basic_interval<T>;
    local_value<T> out;
    triangle_geometry<T> g;
    try {
        g = triangle_shape(s);
    } catch (const degenerate_box&) {
        out.infeasible = true;
        return out;
    }
    if (fixed_sigma) {
        out.sigma = *fixed_sigma;
    } else {
        support_info sup = box_support(c.radii, s, g.area, true);
        if (!sup.feasible) {
            out.infeasible = true;
            return out;
        }
        out.saturated = sup.saturated;
        for (int i = 0; i < 3; ++i) out.sigma[i] = sup.beyond[i] == 1 ? -1 : 1;
    }
    triangle_spec<T> t{c.radii, s};
    bool crossing = false;
    for (int i = 0; i < 3; ++i) crossing = crossing || sector_may_cross(t, g, i);
    I cov = triangle_coverage(t, g);
    I f = c.delta * (g.area - c.area0) - (cov - c.cov0) - c.offset_term;
    std::array<I, 3> dev;
    for (int v = 0; v < 3; ++v) {
        dev[v] = g.angles[v] - c.theta0[v];
        f -= min(c.cap[v], c.m[v] * abs(dev[v]));
    }
    for (int i = 0; i < 3; ++i) {
        I tr = c.q[i] * max(I(T(0)), s[i] - c.l[i]);
        f -= I(T(out.sigma[i])) * tr;
    }
    out.f = f;
    out.smooth = !crossing && g.area.lo() > 0;
    if (!with_grad || !out.smooth) return out;

    I inv2A = T(1) / (T(2) * g.area);
    I prod = s[0] * s[1] * s[2];
    for (int i = 0; i < 3; ++i) {
        I gi = c.delta * prod * g.cosines[i] / (T(4) * g.area);
        for (int v = 0; v < 3; ++v) {
            I dth = v == i ? s[i] * inv2A : -(s[v] * g.cosines[3 - v - i] * inv2A);
            gi -= c.half_r2[v] * dth;
            I mag = c.m[v] * abs(dev[v]);
            I sg = dev[v].lo() > 0 ? I(T(1)) : dev[v].hi() < 0 ? I(T(-1)) : I(T(-1), T(1));
            I dw = c.m[v] * sg * dth;
            if (mag.hi() < c.cap[v].lo())
                gi -= dw;
            else if (!(mag.lo() > c.cap[v].hi()))
                gi -= hull(I(T(0)), dw);
        }
        I H = s[i].lo() >= c.l[i].hi() ? I(T(1)) : s[i].hi() <= c.l[i].lo() ? I(T(0)) : I(T(0), T(1));
        gi -= I(T(out.sigma[i])) * c.q[i] * H;
        out.grad[i] = gi;
    }
    return out;
}

} // namespace detail

// Potential credited to vertex v of a triangle box.
inline interval vertex_potential(const potential_scheme& s, const triangle_spec<double>& t, int v)
{
    if (!s.calibrated) throw uncalibrated_scheme();
    int a = (v + 1) % 3, b = (v + 2) % 3;
    radius_class q = t.radii[v];
    vertex_label lab = label_at(q, t.radii[a], t.radii[b]);
    auto g = triangle_shape(t.sides);
    auto g0 = triangle_shape(tight_spec<double>(t.radii).sides);
    interval dev = abs(g.angles[v] - g0.angles[v]);
    return min(s.Z(q), s.potential(lab) + s.m(q) * dev);
}

// Role of each side of a concrete triangle (side i opposite vertex i): the
// triangle receives across an edge when its tangent circle lies beyond it.
// Along the weighted bisector of the edge the two tangent-circle centres of
// the incident triangles bound the Voronoi edge, so at most one of them is
// beyond the edge; every edge thus has at most one receiver.
inline std::array<edge_role, 3> edge_roles(const triangle_spec<double>& t, bool saturated_only)
{
    auto g = triangle_shape(t.sides);
    auto sup = detail::box_support(t.radii, t.sides, g.area, saturated_only);
    std::array<edge_role, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = sup.beyond[i] == 1 ? edge_role::receiver : edge_role::donor;
    return out;
}

// ---------------------------------------------------------------------------
// Vertex inequality

struct angle_range {
    interval lo_hi;  // hull of the angle over saturated FM triangles
    interval tight;  // angle in the tight triangle
};

namespace detail {

// Rigorous bound on the extreme angle at vertex v over saturated triangles of
// a kind: best-first subdivision of the root box until the leading box is
// narrower than tol in every side.
inline double angle_extreme(tight_kind kind, int v, bool smallest, double tol = 4e-3)
{
    auto radii = kind_radii(kind);
    auto spec = tight_spec<double>(kind);
    const interval two_r = interval(2.0) * constants<double>::r();
    struct item {
        double key;
        std::array<interval, 3> s;
        bool operator<(const item& o) const { return key > o.key; }
    };
    auto key_of = [&](const std::array<interval, 3>& s) -> std::optional<double> {
        triangle_geometry<double> g;
        try {
            g = triangle_shape(s);
        } catch (const degenerate_box&) {
            return std::nullopt;
        }
        if (!box_support(radii, s, g.area, true).feasible) return std::nullopt;
        return smallest ? g.angles[v].lo() : -g.angles[v].hi();
    };
    std::array<interval, 3> root;
    for (int i = 0; i < 3; ++i) root[i] = interval(spec.sides[i].lo(), (spec.sides[i] + two_r).hi());
    std::priority_queue<item> queue;
    if (auto k = key_of(root)) queue.push({*k, root});
    while (!queue.empty()) {
        item top = queue.top();
        queue.pop();
        int w = 0;
        for (int i = 1; i < 3; ++i)
            if (top.s[i].width() > top.s[w].width()) w = i;
        if (top.s[w].width() < tol) return smallest ? top.key : -top.key;
        auto [l, r] = top.s[w].bisect();
        for (const auto& half : {l, r}) {
            auto s = top.s;
            s[w] = half;
            if (auto k = key_of(s)) queue.push({*k, s});
        }
    }
    throw std::logic_error("no feasible triangle");
}

inline const std::array<angle_range, 6>& label_angle_ranges()
{
    static const std::array<angle_range, 6> table = [] {
        std::array<std::optional<interval>, 6> hulls;
        std::array<interval, 6> tight;
        for (int k = 0; k < 4; ++k) {
            auto kind = static_cast<tight_kind>(k);
            auto radii = kind_radii(kind);
            const auto& td = tight_data<double>(kind);
            for (int v = 0; v < 3; ++v) {
                int l = static_cast<int>(label_at(radii[v], radii[(v + 1) % 3], radii[(v + 2) % 3]));
                tight[l] = td.angles[v];
                interval range(angle_extreme(kind, v, true), angle_extreme(kind, v, false));
                hulls[l] = hulls[l] ? hull(*hulls[l], range) : range;
            }
        }
        std::array<angle_range, 6> out;
        for (int l = 0; l < 6; ++l) out[l] = {hull(*hulls[l], tight[l]), tight[l]};
        return out;
    }();
    return table;
}

// labels around a vertex of class q, indexed by the number of small neighbours
// of the triangle's two other vertices
inline std::array<vertex_label, 3> labels_of(radius_class q)
{
    if (q == radius_class::large) return {vertex_label::v111, vertex_label::v11r, vertex_label::vr1r};
    return {vertex_label::v1r1, vertex_label::v1rr, vertex_label::vrrr};
}

struct sequence_class {
    std::array<int, 3> count{}; // triangles by number of small neighbours
    bool bad = false;
    std::string word;
};

inline int max_sequence_length(radius_class q)
{
    const auto& ranges = label_angle_ranges();
    double least = 10;
    for (auto l : labels_of(q)) least = std::min(least, ranges[static_cast<int>(l)].lo_hi.lo());
    return static_cast<int>(std::floor((2 * constants<double>::pi()).hi() / least));
}

// Cyclic neighbour sequences grouped by what the vertex inequality sees: the
// triangle count per label (n0 pairs "11", n1 mixed pairs, n2 pairs "rr")
// and whether some word with these counts is bad. Every good word has at
// most 8 letters, so longer classes are bad without looking at words.
inline const std::vector<sequence_class>& sequence_classes(radius_class q, regime g)
{
    constexpr int longest_good = 8;
    static const auto table = [] {
        std::array<std::vector<sequence_class>, 4> out;
        for (int qi = 0; qi < 2; ++qi)
            for (int gi = 0; gi < 2; ++gi) {
                radius_class q = qi == 0 ? radius_class::large : radius_class::small;
                regime reg = gi == 0 ? regime::x_le_half : regime::x_ge_half;
                std::map<std::array<int, 3>, std::pair<bool, std::string>> shortw;
                for (int k = 3; k <= longest_good; ++k)
                    for (std::uint32_t bits = 0; bits < (1u << k); ++bits) {
                        std::string w(k, '1');
                        for (int i = 0; i < k; ++i)
                            if (bits >> i & 1u) w[i] = 'r';
                        std::array<int, 3> cnt{};
                        for (int i = 0; i < k; ++i) ++cnt[(w[i] == 'r') + (w[(i + 1) % k] == 'r')];
                        bool bad = is_bad_neighborhood(neighborhood_word(w), q, reg);
                        auto [it, fresh] = shortw.try_emplace(cnt, bad, neighborhood_word(w).str());
                        if (!fresh && bad && !it->second.first) it->second = {true, neighborhood_word(w).str()};
                    }
                int K = max_sequence_length(q);
                for (int k = 3; k <= K; ++k)
                    for (int n1 = 0; n1 <= k; n1 += 2)
                        for (int n0 = 0; n0 + n1 <= k; ++n0) {
                            int n2 = k - n0 - n1;
                            if (n1 == 0 && n0 > 0 && n2 > 0) continue;
                            std::array<int, 3> cnt{n0, n1, n2};
                            if (k <= longest_good) {
                                const auto& [bad, w] = shortw.at(cnt);
                                out[qi * 2 + gi].push_back({cnt, bad, w});
                                continue;
                            }
                            // n1 / 2 runs of each letter, the first ones long
                            int runs = n1 / 2;
                            std::string w;
                            if (runs == 0) {
                                w.assign(k, n0 > 0 ? '1' : 'r');
                            } else {
                                for (int i = 0; i < runs; ++i) {
                                    w.append(i == 0 ? n0 + 1 : 1, '1');
                                    w.append(i == 0 ? n2 + 1 : 1, 'r');
                                }
                            }
                            out[qi * 2 + gi].push_back({cnt, true, neighborhood_word(w).str()});
                        }
            }
        return out;
    }();
    int qi = q == radius_class::large ? 0 : 1;
    int gi = g == regime::x_le_half ? 0 : 1;
    return table[qi * 2 + gi];
}

struct vertex_case {
    const sequence_class* cls;
    interval base;     // sum of base potentials minus alpha_q, exact cancellations kept
    interval deficit;  // 2 pi minus the tight angles
    bool possible = true;
};

inline std::vector<vertex_case> vertex_cases(const potential_scheme& s, radius_class q)
{
    const auto& ranges = label_angle_ranges();
    auto labels = labels_of(q);
    const interval two_pi = interval(2.0) * constants<double>::pi();
    std::vector<vertex_case> out;
    for (const auto& cls : sequence_classes(q, s.reg())) {
        combo total = combo{} - s.alpha_combo[q == radius_class::large ? 0 : 1];
        interval tight = 0, least = 0, most = 0;
        for (int j = 0; j < 3; ++j) {
            int l = static_cast<int>(labels[j]);
            total = total + static_cast<std::int64_t>(cls.count[j]) * s.V_combo[l];
            interval n(static_cast<double>(cls.count[j]));
            tight += n * ranges[l].tight;
            least += n * interval(ranges[l].lo_hi.lo());
            most += n * interval(ranges[l].lo_hi.hi());
        }
        vertex_case c{&cls, s.value(total), two_pi - tight};
        c.possible = least.lo() <= two_pi.hi() && most.hi() >= two_pi.lo();
        out.push_back(c);
    }
    return out;
}

// Lower bound of sum_i min(cap_i, m |d_i|) over deviations d_i in their
// ranges with sum d_i = D. Triangles that reach their cap pay it and can
// absorb up to their whole room; the rest pays m per unit, so the bound is a
// minimum over how many triangles of each label are capped.
inline interval deviation_cost(const vertex_case& c, radius_class q, const potential_scheme& s, const interval& m,
                               const interval& Z, double need = -std::numeric_limits<double>::infinity())
{
    if (c.deficit.contains_zero()) return interval(0.0);
    const auto& ranges = label_angle_ranges();
    auto labels = labels_of(q);
    bool up = c.deficit.positive();
    interval D(c.deficit.mig());
    std::array<interval, 3> room, cap;
    for (int j = 0; j < 3; ++j) {
        int l = static_cast<int>(labels[j]);
        const auto& rg = ranges[l];
        room[j] = interval(up ? (interval(rg.lo_hi.hi()) - rg.tight).hi() : (rg.tight - interval(rg.lo_hi.lo())).hi());
        cap[j] = interval((Z - s.V[l]).lo());
    }
    const auto& n = c.cls->count;
    // Weak duality: for any y in [0, m] the cost is at least
    // y D - sum_j n_j max(0, y room_j - cap_j). The bound is concave in y, so
    // its breakpoints and m are the only candidates worth trying.
    auto dual = [&](const interval& y) {
        interval v = y * D;
        for (int j = 0; j < 3; ++j) v -= interval(double(n[j])) * max(interval(0.0), y * room[j] - cap[j]);
        return v.lo();
    };
    double best = dual(m);
    for (int j = 0; j < 3; ++j)
        if (n[j] > 0 && room[j].lo() > 0) {
            interval y = cap[j] / room[j];
            if (y.hi() < m.lo() && y.lo() > 0) best = std::max(best, dual(interval(y.lo())));
        }
    if (best >= need) return interval(best);
    double exact = std::numeric_limits<double>::infinity();
    for (int a = 0; a <= n[0]; ++a)
        for (int b = 0; b <= n[1]; ++b)
            for (int e = 0; e <= n[2]; ++e) {
                interval paid = interval(double(a)) * cap[0] + interval(double(b)) * cap[1] + interval(double(e)) * cap[2];
                interval absorbed = interval(double(a)) * room[0] + interval(double(b)) * room[1] + interval(double(e)) * room[2];
                interval rest = max(interval(0.0), D - absorbed);
                exact = std::min(exact, (paid + m * rest).lo());
            }
    best = std::max(best, exact);
    return interval(best);
}

} // namespace detail

struct vertex_check_result {
    bool pass = true;
    std::string word;   // first failing sequence
    interval margin;    // its lower bound of sum U - alpha_q (- eta)
    std::size_t sequences = 0;
};

namespace detail {

inline vertex_check_result check_vertex_cases(const std::vector<vertex_case>& cases, const potential_scheme& s,
                                              radius_class q, bool strengthened, const interval& m, const interval& Z)
{
    vertex_check_result out;
    for (const auto& c : cases) {
        if (!c.possible) continue;
        ++out.sequences;
        double need = strengthened && c.cls->bad ? s.eta : 0.0;
        if (c.base.lo() >= need) continue;
        interval total = c.base + deviation_cost(c, q, s, m, Z, (interval(need) - c.base).hi()) - interval(need);
        if (total.lo() < 0) {
            out.pass = false;
            out.word = c.cls->word;
            out.margin = total;
            return out;
        }
    }
    return out;
}

inline double max_base_potential(const potential_scheme& s, radius_class q)
{
    double z = -std::numeric_limits<double>::infinity();
    for (auto l : labels_of(q)) z = std::max(z, s.potential(l).hi());
    return z;
}

} // namespace detail

// Sum over the triangles around a q-vertex of min(Z_q, V + m_q |deviation|)
// is at least alpha_q (alpha_q + eta for bad sequences when strengthened),
// for every sequence of neighbour classes and every admissible angle split.
inline vertex_check_result verify_vertex_inequality(const potential_scheme& s, radius_class q, bool strengthened)
{
    if (!s.calibrated) throw uncalibrated_scheme();
    auto cases = detail::vertex_cases(s, q);
    return detail::check_vertex_cases(cases, s, q, strengthened, s.m(q), s.Z(q));
}

// Candidate grids: m = j/1000 (j = 0..2000), Z = max base potential + k/1000
// (k = 0..1000). Passing is monotone in both, so the least m that passes with
// the largest Z is found by bisection, then the least Z for that m.
inline potential_scheme calibrate_m_Z(potential_scheme s)
{
    bool strengthened = s.eta > 0;
    for (radius_class q : {radius_class::large, radius_class::small}) {
        auto cases = detail::vertex_cases(s, q);
        double zbase = detail::max_base_potential(s, q);
        auto m_at = [](int j) { return interval(static_cast<double>(j)) / interval(1000.0); };
        auto z_at = [&](int k) {
            interval z = interval(zbase) + interval(static_cast<double>(k)) / interval(1000.0);
            return interval(z.hi());
        };
        auto passes = [&](int j, int k) {
            return detail::check_vertex_cases(cases, s, q, strengthened, m_at(j), z_at(k)).pass;
        };
        const int jmax = 2000, kmax = 1000;
        if (!passes(jmax, kmax)) {
            auto r = detail::check_vertex_cases(cases, s, q, strengthened, m_at(jmax), z_at(kmax));
            throw calibration_failed(q, r.word);
        }
        int lo = -1, hi = jmax;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            (passes(mid, kmax) ? hi : lo) = mid;
        }
        int j = hi;
        lo = -1, hi = kmax;
        while (hi - lo > 1) {
            int mid = (lo + hi) / 2;
            (passes(j, mid) ? hi : lo) = mid;
        }
        (q == radius_class::large ? s.m_1 : s.m_r) = m_at(j);
        (q == radius_class::large ? s.Z_1 : s.Z_r) = z_at(hi);
    }
    s.calibrated = true;
    return s;
}

inline potential_scheme with_m_Z(potential_scheme s, double m1, double mr, double z1, double zr)
{
    s.m_1 = interval(m1);
    s.m_r = interval(mr);
    s.Z_1 = interval(z1);
    s.Z_r = interval(zr);
    s.calibrated = true;
    return s;
}

// ---------------------------------------------------------------------------
// Local inequality

enum class verification_status { certified, failed, depth_exceeded };

inline std::string status_name(verification_status s)
{
    switch (s) {
    case verification_status::certified: return "CERTIFIED";
    case verification_status::failed: return "FAILED";
    case verification_status::depth_exceeded: return "DEPTH_EXCEEDED";
    }
    return "?";
}

struct triangle_box {
    tight_kind kind;
    std::array<interval, 3> sides;
    int depth = 0;
};

struct local_options {
    int depth = 40;
    double epsilon_tight = 1e-3;
    std::size_t keep_leaves = 0; // reservoir of certified boxes for resampling
};

struct local_report {
    verification_status status = verification_status::certified;
    std::optional<triangle_box> witness;
    std::optional<interval> witness_value;
    std::uint64_t boxes = 0, certified = 0, by_tight_rule = 0, infeasible = 0, symmetric = 0;
    int max_depth = 0;
    std::array<std::uint64_t, 4> boxes_by_kind{};
    std::vector<triangle_box> leaves;
};

namespace detail {

inline std::vector<std::pair<int, int>> symmetry_order(tight_kind k)
{
    switch (k) {
    case tight_kind::t111:
    case tight_kind::trrr: return {{0, 1}, {1, 2}};
    case tight_kind::t11r: return {{0, 1}};
    case tight_kind::t1rr: return {{1, 2}};
    }
    return {};
}

// Is E - U certainly negative at the centre of the box, at a triangle that
// can occur (disjoint discs, a tangent circle of radius < r)?
inline std::optional<interval> negative_at_centre(const local_context<double>& c, const std::array<interval, 3>& s)
{
    std::array<interval, 3> p;
    for (int i = 0; i < 3; ++i) {
        p[i] = interval(s[i].mid());
        if (p[i].lo() < c.tight[i].hi()) return std::nullopt;
    }
    auto v = evaluate_local(c, p, false);
    if (v.infeasible || !v.saturated || !v.f.negative()) return std::nullopt;
    return v.f;
}

// First-order rule around the tight triangle t*. On the box spanned by t*
// and the upper corner of s, the mean value theorem gives
//   E - U >= f(t*) + H.d - sum_v m_v |Theta_v.d|,   d = t - t* >= 0,
// with H and Theta_v interval gradients of the smooth part and of the angles
// over that box (caps and edges only lower U's growth). The right side is
// concave and positively homogeneous in d, so checking the three unit
// directions suffices. Returns -1 on success, else a failing direction.
inline int tight_cone_direction(const local_context<double>& c, const std::array<interval, 3>& s)
{
    std::array<interval, 3> b;
    for (int i = 0; i < 3; ++i) b[i] = hull(c.tight[i], s[i]);
    triangle_geometry<double> g;
    try {
        g = triangle_shape(b);
    } catch (const degenerate_box&) {
        return 0;
    }
    triangle_spec<double> t{c.radii, b};
    for (int i = 0; i < 3; ++i)
        if (sector_may_cross(t, g, i)) return i;
    if ((-c.offset_term).lo() < 0) return 0;
    interval inv2A = interval(1.0) / (interval(2.0) * g.area);
    interval prod = b[0] * b[1] * b[2];
    for (int i = 0; i < 3; ++i) {
        interval h = c.delta * prod * g.cosines[i] / (interval(4.0) * g.area);
        double penalty = 0;
        for (int v = 0; v < 3; ++v) {
            interval dth = v == i ? b[i] * inv2A : -(b[v] * g.cosines[3 - v - i] * inv2A);
            h -= c.half_r2[v] * dth;
            penalty = (interval(penalty) + c.m[v] * interval(dth.mag())).hi();
        }
        if (b[i].hi() > c.l[i].lo()) penalty = (interval(penalty) + c.q[i]).hi();
        if ((h - interval(penalty)).lo() < 0) return i;
    }
    return -1;
}

// Points on 5x5x5 grids around an undecided box, growing by factors of 4;
// a provably negative one turns the undecided box into a concrete failure.
inline std::optional<std::pair<std::array<interval, 3>, interval>>
nearby_negative(const local_context<double>& c, const std::array<interval, 3>& s, const std::array<interval, 3>& root)
{
    for (double scale = 1; scale < 1e9; scale *= 4) {
        std::array<double, 3> lo, hi;
        for (int i = 0; i < 3; ++i) {
            double half = std::max(s[i].width(), 1e-9) * scale;
            lo[i] = std::max(root[i].lo(), s[i].mid() - half);
            hi[i] = std::min(root[i].hi(), s[i].mid() + half);
        }
        for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b)
                for (int e = 0; e < 5; ++e) {
                    std::array<int, 3> k{a, b, e};
                    std::array<interval, 3> p;
                    for (int i = 0; i < 3; ++i) p[i] = interval(lo[i] + (hi[i] - lo[i]) * k[i] / 4);
                    if (auto neg = negative_at_centre(c, p)) return std::pair{p, *neg};
                }
        bool whole = true;
        for (int i = 0; i < 3; ++i) whole = whole && lo[i] <= root[i].lo() && hi[i] >= root[i].hi();
        if (whole) break;
    }
    return std::nullopt;
}

template <class Rng>
inline void keep_leaf(local_report& r, const triangle_box& b, std::size_t cap, std::uint64_t& seen, Rng& rng)
{
    if (cap == 0) return;
    ++seen;
    if (r.leaves.size() < cap) {
        r.leaves.push_back(b);
        return;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, seen - 1);
    std::uint64_t j = pick(rng);
    if (j < cap) r.leaves[j] = b;
}

} // namespace detail

inline std::array<interval, 3> root_sides(tight_kind kind)
{
    auto spec = tight_spec<double>(kind);
    const interval two_r = interval(2.0) * constants<double>::r();
    std::array<interval, 3> s;
    for (int i = 0; i < 3; ++i) s[i] = interval(spec.sides[i].lo(), (spec.sides[i] + two_r).hi());
    return s;
}

inline local_report verify_local_kind(const potential_scheme& s, tight_kind kind, const local_options& opt = {})
{
    using detail::evaluate_local;
    local_report rep;
    auto c = detail::make_context<double>(s, kind);
    auto order = detail::symmetry_order(kind);
    std::mt19937_64 rng(0x5eed + static_cast<int>(kind));
    std::uint64_t seen = 0;
    bool cone_probed = false;
    std::vector<triangle_box> stack{{kind, root_sides(kind), 0}};
    auto& count = rep.boxes_by_kind[static_cast<int>(kind)];
    while (!stack.empty()) {
        triangle_box b = stack.back();
        stack.pop_back();
        ++rep.boxes;
        ++count;
        rep.max_depth = std::max(rep.max_depth, b.depth);
        const auto& s3 = b.sides;
        bool mirrored = false;
        for (auto [i, j] : order) mirrored = mirrored || s3[i].lo() > s3[j].hi();
        if (mirrored) {
            ++rep.symmetric;
            continue;
        }
        auto v = evaluate_local(c, s3, true);
        if (v.infeasible) {
            ++rep.infeasible;
            continue;
        }
        if (v.f.lo() < 0 && v.smooth) {
            // centred form with the box's edge roles held fixed
            std::array<interval, 3> mid;
            for (int i = 0; i < 3; ++i) mid[i] = interval(s3[i].mid());
            auto vm = evaluate_local(c, mid, false, &v.sigma);
            if (!vm.infeasible) {
                interval cf = vm.f;
                for (int i = 0; i < 3; ++i) cf += v.grad[i] * (s3[i] - mid[i]);
                v.f = interval(std::max(v.f.lo(), cf.lo()), std::min(v.f.hi(), cf.hi()));
            }
        }
        if (v.f.lo() >= 0) {
            ++rep.certified;
            detail::keep_leaf(rep, b, opt.keep_leaves, seen, rng);
            continue;
        }
        bool near_tight = true;
        for (int i = 0; i < 3; ++i) near_tight = near_tight && s3[i].hi() <= c.tight[i].hi() + opt.epsilon_tight;
        if (near_tight) {
            int bad = detail::tight_cone_direction(c, s3);
            if (bad < 0) {
                ++rep.certified;
                ++rep.by_tight_rule;
                detail::keep_leaf(rep, b, opt.keep_leaves, seen, rng);
                continue;
            }
            if (!cone_probed) {
                // walk away from t* along the failing direction for a witness
                cone_probed = true;
                for (int k = 0; k <= 12; ++k) {
                    std::array<interval, 3> p = c.tight;
                    for (int i = 0; i < 3; ++i) p[i] = interval(c.tight[i].hi());
                    p[bad] = interval((interval(p[bad].hi()) + interval(opt.epsilon_tight * std::ldexp(1.0, -k))).hi());
                    if (auto neg = detail::negative_at_centre(c, p)) {
                        rep.status = verification_status::failed;
                        rep.witness = triangle_box{kind, p, b.depth};
                        rep.witness_value = *neg;
                        return rep;
                    }
                }
            }
        }
        if (near_tight && v.smooth) {
            // monotone coordinates are pinned to the face where E - U is
            // smallest
            std::array<interval, 3> face = s3;
            int pinned = 0;
            for (int i = 0; i < 3; ++i) {
                if (v.grad[i].lo() >= 0) {
                    ++pinned;
                    face[i] = interval(s3[i].lo());
                } else if (v.grad[i].hi() <= 0) {
                    ++pinned;
                    face[i] = interval(s3[i].hi());
                }
            }
            if (pinned > 0) {
                auto fv = evaluate_local(c, face, false, &v.sigma);
                if (!fv.infeasible && fv.f.lo() >= 0) {
                    ++rep.certified;
                    ++rep.by_tight_rule;
                    detail::keep_leaf(rep, b, opt.keep_leaves, seen, rng);
                    continue;
                }
            }
        }
        if (auto neg = detail::negative_at_centre(c, s3)) {
            rep.status = verification_status::failed;
            std::array<interval, 3> p;
            for (int i = 0; i < 3; ++i) p[i] = interval(s3[i].mid());
            rep.witness = triangle_box{kind, p, b.depth};
            rep.witness_value = *neg;
            return rep;
        }
        if (b.depth >= opt.depth) {
            if (auto w = detail::nearby_negative(c, s3, root_sides(kind))) {
                rep.status = verification_status::failed;
                rep.witness = triangle_box{kind, w->first, b.depth};
                rep.witness_value = w->second;
                return rep;
            }
            rep.status = verification_status::depth_exceeded;
            rep.witness = b;
            rep.witness_value = v.f;
            return rep;
        }
        int w = 0;
        for (int i = 1; i < 3; ++i)
            if (s3[i].width() > s3[w].width()) w = i;
        auto [left, right] = s3[w].bisect();
        triangle_box lb = b, rb = b;
        lb.sides[w] = left;
        rb.sides[w] = right;
        lb.depth = rb.depth = b.depth + 1;
        stack.push_back(rb);
        stack.push_back(lb);
    }
    return rep;
}

inline local_report verify_local_inequality(const potential_scheme& s, const local_options& opt = {})
{
    local_report total;
    for (int k = 0; k < 4; ++k) {
        auto r = verify_local_kind(s, static_cast<tight_kind>(k), opt);
        total.boxes += r.boxes;
        total.certified += r.certified;
        total.by_tight_rule += r.by_tight_rule;
        total.infeasible += r.infeasible;
        total.symmetric += r.symmetric;
        total.max_depth = std::max(total.max_depth, r.max_depth);
        total.boxes_by_kind[k] = r.boxes_by_kind[k];
        total.leaves.insert(total.leaves.end(), r.leaves.begin(), r.leaves.end());
        if (r.status != verification_status::certified) {
            total.status = r.status;
            total.witness = r.witness;
            total.witness_value = r.witness_value;
            return total;
        }
    }
    return total;
}

// E - U at a concrete triangle in extended precision; nullopt when the point
// is not a triangle that can occur.
inline std::optional<interval_ld> point_margin(const potential_scheme& s, tight_kind kind, const std::array<double, 3>& sides)
{
    auto c = detail::make_context<long double>(s, kind);
    std::array<interval_ld, 3> p;
    for (int i = 0; i < 3; ++i) {
        p[i] = interval_ld(static_cast<long double>(sides[i]));
        if (p[i].lo() < c.tight[i].hi()) return std::nullopt;
    }
    auto v = detail::evaluate_local(c, p, false);
    if (v.infeasible || !v.saturated) return std::nullopt;
    return v.f;
}

struct resample_report {
    std::size_t evaluated = 0, skipped = 0, negative = 0;
    long double worst = std::numeric_limits<long double>::infinity();
};

// Re-evaluates E - U at random points of certified boxes.
inline resample_report resample_certified(const potential_scheme& s, const std::vector<triangle_box>& leaves,
                                          std::size_t samples, std::uint64_t seed, long double tolerance = 1e-12L)
{
    resample_report out;
    if (leaves.empty()) return out;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t n = 0; n < samples; ++n) {
        const auto& b = leaves[pick(rng)];
        std::array<double, 3> p;
        for (int i = 0; i < 3; ++i) p[i] = std::clamp(b.sides[i].lo() + u(rng) * b.sides[i].width(), b.sides[i].lo(), b.sides[i].hi());
        auto m = point_margin(s, b.kind, p);
        if (!m) {
            ++out.skipped;
            continue;
        }
        ++out.evaluated;
        out.worst = std::min(out.worst, m->hi());
        if (m->hi() < -tolerance) ++out.negative;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline

struct verify_options {
    double eta = 0;
    int depth = 40;
    double epsilon_tight = 1e-3;
    double delta_offset = 0;
    std::size_t keep_leaves = 0;
};

inline const char* saturation_assumption()
{
    return "packings are saturated: every FM support circle has radius below r, so each side is at most the sum of "
           "its radii plus 2r";
}

struct verification_report {
    interval x;
    verification_status status = verification_status::certified;
    std::string stage;   // identity, calibration, vertex, local, done
    std::string reason;
    std::optional<triangle_box> witness;
    std::optional<interval> witness_value;
    std::string witness_word;
    std::uint64_t boxes_checked = 0;
    int max_depth = 0;
    std::array<std::uint64_t, 4> boxes_by_kind{};
    std::uint64_t by_tight_rule = 0, infeasible = 0;
    interval alpha_1, alpha_r, identity;
    std::vector<equation_residual> residuals;
    bool calibrated = false;
    interval m_1, m_r, Z_1, Z_r;
    std::size_t vertex_sequences = 0;
    double eta = 0;
    double delta_offset = 0;
    double wall_time = 0;
    std::vector<triangle_box> leaves;
};

inline verification_report verify_interval(const interval& x, const verify_options& opt = {})
{
    auto t0 = std::chrono::steady_clock::now();
    verification_report rep;
    rep.x = x;
    rep.eta = opt.eta;
    rep.delta_offset = opt.delta_offset;
    auto finish = [&](verification_status st, std::string stage, std::string reason) {
        rep.status = st;
        rep.stage = std::move(stage);
        rep.reason = std::move(reason);
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return rep;
    };
    potential_scheme s = solve_base_potentials(x, opt.delta_offset);
    s.eta = opt.eta;
    rep.alpha_1 = s.alpha_1;
    rep.alpha_r = s.alpha_r;
    rep.residuals = equation_residuals(s);
    rep.identity = check_stoichiometry_identity(s);
    for (const auto& r : rep.residuals)
        if (!r.value.contains_zero()) return finish(verification_status::failed, "identity", "equation " + r.name + " violated");
    if (!rep.identity.contains_zero())
        return finish(verification_status::failed, "identity", "x alpha_1 + (1-x) alpha_r does not enclose 0");
    try {
        s = calibrate_m_Z(s);
    } catch (const calibration_failed& e) {
        rep.witness_word = e.word;
        return finish(verification_status::failed, "calibration", e.what());
    }
    rep.calibrated = true;
    rep.m_1 = s.m_1;
    rep.m_r = s.m_r;
    rep.Z_1 = s.Z_1;
    rep.Z_r = s.Z_r;
    for (radius_class q : {radius_class::large, radius_class::small})
        for (bool strong : {false, true}) {
            if (strong && opt.eta <= 0) continue;
            auto v = verify_vertex_inequality(s, q, strong);
            rep.vertex_sequences += v.sequences;
            if (!v.pass) {
                rep.witness_word = v.word;
                return finish(verification_status::failed, "vertex", "vertex inequality fails around " + v.word);
            }
        }
    local_options lo{opt.depth, opt.epsilon_tight, opt.keep_leaves};
    auto loc = verify_local_inequality(s, lo);
    rep.boxes_checked = loc.boxes;
    rep.max_depth = loc.max_depth;
    rep.boxes_by_kind = loc.boxes_by_kind;
    rep.by_tight_rule = loc.by_tight_rule;
    rep.infeasible = loc.infeasible;
    rep.leaves = std::move(loc.leaves);
    rep.witness = loc.witness;
    rep.witness_value = loc.witness_value;
    if (loc.status == verification_status::failed)
        return finish(loc.status, "local", "E - U < 0 at a " + kind_name(loc.witness->kind) + " triangle");
    if (loc.status == verification_status::depth_exceeded)
        return finish(loc.status, "local", "depth limit reached on a " + kind_name(loc.witness->kind) + " box");
    return finish(verification_status::certified, "done", "");
}

// [0,1] cut into n intervals with outward-rounded endpoints; the one
// containing 1/2 in its interior is split there.
inline std::vector<interval> sweep_intervals(int subdivisions)
{
    if (subdivisions < 2) throw std::invalid_argument("at least two subdivisions");
    std::vector<interval> out;
    for (int i = 0; i < subdivisions; ++i) {
        double lo = ratio<double>(i, subdivisions).lo(), hi = ratio<double>(i + 1, subdivisions).hi();
        lo = std::max(lo, 0.0);
        hi = std::min(hi, 1.0);
        if (lo < 0.5 && hi > 0.5) {
            out.push_back(interval(lo, 0.5));
            out.push_back(interval(0.5, hi));
        } else {
            out.push_back(interval(lo, hi));
        }
    }
    return out;
}

struct sweep_report {
    std::vector<verification_report> intervals;
    double wall_time = 0;

    bool all_certified() const
    {
        return std::all_of(intervals.begin(), intervals.end(),
                           [](const verification_report& r) { return r.status == verification_status::certified; });
    }
    std::size_t count(verification_status st) const
    {
        return static_cast<std::size_t>(std::count_if(intervals.begin(), intervals.end(),
                                                       [&](const verification_report& r) { return r.status == st; }));
    }
};

inline sweep_report sweep(int subdivisions, const verify_options& opt, unsigned workers = 0)
{
    auto t0 = std::chrono::steady_clock::now();
    auto xs = sweep_intervals(subdivisions);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(xs.size()));
    sweep_report out;
    out.intervals.resize(xs.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < xs.size();) {
            try {
                out.intervals[i] = verify_interval(xs[i], opt);
            } catch (const std::exception& e) {
                verification_report r;
                r.x = xs[i];
                r.status = verification_status::failed;
                r.stage = "error";
                r.reason = e.what();
                out.intervals[i] = r;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// Upper bound on the proportion of bad neighbourhoods of a packing whose
// density is delta_achieved.
inline interval defect_bound(const interval& delta_achieved, const interval& x, double eta)
{
    if (!(eta > 0)) throw nonpositive_eta();
    return (delta_max(x) - delta_achieved) / interval(eta);
}

} // namespace bindisc
