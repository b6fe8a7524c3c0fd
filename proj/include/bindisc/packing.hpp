#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "density.hpp"

namespace bindisc {

struct packing_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct overlapping_discs : packing_error {
    overlapping_discs(std::size_t i, std::size_t j)
        : packing_error("discs " + std::to_string(i) + " and " + std::to_string(j) + " overlap"), first(i), second(j)
    {
    }
    std::size_t first, second;
};
struct too_few_discs : packing_error {
    too_few_discs() : packing_error("at least three discs are needed") {}
};
struct degenerate_input : packing_error {
    using packing_error::packing_error;
};
struct boundary_disc : packing_error {
    explicit boundary_disc(std::size_t i) : packing_error("disc " + std::to_string(i) + " is on the boundary") {}
};
struct census_empty_window : packing_error {
    census_empty_window() : packing_error("no interior disc inside the window") {}
};

inline constexpr double small_radius = 0.41421356237309504880;
inline constexpr double packing_tolerance = 1e-9;

inline double radius_of(radius_class c)
{
    return c == radius_class::large ? 1.0 : small_radius;
}

struct disc {
    double x = 0;
    double y = 0;
    radius_class size = radius_class::large;
};

struct packing {
    std::vector<disc> discs;
};

// Interior-disjointness up to packing_tolerance; throws on the first offending pair.
inline void validate_packing(const packing& p, double tol = packing_tolerance)
{
    const auto& d = p.discs;
    if (d.empty()) return;
    double cell = 2.0;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<std::size_t>> grid;
    auto key = [&](const disc& c) {
        return std::make_pair(static_cast<std::int64_t>(std::floor(c.x / cell)),
                              static_cast<std::int64_t>(std::floor(c.y / cell)));
    };
    for (std::size_t i = 0; i < d.size(); ++i) grid[key(d[i])].push_back(i);
    for (std::size_t i = 0; i < d.size(); ++i) {
        auto [kx, ky] = key(d[i]);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({kx + dx, ky + dy});
                if (it == grid.end()) continue;
                for (std::size_t j : it->second) {
                    if (j <= i) continue;
                    double dist = std::hypot(d[i].x - d[j].x, d[i].y - d[j].y);
                    if (dist < radius_of(d[i].size) + radius_of(d[j].size) - tol) throw overlapping_discs(i, j);
                }
            }
    }
}

inline double large_fraction(const packing& p)
{
    if (p.discs.empty()) return 0;
    std::size_t n = 0;
    for (const auto& d : p.discs) n += d.size == radius_class::large;
    return static_cast<double>(n) / static_cast<double>(p.discs.size());
}

// ---------------------------------------------------------------- predicates

// Sign of (b-a) x (c-a), exact.
inline int orientation(double ax, double ay, double bx, double by, double cx, double cy)
{
    double l = (bx - ax) * (cy - ay);
    double r = (by - ay) * (cx - ax);
    double det = l - r;
    double bound = 3.3306690738754716e-16 * (std::fabs(l) + std::fabs(r));
    if (det > bound) return 1;
    if (-det > bound) return -1;
    using boost::multiprecision::cpp_rational;
    cpp_rational e = (cpp_rational(bx) - ax) * (cpp_rational(cy) - ay) - (cpp_rational(by) - ay) * (cpp_rational(cx) - ax);
    return e > 0 ? 1 : (e < 0 ? -1 : 0);
}

// A site of the weighted triangulation: a disc, or a far auxiliary point of
// radius zero.
struct site {
    double x, y;
    int radius_kind;      // 0 large, 1 small, 2 auxiliary
    double aux_radius = 0; // exact radius of an auxiliary site
};

template <class T>
inline basic_interval<T> site_radius(const site& s)
{
    if (s.radius_kind == 0) return T(1);
    if (s.radius_kind == 1) return constants<T>::r();
    return T(s.aux_radius);
}

// The discs followed by three auxiliary sites far outside that close the
// region.
inline std::vector<site> augmented_sites(const packing& p)
{
    std::vector<site> s;
    const auto& d = p.discs;
    double minx = d[0].x, maxx = d[0].x, miny = d[0].y, maxy = d[0].y;
    for (const auto& c : d) {
        s.push_back({c.x, c.y, c.size == radius_class::large ? 0 : 1});
        minx = std::min(minx, c.x);
        maxx = std::max(maxx, c.x);
        miny = std::min(miny, c.y);
        maxy = std::max(maxy, c.y);
    }
    double cx = std::round((minx + maxx) / 2), cy = std::round((miny + maxy) / 2);
    double span = std::max({maxx - minx, maxy - miny, 4.0});
    double far = std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(span))) + 6);
    s.push_back({cx, cy + far, 2});
    s.push_back({cx - far, cy - far, 2});
    s.push_back({cx + far, cy - far, 2});
    return s;
}

enum class conflict { yes, no, uncertain };

namespace detail {

template <class T>
struct support_point {
    basic_interval<T> X, Y, rho; // relative to the first site
};

// Circles externally tangent to the three sites whose tangency points run
// counterclockwise a -> b -> c. Returns false if some branch could not be
// decided at this precision.
template <class T>
bool support_points(const site& a, const site& b, const site& c, std::vector<support_point<T>>& out)
{
    using I = basic_interval<T>;
    out.clear();
    I ra = site_radius<T>(a), rb = site_radius<T>(b), rc = site_radius<T>(c);
    I bx = I(T(b.x)) - I(T(a.x)), by = I(T(b.y)) - I(T(a.y));
    I cx = I(T(c.x)) - I(T(a.x)), cy = I(T(c.y)) - I(T(a.y));
    I D = T(2) * (bx * cy - by * cx);
    if (D.contains_zero()) return false;
    I kb = sqr(bx) + sqr(by) - sqr(rb) + sqr(ra), lb = T(-2) * (rb - ra);
    I kc = sqr(cx) + sqr(cy) - sqr(rc) + sqr(ra), lc = T(-2) * (rc - ra);
    // 2 (X bx + Y by) = kb + rho lb, same for c
    I X0 = (kb * cy - kc * by) / D, X1 = (lb * cy - lc * by) / D;
    I Y0 = (bx * kc - cx * kb) / D, Y1 = (bx * lc - cx * lb) / D;
    I qa = sqr(X1) + sqr(Y1) - T(1);
    I qb = T(2) * (X0 * X1 + Y0 * Y1 - ra);
    I qc = sqr(X0) + sqr(Y0) - sqr(ra);
    I disc = sqr(qb) - T(4) * qa * qc;
    if (disc.hi() < 0) return true;
    if (disc.lo() < 0) return false;
    I sq = sqrt(disc);
    std::vector<I> roots;
    if (!qb.contains_zero()) {
        I q = qb.positive() ? (qb + sq) / T(-2) : (qb - sq) / T(-2);
        if (q.contains_zero()) return false;
        roots.push_back(qc / q);
        // with qa near zero the second root may be any large value
        if (qa.contains_zero()) return false;
        roots.push_back(q / qa);
    } else {
        if (qa.contains_zero()) return false;
        roots.push_back((-qb + sq) / (T(2) * qa));
        roots.push_back((-qb - sq) / (T(2) * qa));
    }
    const std::array<I, 3> sx{I(T(0)), bx, cx}, sy{I(T(0)), by, cy}, sr{ra, rb, rc};
    for (const I& rho : roots) {
        if (rho.hi() <= 0) continue;
        if (rho.lo() <= 0) return false;
        I X = X0 + rho * X1, Y = Y0 + rho * Y1;
        std::array<I, 3> ux, uy;
        for (int i = 0; i < 3; ++i) {
            I w = rho + sr[i];
            ux[i] = (sx[i] - X) / w;
            uy[i] = (sy[i] - Y) / w;
        }
        I o = (ux[1] - ux[0]) * (uy[2] - uy[0]) - (uy[1] - uy[0]) * (ux[2] - ux[0]);
        if (o.contains_zero()) return false;
        if (o.positive()) out.push_back({X, Y, rho});
    }
    return true;
}

// A triple may have two tangent circles with the same orientation; the
// triangle stands if one of them is empty.
template <class T>
conflict in_conflict(const site& a, const site& b, const site& c, const site& d)
{
    using I = basic_interval<T>;
    std::vector<support_point<T>> pts;
    if (!support_points<T>(a, b, c, pts)) return conflict::uncertain;
    I dx = I(T(d.x)) - I(T(a.x)), dy = I(T(d.y)) - I(T(a.y));
    I rd = site_radius<T>(d);
    bool any_uncertain = false;
    for (const auto& p : pts) {
        I gap = sqrt(sqr(p.X - dx) + sqr(p.Y - dy)) - rd - p.rho;
        if (gap.lo() > 0) return conflict::no;
        if (gap.hi() >= 0) any_uncertain = true;
    }
    return any_uncertain ? conflict::uncertain : conflict::yes;
}

// Status of the triangle (a, b, c) against every candidate site.
template <class T>
conflict triangle_status(const std::vector<site>& sites, int a, int b, int c, const std::vector<int>& candidates)
{
    using I = basic_interval<T>;
    std::vector<support_point<T>> pts;
    if (!support_points<T>(sites[a], sites[b], sites[c], pts)) return conflict::uncertain;
    conflict best = conflict::yes;
    for (const auto& p : pts) {
        conflict here = conflict::no;
        for (int d : candidates) {
            if (d == a || d == b || d == c) continue;
            I dx = I(T(sites[d].x)) - I(T(sites[a].x)), dy = I(T(sites[d].y)) - I(T(sites[a].y));
            I gap = sqrt(sqr(p.X - dx) + sqr(p.Y - dy)) - site_radius<T>(sites[d]) - p.rho;
            if (gap.hi() < 0) {
                here = conflict::yes;
                break;
            }
            if (gap.lo() <= 0) here = conflict::uncertain;
        }
        if (here == conflict::no) return conflict::no;
        if (here == conflict::uncertain) best = conflict::uncertain;
    }
    return best;
}

} // namespace detail

// Does site d come weighted-closer to the counterclockwise support point of
// (a, b, c) than a, b, c themselves? Escalates from double to long double.
inline conflict in_conflict(const site& a, const site& b, const site& c, const site& d)
{
    conflict r = detail::in_conflict<double>(a, b, c, d);
    if (r != conflict::uncertain) return r;
    return detail::in_conflict<long double>(a, b, c, d);
}

// ------------------------------------------------------------ triangulation

struct fm_triangulation {
    std::size_t disc_count = 0;
    // counterclockwise triangles among real discs
    std::vector<std::array<int, 3>> triangles;
    // all triangles including those on the far points (numbered n, n+1, n+2)
    std::vector<std::array<int, 3>> augmented;
    // counterclockwise neighbor cycle of every disc; negative entries are the
    // auxiliary far points
    std::vector<std::vector<int>> fans;
    // undirected edge (i < j) -> incident triangles (second is -1 on the boundary)
    std::map<std::pair<int, int>, std::pair<int, int>> adjacency;
    std::size_t flips = 0;
    std::size_t ties = 0;
    // triangles whose tangent circle still meets another disc (the weighted
    // Delaunay graph is then not a straight-line triangulation)
    std::size_t unresolved = 0;

    bool closed(std::size_t i) const
    {
        return std::all_of(fans[i].begin(), fans[i].end(), [](int v) { return v >= 0; });
    }
    // Closed fan whose neighbors also have closed fans: discs on the rim of
    // the packing are excluded even where the hull runs past them.
    bool interior(std::size_t i) const
    {
        if (!closed(i)) return false;
        return std::all_of(fans[i].begin(), fans[i].end(), [&](int v) { return closed(static_cast<std::size_t>(v)); });
    }
};

namespace detail {

class incremental_fm {
public:
    explicit incremental_fm(const packing& p) : pk_(p)
    {
        sites_ = augmented_sites(p);
        n_ = static_cast<int>(p.discs.size());
        tris_.push_back({{n_, n_ + 1, n_ + 2}, {-1, -1, -1}});
    }

    fm_triangulation run()
    {
        std::vector<int> order(n_);
        for (int i = 0; i < n_; ++i) order[i] = i;
        // strips of width 4, alternating direction, for short walks
        auto strip = [&](int i) { return static_cast<std::int64_t>(std::floor(sites_[i].x / 4)); };
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            auto sa = strip(a), sb = strip(b);
            if (sa != sb) return sa < sb;
            bool up = (sa % 2 == 0);
            if (sites_[a].y != sites_[b].y) return up ? sites_[a].y < sites_[b].y : sites_[a].y > sites_[b].y;
            return sites_[a].x != sites_[b].x ? sites_[a].x < sites_[b].x : a < b;
        });
        for (int i : order) insert(i);
        build_grid();
        repair();
        fill_cavities();
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) unresolved_ += status(t) == conflict::yes;
        return finish();
    }

private:
    struct tri {
        std::array<int, 3> v;
        std::array<int, 3> n; // n[i] across the edge opposite v[i]
    };

    int orient(int a, int b, int c) const
    {
        return orientation(sites_[a].x, sites_[a].y, sites_[b].x, sites_[b].y, sites_[c].x, sites_[c].y);
    }

    static int index_of(const tri& t, int v)
    {
        for (int i = 0; i < 3; ++i)
            if (t.v[i] == v) return i;
        return -1;
    }

    int neighbor_slot(int t, int other) const
    {
        for (int i = 0; i < 3; ++i)
            if (tris_[t].n[i] == other) return i;
        return -1;
    }

    void relink(int t, int old_nb, int new_nb)
    {
        if (t < 0) return;
        int s = neighbor_slot(t, old_nb);
        if (s >= 0) tris_[t].n[s] = new_nb;
    }

    // Returns (triangle, -1) if p is strictly inside, (triangle, edge) if on edge.
    std::pair<int, int> locate(int p)
    {
        int t = last_;
        std::uniform_int_distribution<int> pick(0, 2);
        for (std::size_t steps = 0;; ++steps) {
            if (steps > 4 * tris_.size() + 100) {
                t = scan(p);
                break;
            }
            int start = pick(rng_);
            bool moved = false;
            for (int k = 0; k < 3; ++k) {
                int i = (start + k) % 3;
                const tri& tr = tris_[t];
                if (orient(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p) < 0) {
                    t = tr.n[i];
                    moved = true;
                    break;
                }
            }
            if (!moved) break;
        }
        const tri& tr = tris_[t];
        for (int i = 0; i < 3; ++i) {
            const site& v = sites_[tr.v[i]];
            if (v.x == sites_[p].x && v.y == sites_[p].y)
                throw degenerate_input("coincident centers at disc " + std::to_string(p));
        }
        for (int i = 0; i < 3; ++i)
            if (orient(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p) == 0) return {t, i};
        return {t, -1};
    }

    int scan(int p) const
    {
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            const tri& tr = tris_[t];
            bool inside = true;
            for (int i = 0; i < 3 && inside; ++i) inside = orient(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3], p) >= 0;
            if (inside) return t;
        }
        throw degenerate_input("point location failed");
    }

    void insert(int p)
    {
        auto [t, edge] = locate(p);
        std::vector<std::pair<int, int>> stack; // (triangle, slot of the edge to test)
        if (edge < 0) {
            tri old = tris_[t];
            auto [a, b, c] = old.v;
            int t1 = static_cast<int>(tris_.size()), t2 = t1 + 1;
            // t: (a, b, p), t1: (b, c, p), t2: (c, a, p)
            tris_[t] = {{a, b, p}, {t1, t2, old.n[2]}};
            tris_.push_back({{b, c, p}, {t2, t, old.n[0]}});
            tris_.push_back({{c, a, p}, {t, t1, old.n[1]}});
            relink(old.n[0], t, t1);
            relink(old.n[1], t, t2);
            stack = {{t, 2}, {t1, 2}, {t2, 2}};
        } else {
            // p on the edge opposite v[edge] of t, shared with u
            tri old = tris_[t];
            int c = old.v[edge], a = old.v[(edge + 1) % 3], b = old.v[(edge + 2) % 3];
            int u = old.n[edge];
            if (u < 0) throw degenerate_input("point on the outer boundary");
            tri uo = tris_[u];
            int ud = index_of(uo, a);
            int d = uo.v[(ud + 1) % 3];
            // t: (c, a, b) with p on ab; u: (a, d, b)... u has vertices b, a, d counterclockwise
            int na_c = old.n[(edge + 2) % 3]; // across edge c-a (opposite b)
            int nb_c = old.n[(edge + 1) % 3]; // across edge b-c (opposite a)
            int ib = index_of(uo, b), ia = index_of(uo, a);
            int nd_a = uo.n[ib]; // across a-d (opposite b)
            int nd_b = uo.n[ia]; // across d-b (opposite a)
            int t1 = static_cast<int>(tris_.size()), u1 = t1 + 1;
            // t: (c, a, p), t1: (c, p, b), u: (d, p, a), u1: (d, b, p)
            tris_[t] = {{c, a, p}, {u, t1, na_c}};
            tris_.push_back({{c, p, b}, {u1, nb_c, t}});
            tris_[u] = {{d, p, a}, {t, nd_a, u1}};
            tris_.push_back({{d, b, p}, {t1, u, nd_b}});
            relink(nb_c, t, t1);
            relink(nd_b, u, u1);
            stack = {{t, 2}, {t1, 1}, {u, 1}, {u1, 2}};
        }
        last_ = t;
        legalize(p, stack);
    }

    void legalize(int p, std::vector<std::pair<int, int>>& stack)
    {
        std::size_t guard = 0;
        while (!stack.empty()) {
            auto [t, slot] = stack.back();
            stack.pop_back();
            if (++guard > 64 * (tris_.size() + 16)) throw degenerate_input("flip cycle");
            tri& tr = tris_[t];
            if (tr.v[slot] != p) {
                int s = index_of(tr, p);
                if (s < 0) continue;
                slot = s;
            }
            int u = tr.n[slot];
            if (u < 0) continue;
            int a = tr.v[(slot + 1) % 3], b = tr.v[(slot + 2) % 3];
            const tri& ut = tris_[u];
            int ua = index_of(ut, a);
            int d = ut.v[(ua + 1) % 3];
            conflict c = in_conflict(sites_[p], sites_[a], sites_[b], sites_[d]);
            // the opposite circle decides when this one is undecided (slivers)
            if (c == conflict::uncertain) c = in_conflict(sites_[b], sites_[a], sites_[d], sites_[p]);
            if (c == conflict::uncertain) {
                ++ties_;
                continue;
            }
            if (c == conflict::no) continue;
            if (orient(p, a, d) <= 0 || orient(p, d, b) <= 0) continue;
            flip(t, u, p, a, b, d);
            stack.push_back({t, index_of(tris_[t], p)});
            stack.push_back({u, index_of(tris_[u], p)});
        }
    }

    // t = (p, a, b), u = (b, a, d) -> t = (p, a, d), u = (p, d, b)
    void flip(int t, int u, int p, int a, int b, int d)
    {
        tri to = tris_[t], uo = tris_[u];
        int n_pa = to.n[index_of(to, b)]; // across p-a
        int n_bp = to.n[index_of(to, a)]; // across b-p
        int n_ad = uo.n[index_of(uo, b)]; // across a-d
        int n_db = uo.n[index_of(uo, a)]; // across d-b
        tris_[t] = {{p, a, d}, {n_ad, u, n_pa}};
        tris_[u] = {{p, d, b}, {n_db, n_bp, t}};
        relink(n_bp, t, u);
        relink(n_ad, u, t);
        ++flips_;
    }

    void build_grid()
    {
        for (int i = 0; i < n_; ++i) grid_[cell_key(sites_[i].x, sites_[i].y)].push_back(i);
    }

    static std::pair<std::int64_t, std::int64_t> cell_key(double x, double y)
    {
        return {static_cast<std::int64_t>(std::floor(x / cell_)), static_cast<std::int64_t>(std::floor(y / cell_))};
    }

    // Sites that may reach the tangent circle of (a, b, c).
    std::vector<int> candidates(int a, int b, int c) const
    {
        std::vector<detail::support_point<double>> pts;
        std::vector<int> out{n_, n_ + 1, n_ + 2};
        bool all = !detail::support_points<double>(sites_[a], sites_[b], sites_[c], pts);
        for (const auto& p : pts) all = all || p.rho.hi() > 64;
        if (all) {
            for (int i = 0; i < n_; ++i) out.push_back(i);
            return out;
        }
        for (const auto& p : pts) {
            double cx = sites_[a].x + p.X.mid(), cy = sites_[a].y + p.Y.mid();
            double reach = p.rho.hi() + 2 + 1e-6 * (std::fabs(cx) + std::fabs(cy));
            auto lo = cell_key(cx - reach, cy - reach), hi = cell_key(cx + reach, cy + reach);
            for (auto i = lo.first; i <= hi.first; ++i)
                for (auto j = lo.second; j <= hi.second; ++j) {
                    auto it = grid_.find({i, j});
                    if (it != grid_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
                }
        }
        return out;
    }

    conflict status(int a, int b, int c) const
    {
        auto cand = candidates(a, b, c);
        conflict r = detail::triangle_status<double>(sites_, a, b, c, cand);
        if (r == conflict::uncertain) r = detail::triangle_status<long double>(sites_, a, b, c, cand);
        return r;
    }

    conflict status(int t) const
    {
        const auto& v = tris_[t].v;
        return status(v[0], v[1], v[2]);
    }

    // Local legality does not imply empty tangent circles for weighted sites.
    // Flip edges of triangles whose circle still meets a site whenever the
    // flip lowers the number of such triangles among the two.
    void repair()
    {
        std::vector<int> queue;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
            if (status(t) == conflict::yes) queue.push_back(t);
        std::size_t budget = 20 * tris_.size() + 100;
        std::size_t head = 0;
        while (head < queue.size() && budget-- > 0) {
            int t = queue[head++];
            if (status(t) != conflict::yes) continue;
            for (int e = 0; e < 3; ++e) {
                const tri& tr = tris_[t];
                int u = tr.n[e];
                if (u < 0) continue;
                int p = tr.v[e], a = tr.v[(e + 1) % 3], b = tr.v[(e + 2) % 3];
                int d = tris_[u].v[(index_of(tris_[u], a) + 1) % 3];
                if (orient(p, a, d) <= 0 || orient(p, d, b) <= 0) continue;
                int before = 1 + (status(u) == conflict::yes);
                int after = (status(p, a, d) == conflict::yes) + (status(p, d, b) == conflict::yes);
                if (after >= before) continue;
                flip(t, u, p, a, b, d);
                for (int x : {t, u}) {
                    queue.push_back(x);
                    for (int y : tris_[x].n)
                        if (y >= 0) queue.push_back(y);
                }
                break;
            }
        }
    }

    // Flips can stall in a locally legal state while an empty-circle
    // triangulation of the same region exists (reaching it would need flips
    // that do not lower the conflict count). Each group of conflicted
    // triangles, widened by up to three rings, is replaced by its
    // empty-circle triples when those tile it exactly.
    void fill_cavities()
    {
        std::vector<char> done(tris_.size(), 0);
        for (int t0 = 0; t0 < static_cast<int>(tris_.size()); ++t0) {
            if (done[t0] || status(t0) != conflict::yes) continue;
            std::vector<int> comp{t0};
            done[t0] = 1;
            for (std::size_t h = 0; h < comp.size(); ++h)
                for (int u : tris_[comp[h]].n)
                    if (u >= 0 && !done[u] && status(u) == conflict::yes) {
                        done[u] = 1;
                        comp.push_back(u);
                    }
            std::set<int> cavity(comp.begin(), comp.end());
            for (int ring = 0; ring < 3; ++ring) {
                std::set<int> grown = cavity;
                for (int c : cavity)
                    for (int u : tris_[c].n)
                        if (u >= 0) grown.insert(u);
                cavity = grown;
                if (retriangulate(cavity)) break;
            }
        }
    }

    double doubled_area(int a, int b, int c) const
    {
        return (sites_[b].x - sites_[a].x) * (sites_[c].y - sites_[a].y) -
               (sites_[b].y - sites_[a].y) * (sites_[c].x - sites_[a].x);
    }

    bool retriangulate(const std::set<int>& cavity)
    {
        std::set<int> verts;
        std::map<std::pair<int, int>, int> boundary; // directed edge -> triangle outside (or -1)
        std::set<std::pair<int, int>> inner;
        double area = 0;
        for (int c : cavity) {
            const tri& tr = tris_[c];
            area += doubled_area(tr.v[0], tr.v[1], tr.v[2]);
            for (int i = 0; i < 3; ++i) {
                verts.insert(tr.v[i]);
                std::pair<int, int> e{tr.v[(i + 1) % 3], tr.v[(i + 2) % 3]};
                if (tr.n[i] >= 0 && cavity.count(tr.n[i]))
                    inner.insert(e);
                else
                    boundary[e] = tr.n[i];
            }
        }
        if (verts.size() > 30) return false;
        // a disc: V - E + F = 1 with a simple boundary cycle
        std::set<int> starts;
        for (const auto& [e, o] : boundary)
            if (!starts.insert(e.first).second) return false;
        long edges = static_cast<long>(inner.size() / 2 + boundary.size());
        if (static_cast<long>(verts.size()) - edges + static_cast<long>(cavity.size()) != 1) return false;

        std::vector<int> vs(verts.begin(), verts.end());
        std::vector<std::array<int, 3>> fill;
        std::map<std::pair<int, int>, int> used;
        double fill_area = 0;
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j)
                for (std::size_t k = j + 1; k < vs.size(); ++k) {
                    int a = vs[i], b = vs[j], c = vs[k];
                    int o = orient(a, b, c);
                    if (o == 0) continue;
                    if (o < 0) std::swap(b, c);
                    // skip triples that cross the cavity boundary from outside
                    bool outside = false;
                    for (auto e : {std::pair{a, b}, std::pair{b, c}, std::pair{c, a}})
                        outside = outside || boundary.count({e.second, e.first});
                    if (outside || status(a, b, c) != conflict::no) continue;
                    fill.push_back({a, b, c});
                    fill_area += doubled_area(a, b, c);
                    if (fill.size() > cavity.size()) return false;
                }
        if (fill.size() != cavity.size()) return false;
        if (std::fabs(fill_area - area) > 1e-9 * std::fabs(area)) return false;
        for (const auto& f : fill)
            for (int i = 0; i < 3; ++i)
                if (used[{f[i], f[(i + 1) % 3]}]++) return false;
        for (const auto& [e, n] : used)
            if (!boundary.count(e) && !used.count({e.second, e.first})) return false;
        for (const auto& [e, o] : boundary)
            if (!used.count(e)) return false;

        // replace, reusing the cavity's slots
        std::vector<int> slots(cavity.begin(), cavity.end());
        std::map<std::pair<int, int>, int> owner;
        for (std::size_t i = 0; i < fill.size(); ++i) {
            tris_[slots[i]].v = fill[i];
            for (int k = 0; k < 3; ++k) owner[{fill[i][k], fill[i][(k + 1) % 3]}] = slots[i];
        }
        for (std::size_t i = 0; i < fill.size(); ++i) {
            int t = slots[i];
            for (int k = 0; k < 3; ++k) {
                std::pair<int, int> e{fill[i][(k + 1) % 3], fill[i][(k + 2) % 3]};
                auto b = boundary.find(e);
                if (b == boundary.end()) {
                    tris_[t].n[k] = owner.at({e.second, e.first});
                    continue;
                }
                int o = b->second;
                tris_[t].n[k] = o;
                if (o < 0) continue;
                for (int m = 0; m < 3; ++m)
                    if (tris_[o].v[(m + 1) % 3] == e.second && tris_[o].v[(m + 2) % 3] == e.first) tris_[o].n[m] = t;
            }
        }
        ++cavity_fills_;
        return true;
    }

    fm_triangulation finish() const
    {
        fm_triangulation out;
        out.unresolved = unresolved_;
        out.disc_count = static_cast<std::size_t>(n_);
        out.flips = flips_;
        out.ties = ties_;
        out.fans.assign(n_, {});
        std::vector<int> real_id(tris_.size(), -1);
        std::vector<int> some_tri(n_ + 3, -1);
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            const auto& v = tris_[t].v;
            for (int x : v) some_tri[x] = t;
            out.augmented.push_back(v);
            if (v[0] < n_ && v[1] < n_ && v[2] < n_) {
                real_id[t] = static_cast<int>(out.triangles.size());
                out.triangles.push_back(v);
            }
        }
        auto ext = [&](int v) { return v < n_ ? v : -(v - n_ + 1); };
        for (int i = 0; i < n_; ++i) {
            int start = some_tri[i];
            int t = start;
            do {
                const tri& tr = tris_[t];
                int k = index_of(tr, i);
                out.fans[i].push_back(ext(tr.v[(k + 1) % 3]));
                // next triangle counterclockwise around i shares edge (i, v[k+2])
                t = tr.n[(k + 1) % 3];
            } while (t != start && t >= 0);
        }
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (real_id[t] < 0) continue;
            const tri& tr = tris_[t];
            for (int i = 0; i < 3; ++i) {
                int a = tr.v[(i + 1) % 3], b = tr.v[(i + 2) % 3];
                auto key = std::make_pair(std::min(a, b), std::max(a, b));
                int other = tr.n[i] >= 0 ? real_id[tr.n[i]] : -1;
                auto it = out.adjacency.find(key);
                if (it == out.adjacency.end()) out.adjacency[key] = {real_id[t], other};
            }
        }
        return out;
    }

    const packing& pk_;
    std::vector<site> sites_;
    std::vector<tri> tris_;
    int n_ = 0;
    int last_ = 0;
    std::size_t flips_ = 0;
    std::size_t ties_ = 0;
    std::size_t unresolved_ = 0;
    std::size_t cavity_fills_ = 0;
    static constexpr double cell_ = 4.0;
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<int>> grid_;
    std::mt19937 rng_{20240607u};
};

} // namespace detail

// Weighted Delaunay triangulation dual to the cells of |p - c| - radius.
// Three far points of radius zero close the region; triangles touching them
// are dropped from `triangles` and mark their discs as boundary discs.
// Predicates that stay undecided in long double are treated as ties and left
// unflipped.
inline fm_triangulation fm_triangulate(const packing& p)
{
    if (p.discs.size() < 3) throw too_few_discs();
    return detail::incremental_fm(p).run();
}

// Reference construction: every triple of the augmented site set whose
// counterclockwise tangent circle is empty. Quartic; for testing.
inline std::vector<std::array<int, 3>> fm_brute_force(const packing& p, bool include_far = false)
{
    std::vector<site> s = augmented_sites(p);
    int n = static_cast<int>(p.discs.size());
    std::vector<int> all(s.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    int m = n + 3;
    std::vector<std::array<int, 3>> out;
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b)
            for (int c = b + 1; c < m; ++c) {
                if (!include_far && c >= n) continue;
                int o = orientation(s[a].x, s[a].y, s[b].x, s[b].y, s[c].x, s[c].y);
                if (o == 0) continue;
                std::array<int, 3> tr = o > 0 ? std::array<int, 3>{a, b, c} : std::array<int, 3>{a, c, b};
                bool empty = detail::triangle_status<long double>(s, tr[0], tr[1], tr[2], all) == conflict::no;
                if (empty) out.push_back(tr);
            }
    return out;
}

// ------------------------------------------------------------ neighborhoods

// Cyclic word over {1, r}, stored as its lexicographically least rotation.
class neighborhood_word {
public:
    neighborhood_word() = default;
    explicit neighborhood_word(const std::string& letters)
    {
        for (char ch : letters)
            if (ch != '1' && ch != 'r') throw std::invalid_argument("neighborhood letters are 1 and r");
        word_ = least_rotation(letters);
    }
    const std::string& str() const { return word_; }
    std::size_t size() const { return word_.size(); }
    neighborhood_word reversed() const { return neighborhood_word(std::string(word_.rbegin(), word_.rend())); }
    friend bool operator==(const neighborhood_word& a, const neighborhood_word& b) { return a.word_ == b.word_; }
    friend bool operator<(const neighborhood_word& a, const neighborhood_word& b) { return a.word_ < b.word_; }

private:
    static std::string least_rotation(const std::string& s)
    {
        std::string best = s;
        for (std::size_t i = 1; i < s.size(); ++i) {
            std::string rot = s.substr(i) + s.substr(0, i);
            if (rot < best) best = rot;
        }
        return best;
    }
    std::string word_;
};

// Clockwise word of the neighbors of disc i.
inline neighborhood_word neighborhood(const fm_triangulation& t, const packing& p, std::size_t i)
{
    if (!t.interior(i)) throw boundary_disc(i);
    std::string w;
    const auto& fan = t.fans[i];
    for (auto it = fan.rbegin(); it != fan.rend(); ++it) w.push_back(letter_of(p.discs[*it].size));
    return neighborhood_word(w);
}

enum class regime { x_le_half, x_ge_half };

inline bool is_bad_neighborhood(const neighborhood_word& w, radius_class size, regime g)
{
    auto in = [&](std::initializer_list<const char*> good) {
        for (const char* s : good)
            if (w == neighborhood_word(s)) return true;
        return false;
    };
    if (g == regime::x_le_half) {
        if (size == radius_class::small) return !in({"1111", "rrrrrr"});
        return !in({"1r1r1r1r"});
    }
    if (size == radius_class::small) return !in({"1111"});
    return !in({"1r1r1r1r", "1111r1r", "111r11r", "111111"});
}

struct census_result {
    std::map<std::pair<char, std::string>, std::size_t> words; // (disc letter, word) -> count
    std::size_t interior = 0;
    std::size_t bad_le = 0;
    std::size_t bad_ge = 0;
    double bad_fraction(regime g) const
    {
        return static_cast<double>(g == regime::x_le_half ? bad_le : bad_ge) / static_cast<double>(interior);
    }
};

// Interior discs with centers in [-w, w]^2.
inline census_result neighborhood_census(const fm_triangulation& t, const packing& p, double window)
{
    census_result r;
    for (std::size_t i = 0; i < p.discs.size(); ++i) {
        const disc& d = p.discs[i];
        if (std::fabs(d.x) > window || std::fabs(d.y) > window || !t.interior(i)) continue;
        neighborhood_word w = neighborhood(t, p, i);
        ++r.words[{letter_of(d.size), w.str()}];
        ++r.interior;
        r.bad_le += is_bad_neighborhood(w, d.size, regime::x_le_half);
        r.bad_ge += is_bad_neighborhood(w, d.size, regime::x_ge_half);
    }
    if (r.interior == 0) throw census_empty_window();
    return r;
}

// Only discs within a margin of the window can influence interior words;
// the rest is cropped before triangulating.
inline census_result neighborhood_census(const packing& p, double window, double margin = 10)
{
    packing crop;
    for (const auto& d : p.discs)
        if (std::fabs(d.x) <= window + margin && std::fabs(d.y) <= window + margin) crop.discs.push_back(d);
    if (crop.discs.size() < 3) throw census_empty_window();
    return neighborhood_census(fm_triangulate(crop), crop, window);
}

} // namespace bindisc
