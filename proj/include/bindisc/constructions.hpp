#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "density.hpp"
#include "packing.hpp"
#include "words.hpp"

namespace bindisc {

struct construction_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct invalid_tiling : construction_error {
    using construction_error::construction_error;
};
struct bad_neighborhood_present : construction_error {
    explicit bad_neighborhood_present(std::size_t i)
        : construction_error("disc " + std::to_string(i) + " has a bad neighborhood"), disc_index(i)
    {
    }
    std::size_t disc_index;
};
struct odd_block_size : construction_error {
    odd_block_size() : construction_error("block size n must be even and nonnegative") {}
};
struct no_solution : construction_error {
    no_solution() : construction_error("no beta in (0,1); increase n") {}
};

inline constexpr double tile_edge = 2.0;

enum class tile_kind { square, triangle };

struct tile {
    tile_kind kind;
    std::vector<int> v; // counterclockwise
};

struct square_triangle_tiling {
    std::vector<std::array<double, 2>> vertices;
    std::vector<tile> tiles;

    std::size_t count(tile_kind k) const
    {
        return static_cast<std::size_t>(
            std::count_if(tiles.begin(), tiles.end(), [k](const tile& t) { return t.kind == k; }));
    }
};

// ------------------------------------------------------------- lattices

inline packing hexagonal_packing(int half_rows, int half_cols, radius_class size)
{
    double s = 2 * radius_of(size);
    packing p;
    for (int i = -half_rows; i <= half_rows; ++i)
        for (int j = -half_cols; j <= half_cols; ++j) {
            double shift = (i % 2 != 0) ? 0.5 : 0.0;
            p.discs.push_back({s * (j + shift), s * std::sqrt(3.0) / 2 * i, size});
        }
    return p;
}

// Large discs on the square grid of side 2, a small disc in every square.
inline packing one_to_one_packing(int half)
{
    packing p;
    for (int i = -half; i <= half; ++i)
        for (int j = -half; j <= half; ++j) {
            p.discs.push_back({2.0 * i, 2.0 * j, radius_class::large});
            if (i < half && j < half) p.discs.push_back({2.0 * i + 1, 2.0 * j + 1, radius_class::small});
        }
    return p;
}

// Exact rationals with small denominators get the exact word; anything else
// is treated as the real number closest to the double.
inline standard_word word_for_alpha(double a)
{
    if (!(a >= 0 && a < 1)) throw std::out_of_range("alpha outside [0,1)");
    for (std::int64_t q = 1; q <= 1000; ++q) {
        double pq = std::round(a * static_cast<double>(q));
        if (std::fabs(pq / static_cast<double>(q) - a) < 1e-14) return standard_word::rational(static_cast<std::int64_t>(pq), q);
    }
    return standard_word::from_double(a);
}

// ------------------------------------------------------------- tilings

namespace detail {

inline void orient_ccw(const std::vector<std::array<double, 2>>& v, tile& t)
{
    const auto& a = v[t.v[0]];
    const auto& b = v[t.v[1]];
    const auto& c = v[t.v[2]];
    if (orientation(a[0], a[1], b[0], b[1], c[0], c[1]) < 0) std::reverse(t.v.begin(), t.v.end());
}

} // namespace detail

// Columns k in [-extent, extent]; column k is a column of squares iff u_k = 1
// and of triangles otherwise. rows vertical units of height 2.
inline square_triangle_tiling column_tiling(const standard_word& w, int extent, int rows)
{
    if (extent < 0 || rows < 1) throw std::invalid_argument("extent and rows must be positive");
    const double h = std::sqrt(3.0);
    square_triangle_tiling t;
    int columns = 2 * extent + 1;
    std::vector<double> line_x(columns + 1);
    std::vector<int> offset(columns + 1);
    std::vector<bool> squares(columns);
    for (int c = 0; c < columns; ++c) squares[c] = sturmian_letter(w, c - extent) == 1;
    // line extent sits at x = 0
    line_x[0] = 0;
    offset[0] = 0;
    for (int c = 0; c < columns; ++c) {
        line_x[c + 1] = line_x[c] + (squares[c] ? tile_edge : h);
        offset[c + 1] = squares[c] ? offset[c] : 1 - offset[c];
    }
    double x0 = line_x[extent];
    double y0 = rows; // centers the tiling vertically
    std::vector<int> first(columns + 1);
    for (int i = 0; i <= columns; ++i) {
        first[i] = static_cast<int>(t.vertices.size());
        for (int j = 0; j <= rows; ++j) t.vertices.push_back({line_x[i] - x0, 2.0 * j + offset[i] - y0});
    }
    auto at = [&](int line, int j) { return first[line] + j; };
    for (int c = 0; c < columns; ++c) {
        if (squares[c]) {
            for (int j = 0; j < rows; ++j)
                t.tiles.push_back({tile_kind::square, {at(c, j), at(c + 1, j), at(c + 1, j + 1), at(c, j + 1)}});
        } else {
            int lo = offset[c] == 0 ? c : c + 1;
            int hi = offset[c] == 0 ? c + 1 : c;
            for (int j = 0; j < rows; ++j) {
                t.tiles.push_back({tile_kind::triangle, {at(lo, j), at(hi, j), at(lo, j + 1)}});
                t.tiles.push_back({tile_kind::triangle, {at(hi, j), at(hi, j + 1), at(lo, j + 1)}});
            }
        }
    }
    for (auto& tl : t.tiles) detail::orient_ccw(t.vertices, tl);
    return t;
}

// alpha = (1-x)/x for x in (1/2, 1].
inline square_triangle_tiling column_tiling(double x, int extent, int rows = -1)
{
    if (!(x > 0.5 && x <= 1)) throw std::out_of_range("column tiling needs x in (1/2, 1]");
    if (rows < 0) rows = extent;
    return column_tiling(word_for_alpha((1 - x) / x), extent, rows);
}

inline void validate_tiling(const square_triangle_tiling& t, double tol = 1e-9)
{
    for (std::size_t k = 0; k < t.tiles.size(); ++k) {
        const auto& tl = t.tiles[k];
        std::size_t need = tl.kind == tile_kind::square ? 4 : 3;
        if (tl.v.size() != need) throw invalid_tiling("tile " + std::to_string(k) + " has the wrong vertex count");
        for (std::size_t i = 0; i < need; ++i) {
            int a = tl.v[i], b = tl.v[(i + 1) % need];
            if (a < 0 || b < 0 || a >= static_cast<int>(t.vertices.size()) || b >= static_cast<int>(t.vertices.size()))
                throw invalid_tiling("tile " + std::to_string(k) + " refers to a missing vertex");
            double len = std::hypot(t.vertices[a][0] - t.vertices[b][0], t.vertices[a][1] - t.vertices[b][1]);
            if (std::fabs(len - tile_edge) > tol) throw invalid_tiling("tile " + std::to_string(k) + " has an edge of length " + std::to_string(len));
        }
        if (tl.kind == tile_kind::square) {
            const auto& a = t.vertices[tl.v[0]];
            const auto& c = t.vertices[tl.v[2]];
            if (std::fabs(std::hypot(a[0] - c[0], a[1] - c[1]) - tile_edge * std::sqrt(2.0)) > tol)
                throw invalid_tiling("tile " + std::to_string(k) + " is a rhombus, not a square");
        }
    }
}

inline packing tiling_to_packing(const square_triangle_tiling& t)
{
    validate_tiling(t);
    packing p;
    for (const auto& v : t.vertices) p.discs.push_back({v[0], v[1], radius_class::large});
    for (const auto& tl : t.tiles) {
        if (tl.kind != tile_kind::square) continue;
        double cx = 0, cy = 0;
        for (int i : tl.v) cx += t.vertices[i][0], cy += t.vertices[i][1];
        p.discs.push_back({cx / 4, cy / 4, radius_class::small});
    }
    return p;
}

// Edges join large discs at distance 2; a square is the four large discs
// around a small disc; triangles are the remaining 3-cliques of edges.
inline square_triangle_tiling packing_to_tiling(const packing& p, double tol = 1e-6)
{
    if (p.discs.size() >= 3) {
        fm_triangulation tr = fm_triangulate(p);
        for (std::size_t i = 0; i < p.discs.size(); ++i) {
            if (!tr.interior(i)) continue;
            if (is_bad_neighborhood(neighborhood(tr, p, i), p.discs[i].size, regime::x_ge_half))
                throw bad_neighborhood_present(i);
        }
    }
    square_triangle_tiling t;
    std::vector<int> index(p.discs.size(), -1);
    std::map<std::pair<std::int64_t, std::int64_t>, std::vector<int>> grid;
    auto key = [](double x, double y) {
        return std::make_pair(static_cast<std::int64_t>(std::floor(x / 3)), static_cast<std::int64_t>(std::floor(y / 3)));
    };
    for (std::size_t i = 0; i < p.discs.size(); ++i) {
        if (p.discs[i].size != radius_class::large) continue;
        index[i] = static_cast<int>(t.vertices.size());
        t.vertices.push_back({p.discs[i].x, p.discs[i].y});
        grid[key(p.discs[i].x, p.discs[i].y)].push_back(index[i]);
    }
    auto near = [&](double x, double y, double dist) {
        std::vector<int> out;
        auto [kx, ky] = key(x, y);
        for (std::int64_t dx = -1; dx <= 1; ++dx)
            for (std::int64_t dy = -1; dy <= 1; ++dy) {
                auto it = grid.find({kx + dx, ky + dy});
                if (it == grid.end()) continue;
                for (int j : it->second)
                    if (std::fabs(std::hypot(t.vertices[j][0] - x, t.vertices[j][1] - y) - dist) <= tol) out.push_back(j);
            }
        return out;
    };
    for (const auto& d : p.discs) {
        if (d.size != radius_class::small) continue;
        auto around = near(d.x, d.y, std::sqrt(2.0));
        if (around.size() != 4) continue; // a rim disc
        std::sort(around.begin(), around.end(), [&](int a, int b) {
            return std::atan2(t.vertices[a][1] - d.y, t.vertices[a][0] - d.x) <
                   std::atan2(t.vertices[b][1] - d.y, t.vertices[b][0] - d.x);
        });
        t.tiles.push_back({tile_kind::square, around});
    }
    std::vector<std::vector<int>> adj(t.vertices.size());
    for (std::size_t i = 0; i < t.vertices.size(); ++i)
        for (int j : near(t.vertices[i][0], t.vertices[i][1], tile_edge))
            if (j != static_cast<int>(i)) adj[i].push_back(j);
    for (auto& a : adj) std::sort(a.begin(), a.end());
    for (int i = 0; i < static_cast<int>(adj.size()); ++i)
        for (int j : adj[i]) {
            if (j <= i) continue;
            for (int k : adj[j]) {
                if (k <= j || !std::binary_search(adj[i].begin(), adj[i].end(), k)) continue;
                tile tl{tile_kind::triangle, {i, j, k}};
                detail::orient_ccw(t.vertices, tl);
                t.tiles.push_back(tl);
            }
        }
    return t;
}

// ------------------------------------------------------------- twinned packings

// Fraction of large-disc columns giving large-disc proportion x in the limit:
// a large column carries 1/2 large and 1/2 nested small disc per unit height,
// a small column 1/(2r) small discs.
inline interval_ld large_column_frequency(const interval_ld& x)
{
    const auto& r = constants<long double>::r();
    return x / (r * (1.0L - 2.0L * x) + x);
}

// Columns at word positions [-extent, extent] of the hat expansion of
// u(1 - p): letter 0 is a column of large discs (spacing 2, small discs
// nested between consecutive large columns), letter 1 a column of small
// discs in hexagonal arrangement. Inside a phase the lattice spacing is used;
// the first column after a change of phase is pushed left disc by disc until
// it touches the previous columns, which keeps the joints thin. Discs cover
// |y| <= half_height.
template <class Word>
packing column_packing(const Word& w, int extent, double half_height)
{
    const double r = small_radius;
    const double s3 = std::sqrt(3.0);
    struct column {
        std::vector<disc> discs; // sorted by y
    };
    int columns = 2 * extent + 1;
    int rows = static_cast<int>(std::ceil(half_height / 2));
    int small_rows = static_cast<int>(std::ceil(half_height / (2 * r)));
    std::vector<column> placed;
    std::vector<int> letter(columns);
    for (int c = 0; c < columns; ++c) letter[c] = w.letter(c - extent);

    // leftmost x >= floor at which a disc of radius rad at height y clears
    // the discs of the last few columns
    auto push_left = [&](double y, double rad, double floor) {
        double x = floor;
        int back = std::max(0, static_cast<int>(placed.size()) - 6);
        for (int c = back; c < static_cast<int>(placed.size()); ++c) {
            const auto& d = placed[c].discs;
            auto it = std::lower_bound(d.begin(), d.end(), y - 2.0, [](const disc& e, double v) { return e.y < v; });
            for (; it != d.end() && it->y <= y + 2.0; ++it) {
                double reach = rad + radius_of(it->size);
                double dy = y - it->y;
                if (std::fabs(dy) >= reach) continue;
                x = std::max(x, it->x + std::sqrt(reach * reach - dy * dy));
            }
        }
        return x;
    };
    auto leftmost = [&]() {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& d : placed.back().discs) m = std::min(m, d.x);
        return m;
    };

    // after a change of phase, the vertical phase of the new column is chosen
    // among a few candidates to fit the previous column best
    const int phases = 16;
    double large_x = 0, large_phase = 0, small_phase = 0;
    int small_run = 0;
    for (int c = 0; c < columns; ++c) {
        column col;
        bool fresh = c == 0 || letter[c] != letter[c - 1];
        if (letter[c] == 0) {
            small_run = 0;
            double floor = placed.empty() ? 0.0 : leftmost();
            if (fresh) {
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < phases; ++k) {
                    double phi = 2.0 * k / phases;
                    double x = floor;
                    for (int j = -rows; j <= rows; ++j) x = std::max(x, push_left(2.0 * j + phi, 1.0, floor));
                    if (x < best) best = x, large_phase = phi;
                }
                large_x = best;
            } else {
                large_x += 2;
            }
            for (int j = -rows; j <= rows; ++j) col.discs.push_back({large_x, 2.0 * j + large_phase, radius_class::large});
            placed.push_back(col);
            if (c + 1 < columns && letter[c + 1] == 0) {
                column nested;
                for (int j = -rows; j < rows; ++j)
                    nested.discs.push_back({large_x + 1, 2.0 * j + 1 + large_phase, radius_class::small});
                placed.push_back(nested);
            }
        } else {
            double floor = placed.empty() ? 0.0 : leftmost();
            auto build = [&](double phi) {
                column trial;
                for (int j = -small_rows; j <= small_rows; ++j) {
                    double y = 2 * r * j + phi;
                    trial.discs.push_back({push_left(y, r, floor), y, radius_class::small});
                }
                return trial;
            };
            if (small_run == 0) {
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < phases; ++k) {
                    double phi = 2 * r * k / phases;
                    column trial = build(phi);
                    double total = 0;
                    for (const auto& d : trial.discs) total += d.x;
                    if (total < best) best = total, small_phase = phi, col = std::move(trial);
                }
            } else {
                col = build(small_phase + (small_run % 2) * r);
            }
            ++small_run;
            placed.push_back(col);
        }
    }
    // column `extent` sits at x = 0
    double x0 = 0;
    {
        int c = 0, idx = 0;
        for (; c < extent; ++c) idx += (letter[c] == 0 && c + 1 < columns && letter[c + 1] == 0) ? 2 : 1;
        x0 = placed[idx].discs.front().x;
    }
    packing p;
    for (const auto& col : placed)
        for (const auto& d : col.discs) p.discs.push_back({d.x - x0, d.y, d.size});
    return p;
}

inline packing column_packing(double x, int extent, double half_height = -1)
{
    if (!(x > 0 && x < 0.5)) throw std::out_of_range("column packing needs x in (0, 1/2)");
    if (half_height < 0) half_height = extent;
    interval_ld beta = 1.0L - large_column_frequency(interval_ld(static_cast<long double>(x)));
    return column_packing(expanded_word(standard_word::real(beta)), extent, half_height);
}

// The densest construction for any x in [0, 1].
inline packing densest_packing(double x, int extent)
{
    if (x < 0 || x > 1) throw std::out_of_range("x outside [0,1]");
    if (x == 0) return hexagonal_packing(extent, extent, radius_class::small);
    if (x == 0.5) return one_to_one_packing(extent);
    if (x < 0.5) return column_packing(x, extent);
    return tiling_to_packing(column_tiling(x, extent));
}

// ------------------------------------------------------------- density

namespace detail {

// integral of sqrt(R^2 - t^2)
template <class T>
basic_interval<T> half_chord_primitive(const basic_interval<T>& R, const basic_interval<T>& t)
{
    basic_interval<T> tc = intersect(t, basic_interval<T>(-R.hi(), R.hi()));
    basic_interval<T> z = intersect(tc / R, basic_interval<T>(T(-1), T(1)));
    basic_interval<T> rest = sqr(R) - sqr(tc);
    rest = basic_interval<T>(std::max(rest.lo(), T(0)), std::max(rest.hi(), T(0)));
    basic_interval<T> asin_z = constants<T>::pi() / T(2) - acos(z);
    return (tc * sqrt(rest) + sqr(R) * asin_z) / T(2);
}

// Area of the disc of radius R centered at 0 inside {X <= a, Y <= b}.
template <class T>
basic_interval<T> quadrant_area(const basic_interval<T>& R, T a, T b)
{
    using I = basic_interval<T>;
    a = std::clamp(a, -R.hi(), R.hi());
    b = std::clamp(b, -R.hi(), R.hi());
    I bi(b), ai(a);
    I rest = sqr(R) - sqr(bi);
    rest = I(std::max(rest.lo(), T(0)), std::max(rest.hi(), T(0)));
    I c = sqrt(rest);
    auto P = [&](const I& t) { return half_chord_primitive(R, t); };
    if (b >= 0) {
        I u1 = min(ai, -c);
        I u2 = max(-c, min(ai, c));
        I u3 = max(c, ai);
        I piece1 = T(2) * (P(u1) - P(I(-R.hi())));
        I piece2 = (bi * u2 + P(u2)) - (bi * (-c) + P(-c));
        I piece3 = T(2) * (P(u3) - P(c));
        I s = piece1 + piece2 + piece3;
        return I(std::max(s.lo(), T(0)), s.hi());
    }
    I u = max(-c, min(ai, c));
    I s = (bi * u + P(u)) - (bi * (-c) + P(-c));
    return I(std::max(s.lo(), T(0)), std::max(s.hi(), T(0)));
}

} // namespace detail

// Exact area of a disc inside the axis-parallel rectangle, enclosed.
template <class T>
basic_interval<T> disc_rectangle_area(T cx, T cy, radius_class size, T x1, T x2, T y1, T y2)
{
    using I = basic_interval<T>;
    I R = radius_value<T>(size);
    T rh = R.hi();
    if (cx + rh <= x1 || cx - rh >= x2 || cy + rh <= y1 || cy - rh >= y2) return I(T(0));
    I full = constants<T>::pi() * sqr(R);
    if (cx - rh >= x1 && cx + rh <= x2 && cy - rh >= y1 && cy + rh <= y2) return full;
    // corners relative to the center, rounded outward to keep the rectangle
    auto lo = [](T a, T b) { return (I(a) - I(b)).lo(); };
    auto hi = [](T a, T b) { return (I(a) - I(b)).hi(); };
    T ax1 = lo(x1, cx), ax2 = hi(x2, cx), ay1 = lo(y1, cy), ay2 = hi(y2, cy);
    T bx1 = hi(x1, cx), bx2 = lo(x2, cx), by1 = hi(y1, cy), by2 = lo(y2, cy);
    auto area = [&](T a1, T a2, T b1, T b2) {
        return detail::quadrant_area(R, a2, b2) - detail::quadrant_area(R, a1, b2) - detail::quadrant_area(R, a2, b1) +
               detail::quadrant_area(R, a1, b1);
    };
    // the inner and outer rectangles bracket the true one when the shift is inexact
    I outer = area(ax1, ax2, ay1, ay2);
    I inner = area(bx1, bx2, by1, by2);
    I out(std::max(T(0), std::min(inner.lo(), outer.lo())), std::min(full.hi(), std::max(inner.hi(), outer.hi())));
    return out;
}

// Covered proportion of the window [-k, k]^2.
template <class T = double>
basic_interval<T> measured_density(const packing& p, T k)
{
    using I = basic_interval<T>;
    if (!(k > 0)) throw std::invalid_argument("window half-width must be positive");
    I covered(T(0));
    I full_large = constants<T>::pi();
    I full_small = constants<T>::pi() * constants<T>::r_squared();
    std::size_t n_large = 0, n_small = 0;
    for (const auto& d : p.discs) {
        T cx = static_cast<T>(d.x), cy = static_cast<T>(d.y);
        T rh = radius_value<T>(d.size).hi();
        if (cx - rh >= -k && cx + rh <= k && cy - rh >= -k && cy + rh <= k) {
            (d.size == radius_class::large ? n_large : n_small)++;
            continue;
        }
        covered += disc_rectangle_area<T>(cx, cy, d.size, -k, k, -k, k);
    }
    covered += full_large * I(static_cast<T>(n_large)) + full_small * I(static_cast<T>(n_small));
    return covered / sqr(I(T(2)) * I(k));
}

// ------------------------------------------------------------- entropy widgets

struct block_counts_t {
    std::int64_t n;
    std::int64_t s_square, s_triangle, t_square, t_triangle;
};

inline block_counts_t block_counts(std::int64_t n)
{
    if (n < 0 || n % 2 != 0) throw odd_block_size();
    return {n, (n + 1) * (n + 1) + 2 * n + 6, 8 * n + 16, 3 * n / 2 + 3, n * n + 2 * n + 6};
}

// f(beta, n): squares over triangles when a proportion beta of the blocks are S_n.
inline double square_triangle_ratio(double beta, std::int64_t n)
{
    auto b = block_counts(n);
    double num = beta * static_cast<double>(b.s_square) + (1 - beta) * static_cast<double>(b.t_square);
    double den = beta * static_cast<double>(b.s_triangle) + (1 - beta) * static_cast<double>(b.t_triangle);
    if (!(den > 0)) throw std::domain_error("no triangles");
    return num / den;
}

// f is a ratio of affine functions of beta, so f = a/(1-a) is linear in beta.
inline double solve_beta(double alpha, std::int64_t n)
{
    if (!(alpha > 0 && alpha < 1)) throw std::out_of_range("alpha outside (0,1)");
    auto b = block_counts(n);
    long double rho = static_cast<long double>(alpha) / (1.0L - alpha);
    long double num = rho * b.t_triangle - b.t_square;
    long double den = static_cast<long double>(b.s_square - b.t_square) - rho * (b.s_triangle - b.t_triangle);
    if (den == 0) throw no_solution();
    long double beta = num / den;
    if (!(beta > 0 && beta < 1)) throw no_solution();
    return static_cast<double>(beta);
}

// a + b sqrt3 with integer a, b
struct quadratic_sqrt3 {
    std::int64_t a = 0, b = 0;
    bool operator==(const quadratic_sqrt3&) const = default;
};

// Regular dodecagon of edge s: 3 (2 + sqrt3) s^2.
inline quadratic_sqrt3 dodecagon_area(std::int64_t s)
{
    return {6 * s * s, 3 * s * s};
}

// 6 squares and 12 triangles of edge s.
inline quadratic_sqrt3 dodecagon_tiles_area(std::int64_t s)
{
    std::int64_t sq = s * s;
    return {6 * sq, 12 * sq / 4};
}

inline constexpr int dodecagon_squares = 6;
inline constexpr int dodecagon_triangles = 12;

// log2 of the lower bound on the number of patterns of radius k: every
// free dodecagon has two tilings.
inline std::int64_t dodecagon_pattern_bound(double k, double dodecagon_density)
{
    if (!(k > 0) || dodecagon_density < 0) throw std::invalid_argument("k > 0 and density >= 0 required");
    return static_cast<std::int64_t>(std::floor(dodecagon_density * M_PI * k * k));
}

} // namespace bindisc
