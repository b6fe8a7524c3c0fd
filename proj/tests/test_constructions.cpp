#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "bindisc/constructions.hpp"

using namespace bindisc;
using rc = radius_class;

namespace {

struct constant_word {
    int value;
    int letter(std::int64_t) const { return value; }
};

std::set<std::pair<long, long>> rounded(const std::vector<std::array<double, 2>>& v)
{
    std::set<std::pair<long, long>> out;
    for (const auto& p : v) out.insert({std::lround(p[0] * 1e6), std::lround(p[1] * 1e6)});
    return out;
}

// letters of the column tiling read back from the geometry: a square column
// has width 2, a triangle column sqrt3
std::string column_letters(const square_triangle_tiling& t)
{
    std::set<long> xs;
    for (const auto& v : t.vertices) xs.insert(std::lround(v[0] * 1e6));
    std::string out;
    long prev = 0;
    bool first = true;
    for (long x : xs) {
        if (!first) out += (std::abs((x - prev) - 2000000) < 10 ? '1' : '0');
        prev = x;
        first = false;
    }
    return out;
}

packing window_of(const packing& p, double k)
{
    packing w;
    for (const auto& d : p.discs)
        if (std::fabs(d.x) <= k && std::fabs(d.y) <= k) w.discs.push_back(d);
    return w;
}

// Midpoint rule over the x-range where the disc meets the rectangle.
double grid_area(double cx, double cy, double R, double x1, double x2, double y1, double y2)
{
    double a = std::max(x1, cx - R), b = std::min(x2, cx + R);
    if (b <= a) return 0;
    const int n = 200000;
    double h = (b - a) / n;
    double acc = 0;
    for (int i = 0; i < n; ++i) {
        double x = a + (i + 0.5) * h;
        double half = std::sqrt(std::max(0.0, R * R - (x - cx) * (x - cx)));
        double lo = std::max(cy - half, y1), hi = std::min(cy + half, y2);
        if (hi > lo) acc += (hi - lo) * h;
    }
    return acc;
}

} // namespace

TEST(ColumnTiling, AllTrianglesAtOne)
{
    auto t = column_tiling(1.0, 5, 4);
    EXPECT_EQ(t.count(tile_kind::square), 0u);
    EXPECT_EQ(t.count(tile_kind::triangle), 11u * 8);
    EXPECT_NO_THROW(validate_tiling(t));
}

TEST(ColumnTiling, AlternatesAtTwoThirds)
{
    auto t = column_tiling(2.0 / 3.0, 6, 3);
    std::string letters = column_letters(t);
    ASSERT_EQ(letters.size(), 13u);
    for (std::size_t i = 1; i < letters.size(); ++i) EXPECT_NE(letters[i], letters[i - 1]);
    EXPECT_NO_THROW(validate_tiling(t));
}

TEST(ColumnTiling, SilverWordPattern)
{
    auto silver = standard_word::sqrt2_minus_1();
    auto t = column_tiling(silver, 20, 2);
    // columns -20..20; square columns are the letters 1 of u(sqrt2 - 1)
    std::string expected = word_window(silver, -20, 21);
    EXPECT_EQ(column_letters(t), expected);
    EXPECT_EQ(expected.substr(0, 40), "10010101001010010101" "0" "0101001010010101001");
}

TEST(ColumnTiling, SquareProportion)
{
    for (double x : {0.6, 0.75, 0.9}) {
        double a = (1 - x) / x;
        auto t = column_tiling(x, 300, 10);
        double squares = static_cast<double>(t.count(tile_kind::square));
        double frac = squares / static_cast<double>(t.tiles.size());
        EXPECT_NEAR(frac, a / (a + 2 * (1 - a)), 2e-3) << x;
    }
    EXPECT_THROW(column_tiling(0.5, 3), std::out_of_range);
    EXPECT_THROW(column_tiling(1.2, 3), std::out_of_range);
}

TEST(TilingToPacking, SingleSquare)
{
    square_triangle_tiling t;
    t.vertices = {{0, 0}, {2, 0}, {2, 2}, {0, 2}};
    t.tiles = {{tile_kind::square, {0, 1, 2, 3}}};
    auto p = tiling_to_packing(t);
    ASSERT_EQ(p.discs.size(), 5u);
    EXPECT_NO_THROW(validate_packing(p));
    int tangent = 0;
    for (int i = 0; i < 4; ++i) {
        double d = std::hypot(p.discs[i].x - p.discs[4].x, p.discs[i].y - p.discs[4].y);
        tangent += std::fabs(d - (1 + small_radius)) < 1e-12;
    }
    EXPECT_EQ(tangent, 4);
}

TEST(TilingToPacking, SingleTriangleAndErrors)
{
    square_triangle_tiling t;
    t.vertices = {{0, 0}, {2, 0}, {1, std::sqrt(3.0)}};
    t.tiles = {{tile_kind::triangle, {0, 1, 2}}};
    auto p = tiling_to_packing(t);
    EXPECT_EQ(p.discs.size(), 3u);
    EXPECT_NO_THROW(validate_packing(p));
    t.vertices[2] = {1, 2};
    EXPECT_THROW(tiling_to_packing(t), invalid_tiling);
    square_triangle_tiling rhombus;
    rhombus.vertices = {{0, 0}, {2, 0}, {3, std::sqrt(3.0)}, {1, std::sqrt(3.0)}};
    rhombus.tiles = {{tile_kind::square, {0, 1, 2, 3}}};
    EXPECT_THROW(tiling_to_packing(rhombus), invalid_tiling);
}

TEST(TilingToPacking, ColumnTilingGivesXPacking)
{
    for (double x : {0.6, 0.75, 1.0}) {
        auto p = tiling_to_packing(column_tiling(x, 200, 200));
        EXPECT_NO_THROW(validate_packing(p));
        EXPECT_NEAR(large_fraction(p), x, 0.01) << x;
    }
}

TEST(PackingToTiling, RoundTrip)
{
    auto t = column_tiling(0.75, 6, 6);
    auto back = packing_to_tiling(tiling_to_packing(t));
    EXPECT_EQ(rounded(back.vertices), rounded(t.vertices));
    EXPECT_EQ(back.count(tile_kind::square), t.count(tile_kind::square));
    EXPECT_EQ(back.count(tile_kind::triangle), t.count(tile_kind::triangle));
    EXPECT_NO_THROW(validate_tiling(back));
}

TEST(PackingToTiling, OneToOneIsSquareGrid)
{
    auto t = packing_to_tiling(one_to_one_packing(4));
    EXPECT_EQ(t.count(tile_kind::triangle), 0u);
    EXPECT_EQ(t.count(tile_kind::square), 64u);
}

TEST(PackingToTiling, RejectsSmallHexagonal)
{
    auto p = hexagonal_packing(6, 6, rc::small);
    EXPECT_THROW(packing_to_tiling(p), bad_neighborhood_present);
}

TEST(ColumnPacking, ValidAndStoichiometric)
{
    for (double x : {0.1, 0.3, 0.45}) {
        auto p = column_packing(x, 200, 40);
        EXPECT_NO_THROW(validate_packing(p));
        EXPECT_NEAR(large_fraction(p), x, 0.02) << x;
    }
    EXPECT_THROW(column_packing(0.5, 10), std::out_of_range);
    EXPECT_THROW(column_packing(0.0, 10), std::out_of_range);
}

TEST(ColumnPacking, AllLargeColumnsIsSquareGrid)
{
    auto p = column_packing(constant_word{0}, 4, 8);
    auto q = tiling_to_packing(packing_to_tiling(p));
    EXPECT_NO_THROW(validate_packing(p));
    // the lattice of the 1:1 packing: large at even, small at odd coordinates
    for (const auto& d : p.discs) {
        double px = d.x - p.discs.front().x, py = d.y - p.discs.front().y;
        double off = d.size == rc::large ? 0.0 : 1.0;
        EXPECT_NEAR(std::remainder(px - off, 2.0), 0.0, 1e-12);
        EXPECT_NEAR(std::remainder(py - off, 2.0), 0.0, 1e-12);
    }
    EXPECT_EQ(q.discs.size(), p.discs.size());
}

TEST(MeasuredDensity, Lattices)
{
    auto hex = hexagonal_packing(40, 40, rc::large);
    double target = M_PI / (2 * std::sqrt(3.0));
    EXPECT_NEAR(measured_density(hex, 50.0).mid(), target, 0.005 * target);
    auto one = one_to_one_packing(30);
    double half = M_PI / (2 + std::sqrt(2.0));
    EXPECT_NEAR(measured_density(one, 50.0).mid(), half, 0.005 * half);
    EXPECT_EQ(measured_density(packing{}, 3.0), interval(0.0));
}

TEST(MeasuredDensity, ClippedDiscAreaMatchesQuadrature)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 300; ++trial) {
        double cx = u(rng), cy = u(rng);
        rc size = trial % 2 ? rc::large : rc::small;
        double R = radius_of(size);
        double x1 = -0.7 + 0.3 * u(rng), x2 = 0.9 + 0.3 * u(rng);
        double y1 = -0.8 + 0.3 * u(rng), y2 = 0.6 + 0.3 * u(rng);
        interval a = disc_rectangle_area(cx, cy, size, x1, x2, y1, y2);
        double g = grid_area(cx, cy, R, x1, x2, y1, y2);
        // acos near +-1 loses half the digits
        EXPECT_LE(a.width(), 1e-6);
        EXPECT_NEAR(a.mid(), g, 1e-6) << trial;
    }
    // a disc straddling a corner: a quarter disc
    interval q = disc_rectangle_area(0.0, 0.0, rc::large, 0.0, 5.0, 0.0, 5.0);
    EXPECT_TRUE(overlaps(q, constants<double>::pi() / 4.0));
}

TEST(Constructions, StoichiometryConverges)
{
    for (double x : {0.3, 0.5, 0.75}) {
        auto p = densest_packing(x, 200);
        EXPECT_NO_THROW(validate_packing(p));
        // windows of side 25, 50, 100
        double last = 1;
        for (double side : {25.0, 50.0, 100.0}) last = std::fabs(large_fraction(window_of(p, side / 2)) - x);
        EXPECT_LT(last, 0.02) << x;
        EXPECT_LT(std::fabs(large_fraction(p) - x), 0.02) << x;
    }
}

TEST(Constructions, DensityReachesDeltaAtOneHalfAndAbove)
{
    for (double x : {0.5, 0.75}) {
        auto p = densest_packing(x, 200);
        double target = delta_max(interval(x)).mid();
        EXPECT_NEAR(measured_density(p, 50.0).mid(), target, 0.01 * target) << x;
    }
}

// Below 1/2 the joints between the two phases cost O(1) area per unit
// height each, and a window of half-width k meets O(sqrt k) of them, so the
// gap closes like k^-1/2.
TEST(Constructions, TwinnedDensityConverges)
{
    auto p = column_packing(0.3, 1000, 420);
    double target = delta_max(interval(0.3)).mid();
    double prev = 1;
    for (double k : {50.0, 100.0, 200.0, 400.0}) {
        double gap = (target - measured_density(p, k).mid()) / target;
        EXPECT_GT(gap, 0.0);
        EXPECT_LT(gap, prev) << k;
        prev = gap;
    }
    EXPECT_LT(prev, 0.01);
}

TEST(BlockCounts, ClosedForms)
{
    auto b4 = block_counts(4);
    EXPECT_EQ(b4.s_square, 39);
    EXPECT_EQ(b4.s_triangle, 48);
    EXPECT_EQ(b4.t_square, 9);
    EXPECT_EQ(b4.t_triangle, 30);
    auto b0 = block_counts(0);
    EXPECT_EQ(std::vector<std::int64_t>({b0.s_square, b0.s_triangle, b0.t_square, b0.t_triangle}),
              std::vector<std::int64_t>({7, 16, 3, 6}));
    auto b2 = block_counts(2);
    EXPECT_EQ(std::vector<std::int64_t>({b2.s_square, b2.s_triangle, b2.t_square, b2.t_triangle}),
              std::vector<std::int64_t>({19, 32, 6, 14}));
    auto b8 = block_counts(8);
    EXPECT_EQ(std::vector<std::int64_t>({b8.s_square, b8.s_triangle, b8.t_square, b8.t_triangle}),
              std::vector<std::int64_t>({103, 80, 15, 86}));
    EXPECT_THROW(block_counts(3), odd_block_size);
    EXPECT_THROW(block_counts(-2), odd_block_size);
}

TEST(SquareTriangleRatio, Values)
{
    EXPECT_DOUBLE_EQ(square_triangle_ratio(0, 4), 0.3);
    EXPECT_DOUBLE_EQ(square_triangle_ratio(1, 4), 0.8125);
    double prev0 = 1, prev1 = 0;
    for (std::int64_t n = 10; n <= 1000; n *= 10) {
        EXPECT_LT(square_triangle_ratio(0, n), prev0);
        EXPECT_GT(square_triangle_ratio(1, n), prev1);
        prev0 = square_triangle_ratio(0, n);
        prev1 = square_triangle_ratio(1, n);
    }
    EXPECT_LT(prev0, 0.002);
    EXPECT_GT(prev1, 100);
}

TEST(SolveBeta, RoundTripAndNoSolution)
{
    double f = square_triangle_ratio(0.5, 4);
    double alpha = f / (1 + f);
    EXPECT_NEAR(solve_beta(alpha, 4), 0.5, 1e-12);
    EXPECT_THROW(solve_beta(0.9, 4), no_solution);
    EXPECT_THROW(solve_beta(0.5, 4), no_solution);
    double beta = solve_beta(0.5, 8);
    EXPECT_GT(beta, 0);
    EXPECT_LT(beta, 1);
    EXPECT_NEAR(square_triangle_ratio(beta, 8), 1.0, 1e-12);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int i = 0; i < 200; ++i) {
        double a = u(rng);
        for (std::int64_t n = 2; n <= 4096; n *= 2) {
            try {
                double b = solve_beta(a, n);
                EXPECT_NEAR(square_triangle_ratio(b, n), a / (1 - a), 1e-12 * (1 + a / (1 - a)));
                break;
            } catch (const no_solution&) {
            }
        }
    }
}

TEST(Dodecagon, TwoTilingsHaveTheSameArea)
{
    for (std::int64_t s : {1, 2, 5}) EXPECT_EQ(dodecagon_area(s), dodecagon_tiles_area(s));
    EXPECT_EQ(dodecagon_squares, 6);
    EXPECT_EQ(dodecagon_triangles, 12);
    EXPECT_EQ(dodecagon_area(2), (quadratic_sqrt3{24, 12}));
}

TEST(Dodecagon, PatternBoundScalesWithArea)
{
    EXPECT_EQ(dodecagon_pattern_bound(10, 0), 0);
    for (double k : {3.0, 10.0, 57.5}) {
        auto a = dodecagon_pattern_bound(k, 0.01);
        auto b = dodecagon_pattern_bound(2 * k, 0.01);
        EXPECT_GE(b - 4 * a, 0) << k;
        EXPECT_LE(b - 4 * a, 3) << k;
    }
}
