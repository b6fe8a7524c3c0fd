#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "interval.hpp"

namespace bindisc {

struct degenerate_box : std::domain_error {
    degenerate_box() : std::domain_error("triangle inequality fails on the whole box") {}
};
struct sector_crosses_opposite_side : std::domain_error {
    sector_crosses_opposite_side() : std::domain_error("a vertex disc may reach the opposite side") {}
};

enum class radius_class { large, small };

inline char letter_of(radius_class c)
{
    return c == radius_class::large ? '1' : 'r';
}

template <class T>
inline basic_interval<T> radius_value(radius_class c)
{
    return c == radius_class::large ? basic_interval<T>(T(1)) : constants<T>::r();
}

template <class T>
inline basic_interval<T> radius_squared(radius_class c)
{
    return c == radius_class::large ? basic_interval<T>(T(1)) : constants<T>::r_squared();
}

// side i is opposite vertex i
template <class T>
struct triangle_spec {
    std::array<radius_class, 3> radii;
    std::array<basic_interval<T>, 3> sides;
};

enum class tight_kind { t111, t11r, t1rr, trrr };

inline std::array<radius_class, 3> kind_radii(tight_kind k)
{
    using rc = radius_class;
    switch (k) {
    case tight_kind::t111: return {rc::large, rc::large, rc::large};
    case tight_kind::t11r: return {rc::large, rc::large, rc::small};
    case tight_kind::t1rr: return {rc::large, rc::small, rc::small};
    case tight_kind::trrr: return {rc::small, rc::small, rc::small};
    }
    throw std::invalid_argument("tight kind");
}

inline std::string kind_name(tight_kind k)
{
    auto r = kind_radii(k);
    return {letter_of(r[0]), letter_of(r[1]), letter_of(r[2])};
}

// Mutually tangent discs: each side is the sum of the two adjacent radii.
template <class T>
inline basic_interval<T> tangent_length(radius_class a, radius_class b)
{
    if (a == radius_class::large && b == radius_class::large) return T(2);
    if (a == radius_class::small && b == radius_class::small) return T(2) * constants<T>::r();
    return constants<T>::sqrt2();
}

template <class T>
inline triangle_spec<T> tight_spec(const std::array<radius_class, 3>& radii)
{
    return {radii,
            {tangent_length<T>(radii[1], radii[2]), tangent_length<T>(radii[0], radii[2]),
             tangent_length<T>(radii[0], radii[1])}};
}

template <class T>
inline triangle_spec<T> tight_spec(tight_kind k)
{
    return tight_spec<T>(kind_radii(k));
}

namespace detail {

// delta on one branch is a linear-fractional function of x, hence monotone:
// endpoints suffice.
template <class T>
inline basic_interval<T> delta_low_point(T x)
{
    const auto& pi = constants<T>::pi();
    const auto& r2 = constants<T>::r_squared();
    const auto& s3 = constants<T>::sqrt3();
    basic_interval<T> xi(x);
    basic_interval<T> num = pi * (r2 + xi * (T(1) - r2));
    basic_interval<T> den = T(2) * s3 * r2 + xi * (T(4) - T(4) * s3 * r2);
    return num / den;
}

template <class T>
inline basic_interval<T> delta_high_point(T x)
{
    const auto& pi = constants<T>::pi();
    const auto& r2 = constants<T>::r_squared();
    const auto& s3 = constants<T>::sqrt3();
    basic_interval<T> xi(x);
    basic_interval<T> num = pi * (r2 + xi * (T(1) - r2));
    basic_interval<T> den = (T(4) - T(2) * s3) + xi * (T(4) * s3 - T(4));
    return num / den;
}

} // namespace detail

template <class T>
inline basic_interval<T> delta_low(const basic_interval<T>& x)
{
    return hull(detail::delta_low_point(x.lo()), detail::delta_low_point(x.hi()));
}

template <class T>
inline basic_interval<T> delta_high(const basic_interval<T>& x)
{
    return hull(detail::delta_high_point(x.lo()), detail::delta_high_point(x.hi()));
}

// Maximal density of x-packings.
template <class T>
inline basic_interval<T> delta_max(const basic_interval<T>& x)
{
    if (x.lo() < 0 || x.hi() > 1) throw std::out_of_range("stoichiometry outside [0,1]");
    const T half = T(0.5);
    if (x.hi() <= half) return delta_low(x);
    if (x.lo() >= half) return delta_high(x);
    return hull(delta_low(basic_interval<T>(x.lo(), half)), delta_high(basic_interval<T>(half, x.hi())));
}

template <class T>
struct triangle_geometry {
    basic_interval<T> area;
    std::array<basic_interval<T>, 3> cosines;
    std::array<basic_interval<T>, 3> angles;
};

// Heron's product with each factor restricted to its admissible sign.
template <class T>
inline basic_interval<T> area_squared_times16(const std::array<basic_interval<T>, 3>& s)
{
    const auto& [a, b, c] = s;
    basic_interval<T> f0 = a + b + c;
    basic_interval<T> f1 = b + c - a;
    basic_interval<T> f2 = a + c - b;
    basic_interval<T> f3 = a + b - c;
    if (f1.hi() <= 0 || f2.hi() <= 0 || f3.hi() <= 0) throw degenerate_box();
    auto clip = [](const basic_interval<T>& f) { return basic_interval<T>(std::max(f.lo(), T(0)), f.hi()); };
    return f0 * clip(f1) * clip(f2) * clip(f3);
}

template <class T>
inline triangle_geometry<T> triangle_shape(const std::array<basic_interval<T>, 3>& s)
{
    triangle_geometry<T> g;
    g.area = sqrt(area_squared_times16(s)) / T(4);
    for (int i = 0; i < 3; ++i) {
        const auto& a = s[i];
        const auto& b = s[(i + 1) % 3];
        const auto& c = s[(i + 2) % 3];
        g.cosines[i] = (sqr(b) + sqr(c) - sqr(a)) / (T(2) * b * c);
        if (g.cosines[i].lo() > 1 || g.cosines[i].hi() < -1) throw degenerate_box();
        g.cosines[i] = intersect(g.cosines[i], basic_interval<T>(T(-1), T(1)));
        g.angles[i] = acos(g.cosines[i]);
    }
    return g;
}

template <class T>
inline basic_interval<T> triangle_area(const triangle_spec<T>& t)
{
    return sqrt(area_squared_times16(t.sides)) / T(4);
}

// Circular segment cut from a disc of radius R by a chord at distance h.
template <class T>
inline basic_interval<T> circular_segment(const basic_interval<T>& R, const basic_interval<T>& h)
{
    basic_interval<T> ratio = intersect(h / R, basic_interval<T>(T(-1), T(1)));
    basic_interval<T> rest = sqr(R) - sqr(h);
    rest = basic_interval<T>(std::max(rest.lo(), T(0)), std::max(rest.hi(), T(0)));
    return sqr(R) * acos(ratio) - h * sqrt(rest);
}

// Can disc i reach side i somewhere in the box? Needs the altitude below the
// radius and the foot of the altitude on the side (both other angles acute).
template <class T>
inline bool sector_may_cross(const triangle_spec<T>& t, const triangle_geometry<T>& g, int i)
{
    basic_interval<T> h = T(2) * g.area / t.sides[i];
    bool foot_may_be_inside = g.cosines[(i + 1) % 3].hi() > 0 && g.cosines[(i + 2) % 3].hi() > 0;
    return h.lo() < radius_value<T>(t.radii[i]).hi() && foot_may_be_inside;
}

// Plain sector sum; refuses boxes where a disc may cross the opposite side.
template <class T>
inline basic_interval<T> sector_coverage(const triangle_spec<T>& t)
{
    triangle_geometry<T> g = triangle_shape(t.sides);
    basic_interval<T> sectors = T(0);
    for (int i = 0; i < 3; ++i) {
        if (sector_may_cross(t, g, i)) throw sector_crosses_opposite_side();
        sectors += g.angles[i] * radius_squared<T>(t.radii[i]) / T(2);
    }
    return sectors;
}

// Area of the triangle inside the three vertex discs. A disc reaches the
// opposite side only if its altitude is below the radius and the foot of the
// altitude lies on the side (both other angles acute); then the circular
// segment beyond the side is removed. The segment shrinks as the altitude
// grows, so its value at the lowest altitude bounds it on the box.
template <class T>
inline basic_interval<T> triangle_coverage(const triangle_spec<T>& t, const triangle_geometry<T>& g)
{
    basic_interval<T> sectors = T(0);
    basic_interval<T> correction = T(0);
    for (int i = 0; i < 3; ++i) {
        basic_interval<T> R = radius_value<T>(t.radii[i]);
        sectors += g.angles[i] * radius_squared<T>(t.radii[i]) / T(2);
        if (sector_may_cross(t, g, i)) {
            basic_interval<T> h = T(2) * g.area / t.sides[i];
            T hl = std::max(h.lo(), T(0));
            if (hl < R.lo()) {
                basic_interval<T> seg = circular_segment(R, basic_interval<T>(hl));
                correction += basic_interval<T>(T(0), std::max(seg.hi(), T(0)));
            } else {
                // altitude within rounding of the radius: the segment is at most ~0
                correction += basic_interval<T>(T(0), circular_segment(R, basic_interval<T>(R.lo())).hi());
            }
        }
    }
    basic_interval<T> cov = sectors - correction;
    return basic_interval<T>(std::max(cov.lo(), T(0)), std::max(cov.hi(), T(0)));
}

template <class T>
inline basic_interval<T> triangle_coverage(const triangle_spec<T>& t)
{
    return triangle_coverage(t, triangle_shape(t.sides));
}

template <class T>
inline basic_interval<T> emptiness(const triangle_spec<T>& t, const basic_interval<T>& x)
{
    triangle_geometry<T> g = triangle_shape(t.sides);
    return delta_max(x) * g.area - triangle_coverage(t, g);
}

// Area and coverage of the tight triangles, cached.
template <class T>
struct tight_constants {
    basic_interval<T> area;
    basic_interval<T> coverage;
    std::array<basic_interval<T>, 3> angles;
};

template <class T>
inline const tight_constants<T>& tight_data(tight_kind k)
{
    static const std::array<tight_constants<T>, 4> table = [] {
        std::array<tight_constants<T>, 4> out;
        for (int i = 0; i < 4; ++i) {
            auto spec = tight_spec<T>(static_cast<tight_kind>(i));
            auto g = triangle_shape(spec.sides);
            out[i] = {g.area, triangle_coverage(spec, g), g.angles};
        }
        // closed forms where they are sharper
        const auto& pi = constants<T>::pi();
        const auto& r2 = constants<T>::r_squared();
        const auto& s3 = constants<T>::sqrt3();
        out[0].area = s3;
        out[0].coverage = pi / T(2);
        out[1].area = T(1);
        out[1].coverage = pi * (T(1) + r2) / T(4);
        out[3].area = r2 * s3;
        out[3].coverage = pi * r2 / T(2);
        return out;
    }();
    return table[static_cast<int>(k)];
}

template <class T>
inline basic_interval<T> tight_emptiness(tight_kind k, const basic_interval<T>& x)
{
    const auto& d = tight_data<T>(k);
    return delta_max(x) * d.area - d.coverage;
}

} // namespace bindisc
