#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace bindisc {

struct interval_error : std::domain_error {
    using std::domain_error::domain_error;
};
struct division_by_zero_interval : interval_error {
    division_by_zero_interval() : interval_error("division by an interval containing zero") {}
};
struct negative_operand : interval_error {
    negative_operand() : interval_error("square root of an interval with negative part") {}
};
struct acos_domain_error : interval_error {
    acos_domain_error() : interval_error("acos operand outside [-1,1] beyond the one-ulp clamp") {}
};

// Directed rounding without touching the FPU mode. Each operation is done
// once in round-to-nearest, the sign of the rounding error is recovered
// exactly with an error-free transform, and only the side that needs it is
// moved by one ulp. Near the underflow range the residuals are no longer
// exact, so both sides are widened instead.
namespace rnd {

template <class T>
inline T down(T x)
{
    return std::nextafter(x, -std::numeric_limits<T>::infinity());
}

template <class T>
inline T up(T x)
{
    return std::nextafter(x, std::numeric_limits<T>::infinity());
}

// libm's nextafter is slow enough to dominate predicate-heavy code
template <>
inline double up(double x)
{
    if (!std::isfinite(x)) return std::nextafter(x, std::numeric_limits<double>::infinity());
    if (x == 0) return std::numeric_limits<double>::denorm_min();
    auto bits = std::bit_cast<std::uint64_t>(x);
    return std::bit_cast<double>(x > 0 ? bits + 1 : bits - 1);
}

template <>
inline double down(double x)
{
    return -up(-x);
}

template <class T>
inline bool tiny(T x)
{
    static const T threshold = std::ldexp(std::numeric_limits<T>::min(), std::numeric_limits<T>::digits + 2);
    return std::fabs(x) < threshold && x != T(0);
}

template <class T>
using bounds = std::pair<T, T>;

template <class T>
inline bounds<T> from_sign(T v, T err)
{
    if (err > 0) return {v, up(v)};
    if (err < 0) return {down(v), v};
    return {v, v};
}

template <class T>
inline bounds<T> overflowed(T v)
{
    constexpr T big = std::numeric_limits<T>::max();
    constexpr T inf = std::numeric_limits<T>::infinity();
    if (v > 0) return {big, inf};
    return {-inf, -big};
}

template <class T>
inline bounds<T> add(T a, T b)
{
    T s = a + b;
    if (std::isinf(s) && std::isfinite(a) && std::isfinite(b)) return overflowed(s);
    if (!std::isfinite(s)) return {s, s};
    T bb = s - a;
    T err = (a - (s - bb)) + (b - bb);
    return from_sign(s, err);
}

template <class T>
inline bounds<T> sub(T a, T b)
{
    return add(a, -b);
}

template <class T>
inline bounds<T> mul(T a, T b)
{
    T p = a * b;
    if (std::isinf(p) && std::isfinite(a) && std::isfinite(b)) return overflowed(p);
    if (!std::isfinite(p)) return {p, p};
    if (a == 0 || b == 0) return {T(0), T(0)};
    if (p == 0 || tiny(p)) return {down(p), up(p)};
    return from_sign(p, std::fma(a, b, -p));
}

template <class T>
inline bounds<T> div(T a, T b)
{
    T q = a / b;
    if (std::isinf(q) && std::isfinite(a) && std::isfinite(b) && b != 0) return overflowed(q);
    if (!std::isfinite(q)) return {q, q};
    if (a == 0) return {T(0), T(0)};
    if (q == 0 || tiny(q) || tiny(a)) return {down(q), up(q)};
    T rem = std::fma(-q, b, a);
    return from_sign(q, b > 0 ? rem : -rem);
}

template <class T>
inline bounds<T> sqrt(T a)
{
    T s = std::sqrt(a);
    if (a == 0 || !std::isfinite(s)) return {s, s};
    if (tiny(a)) return {down(s), up(s)};
    return from_sign(s, std::fma(-s, s, a));
}

template <class T> inline T add_dn(T a, T b) { return add(a, b).first; }
template <class T> inline T add_up(T a, T b) { return add(a, b).second; }
template <class T> inline T sub_dn(T a, T b) { return sub(a, b).first; }
template <class T> inline T sub_up(T a, T b) { return sub(a, b).second; }
template <class T> inline T mul_dn(T a, T b) { return mul(a, b).first; }
template <class T> inline T mul_up(T a, T b) { return mul(a, b).second; }
template <class T> inline T div_dn(T a, T b) { return div(a, b).first; }
template <class T> inline T div_up(T a, T b) { return div(a, b).second; }

} // namespace rnd

template <class T>
class basic_interval {
    static_assert(std::is_floating_point_v<T>);

public:
    using value_type = T;

    constexpr basic_interval() noexcept = default;

    // Scalars convert implicitly: every binary value is its own exact enclosure.
    constexpr basic_interval(T v) noexcept : lo_(v), hi_(v) {}

    template <class I, std::enable_if_t<std::is_integral_v<I>, int> = 0>
    basic_interval(I n) : lo_(static_cast<T>(n)), hi_(static_cast<T>(n))
    {
        if (static_cast<I>(lo_) != n) throw interval_error("integer not exactly representable");
    }

    basic_interval(T lo, T hi) : lo_(lo), hi_(hi)
    {
        if (!(lo <= hi)) throw interval_error("interval with lo > hi or NaN endpoint");
    }

    T lo() const noexcept { return lo_; }
    T hi() const noexcept { return hi_; }

    T mid() const noexcept
    {
        if (std::isinf(lo_) || std::isinf(hi_)) return lo_ / 2 + hi_ / 2;
        T m = lo_ / 2 + hi_ / 2;
        return std::clamp(m, lo_, hi_);
    }
    T width() const noexcept { return rnd::sub_up(hi_, lo_); }
    T mag() const noexcept { return std::max(std::fabs(lo_), std::fabs(hi_)); }
    T mig() const noexcept
    {
        if (lo_ <= 0 && hi_ >= 0) return T(0);
        return std::min(std::fabs(lo_), std::fabs(hi_));
    }

    bool is_point() const noexcept { return lo_ == hi_; }
    bool contains(T v) const noexcept { return lo_ <= v && v <= hi_; }
    bool contains(const basic_interval& o) const noexcept { return lo_ <= o.lo_ && o.hi_ <= hi_; }
    bool contains_zero() const noexcept { return lo_ <= 0 && hi_ >= 0; }
    bool positive() const noexcept { return lo_ > 0; }
    bool negative() const noexcept { return hi_ < 0; }

    std::pair<basic_interval, basic_interval> bisect() const
    {
        T m = mid();
        return {basic_interval(lo_, m), basic_interval(m, hi_)};
    }

    friend basic_interval operator-(const basic_interval& a) { return basic_interval(-a.hi_, -a.lo_); }

    friend basic_interval operator+(const basic_interval& a, const basic_interval& b)
    {
        return basic_interval(rnd::add_dn(a.lo_, b.lo_), rnd::add_up(a.hi_, b.hi_));
    }

    friend basic_interval operator-(const basic_interval& a, const basic_interval& b)
    {
        return basic_interval(rnd::sub_dn(a.lo_, b.hi_), rnd::sub_up(a.hi_, b.lo_));
    }

    friend basic_interval operator*(const basic_interval& a, const basic_interval& b)
    {
        if (a.lo_ >= 0 && b.lo_ >= 0)
            return basic_interval(rnd::mul_dn(a.lo_, b.lo_), rnd::mul_up(a.hi_, b.hi_));
        if (a.hi_ <= 0 && b.hi_ <= 0)
            return basic_interval(rnd::mul_dn(a.hi_, b.hi_), rnd::mul_up(a.lo_, b.lo_));
        if (a.lo_ >= 0 && b.hi_ <= 0)
            return basic_interval(rnd::mul_dn(a.hi_, b.lo_), rnd::mul_up(a.lo_, b.hi_));
        if (a.hi_ <= 0 && b.lo_ >= 0)
            return basic_interval(rnd::mul_dn(a.lo_, b.hi_), rnd::mul_up(a.hi_, b.lo_));
        T lo = std::min({rnd::mul_dn(a.lo_, b.lo_), rnd::mul_dn(a.lo_, b.hi_), rnd::mul_dn(a.hi_, b.lo_),
                         rnd::mul_dn(a.hi_, b.hi_)});
        T hi = std::max({rnd::mul_up(a.lo_, b.lo_), rnd::mul_up(a.lo_, b.hi_), rnd::mul_up(a.hi_, b.lo_),
                         rnd::mul_up(a.hi_, b.hi_)});
        return basic_interval(lo, hi);
    }

    friend basic_interval operator/(const basic_interval& a, const basic_interval& b)
    {
        if (b.contains_zero()) throw division_by_zero_interval();
        T lo = std::min({rnd::div_dn(a.lo_, b.lo_), rnd::div_dn(a.lo_, b.hi_), rnd::div_dn(a.hi_, b.lo_),
                         rnd::div_dn(a.hi_, b.hi_)});
        T hi = std::max({rnd::div_up(a.lo_, b.lo_), rnd::div_up(a.lo_, b.hi_), rnd::div_up(a.hi_, b.lo_),
                         rnd::div_up(a.hi_, b.hi_)});
        return basic_interval(lo, hi);
    }

    basic_interval& operator+=(const basic_interval& o) { return *this = *this + o; }
    basic_interval& operator-=(const basic_interval& o) { return *this = *this - o; }
    basic_interval& operator*=(const basic_interval& o) { return *this = *this * o; }
    basic_interval& operator/=(const basic_interval& o) { return *this = *this / o; }

    friend bool operator==(const basic_interval& a, const basic_interval& b)
    {
        return a.lo_ == b.lo_ && a.hi_ == b.hi_;
    }

    friend std::ostream& operator<<(std::ostream& os, const basic_interval& a)
    {
        auto old = os.precision(std::numeric_limits<T>::max_digits10);
        os << '[' << a.lo_ << ", " << a.hi_ << ']';
        os.precision(old);
        return os;
    }

private:
    T lo_ = 0;
    T hi_ = 0;
};

using interval = basic_interval<double>;
using interval_ld = basic_interval<long double>;

template <class T>
inline basic_interval<T> hull(const basic_interval<T>& a, const basic_interval<T>& b)
{
    return basic_interval<T>(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

// Empty intersections throw: callers only intersect with sets known to meet.
template <class T>
inline basic_interval<T> intersect(const basic_interval<T>& a, const basic_interval<T>& b)
{
    return basic_interval<T>(std::max(a.lo(), b.lo()), std::min(a.hi(), b.hi()));
}

template <class T>
inline bool overlaps(const basic_interval<T>& a, const basic_interval<T>& b)
{
    return a.lo() <= b.hi() && b.lo() <= a.hi();
}

template <class T>
inline basic_interval<T> sqr(const basic_interval<T>& a)
{
    if (a.lo() >= 0) return {rnd::mul_dn(a.lo(), a.lo()), rnd::mul_up(a.hi(), a.hi())};
    if (a.hi() <= 0) return {rnd::mul_dn(a.hi(), a.hi()), rnd::mul_up(a.lo(), a.lo())};
    T m = std::max(-a.lo(), a.hi());
    return {T(0), rnd::mul_up(m, m)};
}

template <class T>
inline basic_interval<T> sqrt(const basic_interval<T>& a)
{
    if (a.lo() < 0) throw negative_operand();
    return {rnd::sqrt(a.lo()).first, rnd::sqrt(a.hi()).second};
}

template <class T>
inline basic_interval<T> abs(const basic_interval<T>& a)
{
    if (a.lo() >= 0) return a;
    if (a.hi() <= 0) return -a;
    return {T(0), std::max(-a.lo(), a.hi())};
}

template <class T>
inline basic_interval<T> min(const basic_interval<T>& a, const basic_interval<T>& b)
{
    return {std::min(a.lo(), b.lo()), std::min(a.hi(), b.hi())};
}

template <class T>
inline basic_interval<T> max(const basic_interval<T>& a, const basic_interval<T>& b)
{
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

template <class T>
inline basic_interval<T> ratio(std::int64_t num, std::int64_t den)
{
    return basic_interval<T>(num) / basic_interval<T>(den);
}

enum class constant { pi, sqrt2, sqrt3, r, r_squared };

namespace detail {

// pi = nearest + residual; only the sign of the residual matters here.
template <class T>
inline basic_interval<T> pi_enclosure()
{
    constexpr int digits = std::numeric_limits<T>::digits;
    static_assert(digits == 53 || digits == 64, "pi enclosure is tabulated for 53 and 64 bit formats");
    const T nearest = static_cast<T>(3.14159265358979323846264338327950288L);
    if constexpr (digits == 53) {
        // pi - 3.141592653589793115997963... = +1.2246e-16
        return {nearest, rnd::up(nearest)};
    } else {
        // pi - 3.14159265358979323851280895940618620... = -5.0166e-20
        return {rnd::down(nearest), nearest};
    }
}

} // namespace detail

template <class T>
struct constants {
    static const basic_interval<T>& pi()
    {
        static const basic_interval<T> v = detail::pi_enclosure<T>();
        return v;
    }
    static const basic_interval<T>& sqrt2()
    {
        static const basic_interval<T> v = sqrt(basic_interval<T>(T(2)));
        return v;
    }
    static const basic_interval<T>& sqrt3()
    {
        static const basic_interval<T> v = sqrt(basic_interval<T>(T(3)));
        return v;
    }
    // Both are exact shifts/scalings of the sqrt2 enclosure (Sterbenz).
    static const basic_interval<T>& r()
    {
        static const basic_interval<T> v = sqrt2() - T(1);
        return v;
    }
    static const basic_interval<T>& r_squared()
    {
        static const basic_interval<T> v = T(3) - T(2) * sqrt2();
        return v;
    }
};

template <class T>
inline basic_interval<T> const_enclosure(constant c)
{
    switch (c) {
    case constant::pi: return constants<T>::pi();
    case constant::sqrt2: return constants<T>::sqrt2();
    case constant::sqrt3: return constants<T>::sqrt3();
    case constant::r: return constants<T>::r();
    case constant::r_squared: return constants<T>::r_squared();
    }
    throw interval_error("unknown constant");
}

namespace detail {

// atan on a sub-interval of [0,1]: three halvings t -> t/(1+sqrt(1+t^2)) bring
// the argument below tan(pi/32), then the alternating series is summed with
// the next term as remainder bound.
template <class T>
inline basic_interval<T> atan_unit(const basic_interval<T>& t)
{
    if (t.hi() == 0) return T(0);
    basic_interval<T> u = t;
    for (int i = 0; i < 3; ++i) u = u / (T(1) + sqrt(T(1) + sqr(u)));
    u = intersect(u, basic_interval<T>(T(0), T(0.1)));
    const basic_interval<T> u2 = sqr(u);
    constexpr int terms = 12;
    basic_interval<T> term = u;
    basic_interval<T> sum = T(0);
    for (int k = 0; k < terms; ++k) {
        basic_interval<T> c = term / basic_interval<T>(2 * k + 1);
        sum = (k % 2 == 0) ? sum + c : sum - c;
        term = term * u2;
    }
    T rem = rnd::div_up(term.hi(), static_cast<T>(2 * terms + 1));
    sum = sum + ((terms % 2 == 0) ? basic_interval<T>(T(0), rem) : basic_interval<T>(-rem, T(0)));
    return T(8) * sum;
}

template <class T>
inline basic_interval<T> atan_point(T x)
{
    if (x < 0) return -atan_point(-x);
    if (x <= 1) return atan_unit(basic_interval<T>(x));
    basic_interval<T> inv = T(1) / basic_interval<T>(x);
    inv = intersect(inv, basic_interval<T>(T(0), T(1)));
    return constants<T>::pi() / T(2) - atan_unit(inv);
}

template <class T>
inline basic_interval<T> acos_point(T v)
{
    if (v < 0) return constants<T>::pi() - acos_point(-v);
    basic_interval<T> t = sqrt((T(1) - basic_interval<T>(v)) / (T(1) + basic_interval<T>(v)));
    t = intersect(t, basic_interval<T>(T(0), T(1)));
    basic_interval<T> res = T(2) * atan_unit(t);
    return intersect(res, basic_interval<T>(T(0), constants<T>::pi().hi()));
}

} // namespace detail

template <class T>
inline basic_interval<T> atan(const basic_interval<T>& a)
{
    return {detail::atan_point(a.lo()).lo(), detail::atan_point(a.hi()).hi()};
}

// Operands at most one ulp outside [-1,1] are clamped; anything further is an error.
template <class T>
inline basic_interval<T> acos(const basic_interval<T>& a)
{
    T lo = a.lo();
    T hi = a.hi();
    if (lo < T(-1)) {
        if (lo < rnd::down(T(-1))) throw acos_domain_error();
        lo = T(-1);
    }
    if (hi > T(1)) {
        if (hi > rnd::up(T(1))) throw acos_domain_error();
        hi = T(1);
    }
    if (lo > T(1) || hi < T(-1)) throw acos_domain_error();
    return {detail::acos_point(std::min(hi, T(1))).lo(), detail::acos_point(std::max(lo, T(-1))).hi()};
}

// For enclosures of cosines over boxes that also contain non-triangles: the
// part outside [-1,1] carries no admissible point and is dropped.
template <class T>
inline basic_interval<T> acos_restricted(const basic_interval<T>& a)
{
    return acos(intersect(a, basic_interval<T>(T(-1), T(1))));
}

// Shortest decimal that reads back to the same binary value.
template <class T>
inline std::string exact_decimal(T v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
inline T parse_exact(const std::string& s)
{
    T v{};
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("not a number: " + s);
    return v;
}

template <class T>
inline constexpr int precision_bits = std::numeric_limits<T>::digits;

} // namespace bindisc
