#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

#include "interval.hpp"

namespace bindisc {

struct word_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct empty_window : word_error {
    empty_window() : word_error("empty window") {}
};

// u(alpha): u_k = 0 iff k*alpha mod 1 lies in [0, 1-alpha).
// alpha is either an exact rational p/q or an enclosure of a real number.
class standard_word {
public:
    static standard_word rational(std::int64_t p, std::int64_t q)
    {
        if (q <= 0 || p < 0 || p >= q) throw word_error("alpha must be a rational in [0,1)");
        std::int64_t g = std::gcd(p, q);
        standard_word w;
        w.exact_ = true;
        w.p_ = p / g;
        w.q_ = q / g;
        return w;
    }

    static standard_word real(const interval_ld& alpha)
    {
        if (alpha.lo() < 0 || alpha.hi() >= 1) throw word_error("alpha must lie in [0,1)");
        standard_word w;
        w.exact_ = false;
        w.alpha_ = alpha;
        return w;
    }

    static standard_word sqrt2_minus_1() { return real(constants<long double>::r()); }

    // A double is a dyadic rational; use exact integer arithmetic when the
    // denominator fits, otherwise a point enclosure.
    static standard_word from_double(double a)
    {
        if (!(a >= 0 && a < 1)) throw word_error("alpha must lie in [0,1)");
        if (a == 0) return rational(0, 1);
        int e = 0;
        double f = std::frexp(a, &e);
        auto m = static_cast<std::int64_t>(std::ldexp(f, 53));
        int shift = 53 - e;
        while ((m & 1) == 0 && shift > 0) {
            m >>= 1;
            --shift;
        }
        if (shift <= 62) return rational(m, std::int64_t(1) << shift);
        return real(interval_ld(static_cast<long double>(a)));
    }

    bool is_exact() const { return exact_; }
    std::int64_t numerator() const { return p_; }
    std::int64_t denominator() const { return q_; }
    interval_ld alpha() const
    {
        if (exact_) return ratio<long double>(p_, q_);
        return alpha_;
    }

    int letter(std::int64_t k) const
    {
        if (exact_) {
            __int128 km = static_cast<__int128>(k) % q_;
            if (km < 0) km += q_;
            __int128 frac = (km * p_) % q_;
            return frac < (q_ - p_) ? 0 : 1;
        }
        // u_k = floor((k+1) alpha) - floor(k alpha); for irrational alpha neither
        // product is an integer unless it is exactly zero.
        return static_cast<int>(floor_of(k + 1) - floor_of(k));
    }

private:
    standard_word() = default;

    std::int64_t floor_of(std::int64_t m) const
    {
        interval_ld ma = interval_ld(static_cast<long double>(m)) * alpha_;
        long double fl = std::floor(ma.lo());
        if (std::floor(ma.hi()) != fl) throw word_error("m*alpha straddles an integer at m=" + std::to_string(m));
        return static_cast<std::int64_t>(fl);
    }

    bool exact_ = true;
    std::int64_t p_ = 0;
    std::int64_t q_ = 1;
    interval_ld alpha_;
};

inline int sturmian_letter(const standard_word& w, std::int64_t k)
{
    return w.letter(k);
}

// Block k >= 0 covers [k(k+1)/2, (k+1)(k+2)/2); block -m (m >= 1) covers the
// m+1 positions immediately left of block -m+1, i.e. [-m(m+3)/2, -(m-1)(m+2)/2 - 1].
inline std::int64_t hat_source_index(std::int64_t p)
{
    if (p >= 0) {
        auto k = static_cast<std::int64_t>((std::sqrt(8.0L * p + 1) - 1) / 2);
        while (k * (k + 1) / 2 > p) --k;
        while ((k + 1) * (k + 2) / 2 <= p) ++k;
        return k;
    }
    std::int64_t q = -p;
    auto m = static_cast<std::int64_t>((std::sqrt(8.0L * q + 9) - 3) / 2);
    if (m < 1) m = 1;
    while (m > 1 && (m - 1) * (m + 2) / 2 >= q) --m;
    while (m * (m + 3) / 2 < q) ++m;
    return -m;
}

class expanded_word {
public:
    explicit expanded_word(standard_word base) : base_(std::move(base)) {}
    const standard_word& base() const { return base_; }
    int letter(std::int64_t p) const { return base_.letter(hat_source_index(p)); }

private:
    standard_word base_;
};

inline int hat_letter(const expanded_word& w, std::int64_t p)
{
    return w.letter(p);
}

struct letter_count {
    std::int64_t zeros = 0;
    std::int64_t length = 0;
    double value() const { return static_cast<double>(zeros) / static_cast<double>(length); }
    // reduced fraction zeros/length
    std::pair<std::int64_t, std::int64_t> reduced() const
    {
        std::int64_t g = std::gcd(zeros, length);
        return {zeros / g, length / g};
    }
};

// Exact proportion of letter 0 over positions [first, last).
template <class Word>
letter_count letter_frequency(const Word& w, std::int64_t first, std::int64_t last)
{
    if (last <= first) throw empty_window();
    letter_count c;
    c.length = last - first;
    for (std::int64_t i = first; i < last; ++i) c.zeros += (w.letter(i) == 0);
    return c;
}

template <class Word>
std::string word_window(const Word& w, std::int64_t first, std::int64_t last)
{
    std::string s;
    for (std::int64_t i = first; i < last; ++i) s.push_back(static_cast<char>('0' + w.letter(i)));
    return s;
}

} // namespace bindisc
