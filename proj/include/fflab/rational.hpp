#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fflab {

/// Small exact rational used for exponents (valuations live in (1/N)Z).
/// Always normalized: gcd(num, den) == 1 and den > 0.
class Rational {
public:
    constexpr Rational() = default;
    constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT(implicit)
    Rational(std::int64_t n, std::int64_t d) : num_(n), den_(d) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    bool is_integer() const { return den_ == 1; }
    bool is_zero() const { return num_ == 0; }

    std::int64_t floor() const {
        std::int64_t q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }
    std::int64_t ceil() const { return -Rational(-num_, den_).floor(); }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                         static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from_wide(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
        return from_wide(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
    }
    Rational operator-() const {
        Rational r;
        r.num_ = -num_;
        r.den_ = den_;
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }

    friend bool operator==(const Rational& a, const Rational& b) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        __int128 l = static_cast<__int128>(a.num_) * b.den_;
        __int128 r = static_cast<__int128>(b.num_) * a.den_;
        if (l < r) return std::strong_ordering::less;
        if (l > r) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

    /// Parses "a", "-a", "a/b".
    static Rational parse(const std::string& s);

private:
    static Rational from_wide(__int128 n, __int128 d) {
        if (d == 0) throw std::domain_error("Rational: zero denominator");
        if (d < 0) {
            n = -n;
            d = -d;
        }
        __int128 a = n < 0 ? -n : n, b = d;
        while (b != 0) {
            __int128 t = a % b;
            a = b;
            b = t;
        }
        if (a > 1) {
            n /= a;
            d /= a;
        }
        constexpr __int128 lim = static_cast<__int128>(INT64_MAX);
        if (n > lim || n < -lim || d > lim) throw std::overflow_error("Rational: overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }
    void normalize() { *this = from_wide(num_, den_); }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

inline Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(std::stoll(s));
        return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
    } catch (const std::logic_error&) {
        throw std::invalid_argument("cannot parse rational '" + s + "'");
    }
}

/// Exponent e of an absolute value q^e, or -infinity for |0| = 0.
class AbsExponent {
public:
    AbsExponent() : neg_inf_(true) {}
    AbsExponent(Rational e) : neg_inf_(false), e_(e) {}  // NOLINT(implicit)
    AbsExponent(std::int64_t e) : neg_inf_(false), e_(e) {}  // NOLINT(implicit)

    static AbsExponent neg_infinity() { return AbsExponent(); }

    bool is_neg_infinity() const { return neg_inf_; }
    /// Finite exponent; throws for |0|.
    const Rational& value() const {
        if (neg_inf_) throw std::logic_error("AbsExponent: value of -infinity");
        return e_;
    }

    /// Exponent of a product.
    friend AbsExponent operator+(const AbsExponent& a, const AbsExponent& b) {
        if (a.neg_inf_ || b.neg_inf_) return {};
        return AbsExponent(a.e_ + b.e_);
    }
    friend AbsExponent operator-(const AbsExponent& a, const Rational& b) {
        if (a.neg_inf_) return {};
        return AbsExponent(a.e_ - b);
    }

    friend bool operator==(const AbsExponent& a, const AbsExponent& b) {
        if (a.neg_inf_ || b.neg_inf_) return a.neg_inf_ == b.neg_inf_;
        return a.e_ == b.e_;
    }
    friend std::strong_ordering operator<=>(const AbsExponent& a, const AbsExponent& b) {
        if (a.neg_inf_ && b.neg_inf_) return std::strong_ordering::equal;
        if (a.neg_inf_) return std::strong_ordering::less;
        if (b.neg_inf_) return std::strong_ordering::greater;
        return a.e_ <=> b.e_;
    }

    std::string str() const { return neg_inf_ ? std::string("-inf") : e_.str(); }
    friend std::ostream& operator<<(std::ostream& os, const AbsExponent& a) { return os << a.str(); }

private:
    bool neg_inf_;
    Rational e_;
};

inline AbsExponent max(const AbsExponent& a, const AbsExponent& b) { return a < b ? b : a; }
inline AbsExponent min(const AbsExponent& a, const AbsExponent& b) { return a < b ? a : b; }

inline std::int64_t lcm64(std::int64_t a, std::int64_t b) { return std::lcm(a, b); }

}  // namespace fflab
