#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <functional>
#include <map>
#include <string>
#include <utility>

#include "fflab/rational.hpp"

namespace fflab {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

BigRational to_big(const Rational& r);
std::string big_str(const BigRational& r);

/// Positive real of the form prod_b b^(e_b) with integer bases b >= 2 and
/// rational exponents. Closed under products, quotients and rational powers;
/// all comparisons are decided exactly in integer arithmetic.
class PosReal {
public:
    PosReal() = default;  ///< the number 1

    static PosReal from_rational(const BigRational& r);
    static PosReal from_int(std::int64_t k) { return from_rational(BigRational(k)); }
    /// q^e.
    static PosReal q_pow(std::uint64_t q, const Rational& e);

    PosReal operator*(const PosReal& o) const;
    PosReal operator/(const PosReal& o) const;
    PosReal pow(const Rational& e) const;

    /// Returns (N, D, L) with value = (N/D)^(1/L).
    struct RootForm {
        BigInt num, den;
        std::int64_t root;
    };
    RootForm root_form() const;

    /// Rational lower and upper bounds whose gap is at most 2^-bits (times the
    /// integer part); degenerate when the value is a dyadic rational at that resolution.
    std::pair<BigRational, BigRational> bracket(int bits) const;
    double to_double() const;

    friend std::strong_ordering compare(const PosReal& a, const PosReal& b);
    friend std::strong_ordering compare(const PosReal& a, const BigRational& b);
    friend bool operator<(const PosReal& a, const PosReal& b) { return compare(a, b) < 0; }
    friend bool operator<=(const PosReal& a, const PosReal& b) { return compare(a, b) <= 0; }
    friend bool operator==(const PosReal& a, const PosReal& b) { return compare(a, b) == 0; }

    /// Rational value when every exponent is an integer.
    bool is_rational() const;
    BigRational to_rational() const;

    const std::map<BigInt, Rational>& factors() const { return f_; }
    std::string str() const;

private:
    void add_factor(const BigInt& base, const Rational& e);
    std::map<BigInt, Rational> f_;
};

PosReal min(const PosReal& a, const PosReal& b);
PosReal max(const PosReal& a, const PosReal& b);

/// Integer floor of the L-th root of a nonnegative integer.
BigInt iroot(const BigInt& x, std::int64_t L);

/// A positive real given by certified rational enclosures at any requested
/// resolution. Used for the few constants that leave the monomial group,
/// such as 1/(1 - q^-c).
class CertifiedReal {
public:
    using Enclosure = std::pair<BigRational, BigRational>;
    using Source = std::function<Enclosure(int bits)>;

    explicit CertifiedReal(Source s) : src_(std::move(s)) {}
    static CertifiedReal exact(const BigRational& r);
    static CertifiedReal from(const PosReal& x);

    Enclosure enclose(int bits) const { return src_(bits); }

    friend CertifiedReal operator*(const CertifiedReal& a, const CertifiedReal& b);
    friend CertifiedReal operator/(const CertifiedReal& a, const CertifiedReal& b);
    friend CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b);
    /// Requires a > b; the enclosure lower bound is clamped at 0 only while unresolved.
    friend CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b);
    CertifiedReal pow(int k) const;

    double approx() const;

private:
    Source src_;
};

/// Decides a < b by refining enclosures; throws PrecisionInsufficient if
/// undecided at maxBits (which only happens for equal irrational values).
bool certified_less(const CertifiedReal& a, const CertifiedReal& b, int maxBits = 8192);

}  // namespace fflab
