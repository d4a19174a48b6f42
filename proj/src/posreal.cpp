#include "fflab/posreal.hpp"

#include <cmath>
#include <sstream>

#include "fflab/errors.hpp"

namespace fflab {

using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

BigRational to_big(const Rational& r) { return BigRational(BigInt(r.num()), BigInt(r.den())); }

std::string big_str(const BigRational& r) {
    std::ostringstream os;
    os << numerator(r);
    if (denominator(r) != 1) os << "/" << denominator(r);
    return os.str();
}

namespace {

BigInt ipow(BigInt b, std::int64_t e) {
    BigInt r = 1;
    while (e > 0) {
        if (e & 1) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

std::strong_ordering cmp(const BigInt& a, const BigInt& b) {
    if (a < b) return std::strong_ordering::less;
    if (a > b) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

}  // namespace

void PosReal::add_factor(const BigInt& base, const Rational& e) {
    if (base == 1 || e.is_zero()) return;
    auto it = f_.find(base);
    if (it == f_.end()) {
        f_.emplace(base, e);
        return;
    }
    it->second += e;
    if (it->second.is_zero()) f_.erase(it);
}

PosReal PosReal::from_rational(const BigRational& r) {
    if (r <= 0) throw DomainError("PosReal needs a positive value, got " + big_str(r));
    PosReal x;
    auto split = [&x](BigInt v, std::int64_t sign) {
        for (std::uint32_t p = 2; p < 1000 && v > 1; ++p) {
            std::int64_t e = 0;
            while (v % p == 0) {
                v /= p;
                ++e;
            }
            if (e) x.add_factor(BigInt(p), Rational(sign * e));
        }
        if (v > 1) x.add_factor(v, Rational(sign));
    };
    split(numerator(r), 1);
    split(denominator(r), -1);
    return x;
}

PosReal PosReal::q_pow(std::uint64_t q, const Rational& e) {
    return from_rational(BigRational(BigInt(q))).pow(e);
}

PosReal PosReal::operator*(const PosReal& o) const {
    PosReal r = *this;
    for (const auto& [b, e] : o.f_) r.add_factor(b, e);
    return r;
}

PosReal PosReal::operator/(const PosReal& o) const {
    PosReal r = *this;
    for (const auto& [b, e] : o.f_) r.add_factor(b, -e);
    return r;
}

PosReal PosReal::pow(const Rational& e) const {
    PosReal r;
    if (e.is_zero()) return r;
    for (const auto& [b, x] : f_) r.add_factor(b, x * e);
    return r;
}

PosReal::RootForm PosReal::root_form() const {
    std::int64_t L = 1;
    for (const auto& [b, e] : f_) L = std::lcm(L, e.den());
    RootForm rf{1, 1, L};
    for (const auto& [b, e] : f_) {
        Rational k = e * Rational(L);
        if (k.num() > 0)
            rf.num *= ipow(b, k.num());
        else
            rf.den *= ipow(b, -k.num());
    }
    return rf;
}

BigInt iroot(const BigInt& x, std::int64_t L) {
    if (x < 0) throw DomainError("iroot of a negative integer");
    if (L == 1 || x < 2) return x;
    std::size_t bits = boost::multiprecision::msb(x) + 1;
    BigInt lo = 0, hi = BigInt(1) << (bits / static_cast<std::size_t>(L) + 1);
    while (hi - lo > 1) {
        BigInt mid = (lo + hi) >> 1;
        if (ipow(mid, L) <= x)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::pair<BigRational, BigRational> PosReal::bracket(int bits) const {
    auto rf = root_form();
    BigInt scaled = rf.num << static_cast<unsigned>(bits * rf.root);
    BigInt k = iroot(scaled / rf.den, rf.root);
    BigInt scale = BigInt(1) << static_cast<unsigned>(bits);
    BigRational lo(k, scale);
    if (ipow(k, rf.root) * rf.den == scaled) return {lo, lo};
    return {lo, BigRational(k + 1, scale)};
}

double PosReal::to_double() const {
    double r = 1.0;
    for (const auto& [b, e] : f_) r *= std::pow(b.convert_to<double>(), e.to_double());
    return r;
}

std::strong_ordering compare(const PosReal& a, const PosReal& b) {
    auto rf = (a / b).root_form();
    return cmp(rf.num, rf.den);
}

std::strong_ordering compare(const PosReal& a, const BigRational& b) {
    if (b <= 0) return std::strong_ordering::greater;
    auto rf = a.root_form();
    // (N/D)^(1/L) vs n/d  <=>  N d^L vs D n^L
    return cmp(rf.num * ipow(denominator(b), rf.root), rf.den * ipow(numerator(b), rf.root));
}

bool PosReal::is_rational() const {
    for (const auto& [b, e] : f_)
        if (!e.is_integer()) return false;
    return true;
}

BigRational PosReal::to_rational() const {
    if (!is_rational()) throw DomainError("PosReal " + str() + " is not rational");
    auto rf = root_form();
    return BigRational(rf.num, rf.den);
}

std::string PosReal::str() const {
    if (f_.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (const auto& [b, e] : f_) {
        if (!first) os << "*";
        first = false;
        os << b;
        if (e != Rational(1)) os << "^(" << e.str() << ")";
    }
    return os.str();
}

PosReal min(const PosReal& a, const PosReal& b) { return b < a ? b : a; }
PosReal max(const PosReal& a, const PosReal& b) { return a < b ? b : a; }

CertifiedReal CertifiedReal::exact(const BigRational& r) {
    return CertifiedReal([r](int) { return Enclosure{r, r}; });
}

CertifiedReal CertifiedReal::from(const PosReal& x) {
    return CertifiedReal([x](int bits) { return x.bracket(bits); });
}

CertifiedReal operator*(const CertifiedReal& a, const CertifiedReal& b) {
    return CertifiedReal([a, b](int bits) {
        auto [al, ah] = a.enclose(bits);
        auto [bl, bh] = b.enclose(bits);
        return CertifiedReal::Enclosure{al * bl, ah * bh};
    });
}

CertifiedReal operator/(const CertifiedReal& a, const CertifiedReal& b) {
    return CertifiedReal([a, b](int bits) {
        auto [al, ah] = a.enclose(bits);
        auto [bl, bh] = b.enclose(bits);
        if (bl <= 0) throw PrecisionInsufficient("divisor enclosure contains zero");
        return CertifiedReal::Enclosure{al / bh, ah / bl};
    });
}

CertifiedReal operator+(const CertifiedReal& a, const CertifiedReal& b) {
    return CertifiedReal([a, b](int bits) {
        auto [al, ah] = a.enclose(bits);
        auto [bl, bh] = b.enclose(bits);
        return CertifiedReal::Enclosure{al + bl, ah + bh};
    });
}

CertifiedReal operator-(const CertifiedReal& a, const CertifiedReal& b) {
    return CertifiedReal([a, b](int bits) {
        auto [al, ah] = a.enclose(bits);
        auto [bl, bh] = b.enclose(bits);
        BigRational lo = al - bh;
        if (lo < 0) lo = 0;
        return CertifiedReal::Enclosure{lo, ah - bl};
    });
}

CertifiedReal CertifiedReal::pow(int k) const {
    if (k < 0) return CertifiedReal::exact(1) / pow(-k);
    CertifiedReal self = *this;
    return CertifiedReal([self, k](int bits) {
        auto [lo, hi] = self.enclose(bits);
        BigRational l = 1, h = 1;
        for (int i = 0; i < k; ++i) {
            l *= lo;
            h *= hi;
        }
        return Enclosure{l, h};
    });
}

double CertifiedReal::approx() const {
    auto [lo, hi] = enclose(64);
    return ((lo + hi) / 2).convert_to<double>();
}

bool certified_less(const CertifiedReal& a, const CertifiedReal& b, int maxBits) {
    for (int bits = 64;; bits *= 2) {
        auto [al, ah] = a.enclose(bits);
        auto [bl, bh] = b.enclose(bits);
        if (ah < bl) return true;
        if (al >= bh) return false;
        if (bits >= maxBits) break;
    }
    throw PrecisionInsufficient("comparison undecided at " + std::to_string(maxBits) + " bits");
}

}  // namespace fflab
