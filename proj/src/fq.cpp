#include "fflab/fq.hpp"

#include <sstream>

#include "fflab/errors.hpp"

namespace fflab {

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

namespace {

using Coeffs = std::vector<std::uint32_t>;

void trim(Coeffs& c) {
    while (!c.empty() && c.back() == 0) c.pop_back();
}

// Remainder of a modulo b over F_p; b nonzero.
Coeffs poly_mod(Coeffs a, Coeffs b, std::uint32_t p) {
    trim(a);
    trim(b);
    std::uint32_t lead = b.back(), lead_inv = 1;
    for (std::uint32_t k = 1; k < p; ++k)
        if (lead * k % p == 1) lead_inv = k;
    while (a.size() >= b.size()) {
        std::uint32_t c = a.back() * lead_inv % p;
        std::size_t shift = a.size() - b.size();
        for (std::size_t i = 0; i < b.size(); ++i) a[i + shift] = (a[i + shift] + (p - c) * b[i]) % p;
        trim(a);
    }
    return a;
}

}  // namespace

bool is_irreducible_mod_p(const Coeffs& monic, std::uint32_t p) {
    Coeffs f = monic;
    trim(f);
    if (f.size() < 2) return false;
    std::size_t deg = f.size() - 1;
    // Every monic polynomial of degree 1..deg/2 as a trial divisor.
    for (std::size_t d = 1; d <= deg / 2; ++d) {
        std::uint64_t count = 1;
        for (std::size_t i = 0; i < d; ++i) count *= p;
        for (std::uint64_t idx = 0; idx < count; ++idx) {
            Coeffs g(d + 1);
            std::uint64_t k = idx;
            for (std::size_t i = 0; i < d; ++i) {
                g[i] = static_cast<std::uint32_t>(k % p);
                k /= p;
            }
            g[d] = 1;
            if (poly_mod(f, g, p).empty()) return false;
        }
    }
    return true;
}

Fq::Fq(const FqConfig& cfg) : cfg_(cfg), p_(cfg.p), a_(cfg.a) {
    if (!is_prime(p_)) throw ConfigError("p = " + std::to_string(p_) + " is not prime");
    if (a_ < 1) throw ConfigError("extension degree must be positive");
    q_ = 1;
    for (std::uint32_t i = 0; i < a_; ++i) q_ *= p_;
    if (q_ > 1024) throw ConfigError("q = " + std::to_string(q_) + " exceeds the desk-scale limit 1024");
    if (a_ > 1) {
        if (cfg_.modulus.size() != a_ + 1 || cfg_.modulus.back() != 1)
            throw ConfigError("modulus must be monic of degree a (lowest coefficient first)");
        for (auto c : cfg_.modulus)
            if (c >= p_) throw ConfigError("modulus coefficients must be reduced mod p");
        if (!is_irreducible_mod_p(cfg_.modulus, p_)) throw ConfigError("modulus is reducible over F_p");
    }
    add_.resize(q_ * q_);
    mul_.resize(q_ * q_);
    neg_.resize(q_);
    inv_.assign(q_, 0);
    for (std::uint32_t x = 0; x < q_; ++x) {
        Coeffs cx = coeffs({x});
        Coeffs nx(a_);
        for (std::uint32_t i = 0; i < a_; ++i) nx[i] = (p_ - cx[i]) % p_;
        neg_[x] = from_coeffs(nx).v;
        for (std::uint32_t y = 0; y < q_; ++y) {
            Coeffs cy = coeffs({y}), s(a_);
            for (std::uint32_t i = 0; i < a_; ++i) s[i] = (cx[i] + cy[i]) % p_;
            add_[x * q_ + y] = from_coeffs(s).v;
            mul_[x * q_ + y] = from_coeffs(mul_poly_mod(cx, cy)).v;
        }
    }
    for (std::uint32_t x = 1; x < q_; ++x)
        for (std::uint32_t y = 1; y < q_; ++y)
            if (mul_[x * q_ + y] == 1) inv_[x] = y;
}

Coeffs Fq::mul_poly_mod(const Coeffs& x, const Coeffs& y) const {
    Coeffs prod(2 * a_, 0);
    for (std::uint32_t i = 0; i < a_; ++i)
        for (std::uint32_t j = 0; j < a_; ++j) prod[i + j] = (prod[i + j] + x[i] * y[j]) % p_;
    if (a_ > 1) prod = poly_mod(prod, cfg_.modulus, p_);
    prod.resize(a_, 0);
    return prod;
}

FqElem Fq::from_int(std::int64_t k) const {
    std::int64_t r = k % static_cast<std::int64_t>(p_);
    if (r < 0) r += p_;
    return {static_cast<std::uint32_t>(r)};
}

FqElem Fq::from_coeffs(const Coeffs& c) const {
    std::uint32_t v = 0, base = 1;
    for (std::uint32_t i = 0; i < a_; ++i) {
        std::uint32_t ci = i < c.size() ? c[i] % p_ : 0;
        v += ci * base;
        base *= p_;
    }
    return {v};
}

Coeffs Fq::coeffs(FqElem x) const {
    Coeffs c(a_);
    std::uint32_t v = x.v;
    for (std::uint32_t i = 0; i < a_; ++i) {
        c[i] = v % p_;
        v /= p_;
    }
    return c;
}

FqElem Fq::inv(FqElem x) const {
    if (x.v == 0) throw DomainError("inverse of zero in F_q");
    return {inv_[x.v]};
}

std::string Fq::format(FqElem x) const {
    if (a_ == 1) return std::to_string(x.v);
    std::ostringstream os;
    os << '[';
    auto c = coeffs(x);
    for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
    os << ']';
    return os.str();
}

FqElem Fq::parse(const std::string& s) const {
    if (!s.empty() && s.front() == '[') {
        if (s.back() != ']') throw ConfigError("malformed F_q element '" + s + "'");
        Coeffs c;
        std::stringstream ss(s.substr(1, s.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            long v = std::stol(item);
            if (v < 0 || static_cast<std::uint32_t>(v) >= p_) throw ConfigError("F_q coefficient out of range in '" + s + "'");
            c.push_back(static_cast<std::uint32_t>(v));
        }
        if (c.size() > a_) throw ConfigError("too many coefficients in '" + s + "'");
        return from_coeffs(c);
    }
    long v;
    try {
        v = std::stol(s);
    } catch (const std::logic_error&) {
        throw ConfigError("malformed F_q element '" + s + "'");
    }
    if (a_ != 1 && (v < 0 || static_cast<std::uint32_t>(v) >= p_))
        throw ConfigError("scalar F_q element must lie in the prime field: '" + s + "'");
    return from_int(v);
}

FqElem fq_arith(const Fq& f, FqElem x, FqElem y, FqOp op) {
    switch (op) {
        case FqOp::Add: return f.add(x, y);
        case FqOp::Mul: return f.mul(x, y);
        case FqOp::Inv: return f.inv(x);
        case FqOp::Neg: return f.neg(x);
    }
    throw DomainError("unknown F_q operation");
}

}  // namespace fflab
