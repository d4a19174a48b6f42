#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "fflab/fq.hpp"
#include "fflab/rational.hpp"

namespace fflab {

/// Element of Lambda = F_q[T]. Coefficients lowest degree first, never with a
/// zero leading coefficient; the zero polynomial has no coefficients.
class Poly {
public:
    Poly() = default;
    explicit Poly(FqPtr f) : f_(std::move(f)) {}
    Poly(FqPtr f, std::vector<FqElem> coeffs);

    static Poly constant(FqPtr f, FqElem c);
    static Poly monomial(FqPtr f, int deg, FqElem c);
    static Poly T(FqPtr f) { auto one = f->one(); return monomial(std::move(f), 1, one); }
    /// The index-th polynomial of degree <= maxDeg in base-q digit order.
    static Poly from_index(FqPtr f, std::uint64_t index, int maxDeg);

    const FqPtr& field() const { return f_; }
    bool is_zero() const { return c_.empty(); }
    /// NEG_INFINITY is represented by -1 together with is_zero().
    int degree() const { return static_cast<int>(c_.size()) - 1; }
    AbsExponent abs() const { return is_zero() ? AbsExponent::neg_infinity() : AbsExponent(degree()); }
    FqElem coeff(int k) const;
    FqElem lead() const { return c_.back(); }
    const std::vector<FqElem>& coeffs() const { return c_; }
    bool is_unit() const { return degree() == 0; }

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Poly& o) const;
    Poly scale(FqElem s) const;
    Poly shift(int k) const;  ///< multiply by T^k, k >= 0
    /// Euclidean division; throws DomainError when dividing by zero.
    std::pair<Poly, Poly> divmod(const Poly& d) const;
    Poly operator%(const Poly& d) const { return divmod(d).second; }
    Poly operator/(const Poly& d) const { return divmod(d).first; }
    Poly monic() const;

    friend bool operator==(const Poly& a, const Poly& b) { return a.c_ == b.c_; }
    /// Total order: by degree, then coefficients from the top.
    friend bool operator<(const Poly& a, const Poly& b);

    std::string str() const;

private:
    void trim();
    FqPtr f_;
    std::vector<FqElem> c_;
};

/// Monic gcd (zero if both are zero).
Poly gcd(const Poly& a, const Poly& b);

/// Number of polynomials of degree <= maxDeg (including zero): q^(maxDeg+1).
std::uint64_t poly_count(std::uint32_t q, int maxDeg);

/// Calls fn on every polynomial of degree <= maxDeg (zero included).
void for_each_poly(const FqPtr& f, int maxDeg, const std::function<void(const Poly&)>& fn);
/// Calls fn on every monic polynomial of degree 0..maxDeg.
void for_each_monic(const FqPtr& f, int maxDeg, const std::function<void(const Poly&)>& fn);

/// Exact element P/Q of F_q(T) inside F. Denominator nonzero, monic, reduced.
class RationalFunction {
public:
    RationalFunction(Poly num, Poly den);
    const Poly& num() const { return num_; }
    const Poly& den() const { return den_; }
    /// min_{p in Lambda} |p + this*m|, computed exactly as |(num*m mod den)/den|.
    AbsExponent frac_abs_times(const Poly& m) const;

private:
    Poly num_, den_;
};

}  // namespace fflab
