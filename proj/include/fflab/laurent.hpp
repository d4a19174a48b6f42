#pragma once

#include <climits>
#include <map>
#include <string>
#include <vector>

#include "fflab/errors.hpp"
#include "fflab/fq.hpp"
#include "fflab/poly.hpp"
#include "fflab/rational.hpp"

namespace fflab {

/// Element of F = F_q((T^-1)) known up to a precision exponent.
///
/// Terms of exponent >= prec() are known exactly; terms below are unknown.
/// Exact elements (finite sums, polynomials) have no unknown tail. A value
/// whose known part vanishes but whose tail is unknown is O(T^(prec-1)):
/// its degree cannot be certified and every query for it throws
/// PrecisionInsufficient.
class Laurent {
public:
    static constexpr int kExact = INT_MIN / 4;

    Laurent() = default;
    explicit Laurent(FqPtr f) : f_(std::move(f)) {}

    static Laurent zero(FqPtr f) { return Laurent(std::move(f)); }
    static Laurent one(FqPtr f) { auto o = f->one(); return monomial(std::move(f), 0, o); }
    static Laurent monomial(FqPtr f, int exp, FqElem c);
    /// Sum of c_e T^e over the map, with the given precision (kExact allowed).
    static Laurent from_terms(FqPtr f, const std::map<int, FqElem>& terms, int prec = kExact);
    static Laurent from_poly(const Poly& p);
    /// Expansion of P/Q with all terms of exponent >= prec.
    static Laurent from_rational(const RationalFunction& r, int prec);
    /// Unknown value with |x| < q^prec: O(T^(prec-1)).
    static Laurent big_o(FqPtr f, int prec);

    const FqPtr& field() const { return f_; }
    bool is_exact() const { return prec_ == kExact; }
    int prec() const { return prec_; }
    bool is_exact_zero() const { return coeffs_.empty() && is_exact(); }
    /// True when the degree is known (nonzero known term) or the value is exactly zero.
    bool is_certified() const { return !coeffs_.empty() || is_exact(); }

    /// Degree of the leading term. Throws PrecisionInsufficient when uncertified
    /// and DomainError for exact zero.
    int degree() const;
    /// q-exponent of |x|; -infinity for exact zero.
    AbsExponent abs() const;
    /// Largest exponent that may carry a nonzero coefficient.
    int degree_upper_bound() const;

    /// Coefficient of T^e; throws PrecisionInsufficient if e < prec().
    FqElem coeff(int e) const;
    /// Highest known exponent slot (only meaningful when the known part is nonempty).
    int top() const { return hi_; }
    /// Known terms, exponent -> coefficient, nonzero only.
    std::map<int, FqElem> terms() const;

    Laurent operator+(const Laurent& o) const;
    Laurent operator-(const Laurent& o) const;
    Laurent operator-() const;
    Laurent operator*(const Laurent& o) const;
    Laurent scale(FqElem s) const;
    Laurent shift(int k) const;  ///< multiply by T^k
    /// 1/x with terms down to precExp where the input precision allows it;
    /// the result's precision is max(precExp, prec - 2*deg).
    Laurent invert(int precExp) const;
    /// Drop knowledge below exponent p (no-op if already coarser).
    Laurent with_prec(int p) const;

    /// Terms of exponent >= 0. Requires prec() <= 0.
    Laurent poly_part() const;
    /// Terms of exponent < 0. Requires prec() <= 0.
    Laurent frac_part() const;
    /// Poly part as an element of Lambda; requires prec() <= 0.
    Poly to_poly() const;

    /// Certified |x| < q^e. Throws PrecisionInsufficient when the known
    /// coefficients cannot decide it.
    bool abs_less_than(int e) const;
    /// Certified |x| <= q^e for a rational e (i.e. |x| < q^(floor(e)+1)).
    bool abs_at_most(const Rational& e) const { return abs_less_than(static_cast<int>(e.floor()) + 1); }

    /// Structural equality: same known terms and same precision.
    friend bool operator==(const Laurent& a, const Laurent& b) {
        return a.prec_ == b.prec_ && a.hi_ == b.hi_ && a.coeffs_ == b.coeffs_;
    }

    /// Text form such as "T^3 + T + 1 + O(T^-5)"; O(T^k) means terms of exponent <= k unknown.
    std::string str() const;
    static Laurent parse(const FqPtr& f, const std::string& s);

private:
    void normalize();
    FqPtr f_;
    int hi_ = 0;                 // exponent of coeffs_[0]
    std::vector<FqElem> coeffs_; // coeffs_[k] multiplies T^(hi_-k)
    int prec_ = kExact;
};

/// Sup norm exponent of a vector: max of |x_i|; -infinity for the zero vector.
AbsExponent sup_norm(const std::vector<Laurent>& v);

enum class LaurentOp { Add, Mul, Invert };

/// Arithmetic dispatcher; y is ignored for Invert, which expands to precExp.
Laurent laurent_arith(const Laurent& x, const Laurent& y, LaurentOp op, int precExp = -32);

/// abs_value of a polynomial or a Laurent element.
inline AbsExponent abs_value(const Poly& p) { return p.abs(); }
inline AbsExponent abs_value(const Laurent& x) { return x.abs(); }

}  // namespace fflab
