#pragma once

#include <string>

#include "fflab/laurent.hpp"
#include "fflab/rational.hpp"

namespace fflab {

/// T^v * mantissa with v in (1/N)Z: an element of the ramified extension of F
/// in graded form. Only the monomial-graded part of the extension is modelled.
class ScaledSeries {
public:
    ScaledSeries() = default;
    ScaledSeries(int ram, Rational fracVal, Laurent mantissa);

    static ScaledSeries monomial(const FqPtr& f, int ram, Rational v);
    static ScaledSeries from_laurent(Laurent x, int ram = 1) { return ScaledSeries(ram, Rational(0), std::move(x)); }

    int ram() const { return ram_; }
    const Rational& frac_val() const { return frac_; }
    const Laurent& mantissa() const { return mantissa_; }

    /// |T^v m| = q^(v + deg m).
    AbsExponent abs() const { return AbsExponent(frac_) + mantissa_.abs(); }
    bool is_exact_zero() const { return mantissa_.is_exact_zero(); }

    ScaledSeries operator*(const ScaledSeries& o) const;
    /// Defined only when the grades differ by an integer; DomainError otherwise.
    ScaledSeries operator+(const ScaledSeries& o) const;
    ScaledSeries operator-() const { return ScaledSeries(ram_, frac_, -mantissa_); }
    ScaledSeries operator-(const ScaledSeries& o) const { return *this + (-o); }
    /// Inverse of a monomial element (mantissa a single term).
    ScaledSeries inverse_monomial() const;
    /// Same value written with grade v (v - frac_val must be an integer).
    ScaledSeries rebase(const Rational& v) const;

    std::string str() const;

private:
    int ram_ = 1;
    Rational frac_;
    Laurent mantissa_;
};

/// delta' = T^-(nt+r), eps' = (delta' T^((t+1)(n-1)))^(1/(n+1)), eps = T^(beta t) eps'.
struct FlowScalars {
    ScaledSeries delta_prime;
    ScaledSeries eps_prime;
    ScaledSeries eps;
    int ram = 1;
};

/// r = 0 is the plain flow, r > 0 the kappa = q^-r scaled flow.
/// Throws DomainError unless n >= 2, t >= 0, r >= 0 and 0 < beta < 1/(n+1).
FlowScalars make_flow_scalars(const FqPtr& f, int n, int t, int r, const Rational& beta);

/// Ramification index lcm(n+1, denominator(beta)).
int ramification_index(int n, const Rational& beta);

}  // namespace fflab
