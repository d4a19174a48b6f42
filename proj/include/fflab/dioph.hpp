#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fflab/haar.hpp"
#include "fflab/poly.hpp"
#include "fflab/posreal.hpp"

namespace fflab {

/// psi(q^t) = q^s(t), given either by a table or by s(t) = -c t + b.
class ApproxFunction {
public:
    static ApproxFunction linear(int c, int b = 0);
    static ApproxFunction table(std::vector<int> s);
    /// "s(t) = -c*t + b" (also "-c*t", "-c*t - b") or lines "t<TAB>s".
    static ApproxFunction parse(const std::string& text);

    /// Throws DomainError for t outside a table's range.
    int s(int t) const;
    bool is_linear() const { return linear_; }
    int slope() const { return c_; }
    int offset() const { return b_; }
    /// Largest t with a defined value (INT_MAX for the linear form).
    int max_t() const;

    bool nonincreasing_up_to(int T) const;
    /// s(t) <= -n t for t <= T.
    bool quantitative_ok(int n, int T) const;
    /// First t0 with s(t) < -n t for all tested t >= t0 up to T (T+1 if none).
    int regime_start(int n, int T) const;
    std::string str() const;

private:
    bool linear_ = true;
    int c_ = 0, b_ = 0;
    std::vector<int> table_;
};

/// The hyperplane {(x, alpha_0 + sum alpha_i x_i)} in F^n, alpha = (alpha_0..alpha_{n-1}).
struct HyperplaneData {
    FqPtr field;
    int n = 2;
    std::vector<Laurent> alpha;
    /// Exact rational forms where known (used for exact cancellation).
    std::vector<std::optional<RationalFunction>> exact;

    static HyperplaneData from_laurent(FqPtr f, std::vector<Laurent> alpha);
    static HyperplaneData from_rational(FqPtr f, const std::vector<RationalFunction>& alpha, int precExp);

    /// alpha_0 + sum alpha_i x_i.
    Laurent eval(const Point& x) const;
    /// Coarsest precision among the alpha_i.
    int prec() const;
};

/// sum_{k>=0} T^(-2^k) with every term of exponent >= precExp. Over F_2 it solves
/// L^2 + L + 1/T = 0, so it is a badly approximable quadratic irrational.
Laurent lacunary_series(const FqPtr& f, int precExp);

/// Calls fn on every q in Lambda^n with ||q|| = q^t, in index order.
void shell_enumerate(const FqPtr& f, int n, int t, const std::function<void(const std::vector<Poly>&)>& fn);
/// q^(nt)(q^n - 1), or q^n - 1 at t = 0.
BigInt shell_size(std::uint32_t q, int n, int t);

/// min_{p in Lambda} |p + alpha q'| = |negative-degree part of alpha q'|.
AbsExponent fractional_part_reduction(const Laurent& alpha, const Poly& qprime);

enum class DiophVerdict { Holds, Sporadic, Structural };
std::string verdict_str(DiophVerdict v);

struct DioCondReport {
    Rational delta;
    int degree_bound = 0;
    std::vector<Poly> violations;          ///< all monic violators, deg 1..D and constants
    std::vector<Poly> structural_moduli;   ///< Q whose monic multiples up to D all violate
    std::vector<Poly> precision_failures;  ///< q' that could not be decided
    int checked = 0;
    int constant_violations = 0;  ///< constants always violate: |frac| < 1 = |q'|^-(n-delta)
    DiophVerdict verdict = DiophVerdict::Holds;
};

/// Tests max_i |p_i + alpha_i q'| > |q'|^-(n-delta) for every monic q' with deg <= D
/// (unit multiples give identical absolute values). Holds: only constants violate;
/// Structural: some Q has all (at least two) monic multiples violating.
DioCondReport check_dioph_condition(const HyperplaneData& h, const Rational& delta, int D);

/// Scalar (x, x~ . a) . q as an affine form in x: beta_i = q_i + alpha_i q_n, y = alpha_0 q_n.
AffineForm approximation_form(const std::vector<Poly>& qvec, const HyperplaneData& h);
/// x in L(q, kappa): dist((x, x~.a).q, Lambda) < kappa psi(||q||), kappa = q^kappaExp.
AffinePredicate approximation_predicate(const std::vector<Poly>& qvec, const HyperplaneData& h,
                                        const ApproxFunction& psi, int kappaExp);
bool membership_L(const Point& x, const std::vector<Poly>& qvec, const HyperplaneData& h,
                  const ApproxFunction& psi, int kappaExp);

/// Small gradient: |q_i + alpha_i q_n| < 1 for every 1 <= i <= n-1.
bool small_gradient(const std::vector<Poly>& qvec, const HyperplaneData& h);

struct SplitResult {
    bool small = false;
    bool large = false;
    std::optional<std::vector<Poly>> small_witness;
};
SplitResult split_Lt(const Point& x, int t, const HyperplaneData& h, const ApproxFunction& psi, int kappaExp);

enum class GradientClass { Small, Large, Any };
/// Exact lambda of the union of L(q, kappa) over the shell ||q|| = q^t restricted to a gradient class.
ExactMeasure lambda_Lt(int t, GradientClass cls, const HyperplaneData& h, const ApproxFunction& psi,
                       int kappaExp, const UltraBall& U);
/// Exact lambda of the union of L(q, kappa) over 0 < ||q|| <= q^T.
ExactMeasure lambda_union_L(int T, const HyperplaneData& h, const ApproxFunction& psi, int kappaExp,
                            const UltraBall& U);

struct Prop31Result {
    ExactMeasure measured;
    ExactMeasure bound;
    int nonempty_strips = 0;
    BigInt strip_count_bound;  ///< q ||beta|| r(U)
    bool pass = false;
};
/// Measure of {x in U : dist((x, x~.a).q, Lambda) < q^-m} by summing its strips,
/// against q lambda(U) q^-m. Throws DomainError unless q has a large gradient.
Prop31Result verify_prop31(const std::vector<Poly>& qvec, const HyperplaneData& h, int m, const UltraBall& U);

/// sum_{t=0}^{Tmax} psi(q^t) q^(nt)(q^n - 1).
BigRational sum_psi_partial(const ApproxFunction& psi, std::uint32_t q, int n, int Tmax);
/// The same sum taken vector by vector over the shells.
BigRational sum_psi_direct(const FqPtr& f, const ApproxFunction& psi, int n, int Tmax);
/// Closed form of the full series for a linear psi with slope c > n:
/// q^b (q^n - 1) / (1 - q^(n-c)). Throws DomainError otherwise.
BigRational sum_psi_total(const ApproxFunction& psi, std::uint32_t q, int n);

struct KappaResult {
    int r = 0;  ///< kappa = q^-r
    BigRational term2;
    CertifiedReal term3 = CertifiedReal::exact(1);
    int binding = 1;  ///< which of the three terms is smallest
};
/// Smallest r >= 0 with q^-r < min{1, xi/(2 q sumPsi), (xi/(2 K0 K1))^(n^2-1)}.
KappaResult kappa_bound(const Rational& xi, int n, std::uint32_t q, const BigRational& sumPsi,
                        const CertifiedReal& K0, const CertifiedReal& K1);

}  // namespace fflab
