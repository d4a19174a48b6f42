#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fflab/exterior.hpp"
#include "fflab/haar.hpp"
#include "fflab/posreal.hpp"

namespace fflab {

/// Polynomial in d variables over F, stored as exponent vector -> coefficient.
class TestFunction {
public:
    using Monomial = std::vector<int>;

    TestFunction(FqPtr f, int d) : f_(std::move(f)), d_(d) {}
    static TestFunction affine(const FqPtr& f, const AffineForm& a);
    static TestFunction constant(const FqPtr& f, int d, const Laurent& c);
    /// x_i (0-based).
    static TestFunction variable(const FqPtr& f, int d, int i);

    const FqPtr& field() const { return f_; }
    int dim() const { return d_; }
    const std::map<Monomial, Laurent>& terms() const { return terms_; }
    /// Total degree; -1 for the zero polynomial.
    int degree() const;
    bool is_affine() const { return degree() <= 1; }
    AffineForm as_affine() const;

    void add_term(const Monomial& m, const Laurent& c);
    TestFunction operator+(const TestFunction& o) const;
    TestFunction operator*(const TestFunction& o) const;
    TestFunction scale(const Laurent& c) const;

    Laurent eval(const Point& x) const;
    /// Upper bound (exponent) for |f(z + y) - f(z)| over |y| <= q^-m and |z| <= q^R.
    AbsExponent variation_exp(int m, int R) const;

    std::string str() const;

private:
    FqPtr f_;
    int d_;
    std::map<Monomial, Laurent> terms_;
};

/// sup over B of |f|. Closed form for affine f; otherwise a grid maximum at the
/// first resolution where the variation bound falls below the maximum found.
AbsExponent norm_on_ball(const TestFunction& f, const UltraBall& b, std::uint64_t cellBudget = 1u << 20);

std::string ball_str(const UltraBall& b);

struct GoodFailure {
    std::string ball;
    int eps_exp = 0;   ///< epsilon decreasing to q^eps_exp
    std::string lhs;
    std::string rhs;
};

struct GoodCertificate {
    PosReal C;
    Rational alpha;
    int m = 0;
    int J = 0;
    int eps_top = 0;
    std::optional<PosReal> worst_ratio;   ///< none when every left side is 0
    std::vector<GoodFailure> failures;    ///< the first few
    std::uint64_t failure_count = 0;
    std::uint64_t balls = 0;
    std::uint64_t checks = 0;
    std::uint64_t undecided = 0;          ///< (ball, eps) pairs left open by precision
    bool pass() const { return failure_count == 0 && undecided == 0; }
};

struct GoodOptions {
    int eps_top = 0;
    int jobs = 1;
    /// Force the cell engine even for a single affine function.
    bool force_grid = false;
    std::uint64_t cell_budget = 1u << 20;
    std::size_t max_failures_kept = 32;
};

/// For every ball B in U of radius >= q^-m (the cells of every intermediate grid)
/// and every j in 0..J with k = eps_top - j, compares
///   lambda({x in B : |F(x)| <= q^k})  with  C (q^k / ||F||_B)^alpha lambda(B),
/// F = max_i |f_i|. The left side is the measure of {|F| < eps} for every
/// eps in (q^k, q^(k+1)], and the right side is its infimum over that range, so
/// the J+1 bands cover every eps in (q^(eps_top-J), q^(eps_top+1)].
GoodCertificate check_good(const std::vector<TestFunction>& fs, const UltraBall& U, const PosReal& C,
                           const Rational& alpha, int m, int J, const GoodOptions& opt = {});
inline GoodCertificate check_good(const TestFunction& f, const UltraBall& U, const PosReal& C,
                                  const Rational& alpha, int m, int J, const GoodOptions& opt = {}) {
    return check_good(std::vector<TestFunction>{f}, U, C, alpha, m, J, opt);
}

/// Least C for which check_good passes; none when every left side vanishes.
/// Throws PrecisionInsufficient when some band is undecided.
std::optional<PosReal> min_C_for_alpha(const std::vector<TestFunction>& fs, const UltraBall& U,
                                       const Rational& alpha, int m, int J, const GoodOptions& opt = {});

std::string certificate_json(const GoodCertificate& c);

struct Lemma42Report {
    bool scaling = false;      ///< c f has the same certificate as f
    bool sup = false;          ///< max(|f|, |g|) passes when both do
    bool comparable = false;   ///< u f with |u| = 1 passes with the same C
    bool weakening = false;    ///< (C, alpha) implies (2C, alpha/2)
    bool restriction = false;  ///< the certificate holds on every child ball
    bool pass() const { return scaling && sup && comparable && weakening && restriction; }
};

/// Closure properties on two affine test functions over U, with bands from
/// ceil(max ||f_i||_U) down J steps. The sup and u f cases use the cell engine.
Lemma42Report lemma42_property_suite(const TestFunction& f, const TestFunction& g, const UltraBall& U,
                                     const PosReal& C, const Rational& alpha, int m, int J);

/// Radius exponent added when dilating a ball by 3^k: k ceil(log_q 3).
int three_power_dilation(std::uint32_t q, int k);

struct FlowGoodReport {
    PosReal C;
    std::optional<PosReal> needed_C;  ///< least C these coefficients need
    Rational alpha;
    int dilation = 0;
    std::uint64_t forms = 0;      ///< coefficient functions seen
    std::uint64_t distinct = 0;   ///< after removing unit multiples
    std::uint64_t failures = 0;
    std::uint64_t undecided = 0;
    bool pass() const { return failures == 0 && undecided == 0; }
};

/// Certifies each form (C, alpha)-good on Ud, bands from its own norm downward,
/// after removing unit multiples and powers of T.
FlowGoodReport certify_affine_family(const std::vector<AffineForm>& forms, const UltraBall& Ud, const PosReal& C,
                                     const Rational& alpha, int m, int J, int jobs = 1);

/// Every coefficient of g_t u_x w on the pi-support, for every w of grades 1..n+1
/// with deg <= D, checked (C, 1/(n-1))-good on U dilated by 3^(n+1). The coefficient
/// is T^(index_exp) times an affine form; the power of T only shifts the bands,
/// so each form is certified with bands from its own norm downward.
FlowGoodReport certify_flow_coefficients(const HyperplaneData& h, const UltraBall& U, const PosReal& C, int D,
                                         int m, int J, int jobs = 1);

/// Least C making every affine form in d variables with coefficients in Lambda of
/// degree <= D (alpha)-good on the unit ball, bands from each norm down J steps.
std::optional<PosReal> sharp_affine_constant(const FqPtr& f, int d, const Rational& alpha, int D, int m, int J);

}  // namespace fflab
