#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fflab/dioph.hpp"
#include "fflab/haar.hpp"
#include "fflab/posreal.hpp"
#include "fflab/scaled.hpp"

namespace fflab {

/// Labels of the standard basis of R^(2n), in canonical order
/// 0 < *1 < ... < *(n-1) < 1 < ... < n. A label is stored as its position.
namespace label {
inline int zero() { return 0; }
inline int star(int i) { return i; }
inline int plain(int n, int i) { return n - 1 + i; }
inline bool is_star(int n, int pos) { return pos >= 1 && pos <= n - 1; }
std::string name(int n, int pos);
/// Bits of the starred labels.
std::uint32_t star_mask(int n);
/// Bits of 0, 1, ..., n.
std::uint32_t plain_mask(int n);
}  // namespace label

/// e_I as a bitmask over label positions.
using BasisIndex = std::uint32_t;

int grade_of(BasisIndex I);
std::string index_str(int n, BasisIndex I);

/// An element of the exterior algebra of R^(2n) with ScaledSeries coefficients.
class MultiVector {
public:
    MultiVector(FqPtr f, int n) : f_(std::move(f)), n_(n) {}

    /// The empty wedge (grade 0) with coefficient 1.
    static MultiVector scalar_one(FqPtr f, int n);
    /// e_{p1} ^ e_{p2} ^ ... in the given order (sign from sorting; 0 on repeats).
    static MultiVector basis(FqPtr f, int n, const std::vector<int>& positions);
    static MultiVector e(FqPtr f, int n, int pos) { return basis(std::move(f), n, {pos}); }

    const FqPtr& field() const { return f_; }
    int n() const { return n_; }
    const std::map<BasisIndex, ScaledSeries>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    /// Grade of the terms (-1 for zero; DomainError when mixed).
    int grade() const;
    ScaledSeries coeff(BasisIndex I) const;

    void add_term(BasisIndex I, const ScaledSeries& c);
    MultiVector operator+(const MultiVector& o) const;
    MultiVector operator-(const MultiVector& o) const;
    MultiVector scale(const ScaledSeries& c) const;
    MultiVector scale(const Laurent& c) const { return scale(ScaledSeries::from_laurent(c)); }

    std::string str() const;

private:
    FqPtr f_;
    int n_;
    std::map<BasisIndex, ScaledSeries> terms_;
};

MultiVector wedge(const MultiVector& v, const MultiVector& w);

/// Sign (+1/-1) of e_I ^ e_J relative to e_(I u J); 0 when I and J meet.
int wedge_sign(BasisIndex I, BasisIndex J);

/// Indices kept by pi: at most one starred label.
bool in_pi_support(int n, BasisIndex I);
/// sup norm of pi(v); -infinity when pi(v) = 0.
AbsExponent pi_norm(const MultiVector& v);
/// sup norm of the part supported on span{e_0, e_1, ..., e_n}.
AbsExponent pi_star_norm(const MultiVector& v);

/// Extends a linear map given by the images of the basis vectors to all grades.
MultiVector apply_linear(const std::vector<MultiVector>& images, const MultiVector& v);
/// Derivative of apply_linear along der (product rule over the wedge factors).
MultiVector apply_linear_derivative(const std::vector<MultiVector>& images, const std::vector<MultiVector>& der,
                                    const MultiVector& v);

/// Images of the basis vectors under u_x.
std::vector<MultiVector> ux_images(const Point& x, const HyperplaneData& h);
MultiVector apply_ux(const Point& x, const HyperplaneData& h, const MultiVector& v);

using Matrix = std::vector<std::vector<Laurent>>;
/// u_x as a 2n x 2n matrix (entry [row][col], columns = images of basis vectors).
Matrix ux_matrix(const Point& x, const HyperplaneData& h);
/// u~_x on span{e_0, e_1, ..., e_n}.
Matrix ux_tilde_matrix(const Point& x, const HyperplaneData& h);
Matrix mat_mul(const Matrix& a, const Matrix& b);

/// g_t for a given (n, t, r, beta): r = 0 is the plain flow, r > 0 the kappa = q^-r flow.
struct FlowStep {
    int n = 2;
    int t = 0;
    int r = 0;
    Rational beta;
    FlowScalars s;

    static FlowStep make(const FqPtr& f, int n, int t, int r, const Rational& beta);
    /// Exponent of the diagonal entry at a label position.
    Rational diag_exp(int pos) const;
    /// Sum of diag_exp over I.
    Rational index_exp(BasisIndex I) const;
    const Rational& eps_exp() const { return s.eps.frac_val(); }
    const Rational& delta_exp() const { return s.delta_prime.frac_val(); }
};

MultiVector apply_gt(const FlowStep& fs, const MultiVector& v);

/// ||g_t u_x v|| at one point.
AbsExponent flow_norm_at(const Point& x, const FlowStep& fs, const HyperplaneData& h, const MultiVector& v);

/// The coefficients of u_x w on the pi-support as affine forms in x.
std::map<BasisIndex, AffineForm> ux_coefficient_forms(const MultiVector& w, const HyperplaneData& h);

/// sup over U of ||g_t u_x w||. Each coefficient of u_x w is affine in x, so the
/// sup is taken coefficient by coefficient in closed form. w must have integral grades.
AbsExponent sup_flow_norm_over_U(const MultiVector& w, const FlowStep& fs, const HyperplaneData& h,
                                 const UltraBall& U);

/// Calls fn on every nonzero w in the l-th exterior power of Theta (plain labels
/// 0, 1, ..., n) whose coefficients have degree <= D.
void enumerate_theta_wedge(const FqPtr& f, int n, int l, int D, const std::function<void(const MultiVector&)>& fn);

/// c_{I,w} for I containing 0: entry 0 is w_I, entry i (1 <= i <= n, i not in I) is
/// (-1)^(position of i in J) w_J with J = I u {i} \ {0}.
std::vector<Laurent> coeff_vector_cIw(BasisIndex I, const MultiVector& w);
/// P c with P = [I_n | a^t]: (Pc)_k = c_k + alpha_k c_n.
std::vector<Laurent> P_times(const std::vector<Laurent>& c, const HyperplaneData& h);

struct LemmaReport {
    std::uint64_t checked = 0;
    std::uint64_t failures = 0;
    std::optional<std::string> counterexample;
    bool pass() const { return failures == 0; }
};
/// max_{I contains 0} ||P c_{I,w}|| >= 1 for every nonzero w of grade l with deg <= D.
LemmaReport lemma_enough_oracle(int l, int D, const HyperplaneData& h);

struct BetaChoice {
    Rational beta;
    int N = 0;              ///< resolution actually used
    Rational threshold;     ///< beta must be >= this
    bool refined = false;   ///< N had to be increased
};
/// beta in (1/N)Z, 0 < beta < 1/(n+1), beta >= 1/(n+1) - ((n+1)/(n+1-delta) - 1),
/// nearest the midpoint of the admissible interval (ties to the smaller value).
/// N is raised through multiples of n+1 until the interval meets the grid.
BetaChoice choose_beta(int n, const Rational& delta, int N);

/// Exponent of C' = min(1, r(U)/max(1, ||c||)) for U = B(c, r(U)).
Rational cprime_exp(const UltraBall& U);

/// rho = min{1/2, C' q^(2(n-1)/(n+1))/q^(n-1), C''^(1/(n-delta+1)) q^(1/(n-delta+1)-1)}.
PosReal rho_constant(std::uint32_t q, int n, const Rational& delta, const Rational& cprimeExp,
                     const Rational& cdprimeExp);

struct EstimateRow {
    int grade = 0;
    std::string w;
    AbsExponent sup;
    PosReal bound;           ///< final bound of the grade
    std::string against;     ///< which displayed bound
    bool first_line_ok = true;
    bool pass = false;
    bool exempt = false;     ///< l = 1 with q_n violating the Diophantine condition
    double margin = 0;       ///< log_q(sup / bound)
};

struct EstimateReport {
    int grade = 0;
    std::vector<EstimateRow> rows;
    std::uint64_t checked = 0;
    std::uint64_t failures = 0;
    std::uint64_t first_line_failures = 0;
    std::uint64_t exempt = 0;
    bool chain_ok = true;    ///< the exponent chain from the first line down to the final bound
    double worst_margin = 1e300;
    bool pass() const { return failures == 0 && chain_ok; }
};

/// Lower bounds for sup_U ||g_t u_x w|| over every w of grade l with deg <= D:
/// l = n+1: the top coefficient identity and 1/2; 2 <= l <= n: the middle chain
/// down to C' q^(2(n-1)/(n+1))/q^(n-1); l = 1: the Diophantine route down to
/// C''^(1/(n-delta+1)) q^(1/(n-delta+1)-1). For l = 1 the check refuses (DomainError)
/// when the condition fails structurally up to degree D.
EstimateReport verify_estimates(int l, int D, const FlowStep& fs, const HyperplaneData& h, const UltraBall& U,
                                const Rational& delta, const Rational& cprimeExp, const Rational& cdprimeExp,
                                int jobs = 1);

enum class InclusionStatus { Holds, Vacuous, OutOfRegime, Fails };
std::string inclusion_str(InclusionStatus s);

struct InclusionResult {
    InclusionStatus status = InclusionStatus::Vacuous;
    AbsExponent norm;        ///< ||g_t u_x theta|| for the witness
    Rational eps_exp;
    std::optional<MultiVector> theta;
};
/// x in L_t^<(kappa) implies ||g_t u_x theta|| < |eps| for theta built from the
/// small-gradient witness; kappa = q^-fs.r. Needs s(t) <= -nt.
InclusionResult check_inclusion_Lt(const Point& x, const FlowStep& fs, const HyperplaneData& h,
                                   const ApproxFunction& psi);

void write_estimates_tsv(std::ostream& os, const EstimateReport& rep);

}  // namespace fflab
