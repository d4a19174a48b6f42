#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fflab/exterior.hpp"
#include "fflab/good.hpp"
#include "fflab/poly.hpp"

namespace fflab {

/// A vector of Lambda^(n+1) in the coordinates e_0, e_1, ..., e_n of Theta.
using LambdaVector = std::vector<Poly>;

/// Determinant of a square matrix over Lambda (rows of equal length).
Poly poly_det(const std::vector<LambdaVector>& rows);
/// Monic gcd of the l x l minors of the l vectors (zero when they are dependent).
Poly minors_gcd(const std::vector<LambdaVector>& vectors);

/// A primitive submodule of Theta = Lambda^(n+1), stored by the Hermite normal
/// form of its basis rows: echelon, monic pivots, entries above a pivot reduced
/// modulo it. Equal submodules have identical forms.
class SubmoduleHNF {
public:
    /// (Lambda-span of the vectors) tensored up to the fraction field, meet Theta.
    /// DomainError when the vectors are dependent or empty.
    static SubmoduleHNF saturate(const FqPtr& f, const std::vector<LambdaVector>& vectors);
    /// Hermite form of the span, which must already be primitive (DomainError otherwise).
    static SubmoduleHNF from_primitive(const FqPtr& f, const std::vector<LambdaVector>& vectors);

    const FqPtr& field() const { return f_; }
    int n() const { return n_; }
    int rank() const { return static_cast<int>(rows_.size()); }
    const std::vector<LambdaVector>& basis() const { return rows_; }

    bool contains(const LambdaVector& v) const;
    bool contains(const SubmoduleHNF& o) const;
    /// v_1 ^ ... ^ v_l on the plain labels 0, 1, ..., n.
    MultiVector wedge() const;
    /// Column-major text "(p0,...,pn);(...)".
    std::string str() const;

    friend bool operator==(const SubmoduleHNF& a, const SubmoduleHNF& b) { return a.rows_ == b.rows_; }

private:
    FqPtr f_;
    int n_ = 0;
    std::vector<LambdaVector> rows_;
};

/// Row Hermite normal form over Lambda (zero rows dropped).
std::vector<LambdaVector> hermite_rows(const FqPtr& f, std::vector<LambdaVector> rows);

/// Lambda-vector as a grade-one multivector on the plain labels.
MultiVector theta_vector(const FqPtr& f, int n, const LambdaVector& v);

/// Every nonzero vector of Lambda^(n+1) with coefficients of degree <= D.
std::vector<LambdaVector> small_vectors(const FqPtr& f, int n, int D);

/// Primitive submodules obtained by saturating spans of vectors of degree <= D,
/// all ranks 1..n+1, stored by increasing rank.
class PosetSlice {
public:
    static PosetSlice build(const FqPtr& f, int n, int D);

    int n() const { return n_; }
    int degree_cap() const { return D_; }
    std::size_t size() const { return members_.size(); }
    const std::vector<SubmoduleHNF>& members() const { return members_; }
    const SubmoduleHNF& operator[](std::size_t i) const { return members_[i]; }
    /// members[i] is contained in members[j].
    bool leq(std::size_t i, std::size_t j) const;
    bool comparable(std::size_t i, std::size_t j) const { return leq(i, j) || leq(j, i); }
    /// Index of a member, or none.
    std::optional<std::size_t> find(const SubmoduleHNF& d) const;
    /// Number of elements in the longest chain. Every member of rank r > 1 was
    /// built over one of rank r-1 inside it, so this is the largest rank present.
    int longest_chain() const;
    /// One submodule per line: "rank<TAB>basis".
    void dump(std::ostream& os) const;

private:
    int n_ = 0, D_ = 0;
    std::vector<SubmoduleHNF> members_;
};

/// ||g_t u_x (v_1 ^ ... ^ v_l)||.
AbsExponent phi_norm(const Point& x, const FlowStep& fs, const HyperplaneData& h, const SubmoduleHNF& d);

/// phi_Delta as the max of T^(index_exp) times affine forms, for fast and
/// cell-certified evaluation.
class PhiFunction {
public:
    PhiFunction(const MultiVector& w, const FlowStep& fs, const HyperplaneData& h);
    AbsExponent at(const Point& x) const;
    /// The constant value of phi on the closed ball, when certified.
    std::optional<AbsExponent> on_cell(const UltraBall& cell) const;
    const std::vector<std::pair<Rational, AffineForm>>& parts() const { return parts_; }

private:
    std::vector<std::pair<Rational, AffineForm>> parts_;
};

struct ProtectionWitness {
    Point x;
    std::vector<std::size_t> chain;  ///< slice indices, increasing
    PosReal eps, rho;
};

/// First chain (by size, then slice order) of members with eps <= phi <= rho such
/// that every other member with phi < rho is incomparable to some chain element.
/// Condition (b) is checked against the slice only ("slice-protected").
std::optional<std::vector<std::size_t>> find_protection(const std::vector<AbsExponent>& phi, const PosetSlice& s,
                                                        std::uint32_t q, const PosReal& eps, const PosReal& rho,
                                                        std::uint64_t chainBudget = 1'000'000);
std::optional<ProtectionWitness> find_protection(const Point& x, const PosReal& eps, const PosReal& rho,
                                                 const PosetSlice& s, const FlowStep& fs, const HyperplaneData& h);

struct SmallVectorReport {
    std::uint64_t checked = 0;
    std::uint64_t violations = 0;
    std::vector<std::string> diagnoses;   ///< which step of the chain argument broke
    bool pass() const { return violations == 0; }
};

/// Every nonzero theta with deg <= D has ||g_t u_x theta|| >= eps. A violation is
/// localized: the i with theta in Delta_i \ Delta_(i-1), Delta = sat(Delta_(i-1) + theta),
/// submultiplicativity and conditions (a), (b) on Delta.
SmallVectorReport protected_implies_no_small_vector(const ProtectionWitness& w, const PosetSlice& s, int D,
                                                    const FlowStep& fs, const HyperplaneData& h);

struct NondivReport {
    int k = 0;
    PosReal C;
    Rational alpha;
    int N_X = 1;
    PosReal D_mu;
    PosReal eps, rho;
    ExactMeasure unprotected;           ///< lambda(B \ Phi)
    ExactMeasure undecided;             ///< cells left open by precision
    PosReal bound;
    int longest_chain = 0;
    bool chain_ok = false;              ///< hypothesis (a)
    bool good_ok = false;               ///< hypothesis (b)
    bool lower_ok = false;              ///< hypothesis (c)
    std::string skipped;                ///< reason when a hypothesis is uncertified
    bool checked() const { return skipped.empty(); }
    bool pass() const;
};

/// q^((n-1) ceil(log_q 3)): lambda of a ball dilated by 3, over lambda of the
/// ball, in n-1 variables, rounded up to q^Z.
PosReal doubling_constant(std::uint32_t q, int n);

/// lambda(B \ Phi(eps, rho, slice)) <= k C (N_X D_mu^2)^k (eps/rho)^alpha lambda(B)
/// with k = n+1, N_X = 1, D_mu = q^((n-1) ceil(log_q 3)). The left side is exact:
/// cells are split until every phi is constant on them. Hypotheses are
/// certified first; the check is skipped (reported) when one fails.
NondivReport nondiv_measure_check(const UltraBall& B, const PosReal& eps, const PosReal& rho,
                                  const PosetSlice& s, const FlowStep& fs, const HyperplaneData& h,
                                  const PosReal& C, const Rational& alpha, int goodM = 1, int goodJ = 4,
                                  int maxDepth = 12);

std::string nondiv_report_json(const NondivReport& r);

}  // namespace fflab
