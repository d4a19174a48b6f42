#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "fflab/laurent.hpp"
#include "fflab/measure.hpp"

namespace fflab {

using Point = std::vector<Laurent>;

/// Closed ball {x in F^d : ||x - center|| <= q^radiusExp}.
/// The center is stored canonically: only its terms of exponent > radiusExp,
/// so two descriptions of the same ball compare equal.
class UltraBall {
public:
    UltraBall(FqPtr f, Point center, int radiusExp);
    static UltraBall unit(FqPtr f, int d);

    const FqPtr& field() const { return f_; }
    int dim() const { return static_cast<int>(center_.size()); }
    const Point& center() const { return center_; }
    int radius_exp() const { return r_; }

    bool contains(const Point& x) const;
    /// Same ball described from another member; throws DomainError if c is outside.
    UltraBall recenter(const Point& c) const;
    /// Concentric ball of radius q^(radiusExp + k).
    UltraBall dilate(int k) const { return UltraBall(f_, center_, r_ + k); }
    /// The q^d closed balls of radius q^(radiusExp - 1) tiling this one, in grid order.
    std::vector<UltraBall> children() const;

    friend bool operator==(const UltraBall& a, const UltraBall& b) {
        return a.r_ == b.r_ && a.center_ == b.center_;
    }

private:
    FqPtr f_;
    Point center_;
    int r_;
};

/// lambda(B) = q^(radiusExp * d), with lambda(closed unit ball) = 1.
ExactMeasure measure(const UltraBall& b);

/// Tiling of a ball by the q^((radiusExp+m)d) closed cells of radius q^-m.
/// Cell index digits run coordinate by coordinate, highest exponent first.
class CellGrid {
public:
    CellGrid(UltraBall ball, int m);

    const UltraBall& ball() const { return ball_; }
    int resolution() const { return m_; }
    std::uint64_t size() const { return size_; }
    /// The finite truncation representing cell idx.
    Point representative(std::uint64_t idx) const;
    UltraBall cell(std::uint64_t idx) const;
    ExactMeasure cell_measure() const;

private:
    UltraBall ball_;
    int m_;
    int digits_;  // per coordinate
    std::uint64_t size_;
};

/// x -> beta . x + y.
struct AffineForm {
    Point beta;
    Laurent y;

    Laurent eval(const Point& x) const;
    /// max_i |beta_i| (-infinity when beta = 0).
    AbsExponent grad_exp() const { return sup_norm(beta); }
};

/// sup_{x in B} |beta . x + y| = max(|beta . c + y|, q^r max|beta_i|).
AbsExponent sup_linear_on_ball(const AffineForm& f, const UltraBall& b);

/// Proof that a predicate is constant on every cell of resolution >= min_resolution.
struct Certificate {
    int min_resolution = 0;
    /// |f(x)| < q^-j with |grad f| = q^e: cells of radius q^-m move f by at most
    /// q^(e-m), so m >= e + j + 1 suffices.
    static Certificate affine(const AbsExponent& gradExp, int j);
    static Certificate constant() { return {INT32_MIN / 4}; }
    Certificate combine(const Certificate& o) const { return {std::max(min_resolution, o.min_resolution)}; }
};

using CellPredicate = std::function<bool(const Point&)>;

/// (number of cells whose representative satisfies pred) * q^(-m d).
/// Refuses (PrecisionInsufficient) when the certificate does not cover the grid.
/// The index range is split across `jobs` threads; the total is independent of jobs.
ExactMeasure exact_measure_of(const CellPredicate& pred, const CellGrid& grid, const Certificate& cert,
                              int jobs = 1);

/// Affine predicate |f(x)| < q^k, or dist(f(x), Lambda) < q^k when modLambda.
struct AffinePredicate {
    AffineForm f;
    int k = 0;
    bool mod_lambda = false;

    bool holds(const Point& x) const;
    Certificate certificate() const { return Certificate::affine(f.grad_exp(), -k); }
};

/// How a predicate meets a ball: everywhere, nowhere, or on a fraction q^frac_exp.
struct BallClass {
    enum Kind { Empty, Full, Partial } kind = Empty;
    int frac_exp = 0;
};

/// Exact classification by ultrametric closed forms (no enumeration).
BallClass classify(const AffinePredicate& p, const UltraBall& b);

/// lambda({x in B : |f(x)| < q^k}).
ExactMeasure sublevel_measure(const AffineForm& f, int k, const UltraBall& b);

/// Measure of the strip {x in B : |beta . x + y| < q^-j}. Requires max|beta_i| >= 1
/// unless beta = 0 (then the strip is B or empty).
ExactMeasure strip_measure(const Point& beta, const Laurent& y, int j, const UltraBall& b);

/// Exact measure of the union of the predicates' sets inside B by adaptive
/// refinement: a ball counts fully once some predicate covers it, is dropped once
/// every predicate misses it, is resolved by closed form when a single predicate
/// is partial, and is split otherwise. Throws PrecisionInsufficient beyond nodeBudget.
ExactMeasure union_measure(const std::vector<AffinePredicate>& preds, const UltraBall& b,
                           std::uint64_t nodeBudget = 20'000'000);

/// TSV lines "index<TAB>representative<TAB>value" for every cell.
void write_grid_tsv(std::ostream& os, const CellGrid& grid, const CellPredicate& pred);

std::string point_str(const Point& x);

}  // namespace fflab
