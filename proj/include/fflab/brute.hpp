#pragma once

// Brute-force reference computations. None of these call the closed forms
// they are used to check; they enumerate.

#include <climits>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "fflab/dioph.hpp"
#include "fflab/haar.hpp"

namespace fflab::brute {

/// Exact element with random coefficients at exponents hi..lo.
inline Laurent random_exact(const FqPtr& f, std::mt19937_64& rng, int hi, int lo) {
    std::map<int, FqElem> t;
    for (int e = hi; e >= lo; --e) t[e] = f->element(static_cast<std::uint32_t>(rng() % f->q()));
    return Laurent::from_terms(f, t);
}

inline Poly random_poly(const FqPtr& f, std::mt19937_64& rng, int maxDeg) {
    return Poly::from_index(f, rng() % poly_count(f->q(), maxDeg), maxDeg);
}

/// Degree of x as an integer; INT_MIN for zero. Reads coefficients one by one.
inline int degree_by_scan(const Laurent& x, int from, int to) {
    for (int e = from; e >= to; --e)
        if (x.coeff(e).v != 0) return e;
    return INT32_MIN;
}

/// max over every grid representative of |f(x)|, as a degree.
inline int sup_by_grid(const AffineForm& f, const UltraBall& b, int m) {
    CellGrid g(b, m);
    int best = INT32_MIN;
    for (std::uint64_t i = 0; i < g.size(); ++i) {
        Laurent v = f.eval(g.representative(i));
        if (v.is_exact_zero()) continue;
        best = std::max(best, v.degree());
    }
    return best;
}

/// Cells whose representative satisfies pred, times the cell measure.
template <class Pred>
ExactMeasure count_cells(const UltraBall& b, int m, Pred pred) {
    CellGrid g(b, m);
    BigInt c = 0;
    for (std::uint64_t i = 0; i < g.size(); ++i)
        if (pred(g.representative(i))) ++c;
    return g.cell_measure().times(c);
}

/// min_{deg p <= B} |v + p| as a degree (INT_MIN when some p cancels v exactly
/// down to the known precision, which the caller must avoid).
inline int min_over_p(const Laurent& v, int B) {
    const FqPtr& f = v.field();
    int best = INT32_MAX;
    for_each_poly(f, B, [&](const Poly& p) {
        Laurent s = v + Laurent::from_poly(p);
        int d = s.is_exact_zero() ? INT32_MIN : s.degree();
        best = std::min(best, d);
    });
    return best;
}

/// Direct search: exists p with |(x, x~.a).q + p| < q^k ?
inline bool member_by_search(const Point& x, const std::vector<Poly>& qv, const HyperplaneData& h, int k) {
    Laurent v = Laurent::from_poly(qv.back()) * h.eval(x);
    for (std::size_t i = 0; i + 1 < qv.size(); ++i) v = v + Laurent::from_poly(qv[i]) * x[i];
    int B = std::max(0, v.is_exact_zero() ? 0 : v.degree_upper_bound() + 1);
    bool found = false;
    for_each_poly(h.field, B, [&](const Poly& p) {
        if (found) return;
        Laurent s = v + Laurent::from_poly(p);
        if (s.abs_less_than(k)) found = true;
    });
    return found;
}

}  // namespace fflab::brute
