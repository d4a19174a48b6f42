#include "fflab/exterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

namespace fflab {

namespace label {

std::string name(int n, int pos) {
    if (pos == 0) return "0";
    if (is_star(n, pos)) return "*" + std::to_string(pos);
    return std::to_string(pos - n + 1);
}

std::uint32_t star_mask(int n) {
    std::uint32_t m = 0;
    for (int i = 1; i <= n - 1; ++i) m |= 1u << star(i);
    return m;
}

std::uint32_t plain_mask(int n) {
    std::uint32_t m = 1u;
    for (int i = 1; i <= n; ++i) m |= 1u << plain(n, i);
    return m;
}

}  // namespace label

int grade_of(BasisIndex I) { return std::popcount(I); }

std::string index_str(int n, BasisIndex I) {
    std::string s = "e{";
    bool first = true;
    for (int p = 0; p < 2 * n; ++p)
        if (I >> p & 1u) {
            if (!first) s += ",";
            s += label::name(n, p);
            first = false;
        }
    return s + "}";
}

int wedge_sign(BasisIndex I, BasisIndex J) {
    if (I & J) return 0;
    int inv = 0;
    for (int b = 0; b < 32; ++b)
        if (J >> b & 1u) inv += std::popcount(I >> (b + 1));
    return inv % 2 ? -1 : 1;
}

// ---------------------------------------------------------------- MultiVector

MultiVector MultiVector::scalar_one(FqPtr f, int n) {
    MultiVector v(f, n);
    v.terms_.emplace(0u, ScaledSeries::from_laurent(Laurent::one(f)));
    return v;
}

MultiVector MultiVector::basis(FqPtr f, int n, const std::vector<int>& positions) {
    MultiVector v = scalar_one(f, n);
    for (int p : positions) {
        if (p < 0 || p >= 2 * n) throw DomainError("basis label out of range");
        MultiVector e1(f, n);
        e1.terms_.emplace(1u << p, ScaledSeries::from_laurent(Laurent::one(f)));
        v = wedge(v, e1);
    }
    return v;
}

int MultiVector::grade() const {
    if (terms_.empty()) return -1;
    int g = grade_of(terms_.begin()->first);
    for (const auto& [I, c] : terms_)
        if (grade_of(I) != g) throw DomainError("multivector of mixed grade");
    return g;
}

ScaledSeries MultiVector::coeff(BasisIndex I) const {
    auto it = terms_.find(I);
    if (it == terms_.end()) return ScaledSeries::from_laurent(Laurent::zero(f_));
    return it->second;
}

void MultiVector::add_term(BasisIndex I, const ScaledSeries& c) {
    if (c.is_exact_zero()) return;
    auto it = terms_.find(I);
    if (it == terms_.end()) {
        terms_.emplace(I, c);
        return;
    }
    it->second = it->second + c;
    if (it->second.is_exact_zero()) terms_.erase(it);
}

MultiVector MultiVector::operator+(const MultiVector& o) const {
    MultiVector r = *this;
    for (const auto& [I, c] : o.terms_) r.add_term(I, c);
    return r;
}

MultiVector MultiVector::operator-(const MultiVector& o) const {
    MultiVector r = *this;
    for (const auto& [I, c] : o.terms_) r.add_term(I, -c);
    return r;
}

MultiVector MultiVector::scale(const ScaledSeries& c) const {
    MultiVector r(f_, n_);
    for (const auto& [I, a] : terms_) r.add_term(I, a * c);
    return r;
}

std::string MultiVector::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [I, c] : terms_) {
        if (!s.empty()) s += " + ";
        s += "(" + c.str() + ")*" + index_str(n_, I);
    }
    return s;
}

MultiVector wedge(const MultiVector& v, const MultiVector& w) {
    if (v.n() != w.n()) throw DomainError("wedge of multivectors of different dimension");
    MultiVector r(v.field(), v.n());
    for (const auto& [I, a] : v.terms())
        for (const auto& [J, b] : w.terms()) {
            int s = wedge_sign(I, J);
            if (s == 0) continue;
            ScaledSeries c = a * b;
            r.add_term(I | J, s > 0 ? c : -c);
        }
    return r;
}

bool in_pi_support(int n, BasisIndex I) { return std::popcount(I & label::star_mask(n)) <= 1; }

namespace {

// Max of |c| over the selected coefficients. Uncertified coefficients are allowed
// when a certified one provably dominates their upper bound.
template <class Keep>
AbsExponent dominated_max(const MultiVector& v, Keep keep) {
    AbsExponent m = AbsExponent::neg_infinity();
    std::optional<Rational> loose;
    for (const auto& [I, c] : v.terms()) {
        if (!keep(I)) continue;
        if (c.mantissa().is_certified()) {
            m = max(m, c.abs());
        } else {
            Rational ub = c.frac_val() + Rational(c.mantissa().degree_upper_bound());
            loose = loose ? std::max(*loose, ub) : ub;
        }
    }
    if (loose && !(AbsExponent(*loose) <= m))
        throw PrecisionInsufficient("norm depends on an uncertified coefficient");
    return m;
}

}  // namespace

AbsExponent pi_norm(const MultiVector& v) {
    return dominated_max(v, [&](BasisIndex I) { return in_pi_support(v.n(), I); });
}

AbsExponent pi_star_norm(const MultiVector& v) {
    return dominated_max(v, [&](BasisIndex I) { return (I & label::star_mask(v.n())) == 0; });
}

MultiVector apply_linear(const std::vector<MultiVector>& images, const MultiVector& v) {
    MultiVector r(v.field(), v.n());
    for (const auto& [I, c] : v.terms()) {
        MultiVector img = MultiVector::scalar_one(v.field(), v.n());
        for (int p = 0; p < 2 * v.n(); ++p)
            if (I >> p & 1u) img = wedge(img, images[static_cast<std::size_t>(p)]);
        r = r + img.scale(c);
    }
    return r;
}

MultiVector apply_linear_derivative(const std::vector<MultiVector>& images, const std::vector<MultiVector>& der,
                                    const MultiVector& v) {
    MultiVector r(v.field(), v.n());
    for (const auto& [I, c] : v.terms())
        for (int k = 0; k < 2 * v.n(); ++k) {
            if (!(I >> k & 1u)) continue;
            MultiVector img = MultiVector::scalar_one(v.field(), v.n());
            for (int p = 0; p < 2 * v.n(); ++p)
                if (I >> p & 1u) img = wedge(img, (p == k ? der : images)[static_cast<std::size_t>(p)]);
            r = r + img.scale(c);
        }
    return r;
}

// ---------------------------------------------------------------- u_x and g_t

std::vector<MultiVector> ux_images(const Point& x, const HyperplaneData& h) {
    const int n = h.n;
    if (static_cast<int>(x.size()) != n - 1) throw DomainError("u_x needs x in F^(n-1)");
    const FqPtr& f = h.field;
    std::vector<MultiVector> img;
    auto e = [&](int p) { return MultiVector::e(f, n, p); };
    img.push_back(e(0));
    for (int i = 1; i <= n - 1; ++i) img.push_back(e(label::star(i)));
    for (int i = 1; i <= n - 1; ++i)
        img.push_back(e(0).scale(x[static_cast<std::size_t>(i - 1)]) + e(label::star(i)) + e(label::plain(n, i)));
    MultiVector last = e(0).scale(h.eval(x)) + e(label::plain(n, n));
    for (int i = 1; i <= n - 1; ++i) last = last + e(label::star(i)).scale(h.alpha[static_cast<std::size_t>(i)]);
    img.push_back(last);
    return img;
}

MultiVector apply_ux(const Point& x, const HyperplaneData& h, const MultiVector& v) {
    return apply_linear(ux_images(x, h), v);
}

namespace {

Laurent plain_coeff(const ScaledSeries& s) {
    if (!s.frac_val().is_integer()) throw DomainError("coefficient outside F: grade " + s.frac_val().str());
    return s.rebase(Rational(0)).mantissa();
}

}  // namespace

Matrix ux_matrix(const Point& x, const HyperplaneData& h) {
    const int m = 2 * h.n;
    auto img = ux_images(x, h);
    Matrix M(static_cast<std::size_t>(m), std::vector<Laurent>(static_cast<std::size_t>(m), Laurent::zero(h.field)));
    for (int col = 0; col < m; ++col)
        for (const auto& [I, c] : img[static_cast<std::size_t>(col)].terms())
            M[static_cast<std::size_t>(std::countr_zero(I))][static_cast<std::size_t>(col)] = plain_coeff(c);
    return M;
}

Matrix ux_tilde_matrix(const Point& x, const HyperplaneData& h) {
    Matrix M = ux_matrix(x, h);
    std::vector<std::size_t> keep{0};
    for (int i = 1; i <= h.n; ++i) keep.push_back(static_cast<std::size_t>(label::plain(h.n, i)));
    Matrix R(keep.size(), std::vector<Laurent>(keep.size(), Laurent::zero(h.field)));
    for (std::size_t a = 0; a < keep.size(); ++a)
        for (std::size_t b = 0; b < keep.size(); ++b) R[a][b] = M[keep[a]][keep[b]];
    return R;
}

Matrix mat_mul(const Matrix& a, const Matrix& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    const FqPtr& f = a[0][0].field();
    Matrix r(n, std::vector<Laurent>(m, Laurent::zero(f)));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t l = 0; l < k; ++l) r[i][j] = r[i][j] + a[i][l] * b[l][j];
    return r;
}

FlowStep FlowStep::make(const FqPtr& f, int n, int t, int r, const Rational& beta) {
    FlowStep fs;
    fs.n = n;
    fs.t = t;
    fs.r = r;
    fs.beta = beta;
    fs.s = make_flow_scalars(f, n, t, r, beta);
    return fs;
}

Rational FlowStep::diag_exp(int pos) const {
    if (pos == 0) return eps_exp() - delta_exp();
    if (label::is_star(n, pos)) return eps_exp();
    return eps_exp() - Rational(t + 1);
}

Rational FlowStep::index_exp(BasisIndex I) const {
    Rational e(0);
    for (int p = 0; p < 2 * n; ++p)
        if (I >> p & 1u) e += diag_exp(p);
    return e;
}

MultiVector apply_gt(const FlowStep& fs, const MultiVector& v) {
    MultiVector r(v.field(), v.n());
    for (const auto& [I, c] : v.terms())
        r.add_term(I, c * ScaledSeries::monomial(v.field(), fs.s.ram, fs.index_exp(I)));
    return r;
}

AbsExponent flow_norm_at(const Point& x, const FlowStep& fs, const HyperplaneData& h, const MultiVector& v) {
    return pi_norm(apply_gt(fs, apply_ux(x, h, v)));
}

std::map<BasisIndex, AffineForm> ux_coefficient_forms(const MultiVector& w, const HyperplaneData& h) {
    const int d = h.n - 1;
    if (w.n() != h.n) throw DomainError("dimension mismatch");
    const FqPtr& f = h.field;
    Point zero(static_cast<std::size_t>(d), Laurent::zero(f));
    auto base = ux_images(zero, h);
    MultiVector v0 = apply_linear(base, w);
    std::vector<MultiVector> slope;
    for (int j = 1; j <= d; ++j) {
        // d/dx_j of u_x: e_j -> e_0, e_n -> alpha_j e_0
        std::vector<MultiVector> der(static_cast<std::size_t>(2 * h.n), MultiVector(f, h.n));
        der[static_cast<std::size_t>(label::plain(h.n, j))] = MultiVector::e(f, h.n, 0);
        der[static_cast<std::size_t>(label::plain(h.n, h.n))] =
            MultiVector::e(f, h.n, 0).scale(h.alpha[static_cast<std::size_t>(j)]);
        slope.push_back(apply_linear_derivative(base, der, w));
    }
    std::set<BasisIndex> support;
    for (const auto& [I, c] : v0.terms()) support.insert(I);
    for (const auto& s : slope)
        for (const auto& [I, c] : s.terms()) support.insert(I);
    std::map<BasisIndex, AffineForm> out;
    for (BasisIndex I : support) {
        if (!in_pi_support(h.n, I)) continue;
        AffineForm form;
        form.y = plain_coeff(v0.coeff(I));
        for (const auto& s : slope) form.beta.push_back(plain_coeff(s.coeff(I)));
        out.emplace(I, std::move(form));
    }
    return out;
}

AbsExponent sup_flow_norm_over_U(const MultiVector& w, const FlowStep& fs, const HyperplaneData& h,
                                 const UltraBall& U) {
    if (U.dim() != h.n - 1) throw DomainError("U must lie in F^(n-1)");
    if (fs.n != h.n) throw DomainError("dimension mismatch");
    AbsExponent best = AbsExponent::neg_infinity();
    std::optional<Rational> loose;
    for (const auto& [I, form] : ux_coefficient_forms(w, h)) {
        try {
            AbsExponent e = sup_linear_on_ball(form, U);
            if (!e.is_neg_infinity()) best = max(best, AbsExponent(e.value() + fs.index_exp(I)));
        } catch (const PrecisionInsufficient&) {
            int ub = form.y.degree_upper_bound();
            for (const auto& b : form.beta) ub = std::max(ub, b.degree_upper_bound() + U.radius_exp());
            Rational e = Rational(ub) + fs.index_exp(I);
            loose = loose ? std::max(*loose, e) : e;
        }
    }
    if (loose && !(AbsExponent(*loose) <= best))
        throw PrecisionInsufficient("flow norm depends on an uncertified coefficient");
    return best;
}

// ---------------------------------------------------------------- Theta

namespace {

std::vector<BasisIndex> plain_subsets(int n, int l) {
    std::vector<BasisIndex> out;
    std::uint32_t pm = label::plain_mask(n);
    for (BasisIndex I = 0; I < (1u << (2 * n)); ++I)
        if ((I & ~pm) == 0 && grade_of(I) == l) out.push_back(I);
    return out;
}

}  // namespace

void enumerate_theta_wedge(const FqPtr& f, int n, int l, int D, const std::function<void(const MultiVector&)>& fn) {
    if (l < 1 || l > n + 1) throw DomainError("grade must lie in 1..n+1");
    auto subsets = plain_subsets(n, l);
    const std::uint64_t per = poly_count(f->q(), D);
    std::uint64_t total = 1;
    for (std::size_t k = 0; k < subsets.size(); ++k) {
        if (total > (std::uint64_t{1} << 40) / per) throw DomainError("enumeration too large");
        total *= per;
    }
    for (std::uint64_t idx = 1; idx < total; ++idx) {
        MultiVector w(f, n);
        std::uint64_t rest = idx;
        for (BasisIndex I : subsets) {
            Poly p = Poly::from_index(f, rest % per, D);
            rest /= per;
            if (!p.is_zero()) w.add_term(I, ScaledSeries::from_laurent(Laurent::from_poly(p)));
        }
        fn(w);
    }
}

std::vector<Laurent> coeff_vector_cIw(BasisIndex I, const MultiVector& w) {
    const int n = w.n();
    if (!(I & 1u)) throw DomainError("c_{I,w} needs 0 in I");
    std::vector<Laurent> c(static_cast<std::size_t>(n + 1), Laurent::zero(w.field()));
    c[0] = plain_coeff(w.coeff(I));
    for (int i = 1; i <= n; ++i) {
        int pos = label::plain(n, i);
        if (I >> pos & 1u) continue;
        BasisIndex J = (I | (1u << pos)) & ~1u;
        int below = std::popcount(J & ((1u << pos) - 1u));
        Laurent v = plain_coeff(w.coeff(J));
        c[static_cast<std::size_t>(i)] = below % 2 ? -v : v;
    }
    return c;
}

std::vector<Laurent> P_times(const std::vector<Laurent>& c, const HyperplaneData& h) {
    const int n = h.n;
    if (static_cast<int>(c.size()) != n + 1) throw DomainError("P c needs a vector of length n+1");
    std::vector<Laurent> r;
    for (int k = 0; k < n; ++k)
        r.push_back(c[static_cast<std::size_t>(k)] + h.alpha[static_cast<std::size_t>(k)] * c[static_cast<std::size_t>(n)]);
    return r;
}

LemmaReport lemma_enough_oracle(int l, int D, const HyperplaneData& h) {
    if (l < 2 || l > h.n + 1) throw DomainError("lemma applies to grades 2..n+1");
    LemmaReport rep;
    auto subsets = plain_subsets(h.n, l);
    enumerate_theta_wedge(h.field, h.n, l, D, [&](const MultiVector& w) {
        ++rep.checked;
        AbsExponent best = AbsExponent::neg_infinity();
        for (BasisIndex I : subsets)
            if (I & 1u) best = max(best, sup_norm(P_times(coeff_vector_cIw(I, w), h)));
        if (best < AbsExponent(0)) {
            ++rep.failures;
            if (!rep.counterexample) rep.counterexample = w.str();
        }
    });
    return rep;
}

// ---------------------------------------------------------------- constants

BetaChoice choose_beta(int n, const Rational& delta, int N) {
    if (n < 2) throw DomainError("choose_beta needs n >= 2");
    if (!(delta > Rational(0) && delta < Rational(n))) throw DomainError("delta must lie in (0, n)");
    if (N < 1) throw DomainError("resolution must be positive");
    BetaChoice bc;
    Rational hi(1, n + 1);
    bc.threshold = hi - (Rational(n + 1) / (Rational(n + 1) - delta) - Rational(1));
    Rational lo = std::max(Rational(0), bc.threshold);
    Rational mid = (lo + hi) / Rational(2);
    for (int guard = 0; guard < 100000; ++guard) {
        std::optional<Rational> best;
        std::int64_t m0 = std::max<std::int64_t>(1, (lo * Rational(N)).ceil());
        for (std::int64_t m = m0;; ++m) {
            Rational b(m, N);
            if (b >= hi) break;
            if (!best) {
                best = b;
                continue;
            }
            Rational db = b > mid ? b - mid : mid - b, dc = *best > mid ? *best - mid : mid - *best;
            if (db < dc) best = b;
        }
        if (best) {
            bc.beta = *best;
            bc.N = N;
            return bc;
        }
        N = (N / (n + 1) + 1) * (n + 1);
        bc.refined = true;
    }
    throw DomainError("no admissible beta found");
}

Rational cprime_exp(const UltraBall& U) {
    AbsExponent c = sup_norm(U.center());
    Rational cn = c.is_neg_infinity() ? Rational(0) : std::max(Rational(0), c.value());
    return std::min(Rational(0), Rational(U.radius_exp()) - cn);
}

PosReal rho_constant(std::uint32_t q, int n, const Rational& delta, const Rational& cprimeExp,
                     const Rational& cdprimeExp) {
    Rational k = Rational(n) - delta + Rational(1);
    PosReal a = PosReal::from_rational(BigRational(1, 2));
    PosReal b = PosReal::q_pow(q, cprimeExp + Rational(2 * (n - 1), n + 1) - Rational(n - 1));
    PosReal c = PosReal::q_pow(q, cdprimeExp / k + Rational(1) / k - Rational(1));
    return min(a, min(b, c));
}

// ---------------------------------------------------------------- estimates

namespace {

double log_q(const PosReal& x, std::uint32_t q) { return std::log(x.to_double()) / std::log(static_cast<double>(q)); }

struct EstimateCtx {
    int l;
    const FlowStep& fs;
    const HyperplaneData& h;
    const UltraBall& U;
    Rational delta, cp, cdp;
    std::set<std::string> violators;
};

// first-line exponent for 2 <= l <= n
Rational middle_line(const EstimateCtx& c) {
    const auto& fs = c.fs;
    return c.cp + Rational(c.l) * fs.eps_exp() - fs.delta_exp() - Rational((fs.t + 1) * (c.l - 1));
}

Rational middle_final(const EstimateCtx& c) {
    int n = c.h.n;
    return c.cp + Rational(2 * (n - 1), n + 1) - Rational(n - 1);
}

Rational one_y0_line(const EstimateCtx& c) {
    const auto& fs = c.fs;
    Rational k = Rational(c.h.n) - c.delta + Rational(1);
    Rational y0 = (c.cdp + Rational(fs.t + 1) - fs.delta_exp()) / k;
    return fs.eps_exp() - Rational(fs.t + 1) + y0;
}

Rational one_final(const EstimateCtx& c) {
    Rational k = Rational(c.h.n) - c.delta + Rational(1);
    return (c.cdp + Rational(1)) / k - Rational(1);
}

EstimateRow check_one(const EstimateCtx& c, const MultiVector& w) {
    const std::uint32_t q = c.h.field->q();
    const int n = c.h.n;
    const auto& fs = c.fs;
    EstimateRow row;
    row.grade = c.l;
    row.w = w.str();
    row.sup = sup_flow_norm_over_U(w, fs, c.h, c.U);
    PosReal supv = row.sup.is_neg_infinity() ? PosReal::from_int(0) : PosReal::q_pow(q, row.sup.value());
    auto at_least = [&](const Rational& e) { return !row.sup.is_neg_infinity() && row.sup.value() >= e; };
    if (c.l == n + 1) {
        row.against = "top: |w| q^(beta(n+1)t) >= 1/2";
        row.bound = PosReal::from_rational(BigRational(1, 2));
        BasisIndex top = 1u | (1u << label::star(1));
        for (int i = 2; i <= n; ++i) top |= 1u << label::plain(n, i);
        BasisIndex full = label::plain_mask(n);
        MultiVector img = apply_gt(fs, apply_ux(c.U.center(), c.h, w));
        AbsExponent coef = img.coeff(top).abs();
        Rational expect = c.fs.beta * Rational((n + 1) * fs.t) + Rational(plain_coeff(w.coeff(full)).degree());
        row.first_line_ok = coef == AbsExponent(expect);
        row.pass = !row.sup.is_neg_infinity() && compare(supv, row.bound) >= 0 && row.first_line_ok;
    } else if (c.l >= 2) {
        row.against = "middle: C' q^(2(n-1)/(n+1)) / q^(n-1)";
        Rational fin = middle_final(c);
        row.bound = PosReal::q_pow(q, fin);
        row.first_line_ok = at_least(middle_line(c));
        row.pass = at_least(fin);
    } else {
        Rational fin = one_final(c);
        row.bound = PosReal::q_pow(q, fin);
        row.against = "one: C''^(1/(n-delta+1)) q^(1/(n-delta+1)-1)";
        Laurent qn = plain_coeff(w.coeff(1u << label::plain(n, n)));
        Rational first;
        if (qn.is_exact_zero()) {
            first = c.cdp + fs.eps_exp() - fs.delta_exp();
        } else {
            Rational dq(qn.degree());
            Rational a = c.cdp + fs.eps_exp() - fs.delta_exp() - (Rational(n) - c.delta) * dq;
            Rational b = fs.eps_exp() - Rational(fs.t + 1) + dq;
            first = std::max(a, b);
            if (c.violators.count(qn.to_poly().monic().str())) row.exempt = true;
        }
        row.first_line_ok = at_least(first);
        row.pass = at_least(fin);
    }
    row.margin = row.sup.is_neg_infinity() ? -1e300 : row.sup.value().to_double() - log_q(row.bound, q);
    return row;
}

}  // namespace

EstimateReport verify_estimates(int l, int D, const FlowStep& fs, const HyperplaneData& h, const UltraBall& U,
                                const Rational& delta, const Rational& cprimeExp, const Rational& cdprimeExp,
                                int jobs) {
    const int n = h.n;
    if (l < 1 || l > n + 1) throw DomainError("grade must lie in 1..n+1");
    if (fs.n != n) throw DomainError("flow step and hyperplane disagree on n");
    EstimateCtx ctx{l, fs, h, U, delta, cprimeExp, cdprimeExp, {}};
    EstimateReport rep;
    rep.grade = l;
    if (l == 1) {
        DioCondReport cond = check_dioph_condition(h, delta, D);
        if (cond.verdict == DiophVerdict::Structural)
            throw DomainError("Diophantine condition fails structurally up to degree " + std::to_string(D) +
                              " (e.g. all multiples of " + cond.structural_moduli.front().str() +
                              "); the grade-1 estimate cannot be certified");
        for (const auto& v : cond.violations) ctx.violators.insert(v.str());
        rep.chain_ok = one_y0_line(ctx) >= one_final(ctx);
    } else if (l <= n) {
        rep.chain_ok = middle_line(ctx) >= middle_final(ctx);
    }
    std::vector<MultiVector> ws;
    enumerate_theta_wedge(h.field, n, l, D, [&](const MultiVector& w) { ws.push_back(w); });
    rep.rows.resize(ws.size());
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(ws.size())));
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j)
        pool.emplace_back([&, j] {
            try {
                for (std::size_t i = static_cast<std::size_t>(j); i < ws.size(); i += static_cast<std::size_t>(jobs))
                    rep.rows[i] = check_one(ctx, ws[i]);
            } catch (...) {
                errs[static_cast<std::size_t>(j)] = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    for (const auto& r : rep.rows) {
        ++rep.checked;
        if (r.exempt) {
            ++rep.exempt;
            continue;
        }
        if (!r.pass) ++rep.failures;
        if (!r.first_line_ok) ++rep.first_line_failures;
        rep.worst_margin = std::min(rep.worst_margin, r.margin);
    }
    return rep;
}

void write_estimates_tsv(std::ostream& os, const EstimateReport& rep) {
    os << "grade\tw\tsup_exp\tbound\tmargin\tpass\n";
    for (const auto& r : rep.rows)
        os << r.grade << '\t' << r.w << '\t' << r.sup.str() << '\t' << r.bound.str() << '\t' << r.margin << '\t'
           << (r.exempt ? "exempt" : r.pass ? "pass" : "FAIL") << '\n';
}

// ---------------------------------------------------------------- inclusion

std::string inclusion_str(InclusionStatus s) {
    switch (s) {
        case InclusionStatus::Holds: return "holds";
        case InclusionStatus::Vacuous: return "vacuous";
        case InclusionStatus::OutOfRegime: return "out-of-regime";
        case InclusionStatus::Fails: return "FAILS";
    }
    return "?";
}

InclusionResult check_inclusion_Lt(const Point& x, const FlowStep& fs, const HyperplaneData& h,
                                   const ApproxFunction& psi) {
    InclusionResult res;
    res.eps_exp = fs.eps_exp();
    const int n = h.n;
    if (psi.s(fs.t) > -n * fs.t) {
        res.status = InclusionStatus::OutOfRegime;
        return res;
    }
    SplitResult sp = split_Lt(x, fs.t, h, psi, -fs.r);
    if (!sp.small) {
        res.status = InclusionStatus::Vacuous;
        return res;
    }
    const auto& qv = *sp.small_witness;
    Laurent v = Laurent::from_poly(qv.back()) * h.eval(x);
    for (int i = 0; i + 1 < n; ++i)
        v = v + Laurent::from_poly(qv[static_cast<std::size_t>(i)]) * x[static_cast<std::size_t>(i)];
    Poly p = (-v.poly_part()).to_poly();
    MultiVector theta(h.field, n);
    theta.add_term(1u, ScaledSeries::from_laurent(Laurent::from_poly(p)));
    for (int i = 1; i <= n; ++i)
        theta.add_term(1u << label::plain(n, i),
                       ScaledSeries::from_laurent(Laurent::from_poly(qv[static_cast<std::size_t>(i - 1)])));
    res.norm = flow_norm_at(x, fs, h, theta);
    res.theta = theta;
    res.status = res.norm < AbsExponent(res.eps_exp) ? InclusionStatus::Holds : InclusionStatus::Fails;
    return res;
}

}  // namespace fflab
