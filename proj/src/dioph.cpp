#include "fflab/dioph.hpp"

#include <climits>
#include <regex>
#include <set>
#include <sstream>

namespace fflab {

// ---------------------------------------------------------------- psi

ApproxFunction ApproxFunction::linear(int c, int b) {
    ApproxFunction a;
    a.linear_ = true;
    a.c_ = c;
    a.b_ = b;
    return a;
}

ApproxFunction ApproxFunction::table(std::vector<int> s) {
    if (s.empty()) throw ConfigError("empty psi table");
    ApproxFunction a;
    a.linear_ = false;
    a.table_ = std::move(s);
    return a;
}

ApproxFunction ApproxFunction::parse(const std::string& text) {
    static const std::regex lin(R"(^\s*(?:s\(t\)\s*=)?\s*(-?\d*)\s*\*?\s*t\s*(?:([+-])\s*(\d+))?\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, lin)) {
        std::string coef = m[1].str();
        int k = coef.empty() ? 1 : coef == "-" ? -1 : std::stoi(coef);
        int b = 0;
        if (m[2].matched) b = (m[2].str() == "-" ? -1 : 1) * std::stoi(m[3].str());
        return linear(-k, b);
    }
    std::istringstream in(text);
    std::string line;
    std::vector<int> vals;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        int t, s;
        if (!(ls >> t >> s)) throw ConfigError("bad psi table line '" + line + "'");
        if (t != static_cast<int>(vals.size())) throw ConfigError("psi table must list t = 0, 1, 2, ... in order");
        vals.push_back(s);
    }
    return table(std::move(vals));
}

int ApproxFunction::s(int t) const {
    if (t < 0) throw DomainError("psi is defined for t >= 0");
    if (linear_) return -c_ * t + b_;
    if (t >= static_cast<int>(table_.size()))
        throw DomainError("psi table has no entry for t = " + std::to_string(t));
    return table_[static_cast<std::size_t>(t)];
}

int ApproxFunction::max_t() const { return linear_ ? INT_MAX : static_cast<int>(table_.size()) - 1; }

bool ApproxFunction::nonincreasing_up_to(int T) const {
    for (int t = 0; t < std::min(T, max_t()); ++t)
        if (s(t + 1) > s(t)) return false;
    return true;
}

bool ApproxFunction::quantitative_ok(int n, int T) const {
    for (int t = 0; t <= std::min(T, max_t()); ++t)
        if (s(t) > -n * t) return false;
    return true;
}

int ApproxFunction::regime_start(int n, int T) const {
    int start = T + 1;
    for (int t = std::min(T, max_t()); t >= 0; --t) {
        if (s(t) < -n * t)
            start = t;
        else
            break;
    }
    return start;
}

std::string ApproxFunction::str() const {
    if (linear_) {
        std::string s = "s(t) = " + std::to_string(-c_) + "*t";
        if (b_ > 0) s += " + " + std::to_string(b_);
        if (b_ < 0) s += " - " + std::to_string(-b_);
        return s;
    }
    std::string s = "table[";
    for (std::size_t i = 0; i < table_.size(); ++i) s += (i ? "," : "") + std::to_string(table_[i]);
    return s + "]";
}

// ---------------------------------------------------------------- hyperplane

HyperplaneData HyperplaneData::from_laurent(FqPtr f, std::vector<Laurent> alpha) {
    if (alpha.size() < 2) throw DomainError("hyperplane data needs n >= 2 coefficients");
    HyperplaneData h;
    h.field = std::move(f);
    h.n = static_cast<int>(alpha.size());
    h.alpha = std::move(alpha);
    h.exact.assign(h.alpha.size(), std::nullopt);
    return h;
}

HyperplaneData HyperplaneData::from_rational(FqPtr f, const std::vector<RationalFunction>& alpha, int precExp) {
    std::vector<Laurent> a;
    for (const auto& r : alpha) a.push_back(Laurent::from_rational(r, precExp));
    HyperplaneData h = from_laurent(std::move(f), std::move(a));
    for (std::size_t i = 0; i < alpha.size(); ++i) h.exact[i] = alpha[i];
    return h;
}

Laurent HyperplaneData::eval(const Point& x) const {
    if (static_cast<int>(x.size()) != n - 1) throw DomainError("hyperplane point must lie in F^(n-1)");
    Laurent s = alpha[0];
    for (int i = 1; i < n; ++i) s = s + alpha[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i - 1)];
    return s;
}

int HyperplaneData::prec() const {
    int p = Laurent::kExact;
    for (const auto& a : alpha) p = std::max(p, a.prec());
    return p;
}

Laurent lacunary_series(const FqPtr& f, int precExp) {
    std::map<int, FqElem> t;
    for (long long e = 1; -e >= precExp; e *= 2) t[static_cast<int>(-e)] = f->one();
    return Laurent::from_terms(f, t, precExp);
}

// ---------------------------------------------------------------- shells

void shell_enumerate(const FqPtr& f, int n, int t, const std::function<void(const std::vector<Poly>&)>& fn) {
    if (t < 0 || n < 1) throw DomainError("shell needs t >= 0 and n >= 1");
    const std::uint64_t per = poly_count(f->q(), t);
    std::vector<Poly> all;
    all.reserve(per);
    for (std::uint64_t i = 0; i < per; ++i) all.push_back(Poly::from_index(f, i, t));
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(n), 0);
    std::vector<Poly> v(static_cast<std::size_t>(n));
    while (true) {
        int top = -1;
        for (int i = 0; i < n; ++i) {
            v[i] = all[idx[i]];
            top = std::max(top, v[i].degree());
        }
        if (top == t) fn(v);
        int k = n - 1;
        while (k >= 0 && ++idx[k] == per) idx[k--] = 0;
        if (k < 0) break;
    }
}

BigInt shell_size(std::uint32_t q, int n, int t) {
    BigInt qn = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(n));
    return boost::multiprecision::pow(qn, static_cast<unsigned>(t)) * (qn - 1);
}

// ---------------------------------------------------------------- condition

AbsExponent fractional_part_reduction(const Laurent& alpha, const Poly& qprime) {
    Laurent fr = (alpha * Laurent::from_poly(qprime)).frac_part();
    if (fr.is_exact_zero()) return AbsExponent::neg_infinity();
    return fr.abs();
}

std::string verdict_str(DiophVerdict v) {
    switch (v) {
        case DiophVerdict::Holds: return "holds-up-to-D";
        case DiophVerdict::Sporadic: return "sporadic";
        case DiophVerdict::Structural: return "fails-infinitely";
    }
    return "?";
}

namespace {

struct FracBound {
    bool certified;
    AbsExponent value;  // exact, or an upper bound when not certified
};

FracBound frac_bound(const HyperplaneData& h, std::size_t i, const Poly& qp) {
    if (h.exact[i]) return {true, h.exact[i]->frac_abs_times(qp)};
    Laurent prod = h.alpha[i] * Laurent::from_poly(qp);
    if (!prod.is_exact() && prod.prec() > 0) return {false, AbsExponent(-1)};
    Laurent fr = prod.frac_part();
    if (fr.is_certified()) return {true, fr.is_exact_zero() ? AbsExponent::neg_infinity() : fr.abs()};
    return {false, AbsExponent(fr.prec() - 1)};
}

}  // namespace

DioCondReport check_dioph_condition(const HyperplaneData& h, const Rational& delta, int D) {
    if (!(delta > Rational(0) && delta < Rational(h.n)))
        throw DomainError("delta must lie in (0, n), got " + delta.str());
    if (D < 0) throw DomainError("degree bound must be nonnegative");
    DioCondReport rep;
    rep.delta = delta;
    rep.degree_bound = D;
    std::set<std::string> violating;
    std::vector<Poly> monics;
    for_each_monic(h.field, D, [&](const Poly& qp) { monics.push_back(qp); });
    for (const auto& qp : monics) {
        ++rep.checked;
        Rational rhs = -(Rational(h.n) - delta) * Rational(qp.degree());
        bool holds = false, allSmall = true;
        for (std::size_t i = 0; i < h.alpha.size(); ++i) {
            FracBound fb = frac_bound(h, i, qp);
            if (fb.value > AbsExponent(rhs)) {
                if (fb.certified) {
                    holds = true;
                    break;
                }
                allSmall = false;
            }
        }
        if (holds) continue;
        if (!allSmall) {
            rep.precision_failures.push_back(qp);
            continue;
        }
        rep.violations.push_back(qp);
        violating.insert(qp.str());
        if (qp.degree() == 0) ++rep.constant_violations;
    }
    for (const auto& Q : rep.violations) {
        int multiples = 0;
        bool all = true;
        for (const auto& qp : monics) {
            if (qp.degree() < Q.degree() || !(qp % Q).is_zero()) continue;
            ++multiples;
            if (!violating.count(qp.str())) {
                all = false;
                break;
            }
        }
        if (all && multiples >= 2) rep.structural_moduli.push_back(Q);
    }
    if (!rep.structural_moduli.empty())
        rep.verdict = DiophVerdict::Structural;
    else if (static_cast<int>(rep.violations.size()) > rep.constant_violations)
        rep.verdict = DiophVerdict::Sporadic;
    else
        rep.verdict = DiophVerdict::Holds;
    return rep;
}

// ---------------------------------------------------------------- L sets

AffineForm approximation_form(const std::vector<Poly>& qvec, const HyperplaneData& h) {
    if (static_cast<int>(qvec.size()) != h.n) throw DomainError("q must lie in Lambda^n");
    Laurent qn = Laurent::from_poly(qvec.back());
    AffineForm f;
    for (int i = 1; i < h.n; ++i)
        f.beta.push_back(Laurent::from_poly(qvec[static_cast<std::size_t>(i - 1)]) +
                         h.alpha[static_cast<std::size_t>(i)] * qn);
    f.y = h.alpha[0] * qn;
    return f;
}

namespace {

int shell_of(const std::vector<Poly>& qvec) {
    int t = -1;
    for (const auto& p : qvec) t = std::max(t, p.degree());
    if (t < 0) throw DomainError("q must be nonzero");
    return t;
}

}  // namespace

AffinePredicate approximation_predicate(const std::vector<Poly>& qvec, const HyperplaneData& h,
                                        const ApproxFunction& psi, int kappaExp) {
    int t = shell_of(qvec);
    return AffinePredicate{approximation_form(qvec, h), psi.s(t) + kappaExp, true};
}

bool membership_L(const Point& x, const std::vector<Poly>& qvec, const HyperplaneData& h,
                  const ApproxFunction& psi, int kappaExp) {
    return approximation_predicate(qvec, h, psi, kappaExp).holds(x);
}

bool small_gradient(const std::vector<Poly>& qvec, const HyperplaneData& h) {
    AffineForm f = approximation_form(qvec, h);
    for (const auto& b : f.beta)
        if (!b.abs_less_than(0)) return false;
    return true;
}

SplitResult split_Lt(const Point& x, int t, const HyperplaneData& h, const ApproxFunction& psi, int kappaExp) {
    SplitResult r;
    shell_enumerate(h.field, h.n, t, [&](const std::vector<Poly>& qv) {
        if (r.small && r.large) return;
        if (!membership_L(x, qv, h, psi, kappaExp)) return;
        if (small_gradient(qv, h)) {
            if (!r.small) r.small_witness = qv;
            r.small = true;
        } else {
            r.large = true;
        }
    });
    return r;
}

ExactMeasure lambda_Lt(int t, GradientClass cls, const HyperplaneData& h, const ApproxFunction& psi,
                       int kappaExp, const UltraBall& U) {
    std::vector<AffinePredicate> preds;
    shell_enumerate(h.field, h.n, t, [&](const std::vector<Poly>& qv) {
        if (cls != GradientClass::Any && small_gradient(qv, h) != (cls == GradientClass::Small)) return;
        preds.push_back(approximation_predicate(qv, h, psi, kappaExp));
    });
    return union_measure(preds, U);
}

ExactMeasure lambda_union_L(int T, const HyperplaneData& h, const ApproxFunction& psi, int kappaExp,
                            const UltraBall& U) {
    std::vector<AffinePredicate> preds;
    for (int t = 0; t <= T; ++t)
        shell_enumerate(h.field, h.n, t, [&](const std::vector<Poly>& qv) {
            preds.push_back(approximation_predicate(qv, h, psi, kappaExp));
        });
    return union_measure(preds, U);
}

Prop31Result verify_prop31(const std::vector<Poly>& qvec, const HyperplaneData& h, int m, const UltraBall& U) {
    if (small_gradient(qvec, h)) throw DomainError("Prop 3.1 needs |q_i + alpha_i q_n| >= 1 for some i");
    const std::uint32_t q = h.field->q();
    AffineForm f = approximation_form(qvec, h);
    int G = static_cast<int>(f.grad_exp().value().num()) + U.radius_exp();
    Laurent a0 = f.eval(U.center());
    Laurent base = -a0.poly_part();
    Prop31Result res;
    res.measured = ExactMeasure::zero(q);
    auto add_strip = [&](const Laurent& p) {
        ExactMeasure s = sublevel_measure(AffineForm{f.beta, f.y + p}, -m, U);
        if (!s.is_zero()) ++res.nonempty_strips;
        res.measured += s;
    };
    if (G >= 0) {
        for_each_poly(h.field, G, [&](const Poly& pp) { add_strip(base + Laurent::from_poly(pp)); });
        res.strip_count_bound = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(G + 1));
    } else {
        add_strip(base);
        res.strip_count_bound = 1;
    }
    res.bound = measure(U).times_q_power(1 - m);
    res.pass = res.measured <= res.bound && BigInt(res.nonempty_strips) <= res.strip_count_bound;
    return res;
}

// ---------------------------------------------------------------- sums and kappa

namespace {

BigRational qpow_rat(std::uint32_t q, std::int64_t e) {
    BigInt p = boost::multiprecision::pow(BigInt(q), static_cast<unsigned>(e < 0 ? -e : e));
    return e >= 0 ? BigRational(p) : BigRational(BigInt(1), p);
}

}  // namespace

BigRational sum_psi_partial(const ApproxFunction& psi, std::uint32_t q, int n, int Tmax) {
    BigRational s = 0;
    for (int t = 0; t <= Tmax; ++t)
        s += qpow_rat(q, static_cast<std::int64_t>(psi.s(t)) + static_cast<std::int64_t>(n) * t) *
             (qpow_rat(q, n) - 1);
    return s;
}

BigRational sum_psi_direct(const FqPtr& f, const ApproxFunction& psi, int n, int Tmax) {
    BigRational s = 0;
    for (int t = 0; t <= Tmax; ++t) {
        BigRational w = qpow_rat(f->q(), psi.s(t));
        shell_enumerate(f, n, t, [&](const std::vector<Poly>&) { s += w; });
    }
    return s;
}

BigRational sum_psi_total(const ApproxFunction& psi, std::uint32_t q, int n) {
    if (!psi.is_linear() || psi.slope() <= n)
        throw DomainError("closed-form sum needs a linear psi with slope c > n");
    return qpow_rat(q, psi.offset()) * (qpow_rat(q, n) - 1) / (1 - qpow_rat(q, n - psi.slope()));
}

KappaResult kappa_bound(const Rational& xi, int n, std::uint32_t q, const BigRational& sumPsi,
                        const CertifiedReal& K0, const CertifiedReal& K1) {
    if (!(xi > Rational(0) && xi < Rational(1))) throw DomainError("xi must lie in (0, 1)");
    if (sumPsi <= 0) throw DomainError("sum of psi must be positive");
    KappaResult res;
    BigRational x = to_big(xi);
    res.term2 = x / (2 * BigRational(q) * sumPsi);
    res.term3 = (CertifiedReal::exact(x) / (CertifiedReal::exact(2) * K0 * K1)).pow(n * n - 1);
    for (int r = 0; r <= 100000; ++r) {
        BigRational k = qpow_rat(q, -r);
        if (k < 1 && k < res.term2 && certified_less(CertifiedReal::exact(k), res.term3)) {
            res.r = r;
            break;
        }
    }
    BigRational m12 = res.term2 < 1 ? res.term2 : BigRational(1);
    if (certified_less(res.term3, CertifiedReal::exact(m12)))
        res.binding = 3;
    else
        res.binding = res.term2 < 1 ? 2 : 1;
    return res;
}

}  // namespace fflab
