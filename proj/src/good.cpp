#include "fflab/good.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <thread>

#include "fflab/errors.hpp"

namespace fflab {

// ---------------------------------------------------------------- TestFunction

TestFunction TestFunction::affine(const FqPtr& f, const AffineForm& a) {
    TestFunction t(f, static_cast<int>(a.beta.size()));
    t.add_term(Monomial(a.beta.size(), 0), a.y);
    for (std::size_t i = 0; i < a.beta.size(); ++i) {
        Monomial m(a.beta.size(), 0);
        m[i] = 1;
        t.add_term(m, a.beta[i]);
    }
    return t;
}

TestFunction TestFunction::constant(const FqPtr& f, int d, const Laurent& c) {
    TestFunction t(f, d);
    t.add_term(Monomial(static_cast<std::size_t>(d), 0), c);
    return t;
}

TestFunction TestFunction::variable(const FqPtr& f, int d, int i) {
    TestFunction t(f, d);
    Monomial m(static_cast<std::size_t>(d), 0);
    m.at(static_cast<std::size_t>(i)) = 1;
    t.add_term(m, Laurent::one(f));
    return t;
}

int TestFunction::degree() const {
    int best = -1;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (int e : m) s += e;
        best = std::max(best, s);
    }
    return best;
}

AffineForm TestFunction::as_affine() const {
    if (degree() > 1) throw DomainError("test function is not affine");
    AffineForm a;
    a.y = Laurent::zero(f_);
    a.beta.assign(static_cast<std::size_t>(d_), Laurent::zero(f_));
    for (const auto& [m, c] : terms_) {
        auto it = std::find(m.begin(), m.end(), 1);
        if (it == m.end()) a.y = c;
        else a.beta[static_cast<std::size_t>(it - m.begin())] = c;
    }
    return a;
}

void TestFunction::add_term(const Monomial& m, const Laurent& c) {
    if (static_cast<int>(m.size()) != d_) throw DomainError("monomial dimension mismatch");
    auto it = terms_.find(m);
    Laurent s = it == terms_.end() ? c : it->second + c;
    if (s.is_exact_zero()) {
        if (it != terms_.end()) terms_.erase(it);
        return;
    }
    terms_[m] = s;
}

TestFunction TestFunction::operator+(const TestFunction& o) const {
    TestFunction r = *this;
    for (const auto& [m, c] : o.terms_) r.add_term(m, c);
    return r;
}

TestFunction TestFunction::operator*(const TestFunction& o) const {
    if (o.d_ != d_) throw DomainError("dimension mismatch");
    TestFunction r(f_, d_);
    for (const auto& [ma, a] : terms_)
        for (const auto& [mb, b] : o.terms_) {
            Monomial m(ma.size());
            for (std::size_t i = 0; i < m.size(); ++i) m[i] = ma[i] + mb[i];
            r.add_term(m, a * b);
        }
    return r;
}

TestFunction TestFunction::scale(const Laurent& c) const {
    TestFunction r(f_, d_);
    for (const auto& [m, a] : terms_) r.add_term(m, a * c);
    return r;
}

Laurent TestFunction::eval(const Point& x) const {
    if (static_cast<int>(x.size()) != d_) throw DomainError("point dimension mismatch");
    Laurent s = Laurent::zero(f_);
    for (const auto& [m, a] : terms_) {
        Laurent p = a;
        for (std::size_t i = 0; i < m.size(); ++i)
            for (int e = 0; e < m[i]; ++e) p = p * x[i];
        s = s + p;
    }
    return s;
}

AbsExponent TestFunction::variation_exp(int m, int R) const {
    AbsExponent best = AbsExponent::neg_infinity();
    for (const auto& [mono, a] : terms_) {
        int s = 0;
        for (int e : mono) s += e;
        if (s == 0 || a.is_exact_zero()) continue;
        int ub = a.degree_upper_bound();
        for (int g = 1; g <= s; ++g) best = max(best, AbsExponent(ub + (s - g) * R - m * g));
    }
    return best;
}

std::string TestFunction::str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        if (!s.empty()) s += " + ";
        s += "(" + it->second.str() + ")";
        for (std::size_t i = 0; i < it->first.size(); ++i) {
            if (it->first[i] == 0) continue;
            s += "*x" + std::to_string(i + 1);
            if (it->first[i] > 1) s += "^" + std::to_string(it->first[i]);
        }
    }
    return s;
}

std::string ball_str(const UltraBall& b) {
    return "B(" + point_str(b.center()) + ", q^" + std::to_string(b.radius_exp()) + ")";
}

// ---------------------------------------------------------------- cell engine

namespace {

int growth_exp(const UltraBall& U) {
    int R = std::max(0, U.radius_exp());
    AbsExponent c = sup_norm(U.center());
    if (!c.is_neg_infinity()) R = std::max(R, static_cast<int>(c.value().ceil()));
    return R;
}

AbsExponent family_variation(const std::vector<TestFunction>& fs, int m, int R) {
    AbsExponent v = AbsExponent::neg_infinity();
    for (const auto& f : fs) v = max(v, f.variation_exp(m, R));
    return v;
}

std::uint64_t cells_at(const UltraBall& b, int M, std::uint64_t budget) {
    long double c = std::pow(static_cast<long double>(b.field()->q()),
                             static_cast<long double>(M + b.radius_exp()) * b.dim());
    if (c > static_cast<long double>(budget)) return budget + 1;
    return static_cast<std::uint64_t>(c + 0.5L);
}

struct CellValues {
    int M = 0;
    AbsExponent variation;
    std::vector<AbsExponent> vals;
    AbsExponent max_val;
};

/// Values of max_i |f_i| at the representatives of the first grid, from
/// resolution M0 up, whose maximum beats the variation bound.
CellValues certified_cells(const std::vector<TestFunction>& fs, const UltraBall& b, int M0, int R,
                           std::uint64_t budget) {
    for (int M = std::max(M0, -b.radius_exp());; ++M) {
        if (cells_at(b, M, budget) > budget) throw PrecisionInsufficient("cell budget exceeded on " + ball_str(b));
        CellValues cv;
        cv.M = M;
        cv.variation = family_variation(fs, M, R);
        CellGrid g(b, M);
        cv.vals.resize(g.size());
        for (std::uint64_t i = 0; i < g.size(); ++i) {
            Point z = g.representative(i);
            AbsExponent v = AbsExponent::neg_infinity();
            for (const auto& f : fs) v = max(v, f.eval(z).abs());
            cv.vals[i] = v;
            cv.max_val = max(cv.max_val, v);
        }
        if (cv.variation.is_neg_infinity() || cv.variation < cv.max_val) return cv;
    }
}

struct BallEval {
    std::optional<AbsExponent> norm;
    std::vector<std::optional<ExactMeasure>> bands;  // index j: k = top - j
};

BallEval eval_grid(const std::vector<TestFunction>& fs, const UltraBall& b, int top, int J, int R,
                   std::uint64_t budget) {
    BallEval e;
    e.bands.assign(static_cast<std::size_t>(J + 1), std::nullopt);
    const int kmin = top - J;
    int M0 = -b.radius_exp();
    while (true) {
        AbsExponent v = family_variation(fs, M0, R);
        if (v.is_neg_infinity() || v < AbsExponent(kmin)) break;
        ++M0;
    }
    CellValues cv;
    try {
        cv = certified_cells(fs, b, M0, R, budget);
    } catch (const PrecisionInsufficient&) {
        return e;
    }
    e.norm = cv.max_val;
    CellGrid g(b, cv.M);
    for (int j = 0; j <= J; ++j) {
        const AbsExponent k(top - j);
        BigInt in = 0;
        bool open = false;
        for (const auto& v : cv.vals) {
            if (v <= k && cv.variation <= k) ++in;
            else if (k < v && cv.variation < v) continue;
            else open = true;
        }
        if (!open) e.bands[static_cast<std::size_t>(j)] = g.cell_measure().times(in);
    }
    return e;
}

/// Uncertified coefficients (known only as O(T^p)) are dropped and carried as
/// an error bound; a band or norm is decided only when that error cannot move it.
BallEval eval_affine(const AffineForm& a, const UltraBall& b, int top, int J) {
    BallEval e;
    e.bands.assign(static_cast<std::size_t>(J + 1), std::nullopt);
    AffineForm known = a;
    AbsExponent err = AbsExponent::neg_infinity();
    for (auto& x : known.beta) {
        if (x.is_certified()) continue;
        err = max(err, AbsExponent(x.degree_upper_bound() + b.radius_exp()));
        x = Laurent::zero(x.field());
    }
    if (!known.y.is_certified()) {
        err = max(err, AbsExponent(known.y.degree_upper_bound()));
        known.y = Laurent::zero(known.y.field());
    }
    try {
        AbsExponent s = sup_linear_on_ball(known, b);
        if (err < s || err.is_neg_infinity()) e.norm = s;
    } catch (const PrecisionInsufficient&) {
        return e;
    }
    if (!e.norm) return e;
    for (int j = 0; j <= J; ++j) {
        if (AbsExponent(top - j) < err) continue;
        try {
            e.bands[static_cast<std::size_t>(j)] = sublevel_measure(known, top - j + 1, b);
        } catch (const PrecisionInsufficient&) {
        }
    }
    return e;
}

std::vector<UltraBall> sub_balls(const UltraBall& U, int m) {
    std::vector<UltraBall> out;
    for (int res = -U.radius_exp(); res <= m; ++res) {
        CellGrid g(U, res);
        for (std::uint64_t i = 0; i < g.size(); ++i) out.push_back(g.cell(i));
    }
    return out;
}

std::optional<PosReal> max_opt(const std::optional<PosReal>& a, const std::optional<PosReal>& b) {
    if (!a) return b;
    if (!b) return a;
    return max(*a, *b);
}

}  // namespace

AbsExponent norm_on_ball(const TestFunction& f, const UltraBall& b, std::uint64_t cellBudget) {
    if (f.is_affine()) return sup_linear_on_ball(f.as_affine(), b);
    return certified_cells({f}, b, -b.radius_exp(), growth_exp(b), cellBudget).max_val;
}

GoodCertificate check_good(const std::vector<TestFunction>& fs, const UltraBall& U, const PosReal& C,
                           const Rational& alpha, int m, int J, const GoodOptions& opt) {
    if (fs.empty()) throw DomainError("empty family");
    if (J < 0) throw DomainError("J must be >= 0");
    if (!(alpha > Rational(0))) throw DomainError("alpha must be positive");
    for (const auto& f : fs)
        if (f.dim() != U.dim()) throw DomainError("test function and ball dimensions differ");
    const std::uint32_t q = U.field()->q();
    const int R = growth_exp(U);
    const bool closed = fs.size() == 1 && fs[0].is_affine() && !opt.force_grid;
    std::optional<AffineForm> aff;
    if (closed) aff = fs[0].as_affine();
    const auto balls = sub_balls(U, m);

    struct Partial {
        std::optional<PosReal> worst;
        std::vector<GoodFailure> failures;
        std::uint64_t checks = 0, undecided = 0, failure_count = 0;
    };
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(balls.size())));
    std::vector<Partial> parts(static_cast<std::size_t>(jobs));
    auto work = [&](int id) {
        Partial& p = parts[static_cast<std::size_t>(id)];
        std::size_t lo = balls.size() * static_cast<std::size_t>(id) / static_cast<std::size_t>(jobs);
        std::size_t hi = balls.size() * static_cast<std::size_t>(id + 1) / static_cast<std::size_t>(jobs);
        for (std::size_t bi = lo; bi < hi; ++bi) {
            const UltraBall& B = balls[bi];
            BallEval e = closed ? eval_affine(*aff, B, opt.eps_top, J)
                                : eval_grid(fs, B, opt.eps_top, J, R, opt.cell_budget);
            const BigRational lamB = measure(B).value();
            for (int j = 0; j <= J; ++j) {
                ++p.checks;
                const int k = opt.eps_top - j;
                const auto& lhs = e.bands[static_cast<std::size_t>(j)];
                if (!e.norm || !lhs) {
                    ++p.undecided;
                    continue;
                }
                if (lhs->is_zero() || e.norm->is_neg_infinity()) continue;
                PosReal scale = PosReal::q_pow(q, alpha * (e.norm->value() - Rational(k)));
                PosReal ratio = PosReal::from_rational(lhs->value() / lamB) * scale / C;
                p.worst = max_opt(p.worst, ratio);
                if (!(PosReal::from_int(1) < ratio)) continue;
                ++p.failure_count;
                if (p.failures.size() < opt.max_failures_kept) {
                    PosReal rhs = C * PosReal::q_pow(q, alpha * (Rational(k) - e.norm->value())) *
                                  PosReal::from_rational(lamB);
                    p.failures.push_back({ball_str(B), k, lhs->str(), rhs.str()});
                }
            }
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> th;
        for (int i = 0; i < jobs; ++i) th.emplace_back(work, i);
        for (auto& t : th) t.join();
    }

    GoodCertificate c;
    c.C = C;
    c.alpha = alpha;
    c.m = m;
    c.J = J;
    c.eps_top = opt.eps_top;
    c.balls = balls.size();
    for (auto& p : parts) {
        c.worst_ratio = max_opt(c.worst_ratio, p.worst);
        c.checks += p.checks;
        c.undecided += p.undecided;
        c.failure_count += p.failure_count;
        for (auto& fl : p.failures)
            if (c.failures.size() < opt.max_failures_kept) c.failures.push_back(std::move(fl));
    }
    return c;
}

std::optional<PosReal> min_C_for_alpha(const std::vector<TestFunction>& fs, const UltraBall& U,
                                       const Rational& alpha, int m, int J, const GoodOptions& opt) {
    GoodCertificate c = check_good(fs, U, PosReal::from_int(1), alpha, m, J, opt);
    if (c.undecided) throw PrecisionInsufficient("some (ball, eps) pair is undecided");
    return c.worst_ratio;
}

std::string certificate_json(const GoodCertificate& c) {
    nlohmann::json j;
    j["C"] = c.C.str();
    j["alpha"] = c.alpha.str();
    j["m"] = c.m;
    j["J"] = c.J;
    j["epsTop"] = c.eps_top;
    j["worstRatio"] = c.worst_ratio ? c.worst_ratio->str() : std::string("0");
    j["worstRatioApprox"] = c.worst_ratio ? c.worst_ratio->to_double() : 0.0;
    j["balls"] = c.balls;
    j["checks"] = c.checks;
    j["undecided"] = c.undecided;
    j["pass"] = c.pass();
    j["failureCount"] = c.failure_count;
    nlohmann::json fl = nlohmann::json::array();
    for (const auto& f : c.failures) {
        fl.push_back({{"ball", f.ball}, {"eps", "q^" + std::to_string(f.eps_exp) + "+"}, {"lhs", f.lhs},
                      {"rhs", f.rhs}});
    }
    j["failures"] = fl;
    return j.dump(2);
}

// ---------------------------------------------------------------- closure properties

Lemma42Report lemma42_property_suite(const TestFunction& f, const TestFunction& g, const UltraBall& U,
                                     const PosReal& C, const Rational& alpha, int m, int J) {
    const FqPtr& F = U.field();
    auto top_of = [&](const std::vector<TestFunction>& fs) {
        AbsExponent s;
        for (const auto& h : fs) s = max(s, norm_on_ball(h, U));
        return s.is_neg_infinity() ? 0 : static_cast<int>(s.value().ceil());
    };
    auto cert = [&](const std::vector<TestFunction>& fs, const PosReal& c, const Rational& a, bool grid) {
        GoodOptions o;
        o.eps_top = top_of(fs);
        o.force_grid = grid;
        return check_good(fs, U, c, a, m, J, o);
    };
    Lemma42Report r;
    GoodCertificate cf = cert({f}, C, alpha, false);

    Laurent c = Laurent::monomial(F, 3, F->one());
    GoodCertificate cs = cert({f.scale(c)}, C, alpha, false);
    r.scaling = cs.pass() == cf.pass() && cs.worst_ratio.has_value() == cf.worst_ratio.has_value() &&
                (!cs.worst_ratio || *cs.worst_ratio == *cf.worst_ratio);

    GoodCertificate cg = cert({g}, C, alpha, false);
    GoodCertificate csup = cert({f, g}, C, alpha, true);
    r.sup = !(cf.pass() && cg.pass()) || csup.pass();

    // |1 + x_1 / T^(R+1)| = 1 on U
    int R = growth_exp(U);
    TestFunction u = TestFunction::constant(F, U.dim(), Laurent::one(F)) +
                     TestFunction::variable(F, U.dim(), 0).scale(Laurent::monomial(F, -(R + 1), F->one()));
    GoodCertificate cu = cert({u * f}, C, alpha, true);
    r.comparable = cu.pass() == cf.pass() && cu.worst_ratio.has_value() == cf.worst_ratio.has_value() &&
                   (!cu.worst_ratio || *cu.worst_ratio == *cf.worst_ratio);

    GoodCertificate cw = cert({f}, C * PosReal::from_int(2), alpha * Rational(1, 2), false);
    r.weakening = !cf.pass() || cw.pass();

    r.restriction = true;
    if (cf.pass()) {
        for (const auto& child : U.children()) {
            GoodOptions o;
            o.eps_top = top_of({f});
            if (!check_good({f}, child, C, alpha, m, J, o).pass()) r.restriction = false;
        }
    }
    return r;
}

int three_power_dilation(std::uint32_t q, int k) {
    int c = 0;
    for (std::uint64_t p = 1; p < 3; p *= q) ++c;
    return k * c;
}

// ---------------------------------------------------------------- flow coefficients

namespace {

/// The form divided by the leading unit and power of T of its first nonzero
/// coefficient; certificates with bands taken from the norm do not see either.
std::optional<AffineForm> normalize_form(const AffineForm& a) {
    std::vector<const Laurent*> parts{&a.y};
    for (const auto& b : a.beta) parts.push_back(&b);
    for (const Laurent* p : parts) {
        if (p->is_exact_zero() || !p->is_certified()) continue;
        int deg = p->degree();
        FqPtr f = p->field();
        Laurent inv = Laurent::monomial(f, -deg, f->inv(p->coeff(deg)));
        AffineForm out;
        out.y = a.y * inv;
        for (const auto& b : a.beta) out.beta.push_back(b * inv);
        return out;
    }
    return std::nullopt;
}

std::string form_key(const AffineForm& a) {
    std::string s = a.y.str();
    for (const auto& b : a.beta) s += "|" + b.str();
    return s;
}

}  // namespace

FlowGoodReport certify_affine_family(const std::vector<AffineForm>& forms, const UltraBall& Ud, const PosReal& C,
                                     const Rational& alpha, int m, int J, int jobs) {
    FlowGoodReport rep;
    rep.C = C;
    rep.alpha = alpha;
    rep.forms = forms.size();
    std::map<std::string, AffineForm> distinct;
    for (const auto& form : forms) {
        auto nf = normalize_form(form);
        if (nf) distinct.emplace(form_key(*nf), *nf);
    }
    rep.distinct = distinct.size();
    std::vector<AffineForm> list;
    for (auto& [k, a] : distinct) list.push_back(std::move(a));
    const FqPtr& F = Ud.field();

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto work = [&]() {
        std::uint64_t fails = 0, open = 0;
        std::optional<PosReal> worst;
        for (std::size_t i = next++; i < list.size(); i = next++) {
            TestFunction t = TestFunction::affine(F, list[i]);
            GoodOptions o;
            try {
                AbsExponent s = sup_linear_on_ball(list[i], Ud);
                o.eps_top = s.is_neg_infinity() ? 0 : static_cast<int>(s.value().ceil());
            } catch (const PrecisionInsufficient&) {
                ++open;
                continue;
            }
            GoodCertificate c = check_good(t, Ud, C, alpha, m, J, o);
            fails += c.failure_count ? 1 : 0;
            open += c.undecided ? 1 : 0;
            if (c.worst_ratio) worst = max_opt(worst, *c.worst_ratio * C);
        }
        std::lock_guard<std::mutex> lk(mu);
        rep.failures += fails;
        rep.undecided += open;
        rep.needed_C = max_opt(rep.needed_C, worst);
    };
    const int nj = std::max(1, jobs);
    if (nj == 1) {
        work();
    } else {
        std::vector<std::thread> th;
        for (int i = 0; i < nj; ++i) th.emplace_back(work);
        for (auto& t : th) t.join();
    }
    return rep;
}

FlowGoodReport certify_flow_coefficients(const HyperplaneData& h, const UltraBall& U, const PosReal& C, int D,
                                         int m, int J, int jobs) {
    const int n = h.n;
    if (n < 2) throw DomainError("n must be >= 2");
    const int dil = three_power_dilation(h.field->q(), n + 1);
    std::vector<AffineForm> forms;
    for (int l = 1; l <= n + 1; ++l) {
        enumerate_theta_wedge(h.field, n, l, D, [&](const MultiVector& w) {
            for (const auto& [I, form] : ux_coefficient_forms(w, h)) forms.push_back(form);
        });
    }
    FlowGoodReport rep = certify_affine_family(forms, U.dilate(dil), C, Rational(1, n - 1), m, J, jobs);
    rep.dilation = dil;
    return rep;
}

std::optional<PosReal> sharp_affine_constant(const FqPtr& f, int d, const Rational& alpha, int D, int m, int J) {
    const std::uint64_t per = poly_count(f->q(), D);
    std::uint64_t total = 1;
    for (int i = 0; i <= d; ++i) total *= per;
    UltraBall U0 = UltraBall::unit(f, d);
    std::optional<PosReal> best;
    for (std::uint64_t idx = 1; idx < total; ++idx) {
        std::uint64_t r = idx;
        AffineForm a;
        a.y = Laurent::from_poly(Poly::from_index(f, r % per, D));
        r /= per;
        for (int i = 0; i < d; ++i) {
            a.beta.push_back(Laurent::from_poly(Poly::from_index(f, r % per, D)));
            r /= per;
        }
        TestFunction t = TestFunction::affine(f, a);
        GoodOptions o;
        o.eps_top = static_cast<int>(sup_linear_on_ball(a, U0).value().ceil());
        best = max_opt(best, min_C_for_alpha({t}, U0, alpha, m, J, o));
    }
    return best;
}

}  // namespace fflab
