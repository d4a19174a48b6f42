#include "fflab/haar.hpp"

#include <optional>

#include <map>
#include <ostream>
#include <set>
#include <thread>

namespace fflab {

namespace {

Laurent truncate_above(const FqPtr& f, const Laurent& x, int r) {
    if (!x.is_exact() && x.prec() > r + 1)
        throw PrecisionInsufficient("ball center unknown above the radius exponent " + std::to_string(r));
    std::map<int, FqElem> t;
    for (const auto& [e, c] : x.terms())
        if (e > r) t[e] = c;
    return Laurent::from_terms(f, t);
}

std::uint64_t checked_pow(std::uint64_t q, std::int64_t e) {
    if (e < 0) throw DomainError("negative cell exponent");
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < e; ++i) {
        if (r > (UINT64_MAX / q)) throw DomainError("grid too large to enumerate");
        r *= q;
    }
    return r;
}

/// |x| <= q^e, certified.
bool abs_at_most(const Laurent& x, int e) { return x.abs_less_than(e + 1); }

}  // namespace

UltraBall::UltraBall(FqPtr f, Point center, int radiusExp) : f_(std::move(f)), r_(radiusExp) {
    if (center.empty()) throw DomainError("ball of dimension 0");
    center_.reserve(center.size());
    for (const auto& c : center) center_.push_back(truncate_above(f_, c, r_));
}

UltraBall UltraBall::unit(FqPtr f, int d) {
    Point c(static_cast<std::size_t>(d), Laurent::zero(f));
    return UltraBall(f, c, 0);
}

bool UltraBall::contains(const Point& x) const {
    if (x.size() != center_.size()) throw DomainError("dimension mismatch in ball membership");
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!abs_at_most(x[i] - center_[i], r_)) return false;
    return true;
}

UltraBall UltraBall::recenter(const Point& c) const {
    if (!contains(c)) throw DomainError("recentering at a point outside the ball");
    return UltraBall(f_, c, r_);
}

std::vector<UltraBall> UltraBall::children() const {
    CellGrid g(*this, -(r_ - 1));
    std::vector<UltraBall> out;
    out.reserve(g.size());
    for (std::uint64_t i = 0; i < g.size(); ++i) out.push_back(g.cell(i));
    return out;
}

ExactMeasure measure(const UltraBall& b) {
    return ExactMeasure::q_power(b.field()->q(), static_cast<std::int64_t>(b.radius_exp()) * b.dim());
}

CellGrid::CellGrid(UltraBall ball, int m) : ball_(std::move(ball)), m_(m) {
    digits_ = ball_.radius_exp() + m_;
    if (digits_ < 0) throw DomainError("grid resolution finer than the ball requires m >= -radiusExp");
    size_ = checked_pow(ball_.field()->q(), static_cast<std::int64_t>(digits_) * ball_.dim());
}

Point CellGrid::representative(std::uint64_t idx) const {
    const auto& f = ball_.field();
    const std::uint32_t q = f->q();
    const int d = ball_.dim();
    std::vector<std::uint32_t> dig(static_cast<std::size_t>(digits_) * d);
    for (std::size_t k = dig.size(); k-- > 0;) {
        dig[k] = static_cast<std::uint32_t>(idx % q);
        idx /= q;
    }
    Point x;
    x.reserve(d);
    for (int i = 0; i < d; ++i) {
        std::map<int, FqElem> t;
        for (int k = 0; k < digits_; ++k) {
            std::uint32_t v = dig[static_cast<std::size_t>(i) * digits_ + k];
            if (v) t[ball_.radius_exp() - k] = f->element(v);
        }
        x.push_back(ball_.center()[i] + Laurent::from_terms(f, t));
    }
    return x;
}

UltraBall CellGrid::cell(std::uint64_t idx) const { return UltraBall(ball_.field(), representative(idx), -m_); }

ExactMeasure CellGrid::cell_measure() const {
    return ExactMeasure::q_power(ball_.field()->q(), -static_cast<std::int64_t>(m_) * ball_.dim());
}

Laurent AffineForm::eval(const Point& x) const {
    if (x.size() != beta.size()) throw DomainError("dimension mismatch in affine form");
    Laurent s = y;
    for (std::size_t i = 0; i < x.size(); ++i) s = s + beta[i] * x[i];
    return s;
}

AbsExponent sup_linear_on_ball(const AffineForm& f, const UltraBall& b) {
    // max(|f(c)|, q^r |beta_i|); uncertified entries are accepted when a certified
    // entry provably dominates them.
    AbsExponent best = AbsExponent::neg_infinity();
    std::optional<int> loose;
    auto take = [&](const Laurent& x, int shift) {
        if (x.is_certified()) {
            AbsExponent a = x.abs();
            if (!a.is_neg_infinity()) best = max(best, AbsExponent(a.value() + Rational(shift)));
        } else {
            int ub = x.degree_upper_bound() + shift;
            loose = loose ? std::max(*loose, ub) : ub;
        }
    };
    take(f.eval(b.center()), 0);
    for (const auto& bi : f.beta) take(bi, b.radius_exp());
    if (loose && !(AbsExponent(*loose) <= best))
        throw PrecisionInsufficient("sup over the ball depends on an uncertified coefficient");
    return best;
}

Certificate Certificate::affine(const AbsExponent& gradExp, int j) {
    if (gradExp.is_neg_infinity()) return constant();
    return {static_cast<int>(gradExp.value().floor()) + j + 1};
}

ExactMeasure exact_measure_of(const CellPredicate& pred, const CellGrid& grid, const Certificate& cert,
                              int jobs) {
    if (grid.resolution() < cert.min_resolution)
        throw PrecisionInsufficient("grid resolution " + std::to_string(grid.resolution()) +
                                    " below the constancy certificate " + std::to_string(cert.min_resolution));
    const std::uint64_t n = grid.size();
    jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::uint64_t>(n, 64))));
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(jobs), 0);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
    auto work = [&](int w) {
        try {
            std::uint64_t lo = n * w / jobs, hi = n * (w + 1) / jobs;
            std::uint64_t c = 0;
            for (std::uint64_t i = lo; i < hi; ++i)
                if (pred(grid.representative(i))) ++c;
            counts[w] = c;
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> ts;
        for (int w = 0; w < jobs; ++w) ts.emplace_back(work, w);
        for (auto& t : ts) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    BigInt total = 0;
    for (auto c : counts) total += c;
    return grid.cell_measure().times(total);
}

bool AffinePredicate::holds(const Point& x) const {
    Laurent v = f.eval(x);
    if (mod_lambda) {
        if (k > 0) return true;
        v = v.frac_part();
    }
    return v.abs_less_than(k);
}

namespace {

/// {x in B : |a + beta (x - c)| < q^k} where spread g = r + max|beta_i|.
BallClass classify_sublevel(const Laurent& a, const AbsExponent& g, int k) {
    if (g.is_neg_infinity() || !abs_at_most(a, static_cast<int>(g.value().num())))
        return {a.abs_less_than(k) ? BallClass::Full : BallClass::Empty, 0};
    int gi = static_cast<int>(g.value().num());
    if (k - 1 >= gi) return {BallClass::Full, 0};
    return {BallClass::Partial, k - 1 - gi};
}

}  // namespace

BallClass classify(const AffinePredicate& p, const UltraBall& b) {
    AbsExponent grad = p.f.grad_exp();
    AbsExponent g = grad.is_neg_infinity() ? grad : AbsExponent(grad.value() + Rational(b.radius_exp()));
    Laurent a = p.f.eval(b.center());
    if (!p.mod_lambda) return classify_sublevel(a, g, p.k);
    if (p.k > 0) return {BallClass::Full, 0};
    if (!g.is_neg_infinity() && g.value() >= Rational(0)) {
        // The image covers F/Lambda uniformly; {|z| < q^k} has relative size q^k there.
        if (p.k == 0) return {BallClass::Full, 0};
        return {BallClass::Partial, p.k};
    }
    // Spread below 1: the fractional part moves affinely across the ball.
    return classify_sublevel(a.frac_part(), g, p.k);
}

ExactMeasure sublevel_measure(const AffineForm& f, int k, const UltraBall& b) {
    BallClass c = classify(AffinePredicate{f, k, false}, b);
    switch (c.kind) {
        case BallClass::Empty: return ExactMeasure::zero(b.field()->q());
        case BallClass::Full: return measure(b);
        case BallClass::Partial: return measure(b).times_q_power(c.frac_exp);
    }
    return {};
}

ExactMeasure strip_measure(const Point& beta, const Laurent& y, int j, const UltraBall& b) {
    AffineForm f{beta, y};
    AbsExponent g = f.grad_exp();
    if (!g.is_neg_infinity() && g < AbsExponent(0))
        throw DomainError("strip needs max|beta_i| >= 1");
    return sublevel_measure(f, -j, b);
}

namespace {

std::string predicate_key(const AffinePredicate& p) {
    AffineForm f = p.f;
    if (p.mod_lambda && (f.y.is_exact() || f.y.prec() <= 0)) f.y = f.y.frac_part();
    FqElem lead{0};
    for (const auto& x : f.beta) {
        if (x.is_certified() && !x.is_exact_zero()) {
            lead = x.coeff(x.degree());
            break;
        }
    }
    if (lead.v == 0 && f.y.is_certified() && !f.y.is_exact_zero()) lead = f.y.coeff(f.y.degree());
    std::string key = p.mod_lambda ? "L|" : "A|";
    const auto& fld = f.y.field();
    FqElem s = lead.v == 0 ? fld->one() : fld->inv(lead);
    for (const auto& x : f.beta) key += x.scale(s).str() + "|";
    key += f.y.scale(s).str();
    return key;
}

}  // namespace

ExactMeasure union_measure(const std::vector<AffinePredicate>& preds, const UltraBall& b,
                           std::uint64_t nodeBudget) {
    const std::uint32_t q = b.field()->q();
    // Identical sets (unit multiples, or fractional-part equal) keep only the loosest bound.
    std::map<std::string, AffinePredicate> uniq;
    for (const auto& p : preds) {
        auto key = predicate_key(p);
        auto it = uniq.find(key);
        if (it == uniq.end())
            uniq.emplace(key, p);
        else if (p.k > it->second.k)
            it->second = p;
    }
    std::vector<AffinePredicate> active;
    for (auto& [k, p] : uniq) active.push_back(p);

    std::uint64_t nodes = 0;
    ExactMeasure total = ExactMeasure::zero(q);
    std::function<void(const UltraBall&, const std::vector<const AffinePredicate*>&)> visit =
        [&](const UltraBall& ball, const std::vector<const AffinePredicate*>& cand) {
            if (++nodes > nodeBudget)
                throw PrecisionInsufficient("union measure exceeded its node budget of " +
                                            std::to_string(nodeBudget));
            std::vector<const AffinePredicate*> partial;
            int fracExp = 0;
            for (const auto* p : cand) {
                BallClass c = classify(*p, ball);
                if (c.kind == BallClass::Full) {
                    total += measure(ball);
                    return;
                }
                if (c.kind == BallClass::Partial) {
                    partial.push_back(p);
                    fracExp = c.frac_exp;
                }
            }
            if (partial.empty()) return;
            if (partial.size() == 1) {
                total += measure(ball).times_q_power(fracExp);
                return;
            }
            for (const auto& child : ball.children()) visit(child, partial);
        };
    std::vector<const AffinePredicate*> all;
    for (const auto& p : active) all.push_back(&p);
    visit(b, all);
    return total;
}

std::string point_str(const Point& x) {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) s += ", ";
        s += x[i].str();
    }
    return s + ")";
}

void write_grid_tsv(std::ostream& os, const CellGrid& grid, const CellPredicate& pred) {
    os << "cell\trepresentative\tvalue\n";
    for (std::uint64_t i = 0; i < grid.size(); ++i) {
        Point x = grid.representative(i);
        os << i << '\t' << point_str(x) << '\t' << (pred(x) ? 1 : 0) << '\n';
    }
}

}  // namespace fflab
