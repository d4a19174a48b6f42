#include "fflab/laurent.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace fflab {

namespace {

int combine_prec(int ub, int p) { return p == Laurent::kExact ? Laurent::kExact : ub + p; }

}  // namespace

Laurent Laurent::monomial(FqPtr f, int exp, FqElem c) {
    Laurent r(std::move(f));
    if (c.v != 0) {
        r.hi_ = exp;
        r.coeffs_ = {c};
    }
    return r;
}

Laurent Laurent::from_terms(FqPtr f, const std::map<int, FqElem>& terms, int prec) {
    Laurent r(std::move(f));
    r.prec_ = prec;
    int lo = INT_MAX, hi = INT_MIN;
    for (const auto& [e, c] : terms) {
        if (c.v == 0 || (prec != kExact && e < prec)) continue;
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }
    if (hi == INT_MIN) {
        r.normalize();
        return r;
    }
    if (prec != kExact) lo = std::min(lo, prec);
    r.hi_ = hi;
    r.coeffs_.assign(static_cast<std::size_t>(hi - lo) + 1, FqElem{0});
    for (const auto& [e, c] : terms)
        if (e >= lo && e <= hi) r.coeffs_[static_cast<std::size_t>(hi - e)] = c;
    r.normalize();
    return r;
}

Laurent Laurent::from_poly(const Poly& p) {
    std::map<int, FqElem> t;
    for (int k = 0; k <= p.degree(); ++k) t[k] = p.coeff(k);
    return from_terms(p.field(), t);
}

Laurent Laurent::from_rational(const RationalFunction& r, int prec) {
    Laurent num = from_poly(r.num());
    if (num.is_exact_zero()) return Laurent(r.den().field());
    Laurent den = from_poly(r.den());
    // den exact, so its inverse is known to any depth; pad for the numerator's degree.
    Laurent inv = den.invert(prec - r.num().degree());
    return (num * inv).with_prec(prec);
}

Laurent Laurent::big_o(FqPtr f, int prec) {
    Laurent r(std::move(f));
    r.prec_ = prec;
    return r;
}

void Laurent::normalize() {
    std::size_t lead = 0;
    while (lead < coeffs_.size() && coeffs_[lead].v == 0) ++lead;
    if (lead == coeffs_.size()) {
        coeffs_.clear();
        hi_ = 0;
        return;
    }
    if (lead > 0) {
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(lead));
        hi_ -= static_cast<int>(lead);
    }
    if (is_exact()) {
        while (!coeffs_.empty() && coeffs_.back().v == 0) coeffs_.pop_back();
    } else {
        // keep the known range exactly down to prec
        int lo = hi_ - static_cast<int>(coeffs_.size()) + 1;
        if (hi_ < prec_) {
            coeffs_.clear();
            hi_ = 0;
        } else if (lo < prec_) {
            coeffs_.resize(static_cast<std::size_t>(hi_ - prec_) + 1);
            normalize();
        } else if (lo > prec_) {
            coeffs_.resize(static_cast<std::size_t>(hi_ - prec_) + 1, FqElem{0});
        }
    }
}

int Laurent::degree() const {
    if (!coeffs_.empty()) return hi_;
    if (is_exact()) throw DomainError("degree of zero");
    throw PrecisionInsufficient("leading term of O(T^" + std::to_string(prec_ - 1) + ") is not certified");
}

AbsExponent Laurent::abs() const {
    if (is_exact_zero()) return AbsExponent::neg_infinity();
    return AbsExponent(degree());
}

int Laurent::degree_upper_bound() const {
    if (!coeffs_.empty()) return hi_;
    if (is_exact()) return kExact;
    return prec_ - 1;
}

FqElem Laurent::coeff(int e) const {
    if (!is_exact() && e < prec_)
        throw PrecisionInsufficient("coefficient of T^" + std::to_string(e) + " is below the known precision");
    if (coeffs_.empty() || e > hi_) return FqElem{0};
    int idx = hi_ - e;
    if (idx >= static_cast<int>(coeffs_.size())) return FqElem{0};
    return coeffs_[static_cast<std::size_t>(idx)];
}

std::map<int, FqElem> Laurent::terms() const {
    std::map<int, FqElem> t;
    for (std::size_t k = 0; k < coeffs_.size(); ++k)
        if (coeffs_[k].v != 0) t[hi_ - static_cast<int>(k)] = coeffs_[k];
    return t;
}

Laurent Laurent::operator+(const Laurent& o) const {
    const FqPtr& f = f_ ? f_ : o.f_;
    int prec = std::max(prec_, o.prec_);
    Laurent r(f);
    r.prec_ = prec;
    if (coeffs_.empty() && o.coeffs_.empty()) {
        r.normalize();
        return r;
    }
    int hi = INT_MIN, lo = INT_MAX;
    auto span = [&](const Laurent& x) {
        if (x.coeffs_.empty()) return;
        hi = std::max(hi, x.hi_);
        lo = std::min(lo, x.hi_ - static_cast<int>(x.coeffs_.size()) + 1);
    };
    span(*this);
    span(o);
    if (prec != kExact) lo = std::max(lo, prec);
    if (hi < lo) {
        r.normalize();
        return r;
    }
    r.hi_ = hi;
    r.coeffs_.assign(static_cast<std::size_t>(hi - lo) + 1, FqElem{0});
    auto accumulate = [&](const Laurent& x) {
        for (std::size_t k = 0; k < x.coeffs_.size(); ++k) {
            int e = x.hi_ - static_cast<int>(k);
            if (e < lo) break;
            auto idx = static_cast<std::size_t>(hi - e);
            r.coeffs_[idx] = f->add(r.coeffs_[idx], x.coeffs_[k]);
        }
    };
    accumulate(*this);
    accumulate(o);
    r.normalize();
    return r;
}

Laurent Laurent::operator-() const {
    Laurent r = *this;
    for (auto& c : r.coeffs_) c = f_->neg(c);
    return r;
}

Laurent Laurent::operator-(const Laurent& o) const { return *this + (-o); }

Laurent Laurent::operator*(const Laurent& o) const {
    const FqPtr& f = f_ ? f_ : o.f_;
    if (is_exact_zero() || o.is_exact_zero()) return Laurent(f);
    int prec = std::max(combine_prec(degree_upper_bound(), o.prec_), combine_prec(o.degree_upper_bound(), prec_));
    Laurent r(f);
    r.prec_ = prec;
    if (coeffs_.empty() || o.coeffs_.empty()) {
        r.normalize();
        return r;
    }
    int hi = hi_ + o.hi_;
    std::size_t len = coeffs_.size() + o.coeffs_.size() - 1;
    if (prec != kExact) {
        if (hi < prec) {
            r.normalize();
            return r;
        }
        len = std::min(len, static_cast<std::size_t>(hi - prec) + 1);
    }
    r.hi_ = hi;
    r.coeffs_.assign(len, FqElem{0});
    for (std::size_t i = 0; i < coeffs_.size() && i < len; ++i) {
        if (coeffs_[i].v == 0) continue;
        for (std::size_t j = 0; j < o.coeffs_.size() && i + j < len; ++j)
            r.coeffs_[i + j] = f->add(r.coeffs_[i + j], f->mul(coeffs_[i], o.coeffs_[j]));
    }
    r.normalize();
    return r;
}

Laurent Laurent::scale(FqElem s) const {
    if (s.v == 0) return Laurent(f_);
    Laurent r = *this;
    for (auto& c : r.coeffs_) c = f_->mul(c, s);
    return r;
}

Laurent Laurent::shift(int k) const {
    Laurent r = *this;
    if (!r.coeffs_.empty()) r.hi_ += k;
    if (!is_exact()) r.prec_ += k;
    return r;
}

Laurent Laurent::invert(int precExp) const {
    if (is_exact_zero()) throw DomainError("inverse of zero in F");
    int d = degree();  // throws when uncertified
    int rp = is_exact() ? precExp : std::max(precExp, prec_ - 2 * d);
    int count = -d - rp + 1;
    Laurent r(f_);
    r.prec_ = rp;
    if (count <= 0) {
        r.normalize();
        return r;
    }
    FqElem ci = f_->inv(coeffs_[0]);
    std::vector<FqElem> y(static_cast<std::size_t>(count), FqElem{0});
    y[0] = ci;
    for (int k = 1; k < count; ++k) {
        FqElem s{0};
        for (int j = 1; j <= k; ++j) {
            FqElem xj = coeff(d - j);
            if (xj.v == 0) continue;
            s = f_->add(s, f_->mul(xj, y[static_cast<std::size_t>(k - j)]));
        }
        y[static_cast<std::size_t>(k)] = f_->neg(f_->mul(ci, s));
    }
    r.hi_ = -d;
    r.coeffs_ = std::move(y);
    r.normalize();
    return r;
}

Laurent Laurent::with_prec(int p) const {
    if (p == kExact || (!is_exact() && p <= prec_)) return *this;
    Laurent r = *this;
    r.prec_ = p;
    r.normalize();
    return r;
}

Laurent Laurent::poly_part() const {
    if (!is_exact() && prec_ > 0) throw PrecisionInsufficient("polynomial part needs all terms of exponent >= 0");
    std::map<int, FqElem> t;
    for (const auto& [e, c] : terms())
        if (e >= 0) t[e] = c;
    return from_terms(f_, t);
}

Laurent Laurent::frac_part() const {
    if (!is_exact() && prec_ > 0) throw PrecisionInsufficient("fractional part needs all terms of exponent >= 0");
    std::map<int, FqElem> t;
    for (const auto& [e, c] : terms())
        if (e < 0) t[e] = c;
    return from_terms(f_, t, prec_);
}

Poly Laurent::to_poly() const {
    Laurent pp = poly_part();
    std::vector<FqElem> c(pp.coeffs_.empty() ? 0 : static_cast<std::size_t>(pp.hi_) + 1, FqElem{0});
    for (const auto& [e, v] : pp.terms()) c[static_cast<std::size_t>(e)] = v;
    return Poly(f_, std::move(c));
}

bool Laurent::abs_less_than(int e) const {
    if (!coeffs_.empty() && hi_ >= e) return false;
    if (is_exact() || prec_ <= e) return true;
    throw PrecisionInsufficient("cannot decide |x| < q^" + std::to_string(e) + " with precision T^" +
                                std::to_string(prec_));
}

std::string Laurent::str() const {
    std::ostringstream os;
    bool first = true;
    for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        FqElem c = coeffs_[k];
        if (c.v == 0) continue;
        int e = hi_ - static_cast<int>(k);
        if (!first) os << " + ";
        first = false;
        if (e == 0) {
            os << f_->format(c);
            continue;
        }
        if (c != f_->one()) os << f_->format(c) << '*';
        os << 'T';
        if (e != 1) os << '^' << e;
    }
    if (!is_exact()) {
        if (!first) os << " + ";
        first = false;
        os << "O(T^" << (prec_ - 1) << ')';
    }
    if (first) os << '0';
    return os.str();
}

Laurent Laurent::parse(const FqPtr& f, const std::string& input) {
    std::string s;
    for (char ch : input)
        if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
    if (s.empty()) throw ConfigError("empty Laurent element");
    std::map<int, FqElem> terms;
    int prec = kExact;
    std::size_t i = 0;
    auto fail = [&](const std::string& why) { throw ConfigError("cannot parse Laurent element '" + input + "': " + why); };
    while (i < s.size()) {
        bool negative = false;
        if (s[i] == '+' || s[i] == '-') {
            negative = s[i] == '-';
            ++i;
        }
        std::size_t j = i;
        int depth = 0;
        while (j < s.size()) {
            char ch = s[j];
            if (ch == '[' || ch == '(') ++depth;
            if (ch == ']' || ch == ')') --depth;
            if (depth == 0 && (ch == '+' || ch == '-') && j > i && s[j - 1] != '^') break;
            ++j;
        }
        std::string term = s.substr(i, j - i);
        i = j;
        if (term.empty()) fail("empty term");
        auto read_exp = [&](const std::string& t) -> int {
            // t is "T", "T^k"
            if (t == "T") return 1;
            if (t.size() > 2 && t[0] == 'T' && t[1] == '^') {
                try {
                    return std::stoi(t.substr(2));
                } catch (const std::logic_error&) {
                    fail("bad exponent in '" + t + "'");
                }
            }
            fail("bad monomial '" + t + "'");
            return 0;
        };
        if (term.rfind("O(", 0) == 0) {
            if (term.back() != ')') fail("unterminated O()");
            std::string inner = term.substr(2, term.size() - 3);
            int k = inner == "1" ? 0 : read_exp(inner);
            prec = std::max(prec, k + 1);
            continue;
        }
        FqElem c = f->one();
        int e = 0;
        auto star = term.find('*');
        if (star != std::string::npos) {
            c = f->parse(term.substr(0, star));
            e = read_exp(term.substr(star + 1));
        } else if (term[0] == 'T') {
            e = read_exp(term);
        } else {
            c = f->parse(term);
        }
        if (negative) c = f->neg(c);
        auto it = terms.find(e);
        terms[e] = it == terms.end() ? c : f->add(it->second, c);
    }
    return from_terms(f, terms, prec);
}

AbsExponent sup_norm(const std::vector<Laurent>& v) {
    AbsExponent m = AbsExponent::neg_infinity();
    for (const auto& x : v) m = max(m, x.abs());
    return m;
}

Laurent laurent_arith(const Laurent& x, const Laurent& y, LaurentOp op, int precExp) {
    switch (op) {
        case LaurentOp::Add: return x + y;
        case LaurentOp::Mul: return x * y;
        case LaurentOp::Invert: return x.invert(precExp);
    }
    throw DomainError("unknown Laurent operation");
}

}  // namespace fflab
