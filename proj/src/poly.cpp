#include "fflab/poly.hpp"

#include <sstream>

#include "fflab/errors.hpp"

namespace fflab {

Poly::Poly(FqPtr f, std::vector<FqElem> coeffs) : f_(std::move(f)), c_(std::move(coeffs)) { trim(); }

Poly Poly::constant(FqPtr f, FqElem c) { return Poly(std::move(f), {c}); }

Poly Poly::monomial(FqPtr f, int deg, FqElem c) {
    std::vector<FqElem> v(static_cast<std::size_t>(deg) + 1, FqElem{0});
    v[static_cast<std::size_t>(deg)] = c;
    return Poly(std::move(f), std::move(v));
}

Poly Poly::from_index(FqPtr f, std::uint64_t index, int maxDeg) {
    std::vector<FqElem> v(static_cast<std::size_t>(maxDeg) + 1);
    const std::uint32_t q = f->q();
    for (auto& c : v) {
        c = FqElem{static_cast<std::uint32_t>(index % q)};
        index /= q;
    }
    return Poly(std::move(f), std::move(v));
}

void Poly::trim() {
    while (!c_.empty() && c_.back().v == 0) c_.pop_back();
}

FqElem Poly::coeff(int k) const {
    if (k < 0 || k >= static_cast<int>(c_.size())) return FqElem{0};
    return c_[static_cast<std::size_t>(k)];
}

Poly Poly::operator+(const Poly& o) const {
    const FqPtr& f = f_ ? f_ : o.f_;
    std::vector<FqElem> r(std::max(c_.size(), o.c_.size()), FqElem{0});
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f->add(coeff(static_cast<int>(i)), o.coeff(static_cast<int>(i)));
    return Poly(f, std::move(r));
}

Poly Poly::operator-() const {
    if (is_zero()) return *this;
    std::vector<FqElem> r(c_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f_->neg(c_[i]);
    return Poly(f_, std::move(r));
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::operator*(const Poly& o) const {
    const FqPtr& f = f_ ? f_ : o.f_;
    if (is_zero() || o.is_zero()) return Poly(f);
    std::vector<FqElem> r(c_.size() + o.c_.size() - 1, FqElem{0});
    for (std::size_t i = 0; i < c_.size(); ++i) {
        if (c_[i].v == 0) continue;
        for (std::size_t j = 0; j < o.c_.size(); ++j) r[i + j] = f->add(r[i + j], f->mul(c_[i], o.c_[j]));
    }
    return Poly(f, std::move(r));
}

Poly Poly::scale(FqElem s) const {
    std::vector<FqElem> r(c_.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = f_->mul(c_[i], s);
    return Poly(f_, std::move(r));
}

Poly Poly::shift(int k) const {
    if (is_zero()) return *this;
    std::vector<FqElem> r(static_cast<std::size_t>(k), FqElem{0});
    r.insert(r.end(), c_.begin(), c_.end());
    return Poly(f_, std::move(r));
}

std::pair<Poly, Poly> Poly::divmod(const Poly& d) const {
    if (d.is_zero()) throw DomainError("polynomial division by zero");
    const FqPtr& f = d.f_;
    std::vector<FqElem> rem = c_;
    int dd = d.degree();
    int n = degree();
    if (n < dd) return {Poly(f), *this};
    std::vector<FqElem> quo(static_cast<std::size_t>(n - dd) + 1, FqElem{0});
    FqElem li = f->inv(d.lead());
    for (int k = n; k >= dd; --k) {
        FqElem c = rem[static_cast<std::size_t>(k)];
        if (c.v == 0) continue;
        FqElem m = f->mul(c, li);
        quo[static_cast<std::size_t>(k - dd)] = m;
        for (int i = 0; i <= dd; ++i) {
            auto idx = static_cast<std::size_t>(k - dd + i);
            rem[idx] = f->sub(rem[idx], f->mul(m, d.c_[static_cast<std::size_t>(i)]));
        }
    }
    return {Poly(f, std::move(quo)), Poly(f, std::move(rem))};
}

Poly Poly::monic() const {
    if (is_zero()) return *this;
    return scale(f_->inv(lead()));
}

bool operator<(const Poly& a, const Poly& b) {
    if (a.c_.size() != b.c_.size()) return a.c_.size() < b.c_.size();
    for (std::size_t i = a.c_.size(); i-- > 0;)
        if (a.c_[i] != b.c_[i]) return a.c_[i] < b.c_[i];
    return false;
}

std::string Poly::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    bool first = true;
    for (int k = degree(); k >= 0; --k) {
        FqElem c = coeff(k);
        if (c.v == 0) continue;
        if (!first) os << " + ";
        first = false;
        bool unit = c == f_->one();
        if (k == 0) {
            os << f_->format(c);
        } else {
            if (!unit) os << f_->format(c) << '*';
            os << 'T';
            if (k != 1) os << '^' << k;
        }
    }
    return os.str();
}

Poly gcd(const Poly& a, const Poly& b) {
    Poly x = a, y = b;
    while (!y.is_zero()) {
        Poly r = x % y;
        x = std::move(y);
        y = std::move(r);
    }
    return x.monic();
}

std::uint64_t poly_count(std::uint32_t q, int maxDeg) {
    std::uint64_t n = 1;
    for (int i = 0; i <= maxDeg; ++i) n *= q;
    return n;
}

void for_each_poly(const FqPtr& f, int maxDeg, const std::function<void(const Poly&)>& fn) {
    std::uint64_t n = poly_count(f->q(), maxDeg);
    for (std::uint64_t i = 0; i < n; ++i) fn(Poly::from_index(f, i, maxDeg));
}

void for_each_monic(const FqPtr& f, int maxDeg, const std::function<void(const Poly&)>& fn) {
    for (int d = 0; d <= maxDeg; ++d) {
        std::uint64_t n = d == 0 ? 1 : poly_count(f->q(), d - 1);
        for (std::uint64_t i = 0; i < n; ++i) {
            Poly low = d == 0 ? Poly(f) : Poly::from_index(f, i, d - 1);
            fn(low + Poly::monomial(f, d, f->one()));
        }
    }
}

RationalFunction::RationalFunction(Poly num, Poly den) {
    if (den.is_zero()) throw DomainError("rational function with zero denominator");
    Poly g = gcd(num, den);
    if (!num.is_zero()) {
        num = num / g;
        den = den / g;
    }
    FqElem li = den.field()->inv(den.lead());
    num_ = num.is_zero() ? num : num.scale(li);
    den_ = den.scale(li);
}

AbsExponent RationalFunction::frac_abs_times(const Poly& m) const {
    Poly r = (num_ * m) % den_;
    if (r.is_zero()) return AbsExponent::neg_infinity();
    return AbsExponent(r.degree() - den_.degree());
}

}  // namespace fflab
