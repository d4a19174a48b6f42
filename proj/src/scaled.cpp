#include "fflab/scaled.hpp"

#include <numeric>

namespace fflab {

namespace {

void check_grade(int ram, const Rational& v) {
    if ((v * Rational(ram)).is_integer()) return;
    throw DomainError("grade " + v.str() + " does not lie in (1/" + std::to_string(ram) + ")Z");
}

}  // namespace

ScaledSeries::ScaledSeries(int ram, Rational fracVal, Laurent mantissa)
    : ram_(ram), frac_(fracVal), mantissa_(std::move(mantissa)) {
    if (ram_ < 1) throw DomainError("ramification index must be positive");
    check_grade(ram_, frac_);
}

ScaledSeries ScaledSeries::monomial(const FqPtr& f, int ram, Rational v) {
    return ScaledSeries(ram, v, Laurent::one(f));
}

ScaledSeries ScaledSeries::operator*(const ScaledSeries& o) const {
    return ScaledSeries(std::lcm(ram_, o.ram_), frac_ + o.frac_, mantissa_ * o.mantissa_);
}

ScaledSeries ScaledSeries::rebase(const Rational& v) const {
    Rational diff = frac_ - v;
    if (!diff.is_integer())
        throw DomainError("cannot rebase grade " + frac_.str() + " to " + v.str() + ": non-integral difference");
    return ScaledSeries(std::lcm(ram_, static_cast<int>(v.den())), v, mantissa_.shift(static_cast<int>(diff.num())));
}

ScaledSeries ScaledSeries::operator+(const ScaledSeries& o) const {
    if (!(frac_ - o.frac_).is_integer())
        throw DomainError("addition across grades " + frac_.str() + " and " + o.frac_.str());
    Rational base = std::min(frac_, o.frac_);
    ScaledSeries a = rebase(base), b = o.rebase(base);
    return ScaledSeries(std::lcm(ram_, o.ram_), base, a.mantissa_ + b.mantissa_);
}

ScaledSeries ScaledSeries::inverse_monomial() const {
    auto t = mantissa_.terms();
    if (t.size() != 1 || !mantissa_.is_exact()) throw DomainError("inverse_monomial needs an exact monomial");
    auto [e, c] = *t.begin();
    const auto& f = mantissa_.field();
    return ScaledSeries(ram_, -frac_, Laurent::monomial(f, -e, f->inv(c)));
}

std::string ScaledSeries::str() const {
    if (frac_.is_zero()) return mantissa_.str();
    return "T^(" + frac_.str() + ")*(" + mantissa_.str() + ")";
}

int ramification_index(int n, const Rational& beta) {
    return static_cast<int>(std::lcm(static_cast<std::int64_t>(n + 1), beta.den()));
}

FlowScalars make_flow_scalars(const FqPtr& f, int n, int t, int r, const Rational& beta) {
    if (n < 2) throw DomainError("flow scalars need n >= 2");
    if (t < 0 || r < 0) throw DomainError("flow scalars need t >= 0 and r >= 0");
    if (!(beta > Rational(0) && beta < Rational(1, n + 1)))
        throw DomainError("beta = " + beta.str() + " outside (0, 1/(n+1))");
    FlowScalars s;
    s.ram = ramification_index(n, beta);
    Rational dp = Rational(-(n * t + r));
    Rational ep = Rational((t + 1) * (n - 1) - n * t - r, n + 1);
    s.delta_prime = ScaledSeries::monomial(f, s.ram, dp);
    s.eps_prime = ScaledSeries::monomial(f, s.ram, ep);
    s.eps = ScaledSeries::monomial(f, s.ram, beta * Rational(t) + ep);
    return s;
}

}  // namespace fflab
