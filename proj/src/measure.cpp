#include "fflab/measure.hpp"

#include <sstream>

#include "fflab/errors.hpp"

namespace fflab {

ExactMeasure::ExactMeasure(std::uint32_t q, BigInt count, std::int64_t scaleExp)
    : q_(q), count_(std::move(count)), exp_(scaleExp) {
    if (q_ < 2) throw DomainError("measure base must be at least 2");
    if (count_ < 0) throw DomainError("measure count must be nonnegative");
    normalize();
}

void ExactMeasure::normalize() {
    if (count_ == 0) {
        exp_ = 0;
        return;
    }
    while (count_ % q_ == 0) {
        count_ /= q_;
        ++exp_;
    }
}

namespace {

void same_base(const ExactMeasure& a, const ExactMeasure& b) {
    if (a.q() != b.q()) throw DomainError("measures over different q");
}

BigInt qpow(std::uint32_t q, std::int64_t e) {
    BigInt r = 1;
    for (std::int64_t i = 0; i < e; ++i) r *= q;
    return r;
}

}  // namespace

ExactMeasure ExactMeasure::operator+(const ExactMeasure& o) const {
    same_base(*this, o);
    if (is_zero()) return o;
    if (o.is_zero()) return *this;
    std::int64_t e = std::min(exp_, o.exp_);
    return ExactMeasure(q_, count_ * qpow(q_, exp_ - e) + o.count_ * qpow(q_, o.exp_ - e), e);
}

ExactMeasure ExactMeasure::operator-(const ExactMeasure& o) const {
    same_base(*this, o);
    if (o.is_zero()) return *this;
    std::int64_t e = std::min(exp_, o.exp_);
    if (is_zero()) e = o.exp_;
    BigInt a = is_zero() ? BigInt(0) : count_ * qpow(q_, exp_ - e);
    BigInt b = o.count_ * qpow(q_, o.exp_ - e);
    if (b > a) throw DomainError("negative measure difference");
    return ExactMeasure(q_, a - b, e);
}

BigRational ExactMeasure::value() const {
    if (exp_ >= 0) return BigRational(count_ * qpow(q_, exp_));
    return BigRational(count_, qpow(q_, -exp_));
}

std::strong_ordering operator<=>(const ExactMeasure& a, const ExactMeasure& b) {
    same_base(a, b);
    BigRational x = a.value(), y = b.value();
    if (x < y) return std::strong_ordering::less;
    if (x > y) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

std::string ExactMeasure::str() const {
    if (is_zero()) return "0";
    std::ostringstream os;
    os << count_;
    if (exp_ != 0) os << "*" << q_ << "^" << exp_;
    return os.str();
}

}  // namespace fflab
