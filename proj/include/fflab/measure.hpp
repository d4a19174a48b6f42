#pragma once

#include <cstdint>
#include <string>

#include "fflab/posreal.hpp"

namespace fflab {

/// Nonnegative value count * q^scaleExp produced by exact coset counting.
/// Normalized so that q does not divide count (zero has scaleExp 0).
class ExactMeasure {
public:
    ExactMeasure() = default;
    ExactMeasure(std::uint32_t q, BigInt count, std::int64_t scaleExp);

    static ExactMeasure zero(std::uint32_t q) { return ExactMeasure(q, 0, 0); }
    static ExactMeasure q_power(std::uint32_t q, std::int64_t e) { return ExactMeasure(q, 1, e); }

    std::uint32_t q() const { return q_; }
    const BigInt& count() const { return count_; }
    std::int64_t scale_exp() const { return exp_; }
    bool is_zero() const { return count_ == 0; }

    ExactMeasure operator+(const ExactMeasure& o) const;
    ExactMeasure operator-(const ExactMeasure& o) const;  ///< requires o <= *this
    ExactMeasure& operator+=(const ExactMeasure& o) { return *this = *this + o; }
    ExactMeasure times_q_power(std::int64_t k) const { return ExactMeasure(q_, count_, exp_ + k); }
    ExactMeasure times(const BigInt& k) const { return ExactMeasure(q_, count_ * k, exp_); }

    BigRational value() const;
    double to_double() const { return value().convert_to<double>(); }

    friend std::strong_ordering operator<=>(const ExactMeasure& a, const ExactMeasure& b);
    friend bool operator==(const ExactMeasure& a, const ExactMeasure& b) { return (a <=> b) == 0; }

    /// "count*q^e" form, e.g. "3*2^-4"; "0" for zero.
    std::string str() const;

private:
    void normalize();
    std::uint32_t q_ = 2;
    BigInt count_ = 0;
    std::int64_t exp_ = 0;
};

}  // namespace fflab
