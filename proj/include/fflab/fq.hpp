#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace fflab {

/// Parameters of F_q = F_p[X]/(modulus), q = p^a.
struct FqConfig {
    std::uint32_t p = 2;
    std::uint32_t a = 1;
    /// Coefficients of the monic modulus, lowest degree first (length a+1).
    /// Ignored when a == 1.
    std::vector<std::uint32_t> modulus;
};

/// An element of F_q. The value is the base-p encoding of its coefficient
/// vector over F_p, so 0 and 1 are the field's zero and one.
struct FqElem {
    std::uint32_t v = 0;
    friend bool operator==(FqElem, FqElem) = default;
    friend auto operator<=>(FqElem, FqElem) = default;
};

/// Finite field with precomputed tables. Immutable after construction, so a
/// single instance is shared by every element built over it.
class Fq {
public:
    /// Validates p prime and the modulus irreducible (exhaustive factor search).
    /// Throws ConfigError otherwise.
    explicit Fq(const FqConfig& cfg);

    static std::shared_ptr<const Fq> make(const FqConfig& cfg) { return std::make_shared<const Fq>(cfg); }
    static std::shared_ptr<const Fq> prime(std::uint32_t p) { return make(FqConfig{p, 1, {}}); }

    std::uint32_t p() const { return p_; }
    std::uint32_t a() const { return a_; }
    std::uint32_t q() const { return q_; }
    const FqConfig& config() const { return cfg_; }

    FqElem zero() const { return {0}; }
    FqElem one() const { return {1}; }
    FqElem from_int(std::int64_t k) const;  ///< image of k in the prime field
    FqElem from_coeffs(const std::vector<std::uint32_t>& c) const;
    std::vector<std::uint32_t> coeffs(FqElem x) const;
    FqElem element(std::uint32_t index) const { return {index}; }

    FqElem add(FqElem x, FqElem y) const { return {add_[x.v * q_ + y.v]}; }
    FqElem sub(FqElem x, FqElem y) const { return add(x, neg(y)); }
    FqElem mul(FqElem x, FqElem y) const { return {mul_[x.v * q_ + y.v]}; }
    FqElem neg(FqElem x) const { return {neg_[x.v]}; }
    /// Throws DomainError on zero.
    FqElem inv(FqElem x) const;

    std::string format(FqElem x) const;
    FqElem parse(const std::string& s) const;

private:
    std::vector<std::uint32_t> mul_poly_mod(const std::vector<std::uint32_t>& x,
                                            const std::vector<std::uint32_t>& y) const;

    FqConfig cfg_;
    std::uint32_t p_, a_, q_;
    std::vector<std::uint32_t> add_, mul_, neg_, inv_;
};

using FqPtr = std::shared_ptr<const Fq>;

enum class FqOp { Add, Mul, Inv, Neg };

/// Field operation dispatcher; y is ignored for unary operations.
FqElem fq_arith(const Fq& f, FqElem x, FqElem y, FqOp op);

bool is_prime(std::uint64_t n);

/// True iff the monic polynomial over F_p (lowest first) has no factor of
/// degree between 1 and deg/2.
bool is_irreducible_mod_p(const std::vector<std::uint32_t>& monic, std::uint32_t p);

}  // namespace fflab
