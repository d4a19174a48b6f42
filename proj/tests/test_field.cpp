#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fflab/fq.hpp"
#include "fflab/laurent.hpp"
#include "fflab/posreal.hpp"
#include "fflab/scaled.hpp"

using namespace fflab;

namespace {

FqPtr field(std::uint32_t q) {
    switch (q) {
        case 4: return Fq::make({2, 2, {1, 1, 1}});
        case 8: return Fq::make({2, 3, {1, 1, 0, 1}});
        case 9: return Fq::make({3, 2, {1, 0, 1}});
        default: return Fq::prime(q);
    }
}

Laurent random_laurent(const FqPtr& f, std::mt19937_64& rng, int hi, int lo) {
    std::map<int, FqElem> t;
    for (int e = hi; e >= lo; --e) t[e] = f->element(static_cast<std::uint32_t>(rng() % f->q()));
    return Laurent::from_terms(f, t);
}

}  // namespace

TEST_CASE("field axioms hold exhaustively for small q") {
    for (std::uint32_t q : {2u, 3u, 4u, 5u, 7u, 8u, 9u}) {
        auto f = field(q);
        CHECK(f->q() == q);
        for (std::uint32_t a = 0; a < q; ++a) {
            FqElem x = f->element(a);
            CHECK(f->add(x, f->neg(x)) == f->zero());
            CHECK(f->mul(x, f->one()) == x);
            if (a) CHECK(f->mul(x, f->inv(x)) == f->one());
            for (std::uint32_t b = 0; b < q; ++b) {
                FqElem y = f->element(b);
                CHECK(f->add(x, y) == f->add(y, x));
                CHECK(f->mul(x, y) == f->mul(y, x));
                for (std::uint32_t c = 0; c < q; ++c) {
                    FqElem z = f->element(c);
                    CHECK(f->mul(x, f->add(y, z)) == f->add(f->mul(x, y), f->mul(x, z)));
                    CHECK(f->mul(f->mul(x, y), z) == f->mul(x, f->mul(y, z)));
                }
            }
        }
    }
}

TEST_CASE("fq_arith examples") {
    auto f2 = field(2);
    CHECK(fq_arith(*f2, f2->one(), f2->one(), FqOp::Add) == f2->zero());
    auto f4 = field(4);
    FqElem X = f4->from_coeffs({0, 1});
    CHECK(fq_arith(*f4, X, X, FqOp::Mul) == f4->from_coeffs({1, 1}));
    for (std::uint32_t q : {2u, 3u, 4u, 9u}) CHECK(field(q)->inv(field(q)->one()) == field(q)->one());
    CHECK_THROWS_AS(f4->inv(f4->zero()), DomainError);
}

TEST_CASE("reducible or invalid moduli are rejected") {
    CHECK_THROWS_AS(Fq::make({2, 2, {1, 0, 1}}), ConfigError);  // X^2 + 1 = (X + 1)^2
    CHECK_THROWS_AS(Fq::make({4, 1, {}}), ConfigError);
    CHECK_NOTHROW(Fq::make({2, 4, {1, 1, 0, 0, 1}}));
}

TEST_CASE("absolute values") {
    auto f = field(2);
    Poly p(f, {f->one(), f->zero(), f->one()});
    CHECK(abs_value(p) == AbsExponent(2));
    CHECK(abs_value(Poly(f)).is_neg_infinity());
    CHECK(abs_value(Laurent::zero(f)).is_neg_infinity());
    Poly P = Poly::monomial(f, 3, f->one()) + Poly::constant(f, f->one());
    Poly Q = Poly::monomial(f, 5, f->one()) + Poly::monomial(f, 2, f->one()) + Poly::constant(f, f->one());
    CHECK(abs_value(Laurent::from_rational(RationalFunction(P, Q), -10)) == AbsExponent(-2));
    CHECK_THROWS_AS(Laurent::big_o(f, -3).abs(), PrecisionInsufficient);
}

TEST_CASE("laurent arithmetic examples") {
    auto f2 = field(2);
    Laurent a = Laurent::parse(f2, "T + 1 + O(T^-1)");
    Laurent b = Laurent::parse(f2, "T");
    Laurent s = laurent_arith(a, b, LaurentOp::Add);
    CHECK(s.str() == "1 + O(T^-1)");
    CHECK(s.degree() == 0);

    auto f3 = field(3);
    Laurent x = Laurent::parse(f3, "T + 2");  // T - 1
    Laurent inv = laurent_arith(x, x, LaurentOp::Invert, -4);
    CHECK(inv.str() == "T^-1 + T^-2 + T^-3 + T^-4 + O(T^-5)");
    Laurent back = inv * x;
    CHECK(back.coeff(0) == f3->one());
    for (int e = -1; e >= back.prec(); --e) CHECK(back.coeff(e) == f3->zero());

    // cancellation below the precision is loud
    Laurent c = Laurent::parse(f2, "T^-1 + O(T^-3)");
    Laurent d = Laurent::parse(f2, "T^-1");
    CHECK_THROWS_AS((c + d).degree(), PrecisionInsufficient);
}

TEST_CASE("valuation is multiplicative and ultrametric") {
    std::mt19937_64 rng(7);
    for (std::uint32_t q : {2u, 3u, 4u}) {
        auto f = field(q);
        for (int i = 0; i < 200; ++i) {
            Laurent x = random_laurent(f, rng, 3, -4), y = random_laurent(f, rng, 2, -5);
            if (x.is_exact_zero() || y.is_exact_zero()) continue;
            CHECK(laurent_arith(x, y, LaurentOp::Mul).abs() == x.abs() + y.abs());
            AbsExponent sa = (x + y).abs();
            CHECK(sa <= max(x.abs(), y.abs()));
            if (x.abs() != y.abs()) CHECK(sa == max(x.abs(), y.abs()));
            CHECK(sup_norm({x + y}) <= max(sup_norm({x}), sup_norm({y})));
        }
    }
}

TEST_CASE("exhaustive ultrametric check on a window at q = 2") {
    auto f = field(2);
    for (std::uint64_t i = 0; i < 64; ++i)
        for (std::uint64_t j = 0; j < 64; ++j) {
            Laurent x = Laurent::from_poly(Poly::from_index(f, i, 5)).shift(-3);
            Laurent y = Laurent::from_poly(Poly::from_index(f, j, 5)).shift(-3);
            CHECK((x + y).abs() <= max(x.abs(), y.abs()));
            CHECK((x * y).abs() == x.abs() + y.abs());
        }
}

TEST_CASE("sup norm") {
    auto f = field(2);
    CHECK(sup_norm({Laurent::parse(f, "T"), Laurent::one(f), Laurent::parse(f, "T^-2")}) == AbsExponent(1));
    CHECK(sup_norm({Laurent::zero(f), Laurent::zero(f)}).is_neg_infinity());
}

TEST_CASE("nonzero polynomials have absolute value at least 1") {
    auto f = field(3);
    for (std::uint64_t i = 1; i < 243; ++i) CHECK(Poly::from_index(f, i, 4).abs() >= AbsExponent(0));
}

TEST_CASE("text form round trips") {
    auto f4 = field(4);
    for (std::string s : {"T^3 + T + 1 + O(T^-5)", "[0,1]*T^2 + [1,1]", "O(T^-2)", "0", "T^-7"}) {
        Laurent x = Laurent::parse(f4, s);
        CHECK(Laurent::parse(f4, x.str()) == x);
    }
}

TEST_CASE("flow scalars") {
    auto f = field(2);
    auto s = make_flow_scalars(f, 2, 0, 0, Rational(1, 6));
    CHECK(s.eps_prime.abs() == AbsExponent(Rational(1, 3)));
    auto s3 = make_flow_scalars(f, 2, 3, 0, Rational(1, 6));
    CHECK(s3.eps.abs() == AbsExponent(Rational(-1, 6)));
    auto s2 = make_flow_scalars(f, 2, 3, 2, Rational(1, 6));
    CHECK(s2.delta_prime.abs() == AbsExponent(-(2 * 3 + 2)));
    CHECK_THROWS_AS(make_flow_scalars(f, 2, 1, 0, Rational(1, 3)), DomainError);
    CHECK_THROWS_AS(make_flow_scalars(f, 2, 1, 0, Rational(0)), DomainError);
}

TEST_CASE("monomial grading shifts absolute values exactly") {
    auto f = field(3);
    Laurent x = Laurent::parse(f, "2*T^2 + T + O(T^-3)");
    for (Rational v : {Rational(1, 3), Rational(-5, 6), Rational(2)}) {
        ScaledSeries m = ScaledSeries::monomial(f, 6, v);
        CHECK((m * ScaledSeries::from_laurent(x, 6)).abs() == AbsExponent(v + Rational(2)));
    }
    ScaledSeries a = ScaledSeries::monomial(f, 6, Rational(1, 3));
    ScaledSeries b = ScaledSeries::monomial(f, 6, Rational(1, 2));
    CHECK_THROWS_AS(a + b, DomainError);
    CHECK_NOTHROW(a + ScaledSeries::monomial(f, 6, Rational(4, 3)));
}

TEST_CASE("exact positive reals") {
    PosReal a = PosReal::q_pow(2, Rational(1, 3));
    PosReal b = PosReal::from_rational(BigRational(5, 4));
    CHECK(b < a);  // 1.25 < 1.2599
    CHECK(compare(a.pow(3), BigRational(2)) == 0);
    auto [lo, hi] = a.bracket(40);
    CHECK(lo < hi);
    CHECK(compare(a, lo) > 0);
    CHECK(compare(a, hi) < 0);
    auto [l2, h2] = PosReal::from_rational(BigRational(1, 32768)).bracket(20);
    CHECK(l2 == h2);
    CertifiedReal k1 = CertifiedReal::exact(1) / (CertifiedReal::exact(1) - CertifiedReal::from(PosReal::q_pow(2, Rational(-1, 6))));
    CHECK(k1.approx() == doctest::Approx(1.0 / (1.0 - std::pow(2.0, -1.0 / 6))).epsilon(1e-12));
    CHECK(certified_less(CertifiedReal::from(b), CertifiedReal::from(a)));
}
