#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <nlohmann/json.hpp>

#include "fflab/good.hpp"
#include "oracles.hpp"

using namespace fflab;
using oracle::field;

namespace {

Laurent L(const FqPtr& f, const std::string& s) { return Laurent::parse(f, s); }

TestFunction X(const FqPtr& f) { return TestFunction::variable(f, 1, 0); }
TestFunction K(const FqPtr& f, const std::string& s) { return TestFunction::constant(f, 1, L(f, s)); }

GoodOptions top(int k) {
    GoodOptions o;
    o.eps_top = k;
    return o;
}

int top_of(const TestFunction& t, const UltraBall& U) {
    AbsExponent s = norm_on_ball(t, U);
    return s.is_neg_infinity() ? 0 : static_cast<int>(s.value().ceil());
}

AffineForm random_affine(const FqPtr& f, std::mt19937_64& rng, int d) {
    AffineForm a;
    a.y = oracle::random_exact(f, rng, 1, -2);
    for (int i = 0; i < d; ++i) a.beta.push_back(oracle::random_exact(f, rng, 1, -1));
    return a;
}

/// max |f| over the representatives of a fine grid.
AbsExponent grid_max(const TestFunction& t, const UltraBall& b, int m) {
    CellGrid g(b, m);
    AbsExponent best;
    for (std::uint64_t i = 0; i < g.size(); ++i) best = max(best, t.eval(g.representative(i)).abs());
    return best;
}

/// Worst ratio of lambda{|f| <= q^k} / ((q^k/||f||)^alpha lambda(B)) over sub-balls,
/// from fine-grid counts and grid maxima.
std::optional<PosReal> brute_worst(const TestFunction& t, const UltraBall& U, const Rational& alpha, int m,
                                   int top, int J, int fine) {
    std::optional<PosReal> worst;
    const std::uint32_t q = U.field()->q();
    for (int res = -U.radius_exp(); res <= m; ++res) {
        CellGrid g(U, res);
        for (std::uint64_t i = 0; i < g.size(); ++i) {
            UltraBall B = g.cell(i);
            AbsExponent s = grid_max(t, B, fine);
            for (int k = top; k >= top - J; --k) {
                ExactMeasure lhs = oracle::count_cells(B, fine, [&](const Point& x) {
                    AbsExponent v = t.eval(x).abs();
                    return v <= AbsExponent(k);
                });
                if (lhs.is_zero()) continue;
                PosReal r = PosReal::from_rational(lhs.value() / measure(B).value()) *
                            PosReal::q_pow(q, alpha * (s.value() - Rational(k)));
                worst = worst ? max(*worst, r) : r;
            }
        }
    }
    return worst;
}

HyperplaneData lacunary_plane(const FqPtr& f) {
    Laurent l = lacunary_series(f, -200);
    return HyperplaneData::from_laurent(f, {l, l});
}

}  // namespace

TEST_CASE("norm on ball examples") {
    auto f = field(2);
    CHECK(norm_on_ball(X(f), UltraBall::unit(f, 1)) == AbsExponent(0));
    auto t = X(f).scale(L(f, "T")) + K(f, "1");
    CHECK(norm_on_ball(t, UltraBall(f, {Laurent::zero(f)}, -1)) == AbsExponent(0));
    auto c = L(f, "T^3 + 1");
    CHECK(norm_on_ball(t.scale(c), UltraBall(f, {Laurent::zero(f)}, -1)) == AbsExponent(3));
    CHECK(norm_on_ball(K(f, "T^-2"), UltraBall::unit(f, 1)) == AbsExponent(-2));
}

TEST_CASE("norm of higher degree polynomials matches a fine grid") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        std::mt19937_64 rng(q * 31);
        for (int it = 0; it < 40; ++it) {
            TestFunction t = TestFunction::constant(f, 1, oracle::random_exact(f, rng, 1, -2));
            TestFunction p = X(f);
            for (int e = 1; e <= 3; ++e) {
                t = t + p.scale(oracle::random_exact(f, rng, 1, -2));
                p = p * X(f);
            }
            UltraBall B(f, {oracle::random_exact(f, rng, 1, 0)}, static_cast<int>(rng() % 3) - 1);
            CHECK(norm_on_ball(t, B) == grid_max(t, B, 6));
        }
    }
    // x^2 + x vanishes on F_2, so its sup on the unit ball is below its Gauss norm
    auto f = field(2);
    TestFunction t = X(f) * X(f) + X(f);
    CHECK(norm_on_ball(t, UltraBall::unit(f, 1)) == AbsExponent(-1));
    CHECK(norm_on_ball(t, UltraBall(f, {Laurent::zero(f)}, -2)) == AbsExponent(-2));
}

TEST_CASE("f = x on the unit ball is (1,1)-good with worst ratio 1") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        auto c = check_good(X(f), UltraBall::unit(f, 1), PosReal::from_int(1), Rational(1), 3, 4);
        CHECK(c.pass());
        REQUIRE(c.worst_ratio.has_value());
        CHECK(*c.worst_ratio == PosReal::from_int(1));
        CHECK(c.undecided == 0);
        CHECK(c.checks == c.balls * 5);
        auto mc = min_C_for_alpha({X(f)}, UltraBall::unit(f, 1), Rational(1), 3, 4);
        REQUIRE(mc.has_value());
        CHECK(*mc == PosReal::from_int(1));
    }
}

TEST_CASE("constant functions") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 1);
    auto t = K(f, "T");
    // every band below |f|: the sets are empty
    auto below = check_good(t, U, PosReal::from_int(1), Rational(1), 2, 3, top(0));
    CHECK(below.pass());
    CHECK_FALSE(below.worst_ratio.has_value());
    // the band at |f| is the whole ball: ratio 1/C
    auto at = check_good(t, U, PosReal::from_int(1), Rational(1, 3), 2, 3, top(1));
    CHECK(at.pass());
    CHECK(*at.worst_ratio == PosReal::from_int(1));
    auto tight = check_good(t, U, PosReal::from_rational(BigRational(1, 2)), Rational(1), 2, 3, top(1));
    CHECK_FALSE(tight.pass());
    CHECK(tight.failure_count == tight.balls);
    CHECK(tight.failures.front().eps_exp == 1);
}

TEST_CASE("affine functions in one variable are (1,1)-good, exhaustively") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        for (int m = 0; m <= (q == 2 ? 4 : 3); ++m) {
            auto c = sharp_affine_constant(f, 1, Rational(1), 1, m, 4);
            REQUIRE(c.has_value());
            CHECK(*c == PosReal::from_int(1));
        }
    }
    auto f = field(2);
    auto c2 = sharp_affine_constant(f, 2, Rational(1, 2), 1, 1, 3);
    REQUIRE(c2.has_value());
    CHECK(*c2 == PosReal::from_int(1));
}

TEST_CASE("closed form and cell engine agree") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        std::mt19937_64 rng(q * 7 + 1);
        for (int it = 0; it < 30; ++it) {
            int d = 1 + static_cast<int>(it % 2);
            AffineForm a = random_affine(f, rng, d);
            TestFunction t = TestFunction::affine(f, a);
            UltraBall U(f, Point(static_cast<std::size_t>(d), oracle::random_exact(f, rng, 0, 0)), 0);
            Rational alpha(1, d);
            GoodOptions o = top(top_of(t, U));
            PosReal C = PosReal::from_rational(BigRational(2, 3));
            auto closed = check_good(t, U, C, alpha, 1, 3, o);
            o.force_grid = true;
            auto grid = check_good(t, U, C, alpha, 1, 3, o);
            CHECK(closed.checks == grid.checks);
            CHECK(closed.failure_count == grid.failure_count);
            CHECK(closed.worst_ratio.has_value() == grid.worst_ratio.has_value());
            if (closed.worst_ratio && grid.worst_ratio) CHECK(*closed.worst_ratio == *grid.worst_ratio);
        }
    }
}

TEST_CASE("worst ratio matches fine-grid counting") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        std::mt19937_64 rng(q * 101);
        for (int it = 0; it < 10; ++it) {
            AffineForm a;
            a.y = oracle::random_exact(f, rng, 0, -2);
            a.beta = {oracle::random_exact(f, rng, 0, -1)};
            if (a.beta[0].is_exact_zero()) a.beta[0] = Laurent::one(f);
            TestFunction t = TestFunction::affine(f, a);
            UltraBall U = UltraBall::unit(f, 1);
            int tp = top_of(t, U);
            auto c = check_good(t, U, PosReal::from_int(1), Rational(1), 1, 3, top(tp));
            auto b = brute_worst(t, U, Rational(1), 1, tp, 3, 7);
            CHECK(c.worst_ratio.has_value() == b.has_value());
            if (b) CHECK(*c.worst_ratio == *b);
        }
    }
}

TEST_CASE("x^2 needs alpha = 1/2") {
    auto f = field(3);
    UltraBall U = UltraBall::unit(f, 1);
    TestFunction t = X(f) * X(f);
    auto half = min_C_for_alpha({t}, U, Rational(1, 2), 2, 4);
    REQUIRE(half.has_value());
    CHECK(*half == PosReal::from_int(1));
    auto one = min_C_for_alpha({t}, U, Rational(1), 2, 4);
    REQUIRE(one.has_value());
    CHECK(*one == PosReal::from_int(9));
    CHECK(*one == *brute_worst(t, U, Rational(1), 2, 0, 4, 6));
}

TEST_CASE("scaling, weakening and jobs") {
    auto f = field(3);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 15; ++it) {
        AffineForm a = random_affine(f, rng, 1);
        TestFunction t = TestFunction::affine(f, a);
        UltraBall U = UltraBall::unit(f, 1);
        int tp = top_of(t, U);
        auto base = min_C_for_alpha({t}, U, Rational(1), 2, 4, top(tp));
        auto scaled = min_C_for_alpha({t.scale(L(f, "2T^3"))}, U, Rational(1), 2, 4, top(tp + 3));
        CHECK(base.has_value() == scaled.has_value());
        if (base) CHECK(*base == *scaled);
        auto weak = min_C_for_alpha({t}, U, Rational(1, 3), 2, 4, top(tp));
        if (weak) CHECK(*weak <= max(PosReal::from_int(1), base.value_or(PosReal::from_int(1))));
        GoodOptions o = top(tp);
        o.jobs = 4;
        auto par = check_good(t, U, PosReal::from_rational(BigRational(1, 2)), Rational(1), 2, 4, o);
        auto seq = check_good(t, U, PosReal::from_rational(BigRational(1, 2)), Rational(1), 2, 4, top(tp));
        CHECK(par.failure_count == seq.failure_count);
        CHECK(par.checks == seq.checks);
    }
}

TEST_CASE("closure properties") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 1);
    auto r = lemma42_property_suite(X(f), X(f) + K(f, "1"), U, PosReal::from_int(1), Rational(1), 2, 3);
    CHECK(r.scaling);
    CHECK(r.sup);
    CHECK(r.comparable);
    CHECK(r.weakening);
    CHECK(r.restriction);
    auto sup = check_good({X(f), X(f) + K(f, "1")}, U, PosReal::from_int(1), Rational(1), 2, 3, top(0));
    CHECK(sup.pass());

    for (std::uint32_t q : {2u, 3u}) {
        auto F = field(q);
        std::mt19937_64 rng(q * 13);
        for (int it = 0; it < 8; ++it) {
            TestFunction a = TestFunction::affine(F, random_affine(F, rng, 1));
            TestFunction b = TestFunction::affine(F, random_affine(F, rng, 1));
            if (a.terms().empty() || b.terms().empty()) continue;
            auto rep = lemma42_property_suite(a, b, UltraBall::unit(F, 1), PosReal::from_int(1), Rational(1), 1, 3);
            CHECK(rep.pass());
        }
    }
}

TEST_CASE("certificate json") {
    auto f = field(2);
    auto c = check_good(X(f), UltraBall::unit(f, 1), PosReal::from_rational(BigRational(1, 2)), Rational(1), 1, 2);
    auto j = nlohmann::json::parse(certificate_json(c));
    for (const char* k : {"C", "alpha", "m", "J", "worstRatio", "failures"}) CHECK(j.contains(k));
    CHECK(j["pass"] == false);
    REQUIRE(!j["failures"].empty());
    for (const char* k : {"ball", "eps", "lhs", "rhs"}) CHECK(j["failures"][0].contains(k));
    CHECK(j["worstRatio"] == "2");
}

TEST_CASE("dilation by powers of 3") {
    CHECK(three_power_dilation(2, 3) == 6);
    CHECK(three_power_dilation(3, 3) == 3);
    CHECK(three_power_dilation(5, 4) == 4);
}

TEST_CASE("flow coefficients are (C, 1/(n-1))-good on the dilated ball") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        auto C = sharp_affine_constant(f, 1, Rational(1), 1, 2, 4);
        REQUIRE(C.has_value());
        auto h = lacunary_plane(f);
        auto t0 = std::chrono::steady_clock::now();
        auto rep = certify_flow_coefficients(h, UltraBall::unit(f, 1), *C, 1, 1, 4, 4);
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        MESSAGE("q=" << q << " forms=" << rep.forms << " distinct=" << rep.distinct << " secs=" << secs);
        CHECK(rep.pass());
        CHECK(rep.distinct > 0);
        REQUIRE(rep.needed_C.has_value());
        CHECK(*rep.needed_C <= *C);
    }
}
