#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "oracles.hpp"

using namespace fflab;
using oracle::field;

namespace {

Laurent L(const FqPtr& f, const std::string& s) { return Laurent::parse(f, s); }

}  // namespace

TEST_CASE("ball measures") {
    CHECK(measure(UltraBall::unit(field(2), 1)).value() == 1);
    auto f2 = field(2);
    CHECK(measure(UltraBall(f2, {Laurent::zero(f2), Laurent::zero(f2), Laurent::zero(f2)}, -2)).value() ==
          BigRational(1, 64));
    auto f3 = field(3);
    CHECK(measure(UltraBall(f3, {Laurent::zero(f3)}, 1)).value() == 3);
}

TEST_CASE("grid cells tile the ball") {
    auto f = field(3);
    UltraBall b(f, {L(f, "T^2"), L(f, "2")}, 0);
    CellGrid g(b, 1);
    CHECK(g.size() == 9);
    for (std::uint64_t i = 0; i < g.size(); ++i) {
        Point xi = g.representative(i);
        CHECK(b.contains(xi));
        for (std::uint64_t j = 0; j < g.size(); ++j) CHECK(g.cell(j).contains(xi) == (i == j));
    }
    CHECK(g.cell_measure().times(BigInt(g.size())) == measure(b));
}

TEST_CASE("every member of a ball is a center") {
    auto f = field(2);
    UltraBall b(f, {L(f, "T"), L(f, "1 + T^-1")}, -1);
    CellGrid g(b, 3);
    AffineForm form{{L(f, "T^2 + 1"), L(f, "T")}, L(f, "T^-1")};
    for (std::uint64_t i = 0; i < g.size(); ++i) {
        UltraBall c = b.recenter(g.representative(i));
        CHECK(c == b);
        CHECK(measure(c) == measure(b));
        CHECK(sup_linear_on_ball(form, c) == sup_linear_on_ball(form, b));
    }
    CHECK_THROWS_AS(b.recenter({L(f, "T^2"), L(f, "1")}), DomainError);
}

TEST_CASE("grid measure of sublevel sets") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 1);
    auto lt = [](int k) { return [k](const Point& x) { return x[0].abs_less_than(k); }; };
    // {|x| < 1/2} is the closed ball of radius 1/4; {|x| <= 1/2} has measure 1/2
    CHECK(exact_measure_of(lt(-1), CellGrid(U, 2), Certificate::affine(AbsExponent(0), 1)).value() ==
          BigRational(1, 4));
    CHECK(exact_measure_of(lt(0), CellGrid(U, 2), Certificate::affine(AbsExponent(0), 0)).value() ==
          BigRational(1, 2));
    CHECK(exact_measure_of([](const Point&) { return true; }, CellGrid(U, 3), Certificate::constant()) ==
          measure(U));
    CHECK(exact_measure_of([](const Point& x) { return (x[0] - x[0]).abs_less_than(-50); }, CellGrid(U, 2),
                           Certificate::constant()) == measure(U));
    CHECK_THROWS_AS(exact_measure_of(lt(-1), CellGrid(U, 1), Certificate::affine(AbsExponent(0), 1)),
                    PrecisionInsufficient);
}

TEST_CASE("grid measure is resolution independent and thread independent") {
    std::mt19937_64 rng(11);
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        for (int it = 0; it < 20; ++it) {
            AffinePredicate p{{{oracle::random_exact(f, rng, 1, -1), oracle::random_exact(f, rng, 0, -1)},
                               oracle::random_exact(f, rng, 1, -3)},
                              -1 - static_cast<int>(rng() % 2), static_cast<bool>(rng() % 2)};
            UltraBall U = UltraBall::unit(f, 2);
            int m = p.certificate().min_resolution;
            if (q == 3 && m > 3) continue;
            auto pred = [&](const Point& x) { return p.holds(x); };
            ExactMeasure a = exact_measure_of(pred, CellGrid(U, m), p.certificate());
            ExactMeasure b = exact_measure_of(pred, CellGrid(U, m + 1), p.certificate(), 4);
            CHECK(a == b);
            CHECK(a == union_measure({p}, U));
        }
    }
}

TEST_CASE("sup of a linear function over a ball") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 1);
    CHECK(sup_linear_on_ball({{L(f, "1")}, Laurent::zero(f)}, U) == AbsExponent(0));
    UltraBall small(f, {Laurent::zero(f)}, -1);
    AffineForm g{{L(f, "T")}, L(f, "1")};
    CHECK(sup_linear_on_ball(g, small) == AbsExponent(0));
    CHECK(oracle::sup_by_grid(g, small, 3) == 0);
    AffineForm h{{L(f, "T^2")}, L(f, "1")};
    CHECK(sup_linear_on_ball(h, small) == AbsExponent(1));
}

TEST_CASE("sup formula matches grid maximization") {
    std::mt19937_64 rng(3);
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        for (int it = 0; it < 60; ++it) {
            int d = 1 + static_cast<int>(rng() % 2);
            Point beta, c;
            for (int i = 0; i < d; ++i) {
                beta.push_back(oracle::random_exact(f, rng, 1, -1));
                c.push_back(oracle::random_exact(f, rng, 1, 0));
            }
            AffineForm form{beta, oracle::random_exact(f, rng, 2, -2)};
            UltraBall b(f, c, -static_cast<int>(rng() % 2));
            int m = q == 2 ? 4 : 3;
            if (d == 2 && q == 3) m = 2;
            AbsExponent s = sup_linear_on_ball(form, b);
            int o = oracle::sup_by_grid(form, b, m);
            if (o == INT32_MIN)
                CHECK(s.is_neg_infinity());
            else
                CHECK(s == AbsExponent(o));
        }
    }
}

TEST_CASE("scaling the gradient shifts the sup") {
    auto f = field(3);
    UltraBall U = UltraBall::unit(f, 1);
    AffineForm g{{L(f, "T + 1")}, L(f, "1")};
    AffineForm tg{{L(f, "T^2 + T")}, L(f, "1")};
    CHECK(sup_linear_on_ball(tg, U) == AbsExponent(sup_linear_on_ball(g, U).value() + Rational(1)));
}

TEST_CASE("strip measures") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 2);
    Point beta{L(f, "1"), Laurent::zero(f)};
    ExactMeasure s = strip_measure(beta, Laurent::zero(f), 1, U);
    CHECK(s == oracle::count_cells(U, 2, [](const Point& x) { return x[0].abs_less_than(-1); }));
    CHECK(s.value() == BigRational(1, 4));
    CHECK(strip_measure(beta, L(f, "T^3"), 1, U).is_zero());
    CHECK(strip_measure({Laurent::zero(f), Laurent::zero(f)}, L(f, "T^-3"), 1, U) == measure(U));
    CHECK(strip_measure({Laurent::zero(f), Laurent::zero(f)}, L(f, "T^3"), 1, U).is_zero());
    CHECK_THROWS_AS(strip_measure({L(f, "T^-1"), Laurent::zero(f)}, Laurent::zero(f), 1, U), DomainError);
}

TEST_CASE("strip measures obey the Fubini bound") {
    std::mt19937_64 rng(5);
    for (int it = 0; it < 100; ++it) {
        std::uint32_t q = it % 2 ? 3 : 2;
        auto f = field(q);
        Point beta{oracle::random_exact(f, rng, 2, -2), oracle::random_exact(f, rng, 1, -2)};
        if (sup_norm(beta) < AbsExponent(0)) continue;
        int r = -static_cast<int>(rng() % 2);
        UltraBall U(f, {oracle::random_exact(f, rng, 1, 0), oracle::random_exact(f, rng, 1, 0)}, r);
        int j = static_cast<int>(rng() % 4);
        ExactMeasure s = strip_measure(beta, oracle::random_exact(f, rng, 2, -3), j, U);
        CHECK(s <= measure(U).times_q_power(1 - j));
        // r(U)^(d-1) q^-j / ||beta||
        std::int64_t e = static_cast<std::int64_t>(r) - j - sup_norm(beta).value().num();
        CHECK(s <= ExactMeasure::q_power(q, e + r));
    }
}

TEST_CASE("union engine matches grid counting") {
    std::mt19937_64 rng(19);
    for (int it = 0; it < 40; ++it) {
        std::uint32_t q = it % 3 == 0 ? 3 : 2;
        auto f = field(q);
        UltraBall U = UltraBall::unit(f, 1);
        std::vector<AffinePredicate> ps;
        int m = 0;
        for (int k = 0; k < 4; ++k) {
            AffinePredicate p{{{oracle::random_exact(f, rng, 1, -2)}, oracle::random_exact(f, rng, 1, -4)},
                              -static_cast<int>(rng() % 3), rng() % 3 != 0};
            m = std::max(m, p.certificate().min_resolution);
            ps.push_back(p);
        }
        if (m > (q == 2 ? 8 : 5)) continue;
        ExactMeasure expect = oracle::count_cells(U, m, [&](const Point& x) {
            for (const auto& p : ps)
                if (p.holds(x)) return true;
            return false;
        });
        CHECK(union_measure(ps, U) == expect);
    }
}

TEST_CASE("union engine enforces its budget") {
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 2);
    std::vector<AffinePredicate> ps;
    ps.push_back({{{L(f, "1"), L(f, "T")}, Laurent::zero(f)}, -12, false});
    ps.push_back({{{L(f, "T"), L(f, "1")}, L(f, "T^-1")}, -12, false});
    CHECK_THROWS_AS(union_measure(ps, U, 50), PrecisionInsufficient);
}

TEST_CASE("grid report") {
    auto f = field(2);
    std::ostringstream os;
    write_grid_tsv(os, CellGrid(UltraBall::unit(f, 1), 1), [](const Point& x) { return x[0].is_exact_zero(); });
    CHECK(os.str() == "cell\trepresentative\tvalue\n0\t(0)\t1\n1\t(1)\t0\n");
}
