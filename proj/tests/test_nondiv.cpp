#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "fflab/nondiv.hpp"
#include "oracles.hpp"

using namespace fflab;
using oracle::field;

namespace {

Poly P(const FqPtr& f, std::vector<std::uint32_t> c) {
    std::vector<FqElem> e;
    for (auto x : c) e.push_back(f->element(x));
    return Poly(f, e);
}

LambdaVector random_vector(const FqPtr& f, std::mt19937_64& rng, int n, int D) {
    LambdaVector v;
    for (int i = 0; i <= n; ++i) v.push_back(oracle::random_poly(f, rng, D));
    return v;
}

/// Random unimodular recombination of the rows: elementary operations and unit scalings.
std::vector<LambdaVector> rebase(const FqPtr& f, std::mt19937_64& rng, std::vector<LambdaVector> b) {
    const std::size_t l = b.size();
    for (int step = 0; step < 6; ++step) {
        std::size_t i = rng() % l, j = rng() % l;
        if (i == j) {
            FqElem u = f->element(1 + static_cast<std::uint32_t>(rng() % (f->q() - 1)));
            for (auto& p : b[i]) p = p.scale(u);
            continue;
        }
        Poly c = oracle::random_poly(f, rng, 1);
        for (std::size_t k = 0; k < b[i].size(); ++k) b[i][k] = b[i][k] + c * b[j][k];
    }
    return b;
}

struct Setup {
    FqPtr f;
    HyperplaneData h;
    UltraBall U;
    FlowStep fs;
    PosReal rho;
};

Setup setup(std::uint32_t q, int t, int n = 2) {
    auto f = field(q);
    Laurent l = lacunary_series(f, -200);
    auto h = HyperplaneData::from_laurent(f, std::vector<Laurent>(n, l));
    UltraBall U = UltraBall::unit(f, n - 1);
    Rational beta = choose_beta(n, Rational(1, 2), 2 * (n + 1)).beta;
    Rational cp = cprime_exp(U);
    return {f, h, U, FlowStep::make(f, n, t, 0, beta), rho_constant(q, n, Rational(1, 2), cp, cp)};
}

}  // namespace

TEST_CASE("saturation examples") {
    auto f = field(2);
    LambdaVector te0{P(f, {0, 1}), Poly(f), Poly(f)};
    auto s = SubmoduleHNF::saturate(f, {te0});
    CHECK(s.rank() == 1);
    CHECK(s.str() == "(1,0,0)");

    LambdaVector a{P(f, {1}), P(f, {0, 1}), Poly(f)};
    LambdaVector b{Poly(f), P(f, {1}), Poly(f)};
    CHECK(minors_gcd({a, b}).is_unit());
    auto s2 = SubmoduleHNF::saturate(f, {a, b});
    CHECK(s2 == SubmoduleHNF::from_primitive(f, {a, b}));
    CHECK(SubmoduleHNF::saturate(f, s2.basis()) == s2);

    CHECK_THROWS_AS(SubmoduleHNF::saturate(f, {a, a}), DomainError);
    LambdaVector ta{P(f, {0, 1}), P(f, {0, 0, 1}), Poly(f)};
    CHECK_THROWS_AS(SubmoduleHNF::from_primitive(f, {ta, b}), DomainError);
    CHECK(SubmoduleHNF::saturate(f, {ta, b}) == s2);
}

TEST_CASE("saturation agrees with the minor test") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        std::mt19937_64 rng(q * 17);
        const auto probes = small_vectors(f, 2, 1);
        for (int it = 0; it < 40; ++it) {
            std::size_t l = 1 + rng() % 2;
            std::vector<LambdaVector> v;
            for (std::size_t k = 0; k < l; ++k) v.push_back(random_vector(f, rng, 2, 2));
            if (minors_gcd(v).is_zero()) continue;
            auto s = SubmoduleHNF::saturate(f, v);
            CHECK(s.rank() == static_cast<int>(l));
            CHECK(minors_gcd(s.basis()).is_unit());
            for (const auto& u : probes) {
                auto w = v;
                w.push_back(u);
                CHECK(s.contains(u) == minors_gcd(w).is_zero());
            }
            for (const auto& x : v) CHECK(s.contains(x));
            // canonical under rebasing
            CHECK(SubmoduleHNF::saturate(f, rebase(f, rng, v)) == s);
            CHECK(SubmoduleHNF::saturate(f, s.basis()) == s);
        }
    }
}

TEST_CASE("phi is invariant under unimodular rebasing") {
    for (std::uint32_t q : {2u, 3u}) {
        auto S = setup(q, 1);
        std::mt19937_64 rng(q * 3);
        for (int it = 0; it < 30; ++it) {
            std::size_t l = 1 + rng() % 3;
            std::vector<LambdaVector> v;
            for (std::size_t k = 0; k < l; ++k) v.push_back(random_vector(S.f, rng, 2, 1));
            if (minors_gcd(v).is_zero()) continue;
            auto s = SubmoduleHNF::saturate(S.f, v);
            Point x{oracle::random_exact(S.f, rng, 0, -3)};
            AbsExponent a = phi_norm(x, S.fs, S.h, s);
            AbsExponent b = flow_norm_at(x, S.fs, S.h, SubmoduleHNF::from_primitive(S.f, rebase(S.f, rng, s.basis())).wedge());
            MultiVector w = MultiVector::scalar_one(S.f, 2);
            for (const auto& r : rebase(S.f, rng, s.basis())) w = wedge(w, theta_vector(S.f, 2, r));
            CHECK(a == b);
            CHECK(a == flow_norm_at(x, S.fs, S.h, w));
            PhiFunction phi(s.wedge(), S.fs, S.h);
            CHECK(phi.at(x) == a);
        }
    }
}

TEST_CASE("phi of e0 and of Theta") {
    auto S = setup(2, 2);
    LambdaVector e0{P(S.f, {1}), Poly(S.f), Poly(S.f)};
    Point x{Laurent::parse(S.f, "T^-1")};
    CHECK(phi_norm(x, S.fs, S.h, SubmoduleHNF::saturate(S.f, {e0})) ==
          AbsExponent(S.fs.eps_exp() - S.fs.delta_exp()));
    std::vector<LambdaVector> id;
    for (int i = 0; i < 3; ++i) {
        LambdaVector v(3, Poly(S.f));
        v[static_cast<std::size_t>(i)] = P(S.f, {1});
        id.push_back(v);
    }
    AbsExponent top = phi_norm(x, S.fs, S.h, SubmoduleHNF::from_primitive(S.f, id));
    CHECK(top >= AbsExponent(S.fs.beta * Rational(3 * S.fs.t)));
    CHECK(PosReal::from_rational(BigRational(1, 2)) <= PosReal::q_pow(2, top.value()));
}

TEST_CASE("cell values of phi match the points of the cell") {
    auto S = setup(2, 1);
    auto slice = PosetSlice::build(S.f, 2, 1);
    std::mt19937_64 rng(9);
    int certified = 0;
    for (int it = 0; it < 60; ++it) {
        const auto& m = slice[rng() % slice.size()];
        PhiFunction phi(m.wedge(), S.fs, S.h);
        UltraBall cell(S.f, {oracle::random_exact(S.f, rng, 0, -3)}, -static_cast<int>(rng() % 4));
        auto v = phi.on_cell(cell);
        if (!v) continue;
        ++certified;
        CellGrid g(cell, 7);
        for (std::uint64_t i = 0; i < g.size(); ++i) CHECK(phi.at(g.representative(i)) == *v);
    }
    CHECK(certified > 20);
}

TEST_CASE("poset slice") {
    auto f = field(2);
    auto s = PosetSlice::build(f, 2, 1);
    CHECK(s.longest_chain() == 3);
    CHECK(s[s.size() - 1].rank() == 3);
    // longest chain by dynamic programming over the inclusion order
    std::vector<int> best(s.size(), 1);
    int longest = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        for (std::size_t i = 0; i < j; ++i)
            if (s.leq(i, j)) best[j] = std::max(best[j], best[i] + 1);
        longest = std::max(longest, best[j]);
    }
    CHECK(longest == s.longest_chain());
    std::ostringstream os;
    s.dump(os);
    CHECK(os.str().rfind("rank\tbasis\n1\t", 0) == 0);
    std::mt19937_64 rng(4);
    for (int it = 0; it < 3000; ++it) {
        std::size_t a = rng() % s.size(), b = rng() % s.size(), c = rng() % s.size();
        CHECK(s.leq(a, a));
        if (s.leq(a, b) && s.leq(b, a)) CHECK(a == b);
        if (s.leq(a, b) && s.leq(b, c)) CHECK(s.leq(a, c));
    }
    // every slice member is primitive and distinct
    std::set<std::string> keys;
    for (const auto& m : s.members()) {
        CHECK(minors_gcd(m.basis()).is_unit());
        keys.insert(m.str());
    }
    CHECK(keys.size() == s.size());
}

TEST_CASE("protection search on constructed values") {
    auto f = field(2);
    auto s = PosetSlice::build(f, 2, 1);
    const PosReal eps = PosReal::q_pow(2, Rational(-3));
    const PosReal rho = PosReal::q_pow(2, Rational(-1));
    std::vector<AbsExponent> phi(s.size(), AbsExponent(0));
    auto empty = find_protection(phi, s, 2, eps, rho);
    REQUIRE(empty.has_value());
    CHECK(empty->empty());

    // one rank-1 member between eps and rho: the singleton chain
    phi[0] = AbsExponent(-2);
    auto one = find_protection(phi, s, 2, eps, rho);
    REQUIRE(one.has_value());
    CHECK(*one == std::vector<std::size_t>{0});

    // below eps and comparable to everything else that is small: no chain
    phi[0] = AbsExponent(-4);
    CHECK_FALSE(find_protection(phi, s, 2, eps, rho).has_value());

    // a small member incomparable to a chain element is allowed
    std::size_t other = 1;
    while (s.comparable(0, other)) ++other;
    phi[0] = AbsExponent(-2);
    phi[other] = AbsExponent(-4);
    auto inc = find_protection(phi, s, 2, eps, rho);
    REQUIRE(inc.has_value());
    CHECK(*inc == std::vector<std::size_t>{0});
}

TEST_CASE("submultiplicativity of the chain step") {
    auto S = setup(2, 1);
    std::mt19937_64 rng(500);
    int done = 0;
    while (done < 500) {
        std::size_t l = 1 + rng() % 2;
        std::vector<LambdaVector> v;
        for (std::size_t k = 0; k < l; ++k) v.push_back(random_vector(S.f, rng, 2, 1));
        LambdaVector th = random_vector(S.f, rng, 2, 1);
        auto all = v;
        all.push_back(th);
        if (minors_gcd(all).is_zero()) continue;
        auto d = SubmoduleHNF::saturate(S.f, v);
        auto big = SubmoduleHNF::saturate(S.f, all);
        Point x{oracle::random_exact(S.f, rng, 0, -4)};
        AbsExponent lhs = phi_norm(x, S.fs, S.h, big);
        AbsExponent rhs = phi_norm(x, S.fs, S.h, d) + flow_norm_at(x, S.fs, S.h, theta_vector(S.f, 2, th));
        CHECK(lhs <= rhs);
        ++done;
    }
}

TEST_CASE("protected points carry no small vectors") {
    auto S = setup(2, 1);
    auto slice = PosetSlice::build(S.f, 2, 1);
    CellGrid g(S.U, 3);
    int witnesses = 0;
    for (int j = 1; j <= 3; ++j) {
        PosReal eps = S.rho * PosReal::q_pow(2, Rational(-j));
        for (std::uint64_t i = 0; i < g.size(); ++i) {
            Point x = g.representative(i);
            auto w = find_protection(x, eps, S.rho, slice, S.fs, S.h);
            if (!w) continue;
            ++witnesses;
            auto rep = protected_implies_no_small_vector(*w, slice, 1, S.fs, S.h);
            CHECK(rep.pass());
            CHECK(rep.checked == 63);
        }
    }
    MESSAGE("witnesses: " << witnesses);
    CHECK(witnesses > 0);
}

TEST_CASE("nondivergence measure inequality") {
    auto S = setup(2, 1);
    auto slice = PosetSlice::build(S.f, 2, 1);
    auto C = sharp_affine_constant(S.f, 1, Rational(1), 1, 1, 4);
    REQUIRE(C.has_value());
    std::optional<ExactMeasure> prev;
    for (int j = 1; j <= 3; ++j) {
        PosReal eps = S.rho * PosReal::q_pow(2, Rational(-j));
        auto r = nondiv_measure_check(S.U, eps, S.rho, slice, S.fs, S.h, *C, Rational(1));
        CHECK(r.checked());
        CHECK(r.pass());
        CHECK(r.undecided.is_zero());
        CHECK(r.k == 3);
        CHECK(r.D_mu == PosReal::from_int(4));
        if (prev) CHECK(r.unprotected <= *prev);
        prev = r.unprotected;
        // pointwise count on a fine grid
        ExactMeasure grid = oracle::count_cells(S.U, 7, [&](const Point& x) {
            return !find_protection(x, eps, S.rho, slice, S.fs, S.h).has_value();
        });
        CHECK(grid == r.unprotected);
        auto j2 = nlohmann::json::parse(nondiv_report_json(r));
        for (const char* k : {"k", "C", "alpha", "N_X", "D_mu", "eps", "rho"}) CHECK(j2.contains(k));
        MESSAGE("eps/rho=2^-" << j << " unprotected=" << r.unprotected.str() << " bound=" << r.bound.str());
    }
}

TEST_CASE("eps = rho leaves the bound above any measure") {
    auto S = setup(2, 1);
    auto slice = PosetSlice::build(S.f, 2, 1);
    auto r = nondiv_measure_check(S.U, S.rho, S.rho, slice, S.fs, S.h, PosReal::from_int(1), Rational(1));
    CHECK(r.pass());
    CHECK(PosReal::from_int(1) < r.bound);
}

TEST_CASE("nonzero unprotected measure at t = 3") {
    auto S = setup(2, 3);
    auto slice = PosetSlice::build(S.f, 2, 1);
    auto C = sharp_affine_constant(S.f, 1, Rational(1), 1, 1, 4);
    REQUIRE(C.has_value());
    for (int j = 1; j <= 3; ++j) {
        PosReal eps = S.rho * PosReal::q_pow(2, Rational(-j));
        auto r = nondiv_measure_check(S.U, eps, S.rho, slice, S.fs, S.h, *C, Rational(1));
        REQUIRE(r.checked());
        CHECK(r.pass());
        CHECK(r.undecided.is_zero());
        CHECK_FALSE(r.unprotected.is_zero());
        ExactMeasure grid = oracle::count_cells(S.U, 10, [&](const Point& x) {
            return !find_protection(x, eps, S.rho, slice, S.fs, S.h).has_value();
        });
        CHECK(grid == r.unprotected);
        MESSAGE("t=3 eps/rho=2^-" << j << " unprotected=" << r.unprotected.str());
    }
}

TEST_CASE("every slice member has sup phi at least rho") {
    // Rank-one members whose last coordinate is a nonzero constant violate the
    // Diophantine condition and are exempt from the grade-one estimate; they may
    // only dip below rho at t = 0.
    struct Case { std::uint32_t q; int n; };
    for (Case c : {Case{2, 2}, Case{3, 2}, Case{2, 3}}) {
        auto slice = PosetSlice::build(field(c.q), c.n, 1);
        for (int t = 0; t <= 3; ++t) {
            auto S = setup(c.q, t, c.n);
            std::uint64_t low = 0, exempt = 0;
            for (const auto& m : slice.members()) {
                AbsExponent s = sup_flow_norm_over_U(m.wedge(), S.fs, S.h, S.U);
                if (!(PosReal::q_pow(c.q, s.value()) < S.rho)) continue;
                const Poly& qn = m.basis()[0][static_cast<std::size_t>(c.n)];
                if (m.rank() == 1 && !qn.is_zero() && qn.degree() == 0)
                    ++exempt;
                else
                    ++low;
            }
            CHECK_MESSAGE(low == 0, "q=" << c.q << " n=" << c.n << " t=" << t);
            if (t > 0) CHECK_MESSAGE(exempt == 0, "q=" << c.q << " n=" << c.n << " t=" << t);
        }
    }
}
