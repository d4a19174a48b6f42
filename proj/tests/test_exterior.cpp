#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fflab/exterior.hpp"
#include "oracles.hpp"

using namespace fflab;
using oracle::field;

namespace {

Laurent L(const FqPtr& f, const std::string& s) { return Laurent::parse(f, s); }

MultiVector random_mv(const FqPtr& f, int n, std::mt19937_64& rng, int grade, int terms) {
    MultiVector v(f, n);
    for (int k = 0; k < terms; ++k) {
        std::vector<int> pos;
        for (int p = 0; p < 2 * n; ++p) pos.push_back(p);
        std::shuffle(pos.begin(), pos.end(), rng);
        pos.resize(static_cast<std::size_t>(grade));
        std::sort(pos.begin(), pos.end());
        BasisIndex I = 0;
        for (int p : pos) I |= 1u << p;
        v.add_term(I, ScaledSeries::from_laurent(oracle::random_exact(f, rng, 2, -2)));
    }
    return v;
}

HyperplaneData lacunary_plane(const FqPtr& f) {
    Laurent l = lacunary_series(f, -200);
    return HyperplaneData::from_laurent(f, {l, l});
}

HyperplaneData random_plane(const FqPtr& f, int n, std::mt19937_64& rng) {
    std::vector<Laurent> a;
    for (int i = 0; i < n; ++i) a.push_back(oracle::random_exact(f, rng, 1, -4));
    return HyperplaneData::from_laurent(f, a);
}

}  // namespace

TEST_CASE("wedge products") {
    auto f = field(3);
    const int n = 2;
    auto e = [&](int p) { return MultiVector::e(f, n, p); };
    int one = label::plain(n, 1);
    MultiVector e01 = wedge(e(0), e(one));
    CHECK(e01.terms().size() == 1);
    CHECK(e01.coeff(1u | 1u << one).mantissa() == Laurent::one(f));
    CHECK(wedge(e(one), e(one)).is_zero());
    CHECK(wedge(e(one), e(0)).coeff(1u | 1u << one).mantissa() == -Laurent::one(f));
    MultiVector v = wedge(e(0) + e(one), e(0) - e(one));
    // -2 e_{0,1} = e_{0,1} over F_3
    CHECK(v.coeff(1u | 1u << one).mantissa() == Laurent::one(f));
    auto f2 = field(2);
    auto e2 = [&](int p) { return MultiVector::e(f2, n, p); };
    CHECK(wedge(e2(0) + e2(one), e2(0) - e2(one)).is_zero());
    CHECK(MultiVector::basis(f, 3, {3, 0, 1}).coeff(0b1011u).mantissa() == Laurent::one(f));
    CHECK(MultiVector::basis(f, 3, {1, 0, 3}).coeff(0b1011u).mantissa() == -Laurent::one(f));
}

TEST_CASE("wedge is associative and graded-commutative") {
    std::mt19937_64 rng(41);
    for (int it = 0; it < 200; ++it) {
        auto f = field(it % 2 ? 3 : 2);
        int n = 2 + it % 2;
        int ga = 1 + static_cast<int>(rng() % 2), gb = 1 + static_cast<int>(rng() % 2);
        auto a = random_mv(f, n, rng, ga, 2), b = random_mv(f, n, rng, gb, 2), c = random_mv(f, n, rng, 1, 2);
        CHECK(wedge(wedge(a, b), c).str() == wedge(a, wedge(b, c)).str());
        MultiVector ab = wedge(a, b), ba = wedge(b, a);
        if ((ga * gb) % 2) ba = ba.scale(-Laurent::one(f));
        CHECK(ab.str() == ba.str());
    }
}

TEST_CASE("projection norm") {
    auto f = field(2);
    CHECK(pi_norm(MultiVector::basis(f, 3, {label::star(1), label::star(2)})).is_neg_infinity());
    MultiVector v = MultiVector::basis(f, 2, {0, label::plain(2, 1)}).scale(L(f, "T^2"));
    CHECK(pi_norm(v) == AbsExponent(2));
    MultiVector mixed = MultiVector::basis(f, 3, {label::star(1), label::star(2)}).scale(L(f, "T^9")) +
                        MultiVector::basis(f, 3, {0, label::star(1)}).scale(L(f, "T"));
    CHECK(pi_norm(mixed) == AbsExponent(1));
    CHECK(pi_star_norm(mixed).is_neg_infinity());
}

TEST_CASE("projection norm is submultiplicative and dominates the plain part") {
    std::mt19937_64 rng(1000);
    for (int it = 0; it < 1000; ++it) {
        auto f = field(it % 3 == 0 ? 3 : 2);
        int n = 2 + it % 2;
        auto a = random_mv(f, n, rng, 1 + static_cast<int>(rng() % 2), 3);
        auto b = random_mv(f, n, rng, 1 + static_cast<int>(rng() % 2), 3);
        AbsExponent lhs = pi_norm(wedge(a, b));
        CHECK(lhs <= pi_norm(a) + pi_norm(b));
        CHECK(pi_star_norm(a) <= pi_norm(a));
    }
}

TEST_CASE("submultiplicativity on all grade-one pairs") {
    auto f = field(2);
    const int n = 2, D = 1;
    std::vector<MultiVector> ones;
    std::uint64_t per = poly_count(2, D);
    for (std::uint64_t idx = 1; idx < per * per * per * per; ++idx) {
        MultiVector v(f, n);
        std::uint64_t r = idx;
        for (int p = 0; p < 2 * n; ++p) {
            Poly c = Poly::from_index(f, r % per, D);
            r /= per;
            if (!c.is_zero()) v.add_term(1u << p, ScaledSeries::from_laurent(Laurent::from_poly(c)));
        }
        ones.push_back(v);
    }
    CHECK(ones.size() == 255);
    std::uint64_t bad = 0;
    for (const auto& a : ones)
        for (const auto& b : ones)
            if (!(pi_norm(wedge(a, b)) <= pi_norm(a) + pi_norm(b))) ++bad;
    CHECK(bad == 0);
}

TEST_CASE("u_x on basis vectors") {
    auto f = field(3);
    auto h = HyperplaneData::from_laurent(f, {L(f, "T"), L(f, "T^-1")});
    Point x{L(f, "T + 2")};
    auto img = ux_images(x, h);
    const int n = 2;
    CHECK(apply_ux(x, h, MultiVector::e(f, n, 0)).str() == MultiVector::e(f, n, 0).str());
    MultiVector expect = MultiVector::e(f, n, 0).scale(x[0]) + MultiVector::e(f, n, label::star(1)) +
                         MultiVector::e(f, n, label::plain(n, 1));
    CHECK(apply_ux(x, h, MultiVector::e(f, n, label::plain(n, 1))).str() == expect.str());
    MultiVector en = apply_ux(x, h, MultiVector::e(f, n, label::plain(n, 2)));
    CHECK(en.coeff(1u).mantissa() == h.eval(x));
    CHECK(en.coeff(1u << label::star(1)).mantissa() == h.alpha[1]);
}

TEST_CASE("u_x is unipotent") {
    std::mt19937_64 rng(2);
    for (int n : {2, 3}) {
        auto f = field(2);
        auto h = random_plane(f, n, rng);
        Point x;
        for (int i = 0; i < n - 1; ++i) x.push_back(oracle::random_exact(f, rng, 1, -2));
        Matrix M = ux_matrix(x, h);
        for (std::size_t i = 0; i < M.size(); ++i) M[i][i] = M[i][i] - Laurent::one(f);
        Matrix N2 = mat_mul(M, M);
        for (const auto& row : N2)
            for (const auto& c : row) CHECK(c.is_exact_zero());
    }
}

TEST_CASE("composition of u_x") {
    std::mt19937_64 rng(3);
    auto f = field(3);
    auto h = random_plane(f, 3, rng);
    h.alpha[0] = Laurent::zero(f);
    Point x{L(f, "T"), L(f, "1")}, y{L(f, "T^-1"), L(f, "2T")};
    Point s{x[0] + y[0], x[1] + y[1]};
    Matrix lhs = mat_mul(ux_tilde_matrix(x, h), ux_tilde_matrix(y, h));
    Matrix rhs = ux_tilde_matrix(s, h);
    for (std::size_t i = 0; i < lhs.size(); ++i)
        for (std::size_t j = 0; j < lhs.size(); ++j) CHECK(lhs[i][j] == rhs[i][j]);
    Matrix full = mat_mul(ux_matrix(x, h), ux_matrix(y, h));
    Matrix fs = ux_matrix(s, h);
    for (std::size_t j = 0; j < full.size(); ++j) CHECK(full[0][j] == fs[0][j]);
    // the starred rows pick up 2 I instead of I
    CHECK(!(full[1][3] == fs[1][3]));
    h.alpha[0] = Laurent::one(f);
    Matrix l2 = mat_mul(ux_tilde_matrix(x, h), ux_tilde_matrix(y, h));
    CHECK(!(l2[0][3] == ux_tilde_matrix(s, h)[0][3]));
}

TEST_CASE("g_t") {
    auto f = field(2);
    FlowStep fs = FlowStep::make(f, 2, 1, 0, Rational(1, 6));
    CHECK(fs.diag_exp(label::plain(2, 1)) == Rational(-11, 6));
    CHECK(fs.diag_exp(label::star(1)) == Rational(1, 6));
    CHECK(fs.diag_exp(0) == Rational(1, 6) + Rational(2));
    MultiVector top = MultiVector::basis(f, 2, {0, 1, 2, 3});
    Rational sum = fs.diag_exp(0) + fs.diag_exp(1) + fs.diag_exp(2) + fs.diag_exp(3);
    CHECK(apply_gt(fs, top).coeff(0b1111u).abs() == AbsExponent(sum));
    CHECK(apply_gt(fs, MultiVector::e(f, 2, 0)).coeff(1u).abs() == AbsExponent(fs.eps_exp() - fs.delta_exp()));
}

TEST_CASE("the top coefficient is q^(beta(n+1)t)") {
    for (int n : {2, 3})
        for (int t = 0; t <= 5; ++t)
            for (int r = 0; r <= 2; ++r)
                for (Rational beta : {Rational(1, 2 * (n + 1)), Rational(1, 3 * (n + 1)), Rational(2, 3 * (n + 1))}) {
                    auto f = field(2);
                    FlowStep fs = FlowStep::make(f, n, t, r, beta);
                    BasisIndex I = 1u | 1u << label::star(1);
                    for (int i = 2; i <= n; ++i) I |= 1u << label::plain(n, i);
                    CHECK(fs.index_exp(I) == beta * Rational((n + 1) * t));
                }
}

TEST_CASE("c_{I,w} reproduces the coefficients of u~_x w") {
    std::mt19937_64 rng(50);
    for (int it = 0; it < 50; ++it) {
        int n = 2 + it % 2;
        auto f = field(it % 3 == 0 ? 3 : 2);
        auto h = random_plane(f, n, rng);
        int l = 1 + static_cast<int>(rng() % static_cast<unsigned>(n + 1));
        MultiVector w(f, n);
        std::uint32_t pm = label::plain_mask(n);
        for (BasisIndex I = 0; I < (1u << (2 * n)); ++I)
            if ((I & ~pm) == 0 && grade_of(I) == l && rng() % 3)
                w.add_term(I, ScaledSeries::from_laurent(oracle::random_exact(f, rng, 1, 0)));
        Point x;
        for (int i = 0; i < n - 1; ++i) x.push_back(oracle::random_exact(f, rng, 1, -2));
        MultiVector img = apply_ux(x, h, w);
        for (BasisIndex I = 0; I < (1u << (2 * n)); ++I) {
            if ((I & ~pm) != 0 || grade_of(I) != l || !(I & 1u)) continue;
            auto pc = P_times(coeff_vector_cIw(I, w), h);
            Laurent v = pc[0];
            for (int i = 1; i < n; ++i) v = v + pc[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i - 1)];
            CHECK(v == img.coeff(I).rebase(Rational(0)).mantissa());
        }
    }
}

TEST_CASE("c_{I,w} of the top form") {
    auto f = field(3);
    const int n = 2;
    BasisIndex full = label::plain_mask(n);
    MultiVector w(f, n);
    w.add_term(full, ScaledSeries::from_laurent(L(f, "T + 1")));
    auto c = coeff_vector_cIw(full, w);
    CHECK(c[0] == L(f, "T + 1"));
    CHECK(c[1].is_exact_zero());
    CHECK(c[2].is_exact_zero());
    MultiVector only0(f, n);
    only0.add_term(1u | 1u << label::plain(n, 1), ScaledSeries::from_laurent(L(f, "1")));
    auto c2 = coeff_vector_cIw(1u | 1u << label::plain(n, 2), only0);
    for (const auto& x : c2) CHECK(x.is_exact_zero());
}

TEST_CASE("closed-form flow sup matches grid maximization") {
    std::mt19937_64 rng(60);
    auto f = field(2);
    UltraBall U = UltraBall::unit(f, 1);
    for (auto hk : {0, 1}) {
        auto h = hk ? lacunary_plane(f) : random_plane(f, 2, rng);
        for (int t = 0; t <= 2; ++t) {
            FlowStep fs = FlowStep::make(f, 2, t, 0, Rational(1, 6));
            for (int l = 1; l <= 3; ++l)
                enumerate_theta_wedge(f, 2, l, 1, [&](const MultiVector& w) {
                    if (rng() % 4) return;
                    AbsExponent s = sup_flow_norm_over_U(w, fs, h, U);
                    CellGrid g(U, 3);
                    AbsExponent best = AbsExponent::neg_infinity();
                    for (std::uint64_t i = 0; i < g.size(); ++i)
                        best = max(best, flow_norm_at(g.representative(i), fs, h, w));
                    CHECK(s == best);
                });
        }
    }
}

TEST_CASE("grade-one flow sup with a = 0") {
    auto f = field(2);
    auto h = HyperplaneData::from_laurent(f, {Laurent::zero(f), Laurent::zero(f)});
    UltraBall U = UltraBall::unit(f, 1);
    for (int t = 0; t <= 3; ++t) {
        FlowStep fs = FlowStep::make(f, 2, t, 0, Rational(1, 6));
        MultiVector e1 = MultiVector::e(f, 2, label::plain(2, 1));
        AbsExponent expect = max(AbsExponent(fs.eps_exp() - fs.delta_exp()),
                                 max(AbsExponent(fs.eps_exp()), AbsExponent(fs.eps_exp() - Rational(t + 1))));
        CHECK(sup_flow_norm_over_U(e1, fs, h, U) == expect);
        CHECK(expect == AbsExponent(fs.eps_exp() - fs.delta_exp()));
    }
}

TEST_CASE("choice of beta") {
    auto b1 = choose_beta(2, Rational(1), 6);
    CHECK(b1.beta == Rational(1, 6));
    CHECK(!b1.refined);
    auto b2 = choose_beta(2, Rational(1, 10), 6);
    CHECK(b2.threshold == Rational(26, 87));
    CHECK(b2.beta == Rational(3, 10));
    CHECK(b2.N == 30);
    CHECK(b2.refined);
    CHECK(b2.beta >= b2.threshold);
    CHECK(choose_beta(2, Rational(1, 2), 6).beta == Rational(1, 6));
    for (int n = 2; n <= 4; ++n)
        for (int k = 1; k < 10; ++k) {
            Rational d(k * n, 10);
            auto b = choose_beta(n, d, n + 1);
            CHECK(b.beta > Rational(0));
            CHECK(b.beta < Rational(1, n + 1));
            CHECK(b.beta >= b.threshold);
            CHECK(Rational(1) - (Rational(1, n + 1) - b.beta) * Rational(n) >= Rational(0));
        }
    CHECK_THROWS_AS(choose_beta(2, Rational(2), 6), DomainError);
}

TEST_CASE("norm-equivalence constant") {
    std::mt19937_64 rng(70);
    auto f = field(2);
    CHECK(cprime_exp(UltraBall::unit(f, 1)) == Rational(0));
    CHECK(cprime_exp(UltraBall(f, {L(f, "T^2")}, 0)) == Rational(-2));
    CHECK(cprime_exp(UltraBall(f, {Laurent::zero(f)}, -1)) == Rational(-1));
    CHECK(cprime_exp(UltraBall(f, {Laurent::zero(f)}, 2)) == Rational(0));
    // sup_U |v_0 + v.x| >= C' ||v||, by grid maximization
    for (int it = 0; it < 100; ++it) {
        UltraBall U(f, {oracle::random_exact(f, rng, 2, 0)}, -static_cast<int>(rng() % 2));
        AffineForm form{{oracle::random_exact(f, rng, 1, -2)}, oracle::random_exact(f, rng, 3, -2)};
        AbsExponent norm = max(form.y.abs(), form.beta[0].abs());
        if (norm.is_neg_infinity()) continue;
        int s = oracle::sup_by_grid(form, U, 4);
        CHECK(AbsExponent(s) >= AbsExponent(norm.value() + cprime_exp(U)));
    }
}

TEST_CASE("rho is the minimum of its three terms") {
    Rational d(1, 2);
    PosReal rho = rho_constant(2, 2, d, 0, 0);
    // 1/2, q^(2/3 - 1), q^(1/(5/2) - 1)
    CHECK(rho == PosReal::from_rational(BigRational(1, 2)));
    PosReal r2 = rho_constant(2, 2, d, -3, -3);
    CHECK(r2 == PosReal::q_pow(2, Rational(-3) + Rational(2, 3) - Rational(1)));
    PosReal r3 = rho_constant(3, 2, d, 0, -5);
    CHECK(r3 == PosReal::q_pow(3, Rational(-5) / Rational(5, 2) + Rational(2, 5) - Rational(1)));
}

TEST_CASE("flow estimates over the degree-one slice") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        auto h = lacunary_plane(f);
        Rational delta(1, 2);
        auto bc = choose_beta(2, delta, 6);
        UltraBall U = UltraBall::unit(f, 1);
        for (int r = 0; r <= 2; ++r)
            for (int t = 0; t <= 3; ++t) {
                FlowStep fs = FlowStep::make(f, 2, t, r, bc.beta);
                for (int l = 1; l <= 3; ++l) {
                    auto rep = verify_estimates(l, 1, fs, h, U, delta, 0, 0, 2);
                    CHECK(rep.pass());
                    CHECK(rep.first_line_failures == 0);
                    CHECK(rep.checked > 0);
                    if (l == 1) CHECK(rep.exempt > 0);
                }
            }
    }
}

TEST_CASE("middle grades with a degenerate hyperplane") {
    auto f = field(2);
    auto h = HyperplaneData::from_laurent(f, {Laurent::zero(f), Laurent::zero(f)});
    UltraBall U = UltraBall::unit(f, 1);
    for (int t = 0; t <= 3; ++t) {
        FlowStep fs = FlowStep::make(f, 2, t, 0, Rational(1, 6));
        auto rep = verify_estimates(2, 1, fs, h, U, Rational(1, 2), 0, 0);
        CHECK(rep.pass());
        CHECK(rep.checked == 63);
        CHECK_THROWS_AS(verify_estimates(1, 1, fs, h, U, Rational(1, 2), 0, 0), DomainError);
    }
}

TEST_CASE("estimates on a ball away from the origin") {
    auto f = field(2);
    auto h = lacunary_plane(f);
    UltraBall U(f, {L(f, "T")}, -1);
    Rational cp = cprime_exp(U);
    CHECK(cp == Rational(-2));
    for (int t = 0; t <= 2; ++t) {
        FlowStep fs = FlowStep::make(f, 2, t, 0, Rational(1, 6));
        for (int l = 2; l <= 3; ++l) CHECK(verify_estimates(l, 1, fs, h, U, Rational(1, 2), cp, cp).pass());
    }
}

TEST_CASE("enough-vectors lemma by enumeration") {
    for (std::uint32_t q : {2u, 3u}) {
        auto f = field(q);
        auto h = lacunary_plane(f);
        for (int l = 2; l <= 3; ++l) {
            auto rep = lemma_enough_oracle(l, 1, h);
            CHECK(rep.pass());
            CHECK(rep.checked == poly_count(q, 1) * (l == 2 ? poly_count(q, 1) * poly_count(q, 1) : 1) - 1);
        }
    }
    auto f = field(2);
    auto h = HyperplaneData::from_laurent(f, {L(f, "T^-1"), L(f, "1 + T^-3")});
    CHECK(lemma_enough_oracle(2, 1, h).pass());
    CHECK(lemma_enough_oracle(2, 1, HyperplaneData::from_laurent(f, {L(f, "T^-1"), L(f, "T^-2"), L(f, "1")})).pass());
    // T w scales every c_{I,w} by T
    MultiVector w(f, 2);
    w.add_term(1u | 1u << label::plain(2, 1), ScaledSeries::from_laurent(L(f, "1")));
    w.add_term(0b1100u, ScaledSeries::from_laurent(L(f, "T + 1")));
    AbsExponent a = sup_norm(P_times(coeff_vector_cIw(0b1001u, w), h));
    AbsExponent b = sup_norm(P_times(coeff_vector_cIw(0b1001u, w.scale(L(f, "T"))), h));
    CHECK(b == AbsExponent(a.value() + Rational(1)));
}

TEST_CASE("small-gradient points give short vectors") {
    auto f = field(2);
    auto h = lacunary_plane(f);
    auto psi = ApproxFunction::linear(3);
    CellGrid g(UltraBall::unit(f, 1), 6);
    for (int r = 0; r <= 1; ++r)
        for (int t = 1; t <= 3; ++t) {
            FlowStep fs = FlowStep::make(f, 2, t, r, Rational(1, 6));
            int holds = 0;
            for (std::uint64_t i = 0; i < g.size(); ++i) {
                auto res = check_inclusion_Lt(g.representative(i), fs, h, psi);
                CHECK(res.status != InclusionStatus::Fails);
                CHECK(res.status != InclusionStatus::OutOfRegime);
                if (res.status == InclusionStatus::Holds) ++holds;
            }
            CHECK(holds > 0);
        }
    FlowStep fs = FlowStep::make(f, 2, 2, 0, Rational(1, 6));
    CHECK(check_inclusion_Lt({Laurent::zero(f)}, fs, h, ApproxFunction::linear(1)).status ==
          InclusionStatus::OutOfRegime);
}
