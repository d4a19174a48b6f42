#include "fflab/nondiv.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <ostream>
#include <set>
#include <stdexcept>

#include "fflab/errors.hpp"

namespace fflab {

// ---------------------------------------------------------------- linear algebra over Lambda

namespace {

void row_axpy(LambdaVector& dst, const Poly& c, const LambdaVector& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = dst[i] - c * src[i];
}

bool is_zero_vec(const LambdaVector& v) {
    return std::all_of(v.begin(), v.end(), [](const Poly& p) { return p.is_zero(); });
}

std::size_t width_of(const std::vector<LambdaVector>& v) {
    if (v.empty()) throw DomainError("no vectors");
    for (const auto& r : v)
        if (r.size() != v.front().size()) throw DomainError("vectors of different lengths");
    return v.front().size();
}

}  // namespace

Poly poly_det(const std::vector<LambdaVector>& rows) {
    const std::size_t k = rows.size();
    if (k == 0) throw DomainError("empty determinant");
    const FqPtr& f = rows[0][0].field();
    if (k == 1) return rows[0][0];
    Poly det(f);
    for (std::size_t c = 0; c < k; ++c) {
        if (rows[0][c].is_zero()) continue;
        std::vector<LambdaVector> minor;
        for (std::size_t r = 1; r < k; ++r) {
            LambdaVector row;
            for (std::size_t j = 0; j < k; ++j)
                if (j != c) row.push_back(rows[r][j]);
            minor.push_back(std::move(row));
        }
        Poly term = rows[0][c] * poly_det(minor);
        det = (c % 2 == 0) ? det + term : det - term;
    }
    return det;
}

Poly minors_gcd(const std::vector<LambdaVector>& vectors) {
    const std::size_t w = width_of(vectors);
    const std::size_t l = vectors.size();
    const FqPtr& f = vectors[0][0].field();
    Poly g(f);
    std::vector<std::size_t> pick(l);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
        if (depth == l) {
            std::vector<LambdaVector> sq(l, LambdaVector(l, Poly(f)));
            for (std::size_t r = 0; r < l; ++r)
                for (std::size_t c = 0; c < l; ++c) sq[r][c] = vectors[r][pick[c]];
            g = gcd(g, poly_det(sq));
            return;
        }
        for (std::size_t j = from; j < w; ++j) {
            pick[depth] = j;
            rec(depth + 1, j + 1);
        }
    };
    if (l <= w) rec(0, 0);
    return g;
}

std::vector<LambdaVector> hermite_rows(const FqPtr& f, std::vector<LambdaVector> rows) {
    if (rows.empty()) return rows;
    const std::size_t w = width_of(rows);
    std::size_t r = 0;
    for (std::size_t c = 0; c < w && r < rows.size(); ++c) {
        while (true) {
            std::optional<std::size_t> best;
            for (std::size_t i = r; i < rows.size(); ++i)
                if (!rows[i][c].is_zero() && (!best || rows[i][c].degree() < rows[*best][c].degree())) best = i;
            if (!best) break;
            std::swap(rows[r], rows[*best]);
            bool clean = true;
            for (std::size_t i = r + 1; i < rows.size(); ++i) {
                if (rows[i][c].is_zero()) continue;
                row_axpy(rows[i], rows[i][c] / rows[r][c], rows[r]);
                if (!rows[i][c].is_zero()) clean = false;
            }
            if (clean) break;
        }
        if (rows[r][c].is_zero()) continue;
        FqElem s = f->inv(rows[r][c].lead());
        for (auto& p : rows[r]) p = p.scale(s);
        for (std::size_t i = 0; i < r; ++i)
            if (!rows[i][c].is_zero()) row_axpy(rows[i], rows[i][c] / rows[r][c], rows[r]);
        ++r;
    }
    rows.erase(std::remove_if(rows.begin(), rows.end(), is_zero_vec), rows.end());
    return rows;
}

// ---------------------------------------------------------------- SubmoduleHNF

SubmoduleHNF SubmoduleHNF::saturate(const FqPtr& f, const std::vector<LambdaVector>& vectors) {
    const std::size_t w = width_of(vectors);
    const std::size_t l = vectors.size();
    if (l > w) throw DomainError("rank-deficient basis");
    // Row-reduce the (n+1) x l column matrix by unimodular row operations V,
    // tracking W = V^-1. Then the saturation is spanned by the first l columns of W.
    std::vector<LambdaVector> A(w, LambdaVector(l, Poly(f)));
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < w; ++i) A[i][j] = vectors[j][i];
    std::vector<LambdaVector> W(w, LambdaVector(w, Poly(f)));
    for (std::size_t i = 0; i < w; ++i) W[i][i] = Poly::constant(f, f->one());
    auto swap_rows = [&](std::size_t a, std::size_t b) {
        if (a == b) return;
        std::swap(A[a], A[b]);
        for (auto& row : W) std::swap(row[a], row[b]);
    };
    for (std::size_t j = 0; j < l; ++j) {
        while (true) {
            std::optional<std::size_t> best;
            for (std::size_t i = j; i < w; ++i)
                if (!A[i][j].is_zero() && (!best || A[i][j].degree() < A[*best][j].degree())) best = i;
            if (!best) throw DomainError("rank-deficient basis");
            swap_rows(j, *best);
            bool clean = true;
            for (std::size_t i = j + 1; i < w; ++i) {
                if (A[i][j].is_zero()) continue;
                Poly qt = A[i][j] / A[j][j];
                row_axpy(A[i], qt, A[j]);
                for (auto& row : W) row[j] = row[j] + qt * row[i];
                if (!A[i][j].is_zero()) clean = false;
            }
            if (clean) break;
        }
    }
    std::vector<LambdaVector> basis(l, LambdaVector(w, Poly(f)));
    for (std::size_t j = 0; j < l; ++j)
        for (std::size_t i = 0; i < w; ++i) basis[j][i] = W[i][j];
    SubmoduleHNF s;
    s.f_ = f;
    s.n_ = static_cast<int>(w) - 1;
    s.rows_ = hermite_rows(f, basis);
    return s;
}

SubmoduleHNF SubmoduleHNF::from_primitive(const FqPtr& f, const std::vector<LambdaVector>& vectors) {
    Poly g = minors_gcd(vectors);
    if (g.is_zero()) throw DomainError("rank-deficient basis");
    if (!g.is_unit()) throw DomainError("span is not primitive (minor gcd " + g.str() + ")");
    SubmoduleHNF s;
    s.f_ = f;
    s.n_ = static_cast<int>(width_of(vectors)) - 1;
    s.rows_ = hermite_rows(f, vectors);
    return s;
}

bool SubmoduleHNF::contains(const LambdaVector& v) const {
    if (static_cast<int>(v.size()) != n_ + 1) throw DomainError("vector length mismatch");
    LambdaVector r = v;
    for (const auto& row : rows_) {
        std::size_t c = 0;
        while (row[c].is_zero()) ++c;
        if (r[c].is_zero()) continue;
        auto [qt, rem] = r[c].divmod(row[c]);
        if (!rem.is_zero()) return false;
        row_axpy(r, qt, row);
    }
    return is_zero_vec(r);
}

bool SubmoduleHNF::contains(const SubmoduleHNF& o) const {
    if (o.rank() > rank()) return false;
    return std::all_of(o.rows_.begin(), o.rows_.end(), [&](const LambdaVector& v) { return contains(v); });
}

MultiVector theta_vector(const FqPtr& f, int n, const LambdaVector& v) {
    MultiVector m(f, n);
    for (int i = 0; i <= n; ++i) {
        const Poly& p = v[static_cast<std::size_t>(i)];
        if (p.is_zero()) continue;
        int pos = i == 0 ? label::zero() : label::plain(n, i);
        m.add_term(1u << pos, ScaledSeries::from_laurent(Laurent::from_poly(p)));
    }
    return m;
}

MultiVector SubmoduleHNF::wedge() const {
    MultiVector w = MultiVector::scalar_one(f_, n_);
    for (const auto& r : rows_) w = fflab::wedge(w, theta_vector(f_, n_, r));
    return w;
}

std::string SubmoduleHNF::str() const {
    std::string s;
    for (std::size_t j = 0; j < rows_.size(); ++j) {
        if (j) s += ";";
        s += "(";
        for (std::size_t i = 0; i < rows_[j].size(); ++i) {
            if (i) s += ",";
            s += rows_[j][i].str();
        }
        s += ")";
    }
    return s;
}

std::vector<LambdaVector> small_vectors(const FqPtr& f, int n, int D) {
    const std::uint64_t per = poly_count(f->q(), D);
    std::uint64_t total = 1;
    for (int i = 0; i <= n; ++i) total *= per;
    std::vector<LambdaVector> out;
    out.reserve(total - 1);
    for (std::uint64_t idx = 1; idx < total; ++idx) {
        LambdaVector v;
        std::uint64_t r = idx;
        for (int i = 0; i <= n; ++i) {
            v.push_back(Poly::from_index(f, r % per, D));
            r /= per;
        }
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------- PosetSlice

namespace {

/// v minus the Lambda-combination of the Hermite rows that reduces each pivot entry.
LambdaVector reduce_mod(const SubmoduleHNF& d, const LambdaVector& v) {
    LambdaVector r = v;
    for (const auto& row : d.basis()) {
        std::size_t c = 0;
        while (row[c].is_zero()) ++c;
        if (!r[c].is_zero()) row_axpy(r, r[c] / row[c], row);
    }
    return r;
}

}  // namespace

PosetSlice PosetSlice::build(const FqPtr& f, int n, int D) {
    PosetSlice s;
    s.n_ = n;
    s.D_ = D;
    const auto vecs = small_vectors(f, n, D);
    std::map<std::string, std::size_t> seen;
    auto add = [&](SubmoduleHNF d) {
        std::string key = d.str();
        if (seen.count(key)) return;
        seen.emplace(key, s.members_.size());
        s.members_.push_back(std::move(d));
    };
    for (const auto& v : vecs) add(SubmoduleHNF::saturate(f, {v}));
    std::size_t lo = 0;
    for (int rank = 2; rank <= n + 1; ++rank) {
        std::size_t hi = s.members_.size();
        for (std::size_t i = lo; i < hi; ++i) {
            const SubmoduleHNF base = s.members_[i];
            // sat(Delta + v) only depends on v modulo Delta and up to its content
            std::set<std::string> tried;
            for (const auto& v : vecs) {
                LambdaVector r = reduce_mod(base, v);
                if (is_zero_vec(r)) continue;
                Poly g(f);
                for (const auto& p : r) g = gcd(g, p);
                std::string key;
                for (auto& p : r) {
                    p = p / g;
                    key += p.str() + ",";
                }
                if (!tried.insert(key).second) continue;
                auto b = base.basis();
                b.push_back(r);
                add(SubmoduleHNF::saturate(f, b));
            }
        }
        lo = hi;
    }
    return s;
}

std::optional<std::size_t> PosetSlice::find(const SubmoduleHNF& d) const {
    for (std::size_t i = 0; i < members_.size(); ++i)
        if (members_[i] == d) return i;
    return std::nullopt;
}

bool PosetSlice::leq(std::size_t i, std::size_t j) const {
    if (i == j) return true;
    const auto& a = members_[i];
    const auto& b = members_[j];
    return a.rank() < b.rank() && b.contains(a);
}

int PosetSlice::longest_chain() const {
    int out = 0;
    for (const auto& m : members_) out = std::max(out, m.rank());
    return out;
}

void PosetSlice::dump(std::ostream& os) const {
    os << "rank\tbasis\n";
    for (const auto& m : members_) os << m.rank() << '\t' << m.str() << '\n';
}

// ---------------------------------------------------------------- phi

AbsExponent phi_norm(const Point& x, const FlowStep& fs, const HyperplaneData& h, const SubmoduleHNF& d) {
    return flow_norm_at(x, fs, h, d.wedge());
}

PhiFunction::PhiFunction(const MultiVector& w, const FlowStep& fs, const HyperplaneData& h) {
    for (const auto& [I, form] : ux_coefficient_forms(w, h)) {
        bool zero = form.y.is_exact_zero() &&
                    std::all_of(form.beta.begin(), form.beta.end(), [](const Laurent& b) { return b.is_exact_zero(); });
        if (!zero) parts_.emplace_back(fs.index_exp(I), form);
    }
}

AbsExponent PhiFunction::at(const Point& x) const {
    AbsExponent best;
    std::optional<Rational> loose;
    for (const auto& [e, form] : parts_) {
        Laurent v = form.eval(x);
        if (v.is_certified()) {
            best = max(best, v.abs() + AbsExponent(e));
        } else {
            Rational u = Rational(v.degree_upper_bound()) + e;
            loose = loose ? std::max(*loose, u) : u;
        }
    }
    if (loose && !(AbsExponent(*loose) < best)) throw PrecisionInsufficient("phi depends on an uncertified value");
    return best;
}

std::optional<AbsExponent> PhiFunction::on_cell(const UltraBall& cell) const {
    AbsExponent certain;
    AbsExponent unsure;
    for (const auto& [e, form] : parts_) {
        AbsExponent g;
        for (const auto& b : form.beta)
            if (!b.is_exact_zero()) g = max(g, AbsExponent(b.degree_upper_bound() + cell.radius_exp()));
        Laurent v = form.eval(cell.center());
        if (v.is_certified() && !v.is_exact_zero() && g < v.abs()) {
            certain = max(certain, v.abs() + AbsExponent(e));
        } else {
            AbsExponent u = max(g, v.is_exact_zero() ? AbsExponent() : AbsExponent(v.degree_upper_bound()));
            unsure = max(unsure, u + AbsExponent(e));
        }
    }
    if (unsure.is_neg_infinity() || unsure < certain) return certain;
    return std::nullopt;
}

// ---------------------------------------------------------------- protection

std::optional<std::vector<std::size_t>> find_protection(const std::vector<AbsExponent>& phi, const PosetSlice& s,
                                                        std::uint32_t q, const PosReal& eps, const PosReal& rho,
                                                        std::uint64_t chainBudget) {
    if (rho < eps) throw DomainError("protection needs eps <= rho");
    const std::size_t N = s.size();
    if (phi.size() != N) throw DomainError("one phi value per slice member");
    std::vector<char> small(N), cand(N);
    for (std::size_t i = 0; i < N; ++i) {
        if (phi[i].is_neg_infinity()) {
            small[i] = 1;
            continue;
        }
        PosReal v = PosReal::q_pow(q, phi[i].value());
        small[i] = v < rho;
        cand[i] = eps <= v && v <= rho;
    }
    std::vector<std::size_t> need;
    for (std::size_t i = 0; i < N; ++i)
        if (small[i]) need.push_back(i);
    std::vector<std::size_t> cands;
    for (std::size_t i = 0; i < N; ++i)
        if (cand[i]) cands.push_back(i);

    std::vector<std::size_t> chain;
    std::uint64_t visited = 0;
    auto ok = [&]() {
        for (std::size_t i : need) {
            if (std::find(chain.begin(), chain.end(), i) != chain.end()) continue;
            bool escapes = false;
            for (std::size_t c : chain)
                if (!s.comparable(i, c)) {
                    escapes = true;
                    break;
                }
            if (!escapes) return false;
        }
        return true;
    };
    std::function<bool(std::size_t, std::size_t)> grow = [&](std::size_t target, std::size_t from) {
        if (++visited > chainBudget) throw std::runtime_error("protection search exceeded its chain budget");
        if (chain.size() == target) return ok();
        for (std::size_t a = from; a < cands.size(); ++a) {
            std::size_t c = cands[a];
            if (!chain.empty() && !(s.leq(chain.back(), c) && chain.back() != c)) continue;
            chain.push_back(c);
            if (grow(target, a + 1)) return true;
            chain.pop_back();
        }
        return false;
    };
    for (std::size_t size = 0; size <= static_cast<std::size_t>(s.n() + 1) && size <= cands.size(); ++size) {
        chain.clear();
        if (grow(size, 0)) return chain;
    }
    return std::nullopt;
}

std::optional<ProtectionWitness> find_protection(const Point& x, const PosReal& eps, const PosReal& rho,
                                                 const PosetSlice& s, const FlowStep& fs, const HyperplaneData& h) {
    std::vector<AbsExponent> phi;
    phi.reserve(s.size());
    for (const auto& m : s.members()) phi.push_back(phi_norm(x, fs, h, m));
    auto chain = find_protection(phi, s, h.field->q(), eps, rho);
    if (!chain) return std::nullopt;
    return ProtectionWitness{x, *chain, eps, rho};
}

SmallVectorReport protected_implies_no_small_vector(const ProtectionWitness& w, const PosetSlice& s, int D,
                                                    const FlowStep& fs, const HyperplaneData& h) {
    const FqPtr& f = h.field;
    const int n = h.n;
    const std::uint32_t q = f->q();
    SmallVectorReport rep;
    auto qp = [&](const AbsExponent& e) {
        return e.is_neg_infinity() ? std::optional<PosReal>() : std::optional<PosReal>(PosReal::q_pow(q, e.value()));
    };
    auto at_least = [&](const AbsExponent& e, const PosReal& bound) {
        auto v = qp(e);
        return v && bound <= *v;
    };
    std::vector<LambdaVector> id;
    for (int i = 0; i <= n; ++i) {
        LambdaVector v(static_cast<std::size_t>(n + 1), Poly(f));
        v[static_cast<std::size_t>(i)] = Poly::constant(f, f->one());
        id.push_back(v);
    }
    SubmoduleHNF theta_all = SubmoduleHNF::from_primitive(f, id);
    std::vector<const SubmoduleHNF*> chain;
    for (std::size_t i : w.chain) chain.push_back(&s[i]);
    if (chain.empty() || !(*chain.back() == theta_all)) chain.push_back(&theta_all);

    for (const auto& v : small_vectors(f, n, D)) {
        ++rep.checked;
        AbsExponent nv = flow_norm_at(w.x, fs, h, theta_vector(f, n, v));
        if (at_least(nv, w.eps)) continue;
        ++rep.violations;
        std::size_t i = 0;
        while (!chain[i]->contains(v)) ++i;
        std::vector<LambdaVector> b;
        AbsExponent prev(0);
        if (i > 0) {
            b = chain[i - 1]->basis();
            prev = phi_norm(w.x, fs, h, *chain[i - 1]);
        }
        b.push_back(v);
        SubmoduleHNF delta = SubmoduleHNF::saturate(f, b);
        AbsExponent pd = phi_norm(w.x, fs, h, delta);
        std::string why = "theta " + SubmoduleHNF::saturate(f, {v}).str() + " in Delta_" + std::to_string(i + 1);
        if (!(pd <= prev + nv)) why += ": submultiplicativity fails";
        auto idx = s.find(delta);
        bool in_chain = idx && std::find(w.chain.begin(), w.chain.end(), *idx) != w.chain.end();
        if (!idx) why += ": Delta outside the slice";
        else if (in_chain && !at_least(pd, w.eps)) why += ": condition (a) fails on Delta";
        else if (!in_chain && !at_least(pd, w.rho)) why += ": condition (b) fails on Delta";
        rep.diagnoses.push_back(why);
    }
    return rep;
}

// ---------------------------------------------------------------- measure check

bool NondivReport::pass() const {
    if (!checked()) return false;
    return compare(bound, (unprotected + undecided).value()) >= 0;
}

PosReal doubling_constant(std::uint32_t q, int n) {
    return PosReal::q_pow(q, Rational((n - 1) * three_power_dilation(q, 1)));
}

NondivReport nondiv_measure_check(const UltraBall& B, const PosReal& eps, const PosReal& rho,
                                  const PosetSlice& s, const FlowStep& fs, const HyperplaneData& h,
                                  const PosReal& C, const Rational& alpha, int goodM, int goodJ, int maxDepth) {
    const int n = h.n;
    const std::uint32_t q = h.field->q();
    NondivReport r;
    r.k = n + 1;
    r.C = C;
    r.alpha = alpha;
    r.N_X = 1;
    r.D_mu = doubling_constant(q, n);
    r.eps = eps;
    r.rho = rho;
    r.unprotected = ExactMeasure::zero(q);
    r.undecided = ExactMeasure::zero(q);
    PosReal ND2 = PosReal::from_int(r.N_X) * r.D_mu * r.D_mu;
    r.bound = PosReal::from_int(r.k) * C * ND2.pow(Rational(r.k)) * (eps / rho).pow(alpha) *
              PosReal::from_rational(measure(B).value());

    r.longest_chain = s.longest_chain();
    r.chain_ok = r.longest_chain <= r.k;

    std::vector<PhiFunction> phis;
    std::vector<AffineForm> forms;
    for (const auto& m : s.members()) {
        phis.emplace_back(m.wedge(), fs, h);
        for (const auto& [e, form] : phis.back().parts()) forms.push_back(form);
    }
    // phi_Delta is the max of |T^e form|; each form good makes the max good
    FlowGoodReport good = certify_affine_family(forms, B.dilate(three_power_dilation(q, r.k)), C, alpha, goodM, goodJ);
    r.good_ok = good.pass();

    r.lower_ok = true;
    for (const auto& m : s.members()) {
        AbsExponent sup;
        try {
            sup = sup_flow_norm_over_U(m.wedge(), fs, h, B);
        } catch (const PrecisionInsufficient&) {
            r.lower_ok = false;
            break;
        }
        if (sup.is_neg_infinity() || PosReal::q_pow(q, sup.value()) < rho) {
            r.lower_ok = false;
            break;
        }
    }
    if (!r.chain_ok) r.skipped = "a chain longer than k";
    else if (!r.good_ok) r.skipped = "some phi is not certified (C, alpha)-good";
    else if (!r.lower_ok) r.skipped = "some ||phi||_B is below rho";
    if (!r.checked()) return r;

    std::function<void(const UltraBall&, int)> visit = [&](const UltraBall& cell, int depth) {
        std::vector<AbsExponent> vals;
        vals.reserve(phis.size());
        for (const auto& p : phis) {
            auto v = p.on_cell(cell);
            if (!v) break;
            vals.push_back(*v);
        }
        if (vals.size() == phis.size()) {
            if (!find_protection(vals, s, q, eps, rho)) r.unprotected += measure(cell);
            return;
        }
        if (depth >= maxDepth) {
            r.undecided += measure(cell);
            return;
        }
        for (const auto& c : cell.children()) visit(c, depth + 1);
    };
    visit(B, 0);
    return r;
}

std::string nondiv_report_json(const NondivReport& r) {
    nlohmann::json j;
    j["k"] = r.k;
    j["C"] = r.C.str();
    j["alpha"] = r.alpha.str();
    j["N_X"] = r.N_X;
    j["D_mu"] = r.D_mu.str();
    j["eps"] = r.eps.str();
    j["rho"] = r.rho.str();
    j["unprotected"] = r.unprotected.str();
    j["undecided"] = r.undecided.str();
    j["bound"] = r.bound.str();
    j["boundApprox"] = r.bound.to_double();
    j["longestChain"] = r.longest_chain;
    j["hypotheses"] = {{"chain", r.chain_ok}, {"good", r.good_ok}, {"lower", r.lower_ok}};
    j["protection"] = "slice-protected";
    if (!r.skipped.empty()) j["skipped"] = r.skipped;
    j["pass"] = r.pass();
    return j.dump(2);
}

}  // namespace fflab
