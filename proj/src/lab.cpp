#include "fflab/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "fflab/brute.hpp"
#include "fflab/errors.hpp"
#include "fflab/good.hpp"
#include "fflab/nondiv.hpp"

namespace fflab::lab {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- config

namespace {

void reject_floats(const nlohmann::json& j, const std::string& path) {
    if (j.is_number_float()) throw ConfigError("floating-point value at " + path + "; use an integer or \"a/b\"");
    if (j.is_object())
        for (auto it = j.begin(); it != j.end(); ++it) reject_floats(it.value(), path + "." + it.key());
    if (j.is_array())
        for (std::size_t i = 0; i < j.size(); ++i) reject_floats(j[i], path + "[" + std::to_string(i) + "]");
}

Rational read_rational(const nlohmann::json& j, const std::string& key) {
    try {
        if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
        if (j.is_string()) return Rational::parse(j.get<std::string>());
        if (j.is_array() && j.size() == 2) return Rational(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
    } catch (const std::exception&) {
    }
    throw ConfigError(key + ": expected an integer, \"a/b\" or [a, b]");
}

int read_int(const nlohmann::json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError(key + ": expected an integer");
    return j.get<int>();
}

void only_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

std::vector<std::string> read_alpha_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read alpha file " + path);
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        out.push_back(line.substr(b, e - b + 1));
    }
    return out;
}

}  // namespace

LabConfig parse_config(const nlohmann::json& j, const std::string& baseDir) {
    reject_floats(j, "config");
    only_keys(j, "config", {"field", "n", "alpha", "alphaFile", "precision", "psi", "U", "delta", "degrees", "m",
                            "Tmax", "xi", "seed", "kappaExp", "good", "nondiv", "samples"});
    LabConfig c;
    if (j.contains("field")) {
        const auto& fj = j["field"];
        only_keys(fj, "field", {"p", "a", "modulus"});
        if (fj.contains("p")) c.field.p = static_cast<std::uint32_t>(read_int(fj["p"], "field.p"));
        if (fj.contains("a")) c.field.a = static_cast<std::uint32_t>(read_int(fj["a"], "field.a"));
        if (fj.contains("modulus")) {
            if (!fj["modulus"].is_array()) throw ConfigError("field.modulus: expected an array");
            for (const auto& x : fj["modulus"]) c.field.modulus.push_back(static_cast<std::uint32_t>(read_int(x, "field.modulus")));
        }
    }
    Fq::make(c.field);  // p prime, modulus irreducible
    if (j.contains("n")) c.n = read_int(j["n"], "n");
    if (c.n < 2) throw ConfigError("n must be at least 2");
    if (j.contains("alpha") && j.contains("alphaFile")) throw ConfigError("give alpha or alphaFile, not both");
    if (j.contains("alpha")) {
        if (!j["alpha"].is_array()) throw ConfigError("alpha: expected an array of strings");
        for (const auto& a : j["alpha"]) {
            if (!a.is_string()) throw ConfigError("alpha: expected strings");
            c.alpha.push_back(a.get<std::string>());
        }
    } else if (j.contains("alphaFile")) {
        std::filesystem::path p = j["alphaFile"].get<std::string>();
        if (p.is_relative()) p = std::filesystem::path(baseDir) / p;
        c.alpha = read_alpha_file(p.string());
    } else {
        c.alpha.assign(static_cast<std::size_t>(c.n), "lacunary");
    }
    if (static_cast<int>(c.alpha.size()) != c.n) throw ConfigError("alpha must have n entries");
    if (j.contains("precision")) c.prec = read_int(j["precision"], "precision");
    if (c.prec >= 0) throw ConfigError("precision must be negative");
    if (j.contains("psi")) {
        if (!j["psi"].is_string()) throw ConfigError("psi: expected a string");
        c.psi = j["psi"].get<std::string>();
    } else {
        c.psi = "s(t) = -" + std::to_string(c.n + 1) + "*t";
    }
    if (j.contains("U")) {
        const auto& u = j["U"];
        only_keys(u, "U", {"center", "radiusExp"});
        if (u.contains("center")) {
            for (const auto& x : u["center"]) {
                if (!x.is_string()) throw ConfigError("U.center: expected strings");
                c.center.push_back(x.get<std::string>());
            }
            if (static_cast<int>(c.center.size()) != c.n - 1) throw ConfigError("U.center must have n-1 entries");
        }
        if (u.contains("radiusExp")) {
            Rational r = read_rational(u["radiusExp"], "U.radiusExp");
            if (r.den() != 1) throw ConfigError("U radius must lie in q^Z");
            c.radius_exp = static_cast<int>(r.num());
        }
    }
    if (j.contains("delta")) c.delta = read_rational(j["delta"], "delta");
    if (!(c.delta > Rational(0) && c.delta < Rational(c.n))) throw ConfigError("delta must lie in (0, n)");
    if (j.contains("degrees")) {
        const auto& d = j["degrees"];
        only_keys(d, "degrees", {"dioph", "submodule", "wedge"});
        if (d.contains("dioph")) c.dioph_degree = read_int(d["dioph"], "degrees.dioph");
        if (d.contains("submodule")) c.submodule_degree = read_int(d["submodule"], "degrees.submodule");
        if (d.contains("wedge")) c.wedge_degree = read_int(d["wedge"], "degrees.wedge");
        if (c.dioph_degree < 0 || c.submodule_degree < 0 || c.wedge_degree < 0)
            throw ConfigError("degree caps must be nonnegative");
    }
    if (j.contains("m")) c.m = read_int(j["m"], "m");
    if (j.contains("Tmax")) c.tmax = read_int(j["Tmax"], "Tmax");
    if (c.m < 0 || c.tmax < 0) throw ConfigError("m and Tmax must be nonnegative");
    if (j.contains("xi")) c.xi = read_rational(j["xi"], "xi");
    if (!(c.xi > Rational(0) && c.xi < Rational(1))) throw ConfigError("xi must lie in (0, 1)");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned()) throw ConfigError("seed: expected a nonnegative integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("kappaExp")) c.kappa_exp = read_int(j["kappaExp"], "kappaExp");
    if (c.kappa_exp > 0) throw ConfigError("kappaExp must be <= 0");
    if (j.contains("good")) {
        const auto& g = j["good"];
        only_keys(g, "good", {"m", "J"});
        if (g.contains("m")) c.good_m = read_int(g["m"], "good.m");
        if (g.contains("J")) c.good_j = read_int(g["J"], "good.J");
        if (c.good_m < 0 || c.good_j < 0) throw ConfigError("good.m and good.J must be nonnegative");
    }
    if (j.contains("nondiv")) {
        const auto& nd = j["nondiv"];
        only_keys(nd, "nondiv", {"t", "epsSteps", "stabilityDegree"});
        if (nd.contains("t")) {
            c.nondiv_t.clear();
            for (const auto& t : nd["t"]) c.nondiv_t.push_back(read_int(t, "nondiv.t"));
        }
        if (nd.contains("epsSteps")) c.eps_steps = read_int(nd["epsSteps"], "nondiv.epsSteps");
        if (nd.contains("stabilityDegree")) c.stability_degree = read_int(nd["stabilityDegree"], "nondiv.stabilityDegree");
    }
    if (j.contains("samples")) c.samples = read_int(j["samples"], "samples");
    if (c.samples < 0) throw ConfigError("samples must be nonnegative");
    // the remaining checks need the field
    make_context(c);
    return c;
}

LabConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j, std::filesystem::path(path).parent_path().string());
}

ojson LabConfig::echo() const {
    ojson j;
    j["field"] = {{"p", field.p}, {"a", field.a}, {"modulus", field.modulus}};
    j["n"] = n;
    j["alpha"] = alpha;
    j["precision"] = prec;
    j["psi"] = psi;
    j["U"] = {{"center", center}, {"radiusExp", radius_exp}};
    j["delta"] = delta.str();
    j["degrees"] = {{"dioph", dioph_degree}, {"submodule", submodule_degree}, {"wedge", wedge_degree}};
    j["m"] = m;
    j["Tmax"] = tmax;
    j["xi"] = xi.str();
    j["seed"] = seed;
    j["kappaExp"] = kappa_exp;
    j["good"] = {{"m", good_m}, {"J", good_j}};
    j["nondiv"] = {{"t", nondiv_t}, {"epsSteps", eps_steps}, {"stabilityDegree", stability_degree}};
    j["samples"] = samples;
    return j;
}

namespace {

Poly read_poly(const FqPtr& f, const std::string& s) {
    Laurent l = Laurent::parse(f, s);
    if (!l.is_exact()) throw ConfigError("'" + s + "' must be an exact polynomial");
    for (const auto& [e, c] : l.terms())
        if (e < 0) throw ConfigError("'" + s + "' must be a polynomial");
    return l.to_poly();
}

HyperplaneData make_hyperplane(const FqPtr& f, const LabConfig& c) {
    std::vector<Laurent> a;
    std::vector<std::optional<RationalFunction>> exact;
    for (const auto& s : c.alpha) {
        if (s == "lacunary") {
            a.push_back(lacunary_series(f, c.prec));
            exact.emplace_back();
        } else if (s.rfind("rational:", 0) == 0) {
            std::string body = s.substr(9);
            auto slash = body.find('/');
            if (slash == std::string::npos) throw ConfigError("rational alpha needs P/Q: " + s);
            Poly num = read_poly(f, body.substr(0, slash));
            Poly den = read_poly(f, body.substr(slash + 1));
            if (den.is_zero()) throw ConfigError("zero denominator in " + s);
            RationalFunction r(num, den);
            a.push_back(Laurent::from_rational(r, c.prec));
            exact.emplace_back(r);
        } else {
            Laurent l = Laurent::parse(f, s);
            if (l.is_exact()) {
                bool poly = true;
                for (const auto& [e, v] : l.terms()) poly = poly && e >= 0;
                if (poly) {
                    exact.emplace_back(RationalFunction(l.to_poly(), Poly::constant(f, f->one())));
                    a.push_back(l);
                    continue;
                }
            }
            a.push_back(l);
            exact.emplace_back();
        }
    }
    HyperplaneData h = HyperplaneData::from_laurent(f, a);
    h.exact = exact;
    return h;
}

}  // namespace

LabContext make_context(const LabConfig& c) {
    FqPtr f = Fq::make(c.field);
    Point center;
    if (c.center.empty())
        center.assign(static_cast<std::size_t>(c.n - 1), Laurent::zero(f));
    else
        for (const auto& s : c.center) {
            Laurent x = Laurent::parse(f, s);
            if (!x.is_exact()) throw ConfigError("U.center entries must be exact");
            center.push_back(x);
        }
    return {f, make_hyperplane(f, c), UltraBall(f, center, c.radius_exp), ApproxFunction::parse(c.psi)};
}

// ---------------------------------------------------------------- reports

std::string exactness_str(Exactness e) {
    switch (e) {
        case Exactness::Exact: return "exact";
        case Exactness::SliceBounded: return "slice-bounded";
        case Exactness::Heuristic: return "heuristic";
    }
    return "?";
}

Record& RunReport::add(std::string check, std::string value, Exactness cls, std::optional<bool> pass,
                       ojson params) {
    records.push_back({std::move(check), std::move(params), std::move(value), cls, pass});
    return records.back();
}

bool RunReport::pass() const {
    return std::all_of(records.begin(), records.end(), [](const Record& r) { return r.pass.value_or(true); });
}

std::string report_json(const RunReport& r) {
    ojson j;
    j["command"] = r.command;
    j["config"] = r.config;
    j["constants"] = ojson::array();
    for (const auto& c : r.constants)
        j["constants"].push_back({{"name", c.name}, {"value", c.value}, {"approx", c.approx},
                                  {"class", exactness_str(c.cls)}, {"source", c.source}, {"anchor", c.anchor}});
    j["records"] = ojson::array();
    for (const auto& x : r.records) {
        ojson e{{"check", x.check}, {"params", x.params}, {"value", x.value}, {"class", exactness_str(x.cls)}};
        e["pass"] = x.pass ? ojson(*x.pass) : ojson(nullptr);
        j["records"].push_back(e);
    }
    j["warnings"] = r.warnings;
    j["verdict"] = r.pass() ? "pass" : "fail";
    if (r.seconds) j["seconds"] = *r.seconds;
    return j.dump(2) + "\n";
}

std::string report_tsv(const RunReport& r) {
    std::ostringstream os;
    os << "kind\tname\tcontext\tvalue\tclass\tnote\n";
    for (const auto& c : r.constants)
        os << "constant\t" << c.name << "\t" << c.source << "\t" << c.value << "\t" << exactness_str(c.cls) << "\t~"
           << c.approx << "; " << c.anchor << "\n";
    for (const auto& x : r.records)
        os << "record\t" << x.check << "\t" << x.params.dump() << "\t" << x.value << "\t" << exactness_str(x.cls)
           << "\t" << (x.pass ? (*x.pass ? "pass" : "FAIL") : "-") << "\n";
    for (const auto& w : r.warnings) os << "warning\t-\t-\t" << w << "\t-\t-\n";
    os << "verdict\t" << r.command << "\t-\t" << (r.pass() ? "pass" : "fail") << "\t-\t-\n";
    if (r.seconds) os << "timing\tseconds\t-\t" << *r.seconds << "\t-\t-\n";
    return os.str();
}

// ---------------------------------------------------------------- constants

namespace {

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::string big_dec(const BigRational& r) { return fmt(r.convert_to<double>()); }

ExactMeasure sum_measures(const std::vector<ExactMeasure>& v, std::uint32_t q) {
    ExactMeasure s = ExactMeasure::zero(q);
    for (const auto& x : v) s += x;
    return s;
}

}  // namespace

PosReal K0_constant(std::uint32_t q, int n, const PosReal& C, int N_X, const PosReal& D, const PosReal& rho) {
    PosReal ND2 = PosReal::from_int(N_X) * D * D;
    return PosReal::from_int(n + 1) * C * ND2.pow(Rational(n + 1)) * PosReal::q_pow(q, Rational(1, n + 1)) /
           rho.pow(Rational(1, n - 1));
}

CertifiedReal geometric_constant(std::uint32_t q, const Rational& c) {
    if (!(c > Rational(0))) throw DomainError("geometric ratio must be below 1");
    CertifiedReal one = CertifiedReal::exact(1);
    return one / (one - CertifiedReal::from(PosReal::q_pow(q, -c)));
}

CertifiedReal geometric_partial(std::uint32_t q, const Rational& c, int T) {
    // Horner: 1 + x(1 + x(1 + ...)) keeps the expression tree shallow in width
    CertifiedReal x = CertifiedReal::from(PosReal::q_pow(q, -c));
    CertifiedReal s = CertifiedReal::exact(1);
    for (int t = 1; t <= T; ++t) s = CertifiedReal::exact(1) + x * s;
    return s;
}

Constants compute_constants(const LabConfig& c, const LabContext& ctx) {
    const std::uint32_t q = ctx.f->q();
    const int n = c.n;
    Constants k;
    k.beta = choose_beta(n, c.delta, 2 * (n + 1)).beta;
    k.cprime_exp = cprime_exp(ctx.U);
    k.cdprime_exp = k.cprime_exp;
    k.rho = rho_constant(q, n, c.delta, k.cprime_exp, k.cdprime_exp);
    k.alpha = Rational(1, n - 1);
    auto C = sharp_affine_constant(ctx.f, n - 1, k.alpha, 1, c.good_m, c.good_j);
    k.C = C ? *C : PosReal::from_int(1);
    k.D = doubling_constant(q, n);
    k.K0 = K0_constant(q, n, k.C, k.N_X, k.D, k.rho);
    k.K1_rate = (Rational(1, n + 1) - k.beta) / Rational(n - 1);
    k.K1 = geometric_constant(q, k.K1_rate);
    if (ctx.psi.is_linear() && ctx.psi.slope() > n) {
        k.sum_psi = sum_psi_total(ctx.psi, q, n);
        k.sum_psi_closed = true;
    } else {
        k.sum_psi = sum_psi_partial(ctx.psi, q, n, c.tmax);
    }
    k.kappa = kappa_bound(c.xi, n, q, k.sum_psi, CertifiedReal::from(k.K0), k.K1);
    return k;
}

void add_constants(RunReport& r, const Constants& k, std::uint32_t q) {
    auto add = [&](std::string name, std::string value, std::string approx, std::string source, std::string anchor) {
        r.constants.push_back({std::move(name), std::move(value), std::move(approx), Exactness::Exact,
                               std::move(source), std::move(anchor)});
    };
    auto qexp = [&](const Rational& e) { return PosReal::q_pow(q, e); };
    add("beta", k.beta.str(), fmt(k.beta.to_double()), "exterior-flow", "flow exponent beta, midpoint of its admissible range");
    add("C'", qexp(k.cprime_exp).str(), fmt(qexp(k.cprime_exp).to_double()), "exterior-flow",
        "norm equivalence on U: sup_U |x~.v| >= C' ||v||");
    add("C''", qexp(k.cdprime_exp).str(), fmt(qexp(k.cdprime_exp).to_double()), "exterior-flow",
        "grade-one constant, taken equal to C'");
    add("rho", k.rho.str(), fmt(k.rho.to_double()), "exterior-flow", "lower bound for sup_U phi over every submodule");
    add("alpha", k.alpha.str(), fmt(k.alpha.to_double()), "good-functions", "goodness exponent 1/(n-1)");
    add("C", k.C.str(), fmt(k.C.to_double()), "good-functions", "sharp goodness constant of affine forms");
    add("N_X", std::to_string(k.N_X), std::to_string(k.N_X), "nondivergence", "covolume normalisation");
    add("D", k.D.str(), fmt(k.D.to_double()), "nondivergence", "doubling constant of the 3-dilation");
    add("K0", k.K0.str(), fmt(k.K0.to_double()), "lab-cli", "(n+1) C (N D^2)^(n+1) q^(1/(n+1)) / rho^(1/(n-1))");
    add("K1", "1/(1-q^-(" + k.K1_rate.str() + "))", fmt(k.K1.approx()), "lab-cli",
        "sum over t of q^(-(1/(n+1)-beta)t/(n-1))");
    add("sumPsi", big_str(k.sum_psi), big_dec(k.sum_psi), "dioph-core",
        k.sum_psi_closed ? "sum of psi(q^t) q^(nt)(q^n-1), closed form" : "sum of psi(q^t) q^(nt)(q^n-1), partial to Tmax");
    add("kappa", PosReal::q_pow(q, Rational(-k.kappa.r)).str(), "q^-" + std::to_string(k.kappa.r), "dioph-core",
        "largest q^-r below min{1, xi/(2 q sumPsi), (xi/(2 K0 K1))^(n^2-1)}, term " +
            std::to_string(k.kappa.binding) + " binding");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const PrecisionInsufficient*>(&e)) return 3;
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DomainError*>(&e) ||
        dynamic_cast<const nlohmann::json::exception*>(&e))
        return 2;
    return 1;
}

// ---------------------------------------------------------------- commands

namespace {

RunReport start(const std::string& cmd, const LabConfig& c) {
    RunReport r;
    r.command = cmd;
    r.config = c.echo();
    return r;
}

}  // namespace

RunReport cmd_field_selftest(const LabConfig& c) {
    RunReport r = start("field-selftest", c);
    LabContext ctx = make_context(c);
    const FqPtr& f = ctx.f;
    const std::uint32_t q = f->q();
    std::mt19937_64 rng(c.seed);

    // field axioms: exhaustive on triples up to q = 16, sampled above
    std::uint64_t bad = 0, checked = 0;
    auto triple = [&](FqElem x, FqElem y, FqElem z) {
        ++checked;
        bool ok = f->add(f->add(x, y), z) == f->add(x, f->add(y, z)) &&
                  f->mul(f->mul(x, y), z) == f->mul(x, f->mul(y, z)) &&
                  f->mul(x, f->add(y, z)) == f->add(f->mul(x, y), f->mul(x, z)) && f->add(x, y) == f->add(y, x) &&
                  f->mul(x, y) == f->mul(y, x) && f->add(x, f->neg(x)) == f->zero() && f->mul(x, f->one()) == x;
        if (x != f->zero()) ok = ok && f->mul(x, f->inv(x)) == f->one();
        if (!ok) ++bad;
    };
    if (q <= 16) {
        for (std::uint32_t a = 0; a < q; ++a)
            for (std::uint32_t b = 0; b < q; ++b)
                for (std::uint32_t d = 0; d < q; ++d) triple(f->element(a), f->element(b), f->element(d));
    } else {
        for (int i = 0; i < c.samples * 10; ++i)
            triple(f->element(static_cast<std::uint32_t>(rng() % q)), f->element(static_cast<std::uint32_t>(rng() % q)),
                   f->element(static_cast<std::uint32_t>(rng() % q)));
    }
    r.add("field axioms", std::to_string(checked) + " triples, " + std::to_string(bad) + " failures",
          Exactness::Exact, bad == 0, {{"q", q}, {"exhaustive", q <= 16}});

    // absolute value: multiplicative, ultrametric, inverse
    bad = 0;
    for (int i = 0; i < c.samples; ++i) {
        Laurent x = brute::random_exact(f, rng, 2, -4), y = brute::random_exact(f, rng, 2, -4);
        if (x.is_exact_zero() || y.is_exact_zero()) continue;
        int dx = brute::degree_by_scan(x, 2, -4), dy = brute::degree_by_scan(y, 2, -4);
        Laurent p = x * y, s = x + y;
        bool ok = brute::degree_by_scan(p, 4, -8) == dx + dy;
        int ds = brute::degree_by_scan(s, 2, -4);
        ok = ok && (ds == INT32_MIN || ds <= std::max(dx, dy));
        ok = ok && (dx == dy || ds == std::max(dx, dy));
        Laurent one = x * x.invert(-40);
        ok = ok && one.abs_less_than(1) && brute::degree_by_scan(one - Laurent::one(f), 0, -30) == INT32_MIN;
        if (!ok) ++bad;
    }
    r.add("absolute value", std::to_string(bad) + " failures", Exactness::Exact, bad == 0, {{"samples", c.samples}});

    // Haar: tiling, sup of linear forms, strips and sublevel sets against grid counts
    std::uint64_t tiles = 0, sups = 0, strips = 0, subs = 0;
    for (int i = 0; i < c.samples; ++i) {
        int d = 1 + static_cast<int>(rng() % 2);
        Point beta, cen;
        for (int k = 0; k < d; ++k) {
            beta.push_back(brute::random_exact(f, rng, 1, -1));
            cen.push_back(brute::random_exact(f, rng, 1, 0));
        }
        UltraBall b(f, cen, -static_cast<int>(rng() % 2));
        int m = (d == 2 && q > 2) ? 2 : 3;
        CellGrid g(b, m);
        if (!(g.cell_measure().times(BigInt(g.size())) == measure(b))) ++tiles;
        AffineForm form{beta, brute::random_exact(f, rng, 1, -1)};
        AbsExponent s = sup_linear_on_ball(form, b);
        int o = brute::sup_by_grid(form, b, m);
        if (!(o == INT32_MIN ? s.is_neg_infinity() : s == AbsExponent(o))) ++sups;
        // predicates of level q^-j with j + grad + 1 <= m are constant on grid cells
        int grad = form.grad_exp().is_neg_infinity() ? 0 : static_cast<int>(form.grad_exp().value().num());
        int j = m - 1 - std::max(grad, 0);
        if (!form.grad_exp().is_neg_infinity() && form.grad_exp() >= AbsExponent(0)) {
            ExactMeasure sm = strip_measure(beta, form.y, j, b);
            ExactMeasure gm = brute::count_cells(b, m, [&](const Point& x) {
                return brute::degree_by_scan(form.eval(x), 4, -12) < -j;
            });
            if (!(sm == gm)) ++strips;
        }
        ExactMeasure lm = sublevel_measure(form, -j, b);
        ExactMeasure lg = brute::count_cells(b, m, [&](const Point& x) {
            return brute::degree_by_scan(form.eval(x), 4, -12) < -j;
        });
        if (!(lm == lg)) ++subs;
    }
    r.add("grid tiling", std::to_string(tiles) + " failures", Exactness::Exact, tiles == 0);
    r.add("sup of linear forms vs grid", std::to_string(sups) + " mismatches", Exactness::Exact, sups == 0);
    r.add("strip measure vs grid", std::to_string(strips) + " mismatches", Exactness::Exact, strips == 0);
    r.add("sublevel measure vs grid", std::to_string(subs) + " mismatches", Exactness::Exact, subs == 0);
    return r;
}

RunReport cmd_dioph_check(const LabConfig& c) {
    RunReport r = start("dioph-check", c);
    LabContext ctx = make_context(c);
    auto rep = check_dioph_condition(ctx.h, c.delta, c.dioph_degree);
    if (!rep.precision_failures.empty())
        throw PrecisionInsufficient("Diophantine condition undecided for q' = " + rep.precision_failures.front().str());
    r.add("checked", std::to_string(rep.checked), Exactness::Exact);
    r.add("constant violations", std::to_string(rep.constant_violations), Exactness::Exact);
    for (const auto& v : rep.violations)
        if (v.degree() > 0) r.add("violation", v.str(), Exactness::Exact, std::nullopt, {{"deg", v.degree()}});
    for (const auto& Q : rep.structural_moduli) r.add("structural modulus", Q.str(), Exactness::Exact);
    r.add("verdict", verdict_str(rep.verdict), Exactness::Heuristic, rep.verdict != DiophVerdict::Structural,
          {{"delta", c.delta.str()}, {"D", c.dioph_degree}});
    return r;
}

RunReport cmd_khintchine(const LabConfig& c, int jobs) {
    RunReport r = start("khintchine", c);
    LabContext ctx = make_context(c);
    const FqPtr& f = ctx.f;
    const std::uint32_t q = f->q();
    const int n = c.n;
    if (!(ctx.psi.is_linear() && ctx.psi.slope() > n))
        r.warnings.push_back(ctx.psi.is_linear() ? "sum of psi(q^t) q^(nt) diverges; the table is still exact"
                                                 : "convergence of a tabulated psi is not decided");
    const Rational beta = choose_beta(n, c.delta, 2 * (n + 1)).beta;
    const BigRational lamU = measure(ctx.U).value();
    std::vector<BigRational> totals;
    for (int t = 0; t <= c.tmax; ++t) {
        const int level = ctx.psi.s(t) + c.kappa_exp;
        ExactMeasure small = lambda_Lt(t, GradientClass::Small, ctx.h, ctx.psi, c.kappa_exp, ctx.U);
        ExactMeasure large = lambda_Lt(t, GradientClass::Large, ctx.h, ctx.psi, c.kappa_exp, ctx.U);
        ExactMeasure any = lambda_Lt(t, GradientClass::Any, ctx.h, ctx.psi, c.kappa_exp, ctx.U);
        ojson p{{"t", t}};
        r.add("lambda(L_t^<)", small.str(), Exactness::Exact, std::nullopt, p);
        // the large-gradient union is at most q lambda(U) kappa psi(q^t) times the shell size
        BigRational bound = BigRational(q) * lamU * ExactMeasure::q_power(q, level).value() *
                            BigRational(shell_size(q, n, t));
        r.add("lambda(L_t^>=)", large.str() + " <= " + big_str(bound), Exactness::Exact, large.value() <= bound, p);
        r.add("lambda(L_t)", any.str(), Exactness::Exact, any <= small + large, p);
        totals.push_back(any.value());

        // the strip bound for each large-gradient q of the shell
        std::uint64_t qs = 0, viol = 0;
        shell_enumerate(f, n, t, [&](const std::vector<Poly>& qv) {
            if (small_gradient(qv, ctx.h)) return;
            ++qs;
            if (!verify_prop31(qv, ctx.h, -level, ctx.U).pass) ++viol;
        });
        r.add("strip bound", std::to_string(qs) + " vectors, " + std::to_string(viol) + " violations",
              Exactness::Exact, viol == 0, p);

        // small-gradient points give short vectors
        std::uint64_t holds = 0, vac = 0, out = 0, fails = 0;
        FlowStep fs = FlowStep::make(f, n, t, -c.kappa_exp, beta);
        CellGrid g(ctx.U, c.m);
        std::vector<InclusionStatus> st(g.size());
        auto work = [&](std::uint64_t lo, std::uint64_t hi) {
            for (std::uint64_t i = lo; i < hi; ++i) st[i] = check_inclusion_Lt(g.representative(i), fs, ctx.h, ctx.psi).status;
        };
        {
            const int J = std::max(1, jobs);
            std::vector<std::thread> pool;
            std::uint64_t step = (g.size() + J - 1) / J;
            for (int w = 0; w < J; ++w) {
                std::uint64_t lo = std::min<std::uint64_t>(g.size(), w * step), hi = std::min<std::uint64_t>(g.size(), lo + step);
                pool.emplace_back(work, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        for (auto s : st) {
            if (s == InclusionStatus::Holds) ++holds;
            if (s == InclusionStatus::Vacuous) ++vac;
            if (s == InclusionStatus::OutOfRegime) ++out;
            if (s == InclusionStatus::Fails) ++fails;
        }
        r.add("inclusion in short-vector set",
              "holds " + std::to_string(holds) + ", vacuous " + std::to_string(vac) + ", out of regime " +
                  std::to_string(out) + ", fails " + std::to_string(fails),
              Exactness::Exact, fails == 0, {{"t", t}, {"m", c.m}});
        r.add("psi partial sum", big_str(sum_psi_partial(ctx.psi, q, n, t)), Exactness::Exact, std::nullopt, p);
    }
    BigRational direct = sum_psi_direct(f, ctx.psi, n, c.tmax);
    BigRational closed = sum_psi_partial(ctx.psi, q, n, c.tmax);
    r.add("psi sum by enumeration", big_str(direct), Exactness::Exact, direct == closed, {{"Tmax", c.tmax}});
    bool tail = true;
    for (std::size_t t = 2; t < totals.size(); ++t) tail = tail && totals[t] <= totals[t - 1];
    r.add("tail", tail ? "nonincreasing from t=1" : "not monotone", Exactness::Exact);
    return r;
}

RunReport cmd_quantitative(const LabConfig& c) {
    RunReport r = start("quantitative", c);
    LabContext ctx = make_context(c);
    const std::uint32_t q = ctx.f->q();
    Constants k = compute_constants(c, ctx);
    add_constants(r, k, q);
    if (!k.sum_psi_closed) r.warnings.push_back("sum of psi taken as a partial sum up to Tmax");

    // K1: the closed form against summed partial sums; the tail after T terms is q^(-c(T+1)) K1
    const BigRational tol(1, 1000000000);
    int T = 0;
    BigRational gapLo, gapHi;
    for (;; T += 8) {
        auto [kl, kh] = k.K1.enclose(96);
        auto [pl, ph] = geometric_partial(q, k.K1_rate, T).enclose(96);
        gapLo = kl - ph;
        gapHi = kh - pl;
        if (gapHi < tol || T > 20000) break;
    }
    r.add("K1 closed form vs partial sums", "gap in [" + big_dec(gapLo) + ", " + big_dec(gapHi) + "]",
          Exactness::Exact, gapHi < tol && gapLo > -tol, {{"T", T}, {"tolerance", "1e-9"}});
    {
        auto [tl, th] = (k.K1 * CertifiedReal::from(PosReal::q_pow(q, -k.K1_rate * Rational(T + 1)))).enclose(96);
        r.add("K1 tail identity", "tail in [" + big_dec(tl) + ", " + big_dec(th) + "]", Exactness::Exact,
              tl <= gapHi && gapLo <= th, {{"T", T}});
    }

    const int kexp = -k.kappa.r;
    const BigRational lamU = measure(ctx.U).value();
    const BigRational half = to_big(c.xi) / 2 * lamU;
    std::vector<ExactMeasure> smalls, larges;
    for (int t = 0; t <= c.tmax; ++t) {
        smalls.push_back(lambda_Lt(t, GradientClass::Small, ctx.h, ctx.psi, kexp, ctx.U));
        larges.push_back(lambda_Lt(t, GradientClass::Large, ctx.h, ctx.psi, kexp, ctx.U));
        r.add("lambda(L_t^<(kappa))", smalls.back().str(), Exactness::Exact, std::nullopt, {{"t", t}});
        r.add("lambda(L_t^>=(kappa))", larges.back().str(), Exactness::Exact, std::nullopt, {{"t", t}});
    }
    ExactMeasure ss = sum_measures(smalls, q), sl = sum_measures(larges, q);
    r.add("sum lambda(L_t^<(kappa)) < (xi/2) lambda(U)", ss.str() + " < " + big_str(half), Exactness::Exact,
          ss.value() < half, {{"Tmax", c.tmax}});
    r.add("sum lambda(L_t^>=(kappa)) < (xi/2) lambda(U)", sl.str() + " < " + big_str(half), Exactness::Exact,
          sl.value() < half, {{"Tmax", c.tmax}});
    ExactMeasure u = lambda_union_L(c.tmax, ctx.h, ctx.psi, kexp, ctx.U);
    r.add("lambda(union L(q, kappa)) < xi lambda(U)", u.str() + " < " + big_str(2 * half), Exactness::Exact,
          u.value() < 2 * half, {{"Tmax", c.tmax}});
    r.add("union within the two sums", u.str(), Exactness::Exact, u <= ss + sl);
    return r;
}

RunReport cmd_good_check(const LabConfig& c, int jobs) {
    RunReport r = start("good-check", c);
    LabContext ctx = make_context(c);
    const int d = c.n - 1;
    const Rational alpha(1, c.n - 1);
    auto Cs = sharp_affine_constant(ctx.f, d, alpha, 1, c.good_m, c.good_j);
    PosReal C = Cs ? *Cs : PosReal::from_int(1);
    r.constants.push_back({"C", C.str(), fmt(C.to_double()), Exactness::Exact, "good-functions",
                           "sharp goodness constant of affine forms"});
    r.constants.push_back({"alpha", alpha.str(), fmt(alpha.to_double()), Exactness::Exact, "good-functions",
                           "goodness exponent 1/(n-1)"});
    auto fr = certify_flow_coefficients(ctx.h, ctx.U, C, c.wedge_degree, c.good_m, c.good_j, jobs);
    r.add("flow coefficients",
          std::to_string(fr.forms) + " forms, " + std::to_string(fr.distinct) + " distinct, " +
              std::to_string(fr.failures) + " failures, " + std::to_string(fr.undecided) + " undecided",
          Exactness::Exact, fr.pass(),
          {{"D", c.wedge_degree}, {"dilation", fr.dilation}, {"m", c.good_m}, {"J", c.good_j}});
    r.add("least C needed", fr.needed_C ? fr.needed_C->str() : "any", Exactness::Exact,
          !fr.needed_C || *fr.needed_C <= C);
    // closure properties on x_1 and T x_1 + 1
    Point zero(static_cast<std::size_t>(d), Laurent::zero(ctx.f));
    Point e1 = zero;
    e1[0] = Laurent::one(ctx.f);
    Point te1 = zero;
    te1[0] = Laurent::monomial(ctx.f, 1, ctx.f->one());
    auto fx = TestFunction::affine(ctx.f, AffineForm{e1, Laurent::zero(ctx.f)});
    auto gx = TestFunction::affine(ctx.f, AffineForm{te1, Laurent::one(ctx.f)});
    auto l42 = lemma42_property_suite(fx, gx, ctx.U, C, alpha, c.good_m, c.good_j);
    r.add("closure: scaling", l42.scaling ? "holds" : "fails", Exactness::Exact, l42.scaling);
    r.add("closure: max of two", l42.sup ? "holds" : "fails", Exactness::Exact, l42.sup);
    r.add("closure: unit multiple", l42.comparable ? "holds" : "fails", Exactness::Exact, l42.comparable);
    r.add("closure: weakening", l42.weakening ? "holds" : "fails", Exactness::Exact, l42.weakening);
    r.add("closure: restriction", l42.restriction ? "holds" : "fails", Exactness::Exact, l42.restriction);
    return r;
}

RunReport cmd_nondiv(const LabConfig& c) {
    RunReport r = start("nondiv", c);
    LabContext ctx = make_context(c);
    const std::uint32_t q = ctx.f->q();
    const int n = c.n;
    Constants k;
    k.beta = choose_beta(n, c.delta, 2 * (n + 1)).beta;
    k.cprime_exp = cprime_exp(ctx.U);
    k.rho = rho_constant(q, n, c.delta, k.cprime_exp, k.cprime_exp);
    k.alpha = Rational(1, n - 1);
    auto Cs = sharp_affine_constant(ctx.f, n - 1, k.alpha, 1, c.good_m, c.good_j);
    k.C = Cs ? *Cs : PosReal::from_int(1);
    r.constants.push_back({"beta", k.beta.str(), fmt(k.beta.to_double()), Exactness::Exact, "exterior-flow",
                           "flow exponent beta"});
    r.constants.push_back({"rho", k.rho.str(), fmt(k.rho.to_double()), Exactness::Exact, "exterior-flow",
                           "lower bound for sup_U phi over every submodule"});
    r.constants.push_back({"C", k.C.str(), fmt(k.C.to_double()), Exactness::Exact, "good-functions",
                           "sharp goodness constant of affine forms"});
    r.constants.push_back({"alpha", k.alpha.str(), fmt(k.alpha.to_double()), Exactness::Exact, "good-functions",
                           "goodness exponent 1/(n-1)"});

    const int D = c.submodule_degree;
    auto slice = PosetSlice::build(ctx.f, n, D);
    r.add("slice", std::to_string(slice.size()) + " submodules, longest chain " + std::to_string(slice.longest_chain()),
          Exactness::Exact, std::nullopt, {{"D", D}});
    std::optional<PosetSlice> wide;
    if (c.stability_degree > D) wide = PosetSlice::build(ctx.f, n, c.stability_degree);

    for (int t : c.nondiv_t) {
        FlowStep fs = FlowStep::make(ctx.f, n, t, 0, k.beta);
        CellGrid g(ctx.U, c.m);
        for (int j = 1; j <= c.eps_steps; ++j) {
            PosReal eps = k.rho * PosReal::q_pow(q, Rational(-j));
            ojson p{{"t", t}, {"epsOverRho", "q^-" + std::to_string(j)}};
            std::uint64_t witnesses = 0, viol = 0;
            for (std::uint64_t i = 0; i < g.size(); ++i) {
                auto w = find_protection(g.representative(i), eps, k.rho, slice, fs, ctx.h);
                if (!w) continue;
                ++witnesses;
                if (!protected_implies_no_small_vector(*w, slice, D, fs, ctx.h).pass()) ++viol;
            }
            ojson pc = p;
            pc["m"] = c.m;
            r.add("protected points carry no short vector",
                  std::to_string(witnesses) + " of " + std::to_string(g.size()) + " cells protected, " +
                      std::to_string(viol) + " violations",
                  Exactness::SliceBounded, viol == 0, pc);
            auto rep = nondiv_measure_check(ctx.U, eps, k.rho, slice, fs, ctx.h, k.C, k.alpha, c.good_m, c.good_j);
            std::string v = rep.checked() ? rep.unprotected.str() + " <= " + rep.bound.str() : "skipped: " + rep.skipped;
            if (!rep.undecided.is_zero()) v += ", undecided " + rep.undecided.str();
            ojson pm = p;
            pm["k"] = rep.k;
            pm["N_X"] = rep.N_X;
            pm["D"] = rep.D_mu.str();
            r.add("unprotected measure bound", v, Exactness::SliceBounded, rep.checked() && rep.pass(), pm);
            if (wide) {
                auto rep2 = nondiv_measure_check(ctx.U, eps, k.rho, *wide, fs, ctx.h, k.C, k.alpha, c.good_m, c.good_j);
                ojson ps = p;
                ps["D2"] = c.stability_degree;
                r.add("stable under a larger slice", rep2.unprotected.str(), Exactness::SliceBounded,
                      rep2.checked() && rep2.unprotected == rep.unprotected && rep2.undecided.is_zero(), ps);
            }
        }
    }
    return r;
}

RunReport cmd_constants(const LabConfig& c) {
    RunReport r = start("constants", c);
    LabContext ctx = make_context(c);
    add_constants(r, compute_constants(c, ctx), ctx.f->q());
    return r;
}

}  // namespace fflab::lab
