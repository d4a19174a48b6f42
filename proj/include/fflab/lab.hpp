#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "fflab/dioph.hpp"
#include "fflab/exterior.hpp"
#include "fflab/haar.hpp"
#include "fflab/posreal.hpp"

namespace fflab::lab {

/// Run parameters. Rationals are strings "a/b"; floats are rejected.
struct LabConfig {
    FqConfig field;
    int n = 2;
    /// One entry per alpha_i: "lacunary", "rational:P/Q" or a Laurent literal.
    std::vector<std::string> alpha;
    int prec = -200;
    std::string psi = "s(t) = -3*t";
    std::vector<std::string> center;  ///< empty: the origin
    int radius_exp = 0;
    Rational delta{1, 2};
    int dioph_degree = 4;
    int submodule_degree = 1;
    int wedge_degree = 1;
    int m = 3;
    int tmax = 3;
    Rational xi{1, 2};
    std::uint64_t seed = 1;
    int kappa_exp = 0;          ///< khintchine: kappa = q^kappa_exp
    int good_m = 1, good_j = 4;
    std::vector<int> nondiv_t{1};
    int eps_steps = 3;
    int stability_degree = 0;   ///< nondiv: rerun on the slice of this degree (0 = off)
    int samples = 200;          ///< field-selftest: seeded instances per suite

    nlohmann::ordered_json echo() const;
};

/// Validates: p prime, modulus irreducible, delta in (0, n), xi in (0, 1),
/// integral radius exponent, alpha of length n. Throws ConfigError.
LabConfig parse_config(const nlohmann::json& j, const std::string& baseDir = ".");
LabConfig load_config(const std::string& path);

/// Field, hyperplane, ball and psi built from a config.
struct LabContext {
    FqPtr f;
    HyperplaneData h;
    UltraBall U;
    ApproxFunction psi;
};
LabContext make_context(const LabConfig& c);

enum class Exactness { Exact, SliceBounded, Heuristic };
std::string exactness_str(Exactness e);

struct Record {
    std::string check;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    std::string value;
    Exactness cls = Exactness::Exact;
    std::optional<bool> pass;   ///< none for informational rows
};

struct ConstantRecord {
    std::string name;
    std::string value;
    std::string approx;
    Exactness cls = Exactness::Exact;
    std::string source;   ///< defining module
    std::string anchor;   ///< what it is in the argument
};

struct RunReport {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<ConstantRecord> constants;
    std::vector<Record> records;
    std::vector<std::string> warnings;
    std::optional<double> seconds;

    Record& add(std::string check, std::string value, Exactness cls, std::optional<bool> pass = std::nullopt,
                nlohmann::ordered_json params = nlohmann::ordered_json::object());
    bool pass() const;
    int exit_code() const { return pass() ? 0 : 1; }
};

std::string report_json(const RunReport& r);
/// "kind<TAB>name<TAB>context<TAB>value<TAB>class<TAB>note", one line per
/// constant (context = module, note = approximation and anchor), record
/// (context = parameters, note = pass/FAIL/-) and warning.
std::string report_tsv(const RunReport& r);

/// Every constant of the quantitative statement, in dependency order.
struct Constants {
    Rational beta;
    Rational cprime_exp;    ///< C' = q^cprime_exp
    Rational cdprime_exp;   ///< C'' = C'
    PosReal rho;
    Rational alpha;         ///< 1/(n-1)
    PosReal C;
    int N_X = 1;
    PosReal D;              ///< doubling constant of the 3-dilation
    PosReal K0;
    Rational K1_rate;       ///< K1 = sum_t q^(-K1_rate t)
    CertifiedReal K1 = CertifiedReal::exact(1);
    BigRational sum_psi;
    bool sum_psi_closed = false;  ///< full series in closed form, else partial sum to Tmax
    KappaResult kappa;
};

/// K0 = (n+1) C (N_X D^2)^(n+1) q^(1/(n+1)) / rho^(1/(n-1)).
PosReal K0_constant(std::uint32_t q, int n, const PosReal& C, int N_X, const PosReal& D, const PosReal& rho);
/// 1/(1 - q^-c), certified.
CertifiedReal geometric_constant(std::uint32_t q, const Rational& c);
/// sum_{t=0}^{T} q^(-c t), certified.
CertifiedReal geometric_partial(std::uint32_t q, const Rational& c, int T);

Constants compute_constants(const LabConfig& c, const LabContext& ctx);
void add_constants(RunReport& r, const Constants& k, std::uint32_t q);

/// Subcommands. Each returns a report whose exit_code is 0 or 1; configuration
/// problems throw ConfigError or DomainError, precision problems PrecisionInsufficient.
RunReport cmd_field_selftest(const LabConfig& c);
RunReport cmd_dioph_check(const LabConfig& c);
RunReport cmd_khintchine(const LabConfig& c, int jobs = 1);
RunReport cmd_quantitative(const LabConfig& c);
RunReport cmd_good_check(const LabConfig& c, int jobs = 1);
RunReport cmd_nondiv(const LabConfig& c);
RunReport cmd_constants(const LabConfig& c);

/// Exit code for an exception escaping a command: 2 config, 3 precision, 1 otherwise.
int exit_code_for(const std::exception& e);

}  // namespace fflab::lab
