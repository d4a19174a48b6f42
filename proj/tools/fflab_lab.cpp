#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>

#include "fflab/errors.hpp"
#include "fflab/lab.hpp"

using namespace fflab;

namespace {

struct Options {
    std::string config;
    std::string out;
    std::string format = "tsv";
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    bool timing = false;
};

int run(const std::string& cmd, const Options& o) {
    lab::LabConfig c;
    try {
        c = o.config.empty() ? lab::parse_config(nlohmann::json::object()) : lab::load_config(o.config);
        if (o.seed) c.seed = *o.seed;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    lab::RunReport r;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (cmd == "field-selftest") r = lab::cmd_field_selftest(c);
        else if (cmd == "dioph-check") r = lab::cmd_dioph_check(c);
        else if (cmd == "khintchine") r = lab::cmd_khintchine(c, o.jobs);
        else if (cmd == "quantitative") r = lab::cmd_quantitative(c);
        else if (cmd == "good-check") r = lab::cmd_good_check(c, o.jobs);
        else if (cmd == "nondiv") r = lab::cmd_nondiv(c);
        else r = lab::cmd_constants(c);
    } catch (const std::exception& e) {
        int code = lab::exit_code_for(e);
        std::cerr << cmd << ": " << e.what() << "\n";
        return code;
    }
    if (o.timing) r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::string text = o.format == "json" ? lab::report_json(r) : lab::report_tsv(r);
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(o.out);
        if (!f) {
            std::cerr << "cannot write " << o.out << "\n";
            return 2;
        }
        f << text;
    }
    return r.exit_code();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Function-field Khintchine lab"};
    app.require_subcommand(1);
    Options o;
    const std::vector<std::pair<std::string, std::string>> cmds{
        {"field-selftest", "field, Laurent and Haar invariant suites"},
        {"dioph-check", "Diophantine condition on the hyperplane up to the degree cap"},
        {"khintchine", "per-shell measures, strip bounds and the short-vector inclusion"},
        {"quantitative", "constants, kappa and the bad-set measure against xi"},
        {"good-check", "goodness certificates of the flow coefficients"},
        {"nondiv", "protection and the unprotected-measure inequality"},
        {"constants", "beta, rho, C, C', C'', K0, K1 and kappa"},
    };
    for (const auto& [name, help] : cmds) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "write the report here instead of stdout");
        sub->add_option("--format", o.format, "report format")->check(CLI::IsMember({"tsv", "json"}));
        sub->add_option("--jobs", o.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", o.seed, "seed for randomized suites (overrides the config)");
        sub->add_flag("--timing", o.timing, "record wall time in the report");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return run(app.get_subcommands().front()->get_name(), o);
}
