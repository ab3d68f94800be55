// iadmm: solve corpus problems, run verification suites, fit convergence rates.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>

#include <CLI11.hpp>
#include <json.hpp>

#include "iadmm/errors.hpp"
#include "iadmm/outer.hpp"
#include "iadmm/problems.hpp"
#include "iadmm/verify.hpp"

namespace fs = std::filesystem;
using namespace iadmm;
using nlohmann::json;

namespace {

struct Flags {
    std::string problem = "qp-0-m3";
    std::string mode = "convex";
    std::string rule = "adaptive";
    std::optional<double> tol, alpha, sigma, rho;
    std::optional<long> max_outer;
    std::optional<std::uint64_t> seed;
    std::string out = "iadmm-out";
};

void add_solver_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--problem", f.problem, "corpus id: qp-<seed>-m<m>[-mu<v>], lasso-<seed>, img-<seed>-s<side>");
    cmd->add_option("--mode", f.mode, "convex, strong or exact")->check(CLI::IsMember({"convex", "strong", "exact"}));
    cmd->add_option("--rule", f.rule, "inner parameter rule")->check(CLI::IsMember({"constant", "adaptive"}));
    cmd->add_option("--tol", f.tol, "stop when eps <= tol");
    cmd->add_option("--max-outer", f.max_outer, "outer iteration cap");
    cmd->add_option("--alpha", f.alpha, "back-substitution step in (0, 1)");
    cmd->add_option("--sigma", f.sigma, "line-search parameter in (0, 1)");
    cmd->add_option("--rho", f.rho, "penalty (fixed modes)");
    cmd->add_option("--seed", f.seed, "replaces the seed in the corpus id");
    cmd->add_option("--out", f.out, "output directory");
}

std::string with_seed(const std::string& id, const std::optional<std::uint64_t>& seed) {
    if (!seed) return id;
    static const std::regex re(R"(^(qp|lasso|img)-\d+)");
    return std::regex_replace(id, re, "$1-" + std::to_string(*seed), std::regex_constants::format_first_only);
}

SolverParams params_for(const CorpusEntry& e, const Flags& f) {
    SolverParams p = default_params(e);
    p.mode = parse_mode(f.mode);
    p.rule = parse_rule(f.rule);
    if (f.tol) p.tol = *f.tol;
    if (f.max_outer) p.max_outer = *f.max_outer;
    if (f.alpha) p.alpha = *f.alpha;
    if (f.sigma) p.sigma = *f.sigma;
    if (f.rho) p.rho = *f.rho;
    p.validate();
    return p;
}

json params_json(const SolverParams& p) {
    return {{"mode", to_string(p.mode)},   {"rule", to_string(p.rule)},
            {"rho", p.rho},                {"alpha", p.alpha},
            {"sigma", p.sigma},            {"tol", p.tol},
            {"max_outer", p.max_outer},    {"max_inner", p.max_inner},
            {"delta_min", p.delta_min},    {"delta_max", p.delta_max},
            {"eta", p.eta},                {"c_psi", p.c_psi},
            {"theta", {p.theta1, p.theta2, p.theta3}},
            {"gamma_init", p.gamma_init == GammaInit::safeguard ? "safeguard" : "power-iteration"}};
}

void write_manifest(const fs::path& dir, const std::string& command, const std::string& id,
                    const SolverParams* p, const Flags& f, const json& outputs, const json& result) {
    json m = {{"command", command}, {"problem", id}, {"outputs", outputs}, {"result", result}};
    if (p) m["params"] = params_json(*p);
    if (f.seed) m["seed"] = *f.seed;
    std::ofstream(dir / "manifest.json") << m.dump(2) << '\n';
}

int cmd_solve(const Flags& f) {
    const std::string id = with_seed(f.problem, f.seed);
    const CorpusEntry e = load_corpus(id);
    const SolverParams p = params_for(e, f);
    SolveOptions o;
    o.reference = e.reference;
    const SolveReport r = solve(e.problem, p, o);

    fs::create_directories(f.out);
    const fs::path hist = fs::path(f.out) / "history.csv";
    std::ofstream(hist) << [&] {
        std::ostringstream os;
        write_history_csv(os, r);
        return os.str();
    }();
    const double eps = r.history.empty() ? 0.0 : r.history.back().eps;
    write_manifest(f.out, "solve", id, &p, f, {{"history", hist.string()}},
                   {{"cause", to_string(r.cause)}, {"iterations", r.iterations()}, {"eps", eps},
                    {"kkt", r.final_kkt.value_or(0.0)}, {"safeguard_events", r.safeguard_events.size()},
                    {"message", r.message}});
    std::cout << id << ": " << to_string(r.cause) << " after " << r.iterations()
              << " iterations, eps " << eps << ", kkt " << r.final_kkt.value_or(0.0) << "\n";
    if (r.converged()) return 0;
    return r.cause == Termination::numeric_error ? 1 : 2;
}

int cmd_verify(const std::string& suite, const Flags& f) {
    const SuiteReport rep = run_suite(suite);
    fs::create_directories(f.out);
    const fs::path path = fs::path(f.out) / ("verify-" + suite + ".csv");
    {
        std::ofstream out(path);
        write_check_csv(out, rep.rows);
    }
    for (const auto& n : rep.notes) std::cout << "  " << n << "\n";
    for (const auto& r : rep.rows)
        if (!r.pass)
            std::cout << "  FAIL " << r.name << " @" << r.index << ": " << r.lhs << " > " << r.rhs
                      << " + " << r.slack << "\n";
    std::cout << suite << ": " << rep.rows.size() - rep.failures() << "/" << rep.rows.size()
              << " checks pass (" << rep.seconds << " s), report " << path.string() << "\n";
    write_manifest(f.out, "verify " + suite, "", nullptr, f, {{"report", path.string()}},
                   {{"checks", rep.rows.size()}, {"failures", rep.failures()}, {"seconds", rep.seconds}});
    return rep.passed() ? 0 : 1;
}

int cmd_rates(const Flags& f) {
    const std::string id = with_seed(f.problem, f.seed);
    const CorpusEntry e = load_corpus(id);
    if (!e.reference) {
        std::cerr << "rates: " << id << " has no certified reference pair\n";
        return 1;
    }
    Flags g = f;
    if (!g.tol) g.tol = e.has_tag("polyhedral") ? 1e-9 : 0.0;
    if (!g.max_outer) g.max_outer = e.has_tag("polyhedral") ? 20000 : 2000;
    const SolverParams p = params_for(e, g);
    SolveOptions o;
    o.reference = e.reference;
    const SolveReport r = solve(e.problem, p, o);
    const RateStudy st = rate_study(r, e);

    fs::create_directories(f.out);
    const fs::path path = fs::path(f.out) / "rates.csv";
    {
        std::ofstream out(path);
        write_rate_csv(out, st.fits);
    }
    json outputs = {{"rates", path.string()}};
    if (st.ratios) {
        const fs::path rp = fs::path(f.out) / "two_step.csv";
        std::ofstream out(rp);
        out.precision(17);
        out << "k,ratio\n";
        for (std::size_t k = 0; k < st.ratios->ratios.size(); ++k)
            out << k + 1 << ',' << st.ratios->ratios[k] << '\n';
        outputs["two_step"] = rp.string();
    }
    for (const auto& [name, fit] : st.fits)
        std::cout << name << ": slope " << fit.slope << " over [" << fit.lo << ", " << fit.hi
                  << "] (" << fit.count << " points)\n";
    for (const auto& n : st.notes) std::cout << n << "\n";
    write_manifest(f.out, "rates", id, &p, g, outputs,
                   {{"cause", to_string(r.cause)}, {"iterations", r.iterations()}});
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Inexact accelerated ADMM with back substitution"};
    app.require_subcommand(1);
    Flags flags;
    std::string suite;

    auto* solve_cmd = app.add_subcommand("solve", "solve a corpus problem, write history.csv");
    add_solver_flags(solve_cmd, flags);
    auto* verify_cmd = app.add_subcommand("verify", "run a property suite, write its check report");
    verify_cmd->add_option("suite", suite, "suite name")->required();
    verify_cmd->add_option("--out", flags.out, "output directory");
    auto* rates_cmd = app.add_subcommand("rates", "fit rate slopes on a corpus problem");
    add_solver_flags(rates_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*solve_cmd) return cmd_solve(flags);
        if (*verify_cmd) return cmd_verify(suite, flags);
        if (*rates_cmd) return cmd_rates(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
