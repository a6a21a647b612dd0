// hu_stab: pseudoinverse, stability-constant and perturbation reports for
// dense complex matrices read from CSV or MatrixMarket files.

#include "commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

using namespace hustab;
using namespace hustab::cli;

namespace
{

std::uint64_t seed_from_env()
{
    const char* env = std::getenv("HU_STAB_SEED");
    if (!env || !*env)
        return 0;
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(env, &used);
        if (env[used] == '\0')
            return v;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::ParseError, std::string("HU_STAB_SEED is not an unsigned integer: ") + env);
}

int emit(const CommandResult& result, bool as_json, const std::string& out_path)
{
    std::string text;
    if (as_json)
        text = result.report.dump(2) + "\n";
    else
        render_text(result.report, text);
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out)
            throw Error(ErrorKind::ParseError, "cannot write " + out_path);
        out << text;
    }
    return result.exit_code;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hyers-Ulam stability and pseudoinverse perturbation toolkit"};
    app.set_version_flag("--version", HUSTAB_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    RunConfig cfg;
    std::optional<std::uint64_t> seed;
    std::string format_flag;
    std::string out_path;
    bool as_json = false;
    app.add_option("--tol-rank", cfg.tol.rank_rel, "relative singular-value cutoff")->check(CLI::PositiveNumber);
    app.add_option("--tol-eq", cfg.tol.eq_abs, "equality tolerance")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "random seed (default: HU_STAB_SEED, else 0)");
    app.add_option("--format", format_flag, "matrix file format (default: by extension)")
        ->check(CLI::IsMember({"csv", "mm"}));
    app.add_option("--out", out_path, "write the report here instead of standard output");
    app.add_flag("--json", as_json, "emit a JSON report");

    std::string t_path, second_path;

    auto* pinv_cmd = app.add_subcommand("pinv", "Moore-Penrose inverse from a generalized inverse");
    std::string method = "formula23";
    bool oblique = false;
    pinv_cmd->add_option("matrix", t_path)->required();
    pinv_cmd->add_option("--method", method)->check(CLI::IsMember({"formula21", "formula23", "svd"}));
    pinv_cmd->add_flag("--oblique", oblique, "start from seeded oblique complements");

    auto* stab_cmd = app.add_subcommand("stability", "reduced minimum modulus and stability constant");
    stab_cmd->add_option("matrix", t_path)->required();
    stab_cmd->add_option("--samples", cfg.samples, "witness probes")->check(CLI::NonNegativeNumber);

    auto* wit_cmd = app.add_subcommand("witness", "exact solution nearest to x in the stability sense");
    wit_cmd->add_option("matrix", t_path)->required();
    wit_cmd->add_option("x", second_path, "vector file (one row or column)")->required();

    auto* gen_cmd = app.add_subcommand("geninv", "generalized inverse from complements");
    gen_cmd->add_option("matrix", t_path)->required();
    gen_cmd->add_flag("--oblique", oblique);

    auto* pert_cmd = app.add_subcommand("perturb", "conditions and closed-form pseudoinverse of T + dT");
    std::optional<double> bound_a, bound_b;
    pert_cmd->add_option("matrix", t_path)->required();
    pert_cmd->add_option("delta", second_path)->required();
    pert_cmd->add_flag("--oblique", oblique);
    pert_cmd->add_option("--bound-a", bound_a, "T-bound constant a (checked on samples)")
        ->check(CLI::NonNegativeNumber);
    pert_cmd->add_option("--bound-b", bound_b, "T-bound constant b")->check(CLI::NonNegativeNumber);
    pert_cmd->add_option("--samples", cfg.samples, "vectors used to check a user T-bound")
        ->check(CLI::PositiveNumber);

    auto* sweep_cmd = app.add_subcommand("sweep", "stability constant along T + s*direction");
    std::vector<double> scales;
    bool parallel = false;
    sweep_cmd->add_option("matrix", t_path)->required();
    sweep_cmd->add_option("direction", second_path)->required();
    sweep_cmd->add_option("--scales", scales, "decreasing positive scales (default 2^-1..2^-10)")
        ->delimiter(',');
    sweep_cmd->add_flag("--parallel", parallel, "evaluate scales concurrently");

    auto* self_cmd = app.add_subcommand("selftest", "randomized invariant suite");
    Index instances = 40;
    self_cmd->add_option("--instances", instances, "instances per property")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_error;
    }

    try {
        cfg.seed = seed ? *seed : seed_from_env();
        if (!format_flag.empty())
            cfg.format = format_flag == "csv" ? MatrixFormat::Csv : MatrixFormat::MatrixMarketDense;
        require(cfg.tol.valid(), ErrorKind::ParseError, "tolerances must be positive and rank tolerance below 1");

        CommandResult result;
        if (*pinv_cmd) {
            const PinvMethod m = method == "formula21"   ? PinvMethod::Formula21
                                 : method == "formula23" ? PinvMethod::Formula23
                                                         : PinvMethod::SvdOracle;
            result = cmd_pinv(t_path, m, oblique, cfg);
        } else if (*stab_cmd) {
            result = cmd_stability(t_path, cfg);
        } else if (*wit_cmd) {
            result = cmd_witness(t_path, second_path, cfg);
        } else if (*gen_cmd) {
            result = cmd_geninv(t_path, oblique, cfg);
        } else if (*pert_cmd) {
            PerturbOptions opts{oblique, std::nullopt};
            if (bound_a || bound_b)
                opts.bound = TBound{bound_a.value_or(0.0), bound_b.value_or(0.0)};
            result = cmd_perturb(t_path, second_path, opts, cfg);
        } else if (*sweep_cmd) {
            result = cmd_sweep(t_path, second_path, scales, parallel, cfg);
        } else {
            result = cmd_selftest(cfg, instances);
        }
        return emit(result, as_json, out_path);
    } catch (const Error& e) {
        std::cerr << "hu_stab: " << e.what() << '\n';
        if (as_json)
            std::cout << json{{"schema", schema}, {"error", error_json(e)}}.dump(2) << '\n';
        return exit_error;
    }
}
