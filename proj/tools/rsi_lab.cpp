// Experiment runner for the rough-singular-integral lab.
//
// Subcommands: lambda-sweep, eps-split, sparse-check, weak-norm. Each takes
// an optional JSON config overlaying the built-in defaults and writes
// result.csv, report.json and plot.svg into --out. Exit code 0 iff every
// asserted check passed.

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "CLI11.hpp"
#include "rsi/lab.hpp"

namespace {

rsi::ordered_json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rsi::domain_error("cannot open config file " + path);
    rsi::ordered_json j;
    in >> j;
    return j;
}

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "JSON config file (overlays the defaults)");
    cmd->add_option("--out", args.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--seed", args.seed, "seed override")->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--threads", args.threads, "worker threads");
}

rsi::ExperimentConfig build_config(const std::string& tag, const CommonArgs& args) {
    rsi::ExperimentConfig cfg =
        args.config_path.empty() ? rsi::default_config(tag) : rsi::parse_config(tag, load_json_file(args.config_path));
    if (args.seed_set) cfg.seed = args.seed;
    if (args.threads > 0) cfg.threads = args.threads;
    return cfg;
}

int finish(const rsi::SweepResult& r, const CommonArgs& args, const rsi::ordered_json& extra = {}) {
    std::filesystem::create_directories(args.out_dir);
    rsi::emit_outputs(r, args.out_dir, extra);
    for (const auto& c : r.checks)
        std::printf("[%s] %s%s%s\n", c.pass ? "pass" : "FAIL", c.name.c_str(), c.detail.empty() ? "" : ": ",
                    c.detail.c_str());
    std::printf("%s: %s (outputs in %s)\n", r.experiment.c_str(), r.all_pass() ? "all checks passed" : "CHECKS FAILED",
                args.out_dir.c_str());
    return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale experiments for rough singular integrals and sparse domination"};
    app.require_subcommand(1);

    CommonArgs lam_args, eps_args, sparse_args, weak_args;
    CLI::App* lam = app.add_subcommand("lambda-sweep", "growth of the M_{lambda,T} weak norm against 1+log(1/lambda)");
    add_common(lam, lam_args);
    CLI::App* eps = app.add_subcommand("eps-split", "L2 norm decay of the rough-difference operator in eps");
    add_common(eps, eps_args);
    CLI::App* sparse = app.add_subcommand("sparse-check", "constructive sparse domination on seeded (f,g) pairs");
    add_common(sparse, sparse_args);
    CLI::App* weak = app.add_subcommand("weak-norm", "empirical weak-type quotients for T and its maximal operators");
    add_common(weak, weak_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (lam->parsed()) return finish(rsi::run_lambda_sweep(build_config("lambda-sweep", lam_args)), lam_args);
        if (eps->parsed()) return finish(rsi::run_eps_split(build_config("eps-split", eps_args)), eps_args);
        if (sparse->parsed()) {
            const auto out = rsi::run_sparse_check(build_config("sparse-check", sparse_args));
            std::filesystem::create_directories(sparse_args.out_dir);
            std::ofstream fam(sparse_args.out_dir + "/family.json");
            fam << out.first_family.dump(2) << "\n";
            const rsi::SparseFamily first = rsi::sparse_family_from_json(out.first_family);
            const auto rep = rsi::verify_sparseness(first, first.eta);
            std::ofstream ver(sparse_args.out_dir + "/verification.json");
            ver << rsi::sparseness_report_to_json(rep, first.eta).dump(2) << "\n";
            return finish(out.result, sparse_args);
        }
        if (weak->parsed()) return finish(rsi::run_weak_norm(build_config("weak-norm", weak_args)), weak_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
