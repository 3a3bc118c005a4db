// bsvi-lab: convergence studies and oracle checks driven by config files.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>

#include "bsvi/backward_solver.hpp"
#include "bsvi/config.hpp"
#include "bsvi/csv_io.hpp"
#include "bsvi/errors.hpp"
#include "bsvi/forward_sim.hpp"
#include "bsvi/oracle.hpp"
#include "bsvi/registry.hpp"
#include "bsvi/rng_paths.hpp"
#include "bsvi/study.hpp"
#include "bsvi/text_util.hpp"

namespace {

constexpr double kOracleTol = 1e-10;

int cmd_run(const std::string& path, const std::string& out, std::optional<std::uint64_t> seed,
            std::optional<std::size_t> paths) {
    bsvi::StudyConfig config = bsvi::load_config(path);
    if (seed) config.scheme.seed = *seed;
    if (paths) config.scheme.num_paths = *paths;
    const bsvi::ConvergenceReport report = bsvi::run_study(config);
    if (out.empty() || out == "-") {
        bsvi::write_report_csv(std::cout, report);
        std::cerr << bsvi::summarize(report);
    } else {
        std::ofstream os(out, std::ios::binary);
        if (!os) throw bsvi::ConfigError("cannot write '" + out + "'");
        bsvi::write_report_csv(os, report);
        std::cout << bsvi::summarize(report);
    }
    return 0;
}

int cmd_list() {
    for (const auto& e : bsvi::problem_registry()) {
        std::cout << e.name << ": " << e.summary << '\n';
        for (const auto& [key, def] : e.defaults) std::cout << "    " << key << " = " << def << '\n';
    }
    return 0;
}

int cmd_oracle(const std::string& path) {
    const bsvi::StudyConfig config = bsvi::load_config(path);
    const bsvi::ProblemInstance inst = bsvi::make_problem(config.problem, config.problem_params);
    bsvi::SchemeParams params = config.scheme;
    params.estimator = bsvi::TreeExact{};
    params.law = bsvi::IncrementLaw::rademacher;
    bool ok = true;
    for (std::size_t n : {2u, 4u, 6u}) {
        const bsvi::Partition part(inst.spec.horizon, n, inst.spec.initial_time);
        auto tree = std::make_shared<const bsvi::IncrementEnsemble>(
            bsvi::enumerate_rademacher_tree(part, inst.spec.brownian_dim, params.tree_cap));
        const auto fwd = bsvi::euler_simulate(inst.spec, tree, params.workers);
        const auto sol = bsvi::solve_bsvi(inst.spec, params, fwd);
        const auto gap = bsvi::oracle_gap(bsvi::oracle_solve(inst.spec, params, part), sol);
        const bool pass = gap.max() <= kOracleTol;
        ok = ok && pass;
        std::cout << "n=" << n << " max|dY|=" << bsvi::format_short(gap.y) << " max|dZ|=" << bsvi::format_short(gap.z)
                  << " max|dU|=" << bsvi::format_short(gap.u) << (pass ? " ok" : " FAIL") << '\n';
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Penalized backward scheme laboratory"};
    app.require_subcommand(1);

    std::string run_config, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    auto* run = app.add_subcommand("run", "run a convergence study and write a CSV report");
    run->add_option("config", run_config, "config file")->required();
    run->add_option("--out", out, "report path (default: stdout)");
    run->add_option("--seed", seed, "override [scheme] seed");
    run->add_option("--paths", paths, "override [scheme] paths");

    auto* list = app.add_subcommand("list-problems", "list registered problems and their parameters");

    std::string oracle_config;
    auto* oracle = app.add_subcommand("oracle-check", "compare the tree estimator against the oracle for n = 2, 4, 6");
    oracle->add_option("config", oracle_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(run_config, out, seed, paths);
        if (*list) return cmd_list();
        if (*oracle) return cmd_oracle(oracle_config);
    } catch (const bsvi::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
