// Experiment harness for multilevel Monte Carlo runs of the Langevin
// equation. Subcommands:
//   run        execute a suite from a config file, write CSV diagnostics
//   bias       inter-level bias sweep for discrete-increment methods
//   exact      enumerate the coarsest-level expectation only
//   calibrate  estimate the bias constant and print the eps <-> L table

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "mlmc/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config;
    std::string out = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = -1;
    std::string eps;
    std::uint64_t budget = 0;

    void attach(CLI::App* cmd, bool need_out) {
        cmd->add_option("--config", config, "suite config file (key = value lines)")
            ->required();
        if (need_out) cmd->add_option("--out", out, "output directory for CSV files");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([this](const std::string&) { seed_set = true; });
        cmd->add_option("--threads", threads, "worker cap (0 = all hardware threads)");
        cmd->add_option("--eps", eps, "override eps list, comma separated");
        cmd->add_option("--budget", budget, "override the enumeration leaf budget");
    }

    mlmc::SuiteConfig load() const {
        mlmc::SuiteConfig cfg = mlmc::parse_config_file(config);
        if (seed_set) cfg.seed = seed;
        if (threads >= 0) cfg.threads = threads;
        if (budget > 0) cfg.leaf_budget = budget;
        if (!eps.empty()) {
            mlmc::SuiteConfig tmp = mlmc::parse_config_text("eps = " + eps);
            cfg.eps_list = tmp.eps_list;
        }
        return cfg;
    }
};

int cmd_run(const CommonArgs& args) {
    const mlmc::SuiteConfig cfg = args.load();
    const mlmc::SuiteResult res = mlmc::run_suite(cfg, args.out);
    std::printf("wrote %zu summary rows, %zu level rows, %zu bias rows to %s\n",
                res.summary.size(), res.levels.size(), res.bias.size(),
                args.out.c_str());
    for (const mlmc::SummaryRow& r : res.summary)
        std::printf("%-8s T=%-4g eps=%-10g estimate=%.12g error=%.3e cost=%.4g\n",
                    r.method.c_str(), r.T, r.eps, r.estimate, r.abs_error,
                    r.total_cost);
    return 0;
}

int cmd_bias(const CommonArgs& args) {
    const mlmc::SuiteConfig cfg = args.load();
    std::vector<mlmc::BiasRow> rows;
    for (const double T : cfg.T_list)
        for (const std::string& tag : cfg.methods) {
            const std::vector<mlmc::BiasRow> r = mlmc::bias_sweep(cfg, tag, T);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    std::filesystem::create_directories(args.out);
    mlmc::write_bias_csv(std::filesystem::path(args.out) / "level_bias.csv", rows);
    for (const mlmc::BiasRow& r : rows)
        std::printf("%-6s T=%-4g level=%d h=%-10g |bias|=%.6e stderr=%.2e\n",
                    r.method.c_str(), r.T, r.level, r.h, r.abs_bias, r.std_error);
    return 0;
}

int cmd_exact(const CommonArgs& args) {
    const mlmc::SuiteConfig cfg = args.load();
    for (const double T : cfg.T_list)
        for (const std::string& tag : cfg.methods) {
            const mlmc::MethodInfo mi = mlmc::method_info(tag);
            if (mi.dist == mlmc::DistributionKind::Gaussian) continue;
            const mlmc::LangevinModel model = mlmc::problem_model(cfg, T);
            const mlmc::ExactCoarseResult res = mlmc::exact_expectation(
                model, mi.scheme, mlmc::problem_qoi(cfg), mi.M0, mi.dist,
                cfg.leaf_budget);
            std::printf("%-6s T=%-4g M0=%-3d value=%.17g leaves=%llu nodes=%llu\n",
                        tag.c_str(), T, mi.M0, res.value,
                        (unsigned long long)res.leaves,
                        (unsigned long long)res.nodes);
        }
    return 0;
}

int cmd_calibrate(const CommonArgs& args) {
    const mlmc::SuiteConfig cfg = args.load();
    for (const double T : cfg.T_list)
        for (const std::string& tag : cfg.methods) {
            const mlmc::MethodInfo mi = mlmc::method_info(tag);
            const mlmc::LangevinModel model = mlmc::problem_model(cfg, T);
            mlmc::MlmcConfig base;
            base.scheme = mi.scheme;
            base.M0 = mi.M0;
            base.dist = mi.dist;
            base.extrapolate = mi.extrapolate;
            base.weak_order = mi.weak_order;
            base.L = std::max(1, cfg.pilot_level);
            const mlmc::Calibration cal = mlmc::calibrate_levels(
                base, model, mlmc::problem_qoi(cfg), cfg.pilot_samples, cfg.seed,
                cfg.threads, cfg.pilot_level);
            std::printf("%-6s T=%-4g c1=%.6g (order %g, split %.4g)\n", tag.c_str(),
                        T, cal.c1, cal.order, cal.bias_split);
            for (const double eps : cfg.eps_list) {
                if (mi.fixed_level)
                    std::printf("    eps=%-10g L=%d M0=%d\n", eps, mi.L_fixed,
                                cal.coarsest_steps_for_eps(eps, mi.L_fixed));
                else
                    std::printf("    eps=%-10g L=%d\n", eps, cal.level_for_eps(eps));
            }
        }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilevel Monte Carlo harness for the Langevin equation"};
    app.require_subcommand(1);

    CommonArgs run_args, bias_args, exact_args, cal_args;
    run_args.attach(app.add_subcommand("run", "run an experiment suite"), true);
    bias_args.attach(app.add_subcommand("bias", "inter-level bias sweep"), true);
    exact_args.attach(app.add_subcommand("exact", "exact coarse-level enumeration"),
                      false);
    cal_args.attach(app.add_subcommand("calibrate", "bias-constant calibration"),
                    false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(run_args);
        if (app.got_subcommand("bias")) return cmd_bias(bias_args);
        if (app.got_subcommand("exact")) return cmd_exact(exact_args);
        if (app.got_subcommand("calibrate")) return cmd_calibrate(cal_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
