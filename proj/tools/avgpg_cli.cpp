#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "avgpg/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRowFailures = 1;
constexpr int kExitConfigError = 2;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::string out;
    std::string plot_out;
    int workers = 0;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file");
    cmd->add_option("--seed-override", opts.seed_override,
                    "replace the config's seed list with this single seed");
    cmd->add_option("--out", opts.out, "output CSV path (default: stdout)");
    cmd->add_option("--plot-out", opts.plot_out, "also write tidy x,y,group plot data here");
    cmd->add_option("--workers", opts.workers, "worker threads (0 = auto)");
    cmd->add_flag("--verbose", opts.verbose, "log progress to stderr");
}

int write_result(const avgpg::ExperimentResult& res, const CommonOpts& opts, bool strict,
                 const std::string& kind) {
    if (!opts.plot_out.empty()) {
        std::ofstream p(opts.plot_out);
        if (!p) {
            std::cerr << "error: cannot write " << opts.plot_out << "\n";
            return kExitConfigError;
        }
        p << avgpg::emit_plotdata(res.csv, kind);
    }
    if (opts.out.empty()) {
        std::cout << res.csv;
    } else {
        const auto parent = std::filesystem::path(opts.out).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream f(opts.out);
        if (!f) {
            std::cerr << "error: cannot write " << opts.out << "\n";
            return kExitConfigError;
        }
        f << res.csv;
    }
    std::cerr << res.summary << "\n";
    if (res.failed_rows > 0) {
        std::cerr << res.failed_rows << " row(s) failed\n";
        if (strict) return kExitRowFailures;
    }
    return kExitOk;
}

int run_kind(const std::string& kind, const CommonOpts& opts) {
    avgpg::ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        std::string err;
        auto loaded = avgpg::load_config(opts.config_path, &err);
        if (!loaded) {
            std::cerr << "error: " << err << "\n";
            return kExitConfigError;
        }
        cfg = *loaded;
    }
    cfg.kind = kind;
    if (opts.seed_override) cfg.seeds = {*opts.seed_override};
    if (opts.workers > 0) cfg.workers = opts.workers;
    if (opts.verbose) {
        std::cerr << "kind=" << kind << " seeds=" << cfg.seeds.size()
                  << " sizes=" << cfg.sizes.size()
                  << " workers=" << avgpg::effective_workers(cfg.workers);
        if (std::getenv("AVGPG_WORKERS")) std::cerr << " (from AVGPG_WORKERS)";
        std::cerr << "\n";
    }

    avgpg::ExperimentResult res;
    try {
        if (kind == "size-sweep")
            res = avgpg::run_size_sweep(cfg);
        else if (kind == "reward-diameter")
            res = avgpg::run_reward_diameter_sweep(cfg);
        else if (kind == "cp-sweep")
            res = avgpg::run_cp_sweep(cfg);
        else if (kind == "constant-scaling")
            res = avgpg::run_constant_scaling(cfg);
        else if (kind == "bound-verify")
            res = avgpg::run_bound_verification(cfg);
        else if (kind == "discount-compare")
            res = avgpg::run_discount_compare(cfg);
        else {
            std::cerr << "error: unknown experiment kind " << kind << "\n";
            return kExitConfigError;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return write_result(res, opts, cfg.strict, kind);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact evaluation and projected policy gradient for average-reward MDPs"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string run_kind_name;
    for (const char* kind : {"size-sweep", "reward-diameter", "cp-sweep", "constant-scaling",
                             "bound-verify", "discount-compare"}) {
        auto* cmd = app.add_subcommand(kind, std::string("run the ") + kind + " experiment");
        add_common(cmd, opts);
        cmd->callback([&run_kind_name, kind] { run_kind_name = kind; });
    }

    // constants: estimate the complexity constants of one instance
    std::string mdp_path;
    std::uint64_t gen_seed = 1;
    int gen_S = 5, gen_A = 3;
    long budget = 2000;
    auto* constants_cmd = app.add_subcommand("constants", "report instance constants as CSV");
    constants_cmd->add_option("--mdp", mdp_path, "instance file (omit to generate)");
    constants_cmd->add_option("--seed", gen_seed, "generator seed");
    constants_cmd->add_option("--states", gen_S, "generated instance states");
    constants_cmd->add_option("--actions", gen_A, "generated instance actions");
    constants_cmd->add_option("--budget", budget, "search budget per estimator");
    add_common(constants_cmd, opts);

    // evaluate: exact policy evaluation of a single instance
    auto* eval_cmd = app.add_subcommand("evaluate", "exact evaluation of the uniform policy");
    eval_cmd->add_option("--mdp", mdp_path, "instance file (omit to generate)");
    eval_cmd->add_option("--seed", gen_seed, "generator seed");
    eval_cmd->add_option("--states", gen_S, "generated instance states");
    eval_cmd->add_option("--actions", gen_A, "generated instance actions");
    add_common(eval_cmd, opts);

    CLI11_PARSE(app, argc, argv);

    if (!run_kind_name.empty()) return run_kind(run_kind_name, opts);

    try {
        avgpg::TabularMdp mdp = [&] {
            if (!mdp_path.empty()) {
                std::ifstream f(mdp_path);
                if (!f) throw std::runtime_error("cannot open " + mdp_path);
                std::ostringstream buf;
                buf << f.rdbuf();
                auto parsed = avgpg::deserialize_mdp(buf.str());
                if (!parsed) throw std::runtime_error("cannot parse " + mdp_path);
                return *parsed;
            }
            avgpg::MdpGeneratorSpec spec;
            spec.num_states = gen_S;
            spec.num_actions = gen_A;
            spec.seed = opts.seed_override.value_or(gen_seed);
            return avgpg::generate_mdp(spec);
        }();

        std::ostringstream os;
        os.precision(17);
        if (constants_cmd->parsed()) {
            avgpg::ProbeOptions popt;
            popt.budget = budget;
            popt.seed = gen_seed;
            const auto sol = avgpg::solve_optimal(mdp);
            const auto rep = avgpg::assemble_constants(mdp, popt, &sol.pi_star);
            const std::string id = mdp_path.empty()
                                       ? "generated-s" + std::to_string(gen_seed)
                                       : mdp_path;
            os << avgpg::constants_to_csv(id, rep, 0.0);
        } else {
            const avgpg::Policy pi =
                avgpg::make_uniform_policy(mdp.num_states, mdp.num_actions);
            const auto rho = avgpg::average_reward(mdp, pi);
            const auto v = avgpg::differential_value(mdp, pi);
            os << "quantity,value\n";
            os << "rho," << rho.value << "\n";
            for (int s = 0; s < mdp.num_states; ++s)
                os << "v_phi[" << s << "]," << v.values(s) << "\n";
            os << "bellman_residual," << avgpg::bellman_residual(mdp, pi, v.values, rho.value)
               << "\n";
        }
        if (opts.out.empty()) {
            std::cout << os.str();
        } else {
            std::ofstream f(opts.out);
            f << os.str();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}
