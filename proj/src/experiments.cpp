#include "avgpg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "avgpg/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace avgpg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, sep)) out.push_back(trim(tok));
    return out;
}

}  // namespace

int effective_workers(int requested) {
    if (const char* env = std::getenv("AVGPG_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    if (requested > 0) return requested;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

std::optional<ExperimentConfig> parse_config(const std::string& text, std::string* error) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& msg) {
        if (error) *error = "config line " + std::to_string(lineno) + ": " + msg;
        return std::nullopt;
    };
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) return fail("expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "kind") {
                cfg.kind = val;
            } else if (key == "sizes") {
                cfg.sizes.clear();
                for (const auto& tok : split(val, ',')) {
                    const auto x = tok.find('x');
                    if (x == std::string::npos) return fail("size must look like 3x3");
                    cfg.sizes.emplace_back(std::stoi(tok.substr(0, x)),
                                           std::stoi(tok.substr(x + 1)));
                }
            } else if (key == "seeds") {
                cfg.seeds.clear();
                for (const auto& tok : split(val, ','))
                    cfg.seeds.push_back(std::stoull(tok));
            } else if (key == "deltas") {
                cfg.deltas.clear();
                for (const auto& tok : split(val, ',')) cfg.deltas.push_back(std::stod(tok));
            } else if (key == "cp_levels") {
                cfg.cp_levels.clear();
                for (const auto& tok : split(val, ','))
                    cfg.cp_levels.push_back(std::stod(tok));
            } else if (key == "iterations") {
                cfg.iterations = std::stoi(val);
            } else if (key == "record_every") {
                cfg.record_every = std::stoi(val);
            } else if (key == "budget") {
                cfg.budget = std::stol(val);
            } else if (key == "gamma") {
                cfg.gamma = std::stod(val);
            } else if (key == "workers") {
                cfg.workers = std::stoi(val);
            } else if (key == "strict") {
                cfg.strict = (val == "1" || val == "true");
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else {
                return fail("unknown key '" + key + "'");
            }
        } catch (const std::exception&) {
            return fail("bad value for '" + key + "'");
        }
    }
    if (cfg.seeds.empty()) {
        if (error) *error = "config: seeds must be nonempty";
        return std::nullopt;
    }
    for (const auto& [S, A] : cfg.sizes)
        if (S <= 0 || A <= 0) {
            if (error) *error = "config: sizes must be positive";
            return std::nullopt;
        }
    if (cfg.iterations < 1 || cfg.record_every < 1) {
        if (error) *error = "config: iterations and record_every must be >= 1";
        return std::nullopt;
    }
    return cfg;
}

std::optional<ExperimentConfig> load_config(const std::string& path, std::string* error) {
    std::ifstream in(path);
    if (!in) {
        if (error) *error = "cannot open config file " + path;
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), error);
}

namespace {

// runs tasks 0..n-1 with a bounded OpenMP pool; outputs are gathered in task
// order so the schedule never affects bytes
template <typename Fn>
std::vector<std::string> run_tasks(long n, int workers, Fn&& task) {
    std::vector<std::string> out(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(workers, 1))
#endif
    for (long i = 0; i < n; ++i) out[i] = task(i);
    return out;
}

struct PgaRun {
    RunTrace trace;
    ConstantsReport constants;
    std::string error;
};

PgaRun run_instance(const TabularMdp& mdp, std::uint64_t seed, int iterations, int record_every,
                    long budget) {
    PgaRun out;
    try {
        ProbeOptions opt;
        opt.budget = budget;
        opt.seed = seed;
        opt.parallel = false;  // outer fan-out owns the threads
        out.constants = assemble_constants(mdp, opt);
        RunConfig rc;
        // search-flavor smoothness: the certified bound is far too conservative
        // to show convergence within a plottable number of iterations
        rc.eta = 1.0 / std::max(out.constants.search.L2, 1e-12);
        rc.max_iters = iterations;
        rc.record_every = record_every;
        out.trace = run_pga(mdp, make_uniform_policy(mdp.num_states, mdp.num_actions), rc);
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

}  // namespace

ExperimentResult run_size_sweep(const ExperimentConfig& cfg) {
    struct Task {
        int S, A;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& [S, A] : cfg.sizes)
        for (auto seed : cfg.seeds) tasks.push_back({S, A, seed});

    auto rows = run_tasks(tasks.size(), effective_workers(cfg.workers), [&](long i) {
        const Task& t = tasks[i];
        MdpGeneratorSpec spec;
        spec.num_states = t.S;
        spec.num_actions = t.A;
        spec.seed = t.seed;
        const TabularMdp mdp = generate_mdp(spec);
        const PgaRun run = run_instance(mdp, t.seed, cfg.iterations, cfg.record_every,
                                        cfg.budget);
        std::ostringstream os;
        os.precision(17);
        if (!run.error.empty()) {
            os << t.S << "," << t.A << "," << t.seed << ",-1,nan,nan,nan,\"" << run.error
               << "\"\n";
            return os.str();
        }
        const double rho0 = run.trace.rows.front().rho;
        for (const auto& r : run.trace.rows)
            os << t.S << "," << t.A << "," << t.seed << "," << r.iter << "," << r.rho << ","
               << r.rho - rho0 << "," << run.trace.eta << ",\n";
        return os.str();
    });

    ExperimentResult res;
    std::ostringstream csv;
    csv << "S,A,seed,iter,rho,improvement,eta,error\n";
    for (const auto& r : rows) {
        csv << r;
        if (r.find("nan") != std::string::npos) ++res.failed_rows;
    }
    res.csv = csv.str();
    res.summary = "size-sweep: " + std::to_string(tasks.size()) + " runs";
    return res;
}

ExperimentResult run_reward_diameter_sweep(const ExperimentConfig& cfg) {
    const auto [S, A] = cfg.sizes.front();
    struct Task {
        std::uint64_t seed;
        double delta;
    };
    std::vector<Task> tasks;
    for (auto seed : cfg.seeds)
        for (double d : cfg.deltas) tasks.push_back({seed, d});

    auto rows = run_tasks(tasks.size(), effective_workers(cfg.workers), [&](long i) {
        const Task& t = tasks[i];
        // one fixed kernel per seed; only the reward varies with delta
        MdpGeneratorSpec spec;
        spec.num_states = S;
        spec.num_actions = A;
        spec.seed = t.seed;
        TabularMdp mdp = generate_mdp(spec);
        Rng rng(t.seed, 0x64656c74);
        for (int s = 0; s < S; ++s) {
            const double base = (1.0 - t.delta) * rng.uniform(-1.0, 1.0);
            for (int a = 0; a < A; ++a)
                mdp.reward(s, a) = base + t.delta * rng.uniform(-1.0, 1.0);
        }
        ProbeOptions opt;
        opt.budget = cfg.budget;
        opt.seed = t.seed;
        opt.parallel = false;
        const double cr = c_r_estimate(mdp, opt).value;
        const PgaRun run =
            run_instance(mdp, t.seed, cfg.iterations, cfg.record_every, cfg.budget);
        std::ostringstream os;
        os.precision(17);
        if (!run.error.empty()) {
            os << t.seed << "," << t.delta << "," << cr << ",-1,nan,nan,\"" << run.error
               << "\"\n";
            return os.str();
        }
        const double rho0 = run.trace.rows.front().rho;
        for (const auto& r : run.trace.rows)
            os << t.seed << "," << t.delta << "," << cr << "," << r.iter << "," << r.rho << ","
               << r.rho - rho0 << ",\n";
        return os.str();
    });

    ExperimentResult res;
    std::ostringstream csv;
    csv << "seed,delta,C_r,iter,rho,improvement,error\n";
    for (const auto& r : rows) {
        csv << r;
        if (r.find("nan") != std::string::npos) ++res.failed_rows;
    }
    res.csv = csv.str();
    res.summary = "reward-diameter: " + std::to_string(tasks.size()) + " runs at " +
                  std::to_string(S) + "x" + std::to_string(A);
    return res;
}

TabularMdp interpolate_kernel_mdp(int S, int A, double weight, std::uint64_t seed) {
    // endpoint 0: all actions share one Dirichlet row per state (C_p = 0);
    // endpoint 1: fully action-distinct Dirichlet rows
    Rng rng(seed, 0x6370696e);
    TabularMdp mdp = TabularMdp::zeros(S, A);
    for (int s = 0; s < S; ++s) {
        Vector shared(S);
        double sum = 0.0;
        for (int s2 = 0; s2 < S; ++s2) {
            shared(s2) = rng.exponential();
            sum += shared(s2);
        }
        shared /= sum;
        for (int a = 0; a < A; ++a) {
            Vector own(S);
            double osum = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                own(s2) = rng.exponential();
                osum += own(s2);
            }
            own /= osum;
            for (int s2 = 0; s2 < S; ++s2)
                mdp.p(s, a, s2) = (1.0 - weight) * shared(s2) + weight * own(s2);
        }
    }
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
    return mdp;
}

ExperimentResult run_cp_sweep(const ExperimentConfig& cfg) {
    const auto [S, A] = cfg.sizes.front();
    struct Task {
        std::uint64_t seed;
        double level;
    };
    std::vector<Task> tasks;
    for (auto seed : cfg.seeds)
        for (double w : cfg.cp_levels) tasks.push_back({seed, w});

    auto rows = run_tasks(tasks.size(), effective_workers(cfg.workers), [&](long i) {
        const Task& t = tasks[i];
        TabularMdp mdp = interpolate_kernel_mdp(S, A, t.level, t.seed);
        // rewards held fixed across levels: regenerate from the seed alone
        Rng rng(t.seed, 0x72667864);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
        ProbeOptions opt;
        opt.budget = cfg.budget;
        opt.seed = t.seed;
        opt.parallel = false;
        const double cp = c_p_estimate(mdp, opt).value;
        const PgaRun run =
            run_instance(mdp, t.seed, cfg.iterations, cfg.record_every, cfg.budget);
        std::ostringstream os;
        os.precision(17);
        if (!run.error.empty()) {
            os << t.seed << "," << t.level << "," << cp << ",-1,nan,nan,\"" << run.error
               << "\"\n";
            return os.str();
        }
        const double rho0 = run.trace.rows.front().rho;
        for (const auto& r : run.trace.rows)
            os << t.seed << "," << t.level << "," << cp << "," << r.iter << "," << r.rho << ","
               << r.rho - rho0 << ",\n";
        return os.str();
    });

    ExperimentResult res;
    std::ostringstream csv;
    csv << "seed,cp_level,C_p,iter,rho,improvement,error\n";
    for (const auto& r : rows) {
        csv << r;
        if (r.find("nan") != std::string::npos) ++res.failed_rows;
    }
    res.csv = csv.str();
    res.summary = "cp-sweep: " + std::to_string(tasks.size()) + " runs";
    return res;
}

ExperimentResult run_constant_scaling(const ExperimentConfig& cfg) {
    struct Task {
        int S, A;
        std::string family;
        std::uint64_t instance;
    };
    const std::vector<std::string> families = {"dirichlet-uniform", "permutation-deterministic",
                                               "uniform-rewards", "two-level-rewards"};
    std::vector<Task> tasks;
    for (const auto& [S, A] : cfg.sizes)
        for (const auto& fam : families)
            for (std::uint64_t inst = 0; inst < 5; ++inst)  // five instances per cell
                tasks.push_back({S, A, fam, inst});

    auto rows = run_tasks(tasks.size(), effective_workers(cfg.workers), [&](long i) {
        const Task& t = tasks[i];
        MdpGeneratorSpec spec;
        spec.num_states = t.S;
        spec.num_actions = t.A;
        spec.seed = cfg.seeds.front() * 1000 + t.instance;
        std::string constant = "C_p";
        if (t.family == "permutation-deterministic")
            spec.kernel_family = KernelFamily::PermutationDeterministic;
        else if (t.family == "uniform-rewards")
            constant = "C_r";
        else if (t.family == "two-level-rewards") {
            spec.reward_family = RewardFamily::TwoLevel;
            constant = "C_r";
        }
        std::ostringstream os;
        os.precision(17);
        try {
            const TabularMdp mdp = generate_mdp(spec);
            ProbeOptions opt;
            opt.budget = cfg.budget;
            opt.seed = spec.seed;
            opt.parallel = false;
            opt.restrict_state_constant = (constant == "C_p");
            const double value = (constant == "C_p") ? c_p_estimate(mdp, opt).value
                                                     : c_r_estimate(mdp, opt).value;
            os << t.S << "," << t.A << "," << t.family << "," << t.instance << "," << constant
               << "," << value << "," << std::sqrt(double(t.A)) << ",\n";
        } catch (const std::exception& e) {
            os << t.S << "," << t.A << "," << t.family << "," << t.instance << "," << constant
               << ",nan,nan,\"" << e.what() << "\"\n";
        }
        return os.str();
    });

    ExperimentResult res;
    std::ostringstream csv;
    csv << "S,A,family,instance,constant,value,sqrtA,error\n";
    for (const auto& r : rows) {
        csv << r;
        if (r.find("nan") != std::string::npos) ++res.failed_rows;
    }
    res.csv = csv.str();
    res.summary = "constant-scaling: " + std::to_string(tasks.size()) + " cells";
    return res;
}

ExperimentResult run_bound_verification(const ExperimentConfig& cfg) {
    struct Task {
        int S, A;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (const auto& [S, A] : cfg.sizes)
        for (auto seed : cfg.seeds) tasks.push_back({S, A, seed});

    struct Outcome {
        std::string row;
        bool ok = false;
    };
    std::vector<Outcome> outcomes(tasks.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) \
    num_threads(std::max(effective_workers(cfg.workers), 1))
#endif
    for (long i = 0; i < static_cast<long>(tasks.size()); ++i) {
        const Task& t = tasks[i];
        std::ostringstream os;
        os.precision(17);
        try {
            MdpGeneratorSpec spec;
            spec.num_states = t.S;
            spec.num_actions = t.A;
            spec.seed = t.seed;
            const TabularMdp mdp = generate_mdp(spec);
            const OptimalSolution sol = solve_optimal(mdp);
            ProbeOptions opt;
            opt.budget = cfg.budget;
            opt.seed = t.seed;
            opt.parallel = false;
            const ConstantsReport cr = assemble_constants(mdp, opt, &sol.pi_star);
            const double L2 = cr.certified.L2;
            const double C_PL = cr.search.C_PL;

            RunConfig rc;
            rc.eta = 1.0 / L2;
            rc.max_iters = cfg.iterations;
            rc.record_every = 1;
            rc.record_policies = true;
            const RunTrace trace = run_pga(
                mdp, make_uniform_policy(t.S, t.A), rc, sol.rho_star);

            std::vector<Policy> comparison = {sol.pi_star};
            const DescentReport rep =
                verify_descent_inequalities(mdp, trace, L2, C_PL, comparison);

            // O(1/k) convergence envelope (with the explicit S factor)
            const double scale = 128.0 * t.S * L2 * C_PL * C_PL;
            const double gap0 = trace.rows.front().gap;
            int envelope_violations = 0;
            for (std::size_t j = 2; j < trace.rows.size(); ++j) {
                const int k = trace.rows[j].iter - 1;
                const double bound =
                    std::max(scale / k, std::pow(2.0, -0.5 * k) * gap0);
                if (trace.rows[j].gap > bound + 1e-10) ++envelope_violations;
            }
            os << t.S << "," << t.A << "," << t.seed << "," << sol.rho_star << "," << L2 << ","
               << C_PL << "," << rep.ascent_violations << "," << rep.recursion_violations << ","
               << envelope_violations << ",\n";
            outcomes[i].ok = (rep.ascent_violations == 0 && rep.recursion_violations == 0 &&
                              envelope_violations == 0);
        } catch (const std::exception& e) {
            os << t.S << "," << t.A << "," << t.seed << ",nan,nan,nan,-1,-1,-1,\"" << e.what()
               << "\"\n";
        }
        outcomes[i].row = os.str();
    }

    ExperimentResult res;
    std::ostringstream csv;
    csv << "S,A,seed,rho_star,L2_certified,C_PL,ascent_violations,recursion_violations,"
           "envelope_violations,error\n";
    int pass = 0;
    for (const auto& o : outcomes) {
        csv << o.row;
        if (o.ok)
            ++pass;
        else
            ++res.failed_rows;
    }
    res.csv = csv.str();
    res.summary = "bound-verify: " + std::to_string(pass) + "/" +
                  std::to_string(outcomes.size()) + " instances with zero violations";
    return res;
}

ExperimentResult run_discount_compare(const ExperimentConfig& cfg) {
    const auto [S, A] = cfg.sizes.front();
    std::ostringstream csv;
    csv.precision(17);
    csv << "seed,gamma,scaled_value,rho,error,eq9_bound_times_1mg\n";
    int failed = 0;
    for (auto seed : cfg.seeds) {
        try {
            MdpGeneratorSpec spec;
            spec.num_states = S;
            spec.num_actions = A;
            spec.seed = seed;
            const TabularMdp mdp = generate_mdp(spec);
            const Policy pi = make_random_policy(S, A, seed);
            const Vector mu = uniform_distribution(S);
            const OptimalSolution sol = solve_optimal(mdp);
            const Vector d_star = occupancy_measure(mdp, sol.pi_star, cfg.gamma, mu).d;
            std::vector<double> gammas;
            for (int j = 1; j <= 10; ++j) gammas.push_back(1.0 - std::pow(2.0, -j));
            const auto table = vanishing_discount_check(mdp, pi, gammas);
            for (const auto& row : table) {
                // Eq. 9 envelope at k = 100, multiplied by (1-gamma): the
                // (1-gamma)^{-4} factor makes it diverge along gamma -> 1
                double mismatch = 0.0;
                const Vector ds = occupancy_measure(mdp, sol.pi_star, row.gamma, mu).d;
                for (int s = 0; s < S; ++s)
                    mismatch = std::max(mismatch, ds(s) / mu(s));
                const double bound = (1.0 - row.gamma) * 128.0 * S * A /
                                     (100.0 * std::pow(1.0 - row.gamma, 5)) * mismatch *
                                     mismatch;
                csv << seed << "," << row.gamma << "," << row.scaled_value << "," << row.rho
                    << "," << row.error << "," << bound << "\n";
            }
            (void)d_star;
        } catch (const std::exception& e) {
            csv << seed << ",nan,nan,nan,nan,nan\n";
            ++failed;
        }
    }
    ExperimentResult res;
    res.csv = csv.str();
    res.failed_rows = failed;
    res.summary = "discount-compare: " + std::to_string(cfg.seeds.size()) + " instances";
    return res;
}

int iterations_to_fraction(const std::vector<double>& rhos, double fraction) {
    if (rhos.empty()) return 0;
    const double total = rhos.back() - rhos.front();
    if (total <= 1e-12) return 0;  // flat curve: every policy already optimal
    const double target = rhos.front() + fraction * total;
    for (std::size_t i = 0; i < rhos.size(); ++i)
        if (rhos[i] >= target) return static_cast<int>(i);
    return static_cast<int>(rhos.size());
}

std::string emit_plotdata(const std::string& dataset_csv, const std::string& kind) {
    std::istringstream is(dataset_csv);
    std::string header;
    std::getline(is, header);
    const auto cols = split(header, ',');
    auto col = [&](const std::string& name) {
        for (std::size_t i = 0; i < cols.size(); ++i)
            if (cols[i] == name) return static_cast<int>(i);
        throw std::invalid_argument("emit_plotdata: column '" + name + "' missing");
    };

    int xi, yi;
    std::vector<int> gi;
    if (kind == "size-sweep") {
        xi = col("iter"); yi = col("improvement"); gi = {col("S"), col("A")};
    } else if (kind == "reward-diameter") {
        xi = col("iter"); yi = col("improvement"); gi = {col("delta")};
    } else if (kind == "cp-sweep") {
        xi = col("iter"); yi = col("improvement"); gi = {col("cp_level")};
    } else if (kind == "constant-scaling") {
        xi = col("A"); yi = col("value"); gi = {col("family"), col("constant")};
    } else if (kind == "discount-compare") {
        xi = col("gamma"); yi = col("error"); gi = {col("seed")};
    } else {
        throw std::invalid_argument("emit_plotdata: unknown kind '" + kind + "'");
    }

    std::ostringstream os;
    os << "x,y,group\n";
    std::string line;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (static_cast<int>(f.size()) <= std::max(xi, yi)) continue;
        std::string group;
        for (std::size_t i = 0; i < gi.size(); ++i)
            group += (i ? "/" : "") + f[gi[i]];
        os << f[xi] << "," << f[yi] << "," << group << "\n";
    }
    return os.str();
}

}  // namespace avgpg
