#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "avgpg/constants.hpp"
#include "avgpg/discounted.hpp"
#include "avgpg/oracle.hpp"
#include "avgpg/optimize.hpp"

namespace avgpg {

// Flat key=value config ('#' comments, whitespace trimmed). Lists are
// comma-separated; sizes are SxA pairs like "3x3,10x10".
struct ExperimentConfig {
    std::string kind;  // size-sweep | reward-diameter | cp-sweep | constant-scaling
                       // | bound-verify | discount-compare
    std::vector<std::pair<int, int>> sizes = {{3, 3}, {10, 10}};
    std::vector<std::uint64_t> seeds = {1};
    std::vector<double> deltas = {0.0, 0.25, 1.0};
    std::vector<double> cp_levels = {0.0, 0.5, 1.0};
    int iterations = 5000;
    int record_every = 10;
    long budget = 500;
    double gamma = 0.9;
    int workers = 0;  // 0 = library default
    bool strict = false;
    std::string out_dir = ".";
};

struct ConfigError {
    std::string message;
};

// returns the parsed config or an error description (exit code 2 territory)
std::optional<ExperimentConfig> parse_config(const std::string& text, std::string* error);
std::optional<ExperimentConfig> load_config(const std::string& path, std::string* error);

struct ExperimentResult {
    std::string csv;             // primary tidy dataset
    std::string summary;         // human-readable pass/fail or notes
    int failed_rows = 0;
};

ExperimentResult run_size_sweep(const ExperimentConfig& cfg);
ExperimentResult run_reward_diameter_sweep(const ExperimentConfig& cfg);
ExperimentResult run_cp_sweep(const ExperimentConfig& cfg);
ExperimentResult run_constant_scaling(const ExperimentConfig& cfg);
ExperimentResult run_bound_verification(const ExperimentConfig& cfg);
ExperimentResult run_discount_compare(const ExperimentConfig& cfg);

// tidy long-format x,y,group reshaping of any experiment dataset
std::string emit_plotdata(const std::string& dataset_csv, const std::string& kind);

// kernel interpolation between an action-independent endpoint and a fully
// action-distinct endpoint; drives the cp-sweep families
TabularMdp interpolate_kernel_mdp(int S, int A, double weight, std::uint64_t seed);

// iterations until rho reaches 90% of its own final improvement (0 when the
// curve is flat)
int iterations_to_fraction(const std::vector<double>& rhos, double fraction = 0.9);

int effective_workers(int requested);  // honors AVGPG_WORKERS

}  // namespace avgpg
