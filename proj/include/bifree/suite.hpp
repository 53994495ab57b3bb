#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifree/models.hpp"

namespace bifree {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TheoremRun {
    int order = 5;
    double rho = 0.05;
    int points = 3;
};

// Every number in a suite report is a function of this document.
struct ExperimentConfig {
    ModelSpec model;  // two pairs for the transform checks
    std::string bifree_model = "scalar_pairs";  // scalar_pairs | shared_generator (sabotaged)
    std::uint64_t seed = 11;
    std::vector<std::string> checks;  // empty runs every check
    int jobs = 0;                     // 0: BIFREE_JOBS, else 1
    bool record_timing = false;       // wall times in the report file

    // sizes
    int lattice_max_n = 8;
    int mobius_max_n = 6;
    int prime_max_n = 4;
    int roundtrip_max_n = 6;
    int vanishing_max_n = 5;
    int vanishing_draws = 3;
    int products_max_n = 6;
    int bifree_order = 5;
    int lift_order = 4;
    int creation_K = 2;  // K d^2 = 8 Fock generators at d = 2
    int creation_depth = 6;
    int rcyclic_order = 4;
    int overD_order = 3;
    int diagonal_max_n = 4;
    std::vector<int> convergence_orders = {3, 4, 5};

    // tolerances
    double roundtrip_tol = 1e-10;
    double vanishing_tol = 1e-10;
    double products_tol = 1e-9;
    double bifree_tol = 1e-9;
    double lift_tol = 1e-8;
    double control_min = 0.5;
    double rcyclic_tol = 1e-9;
    double overD_tol = 1e-8;
    double perturb_min = 0.1;
    double diagonal_tol = 1e-9;
    double safety = 10.0;
    double floor = 1e-12;

    TheoremRun relations{6, 0.08, 5};
    TheoremRun r_transform{6, 0.05, 5};
    TheoremRun free_s{5, 0.05, 5};
    TheoremRun s_lemmata{5, 0.05, 5};
    TheoremRun t_property{5, 0.05, 3};
    TheoremRun t_cases{5, 0.05, 3};
    TheoremRun s_property{5, 0.05, 3};
    TheoremRun s_cases{5, 0.05, 3};

    ExperimentConfig();
    static ExperimentConfig from_json(const nlohmann::json& j);  // throws ConfigError
    nlohmann::json to_json() const;
};

struct CheckResult {
    std::string name;
    int criterion = 0;
    std::string anchor;
    double residual = 0;
    double tolerance = 0;
    bool pass = false;
    std::string error;  // internal failure of the check
    double wall_time = 0;
    nlohmann::json details;
    nlohmann::json to_json(bool with_timing) const;
};

struct SuiteReport {
    nlohmann::json config;
    std::vector<CheckResult> checks;
    bool pass = true;
    bool with_timing = false;
    nlohmann::json to_json() const;
    std::string dump() const;  // canonical serialization
};

struct SuiteCheck {
    std::string name;
    int criterion;
    std::string anchor;
    std::string formula;
    std::string contract;
    std::function<CheckResult(const ExperimentConfig&)> run;
};

const std::vector<SuiteCheck>& suite_checks();
std::vector<std::string> suite_check_names();

// Unknown names in config.checks raise ConfigError.
SuiteReport run_suite(const ExperimentConfig& config);
int effective_jobs(const ExperimentConfig& config);
// Anchor, formula and tolerance contract; throws std::invalid_argument listing the valid names.
std::string explain(const std::string& name);
// Writes to a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& text);

}  // namespace bifree
