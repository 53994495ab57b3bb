// Bi-free probability checks: transforms, cumulants, bi-freeness, and the curated suite.
#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "bifree/checks.hpp"
#include "bifree/mobius.hpp"
#include "bifree/suite.hpp"
#include "bifree/transforms.hpp"

using namespace bifree;
using nlohmann::json;

namespace {

// Exit codes: 0 all pass, 1 a check failed, 2 configuration or infrastructure error.
constexpr int kPass = 0, kFail = 1, kError = 2;

json load_json(const std::string& arg) {
    if (!arg.empty() && arg.front() == '{') return json::parse(arg);
    std::ifstream in(arg);
    if (!in) throw ConfigError("cannot open " + arg);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(arg + ": " + e.what());
    }
}

ModelSpec load_model(const std::string& arg, const ModelSpec& fallback) {
    if (arg.empty()) return fallback;
    json j = load_json(arg);
    try {
        return ModelSpec::from_json(j.contains("model") ? j.at("model") : j);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
}

void emit(const json& j, const std::string& report) {
    std::string text = j.dump(2) + "\n";
    if (report.empty()) std::cout << text;
    else write_atomic(report, text);
}

std::vector<std::string> split_words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

GeneratorSet combined(const std::vector<TwoFacedFamily>& fams) {
    GeneratorSet z;
    for (const auto& f : fams) {
        GeneratorSet g = GeneratorSet::from_family(f);
        z.d = g.d;
        z.gens.insert(z.gens.end(), g.gens.begin(), g.gens.end());
        z.sides.insert(z.sides.end(), g.sides.begin(), g.sides.end());
    }
    return z;
}

int resolve_generator(const GeneratorSet& z, const std::string& tok) {
    for (int k = 0; k < z.size(); ++k)
        if (z.gens[k].first == tok) return k;
    size_t used = 0;
    int k = -1;
    try {
        k = std::stoi(tok, &used);
    } catch (const std::exception&) {
    }
    if (used != tok.size() || k < 0 || k >= z.size()) {
        std::string names;
        for (int q = 0; q < z.size(); ++q) names += " " + std::to_string(q) + ":" + z.gens[q].first;
        throw ConfigError("unknown generator '" + tok + "'; available:" + names);
    }
    return k;
}

int cmd_verify(const std::string& theorem, const std::string& model, int order, double rho, int points,
               std::uint64_t seed, const std::string& report) {
    Theorem th = parse_theorem(theorem);
    PairSetup s = PairSetup::from_families(build_families(load_model(model, ExperimentConfig{}.model)));
    Truncation t;
    t.order = order;
    t.rho = rho;
    auto rep = verify(th, s, t, points, seed);
    json j = rep.to_json();
    j["model"] = load_model(model, ExperimentConfig{}.model).to_json();
    emit(j, report);
    std::cerr << theorem << ": " << (rep.pass ? "PASS" : "FAIL") << " (worst residual/tol " << rep.worst_ratio
              << ")\n";
    return rep.pass ? kPass : kFail;
}

int cmd_cumulant(const std::string& family, const std::string& omega, int cap, bool trace, std::uint64_t b_seed) {
    ModelSpec spec;
    if (!family.empty() && family.front() != '{' && family.find(".json") == std::string::npos) {
        spec = ModelSpec::from_json(json{{"kind", family}});
    } else {
        spec = load_model(family, ModelSpec{});
    }
    GeneratorSet z = combined(build_families(spec));
    std::vector<int> w;
    for (const auto& tok : split_words(omega)) w.push_back(resolve_generator(z, tok));
    if (w.empty()) throw ConfigError("omega is empty");
    if (static_cast<int>(w.size()) > cap)
        throw ConfigError("omega has length " + std::to_string(w.size()) + " above --order-cap " + std::to_string(cap));
    std::vector<BMatrix> bs;
    std::mt19937_64 rng(b_seed);
    for (size_t k = 0; k + 1 < w.size(); ++k) bs.push_back(b_seed ? sample_unit_point(rng, z.d) : identity(z.d));
    DecoratedTuple t = kappa_Z_omega_tuple(z, w, bs);
    BMatrix value = eval_cumulant_full(t);
    json j{{"model", spec.to_json()}, {"omega", omega}, {"shape", t.shape.str()}, {"value", matrix_to_json(value)}};
    if (b_seed) {
        j["b"] = json::array();
        for (const auto& b : bs) j["b"].push_back(matrix_to_json(b));
    }
    if (trace) {
        BncPartition one = BncPartition::one(t.shape);
        json terms = json::array();
        for (const auto& pi : enumerate_bnc(t.shape)) {
            auto mu = mobius(pi, one);
            if (mu == 0) continue;
            BMatrix e = eval_moment_pi(pi, t);
            terms.push_back({{"pi", pi.str()}, {"mu", mu}, {"moment", matrix_to_json(e)}});
        }
        j["trace"] = terms;
    }
    std::cout << j.dump(2) << "\n";
    return kPass;
}

int cmd_check(const std::string& what, const std::string& model, int order, double tol, std::uint64_t seed) {
    CheckOptions opt;
    opt.max_order = order;
    opt.tol = tol;
    opt.seed = seed;
    ModelSpec fallback;
    if (what != "bifree") fallback.kind = "creation";
    ModelSpec spec = load_model(model, fallback);
    json j;
    bool pass = false;
    if (what == "bifree") {
        auto rep = check_bifree(build_families(spec), opt);
        j = rep.to_json();
        pass = rep.pass;
    } else if (what == "overD") {
        auto fams = build_families(spec);
        if (fams.empty()) throw ConfigError("model has no families");
        auto rep = check_bifree_over_D(fams.front(), opt);
        j = rep.to_json();
        pass = rep.pass;
    } else {
        auto rep = check_r_cyclic(*build_entry_source(spec), opt);
        j = rep.to_json();
        pass = rep.pass;
    }
    j["model"] = spec.to_json();
    std::cout << j.dump(2) << "\n";
    return pass ? kPass : kFail;
}

void print_table(const SuiteReport& rep) {
    for (const auto& c : rep.checks) {
        std::cerr << (c.pass ? "PASS " : "FAIL ") << std::left << std::setw(18) << c.name << " criterion "
                  << std::setw(3) << c.criterion << " residual " << std::setw(12) << c.residual << " tol "
                  << std::setw(12) << c.tolerance << " " << std::fixed << std::setprecision(2) << c.wall_time << "s"
                  << std::defaultfloat << std::setprecision(6);
        if (!c.error.empty()) std::cerr << "  error: " << c.error;
        std::cerr << "\n";
    }
    std::cerr << (rep.pass ? "suite PASS" : "suite FAIL") << "\n";
}

int cmd_suite(const std::string& config_path, const std::vector<std::string>& checks, int jobs,
              const std::string& report, std::int64_t seed, bool timing) {
    json j = config_path.empty() ? json::object() : load_json(config_path);
    ExperimentConfig cfg = ExperimentConfig::from_json(j);
    if (!checks.empty()) cfg.checks = checks;
    if (jobs > 0) cfg.jobs = jobs;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    if (timing) cfg.record_timing = true;
    cfg = ExperimentConfig::from_json(cfg.to_json());  // validates overrides
    cfg.jobs = jobs > 0 ? jobs : cfg.jobs;
    SuiteReport rep = run_suite(cfg);
    print_table(rep);
    if (report.empty()) std::cout << rep.dump();
    else write_atomic(report, rep.dump());
    return rep.pass ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bi-free probability with amalgamation: cumulants, transforms and their checks"};
    app.require_subcommand(1);

    std::string theorem, model, report;
    int order = 5, points = 5;
    double rho = 0.05, tol = 1e-9;
    std::uint64_t seed = 11;
    auto* verify_cmd = app.add_subcommand("verify", "check a transform identity at seeded points");
    verify_cmd->add_option("theorem", theorem)
        ->required()
        ->check(CLI::IsMember({"relations", "r-transform", "free-s", "s-lemmata", "t-property", "t-cases",
                               "s-property", "s-cases"}));
    verify_cmd->add_option("--model", model, "model JSON file or inline object (default: shifted pairs)");
    verify_cmd->add_option("--order", order, "truncation order N");
    verify_cmd->add_option("--rho", rho, "norm of sampled b and d");
    verify_cmd->add_option("--points", points);
    verify_cmd->add_option("--seed", seed);
    verify_cmd->add_option("--report", report, "write the JSON report here instead of stdout");

    std::string family, omega;
    int cap = 6;
    bool trace = false;
    std::uint64_t b_seed = 0;
    auto* cum = app.add_subcommand("cumulant", "kappa_{Z, omega} of a model's generators");
    cum->add_option("--family", family, "model kind, JSON file or inline object")->required();
    cum->add_option("--omega", omega, "generator indices or names, e.g. \"0 2 0\"")->required();
    cum->add_option("--order-cap", cap, "refuse longer words");
    cum->add_option("--b-seed", b_seed, "random B-arguments between terms (0: identities)");
    cum->add_flag("--trace", trace, "list the Moebius expansion terms");

    std::string what;
    auto* check = app.add_subcommand("check", "bi-freeness, bi-freeness over the diagonal, R-cyclicity");
    check->add_option("kind", what)->required()->check(CLI::IsMember({"bifree", "overD", "rcyclic"}));
    check->add_option("--model", model);
    check->add_option("--order", order);
    check->add_option("--tol", tol);
    check->add_option("--seed", seed);

    std::string config;
    std::vector<std::string> checks;
    int jobs = 0;
    std::int64_t suite_seed = -1;
    bool timing = false;
    auto* suite = app.add_subcommand("suite", "run the curated acceptance checks");
    suite->add_option("--config", config, "experiment config JSON");
    suite->add_option("--checks", checks, "subset of checks")->delimiter(',');
    suite->add_option("--jobs", jobs, "parallel checks (default BIFREE_JOBS or 1)");
    suite->add_option("--report", report, "write the report atomically here instead of stdout");
    suite->add_option("--seed", suite_seed, "override the config seed");
    suite->add_flag("--timing", timing, "record wall times in the report");

    std::string name;
    auto* explain_cmd = app.add_subcommand("explain", "describe a suite check");
    explain_cmd->add_option("name", name)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kPass : kError;
    }

    try {
        if (*verify_cmd) return cmd_verify(theorem, model, order, rho, points, seed, report);
        if (*cum) return cmd_cumulant(family, omega, cap, trace, b_seed);
        if (*check) return cmd_check(what, model, order, tol, seed);
        if (*suite) return cmd_suite(config, checks, jobs, report, suite_seed, timing);
        if (*explain_cmd) {
            std::cout << explain(name);
            return kPass;
        }
    } catch (const std::exception& e) {
        std::cerr << "bifree: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
