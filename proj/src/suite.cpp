#include "bifree/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "bifree/checks.hpp"
#include "bifree/mobius.hpp"
#include "bifree/transforms.hpp"

namespace bifree {

namespace {

using nlohmann::json;

std::vector<ChiShape> shapes_of(int n) {
    std::vector<ChiShape> out;
    for (unsigned m = 0; m < (1u << n); ++m) {
        std::vector<Side> t;
        for (int p = 0; p < n; ++p) t.push_back((m >> p & 1u) ? Side::R : Side::L);
        out.emplace_back(t);
    }
    return out;
}

std::vector<TwoFacedFamily> lifted(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return matrix_lift_pairs(2, 6, 2, rng);
}

DecoratedTuple random_tuple(const std::vector<TwoFacedFamily>& fams, const ChiShape& shape, std::mt19937_64& rng) {
    int d = fams[0].d;
    DecoratedTuple t{shape, {}};
    for (int p = 0; p < shape.size(); ++p) {
        const auto& f = fams[rng() % fams.size()];
        const OpElement& x = shape.tag(p) == Side::L ? f.left[0].second : f.right[0].second;
        t.entries.push_back(decorated_entry(x, random_square(rng, d, 0.5) + identity(d), random_square(rng, d, 0.5)));
    }
    return t;
}

std::vector<ScalarPairSpec> bifree_specs() {
    return {{{0.2, 1.0, 0.3}, {-0.1, 1.0, 0.2}}, {{0.1, 1.0, -0.2}, {0.3, 0.5}}};
}

CheckResult make_result(double residual, double tolerance, bool pass, json details = json::object()) {
    CheckResult r;
    r.residual = residual;
    r.tolerance = tolerance;
    r.pass = pass;
    r.details = std::move(details);
    return r;
}

CheckResult upper(double residual, double tol, json details = json::object()) {
    return make_result(residual, tol, residual <= tol, std::move(details));
}

// Negative controls pass when the residual reaches the threshold.
CheckResult lower(double residual, double threshold, json details = json::object()) {
    details["expect"] = "failure of the checked property";
    return make_result(residual, threshold, residual >= threshold, std::move(details));
}

CheckResult run_mobius(const ExperimentConfig& c) {
    long long bad_counts = 0, bad_sums = 0, bad_top = 0, shapes = 0;
    for (int n = 1; n <= c.lattice_max_n; ++n)
        for (const auto& sh : shapes_of(n)) {
            ++shapes;
            auto ps = enumerate_bnc(sh);
            if (static_cast<long long>(ps.size()) != catalan(n)) ++bad_counts;
            if (n > c.mobius_max_n) continue;
            for (const auto& s : ps)
                if (!mobius_column_sum_check(s)) ++bad_sums;
            long long top = mobius(BncPartition::zero(sh), BncPartition::one(sh));
            if (top != (n % 2 ? 1 : -1) * catalan(n - 1)) ++bad_top;
        }
    double bad = static_cast<double>(bad_counts + bad_sums + bad_top);
    return upper(bad, 0, {{"shapes", shapes}, {"count_mismatches", bad_counts}, {"interval_sum_failures", bad_sums},
                          {"zero_one_mismatches", bad_top}});
}

// Independent predicate for BNC': {1} a singleton, parity-pure blocks, connected with the pairs {2k-1, 2k}.
bool prime_predicate(const BncPartition& p) {
    const auto& l = p.labels();
    int n = p.size();
    for (int q = 1; q < n; ++q)
        if (l[q] == l[0]) return false;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (l[a] == l[b] && (a - b) % 2 != 0) return false;
    Blocks pairs;
    for (int k = 0; k < n; k += 2) pairs.push_back({k, k + 1});
    BncPartition sigma(p.shape(), pairs);
    return join(p, sigma) == BncPartition::one(p.shape());
}

CheckResult run_bnc_prime(const ExperimentConfig& c) {
    long long mismatches = 0;
    for (int n = 1; n <= c.prime_max_n; ++n)
        for (Side side : {Side::L, Side::R}) {
            std::set<std::vector<int>> want, got;
            for (const auto& p : enumerate_bnc(ChiShape::all(side, 2 * n)))
                if (prime_predicate(p)) want.insert(p.labels());
            for (const auto& p : enumerate_bnc_prime(side, n)) got.insert(p.labels());
            if (want != got) ++mismatches;
            if (static_cast<long long>(got.size()) != catalan(n - 1)) ++mismatches;
        }
    return upper(static_cast<double>(mismatches), 0, {{"max_n", c.prime_max_n}});
}

CheckResult run_round_trip(const ExperimentConfig& c) {
    auto fams = lifted(c.seed);
    std::mt19937_64 rng(c.seed + 1);
    double worst = 0;
    long long tuples = 0;
    for (int n = 1; n <= c.roundtrip_max_n; ++n)
        for (const auto& sh : shapes_of(n)) {
            auto t = random_tuple(fams, sh, rng);
            worst = std::max(worst, max_abs_diff(moments_from_cumulants(BncPartition::one(sh), t), eval_moment_full(t)));
            ++tuples;
        }
    return upper(worst, c.roundtrip_tol, {{"tuples", tuples}});
}

CheckResult run_vanishing(const ExperimentConfig& c) {
    auto fams = lifted(c.seed);
    std::mt19937_64 rng(c.seed + 2);
    double worst = 0;
    long long tuples = 0;
    for (int n = 2; n <= c.vanishing_max_n; ++n)
        for (const auto& sh : shapes_of(n))
            for (int k = 0; k < c.vanishing_draws; ++k) {
                auto t = random_tuple(fams, sh, rng);
                int q = static_cast<int>(rng() % n);
                BMatrix b = random_square(rng, 2, 1.0);
                t.entries[q].op = sh.tag(q) == Side::L ? OpElement::Lb(b) : OpElement::Rb(b);
                worst = std::max(worst, max_abs(eval_cumulant_full(t)));
                ++tuples;
            }
    return upper(worst, c.vanishing_tol, {{"tuples", tuples}});
}

CheckResult run_products(const ExperimentConfig& c) {
    auto fams = lifted(c.seed);
    std::mt19937_64 rng(c.seed + 3);
    double worst = 0;
    long long patterns = 0;
    for (int n = 2; n <= c.products_max_n; ++n)
        for (const auto& inner : shapes_of(n)) {
            auto t = random_tuple(fams, inner, rng);
            std::vector<int> optional;
            for (int p = 1; p < n; ++p)
                if (inner.tag(p) == inner.tag(p - 1)) optional.push_back(p);
            for (unsigned mask = 0; mask < (1u << optional.size()); ++mask) {
                std::vector<int> cuts = {0};
                for (int p = 1; p < n; ++p) {
                    auto it = std::find(optional.begin(), optional.end(), p);
                    bool keep = it == optional.end() || (mask >> (it - optional.begin()) & 1u);
                    if (keep) cuts.push_back(p);
                }
                cuts.push_back(n);
                std::vector<Side> outer;
                for (size_t g = 0; g + 1 < cuts.size(); ++g) outer.push_back(inner.tag(cuts[g]));
                HatEmbedding emb(ChiShape(outer), cuts);
                worst = std::max(worst, cumulant_of_products(emb, t).difference);
                ++patterns;
            }
        }
    return upper(worst, c.products_tol, {{"patterns", patterns}});
}

CheckResult run_bifree(const ExperimentConfig& c) {
    CheckOptions opt;
    opt.max_order = c.bifree_order;
    opt.tol = c.bifree_tol;
    opt.seed = c.seed;
    bool shared = c.bifree_model == "shared_generator";
    auto scalar = check_bifree(scalar_pairs(2 * c.bifree_order + 2, bifree_specs(), shared), opt);
    CheckOptions lo = opt;
    lo.max_order = c.lift_order;
    lo.tol = c.lift_tol;
    std::mt19937_64 rng(c.seed);
    auto lift = check_bifree(matrix_lift_pairs(2, 6, 2, rng), lo);
    CheckResult r = upper(std::max(scalar.worst, lift.worst), std::min(c.bifree_tol, c.lift_tol),
                          {{"model", c.bifree_model},
                           {"scalar_worst", scalar.worst},
                           {"scalar_tol", c.bifree_tol},
                           {"lift_worst", lift.worst},
                           {"lift_tol", c.lift_tol}});
    r.pass = scalar.pass && lift.pass;
    if (!scalar.pass) r.details["witnesses"] = scalar.witnesses.to_json();
    return r;
}

CheckResult run_bifree_control(const ExperimentConfig& c) {
    CheckOptions opt;
    opt.max_order = c.bifree_order;
    opt.tol = c.bifree_tol;
    opt.seed = c.seed;
    auto rep = check_bifree(scalar_pairs(2 * c.bifree_order + 2, bifree_specs(), true), opt);
    return lower(rep.worst, c.control_min, {{"checked_property_pass", rep.pass}});
}

CheckResult run_rcyclic(const ExperimentConfig& c) {
    CheckOptions opt;
    opt.max_order = c.rcyclic_order;
    opt.tol = c.rcyclic_tol;
    opt.seed = c.seed;
    auto pair = creation_example(2, c.creation_K, c.creation_depth);
    auto rc = check_r_cyclic(FockEntrySource(pair), opt);
    return make_result(rc.worst, c.rcyclic_tol, rc.pass, {{"evaluated", rc.evaluated}, {"pruned", rc.pruned}});
}

CheckResult run_overD(const ExperimentConfig& c) {
    CheckOptions opt;
    opt.max_order = c.overD_order;
    opt.tol = c.overD_tol;
    opt.seed = c.seed;
    auto rep = check_bifree_over_D(creation_example(2, c.creation_K, c.creation_depth).family("creation"), opt);
    return make_result(std::max(rep.worst_condition0, rep.worst_condition1), c.overD_tol, rep.pass,
                       {{"condition0", rep.worst_condition0}, {"condition1", rep.worst_condition1}});
}

CheckResult run_rcyclic_control(const ExperimentConfig& c) {
    CheckOptions opt;
    opt.seed = c.seed;
    opt.max_order = c.rcyclic_order;
    opt.tol = c.rcyclic_tol;
    auto pair = creation_example(2, c.creation_K, c.creation_depth, true);
    auto rc = check_r_cyclic(FockEntrySource(pair), opt);
    opt.max_order = c.overD_order;
    opt.tol = c.overD_tol;
    auto od = check_bifree_over_D(pair.family("creation"), opt);
    double od_worst = std::max(od.worst_condition0, od.worst_condition1);
    CheckResult r = lower(std::min(rc.worst, od_worst), c.perturb_min,
                          {{"rcyclic_worst", rc.worst}, {"overD_worst", od_worst}});
    r.pass = r.pass && !rc.pass && !od.pass;
    return r;
}

CheckResult run_diagonal(const ExperimentConfig& c) {
    auto pair = creation_example(2, 1, 2 * c.diagonal_max_n);
    std::mt19937_64 rng(c.seed + 4);
    double expand = 0, formula = 0, hypothesis = 0;
    long long words = 0;
    std::vector<std::vector<int>> level = {{}};
    for (int n = 1; n <= c.diagonal_max_n; ++n) {
        std::vector<std::vector<int>> next;
        for (const auto& w : level)
            for (int k = 0; k < pair.size(); ++k) {
                auto v = w;
                v.push_back(k);
                next.push_back(v);
            }
        level = next;
        for (const auto& w : level) {
            expand = std::max(expand, matrix_cumulant_expand(pair, w).residual);
            std::vector<BMatrix> lam, gam;
            for (size_t k = 0; k < w.size(); ++k) {
                lam.push_back(cond_expect_diag(random_square(rng, 2, 1.0)));
                gam.push_back(cond_expect_diag(random_square(rng, 2, 1.0)));
            }
            auto f = diagonal_cumulant_formula(pair, w, lam, gam);
            formula = std::max(formula, f.residual);
            hypothesis = std::max(hypothesis, f.hypothesis_residual);
            ++words;
        }
    }
    return upper(std::max(expand, formula), c.diagonal_tol,
                 {{"words", words}, {"expand", expand}, {"formula", formula}, {"hypothesis", hypothesis}});
}

PairSetup theorem_setup(const ExperimentConfig& c) { return PairSetup::from_families(build_families(c.model)); }

Truncation truncation(const ExperimentConfig& c, const TheoremRun& run) {
    Truncation t;
    t.order = run.order;
    t.rho = run.rho;
    t.safety = c.safety;
    t.floor = c.floor;
    return t;
}

CheckResult run_theorems(const ExperimentConfig& c, const std::vector<std::pair<Theorem, TheoremRun>>& list) {
    PairSetup s = theorem_setup(c);
    json ids = json::object();
    double worst_ratio = -1, res = 0, tol = 0;
    bool pass = true;
    for (const auto& [th, run] : list) {
        auto rep = verify(th, s, truncation(c, run), run.points, c.seed);
        pass = pass && rep.pass;
        for (const auto& pr : rep.points)
            for (const auto& ch : pr.checks) {
                double ratio = ch.residual / ch.tol;
                auto& e = ids[ch.name];
                if (e.is_null()) e = {{"residual", 0.0}, {"tail_tol", ch.tol}, {"ratio", 0.0}, {"pass", true}};
                if (ratio > e["ratio"].get<double>()) e = {{"residual", ch.residual}, {"tail_tol", ch.tol}, {"ratio", ratio}, {"pass", e["pass"]}};
                e["pass"] = e["pass"].get<bool>() && ch.pass;
                if (ratio > worst_ratio) {
                    worst_ratio = ratio;
                    res = ch.residual;
                    tol = ch.tol;
                }
            }
    }
    return make_result(res, tol, pass, {{"identities", ids}, {"worst_ratio", worst_ratio}});
}

CheckResult run_convergence(const ExperimentConfig& c) {
    PairSetup s = theorem_setup(c);
    const std::vector<std::pair<Theorem, TheoremRun>> list = {{Theorem::RTransform, c.r_transform},
                                                               {Theorem::FreeS, c.free_s},
                                                               {Theorem::SLemmata, c.s_lemmata},
                                                               {Theorem::TProperty, c.t_property},
                                                               {Theorem::SProperty, c.s_property}};
    json profiles = json::object();
    double worst_rise = 0;
    bool pass = true;
    for (const auto& [th, run] : list) {
        std::mt19937_64 rng(c.seed);
        Truncation t = truncation(c, run);
        SamplePoint p = sample_point(rng, s.d, t.rho);
        auto prof = convergence_profile(th, s, t, p, c.convergence_orders);
        for (const auto& row : prof.residuals)
            for (size_t k = 1; k < row.size(); ++k) worst_rise = std::max(worst_rise, row[k] - row[k - 1]);
        pass = pass && prof.non_increasing();
        profiles[theorem_name(th)] = prof.to_json();
    }
    return make_result(worst_rise, 0, pass, {{"profiles", profiles}});
}

template <class T>
void read(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

TheoremRun read_run(const json& j, TheoremRun r) {
    read(j, "order", r.order);
    read(j, "rho", r.rho);
    read(j, "points", r.points);
    if (r.order < 1 || r.points < 1 || !(r.rho > 0)) throw ConfigError("theorem runs need order, points >= 1 and rho > 0");
    return r;
}

json run_json(const TheoremRun& r) { return {{"order", r.order}, {"rho", r.rho}, {"points", r.points}}; }

}  // namespace

ExperimentConfig::ExperimentConfig() {
    model.kind = "shifted_pairs";
    model.d = 2;
    model.depth = 8;
    model.pairs = 2;
    model.seed = 7;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
    static const std::set<std::string> keys = {"model", "bifree_model", "seed", "checks", "jobs", "record_timing",
                                               "sizes", "tolerances", "theorems", "convergence_orders"};
    static const std::set<std::string> theorem_keys = {"relations", "r-transform", "free-s", "s-lemmata",
                                                       "t-property", "t-cases", "s-property", "s-cases"};
    ExperimentConfig c;
    try {
        if (!j.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [k, v] : j.items())
            if (!keys.count(k)) throw ConfigError("unknown config key '" + k + "'");
        if (j.contains("model")) c.model = ModelSpec::from_json(j.at("model"));
        read(j, "bifree_model", c.bifree_model);
        if (c.bifree_model != "scalar_pairs" && c.bifree_model != "shared_generator")
            throw ConfigError("bifree_model must be scalar_pairs or shared_generator");
        read(j, "seed", c.seed);
        read(j, "checks", c.checks);
        read(j, "jobs", c.jobs);
        read(j, "record_timing", c.record_timing);
        read(j, "convergence_orders", c.convergence_orders);
        if (j.contains("sizes")) {
            const auto& s = j.at("sizes");
            read(s, "lattice_max_n", c.lattice_max_n);
            read(s, "mobius_max_n", c.mobius_max_n);
            read(s, "prime_max_n", c.prime_max_n);
            read(s, "roundtrip_max_n", c.roundtrip_max_n);
            read(s, "vanishing_max_n", c.vanishing_max_n);
            read(s, "vanishing_draws", c.vanishing_draws);
            read(s, "products_max_n", c.products_max_n);
            read(s, "bifree_order", c.bifree_order);
            read(s, "lift_order", c.lift_order);
            read(s, "creation_K", c.creation_K);
            read(s, "creation_depth", c.creation_depth);
            read(s, "rcyclic_order", c.rcyclic_order);
            read(s, "overD_order", c.overD_order);
            read(s, "diagonal_max_n", c.diagonal_max_n);
        }
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            read(t, "roundtrip", c.roundtrip_tol);
            read(t, "vanishing", c.vanishing_tol);
            read(t, "products", c.products_tol);
            read(t, "bifree", c.bifree_tol);
            read(t, "lift", c.lift_tol);
            read(t, "control_min", c.control_min);
            read(t, "rcyclic", c.rcyclic_tol);
            read(t, "overD", c.overD_tol);
            read(t, "perturb_min", c.perturb_min);
            read(t, "diagonal", c.diagonal_tol);
            read(t, "safety", c.safety);
            read(t, "floor", c.floor);
        }
        if (j.contains("theorems")) {
            const auto& t = j.at("theorems");
            for (const auto& [k, v] : t.items())
                if (!theorem_keys.count(k)) throw ConfigError("unknown theorem run '" + k + "'");
            if (t.contains("relations")) c.relations = read_run(t.at("relations"), c.relations);
            if (t.contains("r-transform")) c.r_transform = read_run(t.at("r-transform"), c.r_transform);
            if (t.contains("free-s")) c.free_s = read_run(t.at("free-s"), c.free_s);
            if (t.contains("s-lemmata")) c.s_lemmata = read_run(t.at("s-lemmata"), c.s_lemmata);
            if (t.contains("t-property")) c.t_property = read_run(t.at("t-property"), c.t_property);
            if (t.contains("t-cases")) c.t_cases = read_run(t.at("t-cases"), c.t_cases);
            if (t.contains("s-property")) c.s_property = read_run(t.at("s-property"), c.s_property);
            if (t.contains("s-cases")) c.s_cases = read_run(t.at("s-cases"), c.s_cases);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    auto names = suite_check_names();
    for (const auto& n : c.checks)
        if (std::find(names.begin(), names.end(), n) == names.end()) throw ConfigError("unknown check '" + n + "'");
    return c;
}

json ExperimentConfig::to_json() const {
    return {{"model", model.to_json()},
            {"bifree_model", bifree_model},
            {"seed", seed},
            {"checks", checks},
            {"record_timing", record_timing},
            {"convergence_orders", convergence_orders},
            {"sizes",
             {{"lattice_max_n", lattice_max_n},
              {"mobius_max_n", mobius_max_n},
              {"prime_max_n", prime_max_n},
              {"roundtrip_max_n", roundtrip_max_n},
              {"vanishing_max_n", vanishing_max_n},
              {"vanishing_draws", vanishing_draws},
              {"products_max_n", products_max_n},
              {"bifree_order", bifree_order},
              {"lift_order", lift_order},
              {"creation_K", creation_K},
              {"creation_depth", creation_depth},
              {"rcyclic_order", rcyclic_order},
              {"overD_order", overD_order},
              {"diagonal_max_n", diagonal_max_n}}},
            {"tolerances",
             {{"roundtrip", roundtrip_tol},
              {"vanishing", vanishing_tol},
              {"products", products_tol},
              {"bifree", bifree_tol},
              {"lift", lift_tol},
              {"control_min", control_min},
              {"rcyclic", rcyclic_tol},
              {"overD", overD_tol},
              {"perturb_min", perturb_min},
              {"diagonal", diagonal_tol},
              {"safety", safety},
              {"floor", floor}}},
            {"theorems",
             {{"relations", run_json(relations)},
              {"r-transform", run_json(r_transform)},
              {"free-s", run_json(free_s)},
              {"s-lemmata", run_json(s_lemmata)},
              {"t-property", run_json(t_property)},
              {"t-cases", run_json(t_cases)},
              {"s-property", run_json(s_property)},
              {"s-cases", run_json(s_cases)}}}};
}

json CheckResult::to_json(bool with_timing) const {
    json j{{"name", name},           {"criterion", criterion}, {"anchor", anchor}, {"residual", residual},
           {"tolerance", tolerance}, {"pass", pass},           {"details", details}};
    if (!error.empty()) j["error"] = error;
    if (with_timing) j["wall_time_s"] = wall_time;
    return j;
}

json SuiteReport::to_json() const {
    json cs = json::array();
    for (const auto& c : checks) cs.push_back(c.to_json(with_timing));
    return {{"config", config}, {"checks", cs}, {"pass", pass}};
}

std::string SuiteReport::dump() const { return to_json().dump(2) + "\n"; }

const std::vector<SuiteCheck>& suite_checks() {
    static const std::vector<SuiteCheck> checks = {
        {"mobius", 1, "bi-non-crossing lattice and its Moebius function",
         "|BNC(chi)| = Catalan(n) for every shape; sum_{pi <= tau <= sigma} mu(tau, sigma) = [pi = sigma]; "
         "mu(0_chi, 1_chi) = (-1)^(n-1) Catalan(n-1)",
         "exact: mismatch count must be 0 (counts n <= lattice_max_n, Moebius n <= mobius_max_n)", run_mobius},
        {"bnc-prime", 2, "pinched partition families BNC'",
         "enumerate_bnc_prime(side, n) = {pi in BNC : {1} a block, parity-pure blocks, pi v {{2k-1,2k}} = 1}",
         "exact: set equality and |BNC'(n)| = Catalan(n-1) for n <= prime_max_n", run_bnc_prime},
        {"round-trip", 3, "moment-cumulant inversion", "E_{1_chi} = sum_{pi in BNC(chi)} kappa_pi on decorated lifted Fock tuples",
         "max |difference| <= roundtrip tolerance (1e-10), every shape n <= roundtrip_max_n", run_round_trip},
        {"vanishing", 4, "vanishing of cumulants with a B-operator entry",
         "kappa_chi(..., L_b or R_b, ...) = 0 for n >= 2", "max norm <= vanishing tolerance (1e-10), shapes n <= 5, 3 draws",
         run_vanishing},
        {"products", 5, "cumulants of products",
         "kappa_pi-hat on grouped products = sum_{sigma in BNC, sigma v 0-hat = 1} kappa_sigma",
         "max difference <= products tolerance (1e-9), every single-sided cut pattern, inner n <= 6", run_products},
        {"bifree", 6, "bi-free independence with amalgamation over M_d",
         "mixed cumulants of two-faced families vanish (scalar pairs and M_2 lifts)",
         "scalar pairs to bifree_order at 1e-9, lifts to lift_order at 1e-8", run_bifree},
        {"bifree-control", 6, "shared-generator negative control",
         "pairs sharing a Fock generator have a nonvanishing mixed cumulant",
         "passes when the worst mixed cumulant is >= control_min (0.5)", run_bifree_control},
        {"rcyclic", 7, "R-cyclic matrices of two-faced Fock operators",
         "kappa(z_{i1 j1}, ..., z_{in jn}) = 0 unless the index chain closes along s_chi",
         "worst open-chain cumulant <= 1e-9, order rcyclic_order, creation example with creation_K matrices (K d^2 Fock generators)",
         run_rcyclic},
        {"overD", 7, "bi-freeness over the diagonal algebra",
         "kappa^{M_d}(b_1 Z, ...) = F(kappa(F(b_1) Z, ...)) and the D-valued cumulant agrees",
         "worst residual <= 1e-8, order overD_order", run_overD},
        {"rcyclic-control", 7, "coupled perturbation of the creation example",
         "adding l(h) at entry (1,2) breaks R-cyclicity and bi-freeness over D",
         "passes when both checks fail with residual >= perturb_min (0.1)", run_rcyclic_control},
        {"diagonal-formula", 8, "cumulants of R-cyclic matrices",
         "matrix-level kappa equals the entrywise closed-chain sum, also with diagonal decorations",
         "max difference <= 1e-9 for every word of length <= diagonal_max_n, d = 2", run_diagonal},
        {"relations", 9, "one-faced moment and cumulant series",
         "G = M b, C = 1 + b R, M(b) = C(M(b) b) and the right analogues",
         "each residual <= tau = safety * tail + floor, order 6, rho 0.08, 5 points",
         [](const ExperimentConfig& c) { return run_theorems(c, {{Theorem::Relations, c.relations}}); }},
        {"r-transform", 10, "two-faced R-transform identity",
         "M^l M + M M^r = M^l c M^r + C(M^l b, M, d M^r); additivity of C - c; degenerations at b = 0, d = 0",
         "each residual <= tau, order 6, rho 0.05, 5 points",
         [](const ExperimentConfig& c) { return run_theorems(c, {{Theorem::RTransform, c.r_transform}}); }},
        {"s-transform", 11, "S-transforms of products and the pinched series",
         "S^l_{X1X2}(b) = S^l_{X2}(b) S^l_{X1}(S^l_{X2}(b)^-1 b S^l_{X2}(b)) and its right analogue; Phi and Psi "
         "routes agree; theta phi(b theta) = 1; pinched-series lemmata",
         "each residual <= tau (order 5, rho 0.05, 5 points); fixed point residual <= 1e-10",
         [](const ExperimentConfig& c) {
             return run_theorems(c, {{Theorem::FreeS, c.free_s}, {Theorem::SLemmata, c.s_lemmata}});
         }},
        {"t-property", 12, "T-transform of (X1 + X2, Y1 Y2)",
         "T_{X1+X2,Y1Y2}(b,c,d) = T_{X1,Y1}(b, T_{X2,Y2}(b,c,d) S2^-1, S2 d S2^-1) S2 with S2 = S^r_{Y2}(d); "
         "class splits of K",
         "each residual <= tau, order 5, rho 0.05, 3 points",
         [](const ExperimentConfig& c) {
             return run_theorems(c, {{Theorem::TProperty, c.t_property}, {Theorem::TCases, c.t_cases}});
         }},
        {"s-property", 13, "two-faced S-transform of (X1 X2, Y1 Y2)",
         "S_{X1X2,Y1Y2}(b,c,d) = Sl S_{X1,Y1}(Sl^-1 b Sl, Sl^-1 S_{X2,Y2}(b,c,d) Sr^-1, Sr d Sr^-1) Sr; "
         "six class splits of K",
         "each residual <= tau, order 5, rho 0.05, 3 points",
         [](const ExperimentConfig& c) {
             return run_theorems(c, {{Theorem::SProperty, c.s_property}, {Theorem::SCases, c.s_cases}});
         }},
        {"convergence", 14, "truncation-order convergence",
         "headline residuals of the transform identities are non-increasing in N",
         "largest rise r(N+1) - r(N) over convergence_orders must be <= 0", run_convergence},
    };
    return checks;
}

std::vector<std::string> suite_check_names() {
    std::vector<std::string> out;
    for (const auto& c : suite_checks()) out.push_back(c.name);
    return out;
}

int effective_jobs(const ExperimentConfig& config) {
    if (config.jobs > 0) return config.jobs;
    if (const char* env = std::getenv("BIFREE_JOBS")) {
        int j = std::atoi(env);
        if (j > 0) return j;
    }
    return 1;
}

SuiteReport run_suite(const ExperimentConfig& config) {
    std::vector<const SuiteCheck*> selected;
    for (const auto& c : suite_checks())
        if (config.checks.empty() || std::find(config.checks.begin(), config.checks.end(), c.name) != config.checks.end())
            selected.push_back(&c);
    for (const auto& n : config.checks) {
        auto names = suite_check_names();
        if (std::find(names.begin(), names.end(), n) == names.end()) throw ConfigError("unknown check '" + n + "'");
    }
    std::vector<CheckResult> results(selected.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t k = next++; k < selected.size(); k = next++) {
            const SuiteCheck& sc = *selected[k];
            auto t0 = std::chrono::steady_clock::now();
            CheckResult r;
            try {
                r = sc.run(config);
            } catch (const std::exception& e) {
                r = CheckResult{};
                r.pass = false;
                r.error = e.what();
            }
            r.name = sc.name;
            r.criterion = sc.criterion;
            r.anchor = sc.anchor;
            r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            results[k] = std::move(r);
        }
    };
    int jobs = std::max(1, std::min<int>(effective_jobs(config), static_cast<int>(selected.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < jobs; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    SuiteReport rep;
    rep.config = config.to_json();
    rep.with_timing = config.record_timing;
    rep.checks = std::move(results);
    for (const auto& c : rep.checks) rep.pass = rep.pass && c.pass;
    return rep;
}

std::string explain(const std::string& name) {
    for (const auto& c : suite_checks())
        if (c.name == name) {
            std::ostringstream os;
            os << c.name << " (acceptance criterion " << c.criterion << ")\n"
               << "  anchor:    " << c.anchor << "\n"
               << "  formula:   " << c.formula << "\n"
               << "  tolerance: " << c.contract << "\n";
            return os.str();
        }
    std::string list;
    for (const auto& n : suite_check_names()) list += (list.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown check '" + name + "'; valid names: " + list);
}

void write_atomic(const std::string& path, const std::string& text) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

}  // namespace bifree
