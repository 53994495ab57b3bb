// Acceptance matrix: one line per criterion, exit status 0 iff every criterion passes.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "../unit/oracles.hpp"
#include "bifree/mobius.hpp"
#include "bifree/partitions.hpp"
#include "bifree/suite.hpp"

#ifndef BIFREE_GOLDEN_CONFIG
#define BIFREE_GOLDEN_CONFIG "configs/golden.json"
#endif

using namespace bifree;
using oracle::Labels;

namespace {

// Runtime limits in seconds.
constexpr double kLatticeSeconds = 30.0;
constexpr double kPrimeSeconds = 5.0;
constexpr double kRoundTripSeconds = 60.0;
constexpr double kSuiteSeconds = 15 * 60.0;

// Exhaustive check sizes.
constexpr int kMobiusOracleMaxN = 6;
constexpr int kPrimeOracleMaxN = 4;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Line {
    int criterion;
    std::string title;
    bool pass;
    std::string detail;
};

std::vector<Side> tags_of(unsigned mask, int n) {
    std::vector<Side> t;
    for (int p = 0; p < n; ++p) t.push_back((mask >> p & 1u) ? Side::R : Side::L);
    return t;
}

// mu(x, .) for one row by the defining recursion over the upset of x.
std::vector<long long> mobius_row(const std::vector<std::vector<char>>& le, const std::vector<int>& blocks, int x) {
    int m = static_cast<int>(le.size());
    std::vector<int> up;
    for (int z = 0; z < m; ++z)
        if (le[x][z]) up.push_back(z);
    std::stable_sort(up.begin(), up.end(), [&](int a, int b) { return blocks[a] > blocks[b]; });
    std::vector<long long> mu(m, 0);
    for (int z : up) {
        if (z == x) {
            mu[z] = 1;
            continue;
        }
        long long s = 0;
        for (int w : up)
            if (w != z && le[w][z]) s += mu[w];
        mu[z] = -s;
    }
    return mu;
}

// Exhaustive fast-path mu against the recursive oracle, plus the lattice itself against the brute-force filter.
std::pair<long long, long long> mobius_oracle_mismatches() {
    long long bad = 0, pairs = 0;
    for (int n = 1; n <= kMobiusOracleMaxN; ++n)
        for (unsigned mask = 0; mask < (1u << n); ++mask) {
            auto tags = tags_of(mask, n);
            ChiShape sh(tags);
            auto poset = oracle::brute_bnc(tags);
            std::set<Labels> want(poset.begin(), poset.end()), got;
            for (const auto& p : enumerate_bnc(sh)) got.insert(oracle::labels_of(p));
            if (want != got) ++bad;
            int m = static_cast<int>(poset.size());
            std::vector<std::vector<char>> le(m, std::vector<char>(m));
            std::vector<int> blocks(m);
            for (int a = 0; a < m; ++a) {
                blocks[a] = oracle::num_blocks(poset[a]);
                for (int b = 0; b < m; ++b) le[a][b] = oracle::leq(poset[a], poset[b]);
            }
            for (int a = 0; a < m; ++a) {
                auto row = mobius_row(le, blocks, a);
                for (int b = 0; b < m; ++b) {
                    if (!le[a][b]) continue;
                    ++pairs;
                    if (mobius_labels(sh, poset[a], poset[b]) != row[b]) ++bad;
                }
            }
        }
    return {bad, pairs};
}

// BNC' by brute force: all-one-side BNC on 2n points, {1} a singleton, parity-pure blocks,
// blocks connected through the pairs {2k-1, 2k} (union-find).
std::set<Labels> brute_prime(Side side, int n) {
    std::set<Labels> out;
    std::vector<Side> tags(2 * n, side);
    for (const auto& l : oracle::brute_bnc(tags)) {
        bool ok = true;
        for (int q = 1; q < 2 * n && ok; ++q) ok = l[q] != l[0];
        for (int a = 0; a < 2 * n && ok; ++a)
            for (int b = a + 1; b < 2 * n && ok; ++b) ok = !(l[a] == l[b] && (b - a) % 2);
        if (!ok) continue;
        int k = oracle::num_blocks(l);
        std::vector<int> parent(k);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
        for (int p = 0; p < 2 * n; p += 2) parent[find(l[p])] = find(l[p + 1]);
        std::set<int> roots;
        for (int b = 0; b < k; ++b) roots.insert(find(b));
        if (roots.size() == 1) out.insert(oracle::canon(l));
    }
    return out;
}

long long prime_oracle_mismatches() {
    long long bad = 0;
    for (int n = 1; n <= kPrimeOracleMaxN; ++n)
        for (Side side : {Side::L, Side::R}) {
            std::set<Labels> got;
            for (const auto& p : enumerate_bnc_prime(side, n)) got.insert(oracle::labels_of(p));
            if (got != brute_prime(side, n)) ++bad;
        }
    return bad;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

std::string describe(const CheckResult& c) {
    std::string s = c.name + " residual " + fmt(c.residual) + " tol " + fmt(c.tolerance) + " " + fmt(c.wall_time) + "s";
    if (!c.error.empty()) s += " error: " + c.error;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    std::string path = argc > 1 ? argv[1] : BIFREE_GOLDEN_CONFIG;
    std::ifstream in(path);
    if (!in) {
        std::fprintf(stderr, "acceptance: cannot open %s\n", path.c_str());
        return 2;
    }
    ExperimentConfig cfg = ExperimentConfig::from_json(nlohmann::json::parse(in));
    cfg.jobs = 1;

    auto t0 = Clock::now();
    SuiteReport first = run_suite(cfg);
    double suite_seconds = seconds_since(t0);
    SuiteReport second = run_suite(cfg);

    std::map<std::string, CheckResult> by_name;
    for (const auto& c : first.checks) by_name[c.name] = c;
    auto suite_line = [&](int criterion, const std::string& title, std::vector<std::string> names, double limit = 0) {
        Line l{criterion, title, true, ""};
        for (const auto& n : names) {
            const CheckResult& c = by_name.at(n);
            l.pass = l.pass && c.pass && c.error.empty() && (limit <= 0 || c.wall_time <= limit);
            l.detail += (l.detail.empty() ? "" : "; ") + describe(c);
        }
        return l;
    };

    std::vector<Line> lines;

    auto t1 = Clock::now();
    auto [mu_bad, mu_pairs] = mobius_oracle_mismatches();
    double mu_seconds = seconds_since(t1);
    Line lattice = suite_line(1, "lattice counts, Moebius sums, fast vs recursive mu", {"mobius"});
    double lattice_seconds = by_name.at("mobius").wall_time + mu_seconds;
    lattice.pass = lattice.pass && mu_bad == 0 && lattice_seconds <= kLatticeSeconds;
    lattice.detail += "; oracle pairs " + std::to_string(mu_pairs) + " mismatches " + std::to_string(mu_bad) +
                      " total " + fmt(lattice_seconds) + "s";
    lines.push_back(lattice);

    auto t2 = Clock::now();
    long long prime_bad = prime_oracle_mismatches();
    double prime_seconds = seconds_since(t2);
    Line prime = suite_line(2, "pinched family equals brute-force filter", {"bnc-prime"});
    prime.pass = prime.pass && prime_bad == 0 && prime_seconds + by_name.at("bnc-prime").wall_time <= kPrimeSeconds;
    prime.detail += "; oracle mismatches " + std::to_string(prime_bad) + " " + fmt(prime_seconds) + "s";
    lines.push_back(prime);

    lines.push_back(suite_line(3, "moment-cumulant round trip", {"round-trip"}, kRoundTripSeconds));
    lines.push_back(suite_line(4, "vanishing with a B-multiplier entry", {"vanishing"}));
    lines.push_back(suite_line(5, "cumulants of products", {"products"}));
    lines.push_back(suite_line(6, "bi-freeness and its negative control", {"bifree", "bifree-control"}));
    lines.push_back(suite_line(7, "R-cyclic and bi-free over the diagonal", {"rcyclic", "overD", "rcyclic-control"}));
    lines.push_back(suite_line(8, "matrix vs entrywise cumulants", {"diagonal-formula"}));
    lines.push_back(suite_line(9, "relations between moment and cumulant series", {"relations"}));
    lines.push_back(suite_line(10, "R-transform, additivity, degeneration", {"r-transform"}));
    lines.push_back(suite_line(11, "S-transform definitions, lemmata, free case", {"s-transform"}));
    lines.push_back(suite_line(12, "T-transform property and its splits", {"t-property"}));
    lines.push_back(suite_line(13, "S-transform property and its splits", {"s-property"}));
    lines.push_back(suite_line(14, "residuals non-increasing in the order", {"convergence"}));

    bool same = first.dump() == second.dump();
    lines.push_back({15, "golden suite byte-identical across runs", same,
                     std::to_string(first.dump().size()) + " bytes, suite " + fmt(suite_seconds) + "s"});

    bool all = suite_seconds <= kSuiteSeconds;
    for (const auto& l : lines) {
        std::printf("criterion %2d %s  %s  [%s]\n", l.criterion, l.pass ? "PASS" : "FAIL", l.title.c_str(),
                    l.detail.c_str());
        all = all && l.pass;
    }
    std::printf("acceptance %s\n", all ? "PASS" : "FAIL");
    return all ? 0 : 1;
}
