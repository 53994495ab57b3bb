#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifree/cumulants.hpp"
#include "bifree/models.hpp"

namespace bifree {

struct CheckOptions {
    int max_order = 4;
    double tol = 1e-9;
    std::uint64_t seed = 7;
    int draws = 3;  // B-argument draws per slot pattern; the first is undecorated
    double scale = 0.5;
};

struct Witness {
    std::string where;  // shape, family word, generators, indices
    double residual = 0;
};

// Keeps the largest residuals seen.
class WitnessList {
public:
    explicit WitnessList(size_t cap = 8) : cap_(cap) {}
    void offer(double residual, const std::function<std::string()>& where);
    const std::vector<Witness>& items() const { return items_; }
    double worst() const { return items_.empty() ? 0.0 : items_.front().residual; }
    nlohmann::json to_json() const;

private:
    size_t cap_;
    std::vector<Witness> items_;
};

struct BiFreenessReport {
    int max_order = 0;
    double tol = 0;
    long evaluated = 0;
    double worst = 0;
    bool pass = true;
    std::vector<std::pair<std::string, double>> cells;  // "chi|epsilon" -> worst residual
    WitnessList witnesses;
    nlohmann::json to_json() const;
};

// Mixed cumulants of decorated generators across families, for every chi and non-constant epsilon.
BiFreenessReport check_bifree(const std::vector<TwoFacedFamily>& families, const CheckOptions& opt);

struct ConditionalExpectation {
    std::string name = "diagonal";
    std::function<BMatrix(const BMatrix&)> map = cond_expect_diag;
    // Subalgebra membership test used by the probes.
    std::function<bool(const BMatrix&)> contains = [](const BMatrix& b) { return is_diagonal(b); };
};

struct ExpectationProbe {
    double idempotence = 0;  // ||F(F(b)) - F(b)||
    double bimodule = 0;     // ||F(d1 b d2) - d1 F(b) d2||
    bool range_ok = true;    // F(b) lies in D
    int faithful_rank = 0;   // rank of b1 -> (F(b2 b1))_{b2} over matrix units b2
    int dimension = 0;       // d^2
    bool ok(double tol) const { return idempotence <= tol && bimodule <= tol && range_ok && faithful_rank == dimension; }
};
ExpectationProbe probe_expectation(const ConditionalExpectation& f, int d, std::mt19937_64& rng);

struct OverDReport {
    int max_order = 0;
    double tol = 0;
    long evaluated = 0;
    double worst_condition1 = 0;  // ||kappa(b..) - F(kappa(F(b)..))||
    double worst_condition0 = 0;  // ||kappa(b..) - kappa^D(F(b)..)||
    ExpectationProbe probe;
    bool pass = true;
    WitnessList witnesses;
    nlohmann::json to_json() const;
};

// Throws std::invalid_argument if F fails its probes.
OverDReport check_bifree_over_D(const TwoFacedFamily& fam, const CheckOptions& opt,
                                const ConditionalExpectation& f = ConditionalExpectation{});

struct RCyclicReport {
    int d = 0;
    int max_order = 0;
    double tol = 0;
    long enumerated = 0;
    long evaluated = 0;  // off-chain cumulants actually computed
    long pruned = 0;     // off-chain tuples with non-zero total charge (exactly zero)
    double worst = 0;
    bool pass = true;
    WitnessList witnesses;
    nlohmann::json to_json() const;
};

// True if the index chain closes in s_chi order.
bool chain_closes(const ChiShape& shape, const std::vector<int>& is, const std::vector<int>& js);

RCyclicReport check_r_cyclic(const EntrySource& src, const CheckOptions& opt);

struct ExpandResult {
    BMatrix matrix_level;
    BMatrix entrywise;
    double residual = 0;
};

// E_{i_{s(1)} j_{s(1)}} ... E_{i_{s(n)} j_{s(n)}}
BMatrix chi_matrix_unit_product(const ChiShape& shape, int d, const std::vector<int>& is, const std::vector<int>& js);

// kappa^{M_d}_chi(Z_{w_1}, ..., Z_{w_n}) against the entrywise expansion.
ExpandResult matrix_cumulant_expand(const MatrixPair& pair, const std::vector<int>& word);

struct DiagonalFormulaResult {
    BMatrix lhs;
    BMatrix rhs;
    double residual = 0;
    double hypothesis_residual = 0;  // largest open-chain, non-closing scalar cumulant
};

// D_d-valued cumulant of L(Lambda_k) Z L(Gamma_k) / R(Gamma_k) Z R(Lambda_k) against the closed-chain sum.
DiagonalFormulaResult diagonal_cumulant_formula(const MatrixPair& pair, const std::vector<int>& word,
                                                const std::vector<BMatrix>& lambdas, const std::vector<BMatrix>& gammas);

}  // namespace bifree
