#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bifree/mobius.hpp"
#include "bifree/operators.hpp"

namespace bifree {

// One slot of a tuple: C_pre * op * C_post with C = L on left slots and R on right slots.
// A nonnegative symbol replaces op for specified (cumulant-defined) families.
struct DecoratedEntry {
    OpElement op;
    BMatrix pre;
    BMatrix post;
    int symbol = -1;
};

struct DecoratedTuple {
    ChiShape shape;
    std::vector<DecoratedEntry> entries;
    int d() const;
    DecoratedTuple sub(const std::vector<int>& positions) const;
};

DecoratedEntry plain_entry(const OpElement& op);
DecoratedEntry decorated_entry(const OpElement& op, const BMatrix& pre, const BMatrix& post);
DecoratedTuple make_tuple(const ChiShape& shape, const std::vector<OpElement>& ops);

// Interval-extraction order for bi-multiplicative reduction.
enum class Schedule {
    SmallestMin,         // interval block with smallest chi-minimum, spliced onto its chi-predecessor
    LargestMin,          // interval block with largest chi-minimum, spliced onto its chi-predecessor
    SmallestMinForward,  // smallest chi-minimum, spliced onto its chi-successor whenever one exists
};

using Leaf = std::function<BMatrix(const DecoratedTuple&)>;

// E(product of realized entries in index order), optionally followed by a map (e.g. F).
BMatrix eval_moment_full(const DecoratedTuple& t);

// Value of the bi-multiplicative extension of leaf at pi.
BMatrix reduce_bimultiplicative(const BncPartition& pi, const DecoratedTuple& t, const Leaf& leaf,
                                Schedule schedule = Schedule::SmallestMin);

// Engine: which full-moment functional to use and optional post-map on expectations.
struct MomentEngine {
    Leaf full_moment = eval_moment_full;
    std::function<BMatrix(const BMatrix&)> post_map;  // e.g. F for D-valued cumulants; empty = identity
    Schedule schedule = Schedule::SmallestMin;
    bool scalar_fast_path = true;  // d = 1: factor decorations, cache subset moments

    BMatrix full(const DecoratedTuple& t) const;
};

BMatrix eval_moment_pi(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng = {});
// Full cumulant kappa_{1_chi} by the Moebius sum over BNC(chi).
BMatrix eval_cumulant_full(const DecoratedTuple& t, const MomentEngine& eng = {});
// kappa_pi = sum_{sigma <= pi} E_sigma mu(sigma, pi).
BMatrix eval_cumulant_pi(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng = {});
// kappa_pi by bi-multiplicative reduction with full-cumulant leaves.
BMatrix eval_cumulant_pi_reduced(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng = {});
// E_sigma = sum_{pi <= sigma} kappa_pi.
BMatrix moments_from_cumulants(const BncPartition& sigma, const DecoratedTuple& t, const MomentEngine& eng = {});

struct ProductsResult {
    BMatrix lhs;
    BMatrix rhs;
    double difference;
};
// kappa on grouped products versus the sum over sigma with sigma v 0hat = 1.
ProductsResult cumulant_of_products(const HatEmbedding& emb, const DecoratedTuple& inner, const MomentEngine& eng = {});

// Scalar moment phi(a_1 ... a_k) of Fock elements.
cd scalar_moment(const std::vector<const FockOp*>& ops);
// Scalar bi-free cumulant of Fock elements on a shape, by subset moments.
cd scalar_cumulant(const ChiShape& shape, const std::vector<const FockOp*>& ops);
// Same, with an arbitrary subset-moment oracle (mask over positions -> moment).
cd scalar_cumulant_from_moments(const ChiShape& shape, const std::function<cd(unsigned)>& moment);

// Generators indexed by I (left) and J (right) for kappa_{Z, omega}.
struct GeneratorSet {
    int d = 1;
    std::vector<std::pair<std::string, OpElement>> gens;
    std::vector<Side> sides;
    int size() const { return static_cast<int>(gens.size()); }
    static GeneratorSet from_family(const TwoFacedFamily& fam);
};

// Tuple per the one-B-between-adjacent-terms convention with the k0 slot rule.
DecoratedTuple kappa_Z_omega_tuple(const GeneratorSet& z, const std::vector<int>& omega, const std::vector<BMatrix>& bs);
BMatrix kappa_Z_omega(const GeneratorSet& z, const std::vector<int>& omega, const std::vector<BMatrix>& bs,
                      const MomentEngine& eng = {});

struct LemmaCheck {
    double residual = 0;
    double hypothesis_residual = 0;
    bool hypothesis_ok = true;
};
// kappa_chi(..., X, Y, ...) versus kappa_chi'(..., Y, X, ...) at slots k0, k0+1.
LemmaCheck verify_interchange(const DecoratedTuple& t, int k0, std::mt19937_64& rng, double hyp_tol = 1e-10,
                              const MomentEngine& eng = {});
// kappa_chi(..., X) versus kappa_chi'(..., Y) with Y replacing the final left slot as a right slot.
LemmaCheck verify_tail_swap(const DecoratedTuple& t, const OpElement& y, std::mt19937_64& rng, double hyp_tol = 1e-10,
                            const MomentEngine& eng = {});

// Cumulant specification: kappa of a tuple of symbols, written in the free order as
// pre_{first} * theta(omega, shape, between) * post_{last}, where between[k] sits
// between the k-th and (k+1)-th slots in chi-order.
struct CumulantSpec {
    int d = 1;
    std::vector<Side> sides;  // side of each symbol
    std::vector<std::string> names;
    int max_order = 4;
    std::function<BMatrix(const std::vector<int>& omega, const ChiShape& shape, const std::vector<BMatrix>& between)> theta;
};

class SpecifiedFamily {
public:
    explicit SpecifiedFamily(CumulantSpec spec);
    const CumulantSpec& spec() const { return spec_; }
    // Leaf returning the specified cumulant of a decorated symbol tuple.
    BMatrix kappa_leaf(const DecoratedTuple& t) const;
    // Full moment as the sum over BNC of reduced spec cumulants.
    BMatrix moment(const DecoratedTuple& t) const;
    MomentEngine engine() const;
    DecoratedTuple tuple(const std::vector<int>& symbols, const std::vector<BMatrix>& pre,
                         const std::vector<BMatrix>& post) const;
    // Multilinearity probe of theta on random directions; returns max residual.
    double multilinearity_probe(std::mt19937_64& rng, int order) const;

private:
    CumulantSpec spec_;
};

}  // namespace bifree
