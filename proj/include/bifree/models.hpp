#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifree/cumulants.hpp"
#include "bifree/operators.hpp"

namespace bifree {

// l*(g) + sum_k a_k l(g)^k on the left, or the same with r, r* on the right.
FockOp polynomial_element(int depth, int gen, const std::vector<cd>& coeffs, Side side);

struct ScalarPairSpec {
    std::vector<cd> left = {0.0, 1.0};   // X = l*(g) + a0 + a1 l(g) + ...
    std::vector<cd> right = {0.0, 1.0};  // Y = r*(g) + b0 + b1 r(g) + ...
};

// Pair p uses generator p+1 (d = 1). shared = true puts every pair on generator 1.
std::vector<TwoFacedFamily> scalar_pairs(int depth, const std::vector<ScalarPairSpec>& specs, bool shared = false);

// Matrices of Fock operators, realized on B = M_d via L(.) on the left and R(.) on the right.
struct MatrixPair {
    int d = 1;
    std::vector<std::string> names;
    std::vector<Side> sides;
    std::vector<MatA0> mats;

    int size() const { return static_cast<int>(mats.size()); }
    OpElement realize(int w) const { return sides[w] == Side::L ? OpElement::L(mats[w]) : OpElement::R(mats[w]); }
    TwoFacedFamily family(const std::string& name) const;
};

// Lifts of scalar pairs: entry (i,j) of pair p's matrices is a polynomial on its own generator.
// With diagonal = true the matrices are diag(X_1..X_d), diag(Y_1..Y_d) on generators 1..d.
std::vector<TwoFacedFamily> matrix_lift_pairs(int d, int depth, int pairs, std::mt19937_64& rng);
MatrixPair diagonal_pair(int depth, const std::vector<ScalarPairSpec>& specs);

// ([l(h_{k;i,j})], [l*(h_{k;j,i})]) on the left, ([r(h_{k;i,j})], [r*(h_{k;j,i})]) on the right, k = 1..K.
// perturb adds l(h_{1;1,1}) at entry (1,2) of the first left matrix.
MatrixPair creation_example(int d, int K, int depth, bool perturb = false);

// Scalar-valued entry source for R-cyclic checks: kappa^C over entries (matrix w, i, j).
struct EntryRef {
    int w, i, j;
};

class EntrySource {
public:
    virtual ~EntrySource() = default;
    virtual int d() const = 0;
    virtual int size() const = 0;
    virtual Side side(int w) const = 0;
    virtual std::string name(int w) const = 0;
    virtual bool is_zero(const EntryRef& e) const = 0;
    // Homogeneous charge per generator, if every term of the entry has the same one.
    virtual bool charge(const EntryRef& e, std::vector<int>& out) const = 0;
    virtual cd kappa(const std::vector<EntryRef>& entries) const = 0;
};

class FockEntrySource : public EntrySource {
public:
    explicit FockEntrySource(MatrixPair pair);
    int d() const override { return pair_.d; }
    int size() const override { return pair_.size(); }
    Side side(int w) const override { return pair_.sides[w]; }
    std::string name(int w) const override { return pair_.names[w]; }
    bool is_zero(const EntryRef& e) const override;
    bool charge(const EntryRef& e, std::vector<int>& out) const override;
    cd kappa(const std::vector<EntryRef>& entries) const override;
    const MatrixPair& pair() const { return pair_; }

private:
    MatrixPair pair_;
};

// Entries are linear combinations of symbols of a scalar specified family.
class SymbolEntrySource : public EntrySource {
public:
    using Combination = std::vector<std::pair<int, cd>>;
    SymbolEntrySource(std::shared_ptr<const SpecifiedFamily> fam, int d, std::vector<std::string> names,
                      std::vector<Side> sides, std::vector<std::vector<Combination>> entries);
    int d() const override { return d_; }
    int size() const override { return static_cast<int>(names_.size()); }
    Side side(int w) const override { return sides_[w]; }
    std::string name(int w) const override { return names_[w]; }
    bool is_zero(const EntryRef& e) const override { return at(e).empty(); }
    bool charge(const EntryRef&, std::vector<int>&) const override { return false; }
    cd kappa(const std::vector<EntryRef>& entries) const override;

private:
    const Combination& at(const EntryRef& e) const { return entries_[e.w][e.i * d_ + e.j]; }
    std::shared_ptr<const SpecifiedFamily> fam_;
    int d_;
    std::vector<std::string> names_;
    std::vector<Side> sides_;
    std::vector<std::vector<Combination>> entries_;
};

// Symbols X, X*, Y, Y* (left, left, right, right) with the R-diagonal cumulant pattern:
// only even orders whose s_chi-reading alternates starred and unstarred terms with all
// X-terms before all Y-terms; such cumulants equal weight^n.
CumulantSpec r_diagonal_spec(int max_order, double weight = 0.5);
// [[0, X], [X*, 0]] on the left and [[0, Y], [Y*, 0]] on the right.
std::unique_ptr<SymbolEntrySource> r_diagonal_pair(int max_order, double weight = 0.5);
// Bi-free central limit specification on symbols s_1..s_k (left) and t_1..t_k (right):
// only second-order cumulants, given by the covariance c between any two symbols.
CumulantSpec central_limit_spec(const std::vector<std::vector<cd>>& covariance, int nl);

// X + L_c (left) or Y + R_c (right) with c = I + scale * (random Hermitian).
BMatrix invertible_mean(std::mt19937_64& rng, int d, double scale = 0.1);

// Pair p on generator p+1: X = L(Z) + L_a, Y = R(W) + R_e, where entries of Z (W) are
// scale * w * (l*(g) + t l(g)) (resp. r, r*) and a, e are invertible means.
std::vector<TwoFacedFamily> shifted_pairs(int d, int depth, int pairs, double scale, double shift,
                                          std::mt19937_64& rng);

// Models described by JSON for the CLI and reports.
struct ModelSpec {
    std::string kind = "scalar_pairs";  // scalar_pairs | shared_generator | matrix_lift | creation | creation_perturbed | diagonal | r_diagonal | shifted_pairs
    int d = 2;
    int depth = 6;
    int pairs = 2;
    int K = 2;
    std::uint64_t seed = 7;
    double scale = 0.3;  // shifted_pairs only
    double shift = 0.1;  // shifted_pairs only
    std::vector<ScalarPairSpec> specs;

    static ModelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

std::vector<TwoFacedFamily> build_families(const ModelSpec& m);
std::unique_ptr<EntrySource> build_entry_source(const ModelSpec& m);

}  // namespace bifree
