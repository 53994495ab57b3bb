#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bifree/fock.hpp"
#include "bifree/partitions.hpp"

namespace bifree {

// d x d matrix over A_0, row-major; zero entries are empty FockOps.
struct MatA0 {
    int d = 1;
    std::vector<FockOp> entries;

    MatA0() = default;
    explicit MatA0(int d_) : d(d_), entries(static_cast<size_t>(d_ * d_)) {}
    FockOp& at(int i, int j) { return entries[static_cast<size_t>(i * d + j)]; }
    const FockOp& at(int i, int j) const { return entries[static_cast<size_t>(i * d + j)]; }
    static MatA0 scalar(const FockOp& x) {
        MatA0 m(1);
        m.at(0, 0) = x;
        return m;
    }
    static MatA0 diagonal(const std::vector<FockOp>& xs);
    MatA0 adjoint() const;
};

// The vectors T_{ij} Omega for T in M_d(A_0); all that E_d needs.
struct State {
    int d = 1;
    std::vector<FockVec> v;  // row-major

    static State identity(int d);
    FockVec& at(int i, int j) { return v[static_cast<size_t>(i * d + j)]; }
    const FockVec& at(int i, int j) const { return v[static_cast<size_t>(i * d + j)]; }
    BMatrix vacuum() const;
    State operator+(const State& o) const;
    State scaled(cd s) const;
};

enum class AtomKind { LeftMul, RightMul, LeftB, RightB };

// L(Z), R(Z), L_b or R_b.
struct Atom {
    AtomKind kind;
    std::shared_ptr<const MatA0> z;
    BMatrix b;
};

State apply_atom(const Atom& a, const State& s);

// Element of L(M_d(A_0)): linear combination of words in L(Z), R(Z), L_b, R_b.
class OpElement {
public:
    struct Term {
        cd coef;
        std::vector<std::shared_ptr<const Atom>> atoms;  // composition order: the last atom acts first
    };

    OpElement() = default;
    explicit OpElement(int d) : d_(d) {}
    static OpElement zero(int d) { return OpElement(d); }
    static OpElement identity(int d);
    static OpElement Lb(const BMatrix& b);
    static OpElement Rb(const BMatrix& b);
    static OpElement L(const MatA0& z);
    static OpElement R(const MatA0& z);

    int d() const { return d_; }
    bool is_zero() const { return terms_.empty(); }
    const std::vector<Term>& terms() const { return terms_; }

    OpElement operator+(const OpElement& o) const;
    OpElement operator-(const OpElement& o) const { return *this + o * cd(-1.0); }
    OpElement operator*(const OpElement& o) const;  // composition: (x*y)(T) = x(y(T))
    OpElement operator*(cd s) const;

    State apply(const State& s) const;

private:
    int d_ = 1;
    std::vector<Term> terms_;
};

// E_d(x) = phi_d(x(I_d)).
BMatrix expectation(const OpElement& x);

// x + L_b (side L) or x + R_b (side R).
OpElement shift(const OpElement& x, const BMatrix& b, Side side);

// Random probe state with a few entries on short words over the given generators.
State random_state(std::mt19937_64& rng, int d, int k, int max_len);
double state_distance(const State& a, const State& b);

struct TwoFacedFamily {
    std::string name;
    int d = 1;
    std::vector<std::pair<std::string, OpElement>> left;
    std::vector<std::pair<std::string, OpElement>> right;
};

struct FamilyProbeReport {
    double left_commutation = 0;   // max || Z R_b - R_b Z || over left Z
    double right_commutation = 0;  // max || Z L_b - L_b Z || over right Z
    double bimodule = 0;           // max || E(L_b1 R_b2 Z) - b1 E(Z) b2 ||
    double lr_agreement = 0;       // max || E(Z L_b) - E(Z R_b) ||
    bool ok(double tol) const {
        return left_commutation <= tol && right_commutation <= tol && bimodule <= tol && lr_agreement <= tol;
    }
};

FamilyProbeReport probe_family(const TwoFacedFamily& fam, std::mt19937_64& rng, int k, int draws = 3);

}  // namespace bifree
