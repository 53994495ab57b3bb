#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bifree/matrix.hpp"

namespace bifree {

struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Truncated full Fock space over span{h_1..h_k}; basis = words of length <= depth.
// Words are packed 4 bits per letter, first letter in the lowest nibble; Omega = 0.
struct FockSpace {
    int k = 1;
    int depth = 8;
    static constexpr int max_generators = 15;
    static constexpr int max_depth = 15;

    FockSpace() = default;
    FockSpace(int k_, int depth_);
    // sum_{j <= depth} k^j
    double dimension() const;
};

enum class LetterKind : std::uint8_t { L = 0, LStar = 1, R = 2, RStar = 3 };

struct Letter {
    LetterKind kind;
    std::uint8_t gen;  // 1-based generator index
    bool operator==(const Letter& o) const { return kind == o.kind && gen == o.gen; }
    bool operator<(const Letter& o) const { return kind != o.kind ? kind < o.kind : gen < o.gen; }
};

// Sparse vector, sorted by word code, no duplicate codes.
using FockVec = std::vector<std::pair<std::uint64_t, cd>>;

FockVec vacuum_vector();
cd vacuum_coefficient(const FockVec& v);
// Sort by code, merge duplicates, drop exact zeros.
void fock_normalize(FockVec& v);
FockVec fock_combine(const std::vector<std::pair<cd, const FockVec*>>& parts);
double fock_norm_inf(const FockVec& v);

int word_length(std::uint64_t code);
std::string word_string(std::uint64_t code);

// Element of A_0: a finite sum of coefficient * (product of letters).
class FockOp {
public:
    struct Term {
        cd coef;
        std::vector<Letter> letters;  // product order: the last letter acts first
    };

    FockOp() = default;
    explicit FockOp(int depth) : depth_(depth) {}
    static FockOp identity(int depth);
    static FockOp letter(int depth, LetterKind kind, int gen);
    static FockOp l(int depth, int gen) { return letter(depth, LetterKind::L, gen); }
    static FockOp lstar(int depth, int gen) { return letter(depth, LetterKind::LStar, gen); }
    static FockOp r(int depth, int gen) { return letter(depth, LetterKind::R, gen); }
    static FockOp rstar(int depth, int gen) { return letter(depth, LetterKind::RStar, gen); }

    bool is_zero() const { return terms_.empty(); }
    int depth() const { return depth_; }
    const std::vector<Term>& terms() const { return terms_; }
    // Largest word length of a term.
    int degree() const;

    FockOp operator+(const FockOp& o) const;
    FockOp operator-(const FockOp& o) const { return *this + o * cd(-1.0); }
    FockOp operator*(const FockOp& o) const;
    FockOp operator*(cd s) const;
    FockOp adjoint() const;

    FockVec apply(const FockVec& v) const;
    // <Omega, T Omega>
    cd vacuum_expectation() const { return vacuum_coefficient(apply(vacuum_vector())); }
    std::string str() const;

private:
    void simplify();
    int depth_ = 8;
    std::vector<Term> terms_;
};

// Apply a single product of letters (last acts first) to v, scaled, appending to out.
void apply_letters(const std::vector<Letter>& letters, int depth, cd coef, const FockVec& v, FockVec& out);

}  // namespace bifree
