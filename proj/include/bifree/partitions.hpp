#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace bifree {

enum class Side { L, R };

struct BoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PartitionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Map {0..n-1} -> {L, R}. Positions are 0-based internally, 1-based in I/O.
class ChiShape {
public:
    ChiShape() = default;
    explicit ChiShape(std::vector<Side> tags);
    static ChiShape from_string(const std::string& s);  // "llrlr"
    static ChiShape nm(int n, int m);                    // l^n r^m
    static ChiShape all(Side side, int n);

    int size() const { return static_cast<int>(tags_.size()); }
    Side tag(int p) const { return tags_[p]; }
    const std::vector<Side>& tags() const { return tags_; }
    // s[q] = position at rank q in the order induced by s_chi.
    const std::vector<int>& s() const { return s_; }
    // rank[p] = q with s[q] = p.
    const std::vector<int>& rank() const { return rank_; }
    bool precedes(int p, int q) const { return rank_[p] < rank_[q]; }
    std::string str() const;
    // Paper-style label of position p: "3" for general shapes, "2l"/"1r" for chi_{n,m}.
    std::string label(int p) const;
    ChiShape restrict(const std::vector<int>& positions) const;
    bool operator==(const ChiShape& o) const { return tags_ == o.tags_; }

private:
    std::vector<Side> tags_;
    std::vector<int> s_;
    std::vector<int> rank_;
};

using Blocks = std::vector<std::vector<int>>;

// Non-crossing test in the standard order for a block-label array.
bool is_noncrossing_labels(const std::vector<int>& labels);
// Block-label array from blocks on {0..n-1}; throws PartitionError if not a partition.
std::vector<int> labels_from_blocks(int n, const Blocks& blocks);

class BncPartition {
public:
    BncPartition() = default;
    // Validates cover, disjointness and bi-non-crossing property.
    BncPartition(ChiShape shape, const Blocks& blocks);

    static BncPartition zero(const ChiShape& shape);
    static BncPartition one(const ChiShape& shape);

    const ChiShape& shape() const { return shape_; }
    int size() const { return shape_.size(); }
    int num_blocks() const { return static_cast<int>(blocks_.size()); }
    // Blocks sorted by chi-order, blocks ordered by chi-minimum.
    const Blocks& blocks() const { return blocks_; }
    int block_of(int p) const { return label_[p]; }
    const std::vector<int>& labels() const { return label_; }
    // s_chi^{-1} . pi, as labels indexed by rank.
    std::vector<int> pulled_back_labels() const;
    std::string str() const;  // "{1,4},{2,5},{3,6}" in 1-based positions
    bool operator==(const BncPartition& o) const { return shape_ == o.shape_ && blocks_ == o.blocks_; }
    bool operator<(const BncPartition& o) const { return blocks_ < o.blocks_; }

private:
    ChiShape shape_;
    Blocks blocks_;
    std::vector<int> label_;
};

bool is_bnc(const ChiShape& shape, const Blocks& blocks);

// Non-crossing partitions of {0..n-1} as block lists (blocks ascending).
std::vector<Blocks> enumerate_nc(int n);

struct EnumerationConfig {
    int bound = 12;
};

std::vector<BncPartition> enumerate_bnc(const ChiShape& shape, const EnumerationConfig& cfg = {});

bool refines(const BncPartition& pi, const BncPartition& sigma);
BncPartition join(const BncPartition& pi, const BncPartition& sigma);
BncPartition meet(const BncPartition& pi, const BncPartition& sigma);

// Kreweras complement of a non-crossing partition of {0..n-1}.
Blocks kreweras(int n, const Blocks& pi);

// Partitions of 2n points with pi v sigma_n = 1, {1} a block, no even/odd mixing.
std::vector<BncPartition> enumerate_bnc_prime(Side side, int n);

enum class TClass { All, E, O, OPrime };
enum class SClass { All, E, O, OPrime, O0, OR, OL, OLR };

std::vector<BncPartition> enumerate_bnc_vs(const ChiShape& shape, const EnumerationConfig& cfg = {});
// All / E / O live on chi_{n,2m}; OPrime on chi_{n,2m+1}.
std::vector<BncPartition> enumerate_bnc_T(int n, int m, TClass cls, const EnumerationConfig& cfg = {});
// All / E / O live on chi_{2n,2m}; OPrime and its four subclasses on chi_{2n+1,2m+1}.
std::vector<BncPartition> enumerate_bnc_S(int n, int m, SClass cls, const EnumerationConfig& cfg = {});

TClass parse_tclass(const std::string& s);
SClass parse_sclass(const std::string& s);

class HatEmbedding {
public:
    HatEmbedding(ChiShape outer, std::vector<int> cuts);
    const ChiShape& outer() const { return outer_; }
    const ChiShape& inner() const { return inner_; }
    const std::vector<int>& cuts() const { return cuts_; }
    // Inner positions belonging to outer position p.
    std::vector<int> group(int p) const;
    BncPartition embed(const BncPartition& pi) const;
    BncPartition zero_hat() const { return embed(BncPartition::zero(outer_)); }

private:
    ChiShape outer_;
    std::vector<int> cuts_;
    ChiShape inner_;
};

long long catalan(int n);

}  // namespace bifree
