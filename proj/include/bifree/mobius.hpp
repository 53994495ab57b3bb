#pragma once

#include <cstdint>
#include <vector>

#include "bifree/partitions.hpp"

namespace bifree {

struct OverflowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using MobiusValue = std::int64_t;

// mu_BNC(pi, sigma); zero unless pi refines sigma.
MobiusValue mobius(const BncPartition& pi, const BncPartition& sigma);

// Same as mobius() on block-label arrays over a common shape.
MobiusValue mobius_labels(const ChiShape& shape, const std::vector<int>& pi, const std::vector<int>& sigma);

// All tau in BNC(chi) with tau <= pi, built blockwise.
std::vector<BncPartition> partitions_below(const BncPartition& pi);

// Row and column sums of mu vanish off the diagonal on every interval below sigma.
bool mobius_column_sum_check(const BncPartition& sigma);

}  // namespace bifree
