#include "bifree/mobius.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace bifree {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("mobius value overflow");
    return r;
}

// Memo keyed by the sorted multiset of Kreweras block sizes.
MobiusValue factor_value(std::vector<int> sizes) {
    static std::mutex mu;
    static std::map<std::vector<int>, MobiusValue> memo;
    std::sort(sizes.begin(), sizes.end());
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = memo.find(sizes);
        if (it != memo.end()) return it->second;
    }
    MobiusValue v = 1;
    for (int s : sizes) {
        MobiusValue c = catalan(s - 1);
        v = checked_mul(v, (s - 1) % 2 ? -c : c);
    }
    std::lock_guard<std::mutex> lock(mu);
    memo.emplace(sizes, v);
    return v;
}

}  // namespace

MobiusValue mobius_labels(const ChiShape& shape, const std::vector<int>& pi, const std::vector<int>& sigma) {
    int n = shape.size();
    // refinement check
    std::vector<int> target(n, -1);
    for (int p = 0; p < n; ++p) {
        int& t = target[pi[p]];
        if (t < 0) t = sigma[p];
        else if (t != sigma[p]) return 0;
    }
    // interval [pi, sigma] factors over blocks of sigma; each factor is
    // mu_NC(pi|V, 1_V), a product over Kreweras blocks of signed Catalans
    std::vector<int> sizes;
    std::map<int, std::vector<int>> by_block;  // sigma block -> ranks in order
    for (int q = 0; q < n; ++q) by_block[sigma[shape.s()[q]]].push_back(q);
    for (const auto& [blk, ranks] : by_block) {
        int k = static_cast<int>(ranks.size());
        std::map<int, std::vector<int>> sub;
        for (int i = 0; i < k; ++i) sub[pi[shape.s()[ranks[i]]]].push_back(i);
        Blocks restricted;
        for (auto& [_, b] : sub) restricted.push_back(b);
        for (const auto& w : kreweras(k, restricted)) sizes.push_back(static_cast<int>(w.size()));
    }
    return factor_value(std::move(sizes));
}

MobiusValue mobius(const BncPartition& pi, const BncPartition& sigma) {
    if (!(pi.shape() == sigma.shape())) throw PartitionError("mobius: shape mismatch");
    return mobius_labels(pi.shape(), pi.labels(), sigma.labels());
}

std::vector<BncPartition> partitions_below(const BncPartition& pi) {
    const ChiShape& shape = pi.shape();
    std::vector<Blocks> acc{{}};
    for (const auto& block : pi.blocks()) {
        std::vector<int> sorted = block;
        std::sort(sorted.begin(), sorted.end());
        ChiShape sub = shape.restrict(sorted);
        std::vector<Blocks> next;
        auto subs = enumerate_bnc(sub, EnumerationConfig{64});
        for (const auto& partial : acc)
            for (const auto& tau : subs) {
                Blocks b = partial;
                for (const auto& tb : tau.blocks()) {
                    std::vector<int> mapped;
                    for (int i : tb) mapped.push_back(sorted[i]);
                    b.push_back(std::move(mapped));
                }
                next.push_back(std::move(b));
            }
        acc = std::move(next);
    }
    std::vector<BncPartition> out;
    out.reserve(acc.size());
    for (const auto& b : acc) out.emplace_back(shape, b);
    return out;
}

bool mobius_column_sum_check(const BncPartition& sigma) {
    auto below = partitions_below(sigma);
    for (const auto& pi : below) {
        MobiusValue col = 0, row = 0;
        for (const auto& tau : below) {
            if (!refines(pi, tau)) continue;
            col += mobius(tau, sigma);
            row += mobius(pi, tau);
        }
        MobiusValue want = (pi == sigma) ? 1 : 0;
        if (col != want || row != want) return false;
    }
    return true;
}

}  // namespace bifree
