#pragma once
// Independent reference implementations used only by tests.

#include <algorithm>
#include <functional>
#include <map>
#include <vector>

#include "bifree/partitions.hpp"

namespace oracle {

using Labels = std::vector<int>;

// All set partitions of {0..n-1} as restricted growth strings.
inline std::vector<Labels> all_set_partitions(int n) {
    std::vector<Labels> out;
    Labels cur(n, 0);
    std::function<void(int, int)> rec = [&](int i, int maxl) {
        if (i == n) {
            out.push_back(cur);
            return;
        }
        for (int l = 0; l <= maxl + 1; ++l) {
            cur[i] = l;
            rec(i + 1, std::max(maxl, l));
        }
    };
    if (n == 0) return {Labels{}};
    cur[0] = 0;
    rec(1, 0);
    return out;
}

// a<b<c<d (in the given order of positions) with a~c, b~d, a!~b.
inline bool crosses_in_order(const Labels& lab, const std::vector<int>& order) {
    int n = static_cast<int>(order.size());
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c)
                for (int d = c + 1; d < n; ++d) {
                    int la = lab[order[a]], lb = lab[order[b]], lc = lab[order[c]], ld = lab[order[d]];
                    if (la == lc && lb == ld && la != lb) return true;
                }
    return false;
}

// Order induced by the shape: lefts ascending, then rights descending.
inline std::vector<int> chi_order(const std::vector<bifree::Side>& tags) {
    std::vector<int> o;
    int n = static_cast<int>(tags.size());
    for (int p = 0; p < n; ++p)
        if (tags[p] == bifree::Side::L) o.push_back(p);
    for (int p = n - 1; p >= 0; --p)
        if (tags[p] == bifree::Side::R) o.push_back(p);
    return o;
}

inline std::vector<Labels> brute_bnc(const std::vector<bifree::Side>& tags) {
    auto order = chi_order(tags);
    std::vector<Labels> out;
    for (auto& l : all_set_partitions(static_cast<int>(tags.size())))
        if (!crosses_in_order(l, order)) out.push_back(l);
    return out;
}

inline bool leq(const Labels& a, const Labels& b) {
    std::map<int, int> img;
    for (size_t p = 0; p < a.size(); ++p) {
        auto it = img.find(a[p]);
        if (it == img.end()) img[a[p]] = b[p];
        else if (it->second != b[p]) return false;
    }
    return true;
}

inline Labels canon(const Labels& l) {
    std::map<int, int> re;
    Labels out;
    for (int x : l) {
        if (!re.count(x)) {
            int next = static_cast<int>(re.size());
            re[x] = next;
        }
        out.push_back(re[x]);
    }
    return out;
}

inline Labels labels_of(const bifree::BncPartition& p) { return canon(p.labels()); }

inline int num_blocks(const Labels& l) { return l.empty() ? 0 : *std::max_element(l.begin(), l.end()) + 1; }

// Moebius function by the recursive definition over an explicit poset.
inline long long mobius_recursive(const std::vector<Labels>& poset, const Labels& x, const Labels& y) {
    if (!leq(x, y)) return 0;
    std::map<Labels, long long> mu;
    // mu(x, z) for x <= z <= y, in order of increasing block refinement (fewer blocks later)
    std::vector<Labels> interval;
    for (const auto& z : poset)
        if (leq(x, z) && leq(z, y)) interval.push_back(z);
    std::sort(interval.begin(), interval.end(), [](const Labels& a, const Labels& b) { return num_blocks(a) > num_blocks(b); });
    for (const auto& z : interval) {
        if (z == x) {
            mu[z] = 1;
            continue;
        }
        long long s = 0;
        for (const auto& w : interval)
            if (w != z && leq(w, z)) s += mu[w];
        mu[z] = -s;
    }
    return mu[y];
}

}  // namespace oracle
