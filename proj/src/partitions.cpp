#include "bifree/partitions.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace bifree {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

Blocks blocks_from_labels(const std::vector<int>& labels) {
    int nb = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    Blocks out(nb);
    for (int p = 0; p < static_cast<int>(labels.size()); ++p) out[labels[p]].push_back(p);
    out.erase(std::remove_if(out.begin(), out.end(), [](const auto& b) { return b.empty(); }), out.end());
    return out;
}

Blocks blocks_from_uf(UnionFind& uf, int n) {
    std::vector<int> root_label(n, -1), labels(n);
    int next = 0;
    for (int p = 0; p < n; ++p) {
        int r = uf.find(p);
        if (root_label[r] < 0) root_label[r] = next++;
        labels[p] = root_label[r];
    }
    return blocks_from_labels(labels);
}

bool has_mixed_parity(const std::vector<int>& block, const std::vector<int>& parity) {
    int seen = -1;
    for (int p : block) {
        if (parity[p] < 0) continue;
        if (seen < 0) seen = parity[p];
        else if (seen != parity[p]) return true;
    }
    return false;
}

bool joins_to_one(const BncPartition& pi, const Blocks& sigma) {
    int n = pi.size();
    UnionFind uf(n);
    for (const auto& b : pi.blocks())
        for (int p : b) uf.unite(p, b.front());
    for (const auto& b : sigma)
        for (int p : b) uf.unite(p, b.front());
    int r = uf.find(0);
    for (int p = 1; p < n; ++p)
        if (uf.find(p) != r) return false;
    return true;
}

}  // namespace

ChiShape::ChiShape(std::vector<Side> tags) : tags_(std::move(tags)) {
    int n = size();
    for (int p = 0; p < n; ++p)
        if (tags_[p] == Side::L) s_.push_back(p);
    for (int p = n - 1; p >= 0; --p)
        if (tags_[p] == Side::R) s_.push_back(p);
    rank_.assign(n, 0);
    for (int q = 0; q < n; ++q) rank_[s_[q]] = q;
}

ChiShape ChiShape::from_string(const std::string& s) {
    std::vector<Side> t;
    for (char ch : s) {
        if (ch == 'l' || ch == 'L') t.push_back(Side::L);
        else if (ch == 'r' || ch == 'R') t.push_back(Side::R);
        else throw PartitionError("shape must use only 'l' and 'r': " + s);
    }
    return ChiShape(std::move(t));
}

ChiShape ChiShape::nm(int n, int m) {
    std::vector<Side> t(n, Side::L);
    t.insert(t.end(), m, Side::R);
    return ChiShape(std::move(t));
}

ChiShape ChiShape::all(Side side, int n) { return ChiShape(std::vector<Side>(n, side)); }

std::string ChiShape::str() const {
    std::string s;
    for (Side t : tags_) s += (t == Side::L ? 'l' : 'r');
    return s;
}

std::string ChiShape::label(int p) const {
    int nl = static_cast<int>(std::count(tags_.begin(), tags_.end(), Side::L));
    bool is_nm = std::is_sorted(tags_.begin(), tags_.end(), [](Side a, Side b) { return a == Side::L && b == Side::R; });
    (void)nl;
    if (!is_nm || tags_.empty()) return std::to_string(p + 1);
    // chi_{n,m}: first n positions left
    int n = 0;
    while (n < size() && tags_[n] == Side::L) ++n;
    return p < n ? std::to_string(p + 1) + "l" : std::to_string(p - n + 1) + "r";
}

ChiShape ChiShape::restrict(const std::vector<int>& positions) const {
    std::vector<Side> t;
    t.reserve(positions.size());
    for (int p : positions) t.push_back(tags_[p]);
    return ChiShape(std::move(t));
}

bool is_noncrossing_labels(const std::vector<int>& labels) {
    int n = static_cast<int>(labels.size());
    // For consecutive elements i<j of one block, everything strictly between
    // must belong to blocks contained in (i, j).
    std::vector<int> first(n, -1), last(n, -1);
    for (int p = 0; p < n; ++p) {
        int b = labels[p];
        if (first[b] < 0) first[b] = p;
        last[b] = p;
    }
    for (int i = 0; i < n; ++i) {
        int j = i + 1;
        while (j < n && labels[j] != labels[i]) ++j;
        if (j >= n) continue;
        for (int k = i + 1; k < j; ++k) {
            int b = labels[k];
            if (first[b] < i || last[b] > j) return false;
        }
    }
    return true;
}

std::vector<int> labels_from_blocks(int n, const Blocks& blocks) {
    std::vector<int> labels(n, -1);
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) {
        if (blocks[b].empty()) throw PartitionError("empty block");
        for (int p : blocks[b]) {
            if (p < 0 || p >= n) throw PartitionError("element out of range: " + std::to_string(p + 1));
            if (labels[p] >= 0) throw PartitionError("blocks overlap at " + std::to_string(p + 1));
            labels[p] = b;
        }
    }
    for (int p = 0; p < n; ++p)
        if (labels[p] < 0) throw PartitionError("element missing from blocks: " + std::to_string(p + 1));
    return labels;
}

bool is_bnc(const ChiShape& shape, const Blocks& blocks) {
    auto labels = labels_from_blocks(shape.size(), blocks);
    std::vector<int> pulled(shape.size());
    for (int q = 0; q < shape.size(); ++q) pulled[q] = labels[shape.s()[q]];
    return is_noncrossing_labels(pulled);
}

BncPartition::BncPartition(ChiShape shape, const Blocks& blocks) : shape_(std::move(shape)) {
    if (!is_bnc(shape_, blocks)) throw PartitionError("partition is not bi-non-crossing for shape " + shape_.str());
    blocks_ = blocks;
    const auto& rk = shape_.rank();
    for (auto& b : blocks_) std::sort(b.begin(), b.end(), [&](int a, int c) { return rk[a] < rk[c]; });
    std::sort(blocks_.begin(), blocks_.end(), [&](const auto& a, const auto& c) { return rk[a.front()] < rk[c.front()]; });
    label_ = labels_from_blocks(shape_.size(), blocks_);
}

BncPartition BncPartition::zero(const ChiShape& shape) {
    Blocks b;
    for (int p = 0; p < shape.size(); ++p) b.push_back({p});
    return BncPartition(shape, b);
}

BncPartition BncPartition::one(const ChiShape& shape) {
    std::vector<int> all(shape.size());
    std::iota(all.begin(), all.end(), 0);
    return BncPartition(shape, Blocks{all});
}

std::vector<int> BncPartition::pulled_back_labels() const {
    std::vector<int> out(size());
    for (int q = 0; q < size(); ++q) out[q] = label_[shape_.s()[q]];
    return out;
}

std::string BncPartition::str() const {
    std::ostringstream os;
    for (size_t b = 0; b < blocks_.size(); ++b) {
        if (b) os << ',';
        os << '{';
        for (size_t i = 0; i < blocks_[b].size(); ++i) {
            if (i) os << ',';
            os << shape_.label(blocks_[b][i]);
        }
        os << '}';
    }
    return os.str();
}

std::vector<Blocks> enumerate_nc(int n) {
    // Interval [lo, hi): decompose on the second element j of the block of lo.
    std::vector<std::vector<std::vector<Blocks>>> memo(n + 1, std::vector<std::vector<Blocks>>(n + 1));
    std::vector<std::vector<bool>> done(n + 1, std::vector<bool>(n + 1, false));
    auto rec = [&](auto&& self, int lo, int hi) -> const std::vector<Blocks>& {
        if (done[lo][hi]) return memo[lo][hi];
        std::vector<Blocks> out;
        if (lo == hi) {
            out.push_back({});
        } else {
            for (const auto& rest : self(self, lo + 1, hi)) {
                Blocks b{{lo}};
                b.insert(b.end(), rest.begin(), rest.end());
                out.push_back(std::move(b));
            }
            for (int j = lo + 1; j < hi; ++j) {
                const auto& inner = self(self, lo + 1, j);
                const auto& outer = self(self, j, hi);
                for (const auto& a : inner)
                    for (const auto& c : outer) {
                        Blocks b;
                        for (const auto& blk : c) {
                            if (blk.front() == j) {
                                std::vector<int> merged{lo};
                                merged.insert(merged.end(), blk.begin(), blk.end());
                                b.push_back(std::move(merged));
                            }
                        }
                        b.insert(b.end(), a.begin(), a.end());
                        for (const auto& blk : c)
                            if (blk.front() != j) b.push_back(blk);
                        out.push_back(std::move(b));
                    }
            }
        }
        done[lo][hi] = true;
        memo[lo][hi] = std::move(out);
        return memo[lo][hi];
    };
    return rec(rec, 0, n);
}

std::vector<BncPartition> enumerate_bnc(const ChiShape& shape, const EnumerationConfig& cfg) {
    int n = shape.size();
    if (n > cfg.bound)
        throw BoundError("enumeration bound exceeded: n=" + std::to_string(n) + " > " + std::to_string(cfg.bound));
    std::vector<BncPartition> out;
    for (const auto& nc : enumerate_nc(n)) {
        Blocks pushed;
        pushed.reserve(nc.size());
        for (const auto& b : nc) {
            std::vector<int> pb;
            for (int q : b) pb.push_back(shape.s()[q]);
            pushed.push_back(std::move(pb));
        }
        out.emplace_back(shape, pushed);
    }
    return out;
}

namespace {
void require_same_shape(const BncPartition& a, const BncPartition& b) {
    if (!(a.shape() == b.shape())) throw PartitionError("shape mismatch");
}
}  // namespace

bool refines(const BncPartition& pi, const BncPartition& sigma) {
    require_same_shape(pi, sigma);
    for (const auto& b : pi.blocks())
        for (int p : b)
            if (sigma.block_of(p) != sigma.block_of(b.front())) return false;
    return true;
}

BncPartition join(const BncPartition& pi, const BncPartition& sigma) {
    require_same_shape(pi, sigma);
    int n = pi.size();
    UnionFind uf(n);
    for (const auto* part : {&pi, &sigma})
        for (const auto& b : part->blocks())
            for (int p : b) uf.unite(p, b.front());
    const auto& s = pi.shape().s();
    for (;;) {
        Blocks blocks = blocks_from_uf(uf, n);
        if (is_bnc(pi.shape(), blocks)) return BncPartition(pi.shape(), blocks);
        // merge the first crossing pair in the pulled-back order
        std::vector<int> lab(n);
        for (int q = 0; q < n; ++q) lab[q] = uf.find(s[q]);
        bool merged = false;
        for (int a = 0; a < n && !merged; ++a)
            for (int b = a + 1; b < n && !merged; ++b) {
                if (lab[b] == lab[a]) continue;
                for (int c = b + 1; c < n && !merged; ++c) {
                    if (lab[c] != lab[a]) continue;
                    for (int d = c + 1; d < n; ++d)
                        if (lab[d] == lab[b]) {
                            uf.unite(s[a], s[b]);
                            merged = true;
                            break;
                        }
                }
            }
    }
}

BncPartition meet(const BncPartition& pi, const BncPartition& sigma) {
    require_same_shape(pi, sigma);
    std::vector<std::vector<int>> groups;
    std::vector<std::pair<int, int>> keys;
    for (int p = 0; p < pi.size(); ++p) {
        std::pair<int, int> k{pi.block_of(p), sigma.block_of(p)};
        auto it = std::find(keys.begin(), keys.end(), k);
        if (it == keys.end()) {
            keys.push_back(k);
            groups.push_back({p});
        } else {
            groups[it - keys.begin()].push_back(p);
        }
    }
    return BncPartition(pi.shape(), groups);
}

Blocks kreweras(int n, const Blocks& pi) {
    auto labels = labels_from_blocks(n, pi);
    if (!is_noncrossing_labels(labels)) throw PartitionError("kreweras: input is not non-crossing");
    // As permutations: K = pi^{-1} gamma, blocks read as increasing cycles.
    std::vector<int> inv(n);
    for (const auto& b : pi) {
        std::vector<int> s = b;
        std::sort(s.begin(), s.end());
        for (size_t i = 0; i < s.size(); ++i) inv[s[(i + 1) % s.size()]] = s[i];
    }
    std::vector<bool> seen(n, false);
    Blocks out;
    for (int i = 0; i < n; ++i) {
        if (seen[i]) continue;
        std::vector<int> cyc;
        for (int j = i; !seen[j]; j = inv[(j + 1) % n]) {
            seen[j] = true;
            cyc.push_back(j);
        }
        std::sort(cyc.begin(), cyc.end());
        out.push_back(std::move(cyc));
    }
    return out;
}

std::vector<BncPartition> enumerate_bnc_prime(Side side, int n) {
    if (n < 1) throw BoundError("enumerate_bnc_prime requires n >= 1");
    if (2 * n > EnumerationConfig{}.bound * 2) throw BoundError("enumerate_bnc_prime: n too large");
    ChiShape shape = ChiShape::all(side, 2 * n);
    std::vector<BncPartition> out;
    // odd positions 0,2,..,2n-2 <-> points 0..n-1 ; even positions 1,3,.. <-> primed points
    for (const auto& rest : enumerate_nc(n - 1)) {
        Blocks odd{{0}};
        for (const auto& b : rest) {
            std::vector<int> s;
            for (int q : b) s.push_back(q + 1);
            odd.push_back(std::move(s));
        }
        Blocks k = kreweras(n, odd);
        Blocks all;
        for (const auto& b : odd) {
            std::vector<int> s;
            for (int q : b) s.push_back(2 * q);
            all.push_back(std::move(s));
        }
        for (const auto& b : k) {
            std::vector<int> s;
            for (int q : b) s.push_back(2 * q + 1);
            all.push_back(std::move(s));
        }
        out.emplace_back(shape, all);
    }
    return out;
}

std::vector<BncPartition> enumerate_bnc_vs(const ChiShape& shape, const EnumerationConfig& cfg) {
    std::vector<BncPartition> out;
    for (auto& pi : enumerate_bnc(shape, cfg)) {
        bool split = true;
        for (const auto& b : pi.blocks()) {
            bool hl = false, hr = false;
            for (int p : b) (shape.tag(p) == Side::L ? hl : hr) = true;
            if (hl && hr) split = false;
        }
        if (split) out.push_back(std::move(pi));
    }
    return out;
}

std::vector<BncPartition> enumerate_bnc_T(int n, int m, TClass cls, const EnumerationConfig& cfg) {
    bool prime = cls == TClass::OPrime;
    if (n < 1 || m < (prime ? 0 : 1)) throw BoundError("enumerate_bnc_T: invalid (n, m)");
    int nr = prime ? 2 * m + 1 : 2 * m;
    ChiShape shape = ChiShape::nm(n, nr);
    // right node k_r (1-based k) sits at position n + k - 1; parity of k
    std::vector<int> parity(n + nr, -1);
    for (int k = 1; k <= nr; ++k) parity[n + k - 1] = k % 2;
    Blocks sigma;
    for (int p = 0; p < n; ++p) sigma.push_back({p});
    if (prime) {
        sigma.push_back({n});
        for (int k = 1; k <= m; ++k) sigma.push_back({n + 2 * k - 1, n + 2 * k});
    } else {
        for (int k = 1; k <= m; ++k) sigma.push_back({n + 2 * k - 2, n + 2 * k - 1});
    }
    std::vector<BncPartition> out;
    for (auto& pi : enumerate_bnc(shape, cfg)) {
        if (!joins_to_one(pi, sigma)) continue;
        bool mixed = false;
        for (const auto& b : pi.blocks()) mixed = mixed || has_mixed_parity(b, parity);
        if (mixed) continue;
        if (cls == TClass::E || cls == TClass::O) {
            const auto& blk = pi.blocks()[pi.block_of(0)];
            bool even = false, odd = false;
            for (int p : blk)
                if (parity[p] == 0) even = true;
                else if (parity[p] == 1) odd = true;
            if (cls == TClass::E && !even) continue;
            if (cls == TClass::O && !odd) continue;
        }
        out.push_back(std::move(pi));
    }
    return out;
}

std::vector<BncPartition> enumerate_bnc_S(int n, int m, SClass cls, const EnumerationConfig& cfg) {
    bool prime = cls == SClass::OPrime || cls == SClass::O0 || cls == SClass::OR || cls == SClass::OL ||
                 cls == SClass::OLR;
    if (n < (prime ? 0 : 1) || m < (prime ? 0 : 1)) throw BoundError("enumerate_bnc_S: invalid (n, m)");
    int nl = prime ? 2 * n + 1 : 2 * n;
    int nr = prime ? 2 * m + 1 : 2 * m;
    ChiShape shape = ChiShape::nm(nl, nr);
    std::vector<int> parity(nl + nr);
    for (int k = 1; k <= nl; ++k) parity[k - 1] = k % 2;
    for (int k = 1; k <= nr; ++k) parity[nl + k - 1] = k % 2;
    Blocks sigma;
    if (prime) {
        sigma.push_back({0, nl});
        for (int l = 1; l <= n; ++l) sigma.push_back({2 * l - 1, 2 * l});
        for (int k = 1; k <= m; ++k) sigma.push_back({nl + 2 * k - 1, nl + 2 * k});
    } else {
        for (int l = 1; l <= n; ++l) sigma.push_back({2 * l - 2, 2 * l - 1});
        for (int k = 1; k <= m; ++k) sigma.push_back({nl + 2 * k - 2, nl + 2 * k - 1});
    }
    std::vector<BncPartition> out;
    for (auto& pi : enumerate_bnc(shape, cfg)) {
        if (!joins_to_one(pi, sigma)) continue;
        bool mixed = false;
        for (const auto& b : pi.blocks()) mixed = mixed || has_mixed_parity(b, parity);
        if (mixed) continue;
        if (cls == SClass::E || cls == SClass::O) {
            // topmost block meeting both sides: smallest left index among such blocks
            int best = -1;
            for (const auto& b : pi.blocks()) {
                int minl = nl;
                bool hr = false;
                for (int p : b)
                    if (p < nl) minl = std::min(minl, p);
                    else hr = true;
                if (hr && minl < nl && (best < 0 || minl < best)) best = minl;
            }
            if (best < 0) continue;
            int par = parity[best];
            if (cls == SClass::E && par != 0) continue;
            if (cls == SClass::O && par != 1) continue;
        } else if (cls != SClass::All && cls != SClass::OPrime) {
            const auto& vl = pi.blocks()[pi.block_of(0)];
            const auto& vr = pi.blocks()[pi.block_of(nl)];
            bool vl_has_r = std::any_of(vl.begin(), vl.end(), [&](int p) { return p >= nl; });
            bool vr_has_l = std::any_of(vr.begin(), vr.end(), [&](int p) { return p < nl; });
            bool same = pi.block_of(0) == pi.block_of(nl);
            SClass got = same ? SClass::OLR
                         : (!vl_has_r && !vr_has_l) ? SClass::O0
                         : (!vl_has_r && vr_has_l)  ? SClass::OR
                         : (vl_has_r && !vr_has_l)  ? SClass::OL
                                                    : SClass::All;  // not reachable for bi-non-crossing input
            if (got != cls) continue;
        }
        out.push_back(std::move(pi));
    }
    return out;
}

TClass parse_tclass(const std::string& s) {
    if (s == "all") return TClass::All;
    if (s == "e") return TClass::E;
    if (s == "o") return TClass::O;
    if (s == "o'" || s == "oprime") return TClass::OPrime;
    throw PartitionError("unknown T class: " + s);
}

SClass parse_sclass(const std::string& s) {
    if (s == "all") return SClass::All;
    if (s == "e") return SClass::E;
    if (s == "o") return SClass::O;
    if (s == "o'" || s == "oprime") return SClass::OPrime;
    if (s == "o,0" || s == "o0") return SClass::O0;
    if (s == "o,r" || s == "or") return SClass::OR;
    if (s == "o,l" || s == "ol") return SClass::OL;
    if (s == "o,lr" || s == "olr") return SClass::OLR;
    throw PartitionError("unknown S class: " + s);
}

HatEmbedding::HatEmbedding(ChiShape outer, std::vector<int> cuts) : outer_(std::move(outer)), cuts_(std::move(cuts)) {
    int m = outer_.size();
    if (static_cast<int>(cuts_.size()) != m + 1 || cuts_.front() != 0)
        throw PartitionError("inconsistent cuts: need k(0)=0 and m+1 entries");
    for (int p = 1; p <= m; ++p)
        if (cuts_[p] <= cuts_[p - 1]) throw PartitionError("inconsistent cuts: must be strictly increasing");
    std::vector<Side> t;
    for (int p = 0; p < m; ++p)
        for (int q = cuts_[p]; q < cuts_[p + 1]; ++q) t.push_back(outer_.tag(p));
    inner_ = ChiShape(std::move(t));
}

std::vector<int> HatEmbedding::group(int p) const {
    std::vector<int> g;
    for (int q = cuts_[p]; q < cuts_[p + 1]; ++q) g.push_back(q);
    return g;
}

BncPartition HatEmbedding::embed(const BncPartition& pi) const {
    if (!(pi.shape() == outer_)) throw PartitionError("hat_embed: shape mismatch");
    Blocks out;
    for (const auto& b : pi.blocks()) {
        std::vector<int> nb;
        for (int p : b)
            for (int q : group(p)) nb.push_back(q);
        out.push_back(std::move(nb));
    }
    return BncPartition(inner_, out);
}

long long catalan(int n) {
    long long c = 1;
    for (int k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
    return c;
}

}  // namespace bifree
