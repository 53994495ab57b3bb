#include <doctest.h>

#include <set>

#include "bifree/mobius.hpp"
#include "bifree/partitions.hpp"
#include "oracles.hpp"

using namespace bifree;

namespace {

std::vector<ChiShape> all_shapes(int n) {
    std::vector<ChiShape> out;
    for (unsigned m = 0; m < (1u << n); ++m) {
        std::vector<Side> t;
        for (int p = 0; p < n; ++p) t.push_back((m >> p & 1u) ? Side::R : Side::L);
        out.emplace_back(t);
    }
    return out;
}

std::set<oracle::Labels> label_set(const std::vector<BncPartition>& ps) {
    std::set<oracle::Labels> s;
    for (const auto& p : ps) s.insert(oracle::labels_of(p));
    return s;
}

Blocks one_based(const Blocks& b) {
    Blocks out;
    for (const auto& blk : b) {
        std::vector<int> x;
        for (int p : blk) x.push_back(p - 1);
        out.push_back(x);
    }
    return out;
}

ChiShape flop_shape() { return ChiShape::from_string("lllrrl"); }

}  // namespace

TEST_CASE("s_chi orders left positions up then right positions down") {
    auto s = flop_shape().s();
    std::vector<int> one(s.size());
    for (size_t i = 0; i < s.size(); ++i) one[i] = s[i] + 1;
    CHECK(one == std::vector<int>{1, 2, 3, 6, 5, 4});
    CHECK(ChiShape::from_string("llll").s() == std::vector<int>{0, 1, 2, 3});
    CHECK(ChiShape::from_string("rrr").s() == std::vector<int>{2, 1, 0});
    for (const auto& sh : all_shapes(5))
        for (int p = 0; p < 5; ++p) CHECK(sh.s()[sh.rank()[p]] == p);
}

TEST_CASE("enumeration matches Catalan numbers and the brute-force filter") {
    for (int n = 1; n <= 6; ++n)
        for (const auto& sh : all_shapes(n)) {
            auto ps = enumerate_bnc(sh);
            CHECK(static_cast<long long>(ps.size()) == catalan(n));
            auto brute = oracle::brute_bnc(sh.tags());
            CHECK(label_set(ps) == std::set<oracle::Labels>(brute.begin(), brute.end()));
        }
    CHECK(enumerate_bnc(ChiShape::from_string("lrl")).size() == 5);
    CHECK(enumerate_bnc(ChiShape::from_string("r")).size() == 1);
    CHECK_THROWS_AS(enumerate_bnc(ChiShape::nm(13, 0)), BoundError);
}

TEST_CASE("bi-non-crossing membership") {
    CHECK(is_bnc(flop_shape(), one_based({{1, 4}, {2, 5}, {3, 6}})));
    CHECK_FALSE(is_bnc(ChiShape::from_string("llll"), one_based({{1, 3}, {2, 4}})));
    CHECK(is_bnc(ChiShape::from_string("lrlr"), one_based({{1}, {2}, {3}, {4}})));
    CHECK_THROWS_AS(is_bnc(ChiShape::from_string("ll"), one_based({{1, 2}, {2}})), PartitionError);
    CHECK_THROWS_AS(is_bnc(ChiShape::from_string("lll"), one_based({{1, 2}})), PartitionError);
    bool found = false;
    for (const auto& p : enumerate_bnc(flop_shape()))
        if (p.str() == "{1,4},{2,5},{3,6}") found = true;
    CHECK(found);
}

TEST_CASE("lattice operations agree with brute-force bounds") {
    ChiShape sh = ChiShape::from_string("llll");
    BncPartition a(sh, one_based({{1, 3}, {2}, {4}})), b(sh, one_based({{2, 4}, {1}, {3}}));
    CHECK(join(a, b) == BncPartition::one(sh));
    for (int n = 1; n <= 5; ++n)
        for (const auto& shape : all_shapes(n)) {
            auto ps = enumerate_bnc(shape);
            for (const auto& x : ps) {
                CHECK(join(BncPartition::zero(shape), x) == x);
                CHECK(meet(BncPartition::one(shape), x) == x);
            }
            if (n > 4) continue;
            for (const auto& x : ps)
                for (const auto& y : ps) {
                    auto j = join(x, y), m = meet(x, y);
                    CHECK(refines(x, j));
                    CHECK(refines(m, x));
                    // least upper bound over the enumerated lattice
                    for (const auto& z : ps)
                        if (refines(x, z) && refines(y, z)) CHECK(refines(j, z));
                    for (const auto& z : ps)
                        if (refines(z, x) && refines(z, y)) CHECK(refines(z, m));
                }
        }
}

TEST_CASE("push-forward is an order isomorphism") {
    for (int n = 1; n <= 5; ++n) {
        auto base = enumerate_bnc(ChiShape::nm(n, 0));
        for (const auto& sh : all_shapes(n)) {
            auto ps = enumerate_bnc(sh);
            REQUIRE(ps.size() == base.size());
            for (size_t i = 0; i < ps.size(); ++i)
                for (size_t j = 0; j < ps.size(); ++j)
                    CHECK(refines(ps[i], ps[j]) == oracle::leq(oracle::canon(ps[i].pulled_back_labels()), oracle::canon(ps[j].pulled_back_labels())));
        }
    }
}

TEST_CASE("Kreweras complement") {
    auto k = kreweras(7, one_based({{1, 6}, {2}, {3, 4, 5}, {7}}));
    std::sort(k.begin(), k.end());
    CHECK(k == one_based({{1, 2, 5}, {3}, {4}, {6, 7}}));
    CHECK(kreweras(4, one_based({{1}, {2}, {3}, {4}})) == one_based({{1, 2, 3, 4}}));
    CHECK_THROWS_AS(kreweras(4, one_based({{1, 3}, {2, 4}})), PartitionError);
    for (int n = 1; n <= 7; ++n)
        for (const auto& nc : enumerate_nc(n)) CHECK(nc.size() + kreweras(n, nc).size() == static_cast<size_t>(n + 1));
    // maximality on the interleaved points, by brute force
    for (int n = 1; n <= 5; ++n)
        for (const auto& nc : enumerate_nc(n)) {
            auto kr = kreweras(n, nc);
            auto inter = [&](const Blocks& primed) {
                oracle::Labels lab(2 * n);
                int b = 0;
                for (const auto& blk : nc) {
                    for (int p : blk) lab[2 * p] = b;
                    ++b;
                }
                for (const auto& blk : primed) {
                    for (int p : blk) lab[2 * p + 1] = b;
                    ++b;
                }
                std::vector<int> order(2 * n);
                for (int i = 0; i < 2 * n; ++i) order[i] = i;
                return !oracle::crosses_in_order(lab, order);
            };
            CHECK(inter(kr));
            size_t best = n + 1;
            for (const auto& cand : enumerate_nc(n))
                if (inter(cand)) best = std::min(best, cand.size());
            CHECK(best == kr.size());
        }
}

TEST_CASE("BNC prime families equal the predicate filter") {
    CHECK(enumerate_bnc_prime(Side::L, 1).size() == 1);
    CHECK(enumerate_bnc_prime(Side::L, 1)[0].str() == "{1l},{2l}");
    auto two = enumerate_bnc_prime(Side::L, 2);
    REQUIRE(two.size() == 1);
    CHECK(two[0].str() == "{1l},{2l,4l},{3l}");
    for (int n = 1; n <= 4; ++n)
        for (Side side : {Side::L, Side::R}) {
            std::vector<Side> tags(2 * n, side);
            std::set<oracle::Labels> want;
            for (const auto& l : oracle::brute_bnc(tags)) {
                bool ok = true;
                for (int p = 1; p < 2 * n; ++p)
                    if (l[p] == l[0]) ok = false;
                for (int p = 0; p < 2 * n; ++p)
                    for (int q = 0; q < 2 * n; ++q)
                        if (l[p] == l[q] && (p - q) % 2 != 0) ok = false;
                // join with pairs {2k-1, 2k} is one block: union-find by hand
                std::vector<int> comp(2 * n);
                for (int p = 0; p < 2 * n; ++p) comp[p] = p;
                std::function<int(int)> f = [&](int x) { return comp[x] == x ? x : comp[x] = f(comp[x]); };
                for (int p = 0; p < 2 * n; ++p)
                    for (int q = 0; q < 2 * n; ++q)
                        if (l[p] == l[q] || p / 2 == q / 2) comp[f(p)] = f(q);
                for (int p = 0; p < 2 * n; ++p)
                    if (f(p) != f(0)) ok = false;
                if (ok) want.insert(l);
            }
            auto got = enumerate_bnc_prime(side, n);
            CHECK(label_set(got) == want);
            CHECK(static_cast<long long>(got.size()) == catalan(n - 1));
        }
}

namespace {

// Independent filter for T and S families on brute-force partitions.
struct FamilyFilter {
    int nl, nr;
    std::vector<std::vector<int>> sigma;
    std::vector<int> parity;  // -1 = ignored
    bool connected(const oracle::Labels& l) const {
        int n = nl + nr;
        std::vector<int> comp(n);
        for (int p = 0; p < n; ++p) comp[p] = p;
        std::function<int(int)> f = [&](int x) { return comp[x] == x ? x : comp[x] = f(comp[x]); };
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (l[p] == l[q]) comp[f(p)] = f(q);
        for (const auto& b : sigma)
            for (int p : b) comp[f(p)] = f(b[0]);
        for (int p = 0; p < n; ++p)
            if (f(p) != f(0)) return false;
        return true;
    }
    bool parity_ok(const oracle::Labels& l) const {
        int n = nl + nr;
        for (int p = 0; p < n; ++p)
            for (int q = 0; q < n; ++q)
                if (l[p] == l[q] && parity[p] >= 0 && parity[q] >= 0 && parity[p] != parity[q]) return false;
        return true;
    }
    std::vector<oracle::Labels> members() const {
        std::vector<bifree::Side> tags(nl, Side::L);
        tags.insert(tags.end(), nr, Side::R);
        std::vector<oracle::Labels> out;
        for (const auto& l : oracle::brute_bnc(tags))
            if (connected(l) && parity_ok(l)) out.push_back(l);
        return out;
    }
};

}  // namespace

TEST_CASE("T families equal the brute-force filter and split into classes") {
    for (int n = 1; n <= 3; ++n)
        for (int m = 1; m <= 3 && n + 2 * m <= 8; ++m) {
            FamilyFilter f{n, 2 * m, {}, std::vector<int>(n + 2 * m, -1)};
            for (int k = 1; k <= m; ++k) f.sigma.push_back({n + 2 * k - 2, n + 2 * k - 1});
            for (int k = 1; k <= 2 * m; ++k) f.parity[n + k - 1] = k % 2;
            auto want = f.members();
            auto all = enumerate_bnc_T(n, m, TClass::All);
            CHECK(label_set(all) == std::set<oracle::Labels>(want.begin(), want.end()));
            auto e = label_set(enumerate_bnc_T(n, m, TClass::E));
            auto o = label_set(enumerate_bnc_T(n, m, TClass::O));
            for (const auto& x : e) CHECK(o.count(x) == 0);
            CHECK(e.size() + o.size() == all.size());
        }
    for (int n = 1; n <= 3; ++n)
        for (int m = 0; m <= 2; ++m) {
            FamilyFilter f{n, 2 * m + 1, {{n}}, std::vector<int>(n + 2 * m + 1, -1)};
            for (int k = 1; k <= m; ++k) f.sigma.push_back({n + 2 * k - 1, n + 2 * k});
            for (int k = 1; k <= 2 * m + 1; ++k) f.parity[n + k - 1] = k % 2;
            auto want = f.members();
            CHECK(label_set(enumerate_bnc_T(n, m, TClass::OPrime)) == std::set<oracle::Labels>(want.begin(), want.end()));
        }
    auto t11 = enumerate_bnc_T(1, 1, TClass::All);
    CHECK(t11.size() == enumerate_bnc_T(1, 1, TClass::E).size() + enumerate_bnc_T(1, 1, TClass::O).size());
}

TEST_CASE("S families equal the brute-force filter and split into classes") {
    for (int n = 1; n <= 2; ++n)
        for (int m = 1; m <= 2; ++m) {
            FamilyFilter f{2 * n, 2 * m, {}, std::vector<int>(2 * n + 2 * m)};
            for (int l = 1; l <= n; ++l) f.sigma.push_back({2 * l - 2, 2 * l - 1});
            for (int k = 1; k <= m; ++k) f.sigma.push_back({2 * n + 2 * k - 2, 2 * n + 2 * k - 1});
            for (int k = 1; k <= 2 * n; ++k) f.parity[k - 1] = k % 2;
            for (int k = 1; k <= 2 * m; ++k) f.parity[2 * n + k - 1] = k % 2;
            auto want = f.members();
            auto all = enumerate_bnc_S(n, m, SClass::All);
            CHECK(label_set(all) == std::set<oracle::Labels>(want.begin(), want.end()));
            auto e = label_set(enumerate_bnc_S(n, m, SClass::E));
            auto o = label_set(enumerate_bnc_S(n, m, SClass::O));
            for (const auto& x : e) CHECK(o.count(x) == 0);
            CHECK(e.size() + o.size() == all.size());
        }
    for (int n = 0; n <= 2; ++n)
        for (int m = 0; m <= 2; ++m) {
            int nl = 2 * n + 1, nr = 2 * m + 1;
            FamilyFilter f{nl, nr, {{0, nl}}, std::vector<int>(nl + nr)};
            for (int l = 1; l <= n; ++l) f.sigma.push_back({2 * l - 1, 2 * l});
            for (int k = 1; k <= m; ++k) f.sigma.push_back({nl + 2 * k - 1, nl + 2 * k});
            for (int k = 1; k <= nl; ++k) f.parity[k - 1] = k % 2;
            for (int k = 1; k <= nr; ++k) f.parity[nl + k - 1] = k % 2;
            auto want = f.members();
            auto prime = enumerate_bnc_S(n, m, SClass::OPrime);
            CHECK(label_set(prime) == std::set<oracle::Labels>(want.begin(), want.end()));
            size_t total = 0;
            std::set<oracle::Labels> seen;
            for (SClass c : {SClass::O0, SClass::OR, SClass::OL, SClass::OLR})
                for (const auto& x : enumerate_bnc_S(n, m, c)) {
                    CHECK(seen.insert(oracle::labels_of(x)).second);
                    ++total;
                }
            CHECK(total == prime.size());
        }
}

TEST_CASE("vertical-split family") {
    auto vs = enumerate_bnc_vs(ChiShape::nm(1, 1));
    REQUIRE(vs.size() == 1);
    CHECK(vs[0].num_blocks() == 2);
    for (const auto& p : enumerate_bnc_vs(ChiShape::nm(2, 3)))
        for (const auto& b : p.blocks()) {
            bool hl = false, hr = false;
            for (int q : b) (q < 2 ? hl : hr) = true;
            CHECK_FALSE((hl && hr));
        }
}

TEST_CASE("hat embedding") {
    ChiShape outer = ChiShape::from_string("lr");
    HatEmbedding triv(outer, {0, 1, 2});
    for (const auto& p : enumerate_bnc(outer)) CHECK(triv.embed(p).blocks() == p.blocks());
    HatEmbedding e(ChiShape::from_string("ll"), {0, 2, 4});
    CHECK(e.embed(BncPartition::one(e.outer())).num_blocks() == 1);
    CHECK_THROWS_AS(HatEmbedding(outer, {0, 2, 2}), PartitionError);
    for (const std::string s : {"lr", "ll", "lrl", "rrl"}) {
        ChiShape o = ChiShape::from_string(s);
        std::vector<int> cuts{0};
        for (int p = 0; p < o.size(); ++p) cuts.push_back(cuts.back() + 1 + p % 2);
        HatEmbedding h(o, cuts);
        auto ps = enumerate_bnc(o);
        for (const auto& a : ps)
            for (const auto& b : ps) CHECK(refines(a, b) == refines(h.embed(a), h.embed(b)));
    }
}

TEST_CASE("Moebius function") {
    for (int n = 1; n <= 6; ++n) {
        ChiShape sh = ChiShape::nm(n, 0);
        long long want = (n % 2 ? 1 : -1) * catalan(n - 1);
        CHECK(mobius(BncPartition::zero(sh), BncPartition::one(sh)) == want);
    }
    ChiShape two = ChiShape::from_string("lr");
    CHECK(mobius(BncPartition::zero(two), BncPartition::one(two)) == -1);
    auto p = BncPartition::one(two);
    CHECK(mobius(p, p) == 1);
    CHECK(mobius(BncPartition::one(two), BncPartition::zero(two)) == 0);
}

TEST_CASE("fast Moebius equals the recursive oracle on every interval") {
    for (int n = 1; n <= 5; ++n)
        for (const auto& sh : all_shapes(n)) {
            if (n == 5 && sh.str() != "lrlrl" && sh.str() != "rrlll") continue;
            auto ps = enumerate_bnc(sh);
            std::vector<oracle::Labels> poset;
            for (const auto& x : ps) poset.push_back(oracle::labels_of(x));
            for (size_t i = 0; i < ps.size(); ++i)
                for (size_t j = 0; j < ps.size(); ++j)
                    CHECK(mobius(ps[i], ps[j]) == oracle::mobius_recursive(poset, poset[i], poset[j]));
        }
}

TEST_CASE("Moebius interval sums and inversion") {
    for (int n = 1; n <= 5; ++n)
        for (const auto& sh : all_shapes(n))
            for (const auto& s : enumerate_bnc(sh)) CHECK(mobius_column_sum_check(s));
    ChiShape sh = ChiShape::from_string("lrrlr");
    auto ps = enumerate_bnc(sh);
    std::vector<long long> f(ps.size()), g(ps.size(), 0);
    for (size_t i = 0; i < ps.size(); ++i) f[i] = static_cast<long long>((i * 7919) % 23) - 11;
    for (size_t s = 0; s < ps.size(); ++s)
        for (size_t i = 0; i < ps.size(); ++i)
            if (refines(ps[i], ps[s])) g[s] += f[i];
    for (size_t s = 0; s < ps.size(); ++s) {
        long long back = 0;
        for (size_t i = 0; i < ps.size(); ++i) back += g[i] * mobius(ps[i], ps[s]);
        CHECK(back == f[s]);
    }
}
