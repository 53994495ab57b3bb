#include "bifree/cumulants.hpp"

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <unordered_map>

namespace bifree {

namespace {

struct Lattice {
    std::vector<BncPartition> parts;
    std::vector<MobiusValue> mu_to_one;
    std::vector<std::vector<unsigned>> block_masks;
};

const Lattice& lattice(const ChiShape& shape) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<Lattice>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto& slot = cache[shape.str()];
    if (!slot) {
        auto lat = std::make_unique<Lattice>();
        lat->parts = enumerate_bnc(shape);
        BncPartition one = BncPartition::one(shape);
        for (const auto& p : lat->parts) {
            lat->mu_to_one.push_back(mobius(p, one));
            std::vector<unsigned> masks;
            for (const auto& b : p.blocks()) {
                unsigned m = 0;
                for (int q : b) m |= 1u << q;
                masks.push_back(m);
            }
            lat->block_masks.push_back(std::move(masks));
        }
        slot = std::move(lat);
    }
    return *slot;
}

bool is_identity(const BMatrix& b) {
    if (b.size() == 0) return true;
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            if (b(i, j) != (i == j ? cd(1.0) : cd(0.0))) return false;
    return true;
}

struct FreeItem {
    int pos;
    BMatrix fpre, fpost;
};

using PosLeaf = std::function<BMatrix(const std::vector<int>& positions, const DecoratedTuple& sub)>;

DecoratedTuple tuple_from_items(const DecoratedTuple& t, std::vector<const FreeItem*> items, std::vector<int>& positions) {
    std::sort(items.begin(), items.end(), [](const FreeItem* a, const FreeItem* b) { return a->pos < b->pos; });
    positions.clear();
    DecoratedTuple sub;
    std::vector<Side> tags;
    for (const FreeItem* it : items) {
        positions.push_back(it->pos);
        tags.push_back(t.shape.tag(it->pos));
        DecoratedEntry e = t.entries[it->pos];
        if (t.shape.tag(it->pos) == Side::L) {
            e.pre = it->fpre;
            e.post = it->fpost;
        } else {
            e.pre = it->fpost;
            e.post = it->fpre;
        }
        sub.entries.push_back(std::move(e));
    }
    sub.shape = ChiShape(std::move(tags));
    return sub;
}

BMatrix reduce_impl(const std::vector<int>& labels, const DecoratedTuple& t, const PosLeaf& leaf, Schedule schedule) {
    int n = t.shape.size();
    int d = t.d();
    std::vector<FreeItem> items;
    items.reserve(n);
    for (int q = 0; q < n; ++q) {
        int p = t.shape.s()[q];
        const auto& e = t.entries[p];
        BMatrix pre = e.pre.size() ? e.pre : identity(d);
        BMatrix post = e.post.size() ? e.post : identity(d);
        if (t.shape.tag(p) == Side::L) items.push_back({p, pre, post});
        else items.push_back({p, post, pre});
    }
    std::vector<int> positions;
    for (;;) {
        int m = static_cast<int>(items.size());
        std::map<int, std::pair<int, int>> span;  // label -> (first, last)
        std::map<int, int> count;
        for (int i = 0; i < m; ++i) {
            int lab = labels[items[i].pos];
            auto it = span.find(lab);
            if (it == span.end()) span[lab] = {i, i};
            else it->second.second = i;
            ++count[lab];
        }
        if (span.size() == 1) {
            std::vector<const FreeItem*> all;
            for (const auto& it : items) all.push_back(&it);
            DecoratedTuple sub = tuple_from_items(t, all, positions);
            return leaf(positions, sub);
        }
        int chosen_first = -1, chosen_last = -1;
        for (const auto& [lab, fl] : span) {
            if (fl.second - fl.first + 1 != count[lab]) continue;
            bool better = chosen_first < 0 || (schedule == Schedule::LargestMin ? fl.first > chosen_first : fl.first < chosen_first);
            if (better) {
                chosen_first = fl.first;
                chosen_last = fl.second;
            }
        }
        std::vector<const FreeItem*> blk;
        for (int i = chosen_first; i <= chosen_last; ++i) blk.push_back(&items[i]);
        DecoratedTuple sub = tuple_from_items(t, blk, positions);
        BMatrix v = leaf(positions, sub);
        bool forward = schedule == Schedule::SmallestMinForward ? chosen_last + 1 < m : chosen_first == 0;
        if (forward) items[chosen_last + 1].fpre = v * items[chosen_last + 1].fpre;
        else items[chosen_first - 1].fpost = items[chosen_first - 1].fpost * v;
        items.erase(items.begin() + chosen_first, items.begin() + chosen_last + 1);
    }
}

OpElement realize(const DecoratedEntry& e, Side side) {
    OpElement x = e.op;
    bool left = side == Side::L;
    if (e.pre.size() && !is_identity(e.pre)) x = (left ? OpElement::Lb(e.pre) : OpElement::Rb(e.pre)) * x;
    if (e.post.size() && !is_identity(e.post)) x = x * (left ? OpElement::Lb(e.post) : OpElement::Rb(e.post));
    return x;
}

void append_bytes(std::string& key, const BMatrix& b) {
    key.append(reinterpret_cast<const char*>(b.data()), sizeof(cd) * static_cast<size_t>(b.size()));
}

}  // namespace

int DecoratedTuple::d() const {
    for (const auto& e : entries) {
        if (e.pre.size()) return static_cast<int>(e.pre.rows());
        if (e.post.size()) return static_cast<int>(e.post.rows());
        if (e.symbol < 0) return e.op.d();
    }
    return entries.empty() ? 1 : entries.front().op.d();
}

DecoratedTuple DecoratedTuple::sub(const std::vector<int>& positions) const {
    DecoratedTuple out;
    out.shape = shape.restrict(positions);
    for (int p : positions) out.entries.push_back(entries[p]);
    return out;
}

DecoratedEntry plain_entry(const OpElement& op) {
    return DecoratedEntry{op, identity(op.d()), identity(op.d()), -1};
}

DecoratedEntry decorated_entry(const OpElement& op, const BMatrix& pre, const BMatrix& post) {
    return DecoratedEntry{op, pre, post, -1};
}

DecoratedTuple make_tuple(const ChiShape& shape, const std::vector<OpElement>& ops) {
    DecoratedTuple t{shape, {}};
    for (const auto& x : ops) t.entries.push_back(plain_entry(x));
    return t;
}

BMatrix eval_moment_full(const DecoratedTuple& t) {
    int d = t.d();
    State s = State::identity(d);
    for (int q = t.shape.size() - 1; q >= 0; --q) {
        const auto& e = t.entries[q];
        if (e.symbol >= 0) throw std::logic_error("symbolic entry needs a specified-family engine");
        bool left = t.shape.tag(q) == Side::L;
        if (e.post.size() && !is_identity(e.post))
            s = apply_atom(Atom{left ? AtomKind::LeftB : AtomKind::RightB, nullptr, e.post}, s);
        s = e.op.apply(s);
        if (e.pre.size() && !is_identity(e.pre))
            s = apply_atom(Atom{left ? AtomKind::LeftB : AtomKind::RightB, nullptr, e.pre}, s);
    }
    return s.vacuum();
}

BMatrix MomentEngine::full(const DecoratedTuple& t) const {
    BMatrix v = full_moment(t);
    return post_map ? post_map(v) : v;
}

BMatrix reduce_bimultiplicative(const BncPartition& pi, const DecoratedTuple& t, const Leaf& leaf, Schedule schedule) {
    if (!(pi.shape() == t.shape)) throw PartitionError("partition and tuple shapes differ");
    return reduce_impl(pi.labels(), t, [&](const std::vector<int>&, const DecoratedTuple& sub) { return leaf(sub); },
                       schedule);
}

BMatrix eval_moment_pi(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng) {
    return reduce_bimultiplicative(pi, t, [&](const DecoratedTuple& sub) { return eng.full(sub); }, eng.schedule);
}

cd scalar_cumulant_from_moments(const ChiShape& shape, const std::function<cd(unsigned)>& moment) {
    const Lattice& lat = lattice(shape);
    std::unordered_map<unsigned, cd> memo;
    auto m = [&](unsigned mask) {
        auto it = memo.find(mask);
        if (it != memo.end()) return it->second;
        cd v = moment(mask);
        memo.emplace(mask, v);
        return v;
    };
    cd acc = 0.0;
    for (size_t i = 0; i < lat.parts.size(); ++i) {
        cd prod = static_cast<double>(lat.mu_to_one[i]);
        for (unsigned mask : lat.block_masks[i]) {
            prod *= m(mask);
            if (prod == cd(0.0)) break;
        }
        acc += prod;
    }
    return acc;
}

BMatrix eval_cumulant_full(const DecoratedTuple& t, const MomentEngine& eng) {
    int n = t.shape.size();
    int d = t.d();
    if (eng.scalar_fast_path && d == 1) {
        cd factor = 1.0;
        DecoratedTuple bare = t;
        for (auto& e : bare.entries) {
            if (e.pre.size()) factor *= e.pre(0, 0);
            if (e.post.size()) factor *= e.post(0, 0);
            e.pre = identity(1);
            e.post = identity(1);
        }
        cd k = scalar_cumulant_from_moments(bare.shape, [&](unsigned mask) {
            std::vector<int> pos;
            for (int p = 0; p < n; ++p)
                if (mask >> p & 1u) pos.push_back(p);
            return eng.full(bare.sub(pos))(0, 0);
        });
        BMatrix out(1, 1);
        out(0, 0) = factor * k;
        return out;
    }
    const Lattice& lat = lattice(t.shape);
    std::unordered_map<std::string, BMatrix> memo;
    PosLeaf leaf = [&](const std::vector<int>& positions, const DecoratedTuple& sub) -> BMatrix {
        std::string key;
        for (int p : positions) key.push_back(static_cast<char>(p));
        for (const auto& e : sub.entries) {
            append_bytes(key, e.pre);
            append_bytes(key, e.post);
        }
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        BMatrix v = eng.full(sub);
        memo.emplace(std::move(key), v);
        return v;
    };
    BMatrix acc = zeros(d);
    for (size_t i = 0; i < lat.parts.size(); ++i) {
        if (lat.mu_to_one[i] == 0) continue;
        acc += static_cast<double>(lat.mu_to_one[i]) * reduce_impl(lat.parts[i].labels(), t, leaf, eng.schedule);
    }
    return acc;
}

BMatrix eval_cumulant_pi(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng) {
    if (pi.num_blocks() == 1) return eval_cumulant_full(t, eng);
    BMatrix acc = zeros(t.d());
    for (const auto& sigma : partitions_below(pi)) {
        MobiusValue mu = mobius(sigma, pi);
        if (mu == 0) continue;
        acc += static_cast<double>(mu) * eval_moment_pi(sigma, t, eng);
    }
    return acc;
}

BMatrix eval_cumulant_pi_reduced(const BncPartition& pi, const DecoratedTuple& t, const MomentEngine& eng) {
    return reduce_bimultiplicative(pi, t, [&](const DecoratedTuple& sub) { return eval_cumulant_full(sub, eng); },
                                   eng.schedule);
}

BMatrix moments_from_cumulants(const BncPartition& sigma, const DecoratedTuple& t, const MomentEngine& eng) {
    BMatrix acc = zeros(t.d());
    for (const auto& pi : partitions_below(sigma)) acc += eval_cumulant_pi_reduced(pi, t, eng);
    return acc;
}

ProductsResult cumulant_of_products(const HatEmbedding& emb, const DecoratedTuple& inner, const MomentEngine& eng) {
    if (!(emb.inner() == inner.shape)) throw PartitionError("cumulant_of_products: inner shape mismatch");
    int d = inner.d();
    DecoratedTuple outer{emb.outer(), {}};
    for (int p = 0; p < emb.outer().size(); ++p) {
        OpElement prod = OpElement::identity(d);
        for (int q : emb.group(p)) prod = prod * realize(inner.entries[q], inner.shape.tag(q));
        outer.entries.push_back(plain_entry(prod));
    }
    ProductsResult r;
    r.lhs = eval_cumulant_full(outer, eng);
    r.rhs = zeros(d);
    BncPartition zhat = emb.zero_hat();
    BncPartition one = BncPartition::one(inner.shape);
    for (const auto& sigma : enumerate_bnc(inner.shape))
        if (join(sigma, zhat) == one) r.rhs += eval_cumulant_pi_reduced(sigma, inner, eng);
    r.difference = max_abs_diff(r.lhs, r.rhs);
    return r;
}

cd scalar_moment(const std::vector<const FockOp*>& ops) {
    bool mono = std::all_of(ops.begin(), ops.end(), [](const FockOp* x) { return x->terms().size() == 1; });
    if (mono) {
        FockVec v = vacuum_vector();
        FockVec next;
        for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
            const auto& term = (*it)->terms().front();
            next.clear();
            apply_letters(term.letters, (*it)->depth(), term.coef, v, next);
            if (next.empty()) return 0.0;
            v.swap(next);
        }
        return vacuum_coefficient(v);
    }
    FockVec v = vacuum_vector();
    for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
        if ((*it)->is_zero()) return 0.0;
        v = (*it)->apply(v);
        if (v.empty()) return 0.0;
    }
    return vacuum_coefficient(v);
}

cd scalar_cumulant(const ChiShape& shape, const std::vector<const FockOp*>& ops) {
    for (const FockOp* x : ops)
        if (x->is_zero()) return 0.0;
    int n = shape.size();
    return scalar_cumulant_from_moments(shape, [&](unsigned mask) {
        std::vector<const FockOp*> sub;
        for (int p = 0; p < n; ++p)
            if (mask >> p & 1u) sub.push_back(ops[p]);
        return scalar_moment(sub);
    });
}

GeneratorSet GeneratorSet::from_family(const TwoFacedFamily& fam) {
    GeneratorSet z;
    z.d = fam.d;
    for (const auto& g : fam.left) {
        z.gens.push_back(g);
        z.sides.push_back(Side::L);
    }
    for (const auto& g : fam.right) {
        z.gens.push_back(g);
        z.sides.push_back(Side::R);
    }
    return z;
}

DecoratedTuple kappa_Z_omega_tuple(const GeneratorSet& z, const std::vector<int>& omega, const std::vector<BMatrix>& bs) {
    int n = static_cast<int>(omega.size());
    if (n == 0) throw std::invalid_argument("omega must be non-empty");
    if (static_cast<int>(bs.size()) != n - 1) throw std::invalid_argument("kappa_Z_omega needs n-1 B-arguments");
    std::vector<Side> tags;
    for (int w : omega) {
        if (w < 0 || w >= z.size()) throw std::invalid_argument("omega letter out of range");
        tags.push_back(z.sides[w]);
    }
    DecoratedTuple t{ChiShape(tags), {}};
    for (int w : omega) t.entries.push_back(plain_entry(z.gens[w].second));
    bool all_same = std::all_of(tags.begin(), tags.end(), [&](Side s) { return s == tags.front(); });
    if (all_same) {
        for (int k = 1; k < n; ++k) t.entries[k].pre = bs[k - 1];
        return t;
    }
    // 0-based: k0 is the first slot whose side differs from slot 0
    int k0 = 1;
    while (tags[k0] == tags[0]) ++k0;
    for (int k = 1; k < k0; ++k) t.entries[k].pre = bs[k - 1];
    for (int k = k0 + 1; k < n; ++k) t.entries[k].pre = bs[k - 2];
    t.entries[n - 1].post = bs[n - 2];
    return t;
}

BMatrix kappa_Z_omega(const GeneratorSet& z, const std::vector<int>& omega, const std::vector<BMatrix>& bs,
                      const MomentEngine& eng) {
    return eval_cumulant_full(kappa_Z_omega_tuple(z, omega, bs), eng);
}

namespace {

// Random product of tuple entries, realized as an operator.
OpElement random_word(const DecoratedTuple& t, std::mt19937_64& rng) {
    int d = t.d();
    OpElement w = OpElement::identity(d);
    int len = static_cast<int>(rng() % 3);
    for (int i = 0; i < len; ++i) {
        int q = static_cast<int>(rng() % t.shape.size());
        w = w * realize(t.entries[q], t.shape.tag(q));
    }
    if (rng() % 2) w = w * OpElement::Lb(random_square(rng, d, 0.5));
    if (rng() % 2) w = OpElement::Rb(random_square(rng, d, 0.5)) * w;
    return w;
}

}  // namespace

LemmaCheck verify_interchange(const DecoratedTuple& t, int k0, std::mt19937_64& rng, double hyp_tol, const MomentEngine& eng) {
    int n = t.shape.size();
    if (k0 < 0 || k0 + 1 >= n || t.shape.tag(k0) != Side::L || t.shape.tag(k0 + 1) != Side::R)
        throw std::invalid_argument("interchange needs a left slot followed by a right slot");
    LemmaCheck out;
    OpElement x = realize(t.entries[k0], Side::L);
    OpElement y = realize(t.entries[k0 + 1], Side::R);
    for (int probe = 0; probe < 4; ++probe) {
        OpElement z = random_word(t, rng), z2 = random_word(t, rng);
        out.hypothesis_residual =
            std::max(out.hypothesis_residual, max_abs_diff(expectation(z * x * y * z2), expectation(z * y * x * z2)));
    }
    out.hypothesis_ok = out.hypothesis_residual <= hyp_tol;
    std::vector<Side> tags = t.shape.tags();
    std::swap(tags[k0], tags[k0 + 1]);
    DecoratedTuple swapped = t;
    swapped.shape = ChiShape(tags);
    std::swap(swapped.entries[k0], swapped.entries[k0 + 1]);
    out.residual = max_abs_diff(eval_cumulant_full(t, eng), eval_cumulant_full(swapped, eng));
    return out;
}

LemmaCheck verify_tail_swap(const DecoratedTuple& t, const OpElement& y, std::mt19937_64& rng, double hyp_tol,
                            const MomentEngine& eng) {
    int n = t.shape.size();
    if (t.shape.tag(n - 1) != Side::L) throw std::invalid_argument("tail swap needs a final left slot");
    LemmaCheck out;
    OpElement x = realize(t.entries[n - 1], Side::L);
    for (int probe = 0; probe < 4; ++probe) {
        OpElement z = random_word(t, rng);
        out.hypothesis_residual = std::max(out.hypothesis_residual, max_abs_diff(expectation(z * x), expectation(z * y)));
    }
    out.hypothesis_ok = out.hypothesis_residual <= hyp_tol;
    std::vector<Side> tags = t.shape.tags();
    tags[n - 1] = Side::R;
    DecoratedTuple swapped = t;
    swapped.shape = ChiShape(tags);
    swapped.entries[n - 1] = plain_entry(y);
    out.residual = max_abs_diff(eval_cumulant_full(t, eng), eval_cumulant_full(swapped, eng));
    return out;
}

SpecifiedFamily::SpecifiedFamily(CumulantSpec spec) : spec_(std::move(spec)) {
    if (!spec_.theta) throw std::invalid_argument("cumulant spec needs a theta callback");
}

BMatrix SpecifiedFamily::kappa_leaf(const DecoratedTuple& t) const {
    int n = t.shape.size();
    int d = spec_.d;
    if (n > spec_.max_order) return zeros(d);
    std::vector<int> omega;
    for (const auto& e : t.entries) omega.push_back(e.symbol);
    std::vector<BMatrix> fpre(n), fpost(n);
    for (int q = 0; q < n; ++q) {
        int p = t.shape.s()[q];
        const auto& e = t.entries[p];
        BMatrix pre = e.pre.size() ? e.pre : identity(d);
        BMatrix post = e.post.size() ? e.post : identity(d);
        bool left = t.shape.tag(p) == Side::L;
        fpre[q] = left ? pre : post;
        fpost[q] = left ? post : pre;
    }
    std::vector<BMatrix> between;
    for (int q = 0; q + 1 < n; ++q) between.push_back(fpost[q] * fpre[q + 1]);
    return fpre[0] * spec_.theta(omega, t.shape, between) * fpost[n - 1];
}

BMatrix SpecifiedFamily::moment(const DecoratedTuple& t) const {
    BMatrix acc = zeros(spec_.d);
    Leaf leaf = [this](const DecoratedTuple& sub) { return kappa_leaf(sub); };
    for (const auto& pi : lattice(t.shape).parts) acc += reduce_bimultiplicative(pi, t, leaf);
    return acc;
}

MomentEngine SpecifiedFamily::engine() const {
    MomentEngine eng;
    eng.full_moment = [this](const DecoratedTuple& t) { return moment(t); };
    return eng;
}

DecoratedTuple SpecifiedFamily::tuple(const std::vector<int>& symbols, const std::vector<BMatrix>& pre,
                                      const std::vector<BMatrix>& post) const {
    std::vector<Side> tags;
    DecoratedTuple t;
    for (size_t i = 0; i < symbols.size(); ++i) {
        tags.push_back(spec_.sides.at(symbols[i]));
        DecoratedEntry e{OpElement::zero(spec_.d), pre.empty() ? identity(spec_.d) : pre[i],
                         post.empty() ? identity(spec_.d) : post[i], symbols[i]};
        t.entries.push_back(std::move(e));
    }
    t.shape = ChiShape(tags);
    return t;
}

double SpecifiedFamily::multilinearity_probe(std::mt19937_64& rng, int order) const {
    int d = spec_.d;
    int ns = static_cast<int>(spec_.sides.size());
    double worst = 0;
    for (int trial = 0; trial < 3 && order >= 2; ++trial) {
        std::vector<int> omega;
        std::vector<Side> tags;
        for (int k = 0; k < order; ++k) {
            omega.push_back(static_cast<int>(rng() % ns));
            tags.push_back(spec_.sides[omega.back()]);
        }
        ChiShape shape(tags);
        std::vector<BMatrix> a;
        for (int k = 0; k + 1 < order; ++k) a.push_back(random_square(rng, d, 0.5));
        int slot = static_cast<int>(rng() % (order - 1));
        BMatrix c = random_square(rng, d, 0.5);
        auto at = [&](const BMatrix& x) {
            auto args = a;
            args[slot] = x;
            return spec_.theta(omega, shape, args);
        };
        worst = std::max(worst, max_abs(at(a[slot] + c) - at(a[slot]) - at(c)));
        worst = std::max(worst, max_abs(at(2.0 * a[slot]) - 2.0 * at(a[slot])));
    }
    return worst;
}

}  // namespace bifree
