#include "bifree/checks.hpp"

#include <algorithm>
#include <sstream>

#include <Eigen/LU>

namespace bifree {

namespace {

std::string join_ints(const std::vector<int>& xs, int offset = 1) {
    std::string s;
    for (size_t k = 0; k < xs.size(); ++k) {
        if (k) s += ",";
        s += std::to_string(xs[k] + offset);
    }
    return s;
}

// Odometer over {0..base-1}^n; returns false after the last tuple.
bool next_tuple(std::vector<int>& xs, int base) {
    for (size_t k = 0; k < xs.size(); ++k) {
        if (++xs[k] < base) return true;
        xs[k] = 0;
    }
    return false;
}

std::vector<ChiShape> shapes_by_mask(int n) {
    std::vector<ChiShape> out;
    for (unsigned m = 0; m < (1u << n); ++m) {
        std::vector<Side> t;
        for (int p = 0; p < n; ++p) t.push_back((m >> p & 1u) ? Side::R : Side::L);
        out.emplace_back(t);
    }
    return out;
}

}  // namespace

void WitnessList::offer(double residual, const std::function<std::string()>& where) {
    if (items_.size() >= cap_ && residual <= items_.back().residual) return;
    Witness w{where(), residual};
    auto it = std::upper_bound(items_.begin(), items_.end(), w,
                               [](const Witness& a, const Witness& b) { return a.residual > b.residual; });
    items_.insert(it, std::move(w));
    if (items_.size() > cap_) items_.pop_back();
}

nlohmann::json WitnessList::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& w : items_) j.push_back({{"where", w.where}, {"residual", w.residual}});
    return j;
}

nlohmann::json BiFreenessReport::to_json() const {
    nlohmann::json c = nlohmann::json::object();
    for (const auto& [k, v] : cells) c[k] = v;
    return {{"max_order", max_order}, {"tol", tol}, {"evaluated", evaluated}, {"worst", worst},
            {"pass", pass}, {"cells", c}, {"witnesses", witnesses.to_json()}};
}

BiFreenessReport check_bifree(const std::vector<TwoFacedFamily>& families, const CheckOptions& opt) {
    BiFreenessReport rep;
    rep.max_order = opt.max_order;
    rep.tol = opt.tol;
    int nf = static_cast<int>(families.size());
    if (nf < 2) throw std::invalid_argument("check_bifree needs at least two families");
    int d = families.front().d;
    for (const auto& f : families)
        if (f.d != d) throw std::invalid_argument("families must share the coefficient dimension");
    std::mt19937_64 rng(opt.seed);
    for (int n = 2; n <= opt.max_order; ++n) {
        for (const auto& shape : shapes_by_mask(n)) {
            std::vector<int> eps(n, 0);
            do {
                if (std::all_of(eps.begin(), eps.end(), [&](int e) { return e == eps[0]; })) continue;
                std::vector<const std::vector<std::pair<std::string, OpElement>>*> pools;
                bool empty = false;
                for (int p = 0; p < n; ++p) {
                    const auto& f = families[eps[p]];
                    pools.push_back(shape.tag(p) == Side::L ? &f.left : &f.right);
                    if (pools.back()->empty()) empty = true;
                }
                if (empty) continue;
                double cell = 0;
                std::vector<size_t> g(n, 0);
                for (;;) {
                    for (int draw = 0; draw < opt.draws; ++draw) {
                        DecoratedTuple t{shape, {}};
                        for (int p = 0; p < n; ++p) {
                            const OpElement& x = (*pools[p])[g[p]].second;
                            if (draw == 0) t.entries.push_back(plain_entry(x));
                            else t.entries.push_back(decorated_entry(x, random_square(rng, d, opt.scale), random_square(rng, d, opt.scale)));
                        }
                        double r = max_abs(eval_cumulant_full(t));
                        ++rep.evaluated;
                        cell = std::max(cell, r);
                        rep.witnesses.offer(r, [&] {
                            std::string names;
                            for (int p = 0; p < n; ++p) names += (p ? "," : "") + (*pools[p])[g[p]].first;
                            return "chi=" + shape.str() + " eps=" + join_ints(eps) + " gens=" + names + " draw=" + std::to_string(draw);
                        });
                    }
                    int k = 0;
                    while (k < n && ++g[k] == pools[k]->size()) g[k++] = 0;
                    if (k == n) break;
                }
                rep.cells.emplace_back(shape.str() + "|" + join_ints(eps), cell);
            } while (next_tuple(eps, nf));
        }
    }
    rep.worst = rep.witnesses.worst();
    rep.pass = rep.worst <= opt.tol;
    return rep;
}

ExpectationProbe probe_expectation(const ConditionalExpectation& f, int d, std::mt19937_64& rng) {
    ExpectationProbe p;
    p.dimension = d * d;
    for (int t = 0; t < 3; ++t) {
        BMatrix b = random_square(rng, d, 1.0);
        BMatrix fb = f.map(b);
        p.idempotence = std::max(p.idempotence, max_abs_diff(f.map(fb), fb));
        p.range_ok = p.range_ok && f.contains(fb);
        BMatrix d1 = f.map(random_square(rng, d, 1.0)), d2 = f.map(random_square(rng, d, 1.0));
        p.bimodule = std::max(p.bimodule, max_abs_diff(f.map(d1 * b * d2), d1 * fb * d2));
    }
    // linear map b1 -> (F(E_kl b1))_{kl}, as a (d^4) x (d^2) matrix
    Eigen::MatrixXcd m(d * d * d * d, d * d);
    for (int col = 0; col < d * d; ++col) {
        BMatrix b1 = unit(d, col / d, col % d);
        int row = 0;
        for (int k = 0; k < d; ++k)
            for (int l = 0; l < d; ++l) {
                BMatrix v = f.map(unit(d, k, l) * b1);
                for (int i = 0; i < d; ++i)
                    for (int j = 0; j < d; ++j) m(row + i * d + j, col) = v(i, j);
                row += d * d;
            }
    }
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(m);
    lu.setThreshold(1e-12);
    p.faithful_rank = static_cast<int>(lu.rank());
    return p;
}

nlohmann::json OverDReport::to_json() const {
    return {{"max_order", max_order},
            {"tol", tol},
            {"evaluated", evaluated},
            {"worst_condition1", worst_condition1},
            {"worst_condition0", worst_condition0},
            {"probe", {{"idempotence", probe.idempotence}, {"bimodule", probe.bimodule}, {"range_ok", probe.range_ok},
                       {"faithful_rank", probe.faithful_rank}, {"dimension", probe.dimension}}},
            {"pass", pass},
            {"witnesses", witnesses.to_json()}};
}

OverDReport check_bifree_over_D(const TwoFacedFamily& fam, const CheckOptions& opt, const ConditionalExpectation& f) {
    OverDReport rep;
    rep.max_order = opt.max_order;
    rep.tol = opt.tol;
    std::mt19937_64 rng(opt.seed);
    int d = fam.d;
    rep.probe = probe_expectation(f, d, rng);
    if (!rep.probe.ok(1e-12)) throw std::invalid_argument("F is not a faithful conditional expectation: " + f.name);
    GeneratorSet z = GeneratorSet::from_family(fam);
    MomentEngine eb, ed;
    ed.post_map = f.map;
    for (int n = 1; n <= opt.max_order; ++n) {
        std::vector<int> omega(n, 0);
        do {
            int draws = n == 1 ? 1 : opt.draws;
            for (int draw = 0; draw < draws; ++draw) {
                std::vector<BMatrix> bs, fbs;
                for (int k = 0; k + 1 < n; ++k) {
                    bs.push_back(random_square(rng, d, opt.scale));
                    fbs.push_back(f.map(bs.back()));
                }
                BMatrix kb = kappa_Z_omega(z, omega, bs, eb);
                BMatrix kf = kappa_Z_omega(z, omega, fbs, eb);
                BMatrix kd = kappa_Z_omega(z, omega, fbs, ed);
                double r1 = max_abs_diff(kb, f.map(kf));
                double r0 = max_abs_diff(kb, kd);
                ++rep.evaluated;
                rep.worst_condition1 = std::max(rep.worst_condition1, r1);
                rep.worst_condition0 = std::max(rep.worst_condition0, r0);
                rep.witnesses.offer(std::max(r0, r1), [&] {
                    std::string names;
                    for (int k = 0; k < n; ++k) names += (k ? "," : "") + z.gens[omega[k]].first;
                    return "omega=" + names + " draw=" + std::to_string(draw);
                });
            }
        } while (next_tuple(omega, z.size()));
    }
    rep.pass = rep.worst_condition1 <= opt.tol && rep.worst_condition0 <= opt.tol;
    return rep;
}

nlohmann::json RCyclicReport::to_json() const {
    return {{"d", d},           {"max_order", max_order}, {"tol", tol},     {"enumerated", enumerated},
            {"evaluated", evaluated}, {"pruned", pruned},  {"worst", worst}, {"pass", pass},
            {"witnesses", witnesses.to_json()}};
}

bool chain_closes(const ChiShape& shape, const std::vector<int>& is, const std::vector<int>& js) {
    int n = shape.size();
    const auto& s = shape.s();
    for (int q = 0; q < n; ++q)
        if (js[s[q]] != is[s[(q + 1) % n]]) return false;
    return true;
}

RCyclicReport check_r_cyclic(const EntrySource& src, const CheckOptions& opt) {
    RCyclicReport rep;
    rep.d = src.d();
    rep.max_order = opt.max_order;
    rep.tol = opt.tol;
    int d = src.d();
    std::vector<EntryRef> atoms;
    std::vector<std::vector<int>> charges;
    std::vector<bool> has_charge;
    for (int w = 0; w < src.size(); ++w)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                EntryRef e{w, i, j};
                if (src.is_zero(e)) continue;
                atoms.push_back(e);
                std::vector<int> c;
                has_charge.push_back(src.charge(e, c));
                charges.push_back(std::move(c));
            }
    int na = static_cast<int>(atoms.size());
    for (int n = 1; n <= opt.max_order && na > 0; ++n) {
        auto shapes = shapes_by_mask(n);
        std::vector<int> pick(n, 0);
        std::vector<int> is(n), js(n);
        std::vector<EntryRef> refs(n);
        do {
            ++rep.enumerated;
            unsigned mask = 0;
            for (int p = 0; p < n; ++p) {
                refs[p] = atoms[pick[p]];
                is[p] = refs[p].i;
                js[p] = refs[p].j;
                if (src.side(refs[p].w) == Side::R) mask |= 1u << p;
            }
            const ChiShape& shape = shapes[mask];
            if (chain_closes(shape, is, js)) continue;
            bool graded = true;
            for (int p = 0; p < n; ++p) graded = graded && has_charge[pick[p]];
            if (graded) {
                std::vector<int> total(charges[pick[0]].size(), 0);
                for (int p = 0; p < n; ++p)
                    for (size_t g = 0; g < total.size(); ++g) total[g] += charges[pick[p]][g];
                if (std::any_of(total.begin(), total.end(), [](int c) { return c != 0; })) {
                    ++rep.pruned;
                    continue;
                }
            }
            double r = std::abs(src.kappa(refs));
            ++rep.evaluated;
            rep.witnesses.offer(r, [&] {
                std::string names;
                for (int p = 0; p < n; ++p) names += (p ? "," : "") + src.name(refs[p].w);
                return "omega=" + names + " i=" + join_ints(is) + " j=" + join_ints(js);
            });
        } while (next_tuple(pick, na));
    }
    rep.worst = rep.witnesses.worst();
    rep.pass = rep.worst <= opt.tol;
    return rep;
}

BMatrix chi_matrix_unit_product(const ChiShape& shape, int d, const std::vector<int>& is, const std::vector<int>& js) {
    BMatrix out = identity(d);
    for (int q = 0; q < shape.size(); ++q) {
        int p = shape.s()[q];
        out = out * unit(d, is[p], js[p]);
    }
    return out;
}

ExpandResult matrix_cumulant_expand(const MatrixPair& pair, const std::vector<int>& word) {
    int n = static_cast<int>(word.size());
    int d = pair.d;
    std::vector<Side> tags;
    std::vector<OpElement> ops;
    for (int w : word) {
        tags.push_back(pair.sides[w]);
        ops.push_back(pair.realize(w));
    }
    ChiShape shape(tags);
    ExpandResult r;
    r.matrix_level = eval_cumulant_full(bifree::make_tuple(shape, ops));
    r.entrywise = zeros(d);
    FockEntrySource src(pair);
    std::vector<int> idx(2 * n, 0);
    std::vector<int> is(n), js(n);
    std::vector<EntryRef> refs(n);
    do {
        for (int p = 0; p < n; ++p) {
            is[p] = idx[p];
            js[p] = idx[n + p];
            refs[p] = {word[p], is[p], js[p]};
        }
        BMatrix e = chi_matrix_unit_product(shape, d, is, js);
        if (max_abs(e) == 0.0) continue;
        bool zero = false;
        for (const auto& ref : refs) zero = zero || src.is_zero(ref);
        if (zero) continue;
        r.entrywise += src.kappa(refs) * e;
    } while (next_tuple(idx, d));
    r.residual = max_abs_diff(r.matrix_level, r.entrywise);
    return r;
}

DiagonalFormulaResult diagonal_cumulant_formula(const MatrixPair& pair, const std::vector<int>& word,
                                                const std::vector<BMatrix>& lambdas, const std::vector<BMatrix>& gammas) {
    int n = static_cast<int>(word.size());
    int d = pair.d;
    if (static_cast<int>(lambdas.size()) != n || static_cast<int>(gammas.size()) != n)
        throw std::invalid_argument("diagonal formula needs one Lambda and one Gamma per slot");
    for (int k = 0; k < n; ++k)
        if (!is_diagonal(lambdas[k]) || !is_diagonal(gammas[k])) throw std::invalid_argument("decorations must be diagonal");
    std::vector<Side> tags;
    DecoratedTuple t;
    for (int k = 0; k < n; ++k) {
        int w = word[k];
        tags.push_back(pair.sides[w]);
        if (pair.sides[w] == Side::L) t.entries.push_back(decorated_entry(pair.realize(w), lambdas[k], gammas[k]));
        else t.entries.push_back(decorated_entry(pair.realize(w), gammas[k], lambdas[k]));
    }
    t.shape = ChiShape(tags);
    MomentEngine ed;
    ed.post_map = cond_expect_diag;
    DiagonalFormulaResult r;
    r.lhs = eval_cumulant_full(t, ed);
    r.rhs = zeros(d);
    FockEntrySource src(pair);
    const auto& s = t.shape.s();
    std::vector<int> idx(2 * n, 0);
    std::vector<int> is(n), js(n);
    std::vector<EntryRef> refs(n);
    do {
        bool open_chain = true, zero = false;
        for (int p = 0; p < n; ++p) {
            is[p] = idx[p];
            js[p] = idx[n + p];
            refs[p] = {word[p], is[p], js[p]};
            zero = zero || src.is_zero(refs[p]);
        }
        for (int q = 0; q + 1 < n; ++q) open_chain = open_chain && js[s[q]] == is[s[q + 1]];
        if (!open_chain || zero) continue;
        cd k = src.kappa(refs);
        if (js[s[n - 1]] != is[s[0]]) {
            r.hypothesis_residual = std::max(r.hypothesis_residual, std::abs(k));
            continue;
        }
        cd coef = 1.0;
        for (int q = 0; q < n; ++q) coef *= lambdas[q](is[q], is[q]) * gammas[q](js[q], js[q]);
        r.rhs += coef * k * unit(d, is[s[0]], is[s[0]]);
    } while (next_tuple(idx, d));
    r.residual = max_abs_diff(r.lhs, r.rhs);
    return r;
}

}  // namespace bifree
