#include "bifree/models.hpp"

#include <algorithm>
#include <map>

namespace bifree {

FockOp polynomial_element(int depth, int gen, const std::vector<cd>& coeffs, Side side) {
    bool left = side == Side::L;
    FockOp x = left ? FockOp::lstar(depth, gen) : FockOp::rstar(depth, gen);
    FockOp create = left ? FockOp::l(depth, gen) : FockOp::r(depth, gen);
    FockOp power = FockOp::identity(depth);
    for (const cd& a : coeffs) {
        if (a != cd(0.0)) x = x + power * a;
        power = power * create;
    }
    return x;
}

std::vector<TwoFacedFamily> scalar_pairs(int depth, const std::vector<ScalarPairSpec>& specs, bool shared) {
    std::vector<TwoFacedFamily> out;
    for (size_t p = 0; p < specs.size(); ++p) {
        int gen = shared ? 1 : static_cast<int>(p) + 1;
        TwoFacedFamily f;
        f.name = "pair" + std::to_string(p + 1);
        f.d = 1;
        f.left.push_back({"X" + std::to_string(p + 1), OpElement::L(MatA0::scalar(polynomial_element(depth, gen, specs[p].left, Side::L)))});
        f.right.push_back({"Y" + std::to_string(p + 1), OpElement::R(MatA0::scalar(polynomial_element(depth, gen, specs[p].right, Side::R)))});
        out.push_back(std::move(f));
    }
    return out;
}

TwoFacedFamily MatrixPair::family(const std::string& name) const {
    TwoFacedFamily f;
    f.name = name;
    f.d = d;
    for (int w = 0; w < size(); ++w) (sides[w] == Side::L ? f.left : f.right).push_back({names[w], realize(w)});
    return f;
}

std::vector<TwoFacedFamily> matrix_lift_pairs(int d, int depth, int pairs, std::mt19937_64& rng) {
    std::vector<TwoFacedFamily> out;
    for (int p = 0; p < pairs; ++p) {
        MatrixPair m;
        m.d = d;
        m.names = {"X" + std::to_string(p + 1), "Y" + std::to_string(p + 1)};
        m.sides = {Side::L, Side::R};
        for (Side side : {Side::L, Side::R}) {
            MatA0 z(d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    std::vector<cd> coeffs;
                    for (int k = 0; k < 3; ++k) coeffs.emplace_back(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
                    z.at(i, j) = polynomial_element(depth, p + 1, coeffs, side) * cd(uniform(rng, 0.5, 1.0));
                }
            m.mats.push_back(std::move(z));
        }
        out.push_back(m.family("pair" + std::to_string(p + 1)));
    }
    return out;
}

std::vector<TwoFacedFamily> shifted_pairs(int d, int depth, int pairs, double scale, double shift,
                                          std::mt19937_64& rng) {
    std::vector<TwoFacedFamily> out;
    for (int p = 0; p < pairs; ++p) {
        TwoFacedFamily fam;
        fam.name = "pair" + std::to_string(p + 1);
        fam.d = d;
        for (Side side : {Side::L, Side::R}) {
            MatA0 z(d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    cd t(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
                    z.at(i, j) = polynomial_element(depth, p + 1, {0.0, t}, side) * cd(scale * uniform(rng, 0.5, 1.0));
                }
            BMatrix mean = invertible_mean(rng, d, shift);
            if (side == Side::L)
                fam.left.emplace_back("X" + std::to_string(p + 1), OpElement::L(z) + OpElement::Lb(mean));
            else
                fam.right.emplace_back("Y" + std::to_string(p + 1), OpElement::R(z) + OpElement::Rb(mean));
        }
        out.push_back(std::move(fam));
    }
    return out;
}

MatrixPair diagonal_pair(int depth, const std::vector<ScalarPairSpec>& specs) {
    int d = static_cast<int>(specs.size());
    std::vector<FockOp> xs, ys;
    for (int k = 0; k < d; ++k) {
        xs.push_back(polynomial_element(depth, k + 1, specs[k].left, Side::L));
        ys.push_back(polynomial_element(depth, k + 1, specs[k].right, Side::R));
    }
    return MatrixPair{d, {"Zl", "Zr"}, {Side::L, Side::R}, {MatA0::diagonal(xs), MatA0::diagonal(ys)}};
}

MatrixPair creation_example(int d, int K, int depth, bool perturb) {
    if (K * d * d > FockSpace::max_generators) throw CapError("creation example needs more than 15 generators");
    MatrixPair m;
    m.d = d;
    auto gen = [&](int k, int i, int j) { return 1 + k * d * d + i * d + j; };
    for (int k = 0; k < K; ++k) {
        std::string s = std::to_string(k + 1);
        MatA0 a(d), b(d), c(d), e(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                a.at(i, j) = FockOp::l(depth, gen(k, i, j));
                b.at(i, j) = FockOp::lstar(depth, gen(k, j, i));
                c.at(i, j) = FockOp::r(depth, gen(k, i, j));
                e.at(i, j) = FockOp::rstar(depth, gen(k, j, i));
            }
        if (perturb && k == 0 && d >= 2) a.at(0, 1) = a.at(0, 1) + FockOp::l(depth, gen(0, 0, 0));
        m.names.insert(m.names.end(), {"A" + s, "B" + s, "C" + s, "D" + s});
        m.sides.insert(m.sides.end(), {Side::L, Side::L, Side::R, Side::R});
        m.mats.insert(m.mats.end(), {a, b, c, e});
    }
    // left matrices first, then right
    std::vector<int> order(m.mats.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return m.sides[x] == Side::L && m.sides[y] == Side::R; });
    MatrixPair sorted{d, {}, {}, {}};
    for (int w : order) {
        sorted.names.push_back(m.names[w]);
        sorted.sides.push_back(m.sides[w]);
        sorted.mats.push_back(m.mats[w]);
    }
    return sorted;
}

FockEntrySource::FockEntrySource(MatrixPair pair) : pair_(std::move(pair)) {}

bool FockEntrySource::is_zero(const EntryRef& e) const { return pair_.mats[e.w].at(e.i, e.j).is_zero(); }

bool FockEntrySource::charge(const EntryRef& e, std::vector<int>& out) const {
    const FockOp& x = pair_.mats[e.w].at(e.i, e.j);
    out.assign(FockSpace::max_generators + 1, 0);
    bool first = true;
    for (const auto& t : x.terms()) {
        std::vector<int> c(FockSpace::max_generators + 1, 0);
        for (const auto& l : t.letters) {
            bool create = l.kind == LetterKind::L || l.kind == LetterKind::R;
            c[l.gen] += create ? 1 : -1;
        }
        if (first) out = c;
        else if (c != out) return false;
        first = false;
    }
    return true;
}

cd FockEntrySource::kappa(const std::vector<EntryRef>& entries) const {
    std::vector<Side> tags;
    std::vector<const FockOp*> ops;
    for (const auto& e : entries) {
        tags.push_back(pair_.sides[e.w]);
        ops.push_back(&pair_.mats[e.w].at(e.i, e.j));
    }
    return scalar_cumulant(ChiShape(tags), ops);
}

SymbolEntrySource::SymbolEntrySource(std::shared_ptr<const SpecifiedFamily> fam, int d, std::vector<std::string> names,
                                     std::vector<Side> sides, std::vector<std::vector<Combination>> entries)
    : fam_(std::move(fam)), d_(d), names_(std::move(names)), sides_(std::move(sides)), entries_(std::move(entries)) {}

cd SymbolEntrySource::kappa(const std::vector<EntryRef>& entries) const {
    int n = static_cast<int>(entries.size());
    std::vector<const Combination*> combos;
    for (const auto& e : entries) {
        combos.push_back(&at(e));
        if (combos.back()->empty()) return 0.0;
    }
    MomentEngine eng = fam_->engine();
    cd acc = 0.0;
    std::vector<size_t> idx(n, 0);
    for (;;) {
        std::vector<int> symbols;
        cd coef = 1.0;
        for (int k = 0; k < n; ++k) {
            symbols.push_back((*combos[k])[idx[k]].first);
            coef *= (*combos[k])[idx[k]].second;
        }
        acc += coef * eval_cumulant_full(fam_->tuple(symbols, {}, {}), eng)(0, 0);
        int k = 0;
        while (k < n && ++idx[k] == combos[k]->size()) idx[k++] = 0;
        if (k == n) break;
    }
    return acc;
}

CumulantSpec r_diagonal_spec(int max_order, double weight) {
    CumulantSpec spec;
    spec.d = 1;
    spec.sides = {Side::L, Side::L, Side::R, Side::R};
    spec.names = {"X", "X*", "Y", "Y*"};
    spec.max_order = max_order;
    spec.theta = [weight](const std::vector<int>& omega, const ChiShape& shape, const std::vector<BMatrix>& between) {
        BMatrix out = zeros(1);
        int n = shape.size();
        if (n % 2) return out;
        for (int q = 0; q + 1 < n; ++q) {
            int a = omega[shape.s()[q]], b = omega[shape.s()[q + 1]];
            if (a % 2 == b % 2) return out;
            if (a >= 2 && b < 2) return out;
        }
        cd v = std::pow(weight, n);
        for (const auto& b : between) v *= b(0, 0);
        out(0, 0) = v;
        return out;
    };
    return spec;
}

std::unique_ptr<SymbolEntrySource> r_diagonal_pair(int max_order, double weight) {
    auto fam = std::make_shared<const SpecifiedFamily>(r_diagonal_spec(max_order, weight));
    using C = SymbolEntrySource::Combination;
    std::vector<std::vector<C>> entries = {{C{}, C{{0, 1.0}}, C{{1, 1.0}}, C{}}, {C{}, C{{2, 1.0}}, C{{3, 1.0}}, C{}}};
    return std::make_unique<SymbolEntrySource>(fam, 2, std::vector<std::string>{"Zl", "Zr"},
                                               std::vector<Side>{Side::L, Side::R}, std::move(entries));
}

CumulantSpec central_limit_spec(const std::vector<std::vector<cd>>& covariance, int nl) {
    CumulantSpec spec;
    spec.d = 1;
    int k = static_cast<int>(covariance.size());
    for (int s = 0; s < k; ++s) {
        spec.sides.push_back(s < nl ? Side::L : Side::R);
        spec.names.push_back((s < nl ? "s" : "t") + std::to_string(s < nl ? s + 1 : s - nl + 1));
    }
    spec.max_order = 2;
    spec.theta = [covariance](const std::vector<int>& omega, const ChiShape& shape, const std::vector<BMatrix>& between) {
        BMatrix out = zeros(1);
        if (shape.size() == 2) out(0, 0) = covariance[omega[0]][omega[1]] * between[0](0, 0);
        return out;
    };
    return spec;
}

BMatrix invertible_mean(std::mt19937_64& rng, int d, double scale) {
    return identity(d) + scale * random_hermitian(rng, d, 1.0);
}

namespace {

cd parse_complex(const nlohmann::json& j) {
    if (j.is_array()) return {j.at(0).get<double>(), j.at(1).get<double>()};
    return {j.get<double>(), 0.0};
}

nlohmann::json complex_json(const cd& z) {
    if (z.imag() == 0.0) return z.real();
    return nlohmann::json::array({z.real(), z.imag()});
}

std::vector<ScalarPairSpec> default_specs(int pairs) {
    std::vector<ScalarPairSpec> out;
    for (int p = 0; p < pairs; ++p) {
        double t = 0.1 * (p + 1);
        out.push_back({{t, 1.0, 0.5 - t}, {-t, 1.0, t}});
    }
    return out;
}

}  // namespace

ModelSpec ModelSpec::from_json(const nlohmann::json& j) {
    static const std::vector<std::string> kinds = {"scalar_pairs", "shared_generator", "matrix_lift", "creation",
                                                   "creation_perturbed", "diagonal", "r_diagonal",
                                                   "shifted_pairs"};
    ModelSpec m;
    m.kind = j.value("kind", m.kind);
    if (std::find(kinds.begin(), kinds.end(), m.kind) == kinds.end())
        throw std::invalid_argument("unknown model kind: " + m.kind);
    m.d = j.value("d", m.d);
    m.depth = j.value("depth", m.depth);
    m.pairs = j.value("pairs", m.pairs);
    m.K = j.value("K", m.K);
    m.seed = j.value("seed", m.seed);
    m.scale = j.value("scale", m.scale);
    m.shift = j.value("shift", m.shift);
    if (j.contains("specs"))
        for (const auto& s : j.at("specs")) {
            ScalarPairSpec p;
            p.left.clear();
            p.right.clear();
            for (const auto& c : s.at("left")) p.left.push_back(parse_complex(c));
            for (const auto& c : s.at("right")) p.right.push_back(parse_complex(c));
            m.specs.push_back(std::move(p));
        }
    if (m.d < 1 || m.depth < 1 || m.pairs < 1 || m.K < 1) throw std::invalid_argument("model sizes must be positive");
    return m;
}

nlohmann::json ModelSpec::to_json() const {
    nlohmann::json j{{"kind", kind}, {"d", d}, {"depth", depth}, {"pairs", pairs}, {"K", K}, {"seed", seed}};
    if (kind == "shifted_pairs") {
        j["scale"] = scale;
        j["shift"] = shift;
    }
    if (!specs.empty()) {
        j["specs"] = nlohmann::json::array();
        for (const auto& s : specs) {
            nlohmann::json l = nlohmann::json::array(), r = nlohmann::json::array();
            for (const auto& c : s.left) l.push_back(complex_json(c));
            for (const auto& c : s.right) r.push_back(complex_json(c));
            j["specs"].push_back({{"left", l}, {"right", r}});
        }
    }
    return j;
}

std::vector<TwoFacedFamily> build_families(const ModelSpec& m) {
    if (m.kind == "scalar_pairs" || m.kind == "shared_generator")
        return scalar_pairs(m.depth, m.specs.empty() ? default_specs(m.pairs) : m.specs, m.kind == "shared_generator");
    if (m.kind == "matrix_lift") {
        std::mt19937_64 rng(m.seed);
        return matrix_lift_pairs(m.d, m.depth, m.pairs, rng);
    }
    if (m.kind == "creation" || m.kind == "creation_perturbed")
        return {creation_example(m.d, m.K, m.depth, m.kind == "creation_perturbed").family("creation")};
    if (m.kind == "shifted_pairs") {
        std::mt19937_64 rng(m.seed);
        return shifted_pairs(m.d, m.depth, m.pairs, m.scale, m.shift, rng);
    }
    if (m.kind == "diagonal") return {diagonal_pair(m.depth, m.specs.empty() ? default_specs(m.d) : m.specs).family("diagonal")};
    throw std::invalid_argument("model kind has no operator realization: " + m.kind);
}

std::unique_ptr<EntrySource> build_entry_source(const ModelSpec& m) {
    if (m.kind == "creation" || m.kind == "creation_perturbed")
        return std::make_unique<FockEntrySource>(creation_example(m.d, m.K, m.depth, m.kind == "creation_perturbed"));
    if (m.kind == "diagonal")
        return std::make_unique<FockEntrySource>(diagonal_pair(m.depth, m.specs.empty() ? default_specs(m.d) : m.specs));
    if (m.kind == "r_diagonal") return r_diagonal_pair(4);
    throw std::invalid_argument("model kind has no matrix-entry realization: " + m.kind);
}

}  // namespace bifree
