#include "bifree/operators.hpp"

#include <algorithm>
#include <cmath>

namespace bifree {

MatA0 MatA0::diagonal(const std::vector<FockOp>& xs) {
    MatA0 m(static_cast<int>(xs.size()));
    for (int i = 0; i < m.d; ++i) m.at(i, i) = xs[i];
    return m;
}

MatA0 MatA0::adjoint() const {
    MatA0 m(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.at(i, j) = at(j, i).adjoint();
    return m;
}

State State::identity(int d) {
    State s{d, std::vector<FockVec>(static_cast<size_t>(d * d))};
    for (int i = 0; i < d; ++i) s.at(i, i) = vacuum_vector();
    return s;
}

BMatrix State::vacuum() const {
    BMatrix out(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out(i, j) = vacuum_coefficient(at(i, j));
    return out;
}

State State::operator+(const State& o) const {
    State out{d, std::vector<FockVec>(v.size())};
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = fock_combine({{cd(1.0), &v[i]}, {cd(1.0), &o.v[i]}});
    return out;
}

State State::scaled(cd s) const {
    State out = *this;
    for (auto& fv : out.v) {
        for (auto& e : fv) e.second *= s;
        if (s == cd(0.0)) fv.clear();
    }
    return out;
}

State apply_atom(const Atom& a, const State& s) {
    int d = s.d;
    State out{d, std::vector<FockVec>(static_cast<size_t>(d * d))};
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            FockVec raw;
            for (int k = 0; k < d; ++k) {
                switch (a.kind) {
                    case AtomKind::LeftMul: {
                        const FockOp& z = a.z->at(i, k);
                        for (const auto& t : z.terms()) apply_letters(t.letters, z.depth(), t.coef, s.at(k, j), raw);
                        break;
                    }
                    case AtomKind::RightMul: {
                        const FockOp& z = a.z->at(k, j);
                        for (const auto& t : z.terms()) apply_letters(t.letters, z.depth(), t.coef, s.at(i, k), raw);
                        break;
                    }
                    case AtomKind::LeftB: {
                        cd c = a.b(i, k);
                        if (c != cd(0.0))
                            for (const auto& e : s.at(k, j)) raw.emplace_back(e.first, c * e.second);
                        break;
                    }
                    case AtomKind::RightB: {
                        cd c = a.b(k, j);
                        if (c != cd(0.0))
                            for (const auto& e : s.at(i, k)) raw.emplace_back(e.first, c * e.second);
                        break;
                    }
                }
            }
            fock_normalize(raw);
            out.at(i, j) = std::move(raw);
        }
    return out;
}

OpElement OpElement::identity(int d) {
    OpElement x(d);
    x.terms_.push_back({cd(1.0), {}});
    return x;
}

OpElement OpElement::Lb(const BMatrix& b) {
    OpElement x(static_cast<int>(b.rows()));
    x.terms_.push_back({cd(1.0), {std::make_shared<const Atom>(Atom{AtomKind::LeftB, nullptr, b})}});
    return x;
}

OpElement OpElement::Rb(const BMatrix& b) {
    OpElement x(static_cast<int>(b.rows()));
    x.terms_.push_back({cd(1.0), {std::make_shared<const Atom>(Atom{AtomKind::RightB, nullptr, b})}});
    return x;
}

OpElement OpElement::L(const MatA0& z) {
    OpElement x(z.d);
    x.terms_.push_back({cd(1.0), {std::make_shared<const Atom>(Atom{AtomKind::LeftMul, std::make_shared<MatA0>(z), {}})}});
    return x;
}

OpElement OpElement::R(const MatA0& z) {
    OpElement x(z.d);
    x.terms_.push_back({cd(1.0), {std::make_shared<const Atom>(Atom{AtomKind::RightMul, std::make_shared<MatA0>(z), {}})}});
    return x;
}

OpElement OpElement::operator+(const OpElement& o) const {
    OpElement x(std::max(d_, o.d_));
    x.terms_ = terms_;
    x.terms_.insert(x.terms_.end(), o.terms_.begin(), o.terms_.end());
    return x;
}

OpElement OpElement::operator*(const OpElement& o) const {
    OpElement x(std::max(d_, o.d_));
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            Term t{a.coef * b.coef, a.atoms};
            t.atoms.insert(t.atoms.end(), b.atoms.begin(), b.atoms.end());
            x.terms_.push_back(std::move(t));
        }
    return x;
}

OpElement OpElement::operator*(cd s) const {
    OpElement x(d_);
    if (s == cd(0.0)) return x;
    x.terms_ = terms_;
    for (auto& t : x.terms_) t.coef *= s;
    return x;
}

State OpElement::apply(const State& s) const {
    State acc{s.d, std::vector<FockVec>(s.v.size())};
    std::vector<FockVec> raw(s.v.size());
    for (const auto& t : terms_) {
        State cur = s;
        for (auto it = t.atoms.rbegin(); it != t.atoms.rend(); ++it) cur = apply_atom(**it, cur);
        for (size_t i = 0; i < cur.v.size(); ++i)
            for (const auto& e : cur.v[i]) raw[i].emplace_back(e.first, t.coef * e.second);
    }
    for (size_t i = 0; i < raw.size(); ++i) {
        fock_normalize(raw[i]);
        acc.v[i] = std::move(raw[i]);
    }
    return acc;
}

BMatrix expectation(const OpElement& x) { return x.apply(State::identity(x.d())).vacuum(); }

OpElement shift(const OpElement& x, const BMatrix& b, Side side) {
    return x + (side == Side::L ? OpElement::Lb(b) : OpElement::Rb(b));
}

State random_state(std::mt19937_64& rng, int d, int k, int max_len) {
    State s{d, std::vector<FockVec>(static_cast<size_t>(d * d))};
    for (auto& fv : s.v) {
        for (int t = 0; t < 4; ++t) {
            int len = static_cast<int>(rng() % static_cast<unsigned>(max_len + 1));
            std::uint64_t code = 0;
            for (int q = 0; q < len; ++q) code |= static_cast<std::uint64_t>(1 + rng() % k) << (4 * q);
            fv.emplace_back(code, cd(uniform(rng, -1, 1), uniform(rng, -1, 1)));
        }
        fock_normalize(fv);
    }
    return s;
}

double state_distance(const State& a, const State& b) {
    double m = 0;
    for (size_t i = 0; i < a.v.size(); ++i) m = std::max(m, fock_norm_inf(fock_combine({{cd(1.0), &a.v[i]}, {cd(-1.0), &b.v[i]}})));
    return m;
}

FamilyProbeReport probe_family(const TwoFacedFamily& fam, std::mt19937_64& rng, int k, int draws) {
    FamilyProbeReport rep;
    int d = fam.d;
    for (int t = 0; t < draws; ++t) {
        BMatrix b1 = random_square(rng, d, 0.5), b2 = random_square(rng, d, 0.5);
        State probe = random_state(rng, d, k, 2);
        auto lb = OpElement::Lb(b1), rb = OpElement::Rb(b1);
        for (const auto& [name, z] : fam.left)
            rep.left_commutation = std::max(rep.left_commutation, state_distance((z * rb).apply(probe), (rb * z).apply(probe)));
        for (const auto& [name, z] : fam.right)
            rep.right_commutation = std::max(rep.right_commutation, state_distance((z * lb).apply(probe), (lb * z).apply(probe)));
        for (const auto* side : {&fam.left, &fam.right})
            for (const auto& [name, z] : *side) {
                BMatrix ez = expectation(z);
                rep.bimodule = std::max(rep.bimodule, max_abs_diff(expectation(OpElement::Lb(b1) * OpElement::Rb(b2) * z), b1 * ez * b2));
                rep.lr_agreement = std::max(rep.lr_agreement, max_abs_diff(expectation(z * OpElement::Lb(b2)), expectation(z * OpElement::Rb(b2))));
            }
    }
    return rep;
}

}  // namespace bifree
