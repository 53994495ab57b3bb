#include "bifree/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <sstream>

namespace bifree {

FockSpace::FockSpace(int k_, int depth_) : k(k_), depth(depth_) {
    if (k < 1 || k > max_generators) throw CapError("Fock space supports 1..15 generators, got " + std::to_string(k));
    if (depth < 1 || depth > max_depth) throw CapError("Fock depth must be in 1..15, got " + std::to_string(depth));
}

double FockSpace::dimension() const {
    double n = 0, p = 1;
    for (int j = 0; j <= depth; ++j, p *= k) n += p;
    return n;
}

FockVec vacuum_vector() { return FockVec{{0u, cd(1.0)}}; }

cd vacuum_coefficient(const FockVec& v) {
    if (!v.empty() && v.front().first == 0u) return v.front().second;
    return cd(0.0);
}

int word_length(std::uint64_t code) { return (std::bit_width(code) + 3) / 4; }

std::string word_string(std::uint64_t code) {
    if (code == 0) return "Omega";
    std::ostringstream os;
    bool first = true;
    while (code) {
        if (!first) os << '.';
        os << 'h' << (code & 15u);
        code >>= 4;
        first = false;
    }
    return os.str();
}

namespace {

void sort_merge(FockVec& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t w = 0;
    for (size_t i = 0; i < v.size();) {
        std::uint64_t code = v[i].first;
        cd acc = 0.0;
        while (i < v.size() && v[i].first == code) acc += v[i++].second;
        if (acc != cd(0.0)) v[w++] = {code, acc};
    }
    v.resize(w);
}

inline bool apply_letter(Letter a, int depth, std::uint64_t& code) {
    switch (a.kind) {
        case LetterKind::L:
            if (word_length(code) >= depth) return false;
            code = (code << 4) | a.gen;
            return true;
        case LetterKind::LStar:
            if ((code & 15u) != a.gen) return false;
            code >>= 4;
            return true;
        case LetterKind::R: {
            int len = word_length(code);
            if (len >= depth) return false;
            code |= static_cast<std::uint64_t>(a.gen) << (4 * len);
            return true;
        }
        case LetterKind::RStar: {
            int len = word_length(code);
            if (len == 0) return false;
            std::uint64_t top = (code >> (4 * (len - 1))) & 15u;
            if (top != a.gen) return false;
            code &= ~(static_cast<std::uint64_t>(15u) << (4 * (len - 1)));
            return true;
        }
    }
    return false;
}

}  // namespace

void fock_normalize(FockVec& v) { sort_merge(v); }

FockVec fock_combine(const std::vector<std::pair<cd, const FockVec*>>& parts) {
    FockVec out;
    size_t total = 0;
    for (const auto& [c, v] : parts) total += v->size();
    out.reserve(total);
    for (const auto& [c, v] : parts) {
        if (c == cd(0.0)) continue;
        for (const auto& [code, x] : *v) out.emplace_back(code, c * x);
    }
    sort_merge(out);
    return out;
}

double fock_norm_inf(const FockVec& v) {
    double m = 0;
    for (const auto& e : v) m = std::max(m, std::abs(e.second));
    return m;
}

void apply_letters(const std::vector<Letter>& letters, int depth, cd coef, const FockVec& v, FockVec& out) {
    for (const auto& [code0, x] : v) {
        std::uint64_t code = code0;
        bool alive = true;
        for (auto it = letters.rbegin(); it != letters.rend() && alive; ++it) alive = apply_letter(*it, depth, code);
        if (alive) out.emplace_back(code, coef * x);
    }
}

FockOp FockOp::identity(int depth) {
    FockOp op(depth);
    op.terms_.push_back({cd(1.0), {}});
    return op;
}

FockOp FockOp::letter(int depth, LetterKind kind, int gen) {
    if (gen < 1 || gen > FockSpace::max_generators) throw CapError("generator index out of range");
    FockOp op(depth);
    op.terms_.push_back({cd(1.0), {Letter{kind, static_cast<std::uint8_t>(gen)}}});
    return op;
}

int FockOp::degree() const {
    int d = 0;
    for (const auto& t : terms_) d = std::max(d, static_cast<int>(t.letters.size()));
    return d;
}

void FockOp::simplify() {
    std::map<std::vector<Letter>, cd> acc;
    std::vector<std::vector<Letter>> order;
    for (const auto& t : terms_) {
        auto it = acc.find(t.letters);
        if (it == acc.end()) {
            acc.emplace(t.letters, t.coef);
            order.push_back(t.letters);
        } else {
            it->second += t.coef;
        }
    }
    terms_.clear();
    for (const auto& w : order) {
        cd c = acc[w];
        if (c != cd(0.0)) terms_.push_back({c, w});
    }
}

FockOp FockOp::operator+(const FockOp& o) const {
    FockOp out(std::max(depth_, o.depth_));
    out.terms_ = terms_;
    out.terms_.insert(out.terms_.end(), o.terms_.begin(), o.terms_.end());
    out.simplify();
    return out;
}

FockOp FockOp::operator*(const FockOp& o) const {
    FockOp out(std::max(depth_, o.depth_));
    for (const auto& a : terms_)
        for (const auto& b : o.terms_) {
            Term t{a.coef * b.coef, a.letters};
            t.letters.insert(t.letters.end(), b.letters.begin(), b.letters.end());
            out.terms_.push_back(std::move(t));
        }
    out.simplify();
    return out;
}

FockOp FockOp::operator*(cd s) const {
    FockOp out(depth_);
    if (s == cd(0.0)) return out;
    out.terms_ = terms_;
    for (auto& t : out.terms_) t.coef *= s;
    return out;
}

FockOp FockOp::adjoint() const {
    FockOp out(depth_);
    for (const auto& t : terms_) {
        Term a{std::conj(t.coef), {}};
        for (auto it = t.letters.rbegin(); it != t.letters.rend(); ++it) {
            Letter l = *it;
            switch (l.kind) {
                case LetterKind::L: l.kind = LetterKind::LStar; break;
                case LetterKind::LStar: l.kind = LetterKind::L; break;
                case LetterKind::R: l.kind = LetterKind::RStar; break;
                case LetterKind::RStar: l.kind = LetterKind::R; break;
            }
            a.letters.push_back(l);
        }
        out.terms_.push_back(std::move(a));
    }
    return out;
}

FockVec FockOp::apply(const FockVec& v) const {
    FockVec out;
    for (const auto& t : terms_) apply_letters(t.letters, depth_, t.coef, v, out);
    sort_merge(out);
    return out;
}

std::string FockOp::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    static const char* names[] = {"l", "l*", "r", "r*"};
    for (size_t i = 0; i < terms_.size(); ++i) {
        if (i) os << " + ";
        os << '(' << terms_[i].coef.real();
        if (terms_[i].coef.imag() != 0) os << (terms_[i].coef.imag() > 0 ? "+" : "") << terms_[i].coef.imag() << 'i';
        os << ')';
        if (terms_[i].letters.empty()) os << "1";
        for (const auto& l : terms_[i].letters) os << ' ' << names[static_cast<int>(l.kind)] << int(l.gen);
    }
    return os.str();
}

}  // namespace bifree
