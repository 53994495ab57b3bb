#include "bifree/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <tuple>

namespace bifree {

namespace {

using Parts = std::vector<BncPartition>;

const Parts& cached_prime(Side side, int n) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, Parts> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(side == Side::L ? 0 : 1, n);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, enumerate_bnc_prime(side, n)).first;
    return it->second;
}

const Parts& cached_t(int n, int m, TClass cls) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, Parts> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, m, static_cast<int>(cls));
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, enumerate_bnc_T(n, m, cls)).first;
    return it->second;
}

const Parts& cached_s(int n, int m, SClass cls) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, int>, Parts> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(n, m, static_cast<int>(cls));
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, enumerate_bnc_S(n, m, cls)).first;
    return it->second;
}

int resolve(const SeriesContext& ctx, int order) { return order < 0 ? ctx.trunc.order : order; }

void check_norm(const SeriesContext& ctx, const BMatrix& v, const char* what) {
    double n = op_norm(v);
    if (n > ctx.trunc.max_norm)
        throw TransformError("norm-too-large", std::string(what) + " has norm " + std::to_string(n) +
                                                   " above the series bound " + std::to_string(ctx.trunc.max_norm));
}

// Accumulates homogeneous parts by degree.
struct Graded {
    std::vector<BMatrix> parts;
    Graded(int degree, int d) : parts(static_cast<size_t>(degree + 1), zeros(d)) {}
    void add(int k, const BMatrix& v) { parts[static_cast<size_t>(k)] += v; }
    SeriesValue finish(double rho, const BMatrix& constant) const {
        SeriesValue s;
        s.value = constant;
        s.order = static_cast<int>(parts.size()) - 1;
        for (const auto& p : parts) {
            s.value += p;
            s.term_norms.push_back(op_norm(p));
        }
        s.tail = tail_estimate(s.term_norms, rho);
        return s;
    }
};

BMatrix inv_checked(const BMatrix& b, const char* what, double max_cond = 1e12) {
    try {
        return inverse(b, max_cond);
    } catch (const SingularMatrixError& e) {
        throw TransformError("singular-point", std::string(what) + " is not invertible (condition " +
                                                   std::to_string(e.condition) + ")");
    }
}

// One-sided cumulant tuple: k entries op decorated by v; the first entry is bare when bare_first.
DecoratedTuple one_sided_tuple(Side side, const OpElement& op, const BMatrix& v, int k, bool bare_first) {
    int d = op.d();
    DecoratedTuple t;
    t.shape = side == Side::L ? ChiShape::nm(k, 0) : ChiShape::nm(0, k);
    for (int p = 0; p < k; ++p)
        t.entries.push_back(decorated_entry(op, (bare_first && p == 0) ? identity(d) : v, identity(d)));
    return t;
}

SeriesValue one_face(Side side, OneFace kind, const SeriesContext& ctx, const BMatrix& v, int N) {
    int d = ctx.d;
    const OpElement& op = side == Side::L ? ctx.X : ctx.Y;
    OpElement mult = side == Side::L ? OpElement::Lb(v) : OpElement::Rb(v);
    double rho = ctx.trunc.rho;
    if (kind == OneFace::G || kind == OneFace::M) {
        OpElement step = mult * op;
        State s = State::identity(d);
        if (kind == OneFace::G) s = mult.apply(s);
        Graded g(N, d);
        for (int n = 0; n <= N; ++n) {
            if (n > 0) s = step.apply(s);
            g.add(n, s.vacuum());
        }
        return g.finish(rho, zeros(d));
    }
    if (kind == OneFace::R) {
        Graded g(std::max(N - 1, 0), d);
        for (int n = 0; n + 1 <= N; ++n)
            g.add(n, eval_cumulant_full(one_sided_tuple(side, op, v, n + 1, true), ctx.engine));
        return g.finish(rho, zeros(d));
    }
    Graded g(N, d);
    for (int n = 1; n <= N; ++n) g.add(n, eval_cumulant_full(one_sided_tuple(side, op, v, n, false), ctx.engine));
    return g.finish(rho, identity(d));
}

SeriesValue two_face_impl(TwoFace kind, const SeriesContext& ctx, const BMatrix& b, const BMatrix& c,
                          const BMatrix& d, Side terminal, int N, Peel peel) {
    int dim = ctx.d;
    BMatrix I = identity(dim);
    double rho = ctx.trunc.rho;
    if (kind == TwoFace::M) {
        OpElement lx = OpElement::Lb(b) * ctx.X;
        OpElement ry = OpElement::Rb(d) * ctx.Y;
        OpElement tail = terminal == Side::R ? OpElement::Rb(c) : OpElement::Lb(c);
        Graded g(N, dim);
        State sm = tail.apply(State::identity(dim));
        for (int m = 0; m <= N; ++m) {
            if (m > 0) sm = ry.apply(sm);
            State s = sm;
            for (int n = 0; n + m <= N; ++n) {
                if (n > 0) s = lx.apply(s);
                g.add(n + m, s.vacuum());
            }
        }
        return g.finish(rho, zeros(dim));
    }
    OpElement y_lc = ctx.Y * OpElement::Lb(c);
    Graded g(N, dim);
    auto tuple = [&](int n, int m) {
        DecoratedTuple t;
        t.shape = ChiShape::nm(n, m);
        for (int p = 0; p < n; ++p) t.entries.push_back(decorated_entry(ctx.X, b, I));
        for (int p = 0; p < m; ++p) t.entries.push_back(decorated_entry(ctx.Y, d, I));
        if (m == 0) {
            t.entries.back().post = c;
        } else if (terminal == Side::R) {
            t.entries.back().post = c;
        } else {
            t.entries.back().op = y_lc;
        }
        if (peel == Peel::Left || peel == Peel::Both) t.entries[0].pre = I;
        if ((peel == Peel::Right || peel == Peel::Both) && m > 0) t.entries[static_cast<size_t>(n)].pre = I;
        return t;
    };
    if (kind == TwoFace::C) {
        for (int n = 1; n <= N; ++n) g.add(n, eval_cumulant_full(tuple(n, 0), ctx.engine));
        for (int m = 1; m <= N; ++m)
            for (int n = 0; n + m <= N; ++n) g.add(n + m, eval_cumulant_full(tuple(n, m), ctx.engine));
        return g.finish(rho, c);
    }
    for (int n = 1; n <= N; ++n)
        for (int m = 1; n + m <= N; ++m) g.add(n + m, eval_cumulant_full(tuple(n, m), ctx.engine));
    return g.finish(rho, zeros(dim));
}

BMatrix vec_to_mat(const Eigen::VectorXcd& x, int d) {
    BMatrix m(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = x(i * d + j);
    return m;
}

Eigen::VectorXcd mat_to_vec(const BMatrix& m) {
    int d = static_cast<int>(m.rows());
    Eigen::VectorXcd x(d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) x(i * d + j) = m(i, j);
    return x;
}

using Factor = std::function<SeriesValue(const BMatrix&)>;

// theta f(v theta) = 1 (left) or f(theta v) theta = 1 (right).
Inversion invert_factored(Side side, const SeriesContext& ctx, const BMatrix& v, const Factor& f) {
    int d = ctx.d;
    BMatrix I = identity(d);
    auto arg = [&](const BMatrix& th) -> BMatrix { return side == Side::L ? BMatrix(v * th) : BMatrix(th * v); };
    auto F = [&](const BMatrix& th) -> BMatrix {
        BMatrix fv = f(arg(th)).value;
        return side == Side::L ? BMatrix(th * fv - I) : BMatrix(fv * th - I);
    };
    BMatrix f0 = f(zeros(d)).value;
    if (condition_estimate(f0) > 1e4) throw TransformError("not-invertible", "E of the variable is not invertible");
    Inversion out;
    BMatrix theta = inv_checked(f0, "E(X)");
    double prev = -1;
    int growth = 0;
    bool converged = false;
    for (int k = 0; k < ctx.trunc.max_iterations; ++k) {
        BMatrix next = inv_checked(f(arg(theta)).value, "factor series");
        double step = max_abs_diff(next, theta);
        theta = next;
        out.iterations = k + 1;
        if (step <= 1e-15 * (1.0 + max_abs(theta))) {
            converged = true;
            break;
        }
        growth = (prev >= 0 && step >= prev) ? growth + 1 : 0;
        if (growth >= 3) break;
        prev = step;
    }
    if (!converged) {
        out.newton = true;
        const int n = d * d;
        for (int it = 0; it < 30; ++it) {
            BMatrix r = F(theta);
            if (max_abs(r) <= 1e-14) {
                converged = true;
                break;
            }
            double h = 1e-7 * (1.0 + max_abs(theta));
            Eigen::MatrixXcd J(n, n);
            for (int k = 0; k < n; ++k) {
                BMatrix e = zeros(d);
                e(k / d, k % d) = h;
                J.col(k) = mat_to_vec(F(theta + e) - r) / h;
            }
            Eigen::VectorXcd delta = J.fullPivLu().solve(-mat_to_vec(r));
            theta += vec_to_mat(delta, d);
            ++out.iterations;
        }
        if (!converged && max_abs(F(theta)) > 1e-12)
            throw TransformError("no-convergence", "factored fixed point did not converge");
    }
    SeriesValue at = f(arg(theta));
    out.theta = theta;
    out.u = arg(theta);
    out.residual = max_abs(side == Side::L ? BMatrix(theta * at.value - I) : BMatrix(at.value * theta - I));
    double nt = op_norm(theta);
    out.tail = at.tail * nt * nt;
    return out;
}

DecoratedTuple class_tuple(const ChiShape& shape, const std::vector<DecoratedEntry>& entries) {
    return DecoratedTuple{shape, entries};
}

BMatrix sum_over(const Parts& parts, const DecoratedTuple& t, const MomentEngine& eng) {
    BMatrix acc = zeros(t.d());
    for (const auto& pi : parts) acc += eval_cumulant_pi_reduced(pi, t, eng);
    return acc;
}

double norm_sum(std::initializer_list<std::pair<double, double>> terms) {
    double s = 0;
    for (const auto& [tail, gain] : terms) s += tail * gain;
    return s;
}

struct Contexts {
    SeriesContext p1, p2, sum, prod, mixed;
};

Contexts contexts(const PairSetup& s, const Truncation& t) {
    return Contexts{make_context(s.X1, s.Y1, t), make_context(s.X2, s.Y2, t),
                    make_context(s.X1 + s.X2, s.Y1 + s.Y2, t), make_context(s.X1 * s.X2, s.Y1 * s.Y2, t),
                    make_context(s.X1 + s.X2, s.Y1 * s.Y2, t)};
}

DecoratedEntry plain(const OpElement& x) { return plain_entry(x); }
DecoratedEntry with_pre(const OpElement& x, const BMatrix& pre) { return decorated_entry(x, pre, identity(x.d())); }
DecoratedEntry with_post(const OpElement& x, const BMatrix& post) { return decorated_entry(x, identity(x.d()), post); }

}  // namespace

nlohmann::json Truncation::to_json() const {
    return {{"order", order}, {"rho", rho},           {"safety", safety},
            {"floor", floor}, {"max_norm", max_norm}, {"max_iterations", max_iterations}};
}

double op_norm(const BMatrix& b) {
    if (b.size() == 0) return 0;
    Eigen::JacobiSVD<BMatrix> svd(b);
    return svd.singularValues()(0);
}

double tail_estimate(const std::vector<double>& a, double rho) {
    int N = static_cast<int>(a.size()) - 1;
    if (N < 0) return 0;
    double q = rho;
    if (N >= 1 && a[N - 1] > 0) q = std::max(q, a[N] / a[N - 1]);
    if (N >= 2 && a[N - 2] > 0) q = std::max(q, std::sqrt(a[N] / a[N - 2]));
    q = std::min(q, 0.9);
    double base = a[N];
    if (N >= 1) base = std::max(base, a[N - 1] * q);
    if (N >= 2) base = std::max(base, a[N - 2] * q * q);
    return base * q / (1 - q);
}

SeriesContext make_context(const OpElement& x, const OpElement& y, const Truncation& t) {
    SeriesContext ctx;
    ctx.d = x.d();
    ctx.X = x;
    ctx.Y = y;
    ctx.trunc = t;
    return ctx;
}

SeriesValue left_series(OneFace kind, const SeriesContext& ctx, const BMatrix& b, int order) {
    check_norm(ctx, b, "b");
    return one_face(Side::L, kind, ctx, b, resolve(ctx, order));
}

SeriesValue right_series(OneFace kind, const SeriesContext& ctx, const BMatrix& d, int order) {
    check_norm(ctx, d, "d");
    return one_face(Side::R, kind, ctx, d, resolve(ctx, order));
}

SeriesValue two_face_series(TwoFace kind, const SeriesContext& ctx, const BMatrix& b, const BMatrix& c,
                            const BMatrix& d, Side terminal, int order) {
    check_norm(ctx, b, "b");
    check_norm(ctx, d, "d");
    return two_face_impl(kind, ctx, b, c, d, terminal, resolve(ctx, order), Peel::None);
}

SeriesValue k_series(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d, Peel peel,
                     int order) {
    check_norm(ctx, b, "b");
    check_norm(ctx, d, "d");
    return two_face_impl(TwoFace::K, ctx, b, c, d, Side::R, resolve(ctx, order), peel);
}

SeriesValue Phi(Side side, const SeriesContext& ctx, const BMatrix& v, int order) {
    SeriesValue s = side == Side::L ? left_series(OneFace::C, ctx, v, order) : right_series(OneFace::C, ctx, v, order);
    s.value -= identity(ctx.d);
    s.term_norms[0] = 0;
    return s;
}

SeriesValue phi(Side side, const SeriesContext& ctx, const BMatrix& v, int order) {
    return side == Side::L ? left_series(OneFace::R, ctx, v, order) : right_series(OneFace::R, ctx, v, order);
}

SeriesValue Psi(Side side, const SeriesContext& ctx, const BMatrix& v, int order) {
    SeriesValue s = side == Side::L ? left_series(OneFace::M, ctx, v, order) : right_series(OneFace::M, ctx, v, order);
    s.value -= identity(ctx.d);
    s.term_norms[0] = 0;
    return s;
}

SeriesValue psi_factor(Side side, const SeriesContext& ctx, const BMatrix& v, int order) {
    check_norm(ctx, v, side == Side::L ? "b" : "d");
    int N = resolve(ctx, order);
    const OpElement& op = side == Side::L ? ctx.X : ctx.Y;
    OpElement step = (side == Side::L ? OpElement::Lb(v) : OpElement::Rb(v)) * op;
    Graded g(std::max(N - 1, 0), ctx.d);
    State s = State::identity(ctx.d);
    for (int n = 1; n <= N; ++n) {
        if (n > 1) s = step.apply(s);
        g.add(n - 1, op.apply(s).vacuum());
    }
    return g.finish(ctx.trunc.rho, zeros(ctx.d));
}

Inversion invert_phi(Side side, const SeriesContext& ctx, const BMatrix& v) {
    return invert_factored(side, ctx, v, [&](const BMatrix& u) { return phi(side, ctx, u); });
}

Inversion invert_psi(Side side, const SeriesContext& ctx, const BMatrix& v) {
    return invert_factored(side, ctx, v, [&](const BMatrix& u) { return psi_factor(side, ctx, u); });
}

SeriesValue s_transform(Side side, const SeriesContext& ctx, const BMatrix& v, SRoute route) {
    SeriesValue out;
    out.order = ctx.trunc.order;
    BMatrix I = identity(ctx.d);
    if (route == SRoute::Psi) {
        Inversion inv = invert_psi(side, ctx, v);
        out.value = side == Side::L ? BMatrix((I + v) * inv.theta) : BMatrix(inv.theta * (I + v));
        out.tail = inv.tail * op_norm(I + v);
        return out;
    }
    Inversion inv = invert_phi(side, ctx, v);
    out.tail = inv.tail;
    if (route == SRoute::Theta) {
        out.value = inv.theta;
        return out;
    }
    BMatrix vi = inv_checked(v, "S-transform point");
    out.value = side == Side::L ? BMatrix(vi * inv.u) : BMatrix(inv.u * vi);
    return out;
}

SeriesValue psi_pinched(Side side, const DecoratedEntry& z1, const DecoratedEntry& z2, int order,
                        const MomentEngine& eng) {
    int d = z1.op.d();
    Graded g(order, d);
    for (int n = 1; n <= order; ++n) {
        DecoratedTuple t;
        t.shape = ChiShape::all(side, 2 * n);
        t.entries.push_back(plain_entry(OpElement::identity(d)));
        for (int p = 1; p < 2 * n; ++p) t.entries.push_back(p % 2 == 1 ? z1 : z2);
        g.add(n, sum_over(cached_prime(side, n), t, eng));
    }
    return g.finish(0.0, zeros(d));
}

SeriesValue t_transform(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        InverseMode mode) {
    Inversion inv = invert_phi(Side::R, ctx, d);
    SeriesValue out;
    out.order = ctx.trunc.order;
    if (mode == InverseMode::Factored) {
        SeriesValue k = k_series(ctx, b, c, inv.u, Peel::Right);
        out.value = c + k.value * inv.theta;
        out.tail = k.tail * op_norm(inv.theta) + inv.tail * op_norm(k.value);
    } else {
        SeriesValue k = k_series(ctx, b, c, inv.u, Peel::None);
        BMatrix di = inv_checked(d, "d");
        out.value = c + k.value * di;
        out.tail = k.tail * op_norm(di) + inv.tail * op_norm(k.value) * op_norm(di);
    }
    return out;
}

SeriesValue s_partial(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                      InverseMode mode) {
    Inversion il = invert_phi(Side::L, ctx, b);
    Inversion ir = invert_phi(Side::R, ctx, d);
    SeriesValue out;
    out.order = ctx.trunc.order;
    BMatrix I = identity(ctx.d);
    if (mode == InverseMode::Factored) {
        SeriesValue k = k_series(ctx, il.u, c, ir.u, Peel::Both);
        BMatrix core = il.theta * k.value * ir.theta;
        out.value = c + core * d + b * core + core;
        double gain = op_norm(I + d) * op_norm(I + b);
        out.tail = gain * (k.tail * op_norm(il.theta) * op_norm(ir.theta) +
                           (il.tail * op_norm(ir.theta) + ir.tail * op_norm(il.theta)) * op_norm(k.value));
    } else {
        SeriesValue k = k_series(ctx, il.u, c, ir.u, Peel::None);
        BMatrix bi = inv_checked(b, "b");
        BMatrix di = inv_checked(d, "d");
        BMatrix U = k.value;
        out.value = c + bi * U + U * di + bi * U * di;
        out.tail = (k.tail + (il.tail + ir.tail) * op_norm(U)) * op_norm(I + bi) * op_norm(I + di);
    }
    return out;
}

PairSetup PairSetup::from_families(const std::vector<TwoFacedFamily>& fams) {
    if (fams.size() < 2) throw TransformError("bad-input", "two pairs are required");
    for (int k = 0; k < 2; ++k)
        if (fams[k].left.empty() || fams[k].right.empty())
            throw TransformError("bad-input", "family " + fams[k].name + " needs a left and a right variable");
    PairSetup s;
    s.d = fams[0].d;
    s.X1 = fams[0].left.front().second;
    s.Y1 = fams[0].right.front().second;
    s.X2 = fams[1].left.front().second;
    s.Y2 = fams[1].right.front().second;
    return s;
}

nlohmann::json SamplePoint::to_json() const {
    return {{"b", matrix_to_json(b)}, {"c", matrix_to_json(c)}, {"d", matrix_to_json(d)}};
}

SamplePoint sample_point(std::mt19937_64& rng, int d, double rho) {
    SamplePoint p;
    p.b = sample_small_point(rng, d, rho);
    p.c = sample_unit_point(rng, d);
    p.d = sample_small_point(rng, d, rho);
    return p;
}

nlohmann::json IdentityCheck::to_json() const {
    return {{"name", name},         {"lhs", matrix_to_json(lhs)}, {"rhs", matrix_to_json(rhs)}, {"residual", residual},
            {"tail", tail},         {"tail_tol", tol},            {"pass", pass}};
}

IdentityCheck make_check(const std::string& name, const BMatrix& lhs, const BMatrix& rhs, double tail,
                         const Truncation& t, double fixed_tol) {
    IdentityCheck c;
    c.name = name;
    c.lhs = lhs;
    c.rhs = rhs;
    c.residual = op_norm(lhs - rhs);
    c.tail = tail;
    c.tol = fixed_tol > 0 ? fixed_tol : t.safety * tail + t.floor;
    c.pass = c.residual <= c.tol;
    return c;
}

std::vector<IdentityCheck> check_relations(const SeriesContext& ctx, const BMatrix& b, const BMatrix& d) {
    const Truncation& t = ctx.trunc;
    BMatrix I = identity(ctx.d);
    std::vector<IdentityCheck> out;
    {
        auto G = left_series(OneFace::G, ctx, b);
        auto M = left_series(OneFace::M, ctx, b);
        auto R = left_series(OneFace::R, ctx, b);
        auto C = left_series(OneFace::C, ctx, b);
        auto Cm = left_series(OneFace::C, ctx, BMatrix(M.value * b));
        out.push_back(make_check("left-G-M", G.value, M.value * b, G.tail + M.tail * op_norm(b), t));
        out.push_back(make_check("left-C-R", C.value, I + b * R.value, C.tail + R.tail * op_norm(b), t));
        out.push_back(make_check("left-M-C", M.value, Cm.value, M.tail + Cm.tail + M.tail * op_norm(b) * 2, t));
    }
    {
        auto G = right_series(OneFace::G, ctx, d);
        auto M = right_series(OneFace::M, ctx, d);
        auto R = right_series(OneFace::R, ctx, d);
        auto C = right_series(OneFace::C, ctx, d);
        auto Cm = right_series(OneFace::C, ctx, BMatrix(d * M.value));
        out.push_back(make_check("right-G-M", G.value, d * M.value, G.tail + M.tail * op_norm(d), t));
        out.push_back(make_check("right-C-R", C.value, I + R.value * d, C.tail + R.tail * op_norm(d), t));
        out.push_back(make_check("right-M-C", M.value, Cm.value, M.tail + Cm.tail + M.tail * op_norm(d) * 2, t));
    }
    return out;
}

std::vector<IdentityCheck> verify_r_transform(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const auto& ctx = cx.p1;
    const BMatrix &b = p.b, &c = p.c, &d = p.d;
    BMatrix Z = zeros(s.d);
    std::vector<IdentityCheck> out;

    auto Ml = left_series(OneFace::M, ctx, b);
    auto Mr = right_series(OneFace::M, ctx, d);
    auto Mxy = two_face_series(TwoFace::M, ctx, b, c, d);
    auto Cxy = two_face_series(TwoFace::C, ctx, BMatrix(Ml.value * b), Mxy.value, BMatrix(d * Mr.value));
    double nMl = op_norm(Ml.value), nMr = op_norm(Mr.value), nM = op_norm(Mxy.value), nc = op_norm(c);
    out.push_back(make_check("r-transform", Ml.value * Mxy.value + Mxy.value * Mr.value,
                             Ml.value * c * Mr.value + Cxy.value,
                             norm_sum({{Ml.tail, nM + nc * nMr + 1},
                                       {Mr.tail, nM + nc * nMl + 1},
                                       {Mxy.tail, nMl + nMr + 1},
                                       {Cxy.tail, 1}}),
                             t));

    auto MxyL = two_face_series(TwoFace::M, ctx, b, c, d, Side::L);
    out.push_back(make_check("lc-rc-moment", MxyL.value, Mxy.value, 0, t));
    auto Cplain = two_face_series(TwoFace::C, ctx, b, c, d);

    auto Csum = two_face_series(TwoFace::C, cx.sum, b, c, d);
    auto C2 = two_face_series(TwoFace::C, cx.p2, b, c, d);
    out.push_back(make_check("r-additivity", Csum.value - c, (Cplain.value - c) + (C2.value - c),
                             Csum.tail + Cplain.tail + C2.tail, t));

    auto Cl = left_series(OneFace::C, ctx, b);
    auto Cr = right_series(OneFace::C, ctx, d);
    auto M0 = two_face_series(TwoFace::M, ctx, b, c, Z);
    auto C0 = two_face_series(TwoFace::C, ctx, b, c, Z);
    out.push_back(make_check("degeneration-M-d0", M0.value, Ml.value * c, M0.tail + Ml.tail * nc, t));
    out.push_back(make_check("degeneration-C-d0", C0.value, Cl.value * c, C0.tail + Cl.tail * nc, t));
    auto Mb0 = two_face_series(TwoFace::M, ctx, Z, c, d);
    auto Cb0 = two_face_series(TwoFace::C, ctx, Z, c, d);
    out.push_back(make_check("degeneration-M-b0", Mb0.value, c * Mr.value, Mb0.tail + Mr.tail * nc, t));
    out.push_back(make_check("degeneration-C-b0", Cb0.value, c * Cr.value, Cb0.tail + Cr.tail * nc, t));

    auto Cd0 = two_face_series(TwoFace::C, ctx, BMatrix(Ml.value * b), M0.value, Z);
    out.push_back(make_check("r-transform-d0", Ml.value * M0.value + M0.value, Ml.value * c + Cd0.value,
                             norm_sum({{Ml.tail, op_norm(M0.value) + nc + 1}, {M0.tail, nMl + 2}, {Cd0.tail, 1}}), t));
    auto Clm = left_series(OneFace::C, ctx, BMatrix(Ml.value * b));
    out.push_back(make_check("recover-left-formula", Ml.value, Clm.value, Ml.tail * 2 + Clm.tail, t));
    return out;
}

std::vector<IdentityCheck> verify_free_s(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const BMatrix &b = p.b, &d = p.d;
    BMatrix I = identity(s.d);
    std::vector<IdentityCheck> out;
    {
        auto S12 = s_transform(Side::L, cx.prod, b);
        auto S2 = s_transform(Side::L, cx.p2, b);
        BMatrix S2i = inv_checked(S2.value, "S_X2(b)");
        auto S1 = s_transform(Side::L, cx.p1, BMatrix(S2i * b * S2.value));
        out.push_back(make_check("free-s-left", S12.value, S2.value * S1.value,
                                 S12.tail + S2.tail * op_norm(S1.value) * 2 + S1.tail * op_norm(S2.value), t));
    }
    {
        auto S12 = s_transform(Side::R, cx.prod, d);
        auto S2 = s_transform(Side::R, cx.p2, d);
        BMatrix S2i = inv_checked(S2.value, "S_Y2(d)");
        auto S1 = s_transform(Side::R, cx.p1, BMatrix(S2.value * d * S2i));
        out.push_back(make_check("free-s-right", S12.value, S1.value * S2.value,
                                 S12.tail + S2.tail * op_norm(S1.value) * 2 + S1.tail * op_norm(S2.value), t));
    }
    for (Side side : {Side::L, Side::R}) {
        std::string sfx = side == Side::L ? "-left" : "-right";
        const BMatrix& v = side == Side::L ? b : d;
        auto th = s_transform(side, cx.p1, v, SRoute::Theta);
        auto ps = s_transform(side, cx.p1, v, SRoute::Psi);
        auto lit = s_transform(side, cx.p1, v, SRoute::Literal);
        out.push_back(make_check("s-phi-psi" + sfx, th.value, ps.value, th.tail + ps.tail, t));
        out.push_back(make_check("s-literal" + sfx, lit.value, th.value, th.tail * condition_estimate(v), t));
        Inversion inv = invert_phi(side, cx.p1, v);
        BMatrix f = phi(side, cx.p1, inv.u).value;
        BMatrix lhs = side == Side::L ? BMatrix(inv.theta * f) : BMatrix(f * inv.theta);
        out.push_back(make_check("theta-fixed-point" + sfx, lhs, I, 0, t, 1e-10));
    }
    return out;
}

std::vector<IdentityCheck> verify_s_lemmata(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const int N = t.order;
    const BMatrix &b = p.b, &d = p.d;
    const MomentEngine& eng = cx.p1.engine;
    std::vector<IdentityCheck> out;
    {
        auto A = psi_pinched(Side::L, with_pre(s.X1, b), plain(s.X2), N, eng);       // psi(L_b X1, X2)
        auto B = psi_pinched(Side::L, plain(s.X2), with_pre(s.X1, b), N + 1, eng);   // psi(X2, L_b X1)
        auto BN = psi_pinched(Side::L, plain(s.X2), with_pre(s.X1, b), N, eng);
        auto C = psi_pinched(Side::L, with_post(s.X2, b), plain(s.X1), N, eng);      // psi(X2 L_b, X1)
        auto P12 = Phi(Side::L, cx.prod, b);
        double nA = op_norm(A.value), nB = op_norm(B.value);
        out.push_back(make_check("move-around-left", C.value, BN.value * b, C.tail + BN.tail * op_norm(b), t));
        out.push_back(make_check("s-lem-1-left", P12.value, A.value * B.value, P12.tail + A.tail * nB + B.tail * nA, t));
        auto P2A = Phi(Side::L, cx.p2, A.value);
        out.push_back(make_check("s-lem-2-left", P12.value, P2A.value, P12.tail + P2A.tail + A.tail * 2, t));
        auto P1C = Phi(Side::L, cx.p1, C.value);
        out.push_back(make_check("s-lem-3-left", B.value * A.value, P1C.value, A.tail * nB + B.tail * nA + P1C.tail + C.tail * 2, t));
        Inversion i2 = invert_phi(Side::L, cx.p2, P12.value);
        out.push_back(make_check("pinched-to-inverse-left", A.value, i2.u, A.tail + i2.tail * op_norm(P12.value) + P12.tail * 2, t));
        out.push_back(make_check("inverse-times-pinched-left", i2.u * B.value, P12.value,
                                 i2.tail * op_norm(P12.value) * nB + B.tail * op_norm(i2.u) + P12.tail * 2, t));
        Inversion i12 = invert_phi(Side::L, cx.prod, b);
        auto S2 = s_transform(Side::L, cx.p2, b);
        BMatrix S2i = inv_checked(S2.value, "S_X2(b)");
        auto B4 = psi_pinched(Side::L, plain(s.X2), with_pre(s.X1, i12.u), N + 1, eng);
        out.push_back(make_check("s-lem-4-left", B4.value, S2i,
                                 B4.tail + (S2.tail + i12.tail) * op_norm(S2i) * op_norm(S2i), t));
        auto C4 = psi_pinched(Side::L, with_post(s.X2, i12.u), plain(s.X1), N, eng);
        Inversion i1 = invert_phi(Side::L, cx.p1, BMatrix(S2i * b * S2.value));
        out.push_back(make_check("lem-for-t-left", C4.value, i1.u,
                                 C4.tail + i1.tail * op_norm(b) * 2 + (S2.tail + i12.tail) * op_norm(b) * 4, t));
    }
    {
        auto A = psi_pinched(Side::R, with_pre(s.Y1, d), plain(s.Y2), N, eng);       // psi_r(R_d Y1, Y2)
        auto B = psi_pinched(Side::R, plain(s.Y2), with_pre(s.Y1, d), N + 1, eng);   // psi_r(Y2, R_d Y1)
        auto BN = psi_pinched(Side::R, plain(s.Y2), with_pre(s.Y1, d), N, eng);
        auto C = psi_pinched(Side::R, with_post(s.Y2, d), plain(s.Y1), N, eng);      // psi_r(Y2 R_d, Y1)
        auto P12 = Phi(Side::R, cx.prod, d);
        double nA = op_norm(A.value), nB = op_norm(B.value);
        out.push_back(make_check("move-around-right", C.value, d * BN.value, C.tail + BN.tail * op_norm(d), t));
        out.push_back(make_check("s-lem-1-right", P12.value, B.value * A.value, P12.tail + A.tail * nB + B.tail * nA, t));
        auto P2A = Phi(Side::R, cx.p2, A.value);
        out.push_back(make_check("s-lem-2-right", P12.value, P2A.value, P12.tail + P2A.tail + A.tail * 2, t));
        auto P1C = Phi(Side::R, cx.p1, C.value);
        out.push_back(make_check("s-lem-3-right", A.value * B.value, P1C.value, A.tail * nB + B.tail * nA + P1C.tail + C.tail * 2, t));
        Inversion i2 = invert_phi(Side::R, cx.p2, P12.value);
        out.push_back(make_check("pinched-to-inverse-right", A.value, i2.u, A.tail + i2.tail * op_norm(P12.value) + P12.tail * 2, t));
        out.push_back(make_check("inverse-times-pinched-right", B.value * i2.u, P12.value,
                                 i2.tail * op_norm(P12.value) * nB + B.tail * op_norm(i2.u) + P12.tail * 2, t));
        Inversion i12 = invert_phi(Side::R, cx.prod, d);
        auto S2 = s_transform(Side::R, cx.p2, d);
        BMatrix S2i = inv_checked(S2.value, "S_Y2(d)");
        auto B4 = psi_pinched(Side::R, plain(s.Y2), with_pre(s.Y1, i12.u), N + 1, eng);
        out.push_back(make_check("s-lem-4-right", B4.value, S2i,
                                 B4.tail + (S2.tail + i12.tail) * op_norm(S2i) * op_norm(S2i), t));
        auto C4 = psi_pinched(Side::R, with_post(s.Y2, i12.u), plain(s.Y1), N, eng);
        Inversion i1 = invert_phi(Side::R, cx.p1, BMatrix(S2.value * d * S2i));
        out.push_back(make_check("lem-for-t-right", C4.value, i1.u,
                                 C4.tail + i1.tail * op_norm(d) * 2 + (S2.tail + i12.tail) * op_norm(d) * 4, t));
    }
    return out;
}

std::vector<IdentityCheck> verify_t_property(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const BMatrix &b = p.b, &c = p.c, &d = p.d;
    std::vector<IdentityCheck> out;
    auto T12 = t_transform(cx.mixed, b, c, d);
    auto S2 = s_transform(Side::R, cx.p2, d);
    BMatrix S2i = inv_checked(S2.value, "S_Y2(d)");
    auto T2 = t_transform(cx.p2, b, c, d);
    auto T1 = t_transform(cx.p1, b, BMatrix(T2.value * S2i), BMatrix(S2.value * d * S2i));
    double nS = op_norm(S2.value) * op_norm(S2i);
    out.push_back(make_check("t-property", T12.value, T1.value * S2.value,
                             T12.tail + T1.tail * op_norm(S2.value) + T2.tail * nS + S2.tail * op_norm(T1.value) * nS * 2, t));
    auto T12lit = t_transform(cx.mixed, b, c, d, InverseMode::Literal);
    out.push_back(make_check("t-literal", T12lit.value, T12.value, T12lit.tail + T12.tail, t));
    return out;
}

SeriesValue t_class_sum(const PairSetup& s, TClass cls, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        int degree) {
    int dim = s.d;
    BMatrix I = identity(dim);
    OpElement X = s.X1 + s.X2;
    MomentEngine eng;
    Graded g(degree, dim);
    bool prime = cls == TClass::OPrime;
    for (int n = 1; n <= degree; ++n)
        for (int m = prime ? 0 : 1; n + m <= degree; ++m) {
            const Parts& parts = cached_t(n, m, cls);
            if (parts.empty()) continue;
            int nr = prime ? 2 * m + 1 : 2 * m;
            std::vector<DecoratedEntry> e;
            for (int k = 0; k < n; ++k) e.push_back(decorated_entry(X, b, I));
            for (int k = 0; k < nr; ++k) {
                bool y1 = prime ? (k % 2 == 1) : (k % 2 == 0);
                e.push_back(y1 ? decorated_entry(s.Y1, d, I) : decorated_entry(s.Y2, I, I));
            }
            e.back().post = c;
            g.add(n + m, sum_over(parts, class_tuple(parts.front().shape(), e), eng));
        }
    return g.finish(0.0, zeros(dim));
}

SeriesValue s_class_sum(const PairSetup& s, SClass cls, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        int degree) {
    int dim = s.d;
    BMatrix I = identity(dim);
    MomentEngine eng;
    Graded g(degree, dim);
    bool prime = !(cls == SClass::All || cls == SClass::E || cls == SClass::O);
    int lo = prime ? 0 : 1;
    for (int n = lo; n <= degree; ++n)
        for (int m = lo; n + m <= degree; ++m) {
            const Parts& parts = cached_s(n, m, cls);
            if (parts.empty()) continue;
            int nl = prime ? 2 * n + 1 : 2 * n;
            int nr = prime ? 2 * m + 1 : 2 * m;
            std::vector<DecoratedEntry> e;
            for (int k = 0; k < nl; ++k) {
                bool x1 = prime ? (k % 2 == 1) : (k % 2 == 0);
                e.push_back(x1 ? decorated_entry(s.X1, b, I) : decorated_entry(s.X2, I, I));
            }
            for (int k = 0; k < nr; ++k) {
                bool y1 = prime ? (k % 2 == 1) : (k % 2 == 0);
                e.push_back(y1 ? decorated_entry(s.Y1, d, I) : decorated_entry(s.Y2, I, I));
            }
            e.back().post = c;
            g.add(n + m, sum_over(parts, class_tuple(parts.front().shape(), e), eng));
        }
    return g.finish(0.0, zeros(dim));
}

std::vector<IdentityCheck> verify_t_cases(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const int D = t.order;
    const BMatrix &b = p.b, &c = p.c, &d = p.d;
    const MomentEngine& eng = cx.p1.engine;
    std::vector<IdentityCheck> out;
    auto q = psi_pinched(Side::R, with_pre(s.Y1, d), plain(s.Y2), D, eng);      // psi_r(R_d Y1, Y2)
    auto w = psi_pinched(Side::R, plain(s.Y2), with_pre(s.Y1, d), D + 1, eng);  // psi_r(Y2, R_d Y1)
    auto Pe = t_class_sum(s, TClass::E, b, c, d, D);
    auto Po = t_class_sum(s, TClass::O, b, c, d, D);
    auto Pop = t_class_sum(s, TClass::OPrime, b, c, d, D - 1);
    auto K = k_series(cx.mixed, b, c, d, Peel::None, D);
    out.push_back(make_check("t-split", K.value, Pe.value + Po.value, K.tail + Pe.tail + Po.tail, t));
    auto K1 = k_series(cx.p2, b, c, q.value, Peel::None, D);
    out.push_back(make_check("t-case-1", Pe.value, K1.value, Pe.tail + K1.tail + q.tail * 2, t));
    auto K2 = k_series(cx.p2, b, c, q.value, Peel::Right, D);
    out.push_back(make_check("t-case-2", Pop.value, K2.value, Pop.tail + K2.tail + q.tail * 2, t));
    BMatrix cprime = Pop.value + c * w.value;
    auto K3 = k_series(cx.p1, b, cprime, BMatrix(d * w.value), Peel::Right, D);
    out.push_back(make_check("t-case-3", Po.value, K3.value * d,
                             Po.tail + (K3.tail + (Pop.tail + w.tail * 2) * op_norm(K3.value)) * op_norm(d), t));
    return out;
}

std::vector<IdentityCheck> verify_s_property(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const BMatrix &b = p.b, &c = p.c, &d = p.d;
    std::vector<IdentityCheck> out;
    auto S12 = s_partial(cx.prod, b, c, d);
    auto Sl = s_transform(Side::L, cx.p2, b);
    auto Sr = s_transform(Side::R, cx.p2, d);
    BMatrix Sli = inv_checked(Sl.value, "S_X2(b)");
    BMatrix Sri = inv_checked(Sr.value, "S_Y2(d)");
    auto S22 = s_partial(cx.p2, b, c, d);
    auto S11 = s_partial(cx.p1, BMatrix(Sli * b * Sl.value), BMatrix(Sli * S22.value * Sri), BMatrix(Sr.value * d * Sri));
    double gl = op_norm(Sl.value) * op_norm(Sli), gr = op_norm(Sr.value) * op_norm(Sri);
    out.push_back(make_check("s-property", S12.value, Sl.value * S11.value * Sr.value,
                             S12.tail + S11.tail * op_norm(Sl.value) * op_norm(Sr.value) + S22.tail * gl * gr +
                                 (Sl.tail + Sr.tail) * op_norm(S11.value) * 2 * gl * gr,
                             t));
    auto S12lit = s_partial(cx.prod, b, c, d, InverseMode::Literal);
    out.push_back(make_check("s-literal", S12lit.value, S12.value, S12lit.tail + S12.tail, t));
    return out;
}

std::vector<IdentityCheck> verify_s_cases(const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    Contexts cx = contexts(s, t);
    const int D = t.order;
    const int Dp = D - 1;
    const BMatrix &b = p.b, &c = p.c, &d = p.d;
    const MomentEngine& eng = cx.p1.engine;
    std::vector<IdentityCheck> out;
    auto pl = psi_pinched(Side::L, with_pre(s.X1, b), plain(s.X2), D, eng);       // psi_l(L_b X1, X2)
    auto qr = psi_pinched(Side::R, with_pre(s.Y1, d), plain(s.Y2), D, eng);       // psi_r(R_d Y1, Y2)
    auto pB = psi_pinched(Side::L, plain(s.X2), with_pre(s.X1, b), D + 1, eng);   // psi_l(X2, L_b X1)
    auto qB = psi_pinched(Side::R, plain(s.Y2), with_pre(s.Y1, d), D + 1, eng);   // psi_r(Y2, R_d Y1)
    double inner = (pl.tail + qr.tail) * 2;

    auto Pe = s_class_sum(s, SClass::E, b, c, d, D);
    auto Po = s_class_sum(s, SClass::O, b, c, d, D);
    auto K = k_series(cx.prod, b, c, d, Peel::None, D);
    out.push_back(make_check("s-split", K.value, Pe.value + Po.value, K.tail + Pe.tail + Po.tail, t));
    auto K1 = k_series(cx.p2, pl.value, c, qr.value, Peel::None, D);
    out.push_back(make_check("s-case-1", Pe.value, K1.value, Pe.tail + K1.tail + inner, t));

    auto P0 = s_class_sum(s, SClass::O0, b, c, d, Dp);
    auto fl = phi(Side::L, cx.p2, pl.value, Dp + 1);
    auto fr = phi(Side::R, cx.p2, qr.value, Dp + 1);
    out.push_back(make_check("s-case-2", P0.value, fl.value * c * fr.value,
                             P0.tail + (fl.tail * op_norm(fr.value) + fr.tail * op_norm(fl.value)) * op_norm(c) + inner, t));
    auto Pr = s_class_sum(s, SClass::OR, b, c, d, Dp);
    auto K3 = k_series(cx.p2, pl.value, c, qr.value, Peel::Right, Dp + 1);
    out.push_back(make_check("s-case-3", Pr.value, pB.value * K3.value,
                             Pr.tail + K3.tail * op_norm(pB.value) + pB.tail * op_norm(K3.value) + inner, t));
    auto Pl = s_class_sum(s, SClass::OL, b, c, d, Dp);
    auto K4 = k_series(cx.p2, pl.value, c, qr.value, Peel::Left, Dp + 1);
    out.push_back(make_check("s-case-4", Pl.value, K4.value * qB.value,
                             Pl.tail + K4.tail * op_norm(qB.value) + qB.tail * op_norm(K4.value) + inner, t));
    auto Plr = s_class_sum(s, SClass::OLR, b, c, d, Dp);
    auto K5 = k_series(cx.p2, pl.value, c, qr.value, Peel::Both, Dp + 2);
    out.push_back(make_check("s-case-5", Plr.value, K5.value, Plr.tail + K5.tail + inner, t));

    BMatrix Pop = P0.value + Pr.value + Pl.value + Plr.value;
    double Pop_tail = P0.tail + Pr.tail + Pl.tail + Plr.tail;
    auto K6 = k_series(cx.p1, BMatrix(pB.value * b), Pop, BMatrix(d * qB.value), Peel::Both, D);
    out.push_back(make_check("s-case-6", Po.value, b * K6.value * d,
                             Po.tail + (K6.tail + Pop_tail * op_norm(K6.value) + (pB.tail + qB.tail) * 2) *
                                           op_norm(b) * op_norm(d),
                             t));
    return out;
}

Theorem parse_theorem(const std::string& name) {
    static const std::map<std::string, Theorem> names = {
        {"relations", Theorem::Relations},   {"r-transform", Theorem::RTransform}, {"free-s", Theorem::FreeS},
        {"s-lemmata", Theorem::SLemmata},    {"t-property", Theorem::TProperty},   {"t-cases", Theorem::TCases},
        {"s-property", Theorem::SProperty},  {"s-cases", Theorem::SCases}};
    auto it = names.find(name);
    if (it == names.end())
        throw TransformError("bad-input", "unknown theorem '" + name +
                                              "'; valid: relations r-transform free-s s-lemmata t-property t-cases "
                                              "s-property s-cases");
    return it->second;
}

std::string theorem_name(Theorem t) {
    switch (t) {
        case Theorem::Relations: return "relations";
        case Theorem::RTransform: return "r-transform";
        case Theorem::FreeS: return "free-s";
        case Theorem::SLemmata: return "s-lemmata";
        case Theorem::TProperty: return "t-property";
        case Theorem::TCases: return "t-cases";
        case Theorem::SProperty: return "s-property";
        case Theorem::SCases: return "s-cases";
    }
    return "";
}

std::vector<std::string> headline_checks(Theorem t) {
    switch (t) {
        case Theorem::Relations: return {"left-M-C", "right-M-C"};
        case Theorem::RTransform: return {"r-transform"};
        case Theorem::FreeS: return {"free-s-left", "free-s-right"};
        case Theorem::SLemmata: return {"s-lem-1-left", "s-lem-1-right"};
        case Theorem::TProperty: return {"t-property"};
        case Theorem::TCases: return {"t-case-1"};
        case Theorem::SProperty: return {"s-property"};
        case Theorem::SCases: return {"s-case-1"};
    }
    return {};
}

std::vector<IdentityCheck> verify_at(Theorem th, const PairSetup& s, const Truncation& t, const SamplePoint& p) {
    switch (th) {
        case Theorem::Relations: return check_relations(make_context(s.X1, s.Y1, t), p.b, p.d);
        case Theorem::RTransform: return verify_r_transform(s, t, p);
        case Theorem::FreeS: return verify_free_s(s, t, p);
        case Theorem::SLemmata: return verify_s_lemmata(s, t, p);
        case Theorem::TProperty: return verify_t_property(s, t, p);
        case Theorem::TCases: return verify_t_cases(s, t, p);
        case Theorem::SProperty: return verify_s_property(s, t, p);
        case Theorem::SCases: return verify_s_cases(s, t, p);
    }
    return {};
}

nlohmann::json VerifyReport::to_json() const {
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& pr : points) {
        nlohmann::json cs = nlohmann::json::array();
        for (const auto& c : pr.checks) cs.push_back(c.to_json());
        pts.push_back({{"inputs", pr.point.to_json()}, {"checks", cs}});
    }
    return {{"theorem", theorem}, {"truncation", trunc.to_json()}, {"seed", seed},
            {"points", pts},      {"pass", pass},                   {"worst_ratio", worst_ratio}};
}

VerifyReport verify(Theorem th, const PairSetup& s, const Truncation& t, int points, std::uint64_t seed) {
    VerifyReport r;
    r.theorem = theorem_name(th);
    r.trunc = t;
    r.seed = seed;
    std::mt19937_64 rng(seed);
    for (int k = 0; k < points; ++k) {
        PointResult pr;
        pr.point = sample_point(rng, s.d, t.rho);
        pr.checks = verify_at(th, s, t, pr.point);
        for (const auto& c : pr.checks) {
            r.pass = r.pass && c.pass;
            r.worst_ratio = std::max(r.worst_ratio, c.residual / c.tol);
        }
        r.points.push_back(std::move(pr));
    }
    return r;
}

bool ConvergenceProfile::non_increasing() const {
    for (const auto& row : residuals)
        for (size_t k = 1; k < row.size(); ++k)
            if (row[k] > row[k - 1]) return false;
    return true;
}

nlohmann::json ConvergenceProfile::to_json() const {
    nlohmann::json j{{"orders", orders}, {"residuals", nlohmann::json::object()}};
    for (size_t k = 0; k < names.size(); ++k) j["residuals"][names[k]] = residuals[k];
    j["non_increasing"] = non_increasing();
    return j;
}

ConvergenceProfile convergence_profile(Theorem th, const PairSetup& s, Truncation t, const SamplePoint& p,
                                       const std::vector<int>& orders) {
    ConvergenceProfile prof;
    prof.orders = orders;
    prof.names = headline_checks(th);
    prof.residuals.assign(prof.names.size(), {});
    for (int N : orders) {
        t.order = N;
        auto checks = verify_at(th, s, t, p);
        for (size_t k = 0; k < prof.names.size(); ++k) {
            auto it = std::find_if(checks.begin(), checks.end(), [&](const IdentityCheck& c) { return c.name == prof.names[k]; });
            prof.residuals[k].push_back(it == checks.end() ? 0.0 : it->residual);
        }
    }
    return prof;
}

}  // namespace bifree
