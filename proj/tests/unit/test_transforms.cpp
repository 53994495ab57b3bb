#include <doctest.h>

#include <cmath>

#include "bifree/models.hpp"
#include "bifree/transforms.hpp"

using namespace bifree;

namespace {

double binom(int n, int k) {
    double r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double catalan(int j) { return binom(2 * j, j) / (j + 1); }

// Moments of s + alpha with s standard semicircular.
double shifted_semicircle_moment(int n, double alpha) {
    double m = 0;
    for (int k = 0; k <= n; k += 2) m += binom(n, k) * std::pow(alpha, n - k) * catalan(k / 2);
    return m;
}

BMatrix scalar(cd v) {
    BMatrix b(1, 1);
    b(0, 0) = v;
    return b;
}

SeriesContext semicircle_context(int depth, const Truncation& t) {
    auto fams = scalar_pairs(depth, {ScalarPairSpec{{1.0, 1.0}, {1.0, 1.0}}});
    return make_context(fams[0].left[0].second, fams[0].right[0].second, t);
}

PairSetup shifted_setup(int depth = 8, std::uint64_t seed = 7) {
    std::mt19937_64 rng(seed);
    return PairSetup::from_families(shifted_pairs(2, depth, 2, 0.3, 0.1, rng));
}

BMatrix invertible(std::mt19937_64& rng) { return invertible_mean(rng, 2, 0.3); }

const IdentityCheck& find(const std::vector<IdentityCheck>& cs, const std::string& name) {
    for (const auto& c : cs)
        if (c.name == name) return c;
    throw std::runtime_error("missing check " + name);
}

}  // namespace

TEST_CASE("tail estimate") {
    CHECK(tail_estimate({}, 0.1) == 0);
    CHECK(tail_estimate({1.0, 0.0, 0.0}, 0.1) == doctest::Approx(1.0 * 0.01 * 0.1 / 0.9));
    // ratio 0.5 dominates rho
    CHECK(tail_estimate({1.0, 0.5, 0.25}, 0.1) == doctest::Approx(0.25));
    // clipped at 0.9
    CHECK(tail_estimate({1.0, 2.0}, 0.1) == doctest::Approx(2.0 * 9));
}

TEST_CASE("scalar one-faced series of a shifted semicircular") {
    Truncation t;
    t.order = 10;
    auto ctx = semicircle_context(12, t);
    BMatrix b = scalar(0.07);
    cd expect = 0;
    for (int n = 0; n <= 10; ++n) expect += shifted_semicircle_moment(n, 1.0) * std::pow(0.07, n);
    auto M = left_series(OneFace::M, ctx, b);
    CHECK(std::abs(M.value(0, 0) - expect) < 1e-13);
    auto Mr = right_series(OneFace::M, ctx, b);
    CHECK(std::abs(Mr.value(0, 0) - expect) < 1e-13);
    // kappa_1 = 1, kappa_2 = 1, higher cumulants vanish
    CHECK(max_abs(phi(Side::L, ctx, b).value - scalar(1.07)) < 1e-13);
    CHECK(max_abs(Phi(Side::R, ctx, b).value - scalar(0.07 + 0.0049)) < 1e-13);
    CHECK(max_abs(left_series(OneFace::G, ctx, b).value - M.value * b) < 1e-15);
    // inverse of u + u^2 and the S-transform u / v
    for (double v : {0.01, 0.05, 0.1}) {
        double u = (-1 + std::sqrt(1 + 4 * v)) / 2;
        auto inv = invert_phi(Side::L, ctx, scalar(v));
        CHECK(std::abs(inv.u(0, 0) - u) < 1e-13);
        CHECK(std::abs(s_transform(Side::R, ctx, scalar(v)).value(0, 0) - u / v) < 1e-12);
    }
}

TEST_CASE("series at zero arguments") {
    auto s = shifted_setup();
    Truncation t;
    auto ctx = make_context(s.X1, s.Y1, t);
    BMatrix Z = zeros(2);
    std::mt19937_64 rng(3);
    BMatrix c = sample_unit_point(rng, 2);
    CHECK(max_abs(left_series(OneFace::M, ctx, Z).value - identity(2)) == 0);
    CHECK(max_abs(left_series(OneFace::C, ctx, Z).value - identity(2)) == 0);
    CHECK(max_abs(two_face_series(TwoFace::M, ctx, Z, c, Z).value - c) == 0);
    CHECK(max_abs(two_face_series(TwoFace::C, ctx, Z, c, Z).value - c) == 0);
    CHECK(max_abs(k_series(ctx, Z, c, Z, Peel::None).value) == 0);
    // theta(0) = E(X)^{-1}
    BMatrix EX = s.X1.apply(State::identity(2)).vacuum();
    CHECK(max_abs(invert_phi(Side::L, ctx, Z).theta - inverse(EX)) < 1e-14);
    CHECK(max_abs(invert_phi(Side::L, ctx, Z).u) == 0);
}

TEST_CASE("constant operators") {
    std::mt19937_64 rng(21);
    BMatrix a = invertible(rng), e = invertible(rng);
    BMatrix b = sample_small_point(rng, 2, 0.1), c = sample_unit_point(rng, 2), d = sample_small_point(rng, 2, 0.1);
    Truncation t;
    t.order = 6;
    auto ctx = make_context(OpElement::Lb(a), OpElement::Rb(e), t);
    BMatrix M = zeros(2);
    for (int n = 0; n <= 6; ++n)
        for (int m = 0; n + m <= 6; ++m) {
            BMatrix term = identity(2);
            for (int k = 0; k < n; ++k) term = term * b * a;
            term = term * c;
            for (int k = 0; k < m; ++k) term = term * e * d;
            M += term;
        }
    CHECK(max_abs(two_face_series(TwoFace::M, ctx, b, c, d).value - M) < 1e-14);
    CHECK(max_abs(two_face_series(TwoFace::C, ctx, b, c, d).value - (c + b * a * c + c * e * d)) < 1e-14);
    CHECK(max_abs(k_series(ctx, b, c, d, Peel::None).value) < 1e-15);
    CHECK(max_abs(s_transform(Side::L, ctx, b).value - inverse(a)) < 1e-13);
    CHECK(max_abs(s_transform(Side::R, ctx, d).value - inverse(e)) < 1e-13);
    // the Psi route truncates a geometric series in b a
    CHECK(max_abs(s_transform(Side::L, ctx, b, SRoute::Psi).value - inverse(a)) < 1e-5);
    CHECK(max_abs(t_transform(ctx, b, c, d).value - c) < 1e-14);
    CHECK(max_abs(s_partial(ctx, b, c, d).value - c) < 1e-14);
}

TEST_CASE("inversion round trips and the Newton fallback") {
    auto s = shifted_setup();
    Truncation t;
    t.order = 5;
    auto ctx = make_context(s.X1 * s.X2, s.Y1 * s.Y2, t);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 10; ++k)
        for (Side side : {Side::L, Side::R}) {
            BMatrix v = sample_small_point(rng, 2, 0.08);
            auto inv = invert_phi(side, ctx, v);
            CHECK(max_abs(Phi(side, ctx, inv.u).value - v) < 1e-13);
            CHECK(inv.residual < 1e-13);
            CHECK_FALSE(inv.newton);
            auto ip = invert_psi(side, ctx, v);
            CHECK(max_abs(Psi(side, ctx, ip.u).value - v) < 1e-13);
        }
    t.max_iterations = 1;
    auto slow = make_context(s.X1, s.Y1, t);
    BMatrix v = sample_small_point(rng, 2, 0.08);
    auto inv = invert_phi(Side::L, slow, v);
    CHECK(inv.newton);
    CHECK(max_abs(Phi(Side::L, slow, inv.u).value - v) < 1e-12);
    t.max_iterations = 50;
    CHECK(max_abs(inv.u - invert_phi(Side::L, make_context(s.X1, s.Y1, t), v).u) < 1e-12);
}

TEST_CASE("transform errors") {
    auto s = shifted_setup();
    Truncation t;
    auto ctx = make_context(s.X1, s.Y1, t);
    BMatrix big = identity(2) * cd(2.0);
    try {
        left_series(OneFace::M, ctx, big);
        FAIL("expected norm-too-large");
    } catch (const TransformError& e) {
        CHECK(e.kind == "norm-too-large");
    }
    // singular b in the literal S route
    BMatrix sing = zeros(2);
    sing(0, 0) = 0.05;
    try {
        s_transform(Side::L, ctx, sing, SRoute::Literal);
        FAIL("expected singular-point");
    } catch (const TransformError& e) {
        CHECK(e.kind == "singular-point");
    }
    auto centered = make_context(OpElement::L(MatA0(2)), s.Y1, t);
    CHECK_THROWS_AS(invert_phi(Side::L, centered, zeros(2)), TransformError);
    CHECK_THROWS_AS(parse_theorem("nope"), TransformError);
}

TEST_CASE("pinched series") {
    auto s = shifted_setup();
    auto zero = psi_pinched(Side::L, decorated_entry(s.X1, zeros(2), identity(2)), plain_entry(s.X2), 4);
    CHECK(max_abs(zero.value) == 0);
}

TEST_CASE("model depth is large enough") {
    auto a = shifted_setup(8), c = shifted_setup(11);
    Truncation t;
    t.order = 5;
    std::mt19937_64 rng(2);
    auto p = sample_point(rng, 2, 0.05);
    auto va = s_partial(make_context(a.X1 * a.X2, a.Y1 * a.Y2, t), p.b, p.c, p.d).value;
    auto vc = s_partial(make_context(c.X1 * c.X2, c.Y1 * c.Y2, t), p.b, p.c, p.d).value;
    CHECK(max_abs(va - vc) < 1e-14);
}

TEST_CASE("class sums split the full sums") {
    auto s = shifted_setup();
    std::mt19937_64 rng(5);
    auto p = sample_point(rng, 2, 0.05);
    auto all = t_class_sum(s, TClass::All, p.b, p.c, p.d, 4).value;
    auto e = t_class_sum(s, TClass::E, p.b, p.c, p.d, 4).value;
    auto o = t_class_sum(s, TClass::O, p.b, p.c, p.d, 4).value;
    CHECK(max_abs(all - e - o) < 1e-15);
    auto sp = s_class_sum(s, SClass::OPrime, p.b, p.c, p.d, 3).value;
    BMatrix parts = zeros(2);
    for (SClass c : {SClass::O0, SClass::OR, SClass::OL, SClass::OLR}) parts += s_class_sum(s, c, p.b, p.c, p.d, 3).value;
    CHECK(max_abs(sp - parts) < 1e-15);
}

TEST_CASE("every identity holds on shifted pairs") {
    auto s = shifted_setup();
    Truncation t;
    t.order = 4;
    t.rho = 0.05;
    std::mt19937_64 rng(17);
    for (int k = 0; k < 2; ++k) {
        auto p = sample_point(rng, 2, t.rho);
        for (auto th : {Theorem::Relations, Theorem::RTransform, Theorem::FreeS, Theorem::SLemmata, Theorem::TProperty,
                        Theorem::TCases, Theorem::SProperty, Theorem::SCases})
            for (const auto& c : verify_at(th, s, t, p)) {
                INFO(theorem_name(th), " ", c.name, " residual ", c.residual, " tol ", c.tol);
                CHECK(c.pass);
            }
    }
}

TEST_CASE("case six needs the first pair") {
    auto s = shifted_setup();
    Truncation t;
    t.order = 4;
    std::mt19937_64 rng(6);
    auto p = sample_point(rng, 2, 0.05);
    auto cs = verify_s_cases(s, t, p);
    const auto& six = find(cs, "s-case-6");
    CHECK(six.pass);
    // the same expression with K of the second pair
    const int D = t.order;
    auto pB = psi_pinched(Side::L, plain_entry(s.X2), decorated_entry(s.X1, p.b, identity(2)), D + 1);
    auto qB = psi_pinched(Side::R, plain_entry(s.Y2), decorated_entry(s.Y1, p.d, identity(2)), D + 1);
    BMatrix Pop = zeros(2);
    for (SClass c : {SClass::O0, SClass::OR, SClass::OL, SClass::OLR}) Pop += s_class_sum(s, c, p.b, p.c, p.d, D - 1).value;
    auto wrong = k_series(make_context(s.X2, s.Y2, t), BMatrix(pB.value * p.b), Pop, BMatrix(p.d * qB.value), Peel::Both, D);
    CHECK(op_norm(six.lhs - p.b * wrong.value * p.d) > 20 * six.tol);
}

TEST_CASE("terminal L_c") {
    auto s = shifted_setup();
    Truncation t;
    t.order = 5;
    auto ctx = make_context(s.X1, s.Y1, t);
    std::mt19937_64 rng(8);
    auto p = sample_point(rng, 2, 0.05);
    auto ML = two_face_series(TwoFace::M, ctx, p.b, p.c, p.d, Side::L).value;
    auto MR = two_face_series(TwoFace::M, ctx, p.b, p.c, p.d, Side::R).value;
    CHECK(max_abs(ML - MR) == 0);
    // inside a cumulant the suffix matters: only R_c satisfies the R-transform identity
    auto Ml = left_series(OneFace::M, ctx, p.b).value;
    auto Mr = right_series(OneFace::M, ctx, p.d).value;
    BMatrix lhs = Ml * MR + MR * Mr - Ml * p.c * Mr;
    auto CR = two_face_series(TwoFace::C, ctx, BMatrix(Ml * p.b), MR, BMatrix(p.d * Mr), Side::R);
    auto CL = two_face_series(TwoFace::C, ctx, BMatrix(Ml * p.b), MR, BMatrix(p.d * Mr), Side::L);
    CHECK(op_norm(lhs - CR.value) < 1e-5);
    CHECK(op_norm(lhs - CL.value) > 1e-4);
}

TEST_CASE("verify reports and convergence") {
    auto s = shifted_setup();
    Truncation t;
    t.order = 4;
    t.rho = 0.05;
    auto r1 = verify(Theorem::TProperty, s, t, 2, 99);
    auto r2 = verify(Theorem::TProperty, s, t, 2, 99);
    CHECK(r1.pass);
    CHECK(r1.to_json().dump() == r2.to_json().dump());
    CHECK(r1.to_json()["points"][0]["checks"][0].contains("tail_tol"));
    std::mt19937_64 rng(12);
    auto p = sample_point(rng, 2, 0.05);
    for (auto th : {Theorem::RTransform, Theorem::FreeS, Theorem::TProperty, Theorem::SProperty}) {
        auto prof = convergence_profile(th, s, t, p, {3, 4, 5});
        CHECK(prof.non_increasing());
    }
    CHECK(theorem_name(parse_theorem("s-cases")) == "s-cases");
}
