#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bifree/cumulants.hpp"
#include "bifree/operators.hpp"

namespace bifree {

struct TransformError : std::runtime_error {
    std::string kind;  // norm-too-large | no-convergence | singular-point | not-invertible | bad-input
    TransformError(std::string kind_, const std::string& what) : std::runtime_error(what), kind(std::move(kind_)) {}
};

// Truncation contract: series are kept to degree `order` in the small arguments.
struct Truncation {
    int order = 6;
    double rho = 0.08;       // bound on the norms of sampled b and d
    double safety = 10.0;    // tolerance = safety * estimated tail + floor
    double floor = 1e-12;
    double max_norm = 1.0;   // largest admissible series argument
    int max_iterations = 50; // fixed-point cap before the Newton fallback

    nlohmann::json to_json() const;
};

struct SeriesValue {
    BMatrix value;
    int order = 0;
    double tail = 0;                 // estimated norm of the omitted terms
    std::vector<double> term_norms;  // norm of the homogeneous part of each degree
};

// Geometric tail bound from the last retained homogeneous parts.
double tail_estimate(const std::vector<double>& term_norms, double rho);
double op_norm(const BMatrix& b);

struct SeriesContext {
    int d = 1;
    OpElement X;  // left variable
    OpElement Y;  // right variable
    Truncation trunc;
    MomentEngine engine;
};

SeriesContext make_context(const OpElement& x, const OpElement& y, const Truncation& t);

enum class OneFace { G, R, M, C };
enum class TwoFace { M, C, K };
// Which guaranteed outer factors of K(b,c,d) = b K' d are removed.
enum class Peel { None, Left, Right, Both };

// order < 0 uses ctx.trunc.order.
SeriesValue left_series(OneFace kind, const SeriesContext& ctx, const BMatrix& b, int order = -1);
SeriesValue right_series(OneFace kind, const SeriesContext& ctx, const BMatrix& d, int order = -1);
// terminal = R gives the R_c suffix; L puts L_c in its place.
SeriesValue two_face_series(TwoFace kind, const SeriesContext& ctx, const BMatrix& b, const BMatrix& c,
                            const BMatrix& d, Side terminal = Side::R, int order = -1);
SeriesValue k_series(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d, Peel peel,
                     int order = -1);

// Phi_l(b) = C^l(b) - 1 = b phi_l(b) and Phi_r(d) = C^r(d) - 1 = phi_r(d) d.
SeriesValue Phi(Side side, const SeriesContext& ctx, const BMatrix& v, int order = -1);
SeriesValue phi(Side side, const SeriesContext& ctx, const BMatrix& v, int order = -1);
// Psi_l(b) = sum_{n>=1} E((L_b X)^n) = b psi_l(b) and Psi_r(d) = psi_r(d) d.
SeriesValue Psi(Side side, const SeriesContext& ctx, const BMatrix& v, int order = -1);
SeriesValue psi_factor(Side side, const SeriesContext& ctx, const BMatrix& v, int order = -1);

struct Inversion {
    BMatrix u;      // inverse image of v
    BMatrix theta;  // u = v theta (left) or theta v (right)
    int iterations = 0;
    bool newton = false;
    double residual = 0;  // || theta f(v theta) - 1 || (left), || f(theta v) theta - 1 || (right)
    double tail = 0;      // tail of the factor series at the solution, transported through theta
};

// Compositional inverse of Phi (or of Psi) by the factored fixed point, seeded at theta = E(X)^{-1}.
Inversion invert_phi(Side side, const SeriesContext& ctx, const BMatrix& v);
Inversion invert_psi(Side side, const SeriesContext& ctx, const BMatrix& v);

enum class SRoute { Theta, Literal, Psi };
// Left: b^{-1} Phi^{<-1>}(b); right: Phi^{<-1>}(d) d^{-1}. Psi route: (1+b) b^{-1} Psi^{<-1>}(b), mirrored.
SeriesValue s_transform(Side side, const SeriesContext& ctx, const BMatrix& v, SRoute route = SRoute::Theta);

// psi_l(Z1, Z2) on BNC'_l(n) or psi_r on BNC'_r(n), n = 1..order, tuple (1, Z1, Z2, Z1, ..., Z2, Z1).
SeriesValue psi_pinched(Side side, const DecoratedEntry& z1, const DecoratedEntry& z2, int order,
                        const MomentEngine& eng = {});

enum class InverseMode { Factored, Literal };
// c + K(b, c, Phi_r^{<-1>}(d)) d^{-1}.
SeriesValue t_transform(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        InverseMode mode = InverseMode::Factored);
// c + b^{-1} U + U d^{-1} + b^{-1} U d^{-1} with U = K(Phi_l^{<-1>}(b), c, Phi_r^{<-1>}(d)).
SeriesValue s_partial(const SeriesContext& ctx, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                      InverseMode mode = InverseMode::Factored);

// Two pairs (X1, Y1), (X2, Y2) realized in one model.
struct PairSetup {
    int d = 1;
    OpElement X1, Y1, X2, Y2;
    static PairSetup from_families(const std::vector<TwoFacedFamily>& fams);
};

struct SamplePoint {
    BMatrix b, c, d;
    nlohmann::json to_json() const;
};
SamplePoint sample_point(std::mt19937_64& rng, int d, double rho);

struct IdentityCheck {
    std::string name;
    BMatrix lhs, rhs;
    double residual = 0;
    double tail = 0;
    double tol = 0;
    bool pass = false;
    nlohmann::json to_json() const;
};

// tol = safety * tail + floor, or a fixed tolerance when fixed_tol > 0.
IdentityCheck make_check(const std::string& name, const BMatrix& lhs, const BMatrix& rhs, double tail,
                         const Truncation& t, double fixed_tol = 0);

std::vector<IdentityCheck> check_relations(const SeriesContext& ctx, const BMatrix& b, const BMatrix& d);
std::vector<IdentityCheck> verify_r_transform(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_free_s(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_s_lemmata(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_t_property(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_t_cases(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_s_property(const PairSetup& s, const Truncation& t, const SamplePoint& p);
std::vector<IdentityCheck> verify_s_cases(const PairSetup& s, const Truncation& t, const SamplePoint& p);

// Partition-class sums of the T and S split lemmata, truncated at the given degree.
// T: tuple (L_b(X1+X2) x n, R_dY1, Y2, ..., R_dY1, Y2 R_c); O' uses (.., Y2, R_dY1, .., Y2 R_c).
SeriesValue t_class_sum(const PairSetup& s, TClass cls, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        int degree);
// S: tuple (L_bX1, X2, ..., R_dY1, Y2, ..., Y2 R_c); the O' classes use (X2, L_bX1, ..., X2, Y2, R_dY1, ..., Y2 R_c).
SeriesValue s_class_sum(const PairSetup& s, SClass cls, const BMatrix& b, const BMatrix& c, const BMatrix& d,
                        int degree);

enum class Theorem { Relations, RTransform, FreeS, SLemmata, TProperty, TCases, SProperty, SCases };
Theorem parse_theorem(const std::string& name);
std::string theorem_name(Theorem t);
// Name of the identity whose residual is tracked across truncation orders.
std::vector<std::string> headline_checks(Theorem t);

std::vector<IdentityCheck> verify_at(Theorem th, const PairSetup& s, const Truncation& t, const SamplePoint& p);

struct PointResult {
    SamplePoint point;
    std::vector<IdentityCheck> checks;
};

struct VerifyReport {
    std::string theorem;
    Truncation trunc;
    std::uint64_t seed = 0;
    std::vector<PointResult> points;
    bool pass = true;
    double worst_ratio = 0;  // max residual / tol
    nlohmann::json to_json() const;
};

VerifyReport verify(Theorem th, const PairSetup& s, const Truncation& t, int points, std::uint64_t seed);

// Headline residuals at each truncation order, at one point.
struct ConvergenceProfile {
    std::vector<int> orders;
    std::vector<std::string> names;
    std::vector<std::vector<double>> residuals;  // [name][order]
    bool non_increasing() const;
    nlohmann::json to_json() const;
};
ConvergenceProfile convergence_profile(Theorem th, const PairSetup& s, Truncation t, const SamplePoint& p,
                                       const std::vector<int>& orders);

}  // namespace bifree
