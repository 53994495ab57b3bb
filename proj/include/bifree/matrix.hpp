#pragma once

#include <complex>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

namespace bifree {

using cd = std::complex<double>;
using BMatrix = Eigen::MatrixXcd;

struct MatrixConfig {
    double tol = 1e-9;
    double max_condition = 1e12;
};

struct SingularMatrixError : std::runtime_error {
    double condition;
    SingularMatrixError(const std::string& what, double cond) : std::runtime_error(what), condition(cond) {}
};

BMatrix identity(int d);
BMatrix zeros(int d);
// Matrix unit E_{i,j} (0-based).
BMatrix unit(int d, int i, int j);

// 1-norm condition estimate.
double condition_estimate(const BMatrix& b);
BMatrix inverse(const BMatrix& b, double max_condition = MatrixConfig{}.max_condition);

// Conditional expectation onto the diagonal.
BMatrix cond_expect_diag(const BMatrix& b);
bool is_diagonal(const BMatrix& b, double tol = 0.0);

double max_abs(const BMatrix& b);
double max_abs_diff(const BMatrix& a, const BMatrix& b);
bool approx_equal(const BMatrix& a, const BMatrix& b, double tol = MatrixConfig{}.tol);

// Random draws. Entries uniform in [-scale, scale] + i[-scale, scale].
BMatrix random_square(std::mt19937_64& rng, int d, double scale);
BMatrix random_hermitian(std::mt19937_64& rng, int d, double scale);
BMatrix random_unitary(std::mt19937_64& rng, int d);
// rho * U diag(u_k) U^*, u_k uniform in [0.5, 1].
BMatrix sample_small_point(std::mt19937_64& rng, int d, double rho);
// Arbitrary matrix of unit max-entry norm.
BMatrix sample_unit_point(std::mt19937_64& rng, int d);
double uniform(std::mt19937_64& rng, double lo, double hi);

// Row-major arrays of [re, im] pairs.
nlohmann::json matrix_to_json(const BMatrix& b);
BMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace bifree
