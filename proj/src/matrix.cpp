#include "bifree/matrix.hpp"

#include <cmath>
#include <sstream>

namespace bifree {

BMatrix identity(int d) { return BMatrix::Identity(d, d); }
BMatrix zeros(int d) { return BMatrix::Zero(d, d); }

BMatrix unit(int d, int i, int j) {
    BMatrix e = zeros(d);
    e(i, j) = 1.0;
    return e;
}

double condition_estimate(const BMatrix& b) {
    if (b.size() == 0) return 1.0;
    Eigen::JacobiSVD<BMatrix> svd(b);
    const auto& sv = svd.singularValues();
    double lo = sv(sv.size() - 1);
    return lo > 0 ? sv(0) / lo : INFINITY;
}

BMatrix inverse(const BMatrix& b, double max_condition) {
    double cond = b.allFinite() ? condition_estimate(b) : INFINITY;
    if (!(cond <= max_condition)) {
        std::ostringstream os;
        os << "matrix is singular or ill-conditioned (condition estimate " << cond << ")";
        throw SingularMatrixError(os.str(), cond);
    }
    return b.partialPivLu().inverse();
}

BMatrix cond_expect_diag(const BMatrix& b) {
    BMatrix out = zeros(static_cast<int>(b.rows()));
    out.diagonal() = b.diagonal();
    return out;
}

bool is_diagonal(const BMatrix& b, double tol) {
    for (int i = 0; i < b.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            if (i != j && std::abs(b(i, j)) > tol) return false;
    return true;
}

double max_abs(const BMatrix& b) { return b.size() ? b.cwiseAbs().maxCoeff() : 0.0; }
double max_abs_diff(const BMatrix& a, const BMatrix& b) { return max_abs(a - b); }
bool approx_equal(const BMatrix& a, const BMatrix& b, double tol) { return max_abs_diff(a, b) <= tol; }

double uniform(std::mt19937_64& rng, double lo, double hi) {
    // fixed mapping so draws do not depend on the standard library's distributions
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

BMatrix random_square(std::mt19937_64& rng, int d, double scale) {
    BMatrix b(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double re = uniform(rng, -scale, scale);
            double im = uniform(rng, -scale, scale);
            b(i, j) = cd(re, im);
        }
    return b;
}

BMatrix random_hermitian(std::mt19937_64& rng, int d, double scale) {
    BMatrix a = random_square(rng, d, scale);
    return (a + a.adjoint()) * 0.5;
}

BMatrix random_unitary(std::mt19937_64& rng, int d) {
    BMatrix a = random_square(rng, d, 1.0);
    Eigen::HouseholderQR<BMatrix> qr(a);
    BMatrix q = qr.householderQ();
    return q;
}

BMatrix sample_small_point(std::mt19937_64& rng, int d, double rho) {
    BMatrix u = random_unitary(rng, d);
    BMatrix diag = zeros(d);
    for (int k = 0; k < d; ++k) diag(k, k) = uniform(rng, 0.5, 1.0);
    return rho * (u * diag * u.adjoint());
}

BMatrix sample_unit_point(std::mt19937_64& rng, int d) {
    BMatrix c = random_square(rng, d, 1.0);
    return c / max_abs(c);
}

nlohmann::json matrix_to_json(const BMatrix& b) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < b.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < b.cols(); ++j) row.push_back({b(i, j).real(), b(i, j).imag()});
        rows.push_back(row);
    }
    return rows;
}

BMatrix matrix_from_json(const nlohmann::json& j) {
    int d = static_cast<int>(j.size());
    BMatrix b(d, d);
    for (int i = 0; i < d; ++i) {
        if (static_cast<int>(j[i].size()) != d) throw std::invalid_argument("matrix JSON must be square");
        for (int k = 0; k < d; ++k) {
            const auto& e = j[i][k];
            if (e.is_number()) b(i, k) = cd(e.get<double>(), 0.0);
            else b(i, k) = cd(e.at(0).get<double>(), e.at(1).get<double>());
        }
    }
    return b;
}

}  // namespace bifree
