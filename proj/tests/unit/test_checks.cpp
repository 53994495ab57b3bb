#include <doctest.h>

#include "bifree/checks.hpp"

using namespace bifree;

TEST_CASE("bi-freeness of scalar pairs and the shared-generator control") {
    std::vector<ScalarPairSpec> specs = {{{0.2, 1.0, 0.3}, {-0.1, 1.0, 0.2}}, {{0.1, 1.0, -0.2}, {0.3, 0.5}}};
    CheckOptions opt;
    opt.max_order = 4;
    auto ok = check_bifree(scalar_pairs(6, specs), opt);
    CHECK(ok.pass);
    CHECK(ok.worst < 1e-12);
    CHECK(ok.evaluated > 0);
    auto bad = check_bifree(scalar_pairs(6, specs, true), opt);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst >= 0.5);
    CHECK_FALSE(bad.witnesses.items().empty());
    // deterministic under a fixed seed
    CHECK(check_bifree(scalar_pairs(6, specs, true), opt).to_json() == bad.to_json());
    CHECK_THROWS_AS(check_bifree(scalar_pairs(6, {specs[0]}), opt), std::invalid_argument);
}

TEST_CASE("matrix lifts are bi-free over M_2") {
    std::mt19937_64 rng(5);
    CheckOptions opt;
    opt.max_order = 3;
    opt.tol = 1e-8;
    auto rep = check_bifree(matrix_lift_pairs(2, 4, 2, rng), opt);
    CHECK(rep.pass);
}

TEST_CASE("conditional expectation probes") {
    std::mt19937_64 rng(1);
    auto p = probe_expectation(ConditionalExpectation{}, 3, rng);
    CHECK(p.ok(1e-14));
    ConditionalExpectation corner{"corner", [](const BMatrix& b) {
                                      BMatrix o = zeros(static_cast<int>(b.rows()));
                                      o(0, 0) = b(0, 0);
                                      return o;
                                  }};
    auto q = probe_expectation(corner, 2, rng);
    CHECK_FALSE(q.ok(1e-14));
    CHECK_THROWS_AS(check_bifree_over_D(creation_example(2, 1, 4).family("c"), CheckOptions{}, corner), std::invalid_argument);
}

TEST_CASE("R-cyclic pairs and their negative control") {
    CheckOptions opt;
    opt.max_order = 4;
    auto good = check_r_cyclic(FockEntrySource(creation_example(2, 2, 4)), opt);
    CHECK(good.pass);
    CHECK(good.evaluated > 0);
    CHECK(good.pruned > 0);
    opt.max_order = 3;
    auto bad = check_r_cyclic(FockEntrySource(creation_example(2, 2, 4, true)), opt);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst >= 0.1);
    auto diag = check_r_cyclic(FockEntrySource(diagonal_pair(6, {ScalarPairSpec{}, ScalarPairSpec{{0.3, 1.0, 0.2}, {0.1, 1.0}}})), opt);
    CHECK(diag.pass);
    opt.max_order = 4;
    auto rd = check_r_cyclic(*r_diagonal_pair(4), opt);
    CHECK(rd.pass);
    // a diagonal pair whose entries share a generator is not R-cyclic
    auto shared = diagonal_pair(6, {ScalarPairSpec{}, ScalarPairSpec{}});
    shared.mats[0].at(1, 1) = polynomial_element(6, 1, {0.0, 1.0}, Side::L);
    opt.max_order = 2;
    CHECK_FALSE(check_r_cyclic(FockEntrySource(shared), opt).pass);
}

TEST_CASE("bi-freeness over the diagonal") {
    CheckOptions opt;
    opt.max_order = 2;
    opt.tol = 1e-8;
    auto good = check_bifree_over_D(creation_example(2, 1, 4).family("c"), opt);
    CHECK(good.pass);
    auto bad = check_bifree_over_D(creation_example(2, 1, 4, true).family("c"), opt);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_condition1 >= 0.1);
}

TEST_CASE("matrix cumulants expand into entry cumulants") {
    auto pair = creation_example(2, 1, 4);
    CHECK(max_abs(chi_matrix_unit_product(ChiShape::from_string("ll"), 2, {0, 1}, {0, 1})) == 0.0);
    CHECK(max_abs_diff(chi_matrix_unit_product(ChiShape::from_string("lr"), 2, {0, 1}, {1, 0}), unit(2, 0, 0)) == 0.0);
    for (const auto& word : std::vector<std::vector<int>>{{0}, {1, 0}, {1, 2}, {3, 0}, {1, 3, 0}, {3, 2, 1, 0}}) {
        auto r = matrix_cumulant_expand(pair, word);
        CHECK(r.residual < 1e-10);
    }
    auto r = matrix_cumulant_expand(pair, {1, 0});
    CHECK(max_abs(r.matrix_level) > 0.5);
}

TEST_CASE("diagonal-valued cumulant formula") {
    auto pair = creation_example(2, 1, 4);
    std::mt19937_64 rng(3);
    for (const auto& word : std::vector<std::vector<int>>{{1, 0}, {3, 0}, {1, 2}, {0, 1}}) {
        std::vector<BMatrix> lam, gam;
        for (size_t k = 0; k < word.size(); ++k) {
            lam.push_back(cond_expect_diag(random_square(rng, 2, 1.0)));
            gam.push_back(cond_expect_diag(random_square(rng, 2, 1.0)));
        }
        auto r = diagonal_cumulant_formula(pair, word, lam, gam);
        CHECK(r.residual < 1e-9);
        CHECK(r.hypothesis_residual < 1e-12);
        std::vector<BMatrix> ones(word.size(), identity(2));
        auto u = diagonal_cumulant_formula(pair, word, ones, ones);
        CHECK(u.residual < 1e-9);
    }
}
