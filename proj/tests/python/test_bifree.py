import itertools
import math

import pytest

import bifree


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


@pytest.mark.parametrize("n", range(1, 7))
def test_counts_are_catalan_for_every_shape(n):
    for word in itertools.product("lr", repeat=n):
        assert len(bifree.enumerate_bnc("".join(word))) == catalan(n)
    assert bifree.catalan(n) == catalan(n)


def test_mobius_zero_to_one():
    for n in range(1, 6):
        zero = [[p] for p in range(n)]
        one = [list(range(n))]
        assert bifree.mobius("l" * n, zero, one) == (-1) ** (n - 1) * catalan(n - 1)


def test_join_and_meet():
    assert bifree.join("llll", [[0, 1], [2], [3]], [[0], [1, 2], [3]]) == [[0, 1, 2], [3]]
    assert bifree.meet("llll", [[0, 1, 2], [3]], [[0], [1, 2, 3]]) == [[0], [1, 2], [3]]


def test_prime_family_size():
    for n in range(1, 5):
        assert len(bifree.enumerate_bnc_prime("l", n)) == catalan(n - 1)
        assert len(bifree.enumerate_bnc_prime("r", n)) == catalan(n - 1)


def test_verify_relations():
    report = bifree.verify("relations", order=4, points=1)
    assert report["pass"]
    for check in report["points"][0]["checks"]:
        assert check["residual"] <= check["tail_tol"]


def test_unknown_theorem():
    with pytest.raises(Exception):
        bifree.verify("nosuch")


def test_suite_filter_and_errors():
    report = bifree.run_suite({"checks": ["mobius", "bnc-prime"], "sizes": {"lattice_max_n": 5, "mobius_max_n": 4}})
    assert [c["name"] for c in report["checks"]] == ["mobius", "bnc-prime"]
    assert report["pass"]
    with pytest.raises(ValueError):
        bifree.run_suite({"checks": ["nosuch"]})
    with pytest.raises(ValueError):
        bifree.run_suite({"nosuch": 1})


def test_explain_lists_names_on_error():
    assert "rcyclic" in bifree.explain("rcyclic")
    with pytest.raises(Exception, match="mobius"):
        bifree.explain("nosuch")
