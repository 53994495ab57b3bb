"""Bi-free probability with amalgamation: partitions, transforms and the check suite."""

import json

from ._bifree import (
    ConfigError,
    TransformError,
    catalan,
    enumerate_bnc,
    enumerate_bnc_prime,
    explain,
    join,
    meet,
    mobius,
    suite_check_names,
)
from . import _bifree

__all__ = [
    "ConfigError",
    "TransformError",
    "catalan",
    "enumerate_bnc",
    "enumerate_bnc_prime",
    "explain",
    "join",
    "meet",
    "mobius",
    "run_suite",
    "suite_check_names",
    "verify",
]


def verify(theorem, order=5, rho=0.05, points=2, seed=11):
    """Verify a transform identity group at seeded points; returns the report as a dict."""
    return json.loads(_bifree.verify(theorem, order, rho, points, seed))


def run_suite(config=None):
    """Run the suite for a config dict; returns the report as a dict."""
    return json.loads(_bifree.run_suite(json.dumps(config or {})))
