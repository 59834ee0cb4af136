"""Exact solver and certifier for envy-free, Pareto-efficient mixed allocations.

Instances and allocations are plain dicts in the CLI's JSON format. Rationals
come back as ``fractions.Fraction`` where a numeric value is expected.
"""

import json
from fractions import Fraction

from . import _efpe
from ._efpe import InputError, SearchFailure

__all__ = [
    "InputError",
    "SearchFailure",
    "closure",
    "envy_graph",
    "gen_hard",
    "project",
    "solve",
    "verify",
    "verify_dichotomy",
]


def _dump(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


def solve(instance, epsilon="auto", max_iters=64, grid=8, jobs=1, strict=False):
    """Find a certified EF+PE mixed allocation; returns the CLI's result dict."""
    eps = epsilon if epsilon == "auto" else str(Fraction(epsilon))
    return json.loads(_efpe.solve(_dump(instance), eps, max_iters, grid, jobs, strict))


def verify(instance, allocation):
    """Certificate dict for a mixed allocation ``{"p": [...]}`` or a bare entry list."""
    if isinstance(allocation, list):
        allocation = {"p": allocation}
    return json.loads(_efpe.verify(_dump(instance), _dump(allocation)))


def envy_graph(instance, allocation):
    if isinstance(allocation, list):
        allocation = {"p": allocation}
    return _efpe.envy_graph(_dump(instance), _dump(allocation))


def closure(instance):
    return json.loads(_efpe.closure(_dump(instance)))


def gen_hard(p, x1, x2):
    return json.loads(_efpe.gen_hard(p, x1, x2))


def verify_dichotomy(p, x1, x2):
    return json.loads(_efpe.verify_dichotomy(p, x1, x2))


def project(y, epsilon):
    """Euclidean projection of ``y`` (summing to 1) onto {w : sum w = 1, w >= epsilon}."""
    out = _efpe.project([str(Fraction(v)) for v in y], str(Fraction(epsilon)))
    return [Fraction(v) for v in out]
