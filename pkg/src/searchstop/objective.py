"""Scheduling and search objectives.

Every function takes a search as a sequence of 1-indexed arm labels and a
:class:`ParamVector`. ``math.inf`` represents the +infinity value produced
by the empty-search and zero-weight conventions; sums are accumulated left
to right in double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NonTrueParameters

INF = math.inf
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class ParamVector:
    """Hider weights ``w`` and expected costs ``c``, both non-negative.

    ``true=True`` marks ground-truth parameters, which must additionally sum
    to one in ``w`` and have strictly positive costs.
    """

    w: tuple
    c: tuple
    true: bool = False

    def __init__(self, w: Iterable[float], c: Iterable[float], true: bool = False):
        w = tuple(float(x) for x in w)
        c = tuple(float(x) for x in c)
        if len(w) != len(c):
            raise DimensionMismatch(f"len(w)={len(w)} but len(c)={len(c)}")
        if any(not x >= 0 for x in w + c):
            raise ValueError("parameters must be non-negative")
        if true:
            if abs(math.fsum(w) - 1.0) > SIMPLEX_TOL:
                raise NonTrueParameters(f"true weights sum to {math.fsum(w)!r}, not 1")
            if any(x > 1 for x in w) or any(not 0 < x for x in c):
                raise NonTrueParameters("true weights must lie in [0, 1] and costs be > 0")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "true", bool(true))

    @property
    def n(self) -> int:
        return len(self.w)

    @classmethod
    def from_arrays(cls, w, c, true=False) -> "ParamVector":
        return cls(np.asarray(w, dtype=float).ravel(), np.asarray(c, dtype=float).ravel(), true)


def _check(s: Sequence[int], p: ParamVector) -> None:
    n = p.n
    for a in s:
        if not 1 <= a <= n:
            raise DimensionMismatch(f"arm {a} outside a {n}-arm parameter vector")


def weighted_completion(s: Sequence[int], p: ParamVector) -> float:
    """d(s | w, c): each arm's weight times the cumulative cost through it."""
    _check(s, p)
    total = 0.0
    spent = 0.0
    for a in s:
        spent += p.c[a - 1]
        total += p.w[a - 1] * spent
    return total


def _ratio_parts(s: Sequence[int], w: Sequence[float], c: Sequence[float]) -> tuple[float, float]:
    num = 0.0
    found = 0.0
    for a in s:
        num += c[a - 1] * (1.0 - found)
        found += w[a - 1]
    return num, found


def cost_ratio_j(s: Sequence[int], p: ParamVector) -> float:
    """Expected cost paid per expected hider found when repeating ``s``.

    +inf for the empty search and whenever ``s`` carries zero total weight.
    With weights off the simplex the value can be negative.
    """
    _check(s, p)
    num, found = _ratio_parts(s, p.w, p.c)
    if not s or found == 0.0:
        return INF
    return num / found


def cost_ratio_j_plus(s: Sequence[int], p: ParamVector) -> float:
    return max(0.0, cost_ratio_j(s, p))


def density(arms: Iterable[int], p: ParamVector) -> float:
    arms = list(arms)
    _check(arms, p)
    ws = sum(p.w[a - 1] for a in arms)
    cs = sum(p.c[a - 1] for a in arms)
    if cs == 0.0:
        return INF if ws > 0 else 0.0
    return ws / cs


def gap(s: Sequence[int], true_p: ParamVector, j_star: float) -> float:
    """Local regret of selecting ``s`` once instead of an optimal search.

    Clamped at zero so optimal searches report exactly 0. Note the formula
    also yields 0 for the empty search.
    """
    if not true_p.true:
        raise NonTrueParameters("gap is defined against the true parameters only")
    if not j_star > 0:
        raise ValueError(f"j_star must be positive, got {j_star!r}")
    _check(s, true_p)
    num, found = _ratio_parts(s, true_p.w, true_p.c)
    return max(0.0, num / j_star - found)
