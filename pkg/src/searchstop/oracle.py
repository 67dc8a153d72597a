"""Quasi-optimal stationary search.

The oracle schedules all arms to minimise the weighted completion objective
and then cuts the resulting order at the prefix with the smallest clamped
cost ratio. :func:`brute_force_oracle` enumerates every search instead and
serves as the reference for small DAGs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch
from .objective import INF, ParamVector
from .poset import Dag, _guard
from .scheduling import SchedulingStrategy, exhaustive_order, resolve, smith_order


@dataclass(frozen=True)
class OracleResult:
    search: tuple
    j_plus_value: float
    full_extension: tuple
    cut_index: int
    # every prefix had zero weight, so every candidate was +inf
    degenerate: bool = False


def prefix_j_plus(order: np.ndarray, w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Clamped cost ratio of each prefix ``order[:i]``, ``i = 1..len(order)``.

    ``order`` holds 0-based arm indices.
    """
    ws = w[order]
    cs = c[order]
    found = np.cumsum(ws)
    before = np.empty_like(found)
    if len(found):
        before[0] = 0.0
        before[1:] = found[:-1]
    num = np.cumsum(cs * (1.0 - before))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        j = np.where(found > 0, num / found, np.inf)
    return np.maximum(j, 0.0)


def cut(order: np.ndarray, w: np.ndarray, c: np.ndarray) -> tuple[int, float, bool]:
    """Best prefix length (smallest on ties), its value, and the degenerate flag."""
    vals = prefix_j_plus(order, w, c)
    i = int(np.argmin(vals))
    v = float(vals[i])
    return i + 1, v, math.isinf(v)


def oracle_order(dag: Dag, w: np.ndarray, c: np.ndarray, strategy=SchedulingStrategy.AUTO) -> np.ndarray:
    """0-based full linear extension produced by the scheduling step."""
    if resolve(dag, strategy) is SchedulingStrategy.SMITH_RULE:
        return smith_order(w, c)
    return np.asarray(exhaustive_order(dag, w, c), dtype=np.intp) - 1


def oracle(dag: Dag, p: ParamVector, strategy=SchedulingStrategy.AUTO) -> OracleResult:
    if dag.n != p.n:
        raise DimensionMismatch(f"DAG has {dag.n} arms, parameters {p.n}")
    w = np.asarray(p.w, dtype=float)
    c = np.asarray(p.c, dtype=float)
    order = oracle_order(dag, w, c, strategy)
    k, value, degenerate = cut(order, w, c)
    full = tuple(int(a) + 1 for a in order)
    return OracleResult(full[:k], value, full, k, degenerate)


def brute_force_oracle(dag: Dag, p: ParamVector, guard: int | None = None) -> OracleResult:
    """Exact minimiser of the clamped ratio over all searches.

    Ties go to the shortest search, then the lexicographically smallest.
    The returned ``full_extension`` is the search itself.
    """
    if dag.n != p.n:
        raise DimensionMismatch(f"DAG has {dag.n} arms, parameters {p.n}")
    _guard(dag, guard)
    n = dag.n
    w, c = p.w, p.c
    indeg = [len(q) for q in dag.predecessors]
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in dag.sorted_edges():
        succ[u - 1].append(v - 1)
    used = [False] * n
    prefix: list[int] = []
    best_key = (INF, 0, ())

    def rec(num, found):
        nonlocal best_key
        if prefix:
            val = max(0.0, num / found) if found > 0 else INF
            key = (val, len(prefix), tuple(prefix))
            if key < best_key:
                best_key = key
        for a in range(n):
            if used[a] or indeg[a]:
                continue
            used[a] = True
            prefix.append(a + 1)
            for b in succ[a]:
                indeg[b] -= 1
            rec(num + c[a] * (1.0 - found), found + w[a])
            for b in succ[a]:
                indeg[b] += 1
            prefix.pop()
            used[a] = False

    rec(0.0, 0.0)
    val, k, s = best_key
    return OracleResult(s, val, s, k, math.isinf(val))


def best_of(candidates: Iterable[Sequence[int]], w: Sequence[float], c: Sequence[float]) -> tuple[tuple[int, ...], float]:
    """Minimise the clamped ratio over an explicit list of searches (first wins ties)."""
    best, best_val = None, INF
    for s in candidates:
        num = found = 0.0
        for a in s:
            num += c[a - 1] * (1.0 - found)
            found += w[a - 1]
        val = max(0.0, num / found) if found > 0 else INF
        if best is None or val < best_val:
            best, best_val = tuple(s), val
    if best is None:
        raise ValueError("no candidate searches")
    return best, best_val


def j_star(instance, strategy=SchedulingStrategy.AUTO) -> float:
    """Optimal ratio under the instance's true parameters."""
    return oracle(instance.dag, instance.params, strategy).j_plus_value
