"""Linear extensions minimising the weighted completion objective.

Smith's ratio rule is exact when there are no precedence constraints; for
general DAGs a depth-first branch and bound over linear extensions is used,
limited to small instances.
"""
from __future__ import annotations

import enum
import math
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, InstanceTooLarge, NotEdgeless, StrategyUnavailable
from .objective import ParamVector
from .poset import EXHAUSTIVE_GUARD, Dag


class SchedulingStrategy(enum.Enum):
    SMITH_RULE = "smith"
    EXHAUSTIVE = "exhaustive"
    AUTO = "auto"


def smith_order(w: np.ndarray, c: np.ndarray) -> np.ndarray:
    """0-based permutation sorting arms by decreasing ``w / c``.

    Zero-cost arms with positive weight have ratio +inf and come first,
    ordered among themselves by larger weight. Remaining ties go to the
    smaller index. ``0 / 0`` counts as ratio 0.
    """
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(c > 0, w / c, np.where(w > 0, np.inf, 0.0))
    inf_tiebreak = np.where(np.isinf(ratio), -w, 0.0)
    # lexsort: last key is primary; stable on the index
    return np.lexsort((inf_tiebreak, -ratio))


def smith_rule(p: ParamVector, dag: Dag | None = None) -> tuple[int, ...]:
    if dag is not None and not dag.is_edgeless:
        raise NotEdgeless("Smith's rule needs a DAG without edges")
    if dag is not None and dag.n != p.n:
        raise DimensionMismatch(f"DAG has {dag.n} arms, parameters {p.n}")
    order = smith_order(np.asarray(p.w), np.asarray(p.c))
    return tuple(int(i) + 1 for i in order)


def exhaustive_order(dag: Dag, w: Sequence[float], c: Sequence[float], guard: int | None = None) -> tuple[int, ...]:
    """Lexicographically smallest linear extension of minimum d.

    Depth-first in ascending label order with pruning on the partial
    objective (a lower bound, since all terms are non-negative).
    """
    limit = EXHAUSTIVE_GUARD if guard is None else guard
    n = dag.n
    if n > limit:
        raise InstanceTooLarge(f"n={n} exceeds the exhaustive guard {limit}")
    if len(w) != n or len(c) != n:
        raise DimensionMismatch(f"DAG has {n} arms, parameters {len(w)}")
    w = [float(x) for x in w]
    c = [float(x) for x in c]
    indeg = [len(p) for p in dag.predecessors]
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in dag.sorted_edges():
        succ[u - 1].append(v - 1)

    best_val = math.inf
    best: list[int] = []
    prefix: list[int] = []
    used = [False] * n

    def rec(val, spent):
        nonlocal best_val, best
        # equal-valued completions never replace an earlier (smaller) one
        if val > best_val or (val == best_val and best):
            return
        if len(prefix) == n:
            if val < best_val or not best:
                best_val = val
                best = prefix.copy()
            return
        for a in range(n):
            if used[a] or indeg[a]:
                continue
            used[a] = True
            prefix.append(a)
            for b in succ[a]:
                indeg[b] -= 1
            s2 = spent + c[a]
            rec(val + w[a] * s2, s2)
            for b in succ[a]:
                indeg[b] += 1
            prefix.pop()
            used[a] = False

    rec(0.0, 0.0)
    return tuple(a + 1 for a in best)


def exhaustive_scheduling(dag: Dag, p: ParamVector, guard: int | None = None) -> tuple[int, ...]:
    return exhaustive_order(dag, p.w, p.c, guard)


def resolve(dag: Dag, strategy: SchedulingStrategy) -> SchedulingStrategy:
    """Concrete strategy to use for ``dag``; raises if inapplicable."""
    strategy = SchedulingStrategy(strategy)
    if strategy is SchedulingStrategy.AUTO:
        return SchedulingStrategy.SMITH_RULE if dag.is_edgeless else SchedulingStrategy.EXHAUSTIVE
    if strategy is SchedulingStrategy.SMITH_RULE and not dag.is_edgeless:
        raise NotEdgeless("Smith's rule needs a DAG without edges")
    if strategy not in (SchedulingStrategy.SMITH_RULE, SchedulingStrategy.EXHAUSTIVE):
        raise StrategyUnavailable(str(strategy))
    return strategy


def scheduling(dag: Dag, p: ParamVector, strategy: SchedulingStrategy = SchedulingStrategy.AUTO) -> tuple[int, ...]:
    if dag.n != p.n:
        raise DimensionMismatch(f"DAG has {dag.n} arms, parameters {p.n}")
    if resolve(dag, strategy) is SchedulingStrategy.SMITH_RULE:
        return smith_rule(p)
    return exhaustive_scheduling(dag, p)
