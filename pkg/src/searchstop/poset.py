"""Precedence DAGs over arms ``1..n`` and the searches they admit.

A search is a duplicate-free arm sequence in which every arm appears after
all of its DAG predecessors, i.e. a prefix of a linear extension.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import CycleDetected, InstanceTooLarge, InvalidVertexLabel

# Exhaustive enumeration ceiling (10! * e is roughly 9.9M sequences).
EXHAUSTIVE_GUARD = 10


@dataclass(frozen=True)
class Dag:
    n: int
    edges: frozenset
    # predecessors[v - 1] is the frozenset of direct predecessors of v
    predecessors: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        preds = [set() for _ in range(self.n)]
        for u, v in self.edges:
            preds[v - 1].add(u)
        object.__setattr__(self, "predecessors", tuple(frozenset(p) for p in preds))

    @property
    def arms(self) -> range:
        return range(1, self.n + 1)

    @property
    def is_edgeless(self) -> bool:
        return not self.edges

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def _check_label(n: int, a) -> int:
    if isinstance(a, bool) or not isinstance(a, (int,)) and not hasattr(a, "__index__"):
        raise InvalidVertexLabel(f"arm label {a!r} is not an integer")
    a = int(a)
    if not 1 <= a <= n:
        raise InvalidVertexLabel(f"arm label {a} outside 1..{n}")
    return a


def _find_cycle(n: int, succ: list[list[int]]) -> list[int] | None:
    # iterative three-colour DFS; returns the vertices of one cycle
    color = [0] * (n + 1)
    parent = [0] * (n + 1)
    for root in range(1, n + 1):
        if color[root]:
            continue
        stack = [(root, iter(succ[root]))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            for u in it:
                if color[u] == 0:
                    color[u] = 1
                    parent[u] = v
                    stack.append((u, iter(succ[u])))
                    break
                if color[u] == 1:
                    cycle = [v]
                    while cycle[-1] != u:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    return cycle + [u]
            else:
                color[v] = 2
                stack.pop()
    return None


def validate_dag(n: int, edges: Iterable[Sequence[int]] = ()) -> Dag:
    """Build a :class:`Dag`, rejecting bad labels, self-loops and cycles.

    Duplicate edges are collapsed. A self-loop is reported as a one-vertex
    cycle.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidVertexLabel(f"arm count must be a positive integer, got {n!r}")
    n = int(n)
    edge_set = set()
    for e in edges:
        u, v = e
        edge_set.add((_check_label(n, u), _check_label(n, v)))
    for u, v in edge_set:
        if u == v:
            raise CycleDetected([u, u])
    succ: list[list[int]] = [[] for _ in range(n + 1)]
    for u, v in sorted(edge_set):
        succ[u].append(v)
    cycle = _find_cycle(n, succ)
    if cycle is not None:
        raise CycleDetected(cycle)
    return Dag(n, frozenset(edge_set))


def edgeless(n: int) -> Dag:
    return validate_dag(n, ())


def chain(n: int) -> Dag:
    return validate_dag(n, [(i, i + 1) for i in range(1, n)])


def is_search(dag: Dag, seq: Sequence[int]) -> bool:
    seen = set()
    for a in seq:
        a = _check_label(dag.n, a)
        if a in seen or not dag.predecessors[a - 1] <= seen:
            return False
        seen.add(a)
    return True


def is_initial_set(dag: Dag, arms: Iterable[int]) -> bool:
    """True iff ``arms`` is predecessor-closed, i.e. the support of a search."""
    s = {_check_label(dag.n, a) for a in arms}
    return all(dag.predecessors[a - 1] <= s for a in s)


def _guard(dag: Dag, guard: int | None) -> None:
    limit = EXHAUSTIVE_GUARD if guard is None else guard
    if dag.n > limit:
        raise InstanceTooLarge(f"n={dag.n} exceeds the exhaustive guard {limit}")


def enumerate_searches(dag: Dag, guard: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every search of ``dag`` once, the empty search first.

    Depth-first over the currently available arms in ascending order, so a
    search is always yielded before its extensions.
    """
    _guard(dag, guard)
    n = dag.n
    indeg = [len(p) for p in dag.predecessors]
    succ: list[list[int]] = [[] for _ in range(n + 1)]
    for u, v in dag.sorted_edges():
        succ[u].append(v)
    prefix: list[int] = []
    used = [False] * (n + 1)

    def rec():
        yield tuple(prefix)
        for a in range(1, n + 1):
            if used[a] or indeg[a - 1]:
                continue
            used[a] = True
            prefix.append(a)
            for b in succ[a]:
                indeg[b - 1] -= 1
            yield from rec()
            for b in succ[a]:
                indeg[b - 1] += 1
            prefix.pop()
            used[a] = False

    yield from rec()


def linear_extensions(dag: Dag, guard: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield the full-length searches in lexicographic order."""
    n = dag.n
    for s in enumerate_searches(dag, guard):
        if len(s) == n:
            yield s


def read_dag_file(path: str | Path) -> Dag:
    """Parse the DAG text format: first line ``n``, then ``u v`` edge lines.

    Blank lines and lines starting with ``#`` are ignored.
    """
    lines = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if line and not line.startswith("#"):
            lines.append(line)
    if not lines:
        raise ValueError(f"{path}: empty DAG file")
    n = int(lines[0])
    edges = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}: malformed edge line {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    return validate_dag(n, edges)


def write_dag_file(dag: Dag, path: str | Path) -> None:
    body = [str(dag.n)] + [f"{u} {v}" for u, v in dag.sorted_edges()]
    Path(path).write_text("\n".join(body) + "\n")
