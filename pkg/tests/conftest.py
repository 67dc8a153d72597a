import itertools
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from searchstop.experiments import instance_two_path, two_path_dag
from searchstop.poset import edgeless, validate_dag
from searchstop.simulator import make_instance


@pytest.fixture
def fig2_dag():
    # a1 -> a2 and b1 -> b2, labelled 1, 2 and 3, 4
    return two_path_dag(4)


@pytest.fixture
def example_instance():
    """Two arms, costs 1/4 and 1, hider uniform."""
    return make_instance(edgeless(2), [0.5, 0.5], [0.25, 1.0])


@pytest.fixture
def two_path4():
    return instance_two_path(4, 0.1, "D1")


@st.composite
def dags(draw, max_n=6, min_n=1):
    n = draw(st.integers(min_n, max_n))
    perm = draw(st.permutations(range(1, n + 1)))
    pairs = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return validate_dag(n, [p for p, keep in zip(pairs, mask) if keep])


def brute_searches(dag):
    """All searches via permutations of every subset; independent of the DFS enumerator."""
    out = []
    for k in range(dag.n + 1):
        for seq in itertools.permutations(range(1, dag.n + 1), k):
            seen = set()
            ok = True
            for a in seq:
                if not dag.predecessors[a - 1] <= seen:
                    ok = False
                    break
                seen.add(a)
            if ok:
                out.append(seq)
    return out


def exact_j(s, w, c):
    """Cost ratio in exact rational arithmetic; None stands for +inf."""
    num = Fraction(0)
    found = Fraction(0)
    for a in s:
        num += Fraction(c[a - 1]) * (1 - found)
        found += Fraction(w[a - 1])
    if not s or found == 0:
        return None
    return num / found


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE_RESULTS: dict = {}


def record_criterion(number, ok, detail):
    ACCEPTANCE_RESULTS[number] = (bool(ok), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
