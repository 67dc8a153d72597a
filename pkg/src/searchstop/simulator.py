"""Stochastic environment, budget accounting and episode records.

A round draws one hider arm from the categorical weights and one cost per
arm, independently. The selected search is performed up to and including
the hider (or entirely, if the hider is elsewhere). Rounds keep being played
while the remaining budget is non-negative; the round that drives it below
zero is played and paid but its reward does not count.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameters, MaxRoundsExceeded
from .objective import ParamVector, gap
from .oracle import j_star as _j_star
from .policies import Kind, Policy, PolicyKind
from .poset import Dag, enumerate_searches
from .scheduling import SchedulingStrategy

BLOCK = 1024
DEFAULT_CHECKPOINTS = 200
OPTIMAL_TOL = 1e-12

# stream tags for SeedSequence spawn keys
_ENV = 0
_POLICY = 1
_POLICY_CODE = {Kind.CUCB_V: 0, Kind.CUCB: 1, Kind.CUCB_KL: 2, Kind.THOMPSON: 3}


class CostModel(enum.Enum):
    DETERMINISTIC = "deterministic"
    BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class ProblemInstance:
    dag: Dag
    params: ParamVector
    cost_model: CostModel = CostModel.DETERMINISTIC
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "cost_model", CostModel(self.cost_model))
        if not self.params.true:
            raise InvalidParameters("instance parameters must be flagged as true parameters")
        if self.dag.n != self.params.n:
            raise InvalidParameters(f"DAG has {self.dag.n} arms, parameters {self.params.n}")
        if any(x > 1 for x in self.params.c):
            raise InvalidParameters("expected costs must lie in (0, 1]")

    @property
    def n(self) -> int:
        return self.dag.n

    @property
    def w_star(self) -> np.ndarray:
        return np.asarray(self.params.w)

    @property
    def c_star(self) -> np.ndarray:
        return np.asarray(self.params.c)


def make_instance(dag: Dag, w, c, cost_model=CostModel.DETERMINISTIC, name="") -> ProblemInstance:
    return ProblemInstance(dag, ParamVector(w, c, true=True), CostModel(cost_model), name)


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (master seed, key...) pair."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))))


def env_stream(seed: int, run: int) -> np.random.Generator:
    return stream(seed, run, _ENV)


def policy_stream(seed: int, run: int, kind: PolicyKind) -> np.random.Generator:
    return stream(seed, run, _POLICY, _POLICY_CODE[kind.kind])


def draw_block(instance: ProblemInstance, rng: np.random.Generator, size: int) -> tuple[np.ndarray, np.ndarray]:
    """``size`` rounds: a (size, n) cost matrix and 1-based hider labels."""
    cum = np.cumsum(instance.w_star)
    u = rng.random(size) * cum[-1]
    hiders = np.minimum(np.searchsorted(cum, u, side="right"), instance.n - 1) + 1
    if instance.cost_model is CostModel.BERNOULLI:
        costs = (rng.random((size, instance.n)) < instance.c_star).astype(float)
    else:
        costs = np.broadcast_to(instance.c_star, (size, instance.n))
    return costs, hiders


def sample_round(instance: ProblemInstance, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    costs, hiders = draw_block(instance, rng, 1)
    return np.array(costs[0]), int(hiders[0])


class RoundSource:
    """Per-round view over block draws, so stream use does not depend on the policy."""

    def __init__(self, instance: ProblemInstance, rng: np.random.Generator, block: int = BLOCK):
        self.instance = instance
        self.rng = rng
        self.block = block
        self._costs: list = []
        self._hiders: list = []
        self._i = 0

    def next(self) -> tuple[list, int]:
        if self._i == len(self._hiders):
            costs, hiders = draw_block(self.instance, self.rng, self.block)
            self._costs = costs.tolist()
            self._hiders = hiders.tolist()
            self._i = 0
        i = self._i
        self._i += 1
        return self._costs[i], self._hiders[i]


@dataclass(frozen=True)
class RoundOutcome:
    performed_len: int
    cost_paid: float
    reward: int
    hider_arm: int | None


def perform_search(selected: Sequence[int], hider: int, costs: Sequence[float]) -> RoundOutcome:
    """Examine ``selected`` in order until the hider is found or the search ends.

    ``hider_arm`` is None when the hider lies outside the selected search.
    """
    spent = 0.0
    for pos, a in enumerate(selected, 1):
        spent += costs[a - 1]
        if a == hider:
            return RoundOutcome(pos, spent, 1, hider)
    return RoundOutcome(len(selected), spent, 0, None)


@dataclass
class BudgetLedger:
    initial: float
    spent: float = 0.0
    rounds_played: int = 0
    reward_counted: int = 0
    stopped: bool = False

    @property
    def remaining(self) -> float:
        return self.initial - self.spent

    def charge(self, cost: float, reward: int) -> None:
        if self.stopped:
            raise RuntimeError("budget already exhausted")
        self.spent += cost
        self.rounds_played += 1
        if self.remaining < 0:
            self.stopped = True
        else:
            self.reward_counted += reward


@dataclass
class EpisodeRecord:
    """Per-round log of one episode plus its checkpoint series.

    ``spent[t]`` is the cumulative cost after round ``t + 1``. Checkpoint
    ``k`` reports, for budget ``checkpoint_budget[k]``, the reward of all
    rounds that finished within that budget, which is exactly the counted
    reward an episode with that smaller budget would have collected.
    """

    budget: float
    selected_len: np.ndarray
    performed_len: np.ndarray
    cost_paid: np.ndarray
    reward: np.ndarray
    spent: np.ndarray
    checkpoint_budget: np.ndarray = field(default=None)
    checkpoint_reward: np.ndarray = field(default=None)
    checkpoint_rounds: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.checkpoint_budget is None:
            self.set_checkpoints(DEFAULT_CHECKPOINTS)

    @property
    def remaining(self) -> np.ndarray:
        return self.budget - self.spent

    @property
    def tau_b(self) -> int:
        """Index of the round that overshot the budget (rounds played)."""
        return len(self.reward)

    @property
    def reward_counted(self) -> int:
        return int(self.reward[:-1].sum()) if len(self.reward) else 0

    def set_checkpoints(self, count: int) -> None:
        grid = self.budget * np.arange(1, count + 1) / count
        grid[-1] = self.budget
        k = np.searchsorted(self.spent, grid, side="right")
        cum = np.concatenate(([0], np.cumsum(self.reward)))
        self.checkpoint_budget = grid
        self.checkpoint_reward = cum[k]
        self.checkpoint_rounds = k

    def checkpoint_regret(self, j_star: float) -> np.ndarray:
        return self.checkpoint_budget / j_star - self.checkpoint_reward


def regret_proxy(record: EpisodeRecord, j_star: float, budget: float | None = None) -> float:
    """Budget over the optimal ratio, minus the counted reward."""
    if not j_star > 0:
        raise ValueError(f"j_star must be positive, got {j_star!r}")
    b = record.budget if budget is None else budget
    return b / j_star - record.reward_counted


def default_max_rounds(instance: ProblemInstance, budget: float) -> int:
    return 10 * math.ceil(2 * budget / float(np.min(instance.c_star)))


def _record(budget, sel, perf, cost, rew, spent, checkpoints) -> EpisodeRecord:
    rec = EpisodeRecord(
        float(budget),
        np.asarray(sel, dtype=np.int64),
        np.asarray(perf, dtype=np.int64),
        np.asarray(cost, dtype=float),
        np.asarray(rew, dtype=np.int64),
        np.asarray(spent, dtype=float),
        checkpoint_budget=np.empty(0),
    )
    rec.set_checkpoints(checkpoints)
    return rec


def run_episode(
    instance: ProblemInstance,
    policy: PolicyKind,
    budget: float,
    seed: int = 0,
    run: int = 0,
    strategy=SchedulingStrategy.AUTO,
    checkpoints: int = DEFAULT_CHECKPOINTS,
    max_rounds: int | None = None,
    action_set=None,
) -> EpisodeRecord:
    """Play one budgeted episode with an online learner.

    Deterministic in ``(seed, run)``: the environment stream depends only on
    those, so different policies see the same hider and cost draws round by
    round.
    """
    if not budget > 0:
        raise InvalidParameters(f"budget must be positive, got {budget!r}")
    limit = default_max_rounds(instance, budget) if max_rounds is None else max_rounds
    learner = Policy(instance.dag, policy, strategy, policy_stream(seed, run, policy), action_set)
    source = RoundSource(instance, env_stream(seed, run))
    sel, perf, cost, rew, spent_log = [], [], [], [], []
    spent = 0.0
    while budget - spent >= 0:
        if len(rew) >= limit:
            raise MaxRoundsExceeded(f"more than {limit} rounds without exhausting budget {budget}")
        s = learner.select()
        costs, hider = source.next()
        out = perform_search(s, hider, costs)
        L = out.performed_len
        learner.observe(s, L, [1 if a == hider else 0 for a in s], [costs[a - 1] for a in s[:L]])
        spent += out.cost_paid
        sel.append(len(s))
        perf.append(L)
        cost.append(out.cost_paid)
        rew.append(out.reward)
        spent_log.append(spent)
    return _record(budget, sel, perf, cost, rew, spent_log, checkpoints)


def run_stationary(
    instance: ProblemInstance,
    search: Sequence[int],
    budget: float,
    seed: int = 0,
    run: int = 0,
    checkpoints: int = DEFAULT_CHECKPOINTS,
    max_rounds: int | None = None,
) -> EpisodeRecord:
    """Select the same search every round; vectorised over blocks of rounds."""
    if not budget > 0:
        raise InvalidParameters(f"budget must be positive, got {budget!r}")
    limit = default_max_rounds(instance, budget) if max_rounds is None else max_rounds
    n = instance.n
    s = np.asarray(search, dtype=np.intp)
    pos = np.zeros(n + 1, dtype=np.int64)
    pos[s] = np.arange(1, len(s) + 1)
    rng = env_stream(seed, run)
    perf_parts, cost_parts, rew_parts, spent_parts = [], [], [], []
    offset = 0.0
    played = 0
    while True:
        costs, hiders = draw_block(instance, rng, BLOCK)
        p = pos[hiders]
        found = p > 0
        L = np.where(found, p, len(s))
        if len(s):
            cum = np.cumsum(costs[:, s - 1], axis=1)
            paid = np.where(L > 0, cum[np.arange(BLOCK), np.maximum(L - 1, 0)], 0.0)
        else:
            paid = np.zeros(BLOCK)
        # accumulate from the running offset so rounding matches a sequential sum
        spent = np.cumsum(np.concatenate(([offset], paid)))[1:]
        over = np.flatnonzero(spent > budget)
        stop = int(over[0]) + 1 if len(over) else BLOCK
        if played + stop > limit:
            raise MaxRoundsExceeded(f"more than {limit} rounds without exhausting budget {budget}")
        perf_parts.append(L[:stop])
        cost_parts.append(paid[:stop])
        rew_parts.append(found[:stop].astype(np.int64))
        spent_parts.append(spent[:stop])
        played += stop
        offset = float(spent[stop - 1])
        if len(over):
            break
    perf = np.concatenate(perf_parts)
    return _record(
        budget,
        np.full(len(perf), len(s)),
        perf,
        np.concatenate(cost_parts),
        np.concatenate(rew_parts),
        np.concatenate(spent_parts),
        checkpoints,
    )


def min_gap_per_arm(instance: ProblemInstance, searches=None, j_star: float | None = None) -> np.ndarray:
    """Smallest gap among non-optimal searches containing each arm.

    ``searches`` defaults to every search of the DAG; arms that only occur
    in optimal searches (or in none) get +inf. Entry ``i`` is arm ``i + 1``.
    """
    js = _j_star(instance) if j_star is None else j_star
    pool = enumerate_searches(instance.dag) if searches is None else searches
    out = np.full(instance.n, np.inf)
    for s in pool:
        if not s:
            continue
        num = found = 0.0
        for a in s:
            num += instance.params.c[a - 1] * (1.0 - found)
            found += instance.params.w[a - 1]
        j = num / found if found > 0 else math.inf
        if abs(j - js) <= OPTIMAL_TOL * max(1.0, js):
            continue
        g = gap(s, instance.params, js)
        for a in s:
            if g < out[a - 1]:
                out[a - 1] = g
    return out


def t_b_and_cmin(instance: ProblemInstance, budget: float, c_min: float | None = None) -> tuple[float, int]:
    """Per-round cost lower bound and the round scale ``ceil(2B / c_min)``.

    The default bound is the cheapest expected arm cost; a tighter
    instance-specific bound can be passed for reporting.
    """
    if not budget > 0:
        raise InvalidParameters(f"budget must be positive, got {budget!r}")
    cm = float(np.min(instance.c_star)) if c_min is None else float(c_min)
    return cm, math.ceil(2 * budget / cm)
