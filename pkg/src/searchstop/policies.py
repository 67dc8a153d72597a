"""Online estimators fed to the oracle each round.

All four policies share the per-arm counters and the lower confidence
bound on costs; they differ only in the optimistic hider weight they plug
into the oracle.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch
from .oracle import best_of, cut, oracle_order
from .poset import Dag
from .scheduling import SchedulingStrategy

DEFAULT_ZETA = 1.2
KL_TOL = 1e-9
KL_MAX_ITER = 100


class Kind(enum.Enum):
    CUCB_V = "cucb-v"
    CUCB = "cucb"
    CUCB_KL = "cucb-kl"
    THOMPSON = "ts"


@dataclass(frozen=True)
class PolicyKind:
    kind: Kind = Kind.CUCB_V
    zeta: float = DEFAULT_ZETA

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if not self.zeta > 1:
            raise ValueError(f"zeta must exceed 1, got {self.zeta!r}")

    @property
    def token(self) -> str:
        return self.kind.value

    @classmethod
    def parse(cls, token: str, zeta: float = DEFAULT_ZETA) -> "PolicyKind":
        return cls(Kind(token.strip().lower()), zeta)


class ArmStatistics:
    """Per-arm counters and sums.

    ``n_w[i]`` counts rounds in which arm ``i`` belonged to the selected
    search (its hider indicator is then known), ``n_c[i]`` rounds in which it
    was actually examined. Means are derived from exact sums, with 0/0 = 0.
    ``round`` is the index of the next round to play, starting at 1.
    """

    def __init__(self, n: int):
        self.n = n
        self.n_w = np.zeros(n, dtype=np.int64)
        self.n_c = np.zeros(n, dtype=np.int64)
        self.hits = np.zeros(n, dtype=np.int64)
        self.cost_sum = np.zeros(n, dtype=float)
        self.round = 1

    def copy(self) -> "ArmStatistics":
        out = ArmStatistics(self.n)
        out.n_w = self.n_w.copy()
        out.n_c = self.n_c.copy()
        out.hits = self.hits.copy()
        out.cost_sum = self.cost_sum.copy()
        out.round = self.round
        return out

    @property
    def mean_w(self) -> np.ndarray:
        return self.hits / np.maximum(self.n_w, 1)

    @property
    def mean_c(self) -> np.ndarray:
        return self.cost_sum / np.maximum(self.n_c, 1)

    def observe(self, selected: Sequence[int], performed_len: int, observed_w: Sequence[int], observed_c: Sequence[float]) -> None:
        """Fold one round of feedback in place.

        Hider indicators are known for the whole selected search, costs only
        for the first ``performed_len`` arms.
        """
        if performed_len > len(selected) or len(observed_w) != len(selected) or len(observed_c) != performed_len:
            raise LengthMismatch(
                f"selected {len(selected)} arms, performed {performed_len}, "
                f"got {len(observed_w)} hider bits and {len(observed_c)} costs"
            )
        idx = np.asarray(selected, dtype=np.intp) - 1
        self.n_w[idx] += 1
        self.hits[idx] += np.asarray(observed_w, dtype=np.int64)
        done = idx[:performed_len]
        self.n_c[done] += 1
        self.cost_sum[done] += np.asarray(observed_c, dtype=float)
        self.round += 1

    def __eq__(self, other):
        if not isinstance(other, ArmStatistics):
            return NotImplemented
        return (
            self.round == other.round
            and np.array_equal(self.n_w, other.n_w)
            and np.array_equal(self.n_c, other.n_c)
            and np.array_equal(self.hits, other.hits)
            and np.array_equal(self.cost_sum, other.cost_sum)
        )


def update(stats: ArmStatistics, selected, performed_len, observed_w, observed_c) -> ArmStatistics:
    """Functional form of :meth:`ArmStatistics.observe`; ``stats`` is left untouched."""
    out = stats.copy()
    out.observe(selected, performed_len, observed_w, observed_c)
    return out


def cost_lower_bound(stats: ArmStatistics, zeta: float = DEFAULT_ZETA) -> np.ndarray:
    log_t = math.log(stats.round)
    with np.errstate(divide="ignore", invalid="ignore"):
        width = np.sqrt(0.5 * zeta * log_t / stats.n_c)
    lcb = np.maximum(stats.mean_c - width, 0.0)
    lcb[stats.n_c == 0] = 0.0
    return lcb


def bernoulli_kl(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q), with 0 log 0 = 0."""
    out = 0.0
    if p > 0:
        if q <= 0:
            return math.inf
        out += p * math.log(p / q)
    if p < 1:
        if q >= 1:
            return math.inf
        out += (1 - p) * math.log((1 - p) / (1 - q))
    return out


def _kl_vec(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p > 0, p * np.log(p / q), 0.0)
        b = np.where(p < 1, (1 - p) * np.log((1 - p) / (1 - q)), 0.0)
    return a + b


_BELOW_ONE = np.nextafter(1.0, 0.0)


def kl_upper(mean: np.ndarray, count: np.ndarray, level: float) -> np.ndarray:
    """Largest ``x`` in ``[mean, 1]`` with ``count * kl(mean, x) <= level``.

    Newton's method on the convex, increasing map ``x -> kl(mean, x)``,
    started to the right of the root so the iterates decrease monotonically
    onto it. The start is the smaller of two points where the divergence is
    already at least the target: ``mean + sqrt(target / 2)`` (Pinsker) and
    ``1 - exp(-(target + log 2) / (1 - mean))``. The residual
    ``count * kl(mean, x) - level`` therefore stays non-negative and
    iteration stops once it is within ``KL_TOL / 2``; the margin absorbs
    rounding differences between algebraically equal forms of the
    divergence. Arms with ``count == 0``
    or ``mean == 1`` get 1.
    """
    mean = np.asarray(mean, dtype=float)
    count = np.asarray(count, dtype=float)
    out = np.ones_like(mean)
    active = (count > 0) & (mean < 1)
    if not active.any():
        return out
    p = mean[active]
    n = count[active]
    q = 1.0 - p
    target = level / n
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # kl(p, x) = neg_entropy - p log x - q log(1 - x), with 0 log 0 = 0
        neg_entropy = np.where(p > 0, p * np.log(p), 0.0) + q * np.log(q)
        x = np.minimum(p + np.sqrt(0.5 * target), -np.expm1(-(target + math.log(2.0)) / q))
        # the second start can round up to exactly 1; stay strictly inside
        x = np.minimum(x, _BELOW_ONE)
        for _ in range(KL_MAX_ITER):
            f = neg_entropy - np.where(p > 0, p * np.log(x), 0.0) - q * np.log1p(-x) - target
            live = (x > p) & (x < 1.0) & (n * f > 0.5 * KL_TOL)
            if not live.any():
                break
            step = f * x * (1.0 - x) / (x - p)
            x = np.where(live, np.maximum(x - step, p), x)
    out[active] = np.minimum(x, 1.0)
    return out


def weight_upper_bound(stats: ArmStatistics, kind: PolicyKind, rng: np.random.Generator | None = None) -> np.ndarray:
    """Optimistic (or sampled) hider weights, one per arm, in ``[0, 1]``."""
    zeta = kind.zeta
    log_t = math.log(stats.round)
    nw = stats.n_w
    mean = stats.mean_w
    unseen = nw == 0
    k = kind.kind
    if k is Kind.CUCB_V:
        with np.errstate(divide="ignore", invalid="ignore"):
            bonus = np.sqrt(2 * zeta * mean * (1 - mean) * log_t / nw) + 3 * zeta * log_t / nw
        ucb = np.minimum(mean + bonus, 1.0)
    elif k is Kind.CUCB:
        with np.errstate(divide="ignore", invalid="ignore"):
            ucb = np.minimum(mean + np.sqrt(0.5 * zeta * log_t / nw), 1.0)
    elif k is Kind.CUCB_KL:
        return kl_upper(mean, nw, zeta * log_t)
    else:
        if rng is None:
            raise ValueError("Thompson sampling needs a random generator")
        return thompson_sample(stats, rng)
    ucb[unseen] = 1.0
    return ucb


def thompson_sample(stats: ArmStatistics, rng: np.random.Generator) -> np.ndarray:
    """Beta(hits, misses) draws; degenerate parameters use their weak limits.

    No observations gives Uniform(0, 1), no hits gives 0, all hits gives 1.
    """
    nw = stats.n_w
    hits = stats.hits
    miss = nw - hits
    a = np.where(nw == 0, 1, hits)
    b = np.where(nw == 0, 1, miss)
    ok = (a > 0) & (b > 0)
    out = np.where(hits > 0, 1.0, 0.0)  # covers a == 0 and b == 0
    # one draw per arm keeps the stream layout independent of the counts
    draws = rng.beta(np.where(ok, a, 1), np.where(ok, b, 1))
    return np.where(ok, draws, out)


class Policy:
    """A learner: counters plus the estimator that drives the oracle.

    ``action_set``, when given, restricts selection to that explicit list of
    searches instead of running the scheduling step.
    """

    def __init__(self, dag: Dag, kind: PolicyKind, strategy=SchedulingStrategy.AUTO, rng=None, action_set=None):
        self.dag = dag
        self.kind = kind
        self.strategy = strategy
        self.rng = rng
        self.action_set = [tuple(s) for s in action_set] if action_set is not None else None
        self.stats = ArmStatistics(dag.n)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        w = weight_upper_bound(self.stats, self.kind, self.rng)
        c = cost_lower_bound(self.stats, self.kind.zeta)
        return w, c

    def select(self) -> tuple[int, ...]:
        w, c = self.bounds()
        if self.action_set is not None:
            return best_of(self.action_set, w, c)[0]
        order = oracle_order(self.dag, w, c, self.strategy)
        k = cut(order, w, c)[0]
        return tuple(int(a) + 1 for a in order[:k])

    def observe(self, selected, performed_len, observed_w, observed_c) -> None:
        self.stats.observe(selected, performed_len, observed_w, observed_c)


def select(stats: ArmStatistics, kind: PolicyKind, dag: Dag, strategy=SchedulingStrategy.AUTO, rng=None) -> tuple[int, ...]:
    pol = Policy(dag, kind, strategy, rng)
    pol.stats = stats
    return pol.select()
