"""Instance generators, experiment configuration and regret-curve output."""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConfigError, InvalidParameters
from .objective import ParamVector
from .oracle import best_of, j_star
from .policies import DEFAULT_ZETA, Kind, PolicyKind
from .poset import EXHAUSTIVE_GUARD, Dag, edgeless, read_dag_file, validate_dag
from .simulator import CostModel, ProblemInstance, run_episode

CONFIG_VERSION = 1
OUT_ENV = "SEARCHSTOP_OUT"
RUNS_HEADER = ["policy", "run", "checkpoint_budget", "cum_reward", "regret_proxy", "rounds_played"]
CURVE_HEADER = ["policy", "checkpoint_budget", "mean_regret_proxy", "stderr", "replications"]
ALL_POLICIES = ("cucb-v", "cucb", "cucb-kl", "ts")


def geometric_weights(n: int, m: int, eps: float) -> list[float]:
    """Geometric weights on the first ``m - 1`` arms, a slightly heavier
    ``m``-th arm and a flat tail, as floats."""
    w = [2.0 ** -i for i in range(1, m)]
    w.append((0.5 + eps) * w[m - 2])
    w.extend([(0.5 - eps) * w[m - 2] / (n - m)] * (n - m))
    return w


def instance_geometric(n: int = 100, m: int = 40, eps: float = 0.1, cost_mean: float = 0.5, bernoulli_costs: bool = True) -> ProblemInstance:
    if not (2 <= m < n):
        raise InvalidParameters(f"need 2 <= m < n, got m={m}, n={n}")
    if not 0 < eps < 0.5:
        raise InvalidParameters(f"eps must lie in (0, 0.5), got {eps}")
    if not 0 < cost_mean <= 1:
        raise InvalidParameters(f"cost_mean must lie in (0, 1], got {cost_mean}")
    model = CostModel.BERNOULLI if bernoulli_costs else CostModel.DETERMINISTIC
    params = ParamVector(geometric_weights(n, m, eps), [cost_mean] * n, true=True)
    return ProblemInstance(edgeless(n), params, model, f"geometric(n={n},m={m},eps={eps})")


def two_path_dag(n: int) -> Dag:
    """Chains ``1 -> ... -> n/2`` (path a) and ``n/2+1 -> ... -> n`` (path b)."""
    h = n // 2
    edges = [(i, i + 1) for i in range(1, h)] + [(h + i, h + i + 1) for i in range(1, h)]
    return validate_dag(n, edges)


def two_path_searches(n: int) -> list[tuple[int, ...]]:
    """The two full-path searches: a then b, and b then a."""
    h = n // 2
    a = tuple(range(1, h + 1))
    b = tuple(range(h + 1, n + 1))
    return [a + b, b + a]


def instance_two_path(n: int, eps: float = 0.1, which: str = "D1") -> ProblemInstance:
    """Two disjoint chains with unit costs and the hider at one of the two leaves.

    Under ``D1`` the leaf of path a carries ``1/2 + eps``; ``D2`` swaps them.
    """
    if n < 4 or n % 2:
        raise InvalidParameters(f"n must be even and at least 4, got {n}")
    if not 0 < eps < 0.25:
        raise InvalidParameters(f"eps must lie in (0, 0.25), got {eps}")
    which = which.upper()
    if which not in ("D1", "D2"):
        raise InvalidParameters(f"which must be D1 or D2, got {which!r}")
    h = n // 2
    w = [0.0] * n
    big, small = 0.5 + eps, 0.5 - eps
    w[h - 1], w[n - 1] = (big, small) if which == "D1" else (small, big)
    params = ParamVector(w, [1.0] * n, true=True)
    return ProblemInstance(two_path_dag(n), params, CostModel.DETERMINISTIC, f"two-path(n={n},eps={eps},{which})")


# -- configuration ---------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment.

    ``instance`` is a table: ``preset = "geometric" | "two-path" | "file"`` plus
    that generator's parameters (``file`` takes ``dag`` and either ``params``
    or inline ``w`` / ``c``).
    """

    instance: dict = field(default_factory=lambda: {"preset": "geometric", "n": 20, "m": 8, "eps": 0.1})
    policies: list = field(default_factory=lambda: list(ALL_POLICIES))
    budget: float = 1e4
    replications: int = 50
    seed: int = 0
    zeta: float = DEFAULT_ZETA
    checkpoints: int = 200
    out: str = "results"
    log_x: bool = True
    jobs: int = 1
    base_dir: str = "."

    def validate(self) -> "ExperimentConfig":
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError("run.replications", f"must be an integer >= 1, got {self.replications!r}")
        if not isinstance(self.budget, (int, float)) or not self.budget > 0:
            raise ConfigError("run.budget", f"must be positive, got {self.budget!r}")
        if not isinstance(self.checkpoints, int) or self.checkpoints < 1:
            raise ConfigError("run.checkpoints", f"must be an integer >= 1, got {self.checkpoints!r}")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("run.jobs", f"must be an integer >= 1, got {self.jobs!r}")
        if not isinstance(self.zeta, (int, float)) or not self.zeta > 1:
            raise ConfigError("run.zeta", f"must exceed 1, got {self.zeta!r}")
        if not self.policies:
            raise ConfigError("run.policies", "at least one policy is required")
        for p in self.policies:
            try:
                Kind(p)
            except ValueError:
                raise ConfigError("run.policies", f"unknown policy {p!r}; choose from {', '.join(ALL_POLICIES)}") from None
        build_instance(self.instance, self.base_dir)
        return self


PRESETS = {
    "geometric-full": dict(instance={"preset": "geometric", "n": 100, "m": 40, "eps": 0.1}, budget=1e5, replications=100),
    "geometric-desk": dict(instance={"preset": "geometric", "n": 20, "m": 8, "eps": 0.1}, budget=1e4, replications=50),
    "two-path": dict(instance={"preset": "two-path", "n": 20, "eps": 0.1, "which": "D1"}, budget=2e4, replications=50),
}


def preset_config(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    kw = dict(PRESETS[name])
    kw["instance"] = dict(kw["instance"])
    kw.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**kw).validate()


_RUN_KEYS = {"policies", "budget", "replications", "seed", "zeta", "checkpoints", "out", "log_x", "jobs"}


def load_config(path: str | Path) -> ExperimentConfig:
    """Read a TOML config with ``version``, ``[instance]`` and ``[run]`` tables."""
    import tomli

    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file not found: {path}")
    try:
        data = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as e:
        raise ConfigError("config", f"{path}: {e}") from None
    version = data.pop("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError("version", f"unsupported config version {version!r}")
    instance = data.pop("instance", None)
    if not isinstance(instance, dict):
        raise ConfigError("instance", "missing [instance] table")
    run = data.pop("run", {})
    for key in data:
        raise ConfigError(key, "unknown top-level key")
    for key in run:
        if key not in _RUN_KEYS:
            raise ConfigError(f"run.{key}", "unknown key")
    cfg = ExperimentConfig(instance=instance, base_dir=str(path.parent), **run)
    if isinstance(cfg.budget, int):
        cfg.budget = float(cfg.budget)
    return cfg.validate()


def _need(table: dict, key: str, kind=None):
    if key not in table:
        raise ConfigError(f"instance.{key}", "missing")
    v = table[key]
    if kind is not None and not isinstance(v, kind):
        raise ConfigError(f"instance.{key}", f"expected {kind}, got {v!r}")
    return v


def build_instance(table: dict, base_dir: str | Path = ".") -> ProblemInstance:
    preset = table.get("preset")
    try:
        if preset == "geometric":
            return instance_geometric(
                int(table.get("n", 100)), int(table.get("m", 40)), float(table.get("eps", 0.1)),
                float(table.get("cost_mean", 0.5)), bool(table.get("bernoulli_costs", True)),
            )
        if preset == "two-path":
            return instance_two_path(int(_need(table, "n")), float(table.get("eps", 0.1)), str(table.get("which", "D1")))
        if preset == "file":
            base = Path(base_dir)
            dag_path = base / _need(table, "dag", str)
            if not dag_path.is_file():
                raise ConfigError("instance.dag", f"file not found: {dag_path}")
            dag = read_dag_file(dag_path)
            if "params" in table:
                import tomli

                ppath = base / table["params"]
                if not ppath.is_file():
                    raise ConfigError("instance.params", f"file not found: {ppath}")
                pdata = tomli.loads(ppath.read_text())
            else:
                pdata = table
            w = pdata.get("w")
            c = pdata.get("c")
            if w is None or c is None:
                raise ConfigError("instance.w", "parameter vectors w and c are required")
            model = pdata.get("cost_model", "deterministic")
            params = ParamVector(w, c, true=True)
            return ProblemInstance(dag, params, CostModel(model), f"file({dag_path.name})")
    except ConfigError:
        raise
    except Exception as e:
        raise ConfigError("instance", str(e)) from None
    raise ConfigError("instance.preset", f"unknown instance preset {preset!r}")


def action_set_for(instance: ProblemInstance):
    """Restrict two-path instances too large for exhaustive scheduling to the two full paths."""
    if instance.name.startswith("two-path") and instance.n > EXHAUSTIVE_GUARD:
        return two_path_searches(instance.n)
    return None


def optimal_ratio(instance: ProblemInstance) -> float:
    acts = action_set_for(instance)
    if acts is not None:
        return best_of(acts, instance.params.w, instance.params.c)[1]
    return j_star(instance)


# -- running ---------------------------------------------------------------

@dataclass
class RegretCurve:
    """Mean regret proxy and its standard error per (policy, checkpoint)."""

    policies: list
    checkpoint_budget: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    replications: np.ndarray

    def final(self, policy: str) -> tuple[float, float]:
        i = self.policies.index(policy)
        return float(self.mean[i, -1]), float(self.stderr[i, -1])

    def at(self, policy: str, budget: float) -> tuple[float, float]:
        i = self.policies.index(policy)
        k = int(np.argmin(np.abs(self.checkpoint_budget - budget)))
        return float(self.mean[i, k]), float(self.stderr[i, k])

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(CURVE_HEADER)
            for i, pol in enumerate(self.policies):
                for k, b in enumerate(self.checkpoint_budget):
                    wr.writerow([pol, repr(float(b)), repr(float(self.mean[i, k])), repr(float(self.stderr[i, k])), int(self.replications[i])])

    @classmethod
    def read_csv(cls, path: str | Path) -> "RegretCurve":
        rows: dict[str, list] = {}
        with open(path, newline="") as fh:
            rd = csv.DictReader(fh)
            for r in rd:
                rows.setdefault(r["policy"], []).append(r)
        policies = list(rows)
        budgets = np.array([float(r["checkpoint_budget"]) for r in rows[policies[0]]])
        mean = np.array([[float(r["mean_regret_proxy"]) for r in rows[p]] for p in policies])
        se = np.array([[float(r["stderr"]) for r in rows[p]] for p in policies])
        reps = np.array([int(rows[p][0]["replications"]) for p in policies])
        return cls(policies, budgets, mean, se, reps)


@dataclass
class RunSummary:
    policy: str
    run: int
    checkpoint_budget: np.ndarray
    cum_reward: np.ndarray
    regret: np.ndarray
    rounds: np.ndarray


def _one_run(args) -> RunSummary:
    instance, policy, budget, seed, run, zeta, checkpoints, jstar = args
    rec = run_episode(
        instance, PolicyKind.parse(policy, zeta), budget, seed=seed, run=run,
        checkpoints=checkpoints, action_set=action_set_for(instance),
    )
    return RunSummary(policy, run, rec.checkpoint_budget, rec.checkpoint_reward, rec.checkpoint_regret(jstar), rec.checkpoint_rounds)


def simulate(config: ExperimentConfig, instance: ProblemInstance | None = None) -> tuple[RegretCurve, list[RunSummary]]:
    """Run every (policy, replication) pair and aggregate the regret proxies."""
    inst = build_instance(config.instance, config.base_dir) if instance is None else instance
    jstar = optimal_ratio(inst)
    tasks = [
        (inst, pol, float(config.budget), config.seed, run, config.zeta, config.checkpoints, jstar)
        for pol in config.policies
        for run in range(config.replications)
    ]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as ex:
            results = list(ex.map(_one_run, tasks, chunksize=1))
    else:
        results = [_one_run(t) for t in tasks]
    order = {p: i for i, p in enumerate(config.policies)}
    results.sort(key=lambda r: (order[r.policy], r.run))
    return aggregate(results, config.policies), results


def aggregate(results: Sequence[RunSummary], policies: Sequence[str]) -> RegretCurve:
    by_pol = {p: [r.regret for r in results if r.policy == p] for p in policies}
    budgets = results[0].checkpoint_budget
    mean, se, reps = [], [], []
    for p in policies:
        arr = np.vstack(by_pol[p])
        r = arr.shape[0]
        mean.append(arr.mean(axis=0))
        se.append(arr.std(axis=0, ddof=1) / math.sqrt(r) if r > 1 else np.zeros(arr.shape[1]))
        reps.append(r)
    return RegretCurve(list(policies), budgets, np.vstack(mean), np.vstack(se), np.array(reps))


def write_runs_csv(results: Sequence[RunSummary], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(RUNS_HEADER)
        for r in results:
            for b, cr, reg, nr in zip(r.checkpoint_budget, r.cum_reward, r.regret, r.rounds):
                wr.writerow([r.policy, r.run, repr(float(b)), int(cr), repr(float(reg)), int(nr)])


def plot_curve(curve: RegretCurve, path: str | Path, log_x: bool = True, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "searchstop"
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for i, pol in enumerate(curve.policies):
        m, s = curve.mean[i], curve.stderr[i]
        ax.plot(curve.checkpoint_budget, m, label=pol.upper())
        ax.fill_between(curve.checkpoint_budget, m - s, m + s, alpha=0.2)
    if log_x:
        ax.set_xscale("log")
    ax.set_xlabel("budget B")
    ax.set_ylabel("B / J* - hiders found")
    if title:
        ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def output_dir(config: ExperimentConfig, override: str | None = None) -> Path:
    out = override or os.environ.get(OUT_ENV) or config.out
    return Path(out)


def run_experiment(config: ExperimentConfig, out: str | Path | None = None, plot: bool = True) -> RegretCurve:
    """Simulate, then write ``runs.csv``, ``curve.csv`` and ``regret.svg``."""
    inst = build_instance(config.instance, config.base_dir)
    curve, results = simulate(config, inst)
    d = output_dir(config, str(out) if out is not None else None)
    d.mkdir(parents=True, exist_ok=True)
    write_runs_csv(results, d / "runs.csv")
    curve.write_csv(d / "curve.csv")
    if plot:
        plot_curve(curve, d / "regret.svg", config.log_x, inst.name)
    return curve


def with_key(config: ExperimentConfig, key: str, value) -> ExperimentConfig:
    """Copy of ``config`` with a dotted key (``run.budget``, ``instance.eps``) replaced."""
    section, _, name = key.partition(".")
    if section == "instance" and name:
        inst = dict(config.instance)
        inst[name] = value
        return replace(config, instance=inst).validate()
    if section == "run" and name in _RUN_KEYS:
        return replace(config, **{name: value}).validate()
    raise ConfigError(key, "sweep key must be instance.<name> or run.<name>")
