import math
from fractions import Fraction

import numpy as np
import pytest

from searchstop.errors import ConfigError, InvalidParameters
from searchstop.experiments import (
    ExperimentConfig,
    RegretCurve,
    action_set_for,
    build_instance,
    instance_geometric,
    instance_two_path,
    load_config,
    optimal_ratio,
    preset_config,
    run_experiment,
    geometric_weights,
    simulate,
    two_path_searches,
    with_key,
)
from searchstop.objective import cost_ratio_j
from searchstop.oracle import j_star, oracle
from searchstop.simulator import CostModel


def test_geometric_weights_small():
    assert geometric_weights(4, 2, 0.1) == pytest.approx([0.5, 0.3, 0.1, 0.1], abs=1e-15)


@pytest.mark.parametrize("n, m", [(4, 2), (20, 8), (100, 40), (7, 6)])
def test_geometric_weights_sum_to_one(n, m):
    # the same construction in exact arithmetic telescopes to 1
    eps = Fraction(1, 10)
    w = [Fraction(1, 2**i) for i in range(1, m)]
    w.append((Fraction(1, 2) + eps) * w[-1])
    w.extend([(Fraction(1, 2) - eps) * w[m - 2] / (n - m)] * (n - m))
    assert sum(w) == 1
    fl = geometric_weights(n, m, 0.1)
    assert abs(math.fsum(fl) - 1) <= 1e-12
    assert np.allclose(fl, [float(x) for x in w], rtol=1e-15, atol=0)


def test_geometric_instance_and_optimum():
    inst = instance_geometric(20, 8, 0.1)
    assert inst.cost_model is CostModel.BERNOULLI and inst.dag.is_edgeless
    r = oracle(inst.dag, inst.params)
    assert r.search == tuple(range(1, 9))
    with pytest.raises(InvalidParameters):
        instance_geometric(5, 5)
    with pytest.raises(InvalidParameters):
        instance_geometric(10, 4, eps=0.5)


@pytest.mark.parametrize("n", [4, 6, 8])
def test_two_path_optimum(n):
    inst = instance_two_path(n, 0.1)
    ab, ba = two_path_searches(n)
    # hider in path a's leaf with 0.6: finishing a costs n/2, then b with prob 0.4
    assert cost_ratio_j(ab, inst.params) == pytest.approx(0.75 * n - 0.05 * n, abs=1e-12)
    assert cost_ratio_j(ba, inst.params) == pytest.approx(0.75 * n + 0.05 * n, abs=1e-12)
    assert j_star(inst) == pytest.approx(0.75 * n - 0.05 * n, abs=1e-12)


def test_two_path_d2_mirrors():
    d1, d2 = instance_two_path(6, 0.2, "D1"), instance_two_path(6, 0.2, "d2")
    assert d1.params.w[2] == d2.params.w[5] == pytest.approx(0.7)
    assert oracle(d2.dag, d2.params).search == (4, 5, 6, 1, 2, 3)


@pytest.mark.parametrize("n, eps, which", [(5, 0.1, "D1"), (2, 0.1, "D1"), (4, 0.3, "D1"), (4, 0.1, "D3")])
def test_two_path_rejects(n, eps, which):
    with pytest.raises(InvalidParameters):
        instance_two_path(n, eps, which)


def test_action_set_only_for_large_two_path():
    assert action_set_for(instance_two_path(8)) is None
    big = instance_two_path(20)
    assert action_set_for(big) == two_path_searches(20)
    assert optimal_ratio(big) == pytest.approx(0.7 * 20, abs=1e-12)
    assert action_set_for(instance_geometric(20, 8)) is None


def test_config_defaults_and_validation():
    cfg = ExperimentConfig().validate()
    assert cfg.replications == 50 and cfg.zeta == 1.2
    for key, kw in [
        ("run.replications", dict(replications=0)),
        ("run.budget", dict(budget=-1)),
        ("run.zeta", dict(zeta=1.0)),
        ("run.policies", dict(policies=["ucb"])),
        ("run.jobs", dict(jobs=0)),
    ]:
        with pytest.raises(ConfigError) as e:
            ExperimentConfig(**kw).validate()
        assert e.value.key == key


def test_presets():
    cfg = preset_config("geometric-desk", replications=3)
    assert cfg.replications == 3 and cfg.budget == 1e4
    assert preset_config("geometric-full").instance["n"] == 100
    with pytest.raises(ConfigError):
        preset_config("nope")


def test_load_config(tmp_path):
    (tmp_path / "g.dag").write_text("3\n1 2\n")
    (tmp_path / "p.toml").write_text("w = [0.2, 0.3, 0.5]\nc = [0.5, 0.5, 1.0]\ncost_model = 'bernoulli'\n")
    f = tmp_path / "exp.toml"
    f.write_text(
        "version = 1\n[instance]\npreset = 'file'\ndag = 'g.dag'\nparams = 'p.toml'\n"
        "[run]\npolicies = ['cucb']\nbudget = 50\nreplications = 2\nseed = 3\n"
    )
    cfg = load_config(f)
    assert cfg.budget == 50.0 and cfg.policies == ["cucb"]
    inst = build_instance(cfg.instance, cfg.base_dir)
    assert inst.dag.edges == {(1, 2)} and inst.cost_model is CostModel.BERNOULLI


@pytest.mark.parametrize(
    "text, key",
    [
        ("version = 2\n[instance]\npreset='geometric'\n", "version"),
        ("[run]\nbudget = 5\n", "instance"),
        ("[instance]\npreset='geometric'\n[run]\nbudgett = 5\n", "run.budgett"),
        ("[instance]\npreset='file'\ndag='missing.dag'\nw=[1.0]\nc=[1.0]\n", "instance.dag"),
        ("[instance]\npreset='geometric'\nn=5\nm=5\n", "instance"),
        ("[instance]\npreset='geometric'\n[run]\nreplications = 0\n", "run.replications"),
        ("[instance\n", "config"),
    ],
)
def test_load_config_errors(tmp_path, text, key):
    f = tmp_path / "bad.toml"
    f.write_text(text)
    with pytest.raises(ConfigError) as e:
        load_config(f)
    assert e.value.key == key


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nothing.toml")


def test_with_key():
    cfg = preset_config("two-path", replications=1)
    assert with_key(cfg, "instance.eps", 0.2).instance["eps"] == 0.2
    assert with_key(cfg, "run.budget", 10.0).budget == 10.0
    with pytest.raises(ConfigError):
        with_key(cfg, "budget", 1.0)


def _small_config(**kw):
    base = dict(
        instance={"preset": "geometric", "n": 6, "m": 3, "eps": 0.1},
        policies=["cucb-v", "ts"],
        budget=200.0,
        replications=4,
        seed=5,
        checkpoints=20,
    )
    base.update(kw)
    return ExperimentConfig(**base).validate()


def test_jobs_do_not_change_results():
    a, ra = simulate(_small_config(jobs=1))
    b, rb = simulate(_small_config(jobs=2))
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.stderr, b.stderr)
    for x, y in zip(ra, rb):
        assert (x.policy, x.run) == (y.policy, y.run)
        assert np.array_equal(x.regret, y.regret)


def test_common_random_numbers_across_policy_lists():
    # a policy's runs do not depend on which other policies are in the config
    _, alone = simulate(_small_config(policies=["ts"]))
    _, both = simulate(_small_config())
    ts = [r for r in both if r.policy == "ts"]
    for x, y in zip(alone, ts):
        assert np.array_equal(x.regret, y.regret)


def test_aggregate_statistics():
    curve, runs = simulate(_small_config(policies=["cucb"]))
    final = np.array([r.regret[-1] for r in runs])
    m, s = curve.final("cucb")
    assert m == pytest.approx(final.mean())
    assert s == pytest.approx(final.std(ddof=1) / 2)
    single, _ = simulate(_small_config(policies=["cucb"], replications=1))
    assert single.final("cucb")[1] == 0


def test_outputs_roundtrip_and_reproducible(tmp_path):
    cfg = _small_config()
    curve = run_experiment(cfg, out=tmp_path / "a")
    run_experiment(cfg, out=tmp_path / "b")
    for name in ("runs.csv", "curve.csv", "regret.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    back = RegretCurve.read_csv(tmp_path / "a" / "curve.csv")
    assert back.policies == curve.policies
    assert np.array_equal(back.mean, curve.mean)
    assert np.array_equal(back.checkpoint_budget, curve.checkpoint_budget)
    header = (tmp_path / "a" / "runs.csv").read_text().splitlines()[0]
    assert header == "policy,run,checkpoint_budget,cum_reward,regret_proxy,rounds_played"


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("SEARCHSTOP_OUT", str(tmp_path / "env"))
    run_experiment(_small_config(policies=["cucb"], replications=1), plot=False)
    assert (tmp_path / "env" / "curve.csv").is_file()
