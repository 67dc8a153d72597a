"""Command-line entry point.

Exit status is 0 on success, 2 on configuration errors and 1 on runtime
errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import experiments as ex
from .errors import ConfigError, SearchStopError
from .objective import ParamVector
from .oracle import oracle
from .poset import edgeless, read_dag_file
from .scheduling import SchedulingStrategy

log = logging.getLogger("searchstop")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", help="output directory (overrides $%s)" % ex.OUT_ENV)
    p.add_argument("--jobs", type=int, help="parallel replications")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="searchstop", description="Sequential search-and-stop simulator.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    o = sub.add_parser("oracle", parents=[common], help="print the oracle search for given parameters")
    g = o.add_mutually_exclusive_group(required=True)
    g.add_argument("--dag", help="DAG file")
    g.add_argument("--edgeless", type=int, metavar="N", help="edgeless DAG with N arms")
    o.add_argument("--w", required=True, help="comma-separated hider weights")
    o.add_argument("--c", required=True, help="comma-separated costs")
    o.add_argument("--strategy", default="auto", choices=[s.value for s in SchedulingStrategy])

    s = sub.add_parser("simulate", parents=[common], help="run one config")
    s.add_argument("--no-plot", action="store_true")

    w = sub.add_parser("sweep", parents=[common], help="vary one config key over a list of values")
    w.add_argument("--key", required=True, help="dotted key, e.g. run.budget or instance.eps")
    w.add_argument("--values", required=True, help="comma-separated values")
    w.add_argument("--preset", choices=list(ex.PRESETS), help="start from a preset instead of --config")
    w.add_argument("--no-plot", action="store_true")

    p = sub.add_parser("preset", parents=[common], help="run a named experiment")
    p.add_argument("name", choices=list(ex.PRESETS))
    p.add_argument("--replications", type=int)
    p.add_argument("--budget", type=float)
    p.add_argument("--policies", help="comma-separated subset of " + ",".join(ex.ALL_POLICIES))
    p.add_argument("--no-plot", action="store_true")
    return parser


def _apply_overrides(cfg: ex.ExperimentConfig, args) -> ex.ExperimentConfig:
    if args.seed is not None:
        cfg.seed = args.seed
    if args.jobs is not None:
        cfg.jobs = args.jobs
    return cfg.validate()


def _parse_value(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def _summary(curve: ex.RegretCurve) -> None:
    for pol in curve.policies:
        m, s = curve.final(pol)
        print(f"{pol:8s} final regret proxy {m:10.3f} +/- {s:.3f}")


def cmd_oracle(args) -> int:
    w = _floats(args.w)
    c = _floats(args.c)
    try:
        dag = read_dag_file(args.dag) if args.dag else edgeless(args.edgeless)
    except (ValueError, SearchStopError) as e:
        raise ConfigError("dag", str(e)) from None
    try:
        p = ParamVector(w, c)
    except (ValueError, SearchStopError) as e:
        raise ConfigError("w/c", str(e)) from None
    res = oracle(dag, p, SchedulingStrategy(args.strategy))
    print("search:", " ".join(map(str, res.search)))
    print("cut_index:", res.cut_index)
    print("j_plus:", res.j_plus_value)
    record = {
        "search": list(res.search),
        "cut_index": res.cut_index,
        "j_plus": res.j_plus_value if res.j_plus_value != float("inf") else "inf",
        "full_extension": list(res.full_extension),
        "degenerate": res.degenerate,
    }
    print(json.dumps(record))
    return 0


def cmd_simulate(args) -> int:
    if not args.config:
        raise ConfigError("config", "simulate needs --config")
    cfg = _apply_overrides(ex.load_config(args.config), args)
    curve = ex.run_experiment(cfg, out=args.out, plot=not args.no_plot)
    _summary(curve)
    return 0


def cmd_preset(args) -> int:
    policies = [p.strip() for p in args.policies.split(",")] if args.policies else None
    cfg = ex.preset_config(args.name, replications=args.replications, budget=args.budget, policies=policies)
    cfg = _apply_overrides(cfg, args)
    curve = ex.run_experiment(cfg, out=args.out, plot=not args.no_plot)
    _summary(curve)
    return 0


def cmd_sweep(args) -> int:
    if args.config:
        base = ex.load_config(args.config)
    elif args.preset:
        base = ex.preset_config(args.preset)
    else:
        raise ConfigError("config", "sweep needs --config or --preset")
    base = _apply_overrides(base, args)
    root = ex.output_dir(base, args.out)
    rows = []
    for text in args.values.split(","):
        value = _parse_value(text.strip())
        cfg = ex.with_key(base, args.key, value)
        curve = ex.run_experiment(cfg, out=root / f"{args.key}={text.strip()}", plot=not args.no_plot)
        for pol in curve.policies:
            m, s = curve.final(pol)
            rows.append([args.key, text.strip(), pol, repr(m), repr(s)])
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["key", "value", "policy", "final_mean_regret_proxy", "final_stderr"])
        wr.writerows(rows)
    for r in rows:
        print(",".join(r))
    return 0


COMMANDS = {"oracle": cmd_oracle, "simulate": cmd_simulate, "sweep": cmd_sweep, "preset": cmd_preset}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as e:
        if args.command == "oracle":
            print(f"config error: {e}", file=sys.stderr)
            return 2
        print(f"error: {e}", file=sys.stderr)
        return 1
    except SearchStopError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
