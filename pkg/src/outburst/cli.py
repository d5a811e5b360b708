"""Command-line interface.

Every data-producing subcommand writes a CSV of results plus a manifest,
a key-value file of the fully resolved arguments. A manifest is itself a
valid ``--config`` file: rerunning the same subcommand with it (and a new
``--out``) reproduces the CSV byte for byte. Explicit flags override config
values, which override built-in defaults.

Exit codes: 0 success, 1 a validation gate failed (subadditivity violation,
probe failure, or a distributional mismatch), 2 usage error, 3 infeasible
configuration or budget.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time

from . import __version__
from . import _kernels
from .compete import CompeteConfig, estimate_coexistence
from .engine import Budget, run
from .env import EnvConfig, RadiusLaw, validate_law
from .errors import OutburstError
from .eventlog import write_event_log
from .geom import Ball
from .oracle import CompareScenario, compare_with_engine
from .passage import (
    DiffExperimentConfig,
    coupled_triple,
    diff_expectation,
    estimate_mu,
    passage_time,
)
from .rng import derive_seed
from .util import pmap, read_kv, write_kv

_LBL_CLI = 0x636C69


def _parse_bool(s: str) -> bool:
    v = s.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_floats(s: str) -> tuple[float, ...]:
    return tuple(float(p) for p in s.split(",") if p.strip())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return str(int(v))
    return str(v)


def _add_env_flags(p: argparse.ArgumentParser):
    p.add_argument("--dimension", type=int, default=2, help="spatial dimension")
    p.add_argument("--rate", type=float, default=1.0, help="environment intensity")
    p.add_argument("--seed", type=int, default=1, help="environment seed")
    p.add_argument(
        "--law",
        choices=("dirac", "uniform", "exponential", "texp"),
        default="dirac",
        help="radius-law family",
    )
    p.add_argument("--r", type=float, default=1.0, help="dirac: fixed radius")
    p.add_argument("--a", type=float, default=0.5, help="uniform: lower endpoint")
    p.add_argument("--b", type=float, default=1.5, help="uniform: upper endpoint")
    p.add_argument("--beta", type=float, default=1.0, help="exponential rate")
    p.add_argument("--cap", type=float, default=3.0, help="texp: truncation cap")
    p.add_argument("--cell-edge", type=float, default=1.0, help="spatial cell edge")
    p.add_argument("--slab-height", type=float, default=1.0, help="time slab height")


def _add_common(p: argparse.ArgumentParser, default_out: str):
    p.add_argument("--config", default=None, help="key-value file of argument defaults")
    p.add_argument("--out", default=default_out, help="output path prefix")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def _build_law(ns) -> RadiusLaw:
    if ns.law == "dirac":
        return RadiusLaw.dirac(ns.r)
    if ns.law == "uniform":
        return RadiusLaw.uniform_half_open(ns.a, ns.b)
    if ns.law == "exponential":
        return RadiusLaw.exponential(ns.beta)
    return RadiusLaw.truncated_exponential(ns.beta, ns.cap)


def _build_env(ns) -> EnvConfig:
    return EnvConfig(
        ns.dimension, ns.rate, ns.seed, _build_law(ns), ns.cell_edge, ns.slab_height
    )


def _rep_env(env: EnvConfig, rep: int) -> EnvConfig:
    return EnvConfig(
        env.dimension,
        env.rate,
        derive_seed(env.seed, _LBL_CLI, rep),
        env.law,
        env.cell_edge,
        env.slab_height,
    )


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_manifest(ns, sub: argparse.ArgumentParser, started: float):
    rows = {
        "meta_format": "outburst-cli-manifest-1",
        "meta_version": __version__,
        "meta_command": ns.command,
        "meta_backend": _kernels.BACKEND,
        "meta_duration_seconds": f"{time.monotonic() - started:.3f}",
    }
    for action in sub._actions:
        dest = action.dest
        if dest in ("help", "config"):
            continue
        v = getattr(ns, dest, None)
        if v is None:
            continue
        rows[dest] = _fmt(v)
    write_kv(ns.out + ".manifest.txt", rows)


# -- subcommands ---------------------------------------------------------


def _cmd_env_check(ns, sub, started) -> int:
    env = _build_env(ns)
    report = validate_law(env.law)
    print(f"family = {report.family}")
    print(f"exp_moment_finite = {int(report.exp_moment_finite)}")
    print(f"small_support = {int(report.small_support)}")
    print(f"radius_bound = {_fmt(report.radius_bound)}")
    print(f"mean_radius = {_fmt(env.law.mean)}")
    print(f"mean_per_block = {_fmt(env.mean_per_block)}")
    print(f"backend = {_kernels.BACKEND}")
    _write_manifest(ns, sub, started)
    return 0


def _cmd_grow(ns, sub, started) -> int:
    env = _build_env(ns)
    d = env.dimension
    budget = Budget(ns.max_events, ns.max_time, ns.max_extent)
    if ns.duel:
        seeds = [
            (Ball((0.0,) * d, 1.0), 1),
            (Ball((ns.separation,) + (0.0,) * (d - 1), 1.0), 2),
        ]
        lam1, lam2 = ns.lambda1, ns.lambda2
    else:
        seeds = [(Ball((0.0,) * d, 1.0), 1)]
        lam1 = lam2 = env.rate
    history = run(env, seeds, lam1, lam2, budget=budget)
    write_event_log(ns.out + ".csv", history, env, lam1, lam2)
    print(f"events = {len(history.events)}")
    print(f"clock = {_fmt(history.clock)}")
    print(f"stop_reason = {history.stop_reason}")
    _write_manifest(ns, sub, started)
    return 0


def _passage_worker(args):
    env, distance, delta = args
    y = (distance,) + (0.0,) * (env.dimension - 1)
    res = passage_time(env, (0.0,) * env.dimension, y, delta)
    return res.time, res.events, res.censored, res.bound


def _cmd_passage(ns, sub, started) -> int:
    env = _build_env(ns)
    tasks = [(_rep_env(env, rep), ns.distance, ns.delta) for rep in range(ns.reps)]
    rows = []
    for rep, (t, events, censored, bound) in enumerate(pmap(_passage_worker, tasks, ns.jobs)):
        rows.append((rep, t, events, int(censored), bound or ""))
    _write_csv(ns.out + ".csv", ("rep", "time", "events", "censored", "bound"), rows)
    ok = [r[1] for r in rows if not r[3]]
    if ok:
        print(f"mean_time = {_fmt(sum(ok) / len(ok))}")
    print(f"censored = {len(rows) - len(ok)}")
    _write_manifest(ns, sub, started)
    return 0


def _cmd_mu(ns, sub, started) -> int:
    env = _build_env(ns)
    est = estimate_mu(
        env, _parse_floats(ns.distances), ns.reps, ns.confidence, ns.delta, ns.jobs
    )
    rows = [
        (
            est.distances[i],
            est.means[i],
            est.standard_errors[i],
            est.ci_low[i],
            est.ci_high[i],
            est.spread_low[i],
            est.spread_high[i],
            est.counts[i],
            est.censored[i],
        )
        for i in range(len(est.distances))
    ]
    _write_csv(
        ns.out + ".csv",
        (
            "distance",
            "time_per_unit",
            "standard_error",
            "ci_low",
            "ci_high",
            "spread_low",
            "spread_high",
            "count",
            "censored",
        ),
        rows,
    )
    print(f"mu_hat = {_fmt(est.mu_hat)}")
    print(f"mu_hat_se = {_fmt(est.mu_hat_se)}")
    print(f"intervals_overlap = {int(est.intervals_overlap())}")
    _write_manifest(ns, sub, started)
    return 0


def _subadd_worker(args):
    env, span, frac, lateral, delta, probes = args
    d = env.dimension
    x = (0.0,) * d
    y = (span,) + (0.0,) * (d - 1)
    z = (frac * span, lateral) + (0.0,) * (d - 2) if d > 1 else (frac * span,)
    return coupled_triple(env, x, z, y, delta, probes=probes)


def _cmd_subadd(ns, sub, started) -> int:
    env = _build_env(ns)
    tasks = [
        (_rep_env(env, rep), ns.span, ns.frac, ns.lateral, ns.delta, ns.probes)
        for rep in range(ns.count)
    ]
    results = pmap(_subadd_worker, tasks, ns.jobs)
    rows = []
    bad = 0
    for rep, tr in enumerate(results):
        violated = (not tr.censored) and (tr.excess > 0.0 or tr.probe_failures > 0)
        bad += violated
        rows.append(
            (
                rep,
                tr.t_xy,
                tr.t_xz,
                tr.t_zy,
                tr.slack,
                tr.excess,
                tr.probes,
                tr.probe_failures,
                int(tr.censored),
            )
        )
    _write_csv(
        ns.out + ".csv",
        (
            "rep",
            "t_xy",
            "t_xz",
            "t_zy",
            "slack",
            "excess",
            "probes",
            "probe_failures",
            "censored",
        ),
        rows,
    )
    censored = sum(r[8] for r in rows)
    print(f"triples = {len(rows)}")
    print(f"violations = {bad}")
    print(f"censored = {censored}")
    _write_manifest(ns, sub, started)
    return 1 if bad else 0


def _cmd_diff(ns, sub, started) -> int:
    env = _build_env(ns)
    exp = DiffExperimentConfig(
        n=ns.n,
        m_values=_parse_floats(ns.m_values),
        replications=ns.reps,
        epsilon=ns.epsilon,
        delta=ns.delta,
        telescope_segments=ns.segments,
    )
    res = diff_expectation(env, exp, ns.jobs)
    rows = [
        (res.m_values[i], res.estimates[i], res.standard_errors[i], res.counts[i], res.censored[i])
        for i in range(len(res.m_values))
    ]
    _write_csv(
        ns.out + ".csv",
        ("m", "estimate", "standard_error", "count", "censored"),
        rows,
    )
    print(f"telescope_total = {_fmt(res.telescope.total_estimate)}")
    print(f"telescope_max_relative_error = {_fmt(res.telescope.max_relative_error)}")
    _write_manifest(ns, sub, started)
    if ns.mu_time is not None and not res.lower_bound_ok(ns.mu_time):
        print("lower_bound_ok = 0")
        return 1
    if ns.mu_time is not None:
        print("lower_bound_ok = 1")
    return 0


def _cmd_coexist(ns, sub, started) -> int:
    env = _build_env(ns)
    cfg = CompeteConfig(
        env=env,
        lambda1=ns.lambda1,
        lambda2=ns.lambda2,
        separation=ns.separation,
        exit_radii=_parse_floats(ns.radii),
        delta=ns.delta,
        freeze_interval=ns.freeze_interval,
    )
    est = estimate_coexistence(cfg, ns.reps, ns.confidence, ns.jobs)
    rows = [
        (
            r.radius,
            r.decided_true,
            r.decided_false,
            r.unresolved,
            r.pessimistic.low,
            r.pessimistic.high,
            r.optimistic.low,
            r.optimistic.high,
            r.exits_type1,
            r.exits_type2,
        )
        for r in est.rows
    ]
    _write_csv(
        ns.out + ".csv",
        (
            "radius",
            "coexist",
            "decided_apart",
            "unresolved",
            "pessimistic_low",
            "pessimistic_high",
            "optimistic_low",
            "optimistic_high",
            "exits_type1",
            "exits_type2",
        ),
        rows,
    )
    print(f"replications = {est.replications}")
    print(f"censored_runs = {est.censored_runs}")
    _write_manifest(ns, sub, started)
    return 0


def _cmd_oracle_compare(ns, sub, started) -> int:
    env = _build_env(ns)
    scn = CompareScenario(env=env, distance=ns.distance, rate_oracle=ns.rate_oracle)
    report = compare_with_engine(scn, ns.reps, ns.jobs)
    rows = [("engine", i, t) for i, t in enumerate(report.engine_times)]
    rows += [("oracle", i, t) for i, t in enumerate(report.oracle_times)]
    _write_csv(ns.out + ".csv", ("side", "index", "time"), rows)
    print(f"statistic = {_fmt(report.ks.statistic)}")
    print(f"p_value = {_fmt(report.ks.p_value)}")
    print(f"engine_censored = {report.engine_censored}")
    print(f"oracle_censored = {report.oracle_censored}")
    _write_manifest(ns, sub, started)
    return 0 if report.consistent else 1


# -- parser and dispatch -------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="outburst",
        description="Continuum growth and competition simulator.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)
    table = {}

    p = subs.add_parser("env-check", help="validate a configuration and report law facts")
    _add_env_flags(p)
    _add_common(p, "outburst-env-check")
    table["env-check"] = (p, _cmd_env_check)

    p = subs.add_parser("grow", help="run one growth process and write its event log")
    _add_env_flags(p)
    p.add_argument("--duel", action="store_true", help="two competing types")
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=8.0)
    p.add_argument("--max-events", type=int, default=5000)
    p.add_argument("--max-time", type=float, default=50.0)
    p.add_argument("--max-extent", type=float, default=math.inf)
    _add_common(p, "outburst-grow")
    table["grow"] = (p, _cmd_grow)

    p = subs.add_parser("passage", help="replicated point-to-ball passage times")
    _add_env_flags(p)
    p.add_argument("--distance", type=float, default=8.0)
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--delta", type=float, default=1e-3)
    _add_common(p, "outburst-passage")
    table["passage"] = (p, _cmd_passage)

    p = subs.add_parser("mu", help="time-constant estimate from passage times")
    _add_env_flags(p)
    p.add_argument("--distances", default="10,20", help="comma-separated distances")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--delta", type=float, default=1e-3)
    _add_common(p, "outburst-mu")
    table["mu"] = (p, _cmd_mu)

    p = subs.add_parser("subadd", help="audit pathwise subadditivity on coupled triples")
    _add_env_flags(p)
    p.add_argument("--span", type=float, default=8.0)
    p.add_argument("--frac", type=float, default=0.5, help="waypoint position along the span")
    p.add_argument("--lateral", type=float, default=1.0, help="waypoint lateral offset")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--probes", type=int, default=100)
    p.add_argument("--delta", type=float, default=1e-3)
    _add_common(p, "outburst-subadd")
    table["subadd"] = (p, _cmd_subadd)

    p = subs.add_parser("diff", help="shifted-difference expectations with telescoping check")
    _add_env_flags(p)
    p.add_argument("--n", type=float, default=6.0)
    p.add_argument("--m-values", default="4,8", help="comma-separated shifts")
    p.add_argument("--reps", type=int, default=30)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--segments", type=int, default=3)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--mu-time", type=float, default=None, help="gate against this time constant")
    _add_common(p, "outburst-diff")
    table["diff"] = (p, _cmd_diff)

    p = subs.add_parser("coexist", help="Monte Carlo coexistence probabilities")
    _add_env_flags(p)
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--lambda2", type=float, default=1.0)
    p.add_argument("--separation", type=float, default=8.0)
    p.add_argument("--radii", default="5,10,15", help="comma-separated exit radii")
    p.add_argument("--reps", type=int, default=40)
    p.add_argument("--confidence", type=float, default=0.95)
    p.add_argument("--freeze-interval", type=int, default=400)
    p.add_argument("--delta", type=float, default=1e-3)
    _add_common(p, "outburst-coexist")
    table["coexist"] = (p, _cmd_coexist)

    p = subs.add_parser("oracle-compare", help="engine versus rejection-oracle KS test")
    _add_env_flags(p)
    p.add_argument("--distance", type=float, default=2.5)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--rate-oracle", type=float, default=None, help="mismatched oracle rate")
    _add_common(p, "outburst-oracle-compare")
    table["oracle-compare"] = (p, _cmd_oracle_compare)

    return parser, table


def _apply_config(parser: argparse.ArgumentParser, sub: argparse.ArgumentParser, path: str, command: str):
    try:
        cfg = read_kv(path)
    except (OSError, ValueError) as exc:
        parser.error(f"cannot read config {path}: {exc}")
    claimed = cfg.get("meta_command")
    if claimed is not None and claimed != command:
        parser.error(f"config {path} is for subcommand {claimed!r}, not {command!r}")
    actions = {a.dest: a for a in sub._actions if a.option_strings}
    resolved = {}
    for key, raw in cfg.items():
        if key.startswith("meta_"):
            continue
        action = actions.get(key)
        if action is None or key == "config":
            continue
        try:
            if action.nargs == 0:
                resolved[key] = _parse_bool(raw)
            elif action.type is not None:
                resolved[key] = action.type(raw)
            else:
                resolved[key] = raw
        except ValueError as exc:
            parser.error(f"config {path}: bad value for {key}: {exc}")
    sub.set_defaults(**resolved)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, table = _build_parser()
    ns = parser.parse_args(argv)
    sub, handler = table[ns.command]
    if ns.config is not None:
        _apply_config(parser, sub, ns.config, ns.command)
        ns = parser.parse_args(argv)
    started = time.monotonic()
    try:
        return handler(ns, sub, started)
    except OutburstError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
