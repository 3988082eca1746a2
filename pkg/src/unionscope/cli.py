"""Command-line front end.

Subcommands: schedule, estimate, ball-union, count-ball, sample-ball,
coverage, oracle, bench.  Structured data goes to stdout (JSON, or CSV for
sweeps), diagnostics to stderr.  Exit codes: 0 success, 1 usage error,
2 precondition/validation error, 3 internal assertion.

Seeded outputs contain no timing fields, so identical seeds give
byte-identical stdout; timing lives in transcript files and bench CSV.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from pathlib import Path

from .ball_union import BallOracleError, estimate_ball_union
from .coverage import greedy_max_coverage
from .estimator import EstimatorError, approximate_union
from .instances import InstanceError, build_oracle_list, exact_union_size, load_instance
from .lattice_count import (
    BallSpec,
    CountTable,
    FreeBall,
    GuardBandError,
    LatticeError,
    count_lattice_points,
    hybrid_count,
    make_ball,
    parse_lambda,
    volume_radius_floor,
)
from .lattice_sample import SamplerConfig, SamplerError, SmallBallSampler, BigBallSampler
from .oracle import BiasSpec, OracleError, make_biased_explicit_set, OracleList
from .reference import ReferenceCapError, enumerate_ball, exact_union
from .rng import RandomStream
from .rounds import RoundHarness, RoundSizeError
from .schedule import ScheduleError, build_schedule, schedule_to_dict

SCHEMA_VERSION = "unionscope/1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's 2
        raise UsageError(message)


def _json_out(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


_CENTER_COMPONENT = re.compile(r"^(-?\d+)(?:([+-]\d+)L?)?$")


def parse_structured_center(text: str) -> list[tuple[int, int]]:
    """Parse 'i1+j1L,i2+j2L,...' ('0+2L,1-1L' or bare integers)."""
    out = []
    for part in text.split(","):
        m = _CENTER_COMPONENT.match(part.strip().replace(" ", ""))
        if not m:
            raise UsageError(f"cannot parse center component {part!r}; expected i+jL")
        i_k = int(m.group(1))
        j_k = int(m.group(2)) if m.group(2) else 0
        out.append((i_k, j_k))
    return out


def parse_free_center(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse center {text!r} as reals") from exc


def _add_schedule_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--c1", type=float, default=0.0)
    p.add_argument("--zmin", type=int, default=1)
    p.add_argument("--zmax", type=int, default=None)
    p.add_argument("--sample-scale", type=float, default=1.0)


def build_parser() -> _Parser:
    parser = _Parser(prog="unionscope")
    parser.add_argument("--version", action="version", version=SCHEMA_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="print the derived parameter schedule")
    p.add_argument("--m", type=int, required=True)
    _add_schedule_flags(p)

    p = sub.add_parser("estimate", help="estimate |A_1 u ... u A_m| for an instance file")
    p.add_argument("--instance", required=True)
    _add_schedule_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--transcript", default=None, help="JSONL file, one object per round")
    p.add_argument("--alpha", type=float, default=0.2, help="ball-oracle sampler bias")
    p.add_argument("--beta", type=float, default=0.2, help="ball-oracle size bias")

    p = sub.add_parser("ball-union", help="estimate lattice points in a union of balls")
    p.add_argument("--instance", required=True)
    _add_schedule_flags(p)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--transcript", default=None)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.2)

    p = sub.add_parser("count-ball", help="count lattice points in one ball")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--lambda", dest="lam", default="0")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--center", required=True, help="'i1+j1L,...' or reals with --free-center")
    p.add_argument("--free-center", action="store_true")
    p.add_argument("--beta", type=float, default=0.5)
    p.add_argument("--format", choices=("json",), default="json")

    p = sub.add_parser("sample-ball", help="draw random lattice points from a ball")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--radius", type=float, required=True)
    p.add_argument("--center", required=True)
    p.add_argument("--free-center", action="store_true")
    p.add_argument("--lambda", dest="lam", default="0")
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--format", choices=("jsonl",), default="jsonl")

    p = sub.add_parser("coverage", help="greedy max coverage with estimated marginals")
    p.add_argument("--instance", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--xi", type=float, default=0.2)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sample-scale", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--beta", type=float, default=0.2)

    p = sub.add_parser("oracle", help="brute-force fixture generation")
    osub = p.add_subparsers(dest="oracle_command", required=True)
    q = osub.add_parser("enumerate-ball")
    q.add_argument("--center", required=True, help="comma-separated reals")
    q.add_argument("--radius", type=float, required=True)
    q = osub.add_parser("exact-union")
    q.add_argument("--instance", required=True)

    p = sub.add_parser("bench", help="sweep m/c1, emit CSV and companion figures")
    p.add_argument("--m-values", default="4,16,64")
    p.add_argument("--c1-values", default="0,0.25")
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--sample-scale", type=float, default=None,
                   help="default: auto scale targeting ~4000 initial samples")
    p.add_argument("--universe", type=int, default=2000)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--figures", default=None,
                   help="directory for figures (default: alongside the CSV)")
    p.add_argument("--no-figures", action="store_true")
    return parser


def _root_seed(args, inst) -> int:
    if args.seed is not None:
        return args.seed
    if getattr(inst, "seed", None) is not None:
        return inst.seed
    raise UsageError("no seed: pass --seed or put one in the instance file")


def _write_transcript(path: str, harness: RoundHarness) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in harness.transcript:
            fh.write(json.dumps(entry.to_json(), sort_keys=True) + "\n")


def _run_estimate(args, kind: str) -> int:
    inst = load_instance(args.instance)
    seed = _root_seed(args, inst)
    root = RandomStream.from_seed(seed)
    olist = build_oracle_list(inst, root, ball_alpha=args.alpha, ball_beta=args.beta)
    sched = build_schedule(
        olist.m, args.epsilon, args.gamma, c1=args.c1, z_min=args.zmin, z_max=args.zmax
    )
    harness = RoundHarness(olist)
    trials = []
    for t in range(args.trials):
        est = approximate_union(
            olist,
            sched,
            root.child(f"trial:{t}"),
            sample_scale=args.sample_scale,
            harness=harness,
        )
        row = {"trial": t, **est.to_json()}
        trials.append(row)
    if args.transcript:
        _write_transcript(args.transcript, harness)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["trial", "value", "stages", "rounds", "samples_drawn", "membership_queries"])
        for row in trials:
            w.writerow([row["trial"], row["value"], row["stages"], row["rounds"],
                        row["samples_drawn"], row["membership_queries"]])
        sys.stdout.write(buf.getvalue())
    else:
        _json_out({
            "schema": SCHEMA_VERSION,
            "command": kind,
            "seed": seed,
            "epsilon": args.epsilon,
            "gamma": args.gamma,
            "c1": args.c1,
            "zmin": args.zmin,
            "zmax": args.zmax if args.zmax is not None else olist.m,
            "sample_scale": args.sample_scale,
            "m": olist.m,
            "total_size": str(olist.total_size),
            "trials": trials,
            "schedule": schedule_to_dict(sched),
        })
    return 0


def _cmd_schedule(args) -> int:
    sched = build_schedule(
        args.m, args.epsilon, args.gamma, c1=args.c1, z_min=args.zmin, z_max=args.zmax
    )
    _json_out({
        "schema": SCHEMA_VERSION,
        "command": "schedule",
        "sample_scale": args.sample_scale,
        "schedule": schedule_to_dict(sched),
    })
    return 0


def _cmd_count_ball(args) -> int:
    t0 = time.perf_counter()
    if args.free_center:
        center = parse_free_center(args.center)
        if len(center) != args.dim:
            raise UsageError("center length does not match --dim")
        ball = FreeBall(dim=args.dim, radius=args.radius, center=tuple(center))
        value = hybrid_count(ball, args.beta)
        payload = {
            "mode": "volume",
            "count": repr(float(value)),
            "table_size": 0,
        }
    else:
        center = parse_structured_center(args.center)
        if len(center) != args.dim:
            raise UsageError("center length does not match --dim")
        ball = make_ball(args.dim, args.radius, lam=args.lam, l=args.l, center=center)
        floor = volume_radius_floor(args.dim, args.beta)
        if args.radius > floor:
            payload = {
                "mode": "volume",
                "count": repr(float(hybrid_count(ball, args.beta))),
                "table_size": 0,
            }
        else:
            table = CountTable()
            count = count_lattice_points(ball, table=table)
            payload = {"mode": "exact", "count": str(count), "table_size": len(table)}
    payload.update({
        "schema": SCHEMA_VERSION,
        "command": "count-ball",
        "dim": args.dim,
        "radius": args.radius,
        "lambda": getattr(ball, "lam", None).label if isinstance(ball, BallSpec) else None,
        "beta": args.beta,
        "runtime_ms": (time.perf_counter() - t0) * 1000.0,
    })
    _json_out(payload)
    return 0


def _cmd_sample_ball(args) -> int:
    root = RandomStream.from_seed(args.seed)
    if args.free_center:
        center = parse_free_center(args.center)
        if len(center) != args.dim:
            raise UsageError("center length does not match --dim")
        cfg = SamplerConfig(alpha=args.alpha, dim=args.dim)
        sampler = BigBallSampler(args.radius, center, cfg)
        audit_lo = []
        for i in range(args.count):
            audit: list = []
            pt = sampler.draw(root.child(f"draw:{i}"), audit=audit)
            prob = math.prod(audit)
            audit_lo.append(float(prob))
            sys.stdout.write(json.dumps({"point": list(pt)}) + "\n")
        att, acc = sampler.stats["attempts"], sampler.stats["accepted"]
        stats = {
            "stats": {
                "mode": "rejection",
                "attempts": att,
                "accepted": acc,
                "acceptance_rate": acc / att if att else None,
                "audited_prob_min": min(audit_lo) if audit_lo else None,
                "audited_prob_max": max(audit_lo) if audit_lo else None,
            }
        }
        sys.stdout.write(json.dumps(stats, sort_keys=True) + "\n")
    else:
        center = parse_structured_center(args.center)
        if len(center) != args.dim:
            raise UsageError("center length does not match --dim")
        ball = make_ball(args.dim, args.radius, lam=args.lam, l=args.l, center=center)
        sampler = SmallBallSampler(ball)
        probs = []
        for i in range(args.count):
            audit: list = []
            pt = sampler.draw(root.child(f"draw:{i}"), audit=audit)
            probs.append(math.prod(audit))
            sys.stdout.write(json.dumps({"point": list(pt)}) + "\n")
        exact_uniform = all(p == probs[0] for p in probs) if probs else True
        stats = {
            "stats": {
                "mode": "exact",
                "count_lattice_points": str(sampler.total),
                "acceptance_rate": 1.0,
                "audited_prob_exact_uniform": exact_uniform,
            }
        }
        sys.stdout.write(json.dumps(stats, sort_keys=True) + "\n")
    return 0


def _cmd_coverage(args) -> int:
    inst = load_instance(args.instance)
    seed = _root_seed(args, inst)
    root = RandomStream.from_seed(seed)
    olist = build_oracle_list(inst, root, ball_alpha=args.alpha, ball_beta=args.beta)
    result = greedy_max_coverage(
        olist, args.k, args.xi, args.gamma, root.child("coverage"),
        sample_scale=args.sample_scale,
    )
    _json_out({
        "schema": SCHEMA_VERSION,
        "command": "coverage",
        "seed": seed,
        "k": args.k,
        "xi": args.xi,
        "gamma": args.gamma,
        "sample_scale": args.sample_scale,
        **result.to_json(),
    })
    return 0


def _cmd_oracle(args) -> int:
    if args.oracle_command == "enumerate-ball":
        center = parse_free_center(args.center)
        points = enumerate_ball(center, args.radius)
        for pt in points:
            sys.stdout.write(json.dumps({"point": list(pt)}) + "\n")
        sys.stdout.write(json.dumps({"count": len(points)}) + "\n")
        return 0
    if args.oracle_command == "exact-union":
        inst = load_instance(args.instance)
        _json_out({
            "schema": SCHEMA_VERSION,
            "command": "oracle exact-union",
            "count": str(exact_union_size(inst)),
        })
        return 0
    raise UsageError(f"unknown oracle subcommand {args.oracle_command!r}")


def _random_bench_instance(m: int, universe: int, rng: RandomStream):
    gen = rng.gen
    collections = []
    for _ in range(m):
        size = int(gen.integers(universe // 10 + 1, universe // 2 + 1))
        collections.append(list(gen.choice(universe, size=size, replace=False)))
    return collections


def _cmd_bench(args) -> int:
    try:
        m_values = [int(v) for v in args.m_values.split(",") if v]
        c1_values = [float(v) for v in args.c1_values.split(",") if v]
    except ValueError as exc:
        raise UsageError(f"bad sweep values: {exc}") from exc
    root = RandomStream.from_seed(args.seed)
    rows = []
    for m in m_values:
        collections = _random_bench_instance(m, args.universe, root.child(f"inst:{m}"))
        exact = exact_union(collections)
        oracles = tuple(
            make_biased_explicit_set(c, BiasSpec(), root.child(f"oracle:{m}:{i}"))
            for i, c in enumerate(collections)
        )
        olist = OracleList(oracles, BiasSpec())
        for c1 in c1_values:
            sched = build_schedule(m, args.epsilon, args.gamma, c1=c1)
            scale = args.sample_scale
            if scale is None:
                scale = min(1.0, 4000.0 / sched.h1)
            for t in range(args.trials):
                t0 = time.perf_counter()
                est = approximate_union(
                    olist, sched, root.child(f"run:{m}:{c1}:{t}"), sample_scale=scale
                )
                wall_ms = (time.perf_counter() - t0) * 1000.0
                rows.append({
                    "m": m,
                    "epsilon": args.epsilon,
                    "c1": c1,
                    "rounds": est.rounds,
                    "queries": est.membership_queries,
                    "wall_ms": wall_ms,
                    "rel_error": abs(est.value - exact) / exact,
                })
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["m", "epsilon", "c1", "rounds", "queries",
                                           "wall_ms", "rel_error"])
        w.writeheader()
        w.writerows(rows)
    written = [str(out)]
    if not args.no_figures:
        from .plotting import render_bench_figures

        figdir = Path(args.figures) if args.figures else out.parent
        written += [str(p) for p in render_bench_figures(rows, figdir)]
    print("\n".join(written), file=sys.stderr)
    return 0


def run(argv=None) -> int:
    parser = build_parser()
    try:
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:  # argparse --version / --help
            return int(exc.code or 0)
        if args.command == "schedule":
            return _cmd_schedule(args)
        if args.command == "estimate":
            return _run_estimate(args, "estimate")
        if args.command == "ball-union":
            return _run_estimate(args, "ball-union")
        if args.command == "count-ball":
            return _cmd_count_ball(args)
        if args.command == "sample-ball":
            return _cmd_sample_ball(args)
        if args.command == "coverage":
            return _cmd_coverage(args)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "bench":
            return _cmd_bench(args)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ScheduleError, OracleError, LatticeError, GuardBandError, SamplerError,
            EstimatorError, InstanceError, BallOracleError, RoundSizeError,
            ReferenceCapError, FileNotFoundError, OverflowError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AssertionError as exc:  # pragma: no cover
        print(f"internal assertion failed: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
