"""Command-line entry points.

Commands:
    verify    run a named identity suite, emit a JSON report, exit 0 iff green
    sweep     Monte-Carlo positivity certificates over a schedule-stage grid
    flow      integrate one trajectory, export CSV + JSON manifest
    search    randomized boundary witness search on a cone
    schedule  print (a, b, p) tables for the cone-family stages

Reports are append-only files named by the hash of the run configuration;
identical configurations replay to byte-identical report bodies.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import flow as flow_mod
from . import suites
from .cones import (FIRST_FAMILY, PROP_STAGE, SECOND_FAMILY, STAGES,
                    TWO_POSITIVE_EXTENSION, NonnegOp, RicciPinched,
                    ThreeNonneg, TwoNonneg, interior_sample,
                    pinching_parameterization, positivity_certificate,
                    prop_stage_b_max, schedule, stage_cone)
from .operators import identity_operator, make_operator, operator_to_json, random_operator
from .reporting import RunConfig, write_report
from .seeding import stream

CONES = {
    "nonneg": NonnegOp,
    "2nonneg": TwoNonneg,
    "3nonneg": ThreeNonneg,
}


def _parse_grid(text: str) -> list[float]:
    """start:stop:count grid specification."""
    try:
        start, stop, count = text.split(":")
        return [float(x) for x in np.linspace(float(start), float(stop), int(count))]
    except Exception as exc:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; expected start:stop:count") from exc


def _apply_config_file(args: argparse.Namespace) -> None:
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text())
        for key, value in overrides.items():
            setattr(args, key.replace("-", "_"), value)


def _init_operator(spec: str, n: int, scale: float, seed: int):
    rng = stream(seed, 0)
    if spec == "identity":
        return identity_operator(n) * scale
    if spec == "rank-one":
        N = identity_operator(n).coeffs.shape[0]
        M = np.zeros((N, N))
        M[0, 0] = scale
        return make_operator(n, M)
    if spec == "random":
        return random_operator(n, rng, scale)
    if spec == "2nonneg":
        return interior_sample(TwoNonneg(), n, rng) * scale
    if spec.startswith("stage:"):
        _, stage, param = spec.split(":")
        return interior_sample(stage_cone(stage, n, float(param)), n, rng) * scale
    raise ValueError(f"unknown initial condition {spec!r}")


def _parse_watch(tokens: list[str], n: int):
    cones = []
    for tok in tokens:
        if tok in CONES:
            cones.append(CONES[tok]())
        elif tok.startswith("ricci-pinched:"):
            cones.append(RicciPinched(float(tok.split(":")[1])))
        elif tok.startswith("stage:"):
            _, stage, param = tok.split(":")
            cones.append(stage_cone(stage, n, float(param)))
        else:
            raise ValueError(f"unknown watch cone {tok!r}")
    return tuple(cones)


def cmd_verify(args) -> int:
    config = RunConfig("verify", {
        "suite": args.suite, "n": args.n, "samples": args.samples,
        "seed": args.seed, "tol": args.tol, "threads": args.threads,
    })
    body = suites.run_suite(args.suite, args.n, args.samples, args.seed,
                            tol=args.tol, threads=args.threads)
    path = write_report(args.out, config, body)
    worst = max((a["max_residual"] for a in body["assertions"]), default=0.0)
    status = "PASS" if body["pass"] else "FAIL"
    print(f"{status} verify {args.suite} n={args.n} samples={args.samples} "
          f"seed={args.seed} max-residual={worst:.3e} report={path}")
    return 0 if body["pass"] else 1


def cmd_sweep(args) -> int:
    grid = args.grid if args.grid else _default_grid(args.stage, args.n, args.points)
    config = RunConfig("sweep", {
        "stage": args.stage, "n": args.n, "grid": grid,
        "samples": args.samples, "seed": args.seed,
    })
    reports = []
    ok = True
    for idx, param in enumerate(grid):
        rep = positivity_certificate(args.stage, args.n, param, args.samples,
                                     args.seed + idx)
        reports.append(rep.to_dict())
        ok = ok and rep.min_slack >= 0 and not rep.failures
    body = {"stage": args.stage, "n": args.n, "samples": args.samples,
            "seed": args.seed, "grid": grid, "certificates": reports,
            "min_slack": min(r["min_slack"] for r in reports), "pass": ok}
    path = write_report(args.out, config, body)
    print(f"{'PASS' if ok else 'FAIL'} sweep {args.stage} n={args.n} "
          f"grid={len(grid)}pts min-slack={body['min_slack']:.6e} report={path}")
    return 0 if ok else 1


def _default_grid(stage: str, n: int, points: int) -> list[float]:
    if stage == PROP_STAGE:
        bmax = prop_stage_b_max(n)
        return [float(x) for x in np.linspace(bmax / points, bmax, points)]
    if stage == FIRST_FAMILY:
        return [float(x) for x in np.linspace(0.5 / points, 0.5, points)]
    if stage == SECOND_FAMILY:
        return [float(x) for x in np.geomspace(0.1, 20.0, points)]
    return [0.0]


def cmd_flow(args) -> int:
    config = RunConfig("flow", {
        "n": args.n, "init": args.init, "scale": args.scale, "seed": args.seed,
        "horizon": args.horizon, "rtol": args.rtol, "atol": args.atol,
        "normalized": args.normalized, "watch": args.watch,
        "pinch_grid": args.pinch_grid,
    })
    R0 = _init_operator(args.init, args.n, args.scale, args.seed)
    watch = _parse_watch(args.watch, args.n)
    traj = flow_mod.integrate(R0, args.horizon, rtol=args.rtol, atol=args.atol,
                              normalized=args.normalized, watch=watch)
    family = pinching_parameterization(args.n, args.pinch_grid) if args.pinch_grid else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"flow-{config.digest()}.csv"
    csv_path.write_text(flow_mod.trajectory_csv(traj, family))
    body = flow_mod.trajectory_manifest(traj, seed=args.seed)
    body["initial"] = json.loads(operator_to_json(R0))
    path = write_report(args.out, config, body)
    print(f"OK flow n={args.n} init={args.init} termination={traj.termination} "
          f"t-end={traj.times[-1]:.6g} report={path} csv={csv_path}")
    return 0


def cmd_search(args) -> int:
    if args.cone not in CONES:
        print(f"error: unknown cone {args.cone!r}; expected one of {sorted(CONES)}",
              file=sys.stderr)
        return 2
    config = RunConfig("search", {
        "cone": args.cone, "n": args.n, "budget": args.budget, "seed": args.seed,
    })
    res = flow_mod.counterexample_search(CONES[args.cone](), args.n, args.budget,
                                         args.seed)
    body = {
        "cone": args.cone, "n": args.n, "budget": args.budget, "seed": args.seed,
        "found": res.found, "margin": res.margin, "field_norm": res.field_norm,
        "evaluations": res.evaluations, "trace": res.trace,
        "witness": None if res.witness is None else json.loads(operator_to_json(res.witness)),
    }
    path = write_report(args.out, config, body)
    print(f"OK search {args.cone} n={args.n} found={res.found} "
          f"margin={res.margin:.6e} report={path}")
    return 0


def cmd_schedule(args) -> int:
    print(f"stage={args.stage} n={args.n}")
    print(f"{'parameter':>12} {'a':>16} {'b':>16} {'p':>16}")
    grid = args.grid if args.grid else _default_grid(args.stage, args.n, args.points)
    for param in grid:
        s = schedule(args.stage, args.n, param)
        p_str = "-" if s.p is None else f"{s.p:.12g}"
        print(f"{param:12.6g} {s.a:16.12g} {s.b:16.12g} {p_str:>16}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="curvlab",
                                 description="curvature-operator algebra laboratory")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--n", type=int, default=4, help="dimension (>= 3)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="reports")
        p.add_argument("--config", default=None,
                       help="JSON file whose entries override the flags")
        p.add_argument("--threads", type=int, default=1)

    p = sub.add_parser("verify", help="run one identity suite")
    p.add_argument("suite", choices=suites.SUITES)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--tol", type=float, default=None)
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="positivity certificates over a stage grid")
    p.add_argument("--stage", choices=STAGES, required=True)
    p.add_argument("--grid", type=_parse_grid, default=None,
                   help="parameter grid start:stop:count")
    p.add_argument("--b-grid", dest="grid", type=_parse_grid,
                   help="alias of --grid for the b-parameterized stages")
    p.add_argument("--s-grid", dest="grid", type=_parse_grid,
                   help="alias of --grid for the s-parameterized stage")
    p.add_argument("--points", type=int, default=10, help="default grid size")
    p.add_argument("--samples", type=int, default=10000)
    common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("flow", help="integrate one trajectory")
    p.add_argument("--init", default="identity",
                   help="identity | rank-one | random | 2nonneg | stage:<stage>:<param>")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--horizon", type=float, default=10.0)
    p.add_argument("--rtol", type=float, default=1e-9)
    p.add_argument("--atol", type=float, default=1e-12)
    p.add_argument("--normalized", action="store_true")
    p.add_argument("--watch", nargs="*", default=[],
                   help="cone tokens: nonneg 2nonneg 3nonneg ricci-pinched:<p> stage:<stage>:<param>")
    p.add_argument("--pinch-grid", type=int, default=0,
                   help="emit a pinching report over a composed family of this size")
    common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("search", help="boundary witness search")
    p.add_argument("--cone", required=True, help="nonneg | 2nonneg | 3nonneg")
    p.add_argument("--budget", type=int, default=10000)
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("schedule", help="print (a, b, p) tables")
    p.add_argument("--stage", choices=STAGES, required=True)
    p.add_argument("--grid", type=_parse_grid, default=None)
    p.add_argument("--points", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_schedule)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _apply_config_file(args)
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
