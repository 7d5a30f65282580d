"""Command-line front end.

    fitraffic simulate  --m 2 --L 100000 --rho 0.3 --steps 100 --seed 1 --replicas 8
    fitraffic exact     --m 2 --grid 0:1:0.01 --steps 1,5,100
    fitraffic exact     --m 2 --rho 1/3 --steps 100
    fitraffic preimages --m 2 --n 2 --oracle
    fitraffic verify    [--quick]

Parameters may also come from ``--config FILE.json``; flags given on the
command line take precedence over the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__, analytic, preimages, simulation, verify

SIM_QUANTITIES = ("mean_velocity", "flow", "block_prob")


def parse_number(text) -> Fraction:
    """Exact value of '0.3', '1/3', '5'."""
    return Fraction(str(text))


def parse_grid(text: str) -> list[Fraction]:
    """'a:b:step' inclusive of ``b``; an empty list when ``a > b``."""
    try:
        a, b, h = (parse_number(x) for x in text.split(":"))
    except ValueError as exc:
        raise ValueError(f"grid must look like a:b:step, got {text!r}") from exc
    if h <= 0:
        raise ValueError("grid step must be positive")
    out = []
    x = a
    while x <= b:
        out.append(x)
        x += h
    return out


def parse_horizons(text) -> list:
    out = []
    for part in str(text).split(","):
        part = part.strip()
        out.append(analytic.STEADY if part in ("inf", "infinity") else int(part))
    return out


def _cfg_header(args: argparse.Namespace) -> list[str]:
    skip = {"func", "config"}
    echo = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return [f"fitraffic {__version__} {args.command}", "config " + json.dumps(echo, default=str, sort_keys=True)]


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.rho is None and args.cars is None:
        raise ValueError("simulate needs --rho or --cars")
    rho = float(parse_number(args.rho)) if args.rho is not None else None
    run = simulation.run_replicas(args.m, args.L, args.steps, args.seed, args.replicas,
                                  args.init, rho=rho, N=args.cars, workers=args.workers)
    header = _cfg_header(args)
    header.append("realized_density " + ",".join(repr(float(d)) for d in run.densities))
    lines = [f"# {h}\n" for h in header]
    mean, se = run.mean(), run.stderr()
    cols = ["t", *SIM_QUANTITIES]
    if run.replicas > 1:
        cols += [f"{q}_stderr" for q in SIM_QUANTITIES]
        cols += [f"flow_r{r}" for r in range(run.replicas)]
    lines.append(",".join(cols) + "\n")
    for t in run.t:
        row = [str(t), *(repr(float(x)) for x in mean[t])]
        if run.replicas > 1:
            row += [repr(float(x)) for x in se[t]]
            row += [repr(float(x)) for x in run.data[:, t, 1]]
        lines.append(",".join(row) + "\n")
    _emit("".join(lines), args.out)
    return 0


def cmd_exact(args: argparse.Namespace) -> int:
    exact = args.mode == "exact"

    def conv(x: Fraction):
        return x if exact else float(x)

    if args.grid is not None:
        grid = [conv(r) for r in parse_grid(args.grid)]
        horizons = parse_horizons(args.steps if args.steps is not None else "inf")
        series = analytic.AnalyticSeries(args.m, args.mode)
        for h in horizons:
            series.points += analytic.fundamental_diagram(args.m, h, grid, exact).points
    else:
        if args.rho is None or args.steps is None:
            raise ValueError("exact needs --grid, or --rho with --steps T_MAX")
        t_max = int(args.steps)
        series = analytic.flow_in_time(args.m, conv(parse_number(args.rho)), range(t_max + 1), exact)
    _emit(series.to_csv(_cfg_header(args)), args.out)
    return 0


def cmd_preimages(args: argparse.Namespace) -> int:
    formula = preimages.count_admissible(args.m, args.n)
    doc = {"formula": formula.to_dict()}
    if args.oracle:
        try:
            brute = preimages.enumerate_preimages_bruteforce(args.m, args.n, limit=args.oracle_limit)
        except preimages.ResourceLimitError as exc:
            print(f"fitraffic: resource limit: {exc}", file=sys.stderr)
            return 3
        doc["oracle"] = brute.to_dict()
        doc["verdict"] = "equal" if brute.by_ones == formula.by_ones else "different"
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0 if doc.get("verdict", "equal") == "equal" else 1


def cmd_verify(args: argparse.Namespace) -> int:
    results = verify.run_checks(quick=args.quick, seed=args.seed)
    for r in results:
        print(r.line())
    rep = verify.report(results)
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(rep, fh, indent=2)
    print("all checks passed" if rep["passed"] else "SOME CHECKS FAILED")
    return 0 if rep["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with parameters; flags override it")
    common.add_argument("--m", type=int, default=2, help="maximum speed")
    common.add_argument("--seed", type=int, default=1)
    common.add_argument("--out", help="output path (default stdout)")

    p = argparse.ArgumentParser(prog="fitraffic", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fitraffic {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="Monte-Carlo flow time series")
    s.add_argument("--L", type=int, default=100_000)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--rho", help="density, e.g. 0.3 or 1/3")
    g.add_argument("--cars", type=int, help="exact number of cars")
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--replicas", type=int, default=1)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--init", choices=simulation.INIT_MODES, default="bernoulli")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("exact", parents=[common], help="closed-form block probability and flow")
    e.add_argument("--rho", help="density for a time series")
    e.add_argument("--grid", help="density grid a:b:step (inclusive)")
    e.add_argument("--steps", help="T_MAX for a time series; comma list of t (or 'inf') with --grid")
    e.add_argument("--mode", choices=("float", "exact"), default="float")
    e.set_defaults(func=cmd_exact)

    q = sub.add_parser("preimages", parents=[common], help="count preimages of 0^(m+1)")
    q.add_argument("--n", type=int, default=1, help="number of steps")
    q.add_argument("--oracle", action="store_true", help="also run the exhaustive scan")
    q.add_argument("--oracle-limit", type=int, default=preimages.DEFAULT_ORACLE_LIMIT)
    q.set_defaults(func=cmd_preimages)

    v = sub.add_parser("verify", parents=[common], help="run all cross-checks")
    v.add_argument("--quick", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            cfg = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
        # --rho and --cars are alternatives: one given as a flag cancels the other from the file
        if getattr(args, "cars", None) is not None:
            cfg.pop("rho", None)
        if getattr(args, "rho", None) is not None:
            cfg.pop("cars", None)
        for key in ("rho", "grid") + (("steps",) if args.command == "exact" else ()):
            if key in cfg:
                cfg[key] = str(cfg[key])
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"fitraffic: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
