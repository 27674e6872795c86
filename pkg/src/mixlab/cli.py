"""Command-line interface: analyze | verify | scan | simulate.

Exit codes: 0 success (all hard inequalities hold), 1 input or validation
error, 2 verification failure (an explicit-constant inequality violated).
All outputs are written atomically into --out; seeds and grids are echoed
into every header.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chain import point_mass, validate_chain
from .cutoff import DEFAULT_EPS, scan_family
from .distances import profile
from .errors import MixLabError, ValidationError, VerificationFailure
from .maximal import stein_sweep
from .coupling import check_poisson_thinning, simulate_natural_coupling
from .reporting import (
    atomic_write_text,
    cutoff_to_csv,
    profiles_to_csv,
    render_profiles,
    render_scan,
    reports_to_json,
)
from .spectral import DirectKernel, decompose, make_engine
from .specio import chain_to_dict, load_chain_file
from .verifiers import (
    check_abelian,
    check_sharpness_section6,
    check_tail_bounds,
    fit_tauberian,
    hitting_time_profile,
    section6_stationary_report,
)
from .zoo import FamilySpec, make_chain

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2


def _parse_params(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValidationError(f"--params entries look like key=value, got {pair!r}")
        k, v = pair.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _parse_times(text: str) -> list[float]:
    if ".." in text:
        lo_hi, _, step = text.partition(":")
        lo, _, hi = lo_hi.partition("..")
        lo, hi = float(lo), float(hi)
        step_v = float(step) if step else 1.0
        if step_v <= 0 or hi < lo:
            raise ValidationError(f"bad time range {text!r}")
        out, t = [], lo
        while t <= hi + 1e-12:
            out.append(round(t, 12))
            t += step_v
        return out
    return [float(x) for x in text.split(",") if x]


def _parse_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x]


def _resolve_chain(args):
    if getattr(args, "chain_file", None):
        spec = load_chain_file(args.chain_file)
    elif getattr(args, "family", None):
        params = _parse_params(getattr(args, "params", None))
        if getattr(args, "n", None) is not None:
            params.setdefault("n", args.n)
        if getattr(args, "alpha", None) is not None and args.family == "af_section6":
            params.setdefault("alpha", args.alpha)
        spec = make_chain(FamilySpec(args.family, params))
    else:
        raise ValidationError("need --family or --chain-file")
    return validate_chain(spec)


def _meta(args, **extra) -> dict:
    meta = {"tool": f"mixlab {__version__}", "command": args.command}
    for key in ("family", "chain_file", "n", "alpha", "mode", "t", "s", "eps", "seed", "samples", "suite", "tau"):
        v = getattr(args, key, None)
        if v is not None:
            meta[key] = v
    meta.update(extra)
    return meta


def cmd_analyze(args) -> int:
    chain = _resolve_chain(args)
    out = Path(args.out)
    if args.dump_spec:
        atomic_write_text(out / "chain.json", json.dumps(chain_to_dict(chain.spec), indent=2) + "\n")
    engine = make_engine(chain, prefer=args.engine)
    modes = [m.strip() for m in args.mode.split(",") if m.strip()]
    times = _parse_times(args.t)
    start = None if args.start is None else point_mass(args.start, chain.n)
    profiles = []
    for mode in modes:
        ts = times if mode == "heat" else [int(t) for t in times]
        profiles.append(profile(engine, mode, ts, start))
    formats = set(args.format.split(","))
    written = []
    if "csv" in formats:
        atomic_write_text(out / "profile.csv", profiles_to_csv(profiles, _meta(args)))
        written.append(out / "profile.csv")
    if "json" in formats:
        doc = [
            {"mode": p.mode, "start": p.start, "times": list(p.times), "values": list(p.values)}
            for p in profiles
        ]
        atomic_write_text(out / "profile.json", json.dumps({"meta": _meta(args), "profiles": doc}, indent=2) + "\n")
        written.append(out / "profile.json")
    if "svg" in formats:
        render_profiles(profiles, out / "profile.svg", title=chain.label)
        written.append(out / "profile.svg")
    for w in written:
        print(w)
    return EXIT_OK


def _default_verify_grids(args):
    t_grid = [int(t) for t in _parse_times(args.t)] if args.t else [25, 50, 100]
    s_grid = _parse_list(args.s) if args.s else None
    return t_grid, s_grid


def cmd_verify(args) -> int:
    out = Path(args.out)
    suite = args.suite
    hard_failure = False
    if suite == "abelian":
        chain = _resolve_chain(args)
        engine = DirectKernel(chain)
        t_grid, s_grid = _default_verify_grids(args)
        s_grid = s_grid or [0.5, 1.0, 2.0, 3.0]
        s_grid = [s for s in s_grid]
        reports = check_abelian(engine, t_grid, [s for s in s_grid if s <= min(t_grid) ** 0.5] or s_grid)
        hard_failure = not all(r.holds for r in reports)
    elif suite == "tauberian":
        chain = _resolve_chain(args)
        engine = DirectKernel(chain)
        t_grid, s_grid = _default_verify_grids(args)
        reports = fit_tauberian(engine, t_grid, s_grid or [2.0, 4.0, 8.0, 16.0])
    elif suite == "sharpness":
        reports = check_sharpness_section6(args.n or 20, args.alpha or 0.5)
        hard_failure = not reports.holds
    elif suite == "stationary":
        reports = section6_stationary_report(args.n or 20, args.alpha or 0.5)
        hard_failure = not reports.holds
    elif suite == "tails":
        eps = _parse_list(args.eps) if args.eps else [0.05, 0.1, 0.2, 0.5, 1.0]
        reports = []
        for mu in _parse_list(args.s) if args.s else [1.0, 10.0, 100.0, 1000.0]:
            reports.extend(check_tail_bounds("poisson", mu, eps))
            reports.extend(check_tail_bounds("binomial", int(mu), eps))
        hard_failure = not all(r.holds for r in reports)
    elif suite == "hitting":
        chain = _resolve_chain(args)
        sets = [tuple(int(x) for x in group.split(",") if x) for group in (args.sets or "").split(";") if group]
        reports = hitting_time_profile(chain, sets or [tuple(range(chain.n))])
    elif suite == "stein":
        chain = _resolve_chain(args)
        spectrum = decompose(chain)
        worst = stein_sweep(spectrum, args.samples or 100, args.seed)
        doc = {"meta": _meta(args), "max_ratio": worst}
        atomic_write_text(out / "report.json", json.dumps(doc, indent=2) + "\n")
        print(out / "report.json")
        return EXIT_OK
    elif suite == "thinning":
        reports = check_poisson_thinning(args.tau or 4.0, args.samples or 10**5, args.seed)
        hard_failure = not reports.holds
    else:
        raise ValidationError(f"unknown suite {suite!r}")
    atomic_write_text(out / "report.json", reports_to_json(reports, _meta(args)))
    print(out / "report.json")
    if hard_failure:
        print("verification FAILED: an explicit inequality was violated", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_scan(args) -> int:
    sizes = [int(s) for s in _parse_list(args.sizes)]
    eps = _parse_list(args.eps) if args.eps else list(DEFAULT_EPS)
    params = _parse_params(args.params)
    if args.alpha is not None and args.family == "af_section6":
        params.setdefault("alpha", args.alpha)
    report = scan_family(args.family, sizes, eps, params=params)
    out = Path(args.out)
    formats = set(args.format.split(","))
    if "csv" in formats:
        atomic_write_text(out / "scan.csv", cutoff_to_csv(report, _meta(args)))
        print(out / "scan.csv")
    if "json" in formats:
        atomic_write_text(out / "scan.json", reports_to_json(report, _meta(args)))
        print(out / "scan.json")
    if "svg" in formats:
        render_scan(report, out / "scan.svg")
        print(out / "scan.svg")
    return EXIT_OK


def cmd_simulate(args) -> int:
    out = Path(args.out)
    if args.kind == "thinning":
        report = check_poisson_thinning(args.tau or 4.0, args.samples, args.seed)
        atomic_write_text(out / "simulate.json", reports_to_json(report, _meta(args)))
        print(out / "simulate.json")
        return EXIT_OK if report.holds else EXIT_VERIFY
    chain = _resolve_chain(args)
    t_max = float(args.t) if args.t else 1.0
    table = simulate_natural_coupling(chain, t_max, args.samples, args.seed, start=args.start or 0)
    doc = {
        "meta": _meta(args, t_max=t_max, start=table.start),
        "identity_violations": table.identity_violations,
        "marginals": {
            which: list(table.marginal(which)) for which in ("continuous", "lazy", "averaged")
        },
    }
    atomic_write_text(out / "simulate.json", json.dumps(doc, indent=2) + "\n")
    print(out / "simulate.json")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixlab", description=__doc__)
    parser.add_argument("--version", action="version", version=f"mixlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_chain_args(p):
        p.add_argument("--family", help="zoo family name")
        p.add_argument("--params", nargs="*", help="family parameters as key=value")
        p.add_argument("--n", type=int, help="shortcut for the family size parameter")
        p.add_argument("--alpha", type=float, help="shortcut for the af_section6 exponent")
        p.add_argument("--chain-file", help="JSON chain spec path")

    p = sub.add_parser("analyze", help="distance profiles for one chain")
    add_chain_args(p)
    p.add_argument("--mode", default="heat,lazy,ave", help="comma list from disc,lazy,ave,heat")
    p.add_argument("--t", default="0..50", help="time grid LO..HI[:STEP] or comma list")
    p.add_argument("--start", type=int, help="fixed starting state (default worst-case)")
    p.add_argument("--engine", default="auto", choices=["auto", "spectral", "direct"])
    p.add_argument("--dump-spec", action="store_true", help="also write the resolved chain.json")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", default="csv,svg", help="comma list from csv,json,svg")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", help="inequality suites")
    add_chain_args(p)
    p.add_argument("--suite", required=True,
                   choices=["abelian", "tauberian", "sharpness", "stationary", "tails", "hitting", "stein", "thinning"])
    p.add_argument("--t", help="t grid")
    p.add_argument("--s", help="s grid (comma list); doubles as mu grid for tails")
    p.add_argument("--eps", help="epsilon grid (comma list)")
    p.add_argument("--sets", help="hitting sets, e.g. '0,1;5,6,7'")
    p.add_argument("--tau", type=float, help="thinning rate")
    p.add_argument("--samples", type=int, help="number of random draws")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan", help="cutoff diagnostics over a size grid")
    p.add_argument("--family", required=True)
    p.add_argument("--params", nargs="*")
    p.add_argument("--alpha", type=float)
    p.add_argument("--sizes", required=True, help="comma list, ascending")
    p.add_argument("--eps", help="epsilon grid in (0, 1/2)")
    p.add_argument("--out", default=".")
    p.add_argument("--format", default="csv,json,svg")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo coupling checks")
    add_chain_args(p)
    p.add_argument("--kind", default="coupling", choices=["coupling", "thinning"])
    p.add_argument("--t", help="time horizon")
    p.add_argument("--tau", type=float, help="thinning rate")
    p.add_argument("--samples", type=int, default=10**5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", type=int)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VerificationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except MixLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
