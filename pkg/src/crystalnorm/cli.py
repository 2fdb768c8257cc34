"""Command-line entry point: ``crystalnorm <subcommand> [options]``.

Exit status is 0 on success, 1 when a computed result fails its check and 2
on a usage error. Floats are written with 12 significant digits, except
configuration coordinates, which keep full precision so that they round-trip.
"""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from pathlib import Path

from . import lattice_sums, optimizer, patches
from .lattices import (DomainPoint, ReducedLattice, canonical, canonical_lp,
                       lattice_from_domain_point, linear_map_between, parse_lattice, reduce)
from .norms import PNorm, describe, kissing_number, parse_norm

DEFAULT_FORMAT = {"scan": "csv", "contour": "csv"}
#: inputs rounded to a few digits, such as 0.5,0.8660254, are accepted up to this distance from D
DOMAIN_SNAP = 1e-6


class UsageError(ValueError):
    pass


class CheckFailed(RuntimeError):
    pass


# --- argument parsing helpers ----------------------------------------------------------

def _field(name: str, fn, text):
    try:
        return fn(text)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"--{name}: {exc}") from None


def _float_list(text: str, count: int | None = None) -> list[float]:
    vals = [float(t) for t in text.split(",") if t.strip()]
    if count is not None and len(vals) != count:
        raise ValueError(f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _grid(text: str) -> tuple[int, int]:
    nx, ny = (int(t) for t in text.split(","))
    return nx, ny


def parse_p_list(text: str) -> list[float]:
    """``default``, a list ``1,1.5,inf`` or a range ``start:stop:step`` (stop included)."""
    text = text.strip().lower()
    if text == "default":
        return optimizer.default_p_list()
    m = re.fullmatch(r"([^:]+):([^:]+):([^:]+)", text)
    if m:
        a, b, h = (float(g) for g in m.groups())
        if not h > 0 or b < a:
            raise ValueError(f"bad range {text!r}")
        n = int(math.floor((b - a) / h + 1e-9))
        return [round(a + i * h, 10) for i in range(n + 1)]
    vals = _float_list(text)
    if not vals:
        raise ValueError("empty p list")
    return vals


def _reduced(text: str) -> ReducedLattice:
    kind, _, rest = text.strip().partition(":")
    if kind.lower() == "reduced":
        return ReducedLattice(*_float_list(rest, 3))
    if kind.lower() == "name":
        name, _, p = rest.partition(":")
        return canonical(name, float(p) if p else None)
    return reduce(parse_lattice(text))


def _domain_lattice(text: str):
    """Lattice of a point of D; points within DOMAIN_SNAP of D are moved onto it."""
    x, y = _float_list(text, 2)
    px, py = optimizer.project(x, y)
    if math.hypot(x - px, y - py) > DOMAIN_SNAP:
        raise ValueError(f"({x}, {y}) is outside the half-fundamental domain")
    return lattice_from_domain_point(DomainPoint(px, py))


# --- output -----------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    return str(v)


def _round(obj):
    if isinstance(obj, float):
        return fmt(obj) if math.isinf(obj) or math.isnan(obj) else float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    lines += [",".join("" if v is None else fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _emit(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, payload: dict) -> None:
    _emit(args, json.dumps(_round(payload), indent=2) + "\n")


# --- subcommands --------------------------------------------------------------------------

def cmd_patch(args) -> int:
    N = _field("n", int, args.n)
    build = patches.build_hex_patch if args.family == "hex" else patches.build_oct_patch
    if args.norm or args.lattice:
        if not (args.norm and args.lattice):
            raise UsageError("--norm and --lattice must be given together")
        n = _field("norm", parse_norm, args.norm)
        L = _field("lattice", _reduced, args.lattice)
        want = 6 if args.family == "hex" else 8
        if kissing_number(n) != want:
            raise UsageError(f"--norm: kissing number {kissing_number(n)} does not match family "
                             f"{args.family!r}")
        try:
            X = patches.build_minimizer(N, n, L)
        except patches.ContractViolation as exc:
            raise CheckFailed(str(exc)) from None
    else:
        X = _field("n", build, N)
    if args.format == "csv":
        _emit(args, "x,y\n" + "".join(f"{x!r},{y!r}\n" for x, y in X.points.tolist()))
    else:
        _emit(args, X.to_json() + "\n")
    return 0


def _load_config(path: str) -> patches.Configuration:
    try:
        return patches.Configuration.from_json(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"--config: {exc}") from None
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--config: not a configuration file ({exc})") from None


def cmd_energy(args) -> int:
    X = _load_config(args.config)
    n = _field("norm", parse_norm, args.norm)
    if len(X) < 2:
        raise UsageError("--config: need at least two points")
    if args.potential == "bpd":
        energy = _field("config", patches.bpd_energy_on_Z2, X)
    else:
        energy = patches.sticky_energy(X, n)
    G = patches.min_distance_graph(X, n)
    if args.format == "csv":
        _emit(args, G.to_csv())
        return 0
    _emit_json(args, {
        "norm": describe(n), "potential": args.potential, "n_points": len(X),
        "energy": energy if isinstance(energy, float) else int(energy),
        "min_distance": G.min_distance, "min_distance_edges": G.n_edges,
    })
    return 0


def cmd_verify(args) -> int:
    n_max = _field("n-max", int, args.n_max)
    if n_max < 1:
        raise UsageError("--n-max: need at least 1")
    if args.family == "hex":
        n, k, build = PNorm(2.0), 6, patches.build_hex_patch
    else:
        n, k, build = PNorm(math.inf), 8, patches.build_oct_patch
    if args.norm:
        n = _field("norm", parse_norm, args.norm)
        if not isinstance(n, PNorm):
            raise UsageError("--norm: verify takes a plain p-norm (p:<v>)")
        if kissing_number(n) != k:
            raise UsageError(f"--norm: kissing number {kissing_number(n)} does not match family "
                             f"{args.family!r}")
        # the patch lives on L_p for this norm
        T = linear_map_between(canonical("A2" if k == 6 else "Z2"), canonical_lp(n.p))
        base = build
        build = lambda N: base(N).mapped(T)  # noqa: E731
    rows = []
    for N in range(1, n_max + 1):
        X = build(N)
        if args.potential == "bpd":
            e = patches.bpd_energy_on_Z2(X)
        else:
            e = patches.sticky_energy(X, n)
        rows.append((N, e, patches.predicted_min_energy(N, k)))
    bad = [r for r in rows if r[1] != r[2]]
    summary = f"{len(rows) - len(bad)}/{len(rows)} match"
    if args.format == "csv":
        _emit(args, _csv(["N", "energy", "predicted", "match"],
                         [(N, e, q, int(e == q)) for N, e, q in rows]))
    else:
        _emit_json(args, {"family": args.family, "norm": describe(n), "potential": args.potential,
                          "checked": len(rows), "matched": len(rows) - len(bad),
                          "summary": summary, "mismatches": [list(r) for r in bad]})
    print(summary, file=sys.stderr)
    return 1 if bad else 0


def _sum_dict(r: lattice_sums.SumResult) -> dict:
    return {"value": r.value, "tail_bound": r.tail_bound, "terms": r.terms_used}


def cmd_zeta(args) -> int:
    L = _field("lattice", parse_lattice, args.lattice)
    n = _field("norm", parse_norm, args.norm)
    s = _field("s", float, args.s)
    if not s > 2:
        raise UsageError(f"--s: the sum diverges for s <= 2 (s={s})")
    try:
        r = lattice_sums.epstein_zeta(L, n, s, args.tol, order=args.order)
    except lattice_sums.ToleranceUnreachable as exc:
        raise CheckFailed(str(exc)) from None
    if args.format == "csv":
        _emit(args, _csv(["value", "tail_bound", "terms"], [(r.value, r.tail_bound, r.terms_used)]))
    else:
        _emit_json(args, _sum_dict(r))
    return 0


def cmd_lj(args) -> int:
    n = _field("norm", parse_norm, args.norm)
    if args.domain:
        L = _field("domain", _domain_lattice, args.domain)
    elif args.lattice:
        L = _field("lattice", parse_lattice, args.lattice)
    else:
        raise UsageError("one of --domain or --lattice is required")
    try:
        r = lattice_sums.lj_from_lattice(L, n, args.tol)
    except lattice_sums.ToleranceUnreachable as exc:
        raise CheckFailed(str(exc)) from None
    if args.format == "csv":
        _emit(args, _csv(["e", "lambda", "zeta6", "zeta12"],
                         [(r.reduced, r.lmbda, r.zeta6.value, r.zeta12.value)]))
    else:
        _emit_json(args, {"e": r.reduced, "lambda": r.lmbda,
                          "zeta6": _sum_dict(r.zeta6), "zeta12": _sum_dict(r.zeta12)})
    return 0


def _row_dict(r: optimizer.PhaseRow) -> dict:
    return {"p": r.p, "x": r.minimizer.x, "y": r.minimizer.y, "value": r.value, "phase": r.phase}


PHASE_HEADER = ["p", "x", "y", "value", "phase"]


def cmd_scan(args) -> int:
    kind = _field("objective", optimizer.parse_objective, args.objective)
    ps = _field("p", parse_p_list, args.p)
    if any(not p >= 1 for p in ps):
        raise UsageError("--p: every p must be >= 1")
    grid = _field("grid", _grid, args.grid)
    rows = optimizer.scan_p(kind, ps, grid, args.tol, args.threads)
    if args.format == "json":
        _emit_json(args, {"objective": str(kind), "rows": [_row_dict(r) for r in rows]})
    else:
        _emit(args, "\n".join([",".join(PHASE_HEADER)] + [r.csv() for r in rows]) + "\n")
    return 0


def cmd_transition(args) -> int:
    kind = _field("objective", optimizer.parse_objective, args.objective)
    p_lo = _field("p-lo", float, args.p_lo)
    p_hi = _field("p-hi", float, args.p_hi)
    if not 1 <= p_lo < p_hi:
        raise UsageError("--p-lo/--p-hi: need 1 <= p-lo < p-hi")
    grid = _field("grid", _grid, args.grid)
    try:
        t = optimizer.locate_transition(kind, p_lo, p_hi, args.phase_lo, args.phase_hi,
                                        args.tol_p, grid, args.tol, args.threads)
    except optimizer.TransitionError as exc:
        raise CheckFailed(str(exc)) from None
    if args.format == "csv":
        _emit(args, "\n".join([",".join(PHASE_HEADER)] + [r.csv() for r in t.rows]) + "\n")
    else:
        _emit_json(args, {"objective": str(kind), "p_lo": t.p_lo, "p_hi": t.p_hi,
                          "phase_lo": t.phase_lo, "phase_hi": t.phase_hi,
                          "rows": [_row_dict(r) for r in t.rows]})
    return 0


def cmd_contour(args) -> int:
    kind = _field("objective", optimizer.parse_objective, args.objective)
    n = _field("norm", parse_norm, args.norm)
    xr = _field("x-range", lambda t: _float_list(t, 2), args.x_range)
    yr = _field("y-range", lambda t: _float_list(t, 2), args.y_range)
    if args.nx < 1 or args.ny < 1:
        raise UsageError("--nx/--ny: need at least one cell")
    f = optimizer.Objective(kind, n, args.tol)
    try:
        cells = optimizer.contour_grid(f, xr, yr, args.nx, args.ny, args.threads)
    except ValueError as exc:
        raise UsageError(f"--x-range/--y-range: {exc}") from None
    if args.format == "json":
        _emit_json(args, {"objective": str(kind), "norm": describe(n), "nx": args.nx,
                          "ny": args.ny, "cells": [list(c) for c in cells]})
    else:
        _emit(args, _csv(["x", "y", "value"], cells))
    return 0


def cmd_maps(args) -> int:
    src = _field("source", _reduced, args.source)
    dst = _field("target", _reduced, args.target)
    T = linear_map_between(src, dst)
    if args.format == "csv":
        _emit(args, _csv(["a", "b", "c", "d"], [(T.a, T.b, T.c, T.d)]))
    else:
        _emit_json(args, {"source": [src.u1, src.v1, src.v2], "target": [dst.u1, dst.v1, dst.v2],
                          "a": T.a, "b": T.b, "c": T.c, "d": T.d, "det": T.det})
    return 0


# --- parser ----------------------------------------------------------------------------------

def _globals(parser: argparse.ArgumentParser, suppress: bool) -> None:
    def d(v):
        return argparse.SUPPRESS if suppress else v

    parser.add_argument("--tol", type=float, default=d(lattice_sums.DEFAULT_TOL),
                        help="absolute accuracy of lattice sums")
    parser.add_argument("--threads", type=int, default=d(1), help="worker threads for grids")
    parser.add_argument("--format", choices=("json", "csv"), default=d(None))
    parser.add_argument("--out", default=d(None), help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="crystalnorm",
                                 description="Crystallization and lattice energies for arbitrary norms")
    _globals(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        _globals(p, suppress=True)
        p.set_defaults(func=fn)
        return p

    p = add("patch", cmd_patch, "build the sticky-disk minimizer H_N or Z_N")
    p.add_argument("family", choices=("hex", "oct"))
    p.add_argument("--n", required=True)
    p.add_argument("--norm", help="map the patch to --lattice for this norm and check it")
    p.add_argument("--lattice")

    p = add("energy", cmd_energy, "energy and minimal-distance graph of a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--norm", default="p:2")
    p.add_argument("--potential", choices=("sticky", "bpd"), default="sticky")

    p = add("verify", cmd_verify, "check the closed-form minimal energy for N = 2..n-max")
    p.add_argument("--family", choices=("hex", "oct"), required=True)
    p.add_argument("--n-max", required=True)
    p.add_argument("--norm", help="p-norm to check on L_p (default p:2 for hex, p:inf for oct)")
    p.add_argument("--potential", choices=("sticky", "bpd"), default="sticky")

    p = add("zeta", cmd_zeta, "Epstein zeta function of a lattice")
    p.add_argument("--lattice", required=True)
    p.add_argument("--norm", default="p:2")
    p.add_argument("--s", required=True)
    p.add_argument("--order", choices=("lex", "radius"), default="lex")

    p = add("lj", cmd_lj, "reduced Lennard-Jones energy and optimal scale")
    p.add_argument("--domain", help="x,y in the half-fundamental domain")
    p.add_argument("--lattice")
    p.add_argument("--norm", default="p:2")

    for name, fn, help in (("scan", cmd_scan, "minimizer phase for each p"),
                           ("transition", cmd_transition, "bisect a phase transition in p")):
        p = add(name, fn, help)
        p.add_argument("--objective", required=True, help="zeta:<s> or lj")
        p.add_argument("--grid", default="12,12")
        if name == "scan":
            p.add_argument("--p", default="default", help="list, start:stop:step or 'default'")
        else:
            p.add_argument("--p-lo", required=True)
            p.add_argument("--p-hi", required=True)
            p.add_argument("--tol-p", type=float, default=0.01)
            p.add_argument("--phase-lo", choices=optimizer.PHASES)
            p.add_argument("--phase-hi", choices=optimizer.PHASES)

    p = add("contour", cmd_contour, "objective values on a grid over the domain")
    p.add_argument("--objective", required=True)
    p.add_argument("--norm", default="p:2")
    p.add_argument("--nx", type=int, default=41)
    p.add_argument("--ny", type=int, default=61)
    p.add_argument("--x-range", default="0,0.5")
    p.add_argument("--y-range", default=f"0.85,{optimizer.Y_MAX}")

    p = add("maps", cmd_maps, "coefficients a,b,c,d of the linear map between two lattices")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "json")
    if not args.tol > 0:
        print("error: --tol: must be positive", file=sys.stderr)
        return 2
    if args.threads < 1:
        print("error: --threads: must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
