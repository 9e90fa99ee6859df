"""Command-line interface.

Exit codes: 0 success, 1 I/O or parse error, 2 validation or domain error,
3 classification written but flagged as ambiguous.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import acceptance, exponents, fixtures
from .config import DEFAULT_TOLERANCES
from .errors import OFBMError, ValidationError
from .params import SpectralParams, load_params
from .process import (
    DEFAULT_OSS_GRID,
    QuadratureConfig,
    SimulationConfig,
    covariance_grid,
    oss_check,
    simulate,
)
from .symmetry import classify

EXIT_OK, EXIT_IO, EXIT_VALIDATION, EXIT_AMBIGUOUS = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _tolerances(args, base=DEFAULT_TOLERANCES):
    if args.tol is None:
        return base
    if not args.tol > 0:
        raise _Failure(EXIT_VALIDATION, "--tol must be positive")
    return replace(base, cluster=args.tol, null=args.tol, graph=args.tol)


def _load(args) -> SpectralParams:
    if not args.params:
        raise _Failure(EXIT_IO, "--params is required")
    path = Path(args.params)
    try:
        if not path.exists() and args.params in fixtures.names():
            p = fixtures.load(args.params)
        else:
            p = load_params(path)
    except (OSError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise _Failure(EXIT_IO, f"cannot read parameters from {args.params}: {exc}") from exc
    return replace(p, tolerances=_tolerances(args, p.tolerances))


def _emit(args, text: str) -> None:
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise _Failure(EXIT_IO, f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _times(args, default_t_max: float = 1.0, default_steps: int = 10) -> np.ndarray:
    t_max = default_t_max if args.t_max is None else args.t_max
    steps = default_steps if args.steps is None else args.steps
    if not t_max > 0 or steps < 1:
        raise _Failure(EXIT_VALIDATION, "--t-max must be positive and --steps at least 1")
    return np.linspace(0.0, t_max, steps + 1)


def _quadrature(args) -> QuadratureConfig:
    kw = {"normalize": bool(getattr(args, "normalize", False))}
    if args.x_max is not None:
        kw["x_max"] = args.x_max
    if args.panels is not None:
        kw["panels"] = args.panels
    return QuadratureConfig(**kw)


def cmd_classify(args) -> int:
    p = _load(args)
    c = classify(p, tol=p.tolerances, seed=args.seed)
    _emit(args, _dump(c.to_dict()))
    return EXIT_AMBIGUOUS if c.ambiguous else EXIT_OK


def cmd_exponents(args) -> int:
    p = _load(args)
    c = classify(p, tol=p.tolerances, seed=args.seed)
    doc = exponents.report(p, c)
    doc["group_type"] = c.group_type
    _emit(args, _dump(doc))
    return EXIT_AMBIGUOUS if c.ambiguous else EXIT_OK


def _require_domain(p: SpectralParams) -> None:
    if not p.in_domain:
        raise _Failure(EXIT_VALIDATION, "eigenvalues of D must have real parts in (-1/2, 1/2)")


def cmd_covariance(args) -> int:
    p = _load(args)
    _require_domain(p)
    g = covariance_grid(p, _times(args, 1.0, 4), _quadrature(args))
    _emit(args, _dump(g.to_dict()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    p = _load(args)
    _require_domain(p)
    kw = {}
    if args.x_max is not None:
        kw["x_max"] = args.x_max
    if args.panels is not None:
        kw["panels"] = args.panels
    n_paths = 1 if args.paths is None else args.paths
    if n_paths < 1:
        raise _Failure(EXIT_VALIDATION, "--paths must be at least 1")
    sp = simulate(p, _times(args, 1.0, 100), n_paths, args.seed, SimulationConfig(**kw))
    _emit(args, sp.to_csv())
    return EXIT_OK


def cmd_oss_check(args) -> int:
    p = _load(args)
    _require_domain(p)
    c = 2.0 if args.c is None else args.c
    if args.t_max is None and args.steps is None:
        grid = DEFAULT_OSS_GRID
    else:
        grid = tuple(_times(args, 2.0, 5)[1:])
    err = oss_check(p, c, grid, _quadrature(args))
    print(f"oss relative error at c={c:g}: {err:.3e}")
    if args.out:
        _emit(args, _dump({"c": c, "times": list(grid), "max_relative_error": err}))
    return EXIT_OK


def cmd_verify_paper(args) -> int:
    if args.list:
        for cr in acceptance.CRITERIA:
            print(f"{cr.number:2d} {cr.name}")
        return EXIT_OK
    tol = _tolerances(args)
    lines, all_ok = [], True
    for cr in acceptance.CRITERIA:
        ok, detail = acceptance.run(cr, tol)
        all_ok &= ok
        line = acceptance.format_line(cr, ok, detail)
        lines.append(line)
        print(line, flush=True)
    print(f"{sum(l.startswith('PASS') for l in lines)}/{len(lines)} criteria passed")
    if args.out:
        _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK if all_ok else EXIT_IO


COMMANDS = {
    "classify": cmd_classify,
    "exponents": cmd_exponents,
    "covariance": cmd_covariance,
    "simulate": cmd_simulate,
    "oss-check": cmd_oss_check,
    "verify-paper": cmd_verify_paper,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ofbm-sym", description="Symmetry groups and exponents of operator fractional Brownian motion.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--params", help="JSON parameter file (or the name of a bundled fixture)")
        sp.add_argument("--out", help="output file (default: standard output)")
        sp.add_argument("--tol", type=float, help="clustering, nullspace and graph threshold")
        sp.add_argument("--seed", type=int, default=42)
        sp.add_argument("--c", type=float, help="scale factor for oss-check")
        sp.add_argument("--t-max", dest="t_max", type=float)
        sp.add_argument("--steps", type=int)
        sp.add_argument("--paths", type=int)
        sp.add_argument("--x-max", dest="x_max", type=float)
        sp.add_argument("--panels", type=int)
        if name in ("covariance", "oss-check"):
            sp.add_argument("--normalize", action="store_true", help="scale so that tr Gamma(1,1) = n")
        if name == "verify-paper":
            sp.add_argument("--list", action="store_true", help="print criterion names only")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except _Failure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ValidationError, OFBMError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
