"""Command-line front end.

Exit status: 0 when every requested check passed, 1 when a check failed and
2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .errors import HKTError, ParseError, UnknownEntry
from .verifier import CHECKS, PointContext, RunConfig, classify, run_suite
from .zoo import REGISTRY, zoo_get

SEED_ENV = "SUSY_HKT_SEED"
DEFAULT_OUTPUT = "hktsusy_report.json"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _checks(text):
    out = tuple(c.strip() for c in text.split(",") if c.strip())
    bad = [c for c in out if c not in CHECKS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"checks must be drawn from {', '.join(CHECKS)}")
    return out


def _tol(text):
    """``VALUE`` (all bracket checks) or ``CHECK=VALUE``."""
    try:
        if "=" in text:
            k, v = text.split("=", 1)
            if k not in CHECKS:
                raise ValueError
            return {k: float(v)}
        return {c: float(text) for c in CHECKS if c != "classify"}
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad tolerance {text!r}") from None


def _point(text):
    try:
        return np.array([float(p) for p in text.split(",")])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad point {text!r}") from None


def build_parser():
    p = _Parser(prog="hktsusy", description="Sampled checks of extended supersymmetry on HKT geometries.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--manifold", action="append", default=None, help="zoo entry (repeatable)")
        sp.add_argument("--config", help="configuration file")
        sp.add_argument("--points", type=int, help="sample points per entry (default 20)")
        sp.add_argument("--seed", type=int, help=f"RNG seed (default ${SEED_ENV} or 0)")
        sp.add_argument("--jet-order", type=int, help="Taylor order of the metric jets (>= 3)")

    v = sub.add_parser("verify", help="run the verification suite")
    common(v)
    v.add_argument("--checks", type=_checks, help="comma-separated subset of " + ", ".join(CHECKS))
    v.add_argument("--tol", type=_tol, action="append", help="VALUE or CHECK=VALUE")
    v.add_argument("--output", help=f"JSON report path (default {DEFAULT_OUTPUT}; '-' for none)")
    v.add_argument("--threads", type=int, help="worker threads over sample points")
    v.add_argument("--json", action="store_true", help="print the JSON report instead of the table")

    c = sub.add_parser("classify", help="classify entries at sampled points")
    common(c)

    sub.add_parser("zoo", help="list the built-in manifolds")

    e = sub.add_parser("explain", help="print the supercharges at one point")
    e.add_argument("--manifold", required=True)
    e.add_argument("--point", type=_point, help="comma-separated coordinates (default: first sample)")
    e.add_argument("--jet-order", type=int, default=3)
    e.add_argument("--seed", type=int)
    return p


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise _UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None


def _config(args, checks=None):
    tolerances = None
    if getattr(args, "tol", None):
        tolerances = {}
        for t in args.tol:
            tolerances.update(t)
    output = getattr(args, "output", None)
    overrides = dict(
        points=args.points,
        seed=_seed(args),
        jet_order=args.jet_order,
        checks=checks,
        tolerances=tolerances,
        threads=getattr(args, "threads", None),
        output=output,
    )
    if args.config:
        from .config import load_config_file

        cfg = load_config_file(args.config, **overrides)
        if args.manifold:
            cfg.manifolds = list(args.manifold) + cfg.manifolds
    else:
        overrides = {k: v for k, v in overrides.items() if v is not None}
        cfg = RunConfig(manifolds=list(args.manifold or []), **overrides)
    for m in cfg.manifolds:
        if isinstance(m, str):
            zoo_get(m)
    if cfg.output is None:
        cfg.output = DEFAULT_OUTPUT
    if cfg.output == "-":
        cfg.output = None
    return cfg


def cmd_verify(args, out):
    cfg = _config(args, checks=args.checks)
    if not cfg.manifolds:
        raise _UsageError("nothing to verify: give --manifold or --config")
    report = run_suite(cfg)
    print(report.to_json() if args.json else report.table(), file=out)
    if cfg.output and not args.json:
        print(f"report written to {cfg.output}", file=out)
    return 0 if report.passed else 1


def cmd_classify(args, out):
    cfg = _config(args)
    if not cfg.manifolds:
        cfg.manifolds = list(REGISTRY)
    ok = True
    print(f"{'entry':24s} {'expected':9s} labels", file=out)
    for entry in cfg.entries():
        labels = [
            c.label
            for c in classify(entry, cfg.points, cfg.tol["classify"], seed=cfg.seed, order=cfg.jet_order)
        ]
        counts = {lab: labels.count(lab) for lab in dict.fromkeys(labels)}
        shown = ", ".join(f"{k} x{n}" for k, n in counts.items())
        match = set(labels) == {entry.expected_class}
        ok &= match
        print(f"{entry.name:24s} {entry.expected_class:9s} {shown}{'' if match else '  MISMATCH'}", file=out)
    return 0 if ok else 1


def cmd_zoo(args, out):
    for name, e in REGISTRY.items():
        extra = " [gauge]" if e.gauge is not None else ""
        print(f"{name:24s} {e.expected_class:8s} {e.description}{extra}", file=out)
    return 0


def cmd_explain(args, out):
    entry = zoo_get(args.manifold)
    if args.jet_order < 3:
        raise _UsageError("--jet-order must be at least 3")
    if args.point is None:
        from .verifier import sample_points

        point = sample_points(entry, 1, _seed(args) or 0)[0]
    else:
        point = args.point
        if len(point) != entry.dim:
            raise _UsageError(f"{entry.name} needs {entry.dim} coordinates")
    ctx = PointContext(entry, point, args.jet_order)
    ch = ctx.charges
    print(f"# {entry.name} at x = {np.array2string(point, precision=6)}", file=out)
    blocks = [("Q", ch.Q)]
    blocks += [(f"S{a + 1}", s) for a, s in enumerate(ch.S)]
    blocks += [(f"F{a + 1}", f) for a, f in enumerate(ch.F)]
    blocks.append(("H", ch.H))
    for name, el in blocks:
        print(f"\n[{name}]", file=out)
        print(el.to_text(tol=1e-14), file=out)
    return 0


COMMANDS = {"verify": cmd_verify, "classify": cmd_classify, "zoo": cmd_zoo, "explain": cmd_explain}


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (ParseError, UnknownEntry, ValueError, OSError, HKTError) as exc:
        print(f"hktsusy: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
