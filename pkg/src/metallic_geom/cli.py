"""Command-line front end.

Exit codes: 0 pass or report, 1 failed check, 2 parse error, 3 wrong branch
(sign of p^2 + 4q), 4 numeric failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .chart import DegenerateMetricError
from .expr import DomainError, ExprError
from .foliation import IndefiniteError
from .metallic import BranchError
from .report import Report
from .specfile import SpecError, load_manifold, load_text, parse_map

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BRANCH, EXIT_NUMERIC = 0, 1, 2, 3, 4

# commands whose failed rows turn into exit 1; the rest only report
ASSERTING = {"validate", "connections", "norden", "forms", "map"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_PARSE)


def _common(p):
    p.add_argument("--tol", type=float, default=1e-8, help="pass threshold for validate (default 1e-8); other commands use per-row thresholds")
    p.add_argument("--samples", type=int, default=None,
                   help="Halton samples in the spec-file box (default: the file's count, else 50)")
    p.add_argument("--seed", type=int, default=None, help="Halton seed (default: spec seed, else 0)")
    p.add_argument("--output", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="metallic-geom", description="Checks for metallic pseudo-Riemannian structures.")
    ap.add_argument("--version", action="version", version=f"metallic-geom {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("validate", "metallic law, g-symmetry and signature"),
        ("tensors", "N_J, M_J, H_J and the projector identities (real branch)"),
        ("connections", "Schouten-van Kampen, Vranceanu and Vidal connections (real branch)"),
        ("foliate", "integrability and geodesic invariance of D and D' (real branch)"),
        ("norden", "complexified structure and J_c (Norden branch)"),
        ("forms", "conjugated form operators (Norden branch)"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("spec")
        _common(p)
    p = sub.add_parser("chen", help="Chen invariant of the leaves of D at the spec-file points")
    p.add_argument("spec")
    for k in ("a", "b", "c"):
        p.add_argument(f"--{k}", type=float, required=True)
    _common(p)
    p = sub.add_parser("map", help="metallic map between two specs")
    p.add_argument("spec", help="source manifold")
    p.add_argument("target", help="target manifold")
    p.add_argument("mapfile")
    _common(p)
    return ap


def _header(spec, samples, args, **extra) -> dict:
    h = {"n": spec.n, "p": spec.params.p, "q": spec.params.q, "disc": spec.params.disc,
         "samples": len(samples), "seed": args.seed if args.seed is not None else (spec.seed or 0)}
    if args.command == "validate":
        h["tol"] = args.tol
    h.update(extra)
    return h


def run(args) -> Report:
    from . import suites

    spec = load_manifold(args.spec)
    samples = spec.samples(args.samples, args.seed)
    name = os.path.basename(args.spec)
    cmd = args.command
    tol = args.tol
    rep = Report(cmd, name, spec.digest, _header(spec, samples, args))
    if cmd == "validate":
        rep.add(*suites.validate_rows(spec.g, spec.J, spec.params, samples, tol))
    elif cmd == "tensors":
        rep.add(*suites.tensor_rows(spec.g, spec.J, spec.params, samples))
    elif cmd == "connections":
        rep.add(*suites.connection_rows(spec.g, spec.J, spec.params, samples))
    elif cmd == "foliate":
        rep.add(*suites.foliation_rows(spec.g, spec.J, spec.params, samples))
    elif cmd == "chen":
        pts = spec.points or [samples[0]]
        rep.header.update(a=args.a, b=args.b, c=args.c)
        for pt in pts:
            rep.add(*suites.chen_rows(spec.g, spec.J, spec.params, args.a, args.b, args.c, pt))
    elif cmd == "norden":
        rep.add(*suites.norden_rows(spec.g, spec.J, spec.params, samples))
    elif cmd == "forms":
        rep.header["forms"] = len(spec.forms) if spec.forms else "trig basis"
        rep.add(*suites.forms_rows(spec.g, spec.J, spec.params, spec.chart, samples, spec.forms or None))
    elif cmd == "map":
        tgt = load_manifold(args.target)
        text = load_text(args.mapfile)
        phi, map_digest = parse_map(text, spec.chart, tgt.n, args.mapfile)
        rep.header.update(target=os.path.basename(args.target), target_sha256=tgt.digest[:16],
                          map=os.path.basename(args.mapfile), map_sha256=map_digest[:16])
        rep.add(*suites.map_rows(phi, spec, tgt, samples))
    else:  # pragma: no cover - argparse rejects unknown commands
        raise ValueError(cmd)
    rep.exit_code = EXIT_FAIL if cmd in ASSERTING and rep.failed else EXIT_OK
    return rep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = run(args)
    except SpecError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BranchError as exc:
        print(f"wrong branch: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    except (DegenerateMetricError, DomainError, IndefiniteError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ExprError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return EXIT_PARSE
    sys.stdout.write(rep.render(args.output))
    return rep.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
