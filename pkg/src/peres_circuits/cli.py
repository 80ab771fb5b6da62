"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 domain or invariant error, 4 I/O error.
All JSON output has fixed key order and 17-significant-digit floats.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from math import prod
from pathlib import Path

import numpy as np

from . import jsonio
from .circuits import (
    DENSE_CAP,
    Part,
    Target,
    build_moment_circuit,
    circuit_to_dict,
    run_exact,
)
from .errors import DomainError
from .linalg import partial_transpose, power_trace
from .moments import Exact, MomentVector, Shots, Source, measure_plain_moments, measure_pt_moments
from .spectrum import reconstruct
from .states import (
    bell_state,
    load_state,
    product_state,
    random_density,
    state_to_dict,
    werner_state,
)

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def _dims(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    return buf.getvalue()


def _mode(args) -> Exact | Shots:
    if args.mode == "shots":
        if args.seed is None:
            raise UsageError("--seed is required in shots mode")
        return Shots(args.shots, args.seed, args.backend)
    return Exact(args.backend)


def _moments_csv(mv: MomentVector) -> list[list]:
    return [["k", "p", "sigma"]] + [[k, p, s] for k, (p, s) in enumerate(zip(mv.p, mv.sigma), start=1)]


def cmd_gen(args) -> str:
    if args.kind == "bell":
        rho = bell_state()
    elif args.kind == "werner":
        if args.p is None:
            raise UsageError("werner needs --p")
        if not 0 <= args.p <= 1:
            raise UsageError("--p must lie in [0, 1]")
        rho = werner_state(args.p)
    elif args.kind == "product":
        rho = product_state(args.dims, args.seed)
    else:
        rho = random_density(args.dims, args.rank, args.seed)
    return jsonio.dumps(state_to_dict(rho))


def cmd_moments(args) -> str:
    rho = load_state(args.state)
    mode = _mode(args)
    mv = measure_plain_moments(rho, mode) if args.plain else measure_pt_moments(rho, mode)
    if args.format == "csv":
        return _csv(_moments_csv(mv))
    return jsonio.dumps(mv.to_dict())


def _load_moments(path: str) -> MomentVector:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from exc
    return MomentVector.from_dict(obj)


def cmd_spectrum(args) -> str:
    mv = _load_moments(args.moments)
    if mv.source is Source.SHOTS and args.threshold is None and args.seed is None:
        raise UsageError("shot-estimated moments need --seed for the bootstrap threshold")
    rep = reconstruct(mv, args.threshold, seed=args.seed or 0)
    if args.format == "csv":
        return _csv([["index", "eigenvalue"]] + [[i, x] for i, x in enumerate(rep.eigenvalues, start=1)])
    return jsonio.dumps(rep.to_dict())


def cmd_peres(args) -> str:
    rho = load_state(args.state)
    if len(rho.dims) != 2:
        raise DomainError("the Peres test needs a bipartite state")
    mv = measure_pt_moments(rho, _mode(args))
    rep = reconstruct(mv, args.threshold, seed=args.seed or 0)
    if args.format == "csv":
        rows = _moments_csv(mv) + [["index", "eigenvalue"]]
        rows += [[i, x] for i, x in enumerate(rep.eigenvalues, start=1)]
        return _csv(rows)
    return jsonio.dumps(
        {
            "verdict": rep.verdict.value,
            "shape": list(rho.dims),
            "report": rep.to_dict(),
            "moments": mv.to_dict(),
        }
    )


def cmd_export_circuit(args) -> str:
    if args.k < 2:
        raise UsageError(
            "k must be >= 2: no circuit is needed for the first moment, "
            "the partial transpose preserves the trace so it is always 1"
        )
    target = Target.PLAIN if args.plain else Target.PT
    part = Part.IMAGINARY if args.part == "imaginary" else Part.REAL
    return jsonio.dumps(circuit_to_dict(build_moment_circuit(args.k, args.dims, target, part)))


def cmd_verify(args) -> str:
    rho = load_state(args.state)
    n = prod(rho.dims)
    targets = [Target.PLAIN]
    if len(rho.dims) == 2:
        targets.insert(0, Target.PT)
    rows = []
    worst = 0.0
    for target in targets:
        m = partial_transpose(rho.matrix, rho.dims) if target is Target.PT else rho.matrix
        for k in range(2, n + 1):
            c = build_moment_circuit(k, rho.dims, target)
            fits = 2 * n**k <= DENSE_CAP
            value = run_exact(c, rho, "contraction")
            oracle = power_trace(m, k)
            dev = abs(value - oracle)
            row = {
                "target": target.value,
                "k": k,
                "circuit": value.real,
                "circuit_imag": value.imag,
                "oracle": oracle.real,
                "deviation": dev,
                "backends": ["contraction"],
            }
            if fits:
                dense = run_exact(c, rho, "dense")
                row["dense_deviation"] = abs(dense - value)
                row["backends"].append("dense")
                dev = max(dev, abs(dense - oracle))
            worst = max(worst, dev)
            rows.append(row)
    report = {
        "shape": list(rho.dims),
        "tolerance": args.tol,
        "max_deviation": worst,
        "passed": bool(worst <= args.tol),
        "checks": rows,
    }
    args._failed = not report["passed"]
    return jsonio.dumps(report)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="peres-circuits",
        description="Interferometer circuits for partial-transpose moments and the Peres test.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def run_opts(p, with_format=True):
        p.add_argument("--mode", choices=["exact", "shots"], default="exact")
        p.add_argument("--shots", type=int, default=100_000)
        p.add_argument("--seed", type=int)
        p.add_argument("--backend", choices=["auto", "dense", "contraction"], default="auto")
        if with_format:
            p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--out")

    p = sub.add_parser("gen", help="write a state file")
    p.add_argument("kind", choices=["bell", "werner", "product", "random"])
    p.add_argument("--p", type=float, help="Werner mixing weight")
    p.add_argument("--dims", type=_dims, default=(2, 2))
    p.add_argument("--rank", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("moments", help="run a moment campaign on a state file")
    p.add_argument("state")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--pt", action="store_true", help="partial-transpose moments (default)")
    which.add_argument("--plain", action="store_true", help="moments of the state itself")
    run_opts(p)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("spectrum", help="reconstruct a spectrum from a moments file")
    p.add_argument("moments")
    p.add_argument("--threshold", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("peres", help="end-to-end Peres test on a state file")
    p.add_argument("state")
    p.add_argument("--threshold", type=float)
    run_opts(p)
    p.set_defaults(func=cmd_peres)

    p = sub.add_parser("export-circuit", help="write a moment circuit as JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--dims", type=_dims, default=(2, 2))
    which = p.add_mutually_exclusive_group()
    which.add_argument("--pt", action="store_true")
    which.add_argument("--plain", action="store_true")
    p.add_argument("--part", choices=["real", "imaginary"], default="real")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_circuit)

    p = sub.add_parser("verify", help="cross-check circuit moments against the matrix oracle")
    p.add_argument("state")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = args.func(args)
        _emit(text, args.out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_DOMAIN if getattr(args, "_failed", False) else 0


if __name__ == "__main__":
    sys.exit(main())
