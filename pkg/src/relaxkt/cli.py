"""Command-line front end.

Subcommands:

* ``solve``: load or generate a system, run a chosen method, emit a
  history CSV, a summary JSON, the compatibility factor, and a figure.
* ``rate``: spectral rate report for (A, u).
* ``check``: run the invariant suite against one instance.
* ``gen``: write a generated problem to files.

Exit codes: 0 on success (including a run that stops at the iteration
cap), 2 when a run diverges, 1 on usage or I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from .analysis import assemble_Q, restricted_rate, run_invariant_suite
from .errors import RelaxKTError
from .kaczmarz import RelaxationSchedule
from .linalg import MatrixHandle
from .mmio import read_matrix, read_vector, write_matrix, write_vector
from .problems import ProblemSpec, generate
from .tanabe import SolveConfig, build_C_algorithm1, solve

METHODS = ("kaczmarz", "relaxed-kaczmarz", "kt", "relaxed-kt")
UNIT_METHODS = ("kaczmarz", "kt")


class _UsageError(Exception):
    """Bad flag combination or malformed mini-language value."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # diverged runs here, so route usage problems to exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def parse_relax(text: str, m: int) -> RelaxationSchedule:
    """Relaxation mini-language: scalar, comma list of m values, or
    random:lo,hi,seed=s."""
    text = text.strip()
    if text.startswith("random:"):
        body = text[len("random:"):]
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 3 or not parts[2].startswith("seed="):
            raise _UsageError(
                f"--relax random form is random:lo,hi,seed=s, got {text!r}")
        try:
            lo, hi = float(parts[0]), float(parts[1])
            seed = int(parts[2][len("seed="):])
        except ValueError as exc:
            raise _UsageError(f"bad --relax value {text!r}: {exc}") from exc
        return RelaxationSchedule.random(m, lo, hi, seed)
    try:
        if "," in text:
            values = [float(p) for p in text.split(",")]
            if len(values) != m:
                raise _UsageError(
                    f"--relax lists one value per row: got {len(values)}, "
                    f"need {m}")
            return RelaxationSchedule.per_row(values)
        return RelaxationSchedule.constant(float(text), m)
    except ValueError as exc:
        raise _UsageError(f"bad --relax value {text!r}: {exc}") from exc


def parse_gen(text: str) -> ProblemSpec:
    """Generator mini-language: kind:p1,p2[,key=val...][,seed=s].

    Positional numbers are m,n (grid,rays for tomo). Keys: seed, rank
    (rank_deficient), angle (coherent).
    """
    kind, sep, body = text.partition(":")
    kind = kind.strip()
    positional: list[str] = []
    keyword: dict[str, str] = {}
    if sep:
        for token in body.split(","):
            token = token.strip()
            if not token:
                continue
            if "=" in token:
                key, _, value = token.partition("=")
                keyword[key.strip()] = value.strip()
            else:
                positional.append(token)
    try:
        seed = int(keyword.pop("seed", "0"))
        if len(positional) != 2:
            raise _UsageError(
                f"--gen needs two sizes (m,n or grid,rays for tomo), "
                f"got {text!r}")
        first, second = int(positional[0]), int(positional[1])
        rank = int(keyword.pop("rank")) if "rank" in keyword else None
        angle = float(keyword.pop("angle")) if "angle" in keyword else None
    except ValueError as exc:
        raise _UsageError(f"bad --gen value {text!r}: {exc}") from exc
    if keyword:
        raise _UsageError(f"unknown --gen keys: {', '.join(sorted(keyword))}")
    if kind == "tomo":
        return ProblemSpec(kind="tomo", grid=first, rays=second, seed=seed)
    return ProblemSpec(kind=kind, m=first, n=second, seed=seed,
                       rank=rank, angle=angle)


def _load_problem(ns, need_rhs: bool):
    """Resolve --gen / --matrix / --rhs into (A, b, x_true, source tag)."""
    if ns.gen and ns.matrix:
        raise _UsageError("--gen and --matrix are mutually exclusive")
    if ns.gen:
        spec = parse_gen(ns.gen)
        A, b, x_true = generate(spec)
        return A, b, x_true, f"gen:{ns.gen}"
    if not ns.matrix:
        raise _UsageError("need a problem: --matrix PATH or --gen SPEC")
    A = read_matrix(ns.matrix)
    b = None
    if ns.rhs:
        b = read_vector(ns.rhs, A.rows)
    elif need_rhs:
        raise _UsageError("--rhs is required with --matrix here")
    x_true = None
    if getattr(ns, "xtrue", None):
        x_true = read_vector(ns.xtrue, A.cols)
    return A, b, x_true, f"matrix:{ns.matrix}"


def _schedule_for(ns, m: int) -> RelaxationSchedule:
    if ns.method in UNIT_METHODS:
        if ns.relax is not None:
            try:
                value = float(ns.relax)
            except ValueError:
                value = None
            if value != 1.0:
                raise _UsageError(
                    f"--method {ns.method} fixes mu at 1; use relaxed-"
                    f"{'kaczmarz' if ns.method == 'kaczmarz' else 'kt'} "
                    f"for other --relax values")
        return RelaxationSchedule.constant(1.0, m)
    return parse_relax(ns.relax if ns.relax is not None else "1.0", m)


def _warn_regime(u: RelaxationSchedule) -> None:
    if u.warning:
        print("warning: some relaxation values lie outside (0, 2); "
              "convergence is not guaranteed there", file=sys.stderr)


def _write_history(path, run) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iter", "rel_residual", "abs_error", "elapsed_ms"])
        for k in range(run.residuals.shape[0]):
            err = repr(float(run.errors[k])) if run.errors is not None else ""
            writer.writerow([k, repr(float(run.residuals[k])), err,
                             repr(float(run.times_ms[k]))])


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _cmd_solve(ns) -> int:
    A, b, x_true, source = _load_problem(ns, need_rhs=True)
    m, n = A.shape
    u = _schedule_for(ns, m)
    _warn_regime(u)
    engine = ("row_action" if ns.method in ("kaczmarz", "relaxed-kaczmarz")
              else "standard_form")
    x0 = None
    if ns.x0 and ns.x0 != "zero":
        x0 = read_vector(ns.x0, n)
    cfg = SolveConfig(x0=x0, tol=ns.tol, max_iters=ns.max_iters,
                      engine=engine, reference=x_true)
    run = solve(A, b, u, cfg)

    final_res = float(run.residuals[-1])
    print(f"{ns.method} on {source} ({m}x{n}): {run.termination} "
          f"after {run.iterations} iterations, rel residual {final_res:.6e}")
    if run.errors is not None:
        print(f"final error vs reference: {float(run.errors[-1]):.6e}")

    if ns.history:
        _write_history(ns.history, run)
        print(f"history written to {ns.history}")
    if ns.summary:
        summary = {
            "command": "solve",
            "config": {
                "method": ns.method,
                "engine": engine,
                "relax": ns.relax,
                "mu": [float(v) for v in u.mu],
                "tol": ns.tol,
                "max_iters": ns.max_iters,
                "source": source,
                "x0": ns.x0 or "zero",
            },
            "problem": {"m": m, "n": n},
            "outcome": {
                "converged": run.converged,
                "termination": run.termination,
                "iterations": run.iterations,
                "final_rel_residual": final_res,
                "final_abs_error": (float(run.errors[-1])
                                    if run.errors is not None else None),
                "schedule_warning": run.schedule_warning,
            },
        }
        _write_json(ns.summary, summary)
        print(f"summary written to {ns.summary}")
    if ns.export_c:
        C = run.C if run.C is not None else build_C_algorithm1(A, u)
        write_matrix(ns.export_c, MatrixHandle(C.to_dense()))
        print(f"compatibility factor written to {ns.export_c}")
    if ns.plot:
        from .plots import plot_convergence
        plot_convergence(run.residuals, run.errors, path=ns.plot,
                         title=f"{ns.method} on {source}")
        print(f"figure written to {ns.plot}")
    return 2 if run.termination == "diverged" else 0


def _cmd_rate(ns) -> int:
    A, _, _, source = _load_problem(ns, need_rhs=False)
    u = parse_relax(ns.relax if ns.relax is not None else "1.0", A.rows)
    _warn_regime(u)
    Q = assemble_Q(A, u, method="identity")
    report = restricted_rate(Q, A, bound_k=ns.bound_k)
    print(f"rate for {source} ({A.rows}x{A.cols}): "
          f"sigma_max_restricted = {report.sigma_max_restricted:.12g}")
    if ns.summary:
        _write_json(ns.summary, report.to_json())
        print(f"report written to {ns.summary}")
    if ns.plot:
        from .plots import plot_spectrum
        plot_spectrum(report, path=ns.plot,
                      title=f"Restricted spectrum, {source}")
        print(f"figure written to {ns.plot}")
    return 0


def _cmd_check(ns) -> int:
    A, b, _, source = _load_problem(ns, need_rhs=True)
    u = parse_relax(ns.relax if ns.relax is not None else "1.0", A.rows)
    _warn_regime(u)
    report = run_invariant_suite(A, b, u, trials=ns.trials)
    print(f"invariant suite on {source} ({A.rows}x{A.cols}):")
    for line in report.lines():
        print(line)
    if ns.summary:
        _write_json(ns.summary, report.to_json())
        print(f"report written to {ns.summary}")
    if report.passed:
        print("all checks passed")
        return 0
    print("some checks FAILED", file=sys.stderr)
    return 1


def _cmd_gen(ns) -> int:
    spec = parse_gen(ns.gen)
    A, b, x_true = generate(spec)
    matrix_path = f"{ns.out}_A.mtx"
    rhs_path = f"{ns.out}_b.txt"
    xtrue_path = f"{ns.out}_xtrue.txt"
    write_matrix(matrix_path, A)
    write_vector(rhs_path, b)
    write_vector(xtrue_path, x_true)
    print(f"{spec.kind} problem ({A.rows}x{A.cols}) written to "
          f"{matrix_path}, {rhs_path}, {xtrue_path}")
    return 0


def _add_source_flags(p, with_xtrue: bool) -> None:
    p.add_argument("--matrix", help="system matrix, MatrixMarket file")
    p.add_argument("--rhs", help="right-hand side, one value per line")
    p.add_argument("--gen", help="generate a problem: kind:m,n[,key=val,...]"
                               " (tomo: tomo:grid,rays[,seed=s])")
    if with_xtrue:
        p.add_argument("--xtrue", help="reference solution for error tracking")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="relaxkt",
                     description="Row-action solvers for consistent linear "
                                 "systems, with spectral rate analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run a solver")
    _add_source_flags(p_solve, with_xtrue=True)
    p_solve.add_argument("--method", choices=METHODS, default="relaxed-kt")
    p_solve.add_argument("--relax", help="mu: scalar, comma list, or "
                                         "random:lo,hi,seed=s")
    p_solve.add_argument("--x0", default="zero",
                         help="'zero' or a vector file path")
    p_solve.add_argument("--tol", type=float, default=1e-8)
    p_solve.add_argument("--max-iters", type=int, default=10000)
    p_solve.add_argument("--history", help="per-iteration CSV output path")
    p_solve.add_argument("--summary", help="summary JSON output path")
    p_solve.add_argument("--export-c", help="write C(u) as MatrixMarket")
    p_solve.add_argument("--plot", help="write a convergence figure (png)")
    p_solve.set_defaults(func=_cmd_solve)

    p_rate = sub.add_parser("rate", help="spectral rate report")
    _add_source_flags(p_rate, with_xtrue=False)
    p_rate.add_argument("--relax")
    p_rate.add_argument("--bound-k", type=int, default=50,
                        help="length of the predicted bound curve")
    p_rate.add_argument("--summary", help="report JSON output path")
    p_rate.add_argument("--plot", help="write a spectrum figure (png)")
    p_rate.set_defaults(func=_cmd_rate)

    p_check = sub.add_parser("check", help="run the invariant suite")
    _add_source_flags(p_check, with_xtrue=False)
    p_check.add_argument("--relax")
    p_check.add_argument("--trials", type=int, default=100)
    p_check.add_argument("--summary", help="report JSON output path")
    p_check.set_defaults(func=_cmd_check)

    p_gen = sub.add_parser("gen", help="generate a problem to files")
    p_gen.add_argument("--gen", required=True,
                       help="kind:m,n[,key=val,...] (tomo: tomo:grid,rays)")
    p_gen.add_argument("--out", required=True, help="output path prefix")
    p_gen.set_defaults(func=_cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except _UsageError as exc:
        print(f"relaxkt: error: {exc}", file=sys.stderr)
        return 1
    except RelaxKTError as exc:
        print(f"relaxkt: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        name = getattr(exc, "filename", None)
        where = f" ({name})" if name else ""
        print(f"relaxkt: i/o error{where}: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
