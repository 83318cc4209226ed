"""Command-line front end: matrix file ingestion, solvers, trace emission.

Exit codes: 0 converged, 1 usage or input errors, 2 breakdown,
3 iteration limit reached.  Result files are written atomically
(temp-then-rename).  Relative default output paths resolve against
``$ABFLOW_OUT_DIR`` when that variable is set; explicit paths are used
verbatim.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .accel import AccelConfig, modified_ab_run
from .errors import ABFlowError, InvalidSpectrumError, ParseError, ShapeError
from .lab import ProblemSpec, run_experiment
from .linalg import as_matrix
from .pencil import Pencil, SolveStatus, ab_run
from .sqrtm import SqrtProblem, sqrtm_ab
from .trace import atomic_write_text, write_trace_csv, write_trace_json

_EXIT_BY_STATUS = {
    SolveStatus.CONVERGED: 0,
    SolveStatus.BREAKDOWN: 2,
    SolveStatus.MAX_ITERATIONS: 3,
}

OUT_DIR_ENV = "ABFLOW_OUT_DIR"


# ----------------------------- matrix files -----------------------------

def parse_matrix_file(path, fmt: str | None = None) -> np.ndarray:
    """Load a matrix from a txt or json file.

    txt: whitespace-separated real entries, one matrix row per line.
    json: object with "rows", "cols", and "data", a row-major array of
    [re, im] pairs.  When ``fmt`` is None it is inferred from the file
    suffix (".json" means json, anything else txt).
    """
    path = os.fspath(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "txt"
    if fmt not in ("json", "txt"):
        raise ParseError(f"unknown format {fmt!r}", path=path)
    try:
        text = open(path, encoding="utf-8").read()
    except OSError as exc:
        raise ParseError(str(exc), path=path) from exc
    if fmt == "txt":
        return _parse_txt(text, path)
    return _parse_json(text, path)


def _parse_txt(text: str, path: str) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        row = []
        for offset, tok in enumerate(tokens):
            try:
                row.append(float(tok))
            except ValueError as exc:
                raise ParseError(f"bad entry {tok!r}", path=path,
                                 line=lineno, offset=offset) from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ShapeError(
                f"row has {len(row)} entries, expected {width}",
                path=path, line=lineno)
        rows.append(row)
    if not rows:
        raise ParseError("file contains no matrix rows", path=path)
    return np.asarray(rows, dtype=np.complex128)


def _parse_json(text: str, path: str) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, path=path, line=exc.lineno,
                         offset=exc.colno) from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object", path=path)
    try:
        rows, cols, data = doc["rows"], doc["cols"], doc["data"]
    except KeyError as exc:
        raise ParseError(f"missing key {exc.args[0]!r}", path=path) from exc
    if not (isinstance(rows, int) and isinstance(cols, int)
            and rows > 0 and cols > 0):
        raise ShapeError(f"bad shape {rows!r} x {cols!r}", path=path)
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ShapeError(
            f"data has {len(data) if isinstance(data, list) else '?'} "
            f"entries, expected {rows * cols}", path=path)
    out = np.empty(rows * cols, dtype=np.complex128)
    for i, pair in enumerate(data):
        if (not isinstance(pair, (list, tuple)) or len(pair) != 2
                or not all(isinstance(v, (int, float)) for v in pair)):
            raise ParseError(f"entry {i} is not a [re, im] pair", path=path)
        out[i] = complex(pair[0], pair[1])
    return out.reshape(rows, cols)


def matrix_to_json(M) -> str:
    """Serialize a matrix to the json wire format (round-trips bit-exactly)."""
    A = as_matrix(M)
    data = [[float(v.real), float(v.imag)] for v in A.ravel()]
    return json.dumps({"rows": A.shape[0], "cols": A.shape[1], "data": data})


def write_matrix_json(M, path) -> None:
    atomic_write_text(path, matrix_to_json(M) + "\n")


# ----------------------------- helpers -----------------------------

def _default_path(name: str) -> str:
    base = os.environ.get(OUT_DIR_ENV, "")
    return os.path.join(base, name) if base else name


def _resolve_out(explicit, default_name: str) -> str:
    return os.fspath(explicit) if explicit is not None else _default_path(default_name)


def _parse_spectrum(text: str):
    values = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            values.append(complex(tok))
        except ValueError as exc:
            raise InvalidSpectrumError(f"bad eigenvalue {tok!r}") from exc
    if not values:
        raise InvalidSpectrumError("spectrum is empty")
    return values


def _parse_orders(text: str):
    try:
        orders = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ValueError(f"bad order list {text!r}") from exc
    if not orders:
        raise ValueError("order list is empty")
    return orders


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ----------------------------- subcommands -----------------------------

def _cmd_sqrt(ns) -> int:
    S = parse_matrix_file(ns.input)
    prob = SqrtProblem(S, gamma=ns.gamma, order=ns.order,
                       tol=ns.tol, kmax=ns.kmax)
    result = sqrtm_ab(prob)
    out = _resolve_out(ns.out, "sqrt_result.json")
    write_matrix_json(result.X, out)
    if ns.trace is not None:
        write_trace_csv(result.trace, ns.trace)
    print(f"status={result.status.value} residual={result.residual:.3e} "
          f"wrote {out}")
    return _EXIT_BY_STATUS[result.status]


def _cmd_pencil(ns) -> int:
    A = parse_matrix_file(ns.a)
    B = parse_matrix_file(ns.b)
    pencil = Pencil(A, B)
    if ns.order is None or ns.order == 1:
        result = ab_run(pencil, ns.tol, ns.kmax, expected_dim=ns.dim)
    else:
        cfg = AccelConfig(order=ns.order, tol=ns.tol, kmax=ns.kmax,
                          expected_dim=ns.dim)
        result = modified_ab_run(pencil, cfg)
    out = _resolve_out(ns.out, "pencil_result.json")
    doc = {
        "status": result.status.value,
        "iterations": result.iterations,
        "residual": result.residual if math.isfinite(result.residual) else None,
        "U": json.loads(matrix_to_json(result.U.basis)),
        "Lambda": json.loads(matrix_to_json(result.Lambda)),
    }
    atomic_write_text(out, json.dumps(doc, indent=2) + "\n")
    print(f"status={result.status.value} dim={result.U.dim} "
          f"residual={result.residual:.3e} wrote {out}")
    return _EXIT_BY_STATUS[result.status]


def _cmd_bench(ns) -> int:
    values = _parse_spectrum(ns.spectrum)
    orders = _parse_orders(ns.orders)
    spec = ProblemSpec(spectrum=tuple(values), cond=ns.cond, seed=ns.seed)
    out_dir = _resolve_out(ns.out_dir, "traces")
    os.makedirs(out_dir, exist_ok=True)
    header_base = {
        "kind": ns.kind,
        "spectrum": [[v.real, v.imag] for v in values],
        "cond": ns.cond,
        "seed": ns.seed,
        "gamma": ns.gamma,
        "tol": ns.tol,
        "kmax": ns.kmax,
    }
    for r in orders:
        trace = run_experiment(ns.kind, spec, order=r, gamma=ns.gamma,
                               tol=ns.tol, kmax=ns.kmax)
        stem = os.path.join(out_dir, f"bench_{ns.kind}_r{r}")
        write_trace_csv(trace, stem + ".csv")
        write_trace_json(trace, stem + ".json",
                         header={**header_base, "order": r})
        print(f"order {r}: status={trace.status} steps={len(trace.steps)} "
              f"wrote {stem}.csv")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="abflow",
                description="Stable deflating subspaces of matrix pencils "
                            "and principal matrix square roots.")
    sub = p.add_subparsers(dest="cmd", required=True)

    sq = sub.add_parser("sqrt", help="Compute the principal square root "
                                     "of the matrix in --input.")
    sq.add_argument("--input", required=True, help="Matrix file (txt or json).")
    sq.add_argument("--order", type=int, default=2,
                    help="Convergence order r >= 2 (default 2, Newton-equivalent).")
    sq.add_argument("--gamma", type=float, default=1.0,
                    help="Positive shift for the initial iterate (default 1).")
    sq.add_argument("--tol", type=float, default=1e-12)
    sq.add_argument("--kmax", type=int, default=100)
    sq.add_argument("--out", help="Output json for the root "
                                  "(default sqrt_result.json).")
    sq.add_argument("--trace", help="Optional CSV convergence trace.")

    pc = sub.add_parser("pencil", help="Compute the stable deflating "
                                       "subspace of A - lambda B.")
    pc.add_argument("--a", required=True, help="Matrix file for A.")
    pc.add_argument("--b", required=True, help="Matrix file for B.")
    pc.add_argument("--tol", type=float, default=1e-12)
    pc.add_argument("--kmax", type=int, default=100)
    pc.add_argument("--dim", type=int, help="Known subspace dimension.")
    pc.add_argument("--order", type=int,
                    help="Acceleration order; omit or 1 for the plain chain.")
    pc.add_argument("--out", help="Output json with U, Lambda, residual "
                                  "(default pencil_result.json).")

    be = sub.add_parser("bench", help="Run convergence experiments and "
                                      "emit one trace per order.")
    be.add_argument("--kind", choices=("sqrt", "pencil"), required=True)
    be.add_argument("--spectrum", required=True,
                    help="Comma-separated eigenvalues, e.g. '2,3' or '0.5,2+1j'.")
    be.add_argument("--orders", default="2",
                    help="Comma-separated orders; 1 means the plain chain.")
    be.add_argument("--seed", type=int, default=0)
    be.add_argument("--cond", type=float, default=10.0,
                    help="Condition number of the similarity transform.")
    be.add_argument("--gamma", type=float, default=1.0)
    be.add_argument("--tol", type=float, default=1e-12)
    be.add_argument("--kmax", type=int, default=40)
    be.add_argument("--out-dir", help="Trace directory (default traces/).")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.cmd == "sqrt":
            return _cmd_sqrt(ns)
        if ns.cmd == "pencil":
            return _cmd_pencil(ns)
        return _cmd_bench(ns)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, ABFlowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
