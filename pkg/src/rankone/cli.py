"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 mathematical infeasibility, 3 numerical
failure (including a failed verification). Results go to ``--out`` when given,
otherwise to stdout; diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from math import fsum
from pathlib import Path

import numpy as np

from . import __version__
from .decomposer import FrameSet, SpectralState, decompose, synthesize_frame, tight_frame
from .errors import Infeasible, InputError, RankOneError
from .feasibility import WeightSequence, check_finite
from .spectral import DEFAULT_TOL, RankOneDecomposition, Tolerances, as_symmetric, eigh, frame_bounds
from .streaming import DEFAULT_CAP, DEFAULT_MAX_WIDTH, WeightStream, identity_blocks, partial_sum

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 1, 2, 3

_DENSE_VERIFY_LIMIT = 4000


@dataclass
class ProblemFile:
    matrix: np.ndarray
    from_eigenvalues: bool
    weights: np.ndarray
    tol: Tolerances

    @classmethod
    def parse(cls, data: dict, tol: Tolerances | None = None, need_weights: bool = True) -> "ProblemFile":
        if not isinstance(data, dict):
            raise InputError("problem file must hold a JSON object")
        if ("matrix" in data) == ("eigenvalues" in data):
            raise InputError("give exactly one of 'matrix' or 'eigenvalues'")
        if need_weights and ("weights" in data) == ("norms" in data):
            raise InputError("give exactly one of 'weights' or 'norms'")
        if "matrix" in data:
            matrix = as_symmetric(data["matrix"])
        else:
            ev = np.asarray(data["eigenvalues"], dtype=float).reshape(-1)
            if ev.size == 0:
                raise InputError("'eigenvalues' is empty")
            matrix = np.diag(ev)
        if "weights" in data:
            weights = WeightSequence.of(data["weights"]).weights
        elif "norms" in data:
            weights = WeightSequence.from_norms(data["norms"]).weights
        else:
            weights = np.zeros(0)
        if tol is None:
            opt = data.get("options", {}).get("tol")
            tol = Tolerances.from_base(float(opt)) if opt is not None else DEFAULT_TOL
        return cls(matrix, "eigenvalues" in data, weights, tol)

    def state(self) -> SpectralState:
        if self.from_eigenvalues:
            return SpectralState.from_diagonal(np.diag(self.matrix), self.tol)
        return SpectralState.from_matrix(self.matrix, self.tol)

    def eigenvalues(self) -> np.ndarray:
        if self.from_eigenvalues:
            return np.diag(self.matrix)
        return eigh(self.matrix, tol=self.tol.rank_rel).eigenvalues


def verification_report(matrix: np.ndarray, weights, vectors, tol: Tolerances = DEFAULT_TOL) -> dict:
    """Recompute every quality measure of a decomposition from its raw terms."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    v = np.asarray(vectors, dtype=float).reshape(len(w), -1)
    if v.shape[1] != matrix.shape[0]:
        raise InputError(f"vectors have dimension {v.shape[1]}, matrix has {matrix.shape[0]}")
    outer = w[:, None, None] * v[:, :, None] * v[:, None, :]
    running = matrix - np.cumsum(outer, axis=0)
    residual = running[-1] if len(w) else matrix
    scale = max(np.linalg.norm(matrix), np.finfo(float).tiny)
    min_eig = min(float(eigh(m).eigenvalues[-1]) for m in [matrix, *running])
    lower, upper = frame_bounds(np.sqrt(w)[:, None] * v, tol=tol.rank_rel)
    tight = upper - lower <= tol.sum_rel * max(upper, 1.0)
    try:
        feasibility = check_finite(eigh(matrix, tol=tol.rank_rel).eigenvalues, w).to_dict()
    except RankOneError as exc:
        feasibility = {"feasible": False, "error": str(exc)}
    return {
        "reconstruction_error": float(np.linalg.norm(residual) / scale),
        "min_intermediate_eigenvalue": min_eig,
        "max_unit_deviation": float(np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))) if len(w) else 0.0,
        "frame_bounds": [lower, upper],
        "tight": bool(tight),
        "frame_bound": float(upper) if tight else None,
        "feasibility": feasibility,
    }


def report_ok(report: dict, matrix: np.ndarray, tol: Tolerances) -> bool:
    top = float(np.max(np.abs(matrix))) if matrix.size else 0.0
    return (
        report["reconstruction_error"] <= tol.sum_rel
        and report["max_unit_deviation"] <= tol.unit
        and report["min_intermediate_eigenvalue"] >= -tol.psd_tol(top)
    )


def _decomposition_json(d: RankOneDecomposition, matrix: np.ndarray, tol: Tolerances) -> dict:
    return {
        "dim": d.dim,
        "weights": d.weights.tolist(),
        "vectors": d.vectors.tolist(),
        "order": d.order.tolist() if d.order is not None else None,
        "matrix": matrix.tolist(),
        "report": verification_report(matrix, d.weights, d.vectors, tol),
    }


def _frame_json(f: FrameSet, matrix: np.ndarray, tol: Tolerances) -> dict:
    d = f.decomposition
    return {
        "dim": d.dim,
        "vectors": f.vectors.tolist(),
        "norms": f.norms.tolist(),
        "order": d.order.tolist() if d.order is not None else None,
        "frame_operator": f.frame_operator.tolist(),
        "bounds": list(f.bounds),
        "matrix": matrix.tolist(),
        "report": verification_report(matrix, d.weights, d.vectors, tol),
    }


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text(encoding="utf-8")
        return json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


class Result:
    """What a command produced: a JSON payload, optional CSV, an exit code."""

    def __init__(self, payload: dict, code: int = EXIT_OK, csv_text: str | None = None):
        self.payload = payload
        self.code = code
        self.csv_text = csv_text


def cmd_feasible(args, tol) -> Result:
    problem = ProblemFile.parse(_load_json(args.input), tol)
    b = problem.eigenvalues()
    report = check_finite(b, problem.weights, problem.tol.sum_tol(float(np.sum(b[b > 0]))))
    return Result(report.to_dict(), EXIT_OK if report.feasible else EXIT_INFEASIBLE)


def cmd_decompose(args, tol) -> Result:
    problem = ProblemFile.parse(_load_json(args.input), tol)
    d = decompose(problem.state(), problem.weights, problem.tol)
    payload = _decomposition_json(d, problem.matrix, problem.tol)
    rows = [[c, *x] for c, x in zip(d.weights.tolist(), d.vectors.tolist())]
    code = EXIT_OK if report_ok(payload["report"], problem.matrix, problem.tol) else EXIT_NUMERICAL
    return Result(payload, code, _csv(["weight"] + [f"x{j}" for j in range(d.dim)], rows))


def cmd_frame(args, tol) -> Result:
    data = _load_json(args.input)
    problem = ProblemFile.parse(data, tol)
    f = synthesize_frame(problem.matrix, np.sqrt(problem.weights), problem.tol)
    payload = _frame_json(f, problem.matrix, problem.tol)
    rows = [[a, *z] for a, z in zip(f.norms.tolist(), f.vectors.tolist())]
    code = EXIT_OK if report_ok(payload["report"], problem.matrix, problem.tol) else EXIT_NUMERICAL
    return Result(payload, code, _csv(["norm"] + [f"z{j}" for j in range(f.vectors.shape[1])], rows))


def cmd_tight(args, tol) -> Result:
    tol = tol or DEFAULT_TOL
    f = tight_frame(args.n, args.norms, tol)
    matrix = f.bounds[0] * np.eye(args.n)
    payload = {"n": args.n, "frame_bound": f.bounds[0], **_frame_json(f, matrix, tol)}
    rows = [[a, *z] for a, z in zip(f.norms.tolist(), f.vectors.tolist())]
    code = EXIT_OK if report_ok(payload["report"], matrix, tol) and payload["report"]["tight"] else EXIT_NUMERICAL
    return Result(payload, code, _csv(["norm"] + [f"z{j}" for j in range(args.n)], rows))


def cmd_verify(args, tol) -> Result:
    data = _load_json(args.input)
    if not isinstance(data, dict) or "weights" not in data or "vectors" not in data:
        raise InputError("decomposition file needs 'weights' and 'vectors'")
    problem = ProblemFile.parse(data, tol, need_weights=False)
    w = np.asarray(data["weights"], dtype=float).reshape(-1)
    v = np.asarray(data["vectors"], dtype=float)
    if v.ndim != 2 or v.shape[0] != w.size:
        raise InputError("need one vector per weight")
    report = verification_report(problem.matrix, w, v, problem.tol)
    return Result(report, EXIT_OK if report_ok(report, problem.matrix, problem.tol) else EXIT_NUMERICAL)


def parse_stream_spec(spec: str, cap: int) -> WeightStream:
    """``const:<value>``, ``ratio`` (``i/(i+1)``), or a file of prefix values."""
    if spec == "ratio":
        return WeightStream.ratio(cap)
    if spec.startswith("const:"):
        try:
            value = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise InputError(f"bad constant stream spec {spec!r}") from exc
        if not 0 < value <= 1:
            raise InputError(f"stream weights must lie in (0, 1], got {value}")
        return WeightStream.constant(value, cap)
    path = Path(spec)
    if not path.exists():
        raise InputError(f"unknown stream spec {spec!r} (expected const:<c>, ratio, or a file)")
    text = path.read_text(encoding="utf-8")
    try:
        values = json.loads(text)
    except json.JSONDecodeError:
        try:
            values = [float(tok) for tok in text.replace(",", " ").split()]
        except ValueError as exc:
            raise InputError(f"cannot parse weight file {spec}: {exc}") from exc
    return WeightStream.from_values(values, cap)


def cmd_stream(args, tol) -> Result:
    tol = tol or DEFAULT_TOL
    if args.blocks < 0:
        raise InputError("--blocks must be nonnegative")
    stream = parse_stream_spec(args.spec, args.cap)
    results = list(identity_blocks(stream, args.blocks, tol, args.max_width))
    blocks, rows = [], []
    index = 0
    for res in results:
        terms = []
        for c, x in res.terms:
            index += 1
            pairs = sorted(x.items())
            terms.append({"index": index, "weight": c, "vector": [[j, v] for j, v in pairs]})
            rows.extend([index, c, j, v] for j, v in pairs)
        blocks.append({**res.plan.to_dict(), "trace_error": abs(res.block.trace - fsum(res.block.weights)), "terms": terms})

    verification = {"blocks": len(results), "passed": True}
    if results:
        n = results[-1].plan.n
        r = results[-1].plan.r
        verification.update(coordinates=n, residual=r)
        if n + 1 <= _DENSE_VERIFY_LIMIT:
            total = partial_sum((t for res in results for t in res.terms), n + 1)
            target = np.eye(n + 1)
            target[n, n] = r
            err = float(np.max(np.abs(total - target)))
            verification.update(max_identity_error=err, passed=err <= 1e-12)
        else:
            verification.update(skipped=f"dense check limited to {_DENSE_VERIFY_LIMIT} coordinates")
        trace_err = max(b["trace_error"] for b in blocks)
        verification["max_trace_error"] = trace_err
        verification["passed"] = verification["passed"] and trace_err <= 1e-12
    payload = {"spec": args.spec, "blocks": blocks, "verification": verification}
    code = EXIT_OK if verification["passed"] else EXIT_NUMERICAL
    return Result(payload, code, _csv(["index", "weight", "coordinate", "value"], rows))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="base relative tolerance (default 1e-9); all tolerances scale with it")
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", default=None, help="write the result here instead of stdout")

    parser = argparse.ArgumentParser(prog="rankone", description="Rank-one decompositions and frames with prescribed norms.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feasible", parents=[common], help="check the partial-sum condition")
    p.add_argument("input", help="problem JSON file, or - for stdin")
    p.set_defaults(func=cmd_feasible)

    p = sub.add_parser("decompose", parents=[common], help="rank-one decomposition with prescribed weights")
    p.add_argument("input")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("frame", parents=[common], help="frame with prescribed frame operator and norms")
    p.add_argument("input")
    p.set_defaults(func=cmd_frame)

    p = sub.add_parser("tight", parents=[common], help="tight frame for R^n with prescribed norms")
    p.add_argument("-n", type=int, required=True, help="dimension")
    p.add_argument("norms", type=float, nargs="+")
    p.set_defaults(func=cmd_tight)

    p = sub.add_parser("verify", parents=[common], help="recheck a decomposition file")
    p.add_argument("input")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stream", parents=[common], help="decompose the identity block by block")
    p.add_argument("spec", help="const:<c>, ratio, or a file of weights")
    p.add_argument("--blocks", type=int, default=3)
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="stream values consumed before giving up")
    p.add_argument("--max-width", type=int, default=DEFAULT_MAX_WIDTH, help="widest block decomposed (memory grows like width^2)")
    p.set_defaults(func=cmd_stream)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format == "csv" and args.command in ("feasible", "verify"):
        print("rankone: csv output is only available for vector-producing commands", file=sys.stderr)
        return EXIT_INPUT
    try:
        tol = Tolerances.from_base(args.tol) if args.tol is not None else None
        result = args.func(args, tol)
    except Infeasible as exc:
        print(f"rankone: {exc}", file=sys.stderr)
        result = Result({"error": "infeasible", "feasibility": exc.report.to_dict()}, exc.exit_code)
    except RankOneError as exc:
        print(f"rankone: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, TypeError, KeyError) as exc:
        print(f"rankone: bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.format == "csv" and result.csv_text is not None:
        text = result.csv_text
    else:
        text = json.dumps(result.payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
