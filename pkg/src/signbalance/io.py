"""File formats: vector CSV, sign files, block summary and diagnostics CSV."""

from __future__ import annotations

import csv
import io
import math
import os
import tempfile
import warnings
from pathlib import Path

import numpy as np


class FormatError(ValueError):
    pass


def fmt(x: float) -> str:
    return f"{x:.17g}"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def vector_header(dim: int) -> list:
    return ["x", "y"] if dim == 2 else [f"x{i}" for i in range(1, dim + 1)]


def read_vectors(path) -> np.ndarray:
    """Parse a vector CSV (header ``x,y`` or ``x1,...,xn``) into an ``(n, d)`` array."""
    try:
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if header in (vector_header(len(header)), [f"x{i}" for i in range(1, len(header) + 1)]):
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore", UserWarning)
                    arr = np.loadtxt(fh, delimiter=",", ndmin=2)
                if arr.shape[1:] == (len(header),) and len(arr) and np.all(np.isfinite(arr)):
                    return arr
    except ValueError:
        pass
    # slow path, for precise line-numbered errors
    return _read_vectors_checked(path)


def _read_vectors_checked(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise FormatError(f"{path}: empty file")
        header = [h.strip() for h in header]
        dim = len(header)
        if header not in (vector_header(dim), [f"x{i}" for i in range(1, dim + 1)]):
            raise FormatError(f"{path}:1: expected header x,y or x1,...,xn, got {','.join(header)}")
        rows = []
        for row in reader:
            lineno = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != dim:
                raise FormatError(f"{path}:{lineno}: expected {dim} values, got {len(row)}")
            try:
                vals = [float(c) for c in row]
            except ValueError:
                raise FormatError(f"{path}:{lineno}: not a number in {','.join(row)!r}") from None
            if not all(math.isfinite(v) for v in vals):
                raise FormatError(f"{path}:{lineno}: non-finite value")
            rows.append(vals)
    if not rows:
        raise FormatError(f"{path}: no vectors")
    return np.array(rows, dtype=float)


def _rows(template: str, columns) -> str:
    return "".join(map(template.__mod__, zip(*columns)))


def vectors_csv(seq) -> str:
    arr = np.asarray(seq, dtype=float)
    d = arr.shape[1]
    header = ",".join(vector_header(d)) + "\n"
    return header + _rows(",".join(["%.17g"] * d) + "\n", arr.T.tolist())


def write_vectors(path, seq) -> None:
    atomic_write_text(path, vectors_csv(seq))


def signs_text(signs) -> str:
    return "".join("+1\n" if s > 0 else "-1\n" for s in signs)


def write_signs(path, signs) -> None:
    try:
        atomic_write_text(path, signs_text(signs))
    except OSError as exc:
        raise OSError(f"cannot write signs to {path}: {exc.strerror}") from exc


def read_signs(path) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            tok = line.strip()
            if not tok:
                continue
            if tok not in ("+1", "-1"):
                raise FormatError(f"{path}:{lineno}: expected +1 or -1, got {tok!r}")
            out.append(1 if tok == "+1" else -1)
    return np.array(out, dtype=np.int64)


def _table(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def diagnostics_csv(signs, trace) -> str:
    """One row per term: ``index,sign,block_level,sx,sy,psum_norm``."""
    sums = trace.sums
    n, d = sums.shape
    coords = ["sx", "sy"] if d == 2 else [f"s{i}" for i in range(1, d + 1)]
    header = ",".join(["index", "sign", "block_level", *coords, "psum_norm"]) + "\n"
    sign_txt = np.where(np.asarray(signs) > 0, "+1", "-1").tolist()
    columns = [range(1, n + 1), sign_txt, trace.levels.tolist(), *sums.T.tolist(), trace.norms.tolist()]
    return header + _rows("%d,%s,%d," + ",".join(["%.17g"] * (d + 1)) + "\n", columns)


def block_summary_csv(report) -> str:
    """``level,count,rounds,residual_norm,bound,ok`` for every block."""
    rows = (
        [r.level, r.count, r.rounds, fmt(r.residual_norm), fmt(r.bound), "ok" if r.ok else "FAIL"]
        for r in report.rows
    )
    return _table(["level", "count", "rounds", "residual_norm", "bound", "ok"], rows)


def boundaries_csv(conv) -> str:
    d = conv.boundary_sums.shape[1]
    coords = ["sx", "sy"] if d == 2 else [f"s{i}" for i in range(1, d + 1)]
    rows = []
    for i, m in enumerate(conv.levels):
        rn, b = conv.residual_norms[i], conv.bounds[i]
        rows.append(
            [m, *(fmt(x) for x in conv.boundary_sums[i + 1]), fmt(rn), fmt(b),
             "ok" if rn < b else "FAIL", fmt(conv.intra_block_max_deviation[i])]
        )
    return _table(["level", *coords, "residual_norm", "bound", "ok", "intra_block_max_deviation"], rows)


def cauchy_csv(conv) -> str:
    rows = (
        [M, fmt(a), fmt(p), "ok" if a <= p else "FAIL"]
        for M, (a, p) in sorted(conv.cauchy.items())
    )
    return _table(["M", "actual", "predicted", "ok"], rows)


def trace_text(reductions) -> str:
    lines = []
    for red in reductions:
        lines.append(f"# block level={red.block_level} terms={red.n_terms}")
        lines.extend(red.trace_lines())
    return "\n".join(lines) + "\n"
