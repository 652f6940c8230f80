"""Convergence diagnostics, a brute-force oracle and comparison baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List

import numpy as np

from .assignment import SignAssignment
from .blocking import BlockPlan

ORACLE_CAP = 24
WITNESS_RTOL = 1e-12
NORMS = ("one", "two", "max")


class AnalysisError(ValueError):
    pass


@dataclass
class PartialSumTrace:
    sums: np.ndarray
    levels: np.ndarray

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.sums, axis=1)

    def __len__(self) -> int:
        return len(self.sums)


@dataclass
class ConvergenceReport:
    levels: List[int]
    boundary_sums: np.ndarray  # row 0 is the sum after the prefix block
    residual_norms: np.ndarray
    bounds: np.ndarray
    intra_block_max_deviation: np.ndarray
    cauchy: Dict[int, tuple]
    alt_norm_finals: Dict[str, float]
    bound_constant: int

    @property
    def blocks_ok(self) -> bool:
        return bool(np.all(self.residual_norms < self.bounds))

    @property
    def cauchy_ok(self) -> bool:
        return all(actual <= predicted for actual, predicted in self.cauchy.values())


def partial_sums(seq, signs, plan: BlockPlan | None = None) -> PartialSumTrace:
    arr = np.asarray(seq, dtype=float)
    s = np.asarray(signs)
    if len(arr) != len(s):
        raise AnalysisError(f"{len(arr)} terms but {len(s)} signs")
    sums = np.cumsum(arr * s[:, None], axis=0)
    levels = plan.level_of_terms() if plan is not None else np.zeros(len(arr), np.int64)
    return PartialSumTrace(sums, levels)


def predicted_modulus(M: int, constant: int = 6) -> float:
    """``sum_{m >= M} constant / (m + 1)**2`` in closed form."""
    if M < 0:
        raise AnalysisError("M must be >= 0")
    head = math.fsum(1.0 / j**2 for j in range(1, M + 1))
    return constant * (math.pi**2 / 6 - head)


def _boundary_points(trace: PartialSumTrace, plan: BlockPlan):
    d = trace.sums.shape[1]
    prefix = plan.prefix
    start = trace.sums[prefix.stop - 1] if prefix.stop else np.zeros(d)
    pts, levels = [start], []
    for b in plan.levels:
        pts.append(trace.sums[b.stop - 1] if b.stop else np.zeros(d))
        levels.append(b.level)
    return np.array(pts), levels


def cauchy_check(trace: PartialSumTrace, plan: BlockPlan, M: int, constant: int = 6):
    """Largest distance between block-boundary sums from level ``M`` on.

    Returns ``(actual, predicted)``. The boundary sums considered are the
    one entering level ``M`` and those closing each block at level ``>= M``.
    """
    pts, levels = _boundary_points(trace, plan)
    if M < 0 or M >= len(levels):
        raise AnalysisError(f"M={M} but only levels 0..{len(levels) - 1} are present")
    tail = pts[M:]
    diff = tail[:, None, :] - tail[None, :, :]
    actual = float(np.sqrt((diff**2).sum(axis=2)).max())
    return actual, predicted_modulus(M, constant)


def alt_norm_trace(trace, norm_id: str) -> np.ndarray:
    sums = trace.sums if isinstance(trace, PartialSumTrace) else np.asarray(trace, dtype=float)
    if norm_id == "one":
        return np.abs(sums).sum(axis=1)
    if norm_id == "two":
        return np.linalg.norm(sums, axis=1)
    if norm_id == "max":
        return np.abs(sums).max(axis=1)
    raise AnalysisError(f"unknown norm {norm_id!r}; expected one of {NORMS}")


def convergence_report(
    seq, signs, plan: BlockPlan, constant: int = 6, max_M: int | None = None
) -> ConvergenceReport:
    arr = np.asarray(seq, dtype=float)
    trace = partial_sums(arr, signs, plan)
    pts, levels = _boundary_points(trace, plan)
    residuals = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    bounds = np.array([constant / (m + 1) ** 2 for m in levels])

    dev = np.zeros(len(levels))
    for i, b in enumerate(plan.levels):
        if b.size:
            dev[i] = np.linalg.norm(trace.sums[b.start:b.stop] - pts[i], axis=1).max()

    top = len(levels) - 1 if max_M is None else min(max_M, len(levels) - 1)
    cauchy = {M: cauchy_check(trace, plan, M, constant) for M in range(1, top + 1)}
    finals = {k: float(alt_norm_trace(trace.sums[-1:], k)[0]) for k in NORMS}
    return ConvergenceReport(levels, pts, residuals, bounds, dev, cauchy, finals, constant)


@dataclass
class OracleResult:
    min_residual_norm: float
    argmin_signs: np.ndarray
    enumerated_count: int


def _subset_sums(terms: np.ndarray) -> np.ndarray:
    # row p holds sum_i s_i * terms[i] with s_i = -1 where bit i of p is set
    out = terms.sum(axis=0, keepdims=True)
    for i, t in enumerate(terms):
        out = np.concatenate([out, out - 2.0 * t])
    return out


def oracle_min_residual(terms, cap: int = ORACLE_CAP) -> OracleResult:
    """Exhaustive search over the ``2**(n-1)`` sign patterns with a leading ``+``.

    Pattern ``p`` puts a minus on term ``i + 1`` when bit ``i`` of ``p`` is
    set; among minimizers the smallest ``p`` wins.
    """
    arr = np.asarray(terms, dtype=float)
    if arr.ndim != 2 or len(arr) == 0:
        raise AnalysisError("oracle needs at least one term")
    n = len(arr)
    if n > cap:
        raise AnalysisError(f"oracle refuses {n} terms (cap {cap}): 2^{n - 1} patterns")
    free = arr[1:]
    lo_bits = min(len(free), 12)
    low = arr[0] + _subset_sums(free[:lo_bits])
    high = _subset_sums(free[lo_bits:])
    best, best_p = math.inf, 0
    for h in range(0, len(high), 256):
        chunk = high[h:h + 256]
        tot = chunk[:, None, :] + low[None, :, :]
        norms = np.sqrt((tot**2).sum(axis=2))
        flat = int(np.argmin(norms))
        val = float(norms.flat[flat])
        if val < best:
            hi, lo = divmod(flat, len(low))
            best, best_p = val, ((h + hi) << lo_bits) | lo
    signs = np.ones(n, dtype=np.int64)
    for i in range(n - 1):
        if best_p >> i & 1:
            signs[i + 1] = -1
    return OracleResult(best, signs, 1 << (n - 1))


def greedy_baseline(seq) -> SignAssignment:
    """Pick each sign to keep the running sum shortest; ties go to ``+``."""
    arr = np.asarray(seq, dtype=float)
    if len(arr) == 0:
        raise AnalysisError("empty sequence")
    signs = np.ones(len(arr), dtype=np.int64)
    s = arr[0].copy()
    for i in range(1, len(arr)):
        plus, minus = s + arr[i], s - arr[i]
        if np.dot(minus, minus) < np.dot(plus, plus):
            signs[i] = -1
            s = minus
        else:
            s = plus
    return SignAssignment(signs)


def divergence_witness_check(seq, c: float, rtol: float = WITNESS_RTOL) -> bool:
    """Whether every term has norm at least ``c`` (up to ``rtol``).

    When it holds, consecutive partial sums of any signing are at least
    ``c`` apart, so no signing of the series converges.
    """
    if c <= 0:
        raise AnalysisError("c must be positive")
    arr = np.asarray(seq, dtype=float)
    return bool(np.all(np.linalg.norm(arr, axis=1) >= c * (1.0 - rtol)))
