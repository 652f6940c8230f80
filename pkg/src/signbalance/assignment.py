"""Global sign assignment: block plan, per-block reduction, certified bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .blocking import PREFIX_LEVEL, BlockPlan, plan_blocks
from .geometry import SECTOR_COUNT, ConeCover, sector_indices
from .reduction import BlockReduction, recover_signs, reduce_block, replay_signs


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AssignConfig:
    policy: str = "ordered"
    seed: int = 0
    max_k: int = 64
    cover: Optional[ConeCover] = None
    keep_reductions: bool = False


@dataclass(frozen=True)
class SignAssignment:
    signs: np.ndarray

    def __post_init__(self):
        if len(self.signs) and self.signs[0] != 1:
            raise ValueError("the leading sign of an assignment is always +1")

    def __len__(self) -> int:
        return len(self.signs)


@dataclass
class BlockRow:
    level: int
    start: int
    stop: int
    rounds: int
    residual: np.ndarray
    bound: float

    @property
    def count(self) -> int:
        return self.stop - self.start

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual))

    @property
    def ok(self) -> bool:
        # the prefix block carries no bound
        return self.level == PREFIX_LEVEL or self.residual_norm < self.bound


@dataclass
class AssignmentReport:
    rows: List[BlockRow]
    bound_constant: int
    plan: BlockPlan
    reductions: List[BlockReduction] = field(default_factory=list)

    @property
    def level_rows(self) -> List[BlockRow]:
        return [r for r in self.rows if r.level != PREFIX_LEVEL]

    @property
    def tail_bound(self) -> float:
        return sum(r.bound for r in self.level_rows)


def level_bound(constant: int, m: int) -> float:
    return constant / (m + 1) ** 2


def _region_setup(dim: int, cover: Optional[ConeCover]):
    if cover is None:
        if dim != 2:
            raise ConfigError(f"dimension {dim} needs a verified cone cover")
        return sector_indices, SECTOR_COUNT
    if cover.dim != dim:
        raise ConfigError(f"cover is for dimension {cover.dim}, input has {dim}")
    if cover.verified_radius is None:
        raise ConfigError("cone cover has not been verified")
    if cover.verified_radius > math.pi / 6 + 1e-9:
        raise ConfigError(
            f"cover radius {math.degrees(cover.verified_radius):.3f} deg exceeds 30 deg"
        )
    return cover.region_indices, cover.size


def assign_signs(seq, config: AssignConfig = AssignConfig()):
    """Compute signs for ``seq`` and a per-block certification report.

    Returns ``(SignAssignment, AssignmentReport)``.
    """
    arr = np.asarray(seq, dtype=float)
    if arr.ndim != 2 or len(arr) == 0:
        raise ValueError(f"expected a non-empty (n, d) array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence has non-finite components")
    region_fn, constant = _region_setup(arr.shape[1], config.cover)

    plan = plan_blocks(arr, config.max_k)
    signs = np.ones(len(arr), dtype=np.int64)
    rows, kept = [], []
    for b in plan.blocks:
        terms = arr[b.start:b.stop]
        red = reduce_block(terms, region_fn, config.policy, config.seed, constant, b.level)
        signs[b.start:b.stop] = recover_signs(red)
        bound = math.inf if b.level == PREFIX_LEVEL else level_bound(constant, b.level)
        rows.append(BlockRow(b.level, b.start, b.stop, red.rounds, red.residual_sum, bound))
        if config.keep_reductions:
            kept.append(red)

    if signs[0] == -1:
        # flipping the whole first non-empty block negates its residual only
        first = next(r for r in rows if r.count)
        signs[first.start:first.stop] *= -1
        first.residual = -first.residual

    return SignAssignment(signs), AssignmentReport(rows, constant, plan, kept)


def certify(report: AssignmentReport) -> bool:
    """True iff every level block residual is strictly below its bound."""
    return all(r.ok for r in report.level_rows)


def recheck(seq, signs, report: AssignmentReport, rtol: float = 1e-9) -> bool:
    """Recompute each block sum straight from the signs and compare residuals."""
    arr = np.asarray(seq, dtype=float)
    for r in report.rows:
        got = replay_signs(arr[r.start:r.stop], signs[r.start:r.stop])
        scale = max(r.residual_norm, float(np.linalg.norm(arr[r.start:r.stop], axis=1).max(initial=0.0)))
        if np.linalg.norm(got - r.residual) > rtol * max(scale, 1e-300):
            return False
    return True
