"""Threshold indices and the block partition of a finite sequence.

``N_k`` is the number of leading terms that must be skipped before every
remaining term has norm below ``1/(k+1)**2``. The prefix block holds terms
``1..N_0`` and level ``m`` holds ``N_m+1..N_{m+1}``; the last block runs to
the end of the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

PREFIX_LEVEL = -1


class BlockingError(ValueError):
    pass


def level_threshold(k: int) -> float:
    """Norm bound carried by level ``k``."""
    return 1.0 / (k + 1) ** 2


@dataclass(frozen=True)
class BlockThresholds:
    thresholds: tuple
    sequence_length: int

    def __getitem__(self, k: int) -> int:
        return self.thresholds[k]

    def __len__(self) -> int:
        return len(self.thresholds)


@dataclass(frozen=True)
class Block:
    level: int
    start: int  # 0-based, inclusive
    stop: int  # 0-based, exclusive

    @property
    def size(self) -> int:
        return self.stop - self.start

    @property
    def term_indices(self) -> range:
        """1-based indices of the terms in this block."""
        return range(self.start + 1, self.stop + 1)


@dataclass(frozen=True)
class BlockPlan:
    thresholds: BlockThresholds
    blocks: List[Block]

    @property
    def prefix(self) -> Block:
        return self.blocks[0]

    @property
    def levels(self) -> List[Block]:
        return self.blocks[1:]

    def level_of_terms(self) -> np.ndarray:
        """Block level of every term, in input order."""
        out = np.empty(self.thresholds.sequence_length, dtype=np.int64)
        for b in self.blocks:
            out[b.start:b.stop] = b.level
        return out


def compute_thresholds(norms, max_k: int = 64) -> BlockThresholds:
    """``N_k`` for ``k = 0..max_k`` over a finite list of norms.

    Stops early once some ``N_k`` equals the sequence length, since every
    later threshold is then equal to it as well.
    """
    norms = np.asarray(norms, dtype=float)
    if norms.ndim != 1:
        raise BlockingError("norms must be a flat list")
    if max_k < 0:
        raise BlockingError("max_k must be >= 0")
    if np.any(np.isnan(norms)) or np.any(norms < 0):
        raise BlockingError("norms must be non-negative")
    n = len(norms)
    # tail_max[i] = max(norms[i:]); non-increasing, so N_k is a count
    tail_max = np.maximum.accumulate(norms[::-1])[::-1]
    out = []
    for k in range(max_k + 1):
        t = level_threshold(k)
        nk = int(np.count_nonzero(tail_max >= t))
        out.append(nk)
        if nk == n:
            break
    return BlockThresholds(tuple(out), n)


def partition_blocks(seq, thresholds: BlockThresholds) -> BlockPlan:
    """Split ``seq`` into the prefix block and one block per level."""
    n = len(seq)
    if n != thresholds.sequence_length:
        raise BlockingError(
            f"thresholds cover {thresholds.sequence_length} terms, sequence has {n}"
        )
    t = thresholds.thresholds
    blocks = [Block(PREFIX_LEVEL, 0, t[0])]
    for m in range(len(t) - 1):
        blocks.append(Block(m, t[m], t[m + 1]))
    if t[-1] < n:
        blocks.append(Block(len(t) - 1, t[-1], n))
    return BlockPlan(thresholds, blocks)


def plan_blocks(seq, max_k: int = 64) -> BlockPlan:
    arr = np.asarray(seq, dtype=float)
    norms = np.linalg.norm(arr, axis=1) if arr.ndim == 2 else np.abs(arr)
    return partition_blocks(arr, compute_thresholds(norms, max_k))
