"""Iterated same-region pairing of a block down to a few residual nodes.

Each round classifies every live node by the region of its current value,
pairs nodes within a region and replaces each pair ``(u, v)`` by ``u - v``.
Because paired vectors subtend less than 60 degrees the difference is no
longer than the longer input, so every node keeps the block's norm bound.
Once at most ``stop_at`` nodes remain their plain sum is the block residual,
and walking the tree of differences back down yields one sign per term.

Nodes live in flat arrays: leaf ``i`` is block term ``i`` and difference
nodes are numbered from ``len(block)`` upwards in creation order, so a
parent always has a larger id than its children.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple

import numpy as np

from .geometry import SECTOR_COUNT, SHRINK_RTOL, sector_indices

RegionFn = Callable[[np.ndarray], np.ndarray]
POLICIES = ("ordered", "random")


class ReductionError(RuntimeError):
    """Internal invariant violated while reducing a block."""


@dataclass(frozen=True)
class ReductionNode:
    id: int
    value: np.ndarray
    term_index: int = -1  # 1-based block position for leaves
    left: int = -1
    right: int = -1

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass(frozen=True)
class ReductionLayer:
    round_i: int
    node_ids: np.ndarray  # nonzero nodes alive after this round


@dataclass
class BlockReduction:
    block_level: int
    n_terms: int
    values: np.ndarray
    left: np.ndarray
    right: np.ndarray
    round_of: np.ndarray
    layers: List[ReductionLayer] = field(default_factory=list)
    residual_ids: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    zero_ids: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    residual_sum: np.ndarray = None
    stop_at: int = SECTOR_COUNT

    @property
    def rounds(self) -> int:
        return len(self.layers)

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual_sum))

    def node(self, i: int) -> ReductionNode:
        if self.left[i] < 0:
            return ReductionNode(i, self.values[i], term_index=i + 1)
        return ReductionNode(i, self.values[i], left=int(self.left[i]), right=int(self.right[i]))

    def trace_lines(self) -> List[str]:
        """``round=<i> id=<n> left=<id> right=<id> value=<coords>`` per diff node."""
        out = []
        for i in range(self.n_terms, len(self.values)):
            coords = " ".join(f"{x:.17g}" for x in self.values[i])
            out.append(
                f"round={self.round_of[i]} id={i} left={self.left[i]} "
                f"right={self.right[i]} value={coords}"
            )
        return out


def pair_layer(
    regions: np.ndarray,
    keys: np.ndarray,
    policy: str = "ordered",
    rng: np.random.Generator | None = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """Pair positions that share a region.

    ``regions`` and ``keys`` (the smallest term index under each node) are
    aligned arrays. Returns ``(pairs, leftovers)`` where ``pairs`` is a
    ``(p, 2)`` array of positions oriented so the smaller key comes first,
    and at most one leftover is left per region.
    """
    regions = np.asarray(regions)
    keys = np.asarray(keys)
    if policy == "ordered":
        order = np.lexsort((keys, regions))
    elif policy == "random":
        if rng is None:
            raise ValueError("random pairing needs an rng")
        order = np.lexsort((rng.random(len(regions)), regions))
    else:
        raise ValueError(f"unknown pairing policy {policy!r}")
    r = regions[order]
    n = len(r)
    starts = np.flatnonzero(np.r_[True, r[1:] != r[:-1]]) if n else np.empty(0, np.int64)
    run_start = np.repeat(starts, np.diff(np.r_[starts, n]))
    rank = np.arange(n) - run_start
    has_next = np.r_[r[1:] == r[:-1], False]
    first = (rank % 2 == 0) & has_next
    a = order[first]
    b = order[np.flatnonzero(first) + 1]
    swap = keys[a] > keys[b]
    pairs = np.column_stack([np.where(swap, b, a), np.where(swap, a, b)])
    paired = np.zeros(n, dtype=bool)
    paired[pairs.ravel()] = True
    leftovers = np.flatnonzero(~paired)
    return pairs.astype(np.int64), leftovers


def reduce_block(
    block_terms,
    region_fn: RegionFn = sector_indices,
    policy: str = "ordered",
    seed: int = 0,
    stop_at: int = SECTOR_COUNT,
    level: int = 0,
) -> BlockReduction:
    terms = np.asarray(block_terms, dtype=float)
    if terms.ndim != 2:
        raise ValueError(f"block terms must be an (n, d) array, got shape {terms.shape}")
    if policy not in POLICIES:
        raise ValueError(f"unknown pairing policy {policy!r}")
    n, d = terms.shape
    rng = np.random.default_rng([seed, level + 1]) if policy == "random" else None

    cap = max(2 * n, 1)
    values = np.empty((cap, d))
    values[:n] = terms
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    round_of = np.zeros(cap, dtype=np.int64)
    minleaf = np.arange(cap, dtype=np.int64)
    nnodes = n

    nonzero = np.any(terms != 0.0, axis=1)
    alive = np.flatnonzero(nonzero)
    zeros = [np.flatnonzero(~nonzero)]
    layers = []

    while len(alive) > stop_at:
        rnd = len(layers) + 1
        av = values[alive]
        pairs, rest = pair_layer(region_fn(av), minleaf[alive], policy, rng)
        if len(pairs) == 0:
            raise ReductionError(
                f"no pairable nodes among {len(alive)} (> {stop_at}) in round {rnd}"
            )
        u, v = alive[pairs[:, 0]], alive[pairs[:, 1]]
        new = np.arange(nnodes, nnodes + len(u))
        diff = values[u] - values[v]
        dn = np.linalg.norm(diff, axis=1)
        limit = np.maximum(np.linalg.norm(values[u], axis=1), np.linalg.norm(values[v], axis=1))
        bad = dn > limit * (1.0 + SHRINK_RTOL)
        if np.any(bad):
            j = int(np.flatnonzero(bad)[0])
            raise ReductionError(
                f"difference grew in round {rnd}: |u-v|={dn[j]!r} > {limit[j]!r}; "
                "the region function does not keep pairs within 60 degrees"
            )
        values[new] = diff
        left[new], right[new] = u, v
        round_of[new] = rnd
        minleaf[new] = minleaf[u]
        nnodes += len(u)

        zero_new = dn == 0.0
        zeros.append(new[zero_new])
        merged = np.concatenate([new[~zero_new], alive[rest]])
        alive = merged[np.argsort(minleaf[merged], kind="stable")]
        layers.append(ReductionLayer(rnd, alive.copy()))

    values = values[:nnodes]
    res = BlockReduction(
        block_level=level,
        n_terms=n,
        values=values,
        left=left[:nnodes],
        right=right[:nnodes],
        round_of=round_of[:nnodes],
        layers=layers,
        residual_ids=alive,
        zero_ids=np.concatenate(zeros).astype(np.int64),
        residual_sum=values[alive].sum(axis=0) if len(alive) else np.zeros(d),
        stop_at=stop_at,
    )
    return res


def recover_signs(reduction: BlockReduction) -> np.ndarray:
    """Propagate ``+1`` from every root down the difference tree.

    A difference node with sign ``s`` hands ``s`` to its left child and
    ``-s`` to its right child. Zero terms and zero-valued subtrees are roots
    too, so they also start from ``+1``.
    """
    r = reduction
    sign = np.zeros(len(r.values), dtype=np.int64)
    sign[r.residual_ids] = 1
    sign[r.zero_ids] = 1
    for rnd in range(r.rounds, 0, -1):
        ids = np.flatnonzero(r.round_of == rnd)
        ids = ids[ids >= r.n_terms]
        s = sign[ids]
        if np.any(s == 0):
            raise ReductionError(f"orphan node {int(ids[s == 0][0])} in round {rnd}")
        sign[r.left[ids]] = s
        sign[r.right[ids]] = -s
    leaf = sign[: r.n_terms]
    if np.any(leaf == 0):
        raise ReductionError(f"term {int(np.flatnonzero(leaf == 0)[0]) + 1} received no sign")
    return leaf.copy()


def replay_signs(block_terms, signs: Sequence[int]) -> np.ndarray:
    terms = np.asarray(block_terms, dtype=float)
    s = np.asarray(signs, dtype=float)
    if len(terms) != len(s):
        raise ValueError(f"{len(terms)} terms but {len(s)} signs")
    if len(terms) == 0:
        return np.zeros(terms.shape[1] if terms.ndim == 2 else 0)
    return s @ terms
