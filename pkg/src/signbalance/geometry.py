"""Angular partitions of the plane and of R^n.

The plane is split into six half-open 60 degree sectors
``[k*60, (k+1)*60)`` measured counterclockwise from the positive x-axis.
Two nonzero vectors in the same sector subtend strictly less than 60
degrees, so their difference is no longer than the longer of the two.

For R^n the same role is played by a :class:`ConeCover`: a finite set of
unit centers, each vector being assigned to its angularly nearest center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

SECTOR_COUNT = 6
SECTOR_WIDTH = math.pi / 3
SHRINK_RTOL = 1e-12
_TIE_ATOL = 1e-12
_CHUNK = 1 << 16


class GeometryError(ValueError):
    """Raised for zero vectors, dimension mismatches and similar domain errors."""


class CoverError(RuntimeError):
    """Raised when a cone cover cannot be completed within its budget."""

    def __init__(self, message: str, achieved_radius: float):
        super().__init__(message)
        self.achieved_radius = achieved_radius


def as_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise GeometryError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise GeometryError("vector has non-finite components")
    return arr


def _nonzero(v: np.ndarray, what: str = "vector") -> float:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise GeometryError(f"{what} must be nonzero")
    return n


def angle_between(u, v) -> float:
    """Angle in radians between two nonzero vectors of equal dimension."""
    u, v = as_vector(u), as_vector(v)
    if u.shape != v.shape:
        raise GeometryError(f"dimension mismatch: {u.size} vs {v.size}")
    nu, nv = _nonzero(u, "u"), _nonzero(v, "v")
    c = float(np.dot(u, v)) / (nu * nv)
    return math.acos(min(1.0, max(-1.0, c)))


def sector_indices(points: np.ndarray) -> np.ndarray:
    """Vectorized :func:`sector_index` over the rows of an ``(n, 2)`` array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected an (n, 2) array, got shape {pts.shape}")
    if np.any((pts[:, 0] == 0.0) & (pts[:, 1] == 0.0)):
        raise GeometryError("zero vector has no sector")
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    theta = np.where(theta < 0.0, theta + 2.0 * math.pi, theta)
    idx = np.floor(theta / SECTOR_WIDTH).astype(np.int64)
    # theta + 2*pi can round up to exactly 2*pi for tiny negative angles
    return np.minimum(idx, SECTOR_COUNT - 1)


def sector_index(v) -> int:
    v = as_vector(v)
    if v.size != 2:
        raise GeometryError(f"sector_index needs a 2-D vector, got dim {v.size}")
    return int(sector_indices(v[None, :])[0])


def difference_shrinks(u, v, rtol: float = SHRINK_RTOL):
    """Whether ``||u - v|| <= max(||u||, ||v||) * (1 + rtol)``.

    Works row-wise on stacked arrays as well; a bool is returned for 1-D
    inputs and a boolean array otherwise.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape[-1] != v.shape[-1]:
        raise GeometryError(f"dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    d = np.linalg.norm(u - v, axis=-1)
    m = np.maximum(np.linalg.norm(u, axis=-1), np.linalg.norm(v, axis=-1))
    ok = d <= m * (1.0 + rtol)
    return bool(ok) if np.ndim(ok) == 0 else ok


def uniform_sphere(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    """``count`` points uniform on the unit sphere in R^dim."""
    x = rng.standard_normal((count, dim))
    n = np.linalg.norm(x, axis=1)
    # a standard normal draw of exactly zero is possible in principle
    bad = n == 0.0
    while np.any(bad):
        x[bad] = rng.standard_normal((int(bad.sum()), dim))
        n = np.linalg.norm(x, axis=1)
        bad = n == 0.0
    return x / n[:, None]


@dataclass
class ConeCover:
    """Unit centers covering the sphere with caps of ``half_angle`` radians."""

    dim: int
    centers: np.ndarray
    half_angle: float
    verified_radius: Optional[float] = None

    def __post_init__(self):
        self.centers = np.asarray(self.centers, dtype=float)
        if self.dim < 2:
            raise GeometryError("cone covers need dim >= 2")
        if self.centers.ndim != 2 or self.centers.shape[1] != self.dim:
            raise GeometryError(
                f"centers must have shape (k, {self.dim}), got {self.centers.shape}"
            )
        norms = np.linalg.norm(self.centers, axis=1)
        if len(norms) == 0 or np.any(np.abs(norms - 1.0) > 1e-12):
            raise GeometryError("cover centers must be unit vectors")
        if self.verified_radius is not None and self.verified_radius > self.half_angle:
            raise GeometryError(
                f"verified radius {self.verified_radius} exceeds half angle {self.half_angle}"
            )

    @property
    def size(self) -> int:
        return len(self.centers)

    def region_indices(self, points: np.ndarray) -> np.ndarray:
        """Nearest center by angle for each row; ties go to the lowest index."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim:
            raise GeometryError(f"expected an (n, {self.dim}) array, got shape {pts.shape}")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(norms == 0.0):
            raise GeometryError("zero vector has no region")
        cos = (pts @ self.centers.T) / norms[:, None]
        best = cos.max(axis=1, keepdims=True)
        return np.argmax(cos >= best - _TIE_ATOL, axis=1)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.region_indices(points)


def region_index(cover: ConeCover, v) -> int:
    v = as_vector(v)
    _nonzero(v)
    return int(cover.region_indices(v[None, :])[0])


def _nearest_cos(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    out = np.empty(len(points))
    for s in range(0, len(points), _CHUNK):
        out[s:s + _CHUNK] = (points[s:s + _CHUNK] @ centers.T).max(axis=1)
    return out


def _circle_cover(half_angle: float) -> np.ndarray:
    # exact arc covering: ceil(pi / h) arcs, centered on the sector bisectors
    k = max(2, math.ceil(math.pi / half_angle - 1e-9))
    angles = (2.0 * np.arange(k) + 1.0) * math.pi / k
    return np.column_stack([np.cos(angles), np.sin(angles)])


def build_cone_cover(
    dim: int,
    half_angle: float,
    sample_budget: int = 200_000,
    seed: int = 0,
    top_up_passes: int = 8,
    slack: float = 0.02,
) -> ConeCover:
    """Greedy farthest-point cone cover of the unit sphere in R^dim.

    In the plane the arc cover is exact: ``ceil(pi / half_angle)`` centers
    on the bisectors, which for ``pi/6`` are the six sector bisectors.

    Otherwise centers are picked greedily from a seeded uniform sample, each
    new center being the sample point farthest from all existing ones, until
    every sample lies within ``half_angle * (1 - slack)``; the slack absorbs
    the gaps between sample points. Fresh samples are then drawn and
    any uncovered point is fed back into the greedy loop, up to
    ``top_up_passes`` times, so that the cover holds up against sampling it
    was not built from.
    """
    if dim < 2:
        raise GeometryError("dim must be >= 2")
    if not 0.0 < half_angle <= math.pi / 2:
        raise GeometryError("half_angle must lie in (0, pi/2]")
    if dim == 2:
        return ConeCover(2, _circle_cover(half_angle), half_angle)
    if sample_budget < 1:
        raise GeometryError("sample_budget must be positive")

    rng = np.random.default_rng([seed, dim])
    target = math.cos(half_angle * (1.0 - slack))
    pool = uniform_sphere(rng, sample_budget, dim)
    centers = [pool[0]]
    near = pool @ pool[0]

    def grow(pool, near):
        while True:
            j = int(np.argmin(near))
            if near[j] >= target:
                return near
            if len(centers) >= sample_budget:
                radius = math.acos(min(1.0, max(-1.0, float(near[j]))))
                raise CoverError(
                    f"sample budget exhausted after {len(centers)} centers", radius
                )
            centers.append(pool[j])
            np.maximum(near, pool @ pool[j], out=near)

    grow(pool, near)
    for _ in range(top_up_passes):
        fresh = uniform_sphere(rng, sample_budget, dim)
        fresh_near = _nearest_cos(fresh, np.asarray(centers))
        if fresh_near.min() >= target:
            break
        grow(fresh, fresh_near)
    c = np.asarray(centers)
    c /= np.linalg.norm(c, axis=1)[:, None]
    return ConeCover(dim, c, half_angle)


def verify_cover(cover: ConeCover, sample_count: int = 1_000_000, seed: int = 1) -> float:
    """Largest sampled angular distance to the nearest center.

    The result is also stored on ``cover.verified_radius`` when it does not
    exceed the cover's half angle.
    """
    if sample_count < 1:
        raise GeometryError("sample_count must be >= 1")
    rng = np.random.default_rng([seed, cover.dim, 0x5EED])
    worst = 1.0
    done = 0
    while done < sample_count:
        n = min(_CHUNK, sample_count - done)
        pts = uniform_sphere(rng, n, cover.dim)
        worst = min(worst, float(_nearest_cos(pts, cover.centers).min()))
        done += n
    radius = math.acos(min(1.0, max(-1.0, worst)))
    if radius <= cover.half_angle:
        cover.verified_radius = radius
    return radius


def write_cover(path, cover: ConeCover) -> None:
    from .io import atomic_write_text

    verified = "none" if cover.verified_radius is None else f"{cover.verified_radius:.17g}"
    lines = [f"dim={cover.dim} half_angle={cover.half_angle:.17g} verified={verified}"]
    lines += [" ".join(f"{x:.17g}" for x in row) for row in cover.centers]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_cover(path) -> ConeCover:
    with open(path) as fh:
        header = fh.readline().split()
        try:
            fields = dict(item.split("=", 1) for item in header)
            dim = int(fields["dim"])
            half = float(fields["half_angle"])
            verified = None if fields["verified"] == "none" else float(fields["verified"])
        except (KeyError, ValueError) as exc:
            raise GeometryError(f"{path}: malformed cover header") from exc
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                row = [float(t) for t in line.split()]
            except ValueError as exc:
                raise GeometryError(f"{path}:{lineno}: bad coordinate") from exc
            if len(row) != dim:
                raise GeometryError(f"{path}:{lineno}: expected {dim} coordinates")
            rows.append(row)
    return ConeCover(dim, np.array(rows, dtype=float).reshape(-1, dim), half, verified)
