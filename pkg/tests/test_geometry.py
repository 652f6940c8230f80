import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from signbalance.geometry import (
    ConeCover,
    CoverError,
    GeometryError,
    angle_between,
    build_cone_cover,
    difference_shrinks,
    read_cover,
    region_index,
    sector_index,
    sector_indices,
    verify_cover,
    write_cover,
)

DEG59 = math.radians(59)
U59 = (math.cos(DEG59), math.sin(DEG59))

coord = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
planar = st.tuples(coord, coord).filter(lambda v: math.hypot(*v) > 1e-9)


def test_angle_between_examples():
    assert angle_between((1, 0), (0, 1)) == pytest.approx(math.pi / 2, abs=1e-15)
    assert angle_between((1, 0), (1, 0)) == 0.0
    assert abs(angle_between((1, 0), U59) - DEG59) <= 1e-12


def test_angle_between_clamps_parallel_vectors():
    v = np.array([0.1, 0.7, 0.3])
    assert angle_between(v, 3 * v) == pytest.approx(0.0, abs=1e-7)
    assert angle_between(v, -v) == pytest.approx(math.pi)


@pytest.mark.parametrize("u, v", [((0, 0), (1, 0)), ((1, 0), (0, 0)), ((1, 0), (1, 0, 0))])
def test_angle_between_domain_errors(u, v):
    with pytest.raises(GeometryError):
        angle_between(u, v)


@pytest.mark.parametrize(
    "v, k",
    [((1, 0), 0), ((0, 1), 1), ((-1, -1), 3), ((-1, 0), 3), ((0, -1), 4), ((1, -1e-300), 5)],
)
def test_sector_index(v, k):
    assert sector_index(v) == k


def test_sector_boundaries_are_half_open():
    for k in range(6):
        a = k * math.pi / 3
        v = (math.cos(a), math.sin(a))
        # the boundary ray belongs to the sector that starts there
        assert sector_index(v) in (k, (k - 1) % 6)
        assert sector_index((math.cos(a + 1e-9), math.sin(a + 1e-9))) == k
    assert sector_index((1.0, 0.0)) == 0
    assert sector_index((0.5, math.sqrt(3) / 2)) == 1


def test_sector_index_rejects_zero_and_wrong_dim():
    with pytest.raises(GeometryError):
        sector_index((0.0, 0.0))
    with pytest.raises(GeometryError):
        sector_index((1.0, 0.0, 0.0))


def test_difference_shrinks_examples():
    assert difference_shrinks((1, 0), U59)
    # cosine rule: |u - v| = 2 sin(29.5 deg) = 0.98485 <= 1
    assert np.linalg.norm(np.subtract((1, 0), U59)) == pytest.approx(0.9848471202069343, rel=1e-14)
    assert difference_shrinks((0.8, 0.1), (0.7, 0.2))
    assert np.linalg.norm(np.subtract((0.8, 0.1), (0.7, 0.2))) == pytest.approx(0.1414213562373095)
    assert not difference_shrinks((1, 0), (-1, 0))


def test_difference_shrinks_vectorized():
    u = np.array([[1.0, 0.0], [1.0, 0.0]])
    v = np.array([U59, (-1.0, 0.0)])
    assert difference_shrinks(u, v).tolist() == [True, False]


@settings(max_examples=500)
@given(planar, planar)
def test_same_sector_pairs_are_close_and_shrink(u, v):
    if sector_index(u) != sector_index(v):
        return
    assert angle_between(u, v) < math.pi / 3 + 1e-12
    assert difference_shrinks(u, v)


def test_same_sector_lemma_on_many_pairs(rng):
    n = 200_000
    a = rng.uniform(0, 2 * math.pi, n)
    u = np.column_stack([np.cos(a), np.sin(a)]) * rng.uniform(1e-6, 1, n)[:, None]
    k = sector_indices(u)
    b = (k + rng.random(n)) * math.pi / 3
    v = np.column_stack([np.cos(b), np.sin(b)]) * rng.uniform(1e-6, 1, n)[:, None]
    same = sector_indices(v) == k
    cos = (u * v).sum(1) / np.linalg.norm(u, axis=1) / np.linalg.norm(v, axis=1)
    assert np.all(cos[same] > math.cos(math.pi / 3) - 1e-12)
    assert difference_shrinks(u[same], v[same]).all()


def test_planar_bisector_cover():
    cover = build_cone_cover(2, math.pi / 6)
    assert cover.size == 6
    angles = np.degrees(np.arctan2(cover.centers[:, 1], cover.centers[:, 0])) % 360
    np.testing.assert_allclose(angles, [30, 90, 150, 210, 270, 330], atol=1e-12)


def test_planar_half_circle_cover():
    assert build_cone_cover(2, math.pi / 2).size == 2


def test_region_index_ties_and_centers():
    cover = build_cone_cover(2, math.pi / 6)
    assert region_index(cover, (1, 0)) == 0
    assert region_index(cover, (0, 1)) == 1
    c3 = build_cone_cover(3, math.pi / 6, sample_budget=20_000)
    for i in range(c3.size):
        assert region_index(c3, c3.centers[i]) == i
    with pytest.raises(GeometryError):
        region_index(cover, (0, 0))


def test_verify_cover_planar():
    cover = build_cone_cover(2, math.pi / 6)
    radius = verify_cover(cover, 1_000_000, seed=5)
    assert radius <= math.pi / 6 + 1e-9
    assert cover.verified_radius == radius


def test_verify_cover_single_center_sees_antipode():
    cover = ConeCover(2, [[1.0, 0.0]], math.pi / 6)
    radius = verify_cover(cover, 1_000_000, seed=5)
    assert radius > math.radians(179.5)
    assert cover.verified_radius is None


def test_three_dim_cover_constant():
    # K3, the R^3 analogue of six, for the default budget and seed 0
    cover = build_cone_cover(3, math.pi / 6, seed=0)
    assert cover.size == 31
    assert verify_cover(cover, 200_000, seed=11) <= math.pi / 6


def test_cover_is_deterministic():
    a = build_cone_cover(3, math.pi / 6, sample_budget=20_000, seed=4)
    b = build_cone_cover(3, math.pi / 6, sample_budget=20_000, seed=4)
    np.testing.assert_array_equal(a.centers, b.centers)


def test_cover_budget_exhaustion():
    with pytest.raises(CoverError) as info:
        build_cone_cover(3, 0.05, sample_budget=50)
    assert info.value.achieved_radius > 0.05


def test_verify_cover_independent_of_chunking():
    cover = build_cone_cover(3, math.pi / 6, sample_budget=20_000)
    assert verify_cover(cover, 70_000, seed=3) == verify_cover(cover, 70_000, seed=3)


def test_cone_cover_validation():
    with pytest.raises(GeometryError):
        ConeCover(2, [[2.0, 0.0]], 0.5)
    with pytest.raises(GeometryError):
        ConeCover(2, [[1.0, 0.0]], 0.5, verified_radius=0.6)
    with pytest.raises(GeometryError):
        build_cone_cover(3, math.pi / 2 + 0.1)


def test_cover_file_round_trip(tmp_path):
    cover = build_cone_cover(3, math.pi / 6, sample_budget=20_000)
    verify_cover(cover, 50_000)
    path = tmp_path / "cover.txt"
    write_cover(path, cover)
    header = path.read_text().splitlines()[0]
    assert header.startswith("dim=3 half_angle=") and "verified=" in header
    back = read_cover(path)
    np.testing.assert_array_equal(back.centers, cover.centers)
    assert back.verified_radius == cover.verified_radius
    assert back.half_angle == cover.half_angle


def test_unverified_cover_header(tmp_path):
    path = tmp_path / "c.txt"
    write_cover(path, build_cone_cover(2, math.pi / 6))
    assert path.read_text().splitlines()[0].endswith("verified=none")
    assert read_cover(path).verified_radius is None
