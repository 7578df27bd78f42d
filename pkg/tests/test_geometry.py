"""Geometry tables checked against a from-scratch line oracle."""

from __future__ import annotations

import numpy as np
import pytest

from linefree.geometry import (
    ResourceBudgetError,
    SpaceSpec,
    build_incidence_index,
    canonical_direction,
    det_mod,
    directions,
    enumerate_lines,
    index_point,
    is_prime,
    line_through,
    parallel_classes,
    point_index,
)


def oracle_line_indices(space: SpaceSpec, a: tuple[int, ...], b: tuple[int, ...]) -> frozenset:
    """Index set of the affine line through a != b, from the definition."""
    p = space.p
    d = tuple((y - x) % p for x, y in zip(a, b))
    return frozenset(
        point_index(space, tuple((x + t * s) % p for x, s in zip(a, d)))
        for t in range(p)
    )


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 3), (5, 3), (7, 2)])
def test_space_counts(p, n):
    space = SpaceSpec(p, n)
    assert space.num_points == p**n
    assert space.num_directions == (p**n - 1) // (p - 1)
    assert space.lines_per_point == space.num_directions
    assert space.num_lines == space.num_directions * p ** (n - 1)
    lines = enumerate_lines(space)
    assert len(lines) == space.num_lines
    assert all(len(set(l.points)) == p for l in lines)
    # together the lines cover every pair exactly once
    assert sum(1 for _ in lines) * p * (p - 1) // 2 == (
        space.num_points * (space.num_points - 1) // 2
    )


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (5, 3), (7, 2)])
def test_index_round_trip(p, n):
    space = SpaceSpec(p, n)
    for idx in range(space.num_points):
        assert point_index(space, index_point(space, idx)) == idx


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (5, 3)])
def test_line_through_matches_oracle(p, n, rng):
    space = SpaceSpec(p, n)
    for _ in range(200):
        ia, ib = rng.choice(space.num_points, size=2, replace=False)
        a = index_point(space, int(ia))
        b = index_point(space, int(ib))
        d = tuple((y - x) % p for x, y in zip(a, b))
        got = frozenset(line_through(space, a, d).points)
        assert got == oracle_line_indices(space, a, b)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (5, 3)])
def test_every_pair_on_exactly_one_enumerated_line(p, n, rng):
    space = SpaceSpec(p, n)
    lines = [frozenset(l.points) for l in enumerate_lines(space)]
    assert len(set(lines)) == len(lines)
    for _ in range(60):
        ia, ib = rng.choice(space.num_points, size=2, replace=False)
        a = index_point(space, int(ia))
        b = index_point(space, int(ib))
        containing = [L for L in lines if int(ia) in L and int(ib) in L]
        assert len(containing) == 1
        assert containing[0] == oracle_line_indices(space, a, b)


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (5, 3), (7, 2)])
def test_canonical_direction_collapses_scalar_multiples(p, n):
    space = SpaceSpec(p, n)
    vecs = directions(space)
    assert len(vecs) == space.num_directions
    assert len(set(vecs)) == len(vecs)
    for vec in vecs:
        assert next(c for c in vec if c) == 1  # first nonzero entry is 1
        for lam in range(1, p):
            scaled = tuple((lam * c) % p for c in vec)
            assert canonical_direction(space, scaled) == vec


def test_zero_vector_has_no_direction():
    with pytest.raises(ValueError):
        canonical_direction(SpaceSpec(5, 2), (0, 0))


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (3, 3)])
def test_parallel_classes_partition_the_space(p, n):
    space = SpaceSpec(p, n)
    classes = parallel_classes(space)
    assert len(classes) == space.num_parallel_classes
    for cls in classes:
        seen: list[int] = []
        for plane in cls.planes:
            seen.extend(int(i) for i in plane.point_indices(space))
        assert sorted(seen) == list(range(space.num_points))


@pytest.mark.parametrize("p,n", [(3, 2), (5, 2), (5, 3)])
def test_incidence_index_consistent(p, n, rng):
    space = SpaceSpec(p, n)
    idx = build_incidence_index(space)
    assert idx.num_lines == space.num_lines
    for q in range(space.num_points):
        through = idx.lines_through(q)
        assert len(through) == space.lines_per_point
        for lid in through:
            assert q in idx.line(int(lid)).points
    for _ in range(50):
        ia, ib = rng.choice(space.num_points, size=2, replace=False)
        lid = idx.pair_line(int(ia), int(ib))
        assert lid == idx.pair_line(int(ib), int(ia))
        pts = set(idx.line(lid).points)
        assert int(ia) in pts and int(ib) in pts


def test_det_mod_and_primality():
    assert det_mod([[1, 0], [0, 1]], 5) == 1
    assert det_mod([[2, 1], [1, 3]], 5) == 0  # 2*3 - 1*1 = 5
    assert [q for q in range(2, 20) if is_prime(q)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_non_prime_space_rejected():
    with pytest.raises(ValueError):
        SpaceSpec(6, 2)


def test_oversized_index_budget_guarded():
    with pytest.raises(ResourceBudgetError):
        build_incidence_index(SpaceSpec(31, 4))
