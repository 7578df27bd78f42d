"""Explicit progression-free subsets of F_p^n.

Four families are provided:

* an axis-aligned hypercube of side p-1 (free because a full line must
  visit every residue in each moving coordinate);
* a layered set for n >= 3 stacking three kinds of two-dimensional
  layers, beating the hypercube by (n-2)/2 * (p-1)(p-2)^(n-3) points;
* a three-dimensional set whose last two layers are controlled by
  intervals of length about sqrt(p), beating the hypercube by roughly
  p - 2*sqrt(p) points;
* a three-dimensional set built from quadratic residues, for primes
  p = 7 (mod 24), beating the hypercube by p - 1 points (and by 9 when
  p = 7, where two of its removal families coincide).

A reference 70-point set in F_5^3 is bundled as a grid file.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .geometry import SpaceSpec, is_prime, space_tables
from .pointset import PointSet, parse_grid_document


def _require_prime(p: int) -> None:
    if not is_prime(p) or p < 3:
        raise ValueError(f"p must be an odd prime, got {p}")


def box(p: int, n: int, side: int) -> PointSet:
    """Axis-aligned box [0, side-1]^n."""
    _require_prime(p)
    if not 0 <= side <= p:
        raise ValueError(f"side must be in [0, p], got {side}")
    space = SpaceSpec(p, n)
    t = space_tables(p, n)
    mask = (t.coords < side).all(axis=1)
    return PointSet(space, mask)


def hypercube(p: int, n: int) -> PointSet:
    """The box [0, p-2]^n: (p-1)^n points with no full line."""
    return box(p, n, p - 1)


def layered(p: int, n: int) -> PointSet:
    """Layered set for n >= 3, size (p-1)^n + (n-2)/2*(p-1)(p-2)^(n-3).

    Three two-dimensional layer contents:

    * A = [0,p-2]^2,
    * B = [0,p-1]^2 minus the diagonal, minus {p-1} x [0,(p-3)/2],
      minus [0,(p-3)/2] x {p-1},
    * C = {(i,i) : 0 <= i <= (p-3)/2},

    placed at positions (the first n-2 coordinates):

    * A at [0,p-3]^(n-2),
    * B at [0,p-2]^(n-2) minus [0,p-3]^(n-2),
    * C where exactly one position coordinate is p-1 and the rest are
      in [0,p-3].

    All other positions are empty.
    """
    _require_prime(p)
    if n < 3:
        raise ValueError("layered sets need n >= 3; use hypercube for n <= 2")
    space = SpaceSpec(p, n)
    t = space_tables(p, n)
    half = (p - 3) // 2

    a_mask = np.zeros((p, p), dtype=bool)
    a_mask[: p - 1, : p - 1] = True

    b_mask = np.ones((p, p), dtype=bool)
    b_mask[np.arange(p), np.arange(p)] = False
    b_mask[p - 1, : half + 1] = False
    b_mask[: half + 1, p - 1] = False

    c_mask = np.zeros((p, p), dtype=bool)
    c_mask[np.arange(half + 1), np.arange(half + 1)] = True

    pos = t.coords[:, : n - 2]
    r = t.coords[:, n - 2]
    c = t.coords[:, n - 1]
    in_a = (pos <= p - 3).all(axis=1)
    in_b = (pos <= p - 2).all(axis=1) & ~in_a
    in_c = ((pos == p - 1).sum(axis=1) == 1) & ((pos <= p - 3).sum(axis=1) == n - 3)

    bits = (
        (in_a & a_mask[r, c]) | (in_b & b_mask[r, c]) | (in_c & c_mask[r, c])
    )
    return PointSet(space, bits)


def sqrt_params(p: int) -> tuple[int, int, tuple[int, ...], tuple[int, ...]]:
    """(k, t, K, T) with k = isqrt(p), t = p//k, K = [0,k-1], T = {jk-1}."""
    import math

    k = math.isqrt(p)
    t = p // k
    return k, t, tuple(range(k)), tuple(j * k - 1 for j in range(1, t + 1))


def sqrt_construction(p: int) -> PointSet:
    """Three-dimensional set of size (p-2)(p-1)^2 + p^2 - p + 1 - k - t.

    Layers by the first coordinate: layers 0..p-3 hold [0,p-2]^2, layer
    p-2 holds the full plane minus the diagonal and minus the rectangle
    (K u {p-1}) x (T u {p-1}), and layer p-1 holds K x T.
    """
    _require_prime(p)
    if p < 5:
        raise ValueError("the interval construction degenerates for p = 3; need p >= 5")
    space = SpaceSpec(p, 3)
    t_tab = space_tables(p, 3)
    k, t, K, T = sqrt_params(p)

    a_mask = np.zeros((p, p), dtype=bool)
    a_mask[: p - 1, : p - 1] = True

    mid_mask = np.ones((p, p), dtype=bool)
    mid_mask[np.arange(p), np.arange(p)] = False
    rows = np.array(K + (p - 1,))
    cols = np.array(T + (p - 1,))
    mid_mask[np.ix_(rows, cols)] = False

    top_mask = np.zeros((p, p), dtype=bool)
    top_mask[np.ix_(np.array(K), np.array(T))] = True

    z = t_tab.coords[:, 0]
    r = t_tab.coords[:, 1]
    c = t_tab.coords[:, 2]
    bits = (
        ((z <= p - 3) & a_mask[r, c])
        | ((z == p - 2) & mid_mask[r, c])
        | ((z == p - 1) & top_mask[r, c])
    )
    return PointSet(space, bits)


def quadratic_residues(p: int) -> set[int]:
    """Nonzero squares mod p: (p-1)/2 elements, closed under product."""
    if not is_prime(p) or p == 2:
        raise ValueError(f"p must be an odd prime, got {p}")
    return {pow(a, 2, p) for a in range(1, p)}


def qr_construction(p: int) -> PointSet:
    """Quadratic-residue set in F_p^3 for p = 7 (mod 24).

    The congruence makes 2 a residue while -1 and 3 are non-residues,
    which drives every case of the freeness argument.  Built with
    layers indexed by the last coordinate of the defining formula, then
    permuted so that layers are indexed by the first coordinate.
    """
    _require_prime(p)
    if p % 24 != 7:
        raise ValueError(f"p must be congruent to 7 mod 24, got {p} (p mod 24 = {p % 24})")
    space = SpaceSpec(p, 3)
    res = quadratic_residues(p)
    non = set(range(1, p)) - res
    inv2 = pow(2, p - 2, p)
    inv3 = pow(3, p - 2, p)

    pts: set[tuple[int, int, int]] = set()
    for x in range(1, p):
        for y in range(1, p):
            for z in range(1, p):
                pts.add((x, y, z))
    pts |= {(a, 0, a) for a in res} | {(0, a, a) for a in res}
    pts -= {(a, a, a) for a in res} | {(a * inv2 % p, a * inv2 % p, a) for a in res}
    pts |= (
        {(3 * b * inv2 % p, 0, b) for b in non}
        | {(0, 3 * b * inv2 % p, b) for b in non}
        | {(3 * b % p, 0, b) for b in non}
        | {(0, 3 * b % p, b) for b in non}
    )
    pts -= (
        {(b, b, b) for b in non}
        | {(3 * b * inv2 % p, 3 * b * inv2 % p, b) for b in non}
        | {(b * inv3 % p, b * inv3 % p, b) for b in non}
    )
    pts -= {(3 * b % p, -3 * b * inv2 % p, b) for b in non} | {
        (-3 * b * inv2 % p, 3 * b % p, b) for b in non
    }
    pts |= (
        {(b, b, 0) for b in non}
        | {(2 * a % p, -a % p, 0) for a in res}
        | {(-a % p, 2 * a % p, 0) for a in res}
    )

    return PointSet.from_points(space, [(z, x, y) for (x, y, z) in pts])


_REFERENCE_NAMES = ("fig70",)


def load_reference_set(name: str) -> PointSet:
    """Load a bundled reference set by name (currently: fig70)."""
    if name not in _REFERENCE_NAMES:
        raise ValueError(
            f"unknown reference set {name!r}; available: {', '.join(_REFERENCE_NAMES)}"
        )
    text = resources.files("linefree.data").joinpath(f"{name}.grid").read_text()
    return parse_grid_document(text).pointset
