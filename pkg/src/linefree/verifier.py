"""Verification of progression-freeness and line/plane counting.

A k-progression is a set {a + i*b : 0 <= i < k} with b != 0; since p is
prime the k points are automatically distinct, and a p-progression is
exactly a full line.  The counting helpers implement the standard
double-counting identities for line profiles, plus two per-plane bounds
on the number of (p-1)-lines used by the certificate engine.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .geometry import SpaceSpec, canonical_direction, index_point, space_tables
from .pointset import PointSet


@dataclass(frozen=True)
class ProgressionWitness:
    """A k-progression base + i*step found inside a set.

    step is the actual common difference; for k = p it equals the
    canonical direction of the line.  direction is always canonical.
    """

    base: tuple[int, ...]
    step: tuple[int, ...]
    k: int

    def canonical_dir(self, space: SpaceSpec) -> tuple[int, ...]:
        return canonical_direction(space, self.step)

    def points(self, space: SpaceSpec) -> list[tuple[int, ...]]:
        out = []
        for i in range(self.k):
            out.append(tuple((b + i * s) % space.p for b, s in zip(self.base, self.step)))
        return out


def _check_k(space: SpaceSpec, k: int) -> None:
    if not 3 <= k <= space.p:
        raise ValueError(f"k must be in [3, p], got k={k} for p={space.p}")


def find_progression(s: PointSet, k: int | None = None) -> ProgressionWitness | None:
    """Least k-progression contained in S, or None if S is k-progression-free.

    The least witness minimizes (base index, step vector index); every
    reversal pair is considered, so the reported representation is
    deterministic.
    """
    space = s.space
    p = space.p
    if k is None:
        k = p
    _check_k(space, k)
    t = space_tables(space.p, space.n)
    bits = s.bits
    best: tuple[int, int] | None = None  # (base index, step vector index)
    for di in range(len(t.dir_vecs)):
        mat = t.line_matrix(di)
        member = bits[mat]  # (p, lines in this direction)
        if k == p:
            full = member.all(axis=0)
            if full.any():
                bases = mat[:, full].min(axis=0)
                cand = (int(bases.min()), int(t.dir_vecs[di] @ t.powers))
                if best is None or cand < best:
                    best = cand
        else:
            d = t.dir_vecs[di]
            for lam in range(1, p):
                step_idx = int((d * lam % p) @ t.powers)
                pos = (np.arange(p)[None, :] + lam * np.arange(k)[:, None]) % p
                runs = member[pos].all(axis=0)  # (p starts, lines)
                if runs.any():
                    js, cols = np.nonzero(runs)
                    bases = mat[js, cols]
                    pick = int(bases.argmin())
                    cand = (int(bases[pick]), step_idx)
                    if best is None or cand < best:
                        best = cand
    if best is None:
        return None
    base_idx, step_idx = best
    step_vec = index_point(space, step_idx)
    return ProgressionWitness(
        base=index_point(space, base_idx), step=step_vec, k=k
    )


@dataclass(frozen=True)
class LineProfile:
    """x[i] = number of lines meeting S in exactly i points."""

    space: SpaceSpec
    x: tuple[int, ...]

    @property
    def total_lines(self) -> int:
        return sum(self.x)

    @property
    def incidence_sum(self) -> int:
        return sum(i * v for i, v in enumerate(self.x))

    @property
    def pair_sum(self) -> int:
        return sum(i * (i - 1) // 2 * v for i, v in enumerate(self.x))


def line_profile(s: PointSet) -> LineProfile:
    space = s.space
    t = space_tables(space.p, space.n)
    x = np.zeros(space.p + 1, dtype=np.int64)
    for di in range(len(t.dir_vecs)):
        mat = t.line_matrix(di)
        counts = s.bits[mat].sum(axis=0)
        x += np.bincount(counts, minlength=space.p + 1)
    return LineProfile(space=space, x=tuple(int(v) for v in x))


@dataclass(frozen=True)
class PlaneProfile:
    """Per parallel class, the multiset of |S & H| over its p planes.

    Multisets are sorted descending; classes follow canonical-normal
    order, matching parallel_classes.
    """

    space: SpaceSpec
    multisets: tuple[tuple[int, ...], ...]


def plane_profile(s: PointSet) -> PlaneProfile:
    space = s.space
    if space.n < 2:
        raise ValueError("plane profiles need n >= 2")
    t = space_tables(space.p, space.n)
    idx = s.indices()
    pts = t.coords[idx]
    out = []
    for normal in t.dir_vecs:
        vals = (pts @ normal) % space.p if len(pts) else np.empty(0, dtype=np.int64)
        counts = np.bincount(vals, minlength=space.p)
        out.append(tuple(sorted((int(c) for c in counts), reverse=True)))
    return PlaneProfile(space=space, multisets=tuple(out))


def identity_check(s: PointSet) -> dict:
    """Recompute the three double-counting identities against the profile.

    Every line count, point degree, and point pair is counted twice:
    once from the geometry and once from the observed profile.
    """
    space = s.space
    prof = line_profile(s)
    m = s.size
    expected = {
        "line_total": space.num_lines,
        "incidence_total": m * space.lines_per_point,
        "pair_total": m * (m - 1) // 2,
    }
    observed = {
        "line_total": prof.total_lines,
        "incidence_total": prof.incidence_sum,
        "pair_total": prof.pair_sum,
    }
    return {
        "ok": expected == observed,
        "expected": expected,
        "observed": observed,
        "profile": list(prof.x),
    }


class LineBounds(NamedTuple):
    """Interval for the count of (p-1)-point lines in a plane section."""

    min: int
    max: int


def lp_line_bounds(p: int, m: int) -> LineBounds:
    """Bounds on the number of (p-1)-lines in a plane holding m points
    of a set with no full line.

    Both bounds come from nonnegative rational combinations of the three
    plane identities (line total p(p+1), point degree p+1, pair count
    C(m,2)) with x_p = 0:

    * lower: pairs minus (p-3)/2 times degrees leaves coefficients <= 0
      on every x_i except x_{p-1};
    * upper: C(i,2) - 2i + 3 = (i-2)(i-3)/2 >= 0 kills x_2 and x_3 and
      leaves (p-3)(p-4)/2 on x_{p-1}.

    Returned as (ceil(lower), floor(upper)) clamped to [0, p(p+1)].
    """
    if not is_valid_plane_m(p, m):
        raise ValueError(f"m must be within [0, p^2], got {m}")
    lines = p * (p + 1)
    pairs = Fraction(m * (m - 1), 2)
    degrees = (p + 1) * m
    lo = (pairs - Fraction(p - 3, 2) * degrees) / Fraction(p - 1, 2)
    u = min(2, p - 3)
    coeff = Fraction((p - 1 - u) * (p - 2 - u), 2)
    hi = (pairs - u * degrees + Fraction(u * (u + 1), 2) * lines) / coeff
    lo_int = max(0, -((-lo.numerator) // lo.denominator))  # ceil
    hi_int = min(lines, hi.numerator // hi.denominator)  # floor
    return LineBounds(lo_int, hi_int)


def is_valid_plane_m(p: int, m: int) -> bool:
    return 0 <= m <= p * p


def degree_line_bound(p: int, m: int) -> int:
    """Upper bound on (p-1)-lines in a plane with m points, by degrees.

    Two (p-1)-lines through a common point share only that point, so
    each point lies on at most floor((m-1)/(p-2)) of them (and never
    more than p+1); summing over points and dividing by p-1 bounds the
    line count.
    """
    if not is_valid_plane_m(p, m):
        raise ValueError(f"m must be within [0, p^2], got {m}")
    if m == 0:
        return 0
    per_point = min((m - 1) // (p - 2), p + 1)
    return min(m * per_point // (p - 1), p * (p + 1))


def verification_report(s: PointSet, k: int | None = None) -> dict:
    """JSON-ready report: size, freeness verdict, witness, line profile."""
    space = s.space
    if k is None:
        k = space.p
    witness = find_progression(s, k)
    prof = line_profile(s)
    report = {
        "p": space.p,
        "n": space.n,
        "k": k,
        "size": s.size,
        "free": witness is None,
        "profile": list(prof.x),
    }
    if witness is not None:
        report["witness"] = {"base": list(witness.base), "dir": list(witness.step)}
    return report
