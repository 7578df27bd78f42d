"""Affine geometry of F_p^n: points, directions, lines, and hyperplanes.

Points are tuples of coordinates in [0, p); the index of a point is its
radix-p value with coordinate 0 least significant.  A direction is a
nonzero vector normalized so that its first nonzero coordinate is 1;
there are (p^n - 1)/(p - 1) of them, and each line is written as
base + i*dir with base the least-index point on the line.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_POINTS = 2**31
DEFAULT_INDEX_BUDGET = 2**22  # line-table entries an index may materialize


class ResourceBudgetError(MemoryError):
    """Raised when an operation would exceed its memory budget."""


def is_prime(m: int) -> bool:
    if m < 2:
        return False
    if m % 2 == 0:
        return m == 2
    d = 3
    while d * d <= m:
        if m % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class SpaceSpec:
    """The ambient space F_p^n."""

    p: int
    n: int

    def __post_init__(self) -> None:
        if not is_prime(self.p) or self.p < 3:
            raise ValueError(f"p must be an odd prime, got {self.p}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.p**self.n > MAX_POINTS:
            raise ValueError(f"p^n exceeds the {MAX_POINTS} point cap")

    @property
    def num_points(self) -> int:
        return self.p**self.n

    @property
    def num_directions(self) -> int:
        return (self.p**self.n - 1) // (self.p - 1)

    @property
    def lines_per_point(self) -> int:
        return self.num_directions

    @property
    def num_lines(self) -> int:
        return self.p ** (self.n - 1) * self.num_directions

    @property
    def num_parallel_classes(self) -> int:
        return self.num_directions


def point_index(space: SpaceSpec, point: tuple[int, ...]) -> int:
    if len(point) != space.n:
        raise ValueError(f"point has {len(point)} coordinates, expected {space.n}")
    idx = 0
    for c in reversed(point):
        if not 0 <= c < space.p:
            raise ValueError(f"coordinate {c} out of range for p={space.p}")
        idx = idx * space.p + c
    return idx


def index_point(space: SpaceSpec, index: int) -> tuple[int, ...]:
    if not 0 <= index < space.num_points:
        raise ValueError(f"index {index} out of range")
    coords = []
    for _ in range(space.n):
        index, c = divmod(index, space.p)
        coords.append(c)
    return tuple(coords)


def canonical_direction(space: SpaceSpec, vec: tuple[int, ...]) -> tuple[int, ...]:
    """Scale a nonzero vector so its first nonzero coordinate is 1."""
    v = tuple(c % space.p for c in vec)
    pivot = next((j for j, c in enumerate(v) if c), None)
    if pivot is None:
        raise ValueError("the zero vector has no direction")
    inv = pow(v[pivot], space.p - 2, space.p)
    return tuple(c * inv % space.p for c in v)


@dataclass(frozen=True)
class Line:
    """A full line {base + i*dir : 0 <= i < p}, in canonical form."""

    base: tuple[int, ...]
    dir: tuple[int, ...]
    points: tuple[int, ...]  # the p point indices in traversal order


@dataclass(frozen=True)
class Hyperplane:
    """The hyperplane {x : normal . x == constant}."""

    normal: tuple[int, ...]
    constant: int

    def point_indices(self, space: SpaceSpec) -> np.ndarray:
        t = space_tables(space.p, space.n)
        vals = t.coords @ np.asarray(self.normal, dtype=np.int64) % space.p
        return np.nonzero(vals == self.constant)[0].astype(np.int64)


@dataclass(frozen=True)
class ParallelClass:
    normal: tuple[int, ...]
    planes: tuple[Hyperplane, ...]


class _SpaceTables:
    """Vectorized lookup tables for one space, built once and shared."""

    def __init__(self, p: int, n: int):
        self.p = p
        self.n = n
        num = p**n
        self.powers = (p ** np.arange(n, dtype=np.int64)).astype(np.int64)
        idx = np.arange(num, dtype=np.int64)
        coords = np.empty((num, n), dtype=np.int64)
        for j in range(n):
            coords[:, j] = idx % p
            idx = idx // p
        self.coords = coords
        dirs = []
        for pivot in range(n):
            # first nonzero coordinate is the pivot, normalized to 1
            tail = n - pivot - 1
            for rest in range(p**tail):
                v = [0] * pivot + [1] + list(index_point(SpaceSpec(p, max(tail, 1)), rest)[:tail])
                dirs.append(tuple(v[:n]))
        dirs.sort(key=lambda v: int(np.dot(np.asarray(v, dtype=np.int64), self.powers)))
        self.dir_vecs = np.asarray(dirs, dtype=np.int64)
        self.dir_pivots = np.asarray(
            [next(j for j, c in enumerate(v) if c) for v in dirs], dtype=np.int64
        )
        self.dir_pos = {tuple(int(c) for c in v): i for i, v in enumerate(dirs)}
        # transversal point indices per pivot: points whose pivot coordinate is 0
        self._transversals: dict[int, np.ndarray] = {}
        self._line_cache: dict[int, np.ndarray] = {}

    def transversal(self, pivot: int) -> np.ndarray:
        if pivot not in self._transversals:
            sel = np.nonzero(self.coords[:, pivot] == 0)[0]
            self._transversals[pivot] = sel.astype(np.int64)
        return self._transversals[pivot]

    def successor(self, di: int) -> np.ndarray:
        """Index permutation x -> x + d for direction number di."""
        d = self.dir_vecs[di]
        return ((self.coords + d) % self.p) @ self.powers

    def line_matrix(self, di: int) -> np.ndarray:
        """(p, p^{n-1}) indices; column c is one line with direction di.

        Row i holds t + i*d over the transversal t.  Columns are in
        ascending order of their row-0 (transversal) point index, not of
        the line's least point.
        """
        cached = self._line_cache.get(di)
        if cached is not None:
            return cached
        p = self.p
        start = self.transversal(int(self.dir_pivots[di]))
        mat = np.empty((p, start.size), dtype=np.int32)
        mat[0] = start
        step = self.successor(di)
        for i in range(1, p):
            mat[i] = step[mat[i - 1]]
        if self.p**self.n <= 2**15:  # small spaces: keep tables warm
            self._line_cache[di] = mat
        return mat


@lru_cache(maxsize=64)
def space_tables(p: int, n: int) -> _SpaceTables:
    SpaceSpec(p, n)  # validate
    return _SpaceTables(p, n)


def directions(space: SpaceSpec) -> list[tuple[int, ...]]:
    t = space_tables(space.p, space.n)
    return [tuple(int(c) for c in v) for v in t.dir_vecs]


def _budget_check(space: SpaceSpec, budget: int, what: str) -> None:
    entries = space.num_lines * space.p
    if entries > budget:
        raise ResourceBudgetError(
            f"{what} for p={space.p}, n={space.n} needs {entries} line-table "
            f"entries, over the budget of {budget}; raise budget= to allow"
        )


def _line_from_column(space: SpaceSpec, t: _SpaceTables, di: int, col: np.ndarray) -> Line:
    base_pos = int(np.argmin(col))
    pts = tuple(int(col[(base_pos + i) % space.p]) for i in range(space.p))
    base = index_point(space, pts[0])
    d = tuple(int(c) for c in t.dir_vecs[di])
    return Line(base=base, dir=d, points=pts)


def enumerate_lines(space: SpaceSpec, budget: int = DEFAULT_INDEX_BUDGET) -> list[Line]:
    """All p^{n-1}*(p^n-1)/(p-1) lines, sorted by (direction, base)."""
    _budget_check(space, budget, "line enumeration")
    t = space_tables(space.p, space.n)
    out = []
    for di in range(len(t.dir_vecs)):
        mat = t.line_matrix(di)
        order = np.argsort(mat.min(axis=0), kind="stable")
        for c in order:
            out.append(_line_from_column(space, t, di, mat[:, c]))
    return out


def line_through(space: SpaceSpec, point: tuple[int, ...], vec: tuple[int, ...]) -> Line:
    """The unique line through a point with the given (nonzero) direction."""
    d = canonical_direction(space, vec)
    t = space_tables(space.p, space.n)
    di = t.dir_pos[d]
    idx = point_index(space, point)
    col = np.empty(space.p, dtype=np.int64)
    col[0] = idx
    step = t.successor(di)
    for i in range(1, space.p):
        col[i] = step[col[i - 1]]
    return _line_from_column(space, t, di, col)


def parallel_classes(space: SpaceSpec) -> list[ParallelClass]:
    """Classes of p parallel hyperplanes, one per canonical normal."""
    if space.n < 2:
        raise ValueError("hyperplane classes need n >= 2")
    out = []
    for normal in directions(space):
        planes = tuple(Hyperplane(normal, c) for c in range(space.p))
        out.append(ParallelClass(normal=normal, planes=planes))
    return out


class IncidenceIndex:
    """Point/line/plane incidence lookups for one space.

    Lines are numbered in (direction, base) order.  For n = 3 each line
    lies in exactly p + 1 planes; plane id = class_index * p + constant
    with classes in canonical-normal order.
    """

    def __init__(self, space: SpaceSpec, budget: int = DEFAULT_INDEX_BUDGET):
        _budget_check(space, budget, "incidence index")
        self.space = space
        t = space_tables(space.p, space.n)
        self._tables = t
        p = space.p
        blocks = []
        self._dir_offsets = np.empty(len(t.dir_vecs) + 1, dtype=np.int64)
        self._dir_offsets[0] = 0
        for di in range(len(t.dir_vecs)):
            mat = t.line_matrix(di)
            bases = mat.min(axis=0)
            order = np.argsort(bases, kind="stable")
            blocks.append(mat[:, order].T)  # (lines_in_dir, p)
            self._dir_offsets[di + 1] = self._dir_offsets[di] + order.size
        self.line_points = np.vstack(blocks)  # (num_lines, p), unordered within a row
        self._line_base = self.line_points.min(axis=1)
        num_lines, _ = self.line_points.shape
        ids = np.repeat(np.arange(num_lines, dtype=np.int64), p)
        flat = self.line_points.reshape(-1)
        order = np.argsort(flat, kind="stable")
        self._through_ids = ids[order]
        counts = np.bincount(flat, minlength=space.num_points)
        self._through_offsets = np.concatenate(([0], np.cumsum(counts)))

    @property
    def num_lines(self) -> int:
        return int(self.line_points.shape[0])

    def line(self, line_id: int) -> Line:
        di = int(np.searchsorted(self._dir_offsets, line_id, side="right")) - 1
        col = self.line_points[line_id]
        t = self._tables
        # restore traversal order from the unordered point set
        base_idx = int(col.min())
        step = t.successor(di)
        pts = [base_idx]
        for _ in range(self.space.p - 1):
            pts.append(int(step[pts[-1]]))
        return Line(
            base=index_point(self.space, base_idx),
            dir=tuple(int(c) for c in t.dir_vecs[di]),
            points=tuple(pts),
        )

    def lines_through(self, idx: int) -> np.ndarray:
        lo, hi = self._through_offsets[idx], self._through_offsets[idx + 1]
        return self._through_ids[lo:hi]

    def pair_line(self, i: int, j: int) -> int:
        """Id of the unique line through two distinct points."""
        if i == j:
            raise ValueError("a line needs two distinct points")
        space, t = self.space, self._tables
        a = t.coords[i]
        b = t.coords[j]
        d = canonical_direction(space, tuple(int(c) for c in (b - a) % space.p))
        di = t.dir_pos[d]
        step = t.successor(di)
        cur, base = i, i
        for _ in range(space.p - 1):
            cur = int(step[cur])
            base = min(base, cur)
        lo, hi = self._dir_offsets[di], self._dir_offsets[di + 1]
        pos = int(np.searchsorted(self._line_base[lo:hi], base))
        return int(lo + pos)

    def planes_of_line(self, line_id: int) -> tuple[int, ...]:
        """Ids of the p + 1 planes containing a line (n = 3 only)."""
        if self.space.n != 3:
            raise ValueError("plane incidence is defined for n = 3")
        space, t = self.space, self._tables
        ln = self.line(line_id)
        d = np.asarray(ln.dir, dtype=np.int64)
        base = np.asarray(ln.base, dtype=np.int64)
        out = []
        for ci, normal in enumerate(t.dir_vecs):
            if int(normal @ d) % space.p == 0:
                c = int(normal @ base) % space.p
                out.append(ci * space.p + c)
        return tuple(sorted(out))


def build_incidence_index(space: SpaceSpec, budget: int = DEFAULT_INDEX_BUDGET) -> IncidenceIndex:
    return IncidenceIndex(space, budget=budget)


def det_mod(matrix: list[list[int]], p: int) -> int:
    """Determinant of a square integer matrix, reduced mod p."""
    m = [[c % p for c in row] for row in matrix]
    size = len(m)
    det = 1
    for col in range(size):
        piv = next((r for r in range(col, size) if m[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det % p
        det = det * m[col][col] % p
        inv = pow(m[col][col], p - 2, p)
        for r in range(col + 1, size):
            f = m[r][col] * inv % p
            if f:
                for c in range(col, size):
                    m[r][c] = (m[r][c] - f * m[col][c]) % p
    return det % p
