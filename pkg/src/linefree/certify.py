"""Integer-infeasibility certificates for progression-free set sizes.

Given a prime p and a target size T, this module tries to prove that no
subset of F_p^3 of size T avoids full lines, by double counting over the
p^2 + p + 1 parallel classes of planes:

1.  Every plane holds at most M = r_p(plane) points, and a plane holding
    more than r_{p-1}(plane) points contains a line with exactly p - 1
    points (a *rich* line), which forces every plane through that line to
    hold at least L = T + p^2 - p - p*M points.  Plane sizes in the open
    interval (r_{p-1}(plane), L) are therefore impossible.
2.  Each parallel class of p planes partitions the set, so its multiset
    of plane sizes is a *distribution*: allowed sizes summing to T.
3.  Every point pair lies in a common plane in exactly p + 1 classes, so
    the per-class pair counts sum to (p+1)*C(T,2).  Enumerating all ways
    to assign distributions to the p^2+p+1 classes consistent with that
    equation yields finitely many candidates.
4.  A rich line lies in plane sections whose p + 1 sizes are drawn from
    the allowed sizes in [L, M] and sum to (T-(p-1)) + (p+1)(p-1).  When
    the integer null space of those multisets is one-dimensional, the
    resulting weights give a linear functional that vanishes on rich-line
    pencils; bounding per-plane rich-line counts (identity combinations
    and degree counts) turns it into an inequality every candidate must
    satisfy.  Candidates violating it are refuted.

If every candidate is refuted the target is INFEASIBLE: no such set
exists, hence the maximum is < T.  Any surviving candidate, a null space
of the wrong dimension, or an exhausted enumeration budget yields
UNKNOWN.  Certificates carry the full candidate log (or its SHA-256
digest) and can be replayed bit-for-bit.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd, lcm

import numpy as np

from .geometry import is_prime
from .verifier import degree_line_bound, lp_line_bounds

INFEASIBLE = "INFEASIBLE"
UNKNOWN = "UNKNOWN"

#: p -> (r_p(plane), r_{p-1}(plane)): the exact plane maxima the argument
#: consumes.  Values are reproducible via search.max_free_exact(p, 2, k).
DEFAULT_SUBPLANE_TABLE: dict[int, tuple[int, int]] = {
    5: (16, 11),
    7: (36, 29),
}

#: Fixed per-plane-size caps on rich-line counts, kept for bit-exact
#: replay of certificates produced under the paper_faithful convention
#: (the derived combination/degree bounds can be strictly tighter).
PAPER_RICH_CAPS: dict[int, dict[int, int]] = {
    5: {14: 14, 15: 15},
    7: {33: 28, 34: 30, 35: 33},
}

ENGINE_VERSION = 1


class NullSpaceError(ValueError):
    """Raised when the rich-pencil system has no one-dimensional null space."""

    def __init__(self, dimension: int, basis: tuple[tuple[Fraction, ...], ...]):
        self.dimension = dimension
        self.basis = basis
        super().__init__(f"null space has dimension {dimension}, need 1")


@dataclass(frozen=True)
class ExclusionInstance:
    """All derived quantities for one (p, target) infeasibility question."""

    p: int
    target: int
    plane_cap: int  # M = r_p(plane)
    sub_cap: int  # r_{p-1}(plane)

    def __post_init__(self) -> None:
        if not is_prime(self.p) or self.p < 5:
            raise ValueError("p must be a prime >= 5")
        if not 1 <= self.target <= self.p**3:
            raise ValueError("target must be in [1, p^3]")
        if not 0 < self.plane_cap <= self.p**2:
            raise ValueError("plane_cap out of range")
        if not 0 <= self.sub_cap <= self.plane_cap:
            raise ValueError("sub_cap out of range")

    @property
    def num_classes(self) -> int:
        return self.p**2 + self.p + 1

    @property
    def pair_rhs(self) -> int:
        return (self.p + 1) * comb(self.target, 2)

    @property
    def min_plane(self) -> int:
        """Least possible plane size: the other p-1 planes hold <= M each."""
        return max(0, self.target - (self.p - 1) * self.plane_cap)

    @property
    def rich_floor(self) -> int:
        """L: least size of any plane containing a (p-1)-point line."""
        return self.target + self.p**2 - self.p - self.p * self.plane_cap

    @property
    def allowed_sizes(self) -> tuple[int, ...]:
        """Plane sizes not excluded by caps or the rich-line gap, ascending."""
        lo, hi = self.min_plane, self.plane_cap
        gap_lo, gap_hi = self.sub_cap, self.rich_floor  # open interval
        return tuple(
            s for s in range(lo, hi + 1) if not gap_lo < s < gap_hi
        )

    @property
    def rich_pencil_sum(self) -> int:
        """Total size of the p+1 plane sections through a rich line."""
        return (self.target - (self.p - 1)) + (self.p + 1) * (self.p - 1)

    @property
    def rich_sizes(self) -> tuple[int, ...]:
        """Sizes a plane through a rich line may take, descending."""
        return tuple(
            s
            for s in sorted(self.allowed_sizes, reverse=True)
            if s >= self.rich_floor
        )


def make_instance(
    p: int,
    target: int,
    *,
    plane_cap: int | None = None,
    sub_cap: int | None = None,
) -> ExclusionInstance:
    """Build an instance, defaulting the plane maxima from the built-in table."""
    if plane_cap is None or sub_cap is None:
        if p not in DEFAULT_SUBPLANE_TABLE:
            raise ValueError(
                f"no built-in plane maxima for p={p}; pass plane_cap and sub_cap "
                "(they must be the exact plane values for the argument to be sound)"
            )
        d_cap, d_sub = DEFAULT_SUBPLANE_TABLE[p]
        plane_cap = d_cap if plane_cap is None else plane_cap
        sub_cap = d_sub if sub_cap is None else sub_cap
    return ExclusionInstance(p=p, target=target, plane_cap=plane_cap, sub_cap=sub_cap)


def class_distributions(inst: ExclusionInstance) -> tuple[tuple[int, ...], ...]:
    """All multisets of p allowed plane sizes summing to the target.

    Returned as nondecreasing tuples in ascending lexicographic order.
    """
    sizes = inst.allowed_sizes
    p, t = inst.p, inst.target
    out: list[tuple[int, ...]] = []
    stack: list[int] = []

    def rec(start: int, remaining: int, slots: int) -> None:
        if slots == 0:
            if remaining == 0:
                out.append(tuple(stack))
            return
        if remaining > sizes[-1] * slots:
            return
        for i in range(start, len(sizes)):
            s = sizes[i]
            if s * slots > remaining:  # nondecreasing: later slots are >= s
                break
            stack.append(s)
            rec(i, remaining - s, slots - 1)
            stack.pop()

    if sizes:
        rec(0, t, p)
    return tuple(out)


def pair_coefficients(dists: tuple[tuple[int, ...], ...]) -> tuple[int, ...]:
    """Within-class pair count sum_{s in D} C(s,2) per distribution."""
    return tuple(sum(comb(s, 2) for s in d) for d in dists)


def rich_pencil_multisets(inst: ExclusionInstance) -> tuple[tuple[int, ...], ...]:
    """Multisets of p+1 sizes from rich_sizes summing to rich_pencil_sum.

    Nonincreasing tuples, descending lexicographic order.
    """
    sizes = inst.rich_sizes  # descending
    total = inst.rich_pencil_sum
    slots = inst.p + 1
    out: list[tuple[int, ...]] = []
    stack: list[int] = []

    def rec(start: int, remaining: int, k: int) -> None:
        if k == 0:
            if remaining == 0:
                out.append(tuple(stack))
            return
        for i in range(start, len(sizes)):
            s = sizes[i]
            if s * k < remaining:  # nonincreasing: later choices are <= s
                break
            if remaining - s < (k - 1) * sizes[-1]:  # s overshoots
                continue
            stack.append(s)
            rec(i, remaining - s, k - 1)
            stack.pop()

    if sizes:
        rec(0, total, slots)
    return tuple(out)


def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    """Reduced row echelon form over the rationals (in place, returned)."""
    if not rows:
        return rows
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [v * inv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return rows


def null_weights(inst: ExclusionInstance) -> dict[int, int]:
    """Primitive integer weights w(size) vanishing on every rich pencil.

    Solves E w = 0 where E rows are the multiplicity vectors of the rich
    pencil multisets over rich_sizes (descending).  Requires the null
    space to be exactly one-dimensional; the weight of the largest size
    is normalized positive and the vector primitive.

    Raises NullSpaceError otherwise.
    """
    sizes = inst.rich_sizes
    multis = rich_pencil_multisets(inst)
    ncols = len(sizes)
    if ncols == 0:
        raise NullSpaceError(0, ())
    col = {s: j for j, s in enumerate(sizes)}
    rows = []
    for m in multis:
        row = [Fraction(0)] * ncols
        for s in m:
            row[col[s]] += 1
        rows.append(row)
    rref = _rref([r[:] for r in rows])
    pivots = []
    for r in rref:
        nz = next((j for j, v in enumerate(r) if v != 0), None)
        if nz is not None:
            pivots.append(nz)
    free = [j for j in range(ncols) if j not in pivots]
    dim = len(free)
    if dim != 1:
        basis = []
        for f in free:
            vec = [Fraction(0)] * ncols
            vec[f] = Fraction(1)
            for r, pc in zip(rref, pivots):
                vec[pc] = -r[f]
            basis.append(tuple(vec))
        raise NullSpaceError(dim, tuple(basis))
    f = free[0]
    vec = [Fraction(0)] * ncols
    vec[f] = Fraction(1)
    for r, pc in zip(rref, pivots):
        vec[pc] = -r[f]
    den = lcm(*(v.denominator for v in vec))
    ints = [int(v * den) for v in vec]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    ints = [v // (g or 1) for v in ints]
    if ints[0] < 0:
        ints = [-v for v in ints]
    if ints[0] <= 0:
        raise NullSpaceError(1, (tuple(Fraction(v) for v in ints),))
    return dict(zip(sizes, ints))


def rich_count_bounds(
    inst: ExclusionInstance, *, paper_faithful: bool = False
) -> tuple[dict[int, int], dict[int, int], list[str]]:
    """(lower, upper) bounds on rich-line counts per plane size, with notes.

    Lower bounds come from the identity combinations; upper bounds take
    the minimum of the combination bound and the degree-count bound,
    unless paper_faithful selects the fixed cap table (any size missing
    from that table falls back to the derived cap, with a note).
    """
    notes: list[str] = []
    los: dict[int, int] = {}
    caps: dict[int, int] = {}
    table = PAPER_RICH_CAPS.get(inst.p, {})
    for s in inst.rich_sizes:
        lb = lp_line_bounds(inst.p, s)
        los[s] = lb.min
        derived = min(lb.max, degree_line_bound(inst.p, s))
        if paper_faithful:
            if s in table:
                caps[s] = table[s]
                if table[s] != derived:
                    notes.append(
                        f"size {s}: fixed cap {table[s]} vs derived {derived}"
                    )
            else:
                caps[s] = derived
                notes.append(f"size {s}: no fixed cap on record, derived {derived}")
        else:
            caps[s] = derived
    return los, caps, notes


def bound_expressions(
    inst: ExclusionInstance,
    dists: tuple[tuple[int, ...], ...],
    *,
    paper_faithful: bool = False,
) -> dict[int, tuple[int, ...]]:
    """Per-distribution rich-line bound contributions, keyed by plane size.

    For the largest rich size M the entry is lo(M) * multiplicity(M, D)
    (a lower bound on rich lines in that class's M-planes); for every
    other rich size s it is cap(s) * multiplicity(s, D).
    """
    los, caps, _ = rich_count_bounds(inst, paper_faithful=paper_faithful)
    out: dict[int, tuple[int, ...]] = {}
    for s in inst.rich_sizes:
        scale = los[s] if s == inst.plane_cap else caps[s]
        out[s] = tuple(scale * d.count(s) for d in dists)
    return out


def _margin_coefficients(
    inst: ExclusionInstance,
    dists: tuple[tuple[int, ...], ...],
    weights: dict[int, int] | None,
    los: dict[int, int],
    caps: dict[int, int],
) -> np.ndarray:
    """Per-distribution refutation margins.

    With weights w (w[M] > 0, heavier sizes negative): the functional
    sum_s w_s * rich_s is exactly 0, yet is at least
    w_M*lo_M*N_M + sum_{w_s<0} w_s*cap_s*N_s; a candidate with that
    lower bound positive is contradictory.  Without any rich pencil
    (weights None) rich lines cannot exist, so any plane size with a
    positive rich-line lower bound is itself contradictory.
    """
    coeffs = np.zeros(len(dists), dtype=np.int64)
    if weights is None:
        lo_cache = {s: lp_line_bounds(inst.p, s).min for s in inst.allowed_sizes}
        for j, d in enumerate(dists):
            coeffs[j] = sum(lo_cache[s] for s in d)
        return coeffs
    for j, d in enumerate(dists):
        acc = 0
        for s in set(d):
            if s not in weights:
                continue
            w = weights[s]
            mult = d.count(s)
            if s == inst.plane_cap and w > 0:
                acc += w * los[s] * mult
            elif w < 0:
                acc += w * caps[s] * mult
            # sizes with w > 0 other than the cap, or w == 0, contribute
            # their trivial lower bound 0
        coeffs[j] = acc
    return coeffs


def _enumerate_candidates(
    coeffs: tuple[int, ...],
    num_classes: int,
    rhs: int,
    max_candidates: int,
    max_nodes: int = 20_000_000,
) -> tuple[np.ndarray, bool]:
    """Nonnegative integer vectors n with sum(n) = num_classes and
    coeffs . n = rhs, in ascending colexicographic order.

    Returns (array of shape (count, len(coeffs)), truncated_flag); the
    flag is set when enumeration hit max_candidates emitted vectors or
    max_nodes visited search nodes.  Entirely deterministic.
    """
    nd = len(coeffs)
    if nd == 0:
        return np.zeros((1 if (num_classes == 0 and rhs == 0) else 0, 0), dtype=np.int32), False
    prefix_min = [0] * nd
    prefix_max = [0] * nd
    prefix_min[0] = prefix_max[0] = coeffs[0]
    for i in range(1, nd):
        prefix_min[i] = min(prefix_min[i - 1], coeffs[i])
        prefix_max[i] = max(prefix_max[i - 1], coeffs[i])

    rows: list[list[int]] = []
    cur = [0] * nd
    truncated = False
    nodes = 0

    def rec(i: int, classes_left: int, rhs_left: int) -> None:
        nonlocal truncated, nodes
        if truncated:
            return
        nodes += 1
        if nodes > max_nodes:
            truncated = True
            return
        if i == 0:
            if coeffs[0] * classes_left == rhs_left:
                if len(rows) >= max_candidates:
                    truncated = True
                    return
                cur[0] = classes_left
                rows.append(cur[:])
                cur[0] = 0
            return
        lo_rest, hi_rest = prefix_min[i - 1], prefix_max[i - 1]
        for v in range(classes_left + 1):
            rl = rhs_left - coeffs[i] * v
            cl = classes_left - v
            if rl < cl * lo_rest or rl > cl * hi_rest:
                continue
            cur[i] = v
            rec(i - 1, cl, rl)
            cur[i] = 0
            if truncated:
                return

    if nd == 1:
        if coeffs[0] * num_classes == rhs:
            rows.append([num_classes])
    else:
        # outermost index last: ascending values there give colex order
        for top in range(num_classes + 1):
            cur[nd - 1] = top
            rec(nd - 2, num_classes - top, rhs - coeffs[nd - 1] * top)
            cur[nd - 1] = 0
            if truncated:
                break

    arr = np.array(rows, dtype=np.int32).reshape(len(rows), nd)
    return arr, truncated


def _batched_margins(
    candidates: np.ndarray, margin_coeffs: np.ndarray, threads: int | None
) -> np.ndarray:
    """candidates @ margin_coeffs, optionally chunked across threads.

    Chunks are concatenated in index order, so the result is identical
    for every thread count.
    """
    cand64 = candidates.astype(np.int64)
    if not threads or threads <= 1 or cand64.shape[0] < 2:
        return cand64 @ margin_coeffs
    chunks = np.array_split(cand64, min(threads * 4, cand64.shape[0]))
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(lambda c: c @ margin_coeffs, chunks))
    return np.concatenate(parts)


@dataclass(frozen=True)
class Certificate:
    """Outcome of one infeasibility attempt, fully replayable."""

    instance: ExclusionInstance
    verdict: str
    reason: str
    paper_faithful: bool
    max_candidates: int
    max_nodes: int
    distributions: tuple[tuple[int, ...], ...]
    coefficients: tuple[int, ...]
    weights: dict[int, int] | None
    rich_lower: dict[int, int]
    rich_caps: dict[int, int]
    cap_notes: tuple[str, ...]
    candidates: np.ndarray  # (count, ndists) int32, colex ascending
    margins: np.ndarray  # (count,) int64; refuted where > 0
    witness_index: int | None  # first non-refuted candidate, if any

    @property
    def candidate_count(self) -> int:
        return int(self.candidates.shape[0])

    @property
    def refuted_count(self) -> int:
        return int((self.margins > 0).sum())

    @property
    def witness(self) -> tuple[int, ...] | None:
        if self.witness_index is None:
            return None
        return tuple(int(v) for v in self.candidates[self.witness_index])

    @property
    def digest(self) -> str:
        h = hashlib.sha256()
        header = json.dumps(
            {
                "engine": ENGINE_VERSION,
                "p": self.instance.p,
                "target": self.instance.target,
                "plane_cap": self.instance.plane_cap,
                "sub_cap": self.instance.sub_cap,
                "paper_faithful": self.paper_faithful,
                "max_candidates": self.max_candidates,
                "max_nodes": self.max_nodes,
                "verdict": self.verdict,
                "reason": self.reason,
                "distributions": [list(d) for d in self.distributions],
            },
            sort_keys=True,
        ).encode()
        h.update(header)
        h.update(np.ascontiguousarray(self.candidates, dtype=np.int32).tobytes())
        h.update(np.ascontiguousarray(self.margins, dtype=np.int64).tobytes())
        return h.hexdigest()

    def to_dict(self, *, full_log_limit: int = 1000) -> dict:
        d = {
            "engine": ENGINE_VERSION,
            "p": self.instance.p,
            "target": self.instance.target,
            "plane_cap": self.instance.plane_cap,
            "sub_cap": self.instance.sub_cap,
            "min_plane": self.instance.min_plane,
            "rich_floor": self.instance.rich_floor,
            "allowed_sizes": list(self.instance.allowed_sizes),
            "num_classes": self.instance.num_classes,
            "pair_rhs": self.instance.pair_rhs,
            "verdict": self.verdict,
            "reason": self.reason,
            "paper_faithful": self.paper_faithful,
            "max_candidates": self.max_candidates,
            "max_nodes": self.max_nodes,
            "distributions": [list(x) for x in self.distributions],
            "coefficients": list(self.coefficients),
            "weights": None
            if self.weights is None
            else {str(k): v for k, v in sorted(self.weights.items(), reverse=True)},
            "rich_lower": {str(k): v for k, v in sorted(self.rich_lower.items(), reverse=True)},
            "rich_caps": {str(k): v for k, v in sorted(self.rich_caps.items(), reverse=True)},
            "cap_notes": list(self.cap_notes),
            "candidate_count": self.candidate_count,
            "refuted_count": self.refuted_count,
            "witness": None if self.witness is None else list(self.witness),
            "digest": self.digest,
        }
        if self.candidate_count <= full_log_limit:
            d["candidates"] = self.candidates.tolist()
            d["margins"] = self.margins.tolist()
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2, sort_keys=True)

    def render_text(self) -> str:
        inst = self.instance
        lines = [
            f"certify p={inst.p} target={inst.target}: {self.verdict}",
            f"  reason: {self.reason}",
            f"  plane sizes allowed: {list(inst.allowed_sizes)}"
            f" (cap {inst.plane_cap}, rich floor {inst.rich_floor})",
            f"  parallel classes: {inst.num_classes}, pair count target: {inst.pair_rhs}",
            f"  class distributions: {len(self.distributions)}",
        ]
        for d, c in zip(self.distributions, self.coefficients):
            lines.append(f"    {list(d)} pairs={c}")
        if self.weights is not None:
            lines.append(
                "  rich-pencil weights: "
                + ", ".join(f"w[{s}]={w}" for s, w in sorted(self.weights.items(), reverse=True))
            )
            lines.append(
                "  rich-line bounds: "
                + ", ".join(
                    f"{s}:[{self.rich_lower[s]},{self.rich_caps[s]}]"
                    for s in sorted(self.rich_caps, reverse=True)
                )
            )
        lines.append(
            f"  candidates: {self.candidate_count}, refuted: {self.refuted_count}"
        )
        if self.witness is not None:
            lines.append(f"  surviving candidate (class counts per distribution): {list(self.witness)}")
        if self.verdict == INFEASIBLE:
            lines.append(
                f"  conclusion: no {inst.target}-point subset of F_{inst.p}^3 avoids full lines"
            )
        lines.append(f"  digest: {self.digest}")
        return "\n".join(lines)

    def replay(self, *, threads: int | None = None) -> bool:
        """Recompute from the instance and compare logs bit for bit."""
        fresh = prove_infeasible(
            self.instance,
            paper_faithful=self.paper_faithful,
            max_candidates=self.max_candidates,
            max_nodes=self.max_nodes,
            threads=threads,
        )
        return (
            fresh.verdict == self.verdict
            and fresh.reason == self.reason
            and fresh.digest == self.digest
            and np.array_equal(fresh.candidates, self.candidates)
            and np.array_equal(fresh.margins, self.margins)
        )


def _empty_cert(
    inst: ExclusionInstance,
    verdict: str,
    reason: str,
    paper_faithful: bool,
    max_candidates: int,
    max_nodes: int,
    dists: tuple[tuple[int, ...], ...] = (),
    coeffs: tuple[int, ...] = (),
    weights: dict[int, int] | None = None,
    los: dict[int, int] | None = None,
    caps: dict[int, int] | None = None,
    notes: tuple[str, ...] = (),
) -> Certificate:
    return Certificate(
        instance=inst,
        verdict=verdict,
        reason=reason,
        paper_faithful=paper_faithful,
        max_candidates=max_candidates,
        max_nodes=max_nodes,
        distributions=dists,
        coefficients=coeffs,
        weights=weights,
        rich_lower=los or {},
        rich_caps=caps or {},
        cap_notes=notes,
        candidates=np.zeros((0, len(dists)), dtype=np.int32),
        margins=np.zeros(0, dtype=np.int64),
        witness_index=None,
    )


def prove_infeasible(
    inst: ExclusionInstance,
    *,
    paper_faithful: bool = False,
    max_candidates: int = 500_000,
    max_nodes: int = 20_000_000,
    threads: int | None = None,
) -> Certificate:
    """Attempt to prove that no target-sized set avoids full lines.

    Deterministic for fixed arguments; `threads` only parallelizes the
    refutation stage in order-preserving chunks and never changes the
    output.
    """
    p, t = inst.p, inst.target
    if t > p * inst.plane_cap:
        return _empty_cert(
            inst,
            INFEASIBLE,
            f"pigeonhole: target {t} exceeds p * plane_cap = {p * inst.plane_cap}",
            paper_faithful,
            max_candidates,
            max_nodes,
        )

    dists = class_distributions(inst)
    if not dists:
        return _empty_cert(
            inst,
            INFEASIBLE,
            "no multiset of allowed plane sizes attains the target",
            paper_faithful,
            max_candidates,
            max_nodes,
        )
    coeffs = pair_coefficients(dists)

    weights: dict[int, int] | None
    multis = rich_pencil_multisets(inst)
    los, caps, notes = rich_count_bounds(inst, paper_faithful=paper_faithful)
    if multis:
        try:
            weights = null_weights(inst)
        except NullSpaceError as e:
            return _empty_cert(
                inst,
                UNKNOWN,
                f"rich-pencil null space has dimension {e.dimension}, need 1",
                paper_faithful,
                max_candidates,
                max_nodes,
                dists,
                coeffs,
                None,
                los,
                caps,
                tuple(notes),
            )
    else:
        weights = None  # rich lines impossible; margins use raw lower bounds

    margin_coeffs = _margin_coefficients(inst, dists, weights, los, caps)

    candidates, truncated = _enumerate_candidates(
        coeffs, inst.num_classes, inst.pair_rhs, max_candidates, max_nodes
    )
    if truncated:
        return _empty_cert(
            inst,
            UNKNOWN,
            f"enumeration budget exhausted (max_candidates={max_candidates}, "
            f"max_nodes={max_nodes})",
            paper_faithful,
            max_candidates,
            max_nodes,
            dists,
            coeffs,
            weights,
            los,
            caps,
            tuple(notes),
        )

    if candidates.shape[0]:
        check = candidates.astype(np.int64) @ np.asarray(coeffs, dtype=np.int64)
        if not (check == inst.pair_rhs).all():
            raise AssertionError("enumeration produced a vector violating the pair count")
        if not (candidates.sum(axis=1) == inst.num_classes).all():
            raise AssertionError("enumeration produced a vector violating the class count")

    margins = _batched_margins(candidates, margin_coeffs, threads)
    not_refuted = np.flatnonzero(margins <= 0)
    if candidates.shape[0] == 0:
        verdict, reason, widx = (
            INFEASIBLE,
            "no assignment of distributions to classes meets the pair count",
            None,
        )
    elif not_refuted.size == 0:
        verdict, reason, widx = (
            INFEASIBLE,
            "every candidate assignment is refuted by the rich-line inequality",
            None,
        )
    else:
        widx = int(not_refuted[0])
        verdict, reason = UNKNOWN, "a candidate assignment survives all refutations"

    return Certificate(
        instance=inst,
        verdict=verdict,
        reason=reason,
        paper_faithful=paper_faithful,
        max_candidates=max_candidates,
        max_nodes=max_nodes,
        distributions=dists,
        coefficients=coeffs,
        weights=weights,
        rich_lower=los,
        rich_caps=caps,
        cap_notes=tuple(notes),
        candidates=candidates,
        margins=margins,
        witness_index=widx,
    )
