"""Closed-form and computed bounds on the maximum size of k-progression-free sets.

All integer bounds are exact.  Bounds involving square roots are carried
as integer triples (a - sqrt(radicand)) / den and rendered with directed
rounding: upper bounds round up, lower-bound rates round down, so every
printed digit string is itself a valid bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, isqrt
from typing import NamedTuple

from .geometry import is_prime


def _require_prime(p: int) -> None:
    if not is_prime(p) or p < 3:
        raise ValueError(f"p must be an odd prime, got {p}")


def _milli_str(milli: int) -> str:
    sign = "-" if milli < 0 else ""
    m = abs(milli)
    return f"{sign}{m // 1000}.{m % 1000:03d}"


@dataclass(frozen=True)
class RootExpression:
    """The exact real number (a - sqrt(radicand)) / den, den > 0."""

    a: int
    radicand: int
    den: int

    def __post_init__(self) -> None:
        if self.den <= 0 or self.radicand < 0:
            raise ValueError("need den > 0 and radicand >= 0")

    def scaled_floor(self, scale: int) -> tuple[int, bool]:
        """(floor(scale * value), value*scale is an exact integer)."""
        q = scale * self.a
        rr = scale * scale * self.radicand
        s = isqrt(rr)
        if s * s == rr:
            m = q - s
            return m // self.den, m % self.den == 0
        m = q - s  # scale*value lies in the open interval ((m-1)/den, m/den)
        return (m - 1) // self.den, False

    @property
    def floor(self) -> int:
        return self.scaled_floor(1)[0]

    def decimal_up(self, places: int = 3) -> str:
        scale = 10**places
        fl, exact = self.scaled_floor(scale)
        n = fl if exact else fl + 1
        sign = "-" if n < 0 else ""
        n = abs(n)
        return f"{sign}{n // scale}.{n % scale:0{places}d}"

class SimpleBounds(NamedTuple):
    ap: int
    sziklai: int


def upper_simple(p: int, n: int) -> SimpleBounds:
    """Two classical upper bounds for sets with no full line.

    ap: the complement must meet every line, and a minimal line-blocking
    set has (p^n - 1)/(p - 1) points.  sziklai: a stronger blocking-set
    bound, p^n - 2p^(n-1) + 1.
    """
    _require_prime(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    pn = p**n
    return SimpleBounds(pn - (pn - 1) // (p - 1), pn - 2 * p ** (n - 1) + 1)


@dataclass(frozen=True)
class RecursiveBound:
    """Upper bound on r_k(F_p^(n+1)) from r_k(F_p^n) <= r.

    Counting (point pair, hyperplane) incidences two ways pins the next
    dimension's maximum below the smaller root of a quadratic:
    (a - sqrt(radicand)) / den with a = 2(p^(n+1)-1)r + p^n,
    radicand = 4(p^(n+1)-1)r(p^n-r) + p^(2n), den = 2p^n.
    """

    p: int
    n: int
    k: int
    r: int
    expr: RootExpression

    @property
    def floor(self) -> int:
        return self.expr.floor

    @property
    def decimal_up(self) -> str:
        return self.expr.decimal_up(3)

    @property
    def pair_incidences(self) -> int:
        """(pair, hyperplane) incidence count s at the floor value."""
        return (self.p**self.n - 1) // (self.p - 1) * comb(self.floor, 2)


def upper_recursive(p: int, n: int, k: int, r: int) -> RecursiveBound:
    """Bound r_k(F_p^(n+1)) given r_k(F_p^n) <= r."""
    _require_prime(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 3 <= k <= p:
        raise ValueError(f"k must be in [3, p], got {k}")
    pn = p**n
    if not 0 <= r <= pn:
        raise ValueError(f"r must be in [0, p^n] = [0, {pn}], got {r}")
    big = p ** (n + 1) - 1
    a = 2 * big * r + pn
    radicand = 4 * big * r * (pn - r) + pn * pn
    return RecursiveBound(p=p, n=n, k=k, r=r, expr=RootExpression(a, radicand, 2 * pn))


def cubic_displayed_radicand(p: int) -> int:
    """The radicand printed in the three-dimensional corollary."""
    return (
        8 * p**6 - 20 * p**5 + 17 * p**4 - 12 * p**3 + 20 * p**2 - 16 * p + 4
    )


@dataclass(frozen=True)
class CubicBound:
    """Upper bound for r_p(F_p^3): exact root form and a relaxation.

    exact: the recursive bound seeded with r_p(F_p^2) = (p-1)^2, whose
    radicand algebraically equals cubic_displayed_radicand(p).
    simplified: p^3 - 2p^2 - (sqrt(2)-1)p + 2, always >= exact for p >= 3.
    """

    p: int
    exact: RecursiveBound

    @property
    def simplified_scaled_floor(self) -> int:
        # value = C - p*sqrt(2) with C = p^3 - 2p^2 + p + 2, at scale 1000
        scale = 1000
        c = self.p**3 - 2 * self.p**2 + self.p + 2
        s = isqrt(2 * (self.p * scale) ** 2)  # floor(scale * p * sqrt(2)), never exact
        return c * scale - s - 1

    @property
    def simplified_decimal_up(self) -> str:
        # sqrt(2) is irrational so the scaled value is never an integer
        return _milli_str(self.simplified_scaled_floor + 1)

    @property
    def simplified_floor(self) -> int:
        return self.simplified_scaled_floor // 1000

    def exact_below_simplified(self) -> bool:
        """Check exact <= simplified via non-overlapping scaled brackets."""
        scale = 1 << 61
        ex_hi = self.exact.expr.scaled_floor(scale)[0] + 1
        c = self.p**3 - 2 * self.p**2 + self.p + 2
        simp_lo = c * scale - isqrt(2 * (self.p * scale) ** 2) - 1
        return ex_hi <= simp_lo


def upper_cubic(p: int) -> CubicBound:
    _require_prime(p)
    exact = upper_recursive(p, 2, p, (p - 1) ** 2)
    displayed = cubic_displayed_radicand(p)
    if exact.expr.radicand != displayed:
        raise AssertionError("cubic radicand mismatch; algebra drifted")
    return CubicBound(p=p, exact=exact)


def hypercube_size(p: int, n: int) -> int:
    return (p - 1) ** n


def layered_size(p: int, n: int) -> int:
    if n < 3:
        raise ValueError("layered sizes need n >= 3")
    return (p - 1) ** n + (n - 2) * (p - 1) * (p - 2) ** (n - 3) // 2


def sqrt_size(p: int) -> int:
    k = isqrt(p)
    t = p // k
    return (p - 2) * (p - 1) ** 2 + p * p - p + 1 - k - t


def qr_size(p: int) -> int:
    """Size of the quadratic-residue set: (p-1)^3 + (p-1), except p = 7
    where two removal families coincide and the set is 9 points larger
    than (p-1)^3."""
    if p % 24 != 7:
        raise ValueError("needs p = 7 (mod 24)")
    if p == 7:
        return 225
    return (p - 1) ** 3 + (p - 1)


REFERENCE_SIZES = {("fig70", 5, 3): 70}


@dataclass(frozen=True)
class LowerEntry:
    name: str
    size: int
    note: str
    backed: bool  # True when an actual set was materialized and measured


_MATERIALIZE_CAP = 1 << 18


def lower_closed_forms(p: int, n: int) -> dict[str, LowerEntry]:
    """Construction-backed lower bounds applicable at (p, n).

    Sets are materialized and measured when p^n is small enough;
    otherwise the closed-form size is reported with backed=False.
    """
    _require_prime(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    out: dict[str, LowerEntry] = {}
    small = p**n <= _MATERIALIZE_CAP

    def backed_size(builder, formula: int, name: str, note: str) -> LowerEntry:
        if small:
            s = builder()
            if s.size != formula:
                raise AssertionError(
                    f"{name} size {s.size} differs from closed form {formula}"
                )
            return LowerEntry(name, s.size, note, True)
        return LowerEntry(name, formula, note + " (closed form; set not materialized)", False)

    from . import constructions as cons  # local import to keep layering one-way

    out["hypercube"] = backed_size(
        lambda: cons.hypercube(p, n), hypercube_size(p, n), "hypercube", f"(p-1)^{n}"
    )
    if n >= 3:
        out["layered"] = backed_size(
            lambda: cons.layered(p, n),
            layered_size(p, n),
            "layered",
            f"(p-1)^{n} + ({n}-2)/2*(p-1)*(p-2)^{n - 3}",
        )
    if n == 3 and p >= 5:
        k, t = isqrt(p), p // isqrt(p)
        out["sqrt"] = backed_size(
            lambda: cons.sqrt_construction(p),
            sqrt_size(p),
            "sqrt",
            f"(p-2)(p-1)^2 + p^2 - p + 1 - {k} - {t}",
        )
    if n == 3 and p % 24 == 7:
        out["qr"] = backed_size(
            lambda: cons.qr_construction(p),
            qr_size(p),
            "qr",
            "(p-1)^3 + (p-1)" + (" + (p-1)/2, coinciding removals" if p == 7 else ""),
        )
    if (p, n) == (5, 3):
        ref = cons.load_reference_set("fig70")
        out["reference-set"] = LowerEntry(
            "reference-set", ref.size, "bundled 70-point set", True
        )
    if n >= 2:
        size, note = _best_product_split(p, n)
        if size is not None:
            out["product"] = LowerEntry("product", size, note, False)
    return out


def _best_single(p: int, n: int) -> tuple[int, str]:
    best, name = hypercube_size(p, n), f"hypercube({p},{n})"
    if n >= 3:
        s = layered_size(p, n)
        if s > best:
            best, name = s, f"layered({p},{n})"
    if n == 3 and p >= 5:
        s = sqrt_size(p)
        if s > best:
            best, name = s, f"sqrt({p})"
    if n == 3 and p % 24 == 7:
        s = qr_size(p)
        if s > best:
            best, name = s, f"qr({p})"
    if (p, n) == (5, 3):
        s = REFERENCE_SIZES[("fig70", 5, 3)]
        if s > best:
            best, name = s, "fig70"
    return best, name


def best_lower(p: int, n: int) -> tuple[int, str]:
    """Best known lower bound, allowing products of smaller-dimension sets."""
    best: dict[int, tuple[int, str]] = {}
    for m in range(1, n + 1):
        b, name = _best_single(p, m)
        for m1 in range(1, m // 2 + 1):
            s = best[m1][0] * best[m - m1][0]
            if s > b:
                b, name = s, f"{best[m1][1]} x {best[m - m1][1]}"
        best[m] = (b, name)
    return best[n]


def _best_product_split(p: int, n: int) -> tuple[int | None, str]:
    """Best product of strictly smaller-dimension sets, if it beats nothing
    it is still reported for transparency; None when n < 2."""
    if n < 2:
        return None, ""
    best_val, best_note = None, ""
    for m1 in range(1, n // 2 + 1):
        a, na = best_lower(p, m1)
        b, nb = best_lower(p, n - m1)
        if best_val is None or a * b > best_val:
            best_val, best_note = a * b, f"{na} x {nb}"
    return best_val, best_note


@dataclass(frozen=True)
class Rate:
    """A lower bound on the growth rate alpha_p, truncated to 3 decimals."""

    name: str
    milli: int
    note: str = ""

    @property
    def display(self) -> str:
        return _milli_str(self.milli)


def _trunc_nth_root_milli(value: int, n: int, scale: int = 1000) -> int:
    """Largest N with (N/scale)^n <= value, i.e. trunc(value^(1/n)*scale)."""
    if value < 0 or n < 1:
        raise ValueError("need value >= 0 and n >= 1")
    target = value * scale**n
    est = int(round(target ** (1.0 / n)))
    while est**n > target:
        est -= 1
    while (est + 1) ** n <= target:
        est += 1
    return est


def alpha_from_set(size: int, n: int) -> Rate:
    """size^(1/n), truncated to 3 decimals: a valid growth-rate lower bound."""
    if size < 1 or n < 1:
        raise ValueError("need size >= 1 and n >= 1")
    return Rate(
        name=f"set({size},{n})",
        milli=_trunc_nth_root_milli(size, n),
        note=f"{size}^(1/{n}), truncated",
    )


def alpha_fgr(p: int) -> Rate:
    """The general-p rate p^(1/2p) * (p-1)^((2p-1)/2p), truncated.

    Valid only as a bound for dimensions >= 2p.
    """
    _require_prime(p)
    n = 2 * p
    value = p * (p - 1) ** (2 * p - 1)
    return Rate(
        name=f"fgr({p})",
        milli=_trunc_nth_root_milli(value, n),
        note="valid for dimensions >= 2p",
    )


@dataclass(frozen=True)
class Table1Entry:
    p: int
    n: int
    milli: int
    dominated: bool

    @property
    def display(self) -> str:
        return _milli_str(self.milli)


@dataclass(frozen=True)
class RateTable:
    ps: tuple[int, ...]
    ns: tuple[int, ...]
    entries: dict[tuple[int, int], Table1Entry]
    fgr: dict[int, Rate]

    def entry(self, p: int, n: int) -> Table1Entry:
        return self.entries[(p, n)]


def table1(ps: tuple[int, ...] = (5, 7, 11, 13, 17), ns: tuple[int, ...] = (3, 4, 5, 6, 7)) -> RateTable:
    """Layered-construction rates per (p, n), plus the general-p row.

    An entry is flagged dominated when some smaller listed dimension
    achieves a rate at least as large (exact comparison of true rates:
    size(n')^n >= size(n)^(n'), not of the truncated displays).
    """
    entries: dict[tuple[int, int], Table1Entry] = {}
    for p in ps:
        sizes = {n: layered_size(p, n) for n in ns}
        for n in ns:
            dominated = any(
                sizes[m] ** n >= sizes[n] ** m for m in ns if m < n
            )
            entries[(p, n)] = Table1Entry(
                p=p, n=n, milli=_trunc_nth_root_milli(sizes[n], n), dominated=dominated
            )
    return RateTable(
        ps=tuple(ps), ns=tuple(ns), entries=entries, fgr={p: alpha_fgr(p) for p in ps}
    )


@dataclass(frozen=True)
class CertifiedResult:
    """Outcome of descending infeasibility certification from a start size."""

    value: int | None
    trace: tuple[tuple[int, str], ...]  # (target, verdict) in the order tried


def certified_upper(
    p: int,
    start: int,
    *,
    max_steps: int = 3,
    paper_faithful: bool = False,
    max_candidates: int = 500_000,
    max_nodes: int = 20_000_000,
    threads: int | None = None,
) -> CertifiedResult:
    """Largest certified bound obtainable by refuting sizes downward.

    Tries T = start, start-1, ... while the certificate engine returns
    INFEASIBLE (each refutation proves the maximum is < T); stops at the
    first UNKNOWN or after max_steps attempts.  Deterministic for fixed
    arguments.
    """
    from . import certify as ct  # deferred: certify imports verifier only

    trace: list[tuple[int, str]] = []
    value: int | None = None
    t = start
    for _ in range(max_steps):
        cert = ct.prove_infeasible(
            ct.make_instance(p, t),
            paper_faithful=paper_faithful,
            max_candidates=max_candidates,
            max_nodes=max_nodes,
            threads=threads,
        )
        trace.append((t, cert.verdict))
        if cert.verdict != ct.INFEASIBLE:
            break
        value = t - 1
        t -= 1
    return CertifiedResult(value=value, trace=tuple(trace))


@dataclass(frozen=True)
class BoundsReport:
    p: int
    n: int
    k: int
    lower: dict[str, LowerEntry]
    upper: dict[str, int]
    upper_real: dict[str, str]
    rates: tuple[Rate, ...]
    notes: tuple[str, ...]

    @property
    def best_lower(self) -> int:
        return max(e.size for e in self.lower.values())

    @property
    def best_upper(self) -> int:
        return min(self.upper.values())

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "n": self.n,
            "k": self.k,
            "lower": {name: e.size for name, e in self.lower.items()},
            "lower_notes": {name: e.note for name, e in self.lower.items()},
            "upper": dict(self.upper),
            "upper_real": dict(self.upper_real),
            "interval": [self.best_lower, self.best_upper],
            "rates": [
                {"name": r.name, "display": r.display, "milli": r.milli, "note": r.note}
                for r in self.rates
            ],
            "notes": list(self.notes),
        }


def bounds_report(
    p: int,
    n: int,
    k: int | None = None,
    *,
    include_certified: bool = True,
    certify_steps: int = 2,
    paper_faithful: bool = False,
    threads: int | None = None,
) -> BoundsReport:
    """Assemble lower and upper bounds for r_k(F_p^n).

    For k = p: constructions give lower bounds; blocking-set, recursive,
    cubic, and (for n = 3, p in the certificate table) certified bounds
    give upper bounds.  For k < p: the box (k-1)^n and product splits
    give lower bounds; the recursive chain from the exact one-dimensional
    value gives the upper bound.
    """
    _require_prime(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    if k is None:
        k = p
    if not 3 <= k <= p:
        raise ValueError(f"k must be in [3, p], got {k}")

    notes: list[str] = []
    upper: dict[str, int] = {}
    upper_real: dict[str, str] = {}
    rates: list[Rate] = []

    if k == p:
        lower = lower_closed_forms(p, n)
        ap, szik = upper_simple(p, n)
        upper["ap"] = ap
        upper["sziklai"] = szik
        if n >= 2:
            # chain the recursive bound up from the exact value (p-1)^2 at n=2
            r: int = (p - 1) ** 2 if n >= 2 else p - 1
            if n == 2:
                upper["exact"] = r
                notes.append("r_p of the plane is exactly (p-1)^2")
            dim = 2
            last: RecursiveBound | None = None
            while dim < n:
                last = upper_recursive(p, dim, k, r)
                r = last.floor
                dim += 1
            if last is not None:
                upper["recursive"] = last.floor
                upper_real["recursive"] = last.decimal_up
                notes.append(
                    f"recursive chain from r_p(plane) = {(p - 1) ** 2}; "
                    f"pair-plane incidence count s = {last.pair_incidences} at the floor"
                )
        if n == 3:
            cb = upper_cubic(p)
            upper["cubic"] = cb.exact.floor
            upper_real["cubic"] = cb.exact.decimal_up
            upper_real["cubic_simplified"] = cb.simplified_decimal_up
        if include_certified and n == 3:
            from . import certify as ct

            if p in ct.DEFAULT_SUBPLANE_TABLE:
                start = min(upper.values())
                res = certified_upper(
                    p,
                    start,
                    max_steps=certify_steps,
                    paper_faithful=paper_faithful,
                    threads=threads,
                )
                for t, verdict in res.trace:
                    notes.append(f"certify target {t}: {verdict}")
                if res.value is not None:
                    upper["certified"] = res.value
        best = max(e.size for e in lower.values())
        rates.append(alpha_from_set(best, n))
        rates.append(alpha_fgr(p))
    else:
        from .search import one_dim_cap

        base = one_dim_cap(p, k)
        lower_entries: dict[str, LowerEntry] = {
            "box": LowerEntry("box", (k - 1) ** n, f"(k-1)^{n}", False)
        }
        if n == 1:
            lower_entries["exact"] = LowerEntry("exact", base, "exact 1-d maximum", True)
            upper["exact"] = base
        else:
            r = base
            last = None
            for dim in range(1, n):
                last = upper_recursive(p, dim, k, r)
                r = last.floor
            upper["recursive"] = last.floor
            upper_real["recursive"] = last.decimal_up
            notes.append(f"recursive chain from exact 1-d value r_{k} = {base}")
            if base > k - 1:
                lower_entries["cyclic-product"] = LowerEntry(
                    "cyclic-product", base**n, f"{base}^{n} from the 1-d maximum", False
                )
        lower = lower_entries

    report = BoundsReport(
        p=p,
        n=n,
        k=k,
        lower=lower,
        upper=upper,
        upper_real=upper_real,
        rates=tuple(rates),
        notes=tuple(notes),
    )
    if report.best_lower > report.best_upper:
        raise AssertionError(
            f"bound inversion at (p={p}, n={n}, k={k}): "
            f"lower {report.best_lower} > upper {report.best_upper}"
        )
    return report
