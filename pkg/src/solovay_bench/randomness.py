"""Solovay tests and their transport along Lipschitz real witnesses.

A test is a computable sequence of closed rational intervals S_n = [l_n, r_n]
of length d_n. Given a witness f with constant c, the transformed test is

    T_n = [g(l_n, n) - (c*d_n + 2^-n), g(l_n, n) + (c*d_n + 2^-n)]

where g(q, m) is the machine's result at the constant oracle q with error
below 2^-m. Its measure is at most 4 + 2cL, and every index whose S_n holds
beta has a T_n holding alpha.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .kernel import (
    ZERO,
    Budget,
    FuelExhausted,
    Interval,
    PreconditionError,
    format_rational,
    pow2,
    rat,
)
from .type2 import Status, ToleranceResult, evaluate
from .witnesses import CheckReport, RealName, RWitness, slack

FINITE = "finite-bound"
COMPUTABLE = "computable-measure"


@dataclass(eq=False)
class SolovayTest:
    """``interval(n)`` gives S_n; it may raise FuelExhausted past the produced part.

    ``tail(N)`` bounds the measure of S_N, S_{N+1}, ... and is required for
    tests of computable-measure kind.
    """

    interval: Callable[[int], Interval]
    declared_bound: Fraction
    kind: str = FINITE
    tail: Callable[[int], Fraction] | None = None
    name: str = "S"

    def __post_init__(self):
        self.declared_bound = rat(self.declared_bound)
        if self.kind not in (FINITE, COMPUTABLE):
            raise ValueError(f"unknown test kind {self.kind!r}")
        if self.kind == COMPUTABLE and self.tail is None:
            raise ValueError("a computable-measure test needs a certified tail bound")

    def produced(self, depth: int) -> list[Interval]:
        out = []
        for n in range(depth):
            try:
                out.append(self.interval(n))
            except FuelExhausted:
                break
        return out

    def partial_measure(self, N: int) -> Fraction:
        total = sum((i.measure for i in self.produced(N)), ZERO)
        if total > self.declared_bound:
            raise PreconditionError(
                f"{self.name}: partial measure {total} exceeds declared bound {self.declared_bound}")
        return total


def interval_list_test(intervals: Sequence[Interval], name: str = "S",
                       kind: str = COMPUTABLE) -> SolovayTest:
    """A finite explicit test. Its measure is the exact sum, so it is total."""
    intervals = list(intervals)

    def interval(n):
        if n >= len(intervals):
            raise FuelExhausted(f"{name}: only {len(intervals)} intervals given")
        return intervals[n]

    total = sum((i.measure for i in intervals), ZERO)

    def tail(N):
        return sum((i.measure for i in intervals[N:]), ZERO)

    return SolovayTest(interval, total, kind, tail, name)


def nested_test(center: RealName, ratio: Fraction = Fraction(1, 2), name: str = "S") -> SolovayTest:
    """S_n = [lo_k - r_n, lo_k + r_n] with r_n = ratio^(n+1) around a certified
    lower point lo_k of ``center`` at stage k = n + 4. Total, with geometric tail."""
    ratio = rat(ratio)

    def interval(n):
        r = ratio ** (n + 1)
        x = center.lower_point(n + 4)
        return Interval(max(x - r, ZERO), x + r)

    def tail(N):
        return 2 * ratio ** (N + 1) / (1 - ratio)

    return SolovayTest(interval, tail(0), COMPUTABLE, tail, name)


class EntryState(enum.Enum):
    DEFINED = "defined"
    UNDEFINED = "undefined"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class TEntry:
    n: int
    source: Interval
    center: Fraction | None
    interval: Interval | None
    state: EntryState


@dataclass(eq=False)
class TransformedTest:
    source: SolovayTest
    witness: RWitness
    c: Fraction
    entries: list[TEntry] = field(default_factory=list)
    total: bool = False
    rho: Fraction | None = None

    def interval(self, n: int) -> Interval | None:
        return self.entries[n].interval

    @property
    def undefined(self) -> int:
        return sum(e.state is EntryState.UNDEFINED for e in self.entries)

    @property
    def unknown(self) -> int:
        return sum(e.state is EntryState.UNKNOWN for e in self.entries)

    def partial_measure(self, N: int | None = None) -> Fraction:
        es = self.entries if N is None else self.entries[:N]
        return sum((e.interval.measure for e in es if e.interval is not None), ZERO)

    def source_measure(self, N: int | None = None) -> Fraction:
        es = self.entries if N is None else self.entries[:N]
        return sum((e.source.measure for e in es), ZERO)

    def declared_bound(self) -> Fraction:
        return 4 + 2 * self.c * self.source.declared_bound

    def measure_rows(self) -> list[tuple[int, Fraction, Fraction]]:
        """(N, measure of T_0..T_{N-1}, 4 + 2c * measure of S_0..S_{N-1})."""
        return [(N, self.partial_measure(N), 4 + 2 * self.c * self.source_measure(N))
                for N in range(1, len(self.entries) + 1)]


def tolerance_query_g(w: RWitness, q, m: int, b: Budget) -> ToleranceResult:
    """g(q, m): the witness machine at the constant oracle q with error below 2^-m."""
    return evaluate(w.machine, rat(q), m + 1, b)


def _radius(c, d, n):
    return c * d + pow2(-n)


def _transform(s: SolovayTest, w: RWitness, b: Budget, clip: Fraction | None) -> TransformedTest:
    t = TransformedTest(s, w, w.c, total=clip is not None, rho=clip)
    for n, S in enumerate(s.produced(b.depth)):
        if clip is not None:
            cut = S.clip(ZERO, clip)
            # an interval entirely above rho becomes the degenerate [rho, rho]
            S = cut if cut is not None else Interval(clip, clip)
        r = tolerance_query_g(w, S.lo, n, b)
        if r.ok:
            rad = _radius(w.c, S.measure, n)
            t.entries.append(TEntry(n, S, r.value, Interval(r.value - rad, r.value + rad), EntryState.DEFINED))
        elif r.status is Status.UNDEFINED:
            t.entries.append(TEntry(n, S, None, None, EntryState.UNDEFINED))
        else:
            t.entries.append(TEntry(n, S, None, None, EntryState.UNKNOWN))
    return t


def transform_test(s: SolovayTest, w: RWitness, b: Budget) -> TransformedTest:
    """Transform the first ``b.depth`` intervals of ``s``."""
    return _transform(s, w, b, None)


def transform_total_test(s: SolovayTest, w: RWitness, rho, b: Budget) -> TransformedTest:
    """Clip every S_n to [0, rho] and transform; needs a cl-local witness with bound > rho."""
    rho = rat(rho)
    if w.kind != "cl-local":
        raise PreconditionError("the total transform needs a cl-local witness")
    if not rho < w.bound:
        raise PreconditionError(f"rho = {rho} must lie below the witness bound {w.bound}")
    if s.kind != COMPUTABLE:
        raise PreconditionError("the total transform needs a computable-measure source test")
    return _transform(s, w, b, rho)


def default_rho(beta: RealName, w: RWitness, depth: int) -> Fraction:
    """Midpoint between beta's certified upper bound and the witness bound."""
    hi = beta.upper(depth)
    if hi is None:
        hi = beta.best(depth) + slack(depth)
    if not hi < w.bound:
        raise PreconditionError("beta is not certified below the witness bound")
    return (hi + w.bound) / 2


# -- hits ------------------------------------------------------------------


class Hit(enum.Enum):
    HIT = "hit"
    MISS = "miss"
    UNKNOWN = "unknown"


def certified_hit(I: Interval | None, x: RealName, k: int) -> Hit:
    if I is None:
        return Hit.UNKNOWN
    lo, hi = x.enclosure(k)
    if hi is not None and I.lo <= lo and hi <= I.hi:
        return Hit.HIT
    if lo > I.hi or (hi is not None and hi < I.lo):
        return Hit.MISS
    return Hit.UNKNOWN


@dataclass
class HitReport:
    target: str
    rows: list[tuple[int, Fraction | None, Fraction | None, str, str]]

    @property
    def hits(self) -> int:
        return sum(r[4] == Hit.HIT.value for r in self.rows)

    @property
    def misses(self) -> int:
        return sum(r[4] == Hit.MISS.value for r in self.rows)

    @property
    def unknowns(self) -> int:
        return sum(r[4] == Hit.UNKNOWN.value for r in self.rows)

    def hit_indices(self) -> list[int]:
        return [r[0] for r in self.rows if r[4] == Hit.HIT.value]

    def line(self) -> str:
        return f"{self.target}: hits={self.hits} misses={self.misses} unknowns={self.unknowns}"

    def csv_rows(self) -> list[list[str]]:
        fmt = lambda v: "" if v is None else format_rational(v)
        return [[str(n), fmt(l), fmt(r), d, h] for n, l, r, d, h in self.rows]


def check_fails_on(t: SolovayTest | TransformedTest, x: RealName, b: Budget,
                   widen: Callable[[int], Fraction] | None = None) -> HitReport:
    """Count produced indices whose interval certifiably holds x.

    Intervals are optionally widened by ``widen(n)`` before the test.
    """
    k = b.depth
    rows = []
    if isinstance(t, TransformedTest):
        items = [(e.n, e.interval, e.state.value) for e in t.entries]
    else:
        items = [(n, I, EntryState.DEFINED.value) for n, I in enumerate(t.produced(b.depth))]
    for n, I, state in items:
        J = I.widen(widen(n)) if (I is not None and widen is not None) else I
        h = certified_hit(J, x, k)
        rows.append((n, None if I is None else I.lo, None if I is None else I.hi, state, h.value))
    return HitReport(x.label, rows)


def check_hit_propagation(t: TransformedTest, alpha: RealName, beta: RealName, b: Budget) -> CheckReport:
    """Every index whose S_n certifiably holds beta with l_n < beta has a defined
    T_n holding alpha; T_n is widened by 2^-(n-2) against enclosure error."""
    k = b.depth
    rep = CheckReport(t.witness.name, "hit-propagation")
    for e in t.entries:
        if certified_hit(e.source, beta, k) is not Hit.HIT or beta.below(e.source.lo, k) is not True:
            continue
        if e.state is EntryState.UNKNOWN:
            rep.exhausted += 1
            continue
        rep.samples += 1
        if e.state is EntryState.UNDEFINED:
            rep.violation(f"n={e.n}: beta in S_n but T_n undefined")
            continue
        h = certified_hit(e.interval.widen(slack(e.n)), alpha, k)
        if h is Hit.MISS:
            rep.violation(f"n={e.n}: alpha outside T_n={e.interval}")
        elif h is Hit.UNKNOWN:
            rep.unknowns += 1
    return rep


def check_measure(t: TransformedTest) -> CheckReport:
    """Each defined T_n has measure 2(c*d_n + 2^-n); partial sums stay below
    4 + 2c * source partial sums; a total transform has no undefined entries
    and its partial sums equal 4(1 - 2^-N) + 2c * L_N exactly."""
    rep = CheckReport(t.witness.name, "measure-accounting")
    for e in t.entries:
        rep.samples += 1
        if e.interval is not None and e.interval.measure != 2 * _radius(t.c, e.source.measure, e.n):
            rep.violation(f"n={e.n}: measure {e.interval.measure}")
        if t.total and e.state is EntryState.UNDEFINED:
            rep.violation(f"n={e.n}: undefined entry in a total transform")
        if e.state is EntryState.UNKNOWN:
            rep.exhausted += 1
    for N, m, bound in t.measure_rows():
        if not m <= bound:
            rep.violation(f"N={N}: partial measure {m} above {bound}")
        if t.total and not t.unknown and m != 4 * (1 - pow2(-N)) + 2 * t.c * t.source_measure(N):
            rep.violation(f"N={N}: total partial measure {m} off the closed form")
    return rep


def total_measure_gap(t: TransformedTest) -> tuple[Fraction, Fraction]:
    """(|4 + 2c*L_comp - partial measure|, certified tail 4*2^-N + 2c*tail(N))."""
    N = len(t.entries)
    s = t.source
    L = t.source_measure(N) + (s.tail(N) if s.tail else ZERO)
    limit = 4 + 2 * t.c * L
    tail = 4 * pow2(-N) + 2 * t.c * (s.tail(N) if s.tail else ZERO)
    return abs(limit - t.partial_measure()), tail
