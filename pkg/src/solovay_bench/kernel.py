"""Exact rationals, intervals, budgets and memoized approximation streams.

Everything downstream consumes :class:`fractions.Fraction` values; there is
no floating point anywhere in the package.
"""

from __future__ import annotations

import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import count
from math import gcd
from typing import Callable, Iterable, Iterator, Sequence

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


class WorkbenchError(Exception):
    """Base class for errors raised by the workbench."""


class FuelExhausted(WorkbenchError):
    """A bounded search ran out of fuel. Inconclusive, never a failure."""


class MachineUndefined(WorkbenchError):
    """A machine halted with finite output on the given oracle."""


class ConstructionError(WorkbenchError):
    """A stream or construction violated its defining invariant."""


class PreconditionError(WorkbenchError):
    pass


def pow2(k: int) -> Fraction:
    """2**k as an exact rational, for any integer k."""
    return Fraction(2) ** k


def rat(value) -> Fraction:
    """Coerce ints, Fractions and ``"num/den"`` strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot build an exact rational from {value!r}")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"not an exact rational: {text!r}")
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# -- intervals -------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", rat(self.lo))
        object.__setattr__(self, "hi", rat(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def measure(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "Interval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def disjoint(self, other: "Interval") -> bool:
        return other.hi < self.lo or self.hi < other.lo

    def widen(self, r: Fraction) -> "Interval":
        return Interval(self.lo - r, self.hi + r)

    def clip(self, lo: Fraction, hi: Fraction) -> "Interval | None":
        a, b = max(self.lo, lo), min(self.hi, hi)
        return Interval(a, b) if a <= b else None

    def __str__(self) -> str:
        return f"[{format_rational(self.lo)},{format_rational(self.hi)}]"


def parse_interval(text: str) -> Interval:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ValueError(f"interval must look like [lo,hi]: {text!r}")
    lo, hi = text[1:-1].split(",")
    return Interval(parse_rational(lo), parse_rational(hi))


def interval_measure(i: Interval) -> Fraction:
    return i.hi - i.lo


# -- budgets ---------------------------------------------------------------


@dataclass(frozen=True)
class Budget:
    """Fuel bounds every search; depth is the prefix length N; tolerance_index
    is the default n in a 2^-(n-1) query guarantee."""

    fuel: int = 20_000
    depth: int = 8
    tolerance_index: int = 6

    def __post_init__(self):
        if min(self.fuel, self.depth, self.tolerance_index) < 0:
            raise ValueError("budget fields must be natural numbers")
        if self.fuel < self.depth:
            raise ValueError("fuel must be at least depth")

    def replace(self, **changes) -> "Budget":
        fields = {"fuel": self.fuel, "depth": self.depth,
                  "tolerance_index": self.tolerance_index}
        fields.update(changes)
        return Budget(**fields)

    def meter(self) -> "Meter":
        return Meter(self.fuel)


class Meter:
    """Counts elementary steps against a fuel allowance."""

    __slots__ = ("fuel", "used")

    def __init__(self, fuel: int):
        self.fuel = fuel
        self.used = 0

    def tick(self, steps: int = 1) -> None:
        self.used += steps
        if self.used > self.fuel:
            raise FuelExhausted(f"fuel {self.fuel} exhausted")

    @property
    def remaining(self) -> int:
        return max(self.fuel - self.used, 0)


def unmetered() -> Meter:
    return Meter(10**12)


# -- prefix verdicts -------------------------------------------------------


def validate_effective(prefix: Sequence[Fraction]) -> bool:
    """True iff |q_{n+1} - q_n| < 2^-n for every consecutive pair."""
    if not prefix:
        raise ValueError("prefix must be nonempty")
    return all(abs(prefix[n + 1] - prefix[n]) < pow2(-n) for n in range(len(prefix) - 1))


def limit_bound(prefix: Sequence[Fraction], n: int) -> Interval:
    """Closed enclosure [q_n - 2^-(n-1), q_n + 2^-(n-1)] of the limit."""
    if not 0 <= n < len(prefix):
        raise IndexError(f"index {n} outside prefix of length {len(prefix)}")
    r = pow2(-(n - 1))
    return Interval(prefix[n] - r, prefix[n] + r)


def is_leftce_prefix(prefix: Sequence[Fraction]) -> bool:
    if not prefix:
        raise ValueError("prefix must be nonempty")
    if any(not (0 <= q < 1) for q in prefix):
        return False
    return all(a < b for a, b in zip(prefix, prefix[1:]))


# -- memoized streams ------------------------------------------------------


class _MemoStream:
    """Total generator index -> Fraction with a lock-protected prefix cache."""

    def __init__(self, generator: Callable[[int], Fraction], label: str = ""):
        self._generator = generator
        self._cache: list[Fraction] = []
        self._lock = threading.Lock()
        self.label = label

    def _check_extension(self, prev: Fraction | None, value: Fraction, n: int) -> None:
        raise NotImplementedError

    def __getitem__(self, n: int) -> Fraction:
        if n < 0:
            raise IndexError("stream indices are natural numbers")
        cache = self._cache
        if n < len(cache):
            return cache[n]
        with self._lock:
            while len(cache) <= n:
                k = len(cache)
                value = rat(self._generator(k))
                self._check_extension(cache[-1] if cache else None, value, k)
                cache.append(value)
        return cache[n]

    def prefix(self, length: int) -> list[Fraction]:
        if length > 0:
            self[length - 1]
        return list(self._cache[:length])

    @property
    def produced(self) -> int:
        return len(self._cache)


class EffectiveApprox(_MemoStream):
    """A rational stream with |q_n - q_{n+1}| < 2^-n, naming its limit."""

    def _check_extension(self, prev, value, n):
        if not 0 <= value < 1:
            raise ConstructionError(f"{self.label or 'approximation'}: q_{n}={value} outside [0,1)")
        if prev is not None and not abs(value - prev) < pow2(-(n - 1)):
            raise ConstructionError(
                f"{self.label or 'approximation'}: |q_{n} - q_{n-1}| >= 2^-{n-1}")

    def enclosure(self, n: int) -> Interval:
        r = pow2(-(n - 1))
        q = self[n]
        return Interval(q - r, q + r)


class ConstantApprox(EffectiveApprox):
    """The oracle (q, q, q, ...). Its enclosure is the exact point."""

    def __init__(self, q: Fraction):
        q = rat(q)
        super().__init__(lambda _n: q, label=f"const {q}")
        self.value = q

    def _check_extension(self, prev, value, n):
        pass

    def enclosure(self, n: int) -> Interval:
        return Interval(self.value, self.value)


class LeftCEApprox(_MemoStream):
    """A strictly increasing rational stream in [0,1)."""

    def _check_extension(self, prev, value, n):
        if not 0 <= value < 1:
            raise ConstructionError(f"{self.label or 'left-c.e. stream'}: a_{n}={value} outside [0,1)")
        if prev is not None and not prev < value:
            raise ConstructionError(f"{self.label or 'left-c.e. stream'}: a_{n} does not increase")

    def first_at_least(self, q: Fraction, meter: Meter) -> int:
        """min{m : a_m >= q}; costs m+1 steps, as if scanned from the start."""
        return self._first(q, meter, bisect_left, lambda v: v >= q)

    def first_above(self, q: Fraction, meter: Meter) -> int:
        """min{m : a_m > q}; costs m+1 steps, as if scanned from the start."""
        return self._first(q, meter, bisect_right, lambda v: v > q)

    def _first(self, q, meter, bisect, hit):
        cache = self._cache
        if cache and hit(cache[-1]):
            m = bisect(cache, q)
            meter.tick(m + 1)
            return m
        m = len(cache)
        meter.tick(m)
        while True:
            meter.tick()
            if hit(self[m]):
                return m
            m += 1


def geometric_leftce(target: Fraction, ratio: Fraction = Fraction(1, 2),
                     label: str = "") -> LeftCEApprox:
    """a_n = target * (1 - ratio^n): starts at 0 and increases to target."""
    target, ratio = rat(target), rat(ratio)
    if not (0 < target <= 1 and 0 < ratio < 1):
        raise ValueError("need 0 < target <= 1 and 0 < ratio < 1")
    return LeftCEApprox(lambda n: target * (1 - ratio**n), label=label)


def table_leftce(values: Iterable[Fraction], label: str = "") -> LeftCEApprox:
    """A finite stream; reading past the end raises FuelExhausted."""
    values = [rat(v) for v in values]

    def gen(n):
        if n >= len(values):
            raise FuelExhausted(f"{label or 'table stream'}: only {len(values)} terms given")
        return values[n]

    return LeftCEApprox(gen, label=label)


# -- canonical enumerations ------------------------------------------------


def canonical_rationals() -> Iterator[Fraction]:
    """0, 1/2, 1/3, 2/3, 1/4, 3/4, ...: by denominator, then numerator."""
    yield ZERO
    for den in count(2):
        for num in range(1, den):
            if gcd(num, den) == 1:
                yield Fraction(num, den)


def canonical_rational(i: int) -> Fraction:
    """The i-th canonical rational, 1-indexed (q_1 = 0, q_2 = 1/2, q_3 = 1/3)."""
    if i < 1:
        raise IndexError("canonical enumeration is 1-indexed")
    for k, q in enumerate(canonical_rationals(), start=1):
        if k == i:
            return q
    raise AssertionError("unreachable")


def canonical_upto(den: int) -> list[Fraction]:
    """All canonical rationals with denominator at most ``den``, in order."""
    out = [ZERO]
    for d in range(2, den + 1):
        out.extend(Fraction(n, d) for n in range(1, d) if gcd(n, d) == 1)
    return out


def dyadic_rationals() -> Iterator[Fraction]:
    """0, 1/2, 1/4, 3/4, 1/8, 3/8, ...: by level, then numerator."""
    yield ZERO
    for level in count(1):
        den = 1 << level
        for num in range(1, den, 2):
            yield Fraction(num, den)


# -- text formats ----------------------------------------------------------


def prefix_to_csv(prefix: Sequence[Fraction]) -> str:
    lines = ["index,value"]
    lines.extend(f"{i},{format_rational(q)}" for i, q in enumerate(prefix))
    return "\n".join(lines) + "\n"


def prefix_from_csv(text: str) -> list[Fraction]:
    rows = [r for r in text.splitlines() if r.strip()]
    if rows and rows[0].startswith("index"):
        rows = rows[1:]
    out = []
    for expected, row in enumerate(rows):
        idx, value = row.split(",")
        if int(idx) != expected:
            raise ValueError(f"row {expected}: index {idx} out of order")
        out.append(parse_rational(value))
    return out
