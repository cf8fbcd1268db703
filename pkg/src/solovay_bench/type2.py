"""Real functions evaluated on rational-stream oracles.

Index convention: the n-th output of a machine is reported with the guarantee
|f(x) - out_n| < 2^-(n-1). Every builtin actually delivers error < 2^-(n+1),
so consecutive outputs differ by less than 2^-n and the output stream is
itself an effective approximation.
"""

from __future__ import annotations

import enum
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .kernel import (
    Budget,
    ConstantApprox,
    FuelExhausted,
    Interval,
    LeftCEApprox,
    MachineUndefined,
    Meter,
    PreconditionError,
    pow2,
    rat,
)


class Status(enum.Enum):
    OK = "ok"
    FUEL_EXHAUSTED = "fuel-exhausted"
    UNDEFINED = "machine-undefined"


@dataclass(frozen=True)
class ToleranceResult:
    value: Fraction | None
    tolerance_index: int
    status: Status
    fuel_used: int = 0

    @property
    def ok(self) -> bool:
        return self.status is Status.OK

    @property
    def guarantee(self) -> Fraction:
        return pow2(-(self.tolerance_index - 1))


class NeedMoreOracle(Exception):
    """Raised by :meth:`RFunctionMachine.step` when the prefix is too short."""


class _PrefixOracle:
    def __init__(self, prefix: Sequence[Fraction]):
        self._prefix = list(prefix)

    def __getitem__(self, k):
        if k >= len(self._prefix):
            raise NeedMoreOracle(k)
        return self._prefix[k]

    def enclosure(self, k):
        r = pow2(-(k - 1))
        return Interval(self[k] - r, self[k] + r)


class RFunctionMachine:
    """Base class. Subclasses implement :meth:`output`."""

    lipschitz: Fraction | None = None
    nondecreasing: bool = False
    name: str = "machine"

    def output(self, oracle, n: int, meter: Meter) -> Fraction:
        """The n-th output on ``oracle``; may raise FuelExhausted/MachineUndefined."""
        raise NotImplementedError

    def fuel_hint(self, n: int) -> int:
        """Known extra fuel output n may need beyond a small search allowance."""
        return 0

    def step(self, oracle_prefix: Sequence[Fraction], n: int, fuel: int = 100_000):
        """Output n computed from a finite oracle prefix.

        Returns the rational, or raises :class:`NeedMoreOracle` when the
        prefix is too short and :class:`MachineUndefined` when the machine
        halts with finite output.
        """
        return self.output(_PrefixOracle(oracle_prefix), n, Meter(fuel))

    def outputs(self, oracle, count: int, budget: Budget) -> list[Fraction]:
        meter = budget.meter()
        return [self.output(oracle, n, meter) for n in range(count)]

    def __repr__(self):
        return f"<{self.name}>"


class RangeMachine(RFunctionMachine):
    """A machine for a function whose exact range over a rational interval
    is computable. Outputs refine the oracle enclosure until the range is
    narrower than 2^-(n+1) and return its midpoint."""

    def enclose(self, lo: Fraction, hi: Fraction, meter: Meter) -> tuple[Fraction, Fraction]:
        """(min, max) of f over [lo, hi]. Raise MachineUndefined when the whole
        interval lies outside the domain, or _Straddle when only part does."""
        raise NotImplementedError

    def output(self, oracle, n, meter):
        target = pow2(-(n + 1))
        k = max(n, 0)
        while True:
            meter.tick()
            box = oracle.enclosure(k)
            try:
                lo, hi = self.enclose(box.lo, box.hi, meter)
            except _Straddle:
                k += 1
                continue
            if hi - lo < target:
                return (lo + hi) / 2
            k += 1

    def value_at(self, x: Fraction, meter: Meter | None = None) -> Fraction:
        """Exact f(x) for rational x in the domain."""
        lo, hi = self.enclose(x, x, meter or Meter(10**9))
        assert lo == hi
        return lo


class _Straddle(Exception):
    pass


class ConstantMachine(RangeMachine):
    nondecreasing = True

    def __init__(self, r):
        self.r = rat(r)
        self.lipschitz = Fraction(0)
        self.name = f"constant {self.r}"

    def enclose(self, lo, hi, meter):
        return self.r, self.r


class AffineMachine(RangeMachine):
    """x -> p + s*x."""

    def __init__(self, p, s):
        self.p, self.s = rat(p), rat(s)
        self.lipschitz = abs(self.s)
        self.nondecreasing = self.s >= 0
        self.name = f"affine {self.p}+{self.s}x"

    def enclose(self, lo, hi, meter):
        a, b = self.p + self.s * lo, self.p + self.s * hi
        return (a, b) if a <= b else (b, a)


def identity_machine() -> AffineMachine:
    m = AffineMachine(0, 1)
    m.name = "identity"
    return m


class LogisticMachine(RangeMachine):
    """x -> 4x(1-x); rises on [0,1/2] and falls after."""

    name = "logistic 4x(1-x)"
    lipschitz = Fraction(4)

    @staticmethod
    def f(x):
        return 4 * x * (1 - x)

    def enclose(self, lo, hi, meter):
        pts = [self.f(lo), self.f(hi)]
        if lo <= Fraction(1, 2) <= hi:
            pts.append(Fraction(1))
        return min(pts), max(pts)


def _pl_value(xs: Sequence[Fraction], ys: Sequence[Fraction], x: Fraction) -> Fraction:
    """Interpolate the table at x with xs[0] <= x <= xs[-1]."""
    i = bisect_right(xs, x) - 1
    if i >= len(xs) - 1:
        return ys[-1]
    x0, x1 = xs[i], xs[i + 1]
    return ys[i] + (x - x0) / (x1 - x0) * (ys[i + 1] - ys[i])


class PiecewiseLinearMachine(RangeMachine):
    """Interpolation of a finite breakpoint table; ys[0] below xs[0] and
    undefined above xs[-1]."""

    def __init__(self, xs, ys):
        xs, ys = [rat(x) for x in xs], [rat(y) for y in ys]
        if len(xs) != len(ys) or not xs:
            raise ValueError("breakpoint table needs matching nonempty columns")
        if any(a >= b for a, b in zip(xs, xs[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        self.xs, self.ys = xs, ys
        slopes = [abs((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])) for i in range(len(xs) - 1)]
        self.lipschitz = max(slopes, default=Fraction(0))
        self.nondecreasing = all(a <= b for a, b in zip(ys, ys[1:]))
        self.name = f"piecewise-linear ({len(xs)} breakpoints)"

    def _value(self, x):
        if x <= self.xs[0]:
            return self.ys[0]
        return _pl_value(self.xs, self.ys, x)

    def enclose(self, lo, hi, meter):
        last = self.xs[-1]
        if lo > last:
            raise MachineUndefined(f"{lo} beyond last breakpoint {last}")
        if hi > last:
            raise _Straddle()
        pts = [self._value(lo), self._value(hi)]
        pts.extend(y for x, y in zip(self.xs, self.ys) if lo < x < hi)
        return min(pts), max(pts)


class StreamPLMachine(RangeMachine):
    """Interpolates a_n at breakpoints b_n of two left-c.e. streams.

    f(x) = a_0 below b_0; on [b_n, b_{n+1}) the chord from (b_n, a_n) to
    (b_{n+1}, a_{n+1}). Defined exactly on [0, lim b); evaluation at x pulls
    b until some b_m > x, so points at or above the limit exhaust fuel.
    """

    nondecreasing = True

    def __init__(self, a: LeftCEApprox, b: LeftCEApprox, lipschitz=None):
        self.a, self.b = a, b
        self.lipschitz = None if lipschitz is None else rat(lipschitz)
        self.name = "stream piecewise-linear"

    def value(self, x: Fraction, meter: Meter) -> Fraction:
        a, b = self.a, self.b
        if x < b[0]:
            return a[0]
        m = b.first_above(x, meter)
        n = m - 1
        return a[n] + (x - b[n]) / (b[m] - b[n]) * (a[m] - a[n])

    def enclose(self, lo, hi, meter):
        return self.value(lo, meter), self.value(hi, meter)


class MonotonizedMachine(RFunctionMachine):
    """x -> max{f(y) : y in [0, x]}.

    A nondecreasing inner machine is its own monotonization and is passed
    through. Otherwise, at output n, with L <= 2^s the inner Lipschitz bound:
    read the oracle at index n+4+s, scan a dyadic grid of step 2^-(n+3+s) on
    [0, x'] plus x' itself, evaluate the inner machine at index n+3 on each
    constant oracle, and keep the running maximum.
    """

    nondecreasing = True

    def __init__(self, inner: RFunctionMachine):
        self.inner = inner
        self.lipschitz = inner.lipschitz
        self.name = f"monotonized({inner.name})"
        if not inner.nondecreasing and inner.lipschitz is None:
            raise PreconditionError("monotonization of a non-monotone machine needs a Lipschitz bound")
        self._shift = _ceil_log2(inner.lipschitz) if inner.lipschitz else 0

    def fuel_hint(self, n):
        if self.inner.nondecreasing:
            return self.inner.fuel_hint(n)
        return ((1 << (n + 3 + self._shift)) + 2) * (self.inner.fuel_hint(n + 3) + 4)

    def output(self, oracle, n, meter):
        if self.inner.nondecreasing:
            return self.inner.output(oracle, n, meter)
        s = self._shift
        meter.tick()
        x = max(oracle[n + 4 + s], Fraction(0))
        step = pow2(-(n + 3 + s))
        best = None
        k = 0
        while True:
            y = k * step
            last = y >= x
            if last:
                y = x
            v = self.inner.output(ConstantApprox(y), n + 3, meter)
            best = v if best is None or v > best else best
            if last:
                return best
            k += 1


def _ceil_log2(q: Fraction) -> int:
    s = 0
    while pow2(s) < q:
        s += 1
    return s


def monotonize_max(m: RFunctionMachine) -> RFunctionMachine:
    if isinstance(m, MonotonizedMachine):
        return m
    return MonotonizedMachine(m)


def query_with_tolerance(m: RFunctionMachine, oracle, n: int, b: Budget) -> ToleranceResult:
    """Run ``m`` on ``oracle`` for its n-th output under ``b.fuel``."""
    if n > b.depth:
        raise PreconditionError(f"tolerance index {n} exceeds budget depth {b.depth}")
    meter = b.meter()
    try:
        value = m.output(oracle, n, meter)
    except FuelExhausted:
        return ToleranceResult(None, n, Status.FUEL_EXHAUSTED, meter.used)
    except MachineUndefined:
        return ToleranceResult(None, n, Status.UNDEFINED, meter.used)
    return ToleranceResult(value, n, Status.OK, meter.used)


def evaluate(m: RFunctionMachine, x, n: int, b: Budget) -> ToleranceResult:
    """Query ``m`` on the constant oracle (x, x, ...)."""
    return query_with_tolerance(m, ConstantApprox(rat(x)), n, b.replace(depth=max(b.depth, n)))


def max_on_compact(m: RFunctionMachine, p, q, b: Budget) -> ToleranceResult:
    """Approximate max of the monotonized function on [p, q], i.e. its value at q."""
    p, q = rat(p), rat(q)
    if not p < q:
        raise PreconditionError("max_on_compact needs p < q")
    return evaluate(monotonize_max(m), q, b.tolerance_index, b)
