"""Witness-building and left-c.e.-extraction procedures.

All searches dovetail in a fixed order and stop on fuel; an exhausted search
returns what it emitted so far, marked incomplete.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .kernel import (
    ONE,
    ZERO,
    Budget,
    ConstantApprox,
    ConstructionError,
    EffectiveApprox,
    FuelExhausted,
    Interval,
    LeftCEApprox,
    MachineUndefined,
    Meter,
    PreconditionError,
    canonical_rational,
    is_leftce_prefix,
    pow2,
    rat,
)
from .type2 import StreamPLMachine, monotonize_max
from .witnesses import QWitness, RealName, RWitness, table_witness


# -- domains ---------------------------------------------------------------


def certified_domain(src: LeftCEApprox, level_rate: int = 2) -> Iterator[Fraction]:
    """Enumerate the rationals certified below lim src: 0 first, then at stage s
    the breakpoint src_s followed by every dyadic of level <= s // level_rate
    lying below src_s. Each rational appears once."""
    seen = {ZERO}
    yield ZERO
    ptr: dict[int, int] = {}
    s = 0
    while True:
        bound = src[s]
        if bound not in seen:
            seen.add(bound)
            yield bound
        for level in range(1, s // level_rate + 1):
            den = 1 << level
            num = ptr.get(level, 1)
            while num < den and Fraction(num, den) < bound:
                q = Fraction(num, den)
                if q not in seen:
                    seen.add(q)
                    yield q
                num += 2
            ptr[level] = num
        s += 1


# -- paired approximations and interpolation -------------------------------


class PairedApproximations:
    """Left-c.e. streams a -> alpha, b -> beta with a_{n+1} - a_n < d(b_{n+1} - b_n).

    The first ``depth`` segments are validated eagerly; later segments are
    validated when a construction first touches them.
    """

    def __init__(self, a: LeftCEApprox, b: LeftCEApprox, d, depth: int = 16):
        self.a, self.b, self.d = a, b, rat(d)
        if self.d <= 0:
            raise ConstructionError("pairing constant must be positive")
        self._checked = 0
        self.check(depth - 1)

    def check(self, n: int) -> None:
        a, b, d = self.a, self.b, self.d
        while self._checked < n:
            k = self._checked
            if not a[k + 1] - a[k] < d * (b[k + 1] - b[k]):
                raise ConstructionError(f"pairing fails at n={k}: a-step >= d * b-step")
            self._checked += 1


def interp_Q_witness(p: PairedApproximations, name: str = "interp") -> QWitness:
    """Chord interpolation of (b_n, a_n); a_0 below b_0. Lipschitz d, strictly increasing."""
    a, b = p.a, p.b

    def rule(q, meter):
        meter.tick()
        if q < 0:
            raise MachineUndefined("negative argument")
        if q < b[0]:
            return a[0]
        m = b.first_above(q, meter)
        p.check(m)
        n = m - 1
        return a[n] + (a[m] - a[n]) / (b[m] - b[n]) * (q - b[n])

    return QWitness(rule, p.d, lambda: certified_domain(b), monotone=True, name=name)


def monotone_from_leftce(a: LeftCEApprox, b: LeftCEApprox, direction: str = "backward",
                         c=1, name: str = "") -> QWitness:
    """backward: g(q) = a_{min{m: b_m >= q}} from beta to alpha;
    forward: h(q) = b_{min{m: a_m >= q}} from alpha to beta."""
    if a[0] != 0 or b[0] != 0:
        raise PreconditionError("both streams must start at 0")
    if direction == "backward":
        src, dst = b, a
    elif direction == "forward":
        src, dst = a, b
    else:
        raise ValueError(f"direction must be forward or backward, not {direction!r}")

    def rule(q, meter):
        meter.tick()
        if q < 0:
            raise MachineUndefined("negative argument")
        return dst[src.first_at_least(q, meter)]

    return QWitness(rule, rat(c), lambda: certified_domain(src), monotone=True,
                    name=name or f"step-{direction}")


# -- extraction of left-c.e. approximations --------------------------------


@dataclass
class Extraction:
    prefix: list[Fraction]
    complete: bool
    note: str = ""
    fuel_used: int = 0

    @property
    def inconclusive(self) -> bool:
        return not self.complete


def _dedupe_push(prefix: list[Fraction], v: Fraction) -> None:
    if not prefix or v > prefix[-1]:
        prefix.append(v)


def leftce_from_monotone(w: QWitness, a: LeftCEApprox, direction: str, b: Budget,
                         length: int | None = None) -> Extraction:
    """forward: g(a_0), g(a_1), ... with repeats dropped.
    backward: the step-wise index search; emits q_{i_0} = 0, q_{i_1}, ..."""
    length = b.depth if length is None else length
    meter = b.meter()
    prefix: list[Fraction] = []
    try:
        if direction == "forward":
            i = 0
            while len(prefix) < length:
                meter.tick()
                _dedupe_push(prefix, w(a[i], meter))
                i += 1
        elif direction == "backward":
            _backward_monotone(w, a, length, meter, prefix)
        else:
            raise ValueError(f"direction must be forward or backward, not {direction!r}")
    except FuelExhausted as exc:
        return Extraction(prefix, False, f"fuel exhausted after {len(prefix)} terms: {exc}", meter.used)
    return Extraction(prefix, True, "", meter.used)


def _backward_monotone(w, a, length, meter, prefix):
    dom = w.domain()
    qs: list[Fraction] = []
    cache: dict[int, tuple[int, Fraction | None]] = {}

    def q_at(i):
        while len(qs) <= i:
            meter.tick()
            qs.append(next(dom))
        return qs[i]

    def g_at(i, allowance):
        hit = cache.get(i)
        if hit is not None and (hit[1] is not None or hit[0] >= allowance):
            return hit[1]
        try:
            v = w.rule(q_at(i), Meter(allowance))
        except (FuelExhausted, MachineUndefined):
            v = None
        cache[i] = (allowance, v)
        return v

    i_cur = 0
    prefix.append(q_at(0))
    n = 0
    while len(prefix) < length:
        s = 1
        found = None
        while found is None:
            top = i_cur + s
            for i in range(s + i_cur + 1):
                meter.tick()
                qi = q_at(i)
                if not qi > qs[i_cur]:
                    continue
                gi = g_at(i, 8 * s)
                # a is increasing, so "exists j in (i_cur, top] with g < a_j" is g < a_top
                if gi is not None and gi > a[n] and gi < a[top]:
                    found = i
                    break
            s += 1
        i_cur = found
        prefix.append(qs[found])
        n += 1


def piecewise_linear_R(a: LeftCEApprox, b: LeftCEApprox, c=None, kind: str = "real",
                       name: str = "pl") -> RWitness:
    """Real function through (b_n, a_n), a_0 below b_0. Without an explicit c the
    Lipschitz constant is the next power of two above the first 32 slopes."""
    if c is None:
        slope = max((a[n + 1] - a[n]) / (b[n + 1] - b[n]) for n in range(32))
        c = Fraction(1)
        while c <= slope:
            c *= 2
    machine = StreamPLMachine(a, b, lipschitz=c)
    return RWitness(machine, rat(c), kind=kind, name=name)


def leftce_from_R(w: RWitness, a: LeftCEApprox, direction: str, b: Budget,
                  length: int | None = None) -> Extraction:
    """Extract a left-c.e. approximation through a monotonized real witness.

    forward: w translates from the real named by ``a``; emits b_n, the
    tolerance-2^-m value at a_{i_n}, once a later a_j shows a gap of 2^-(m-1).
    backward: w translates to the real named by ``a``; emits rationals b whose
    tolerance-2^-m result r lies strictly between a_{j_{n-1}} and a_j with the
    2^-m and 2^-(m-2) margins.
    """
    length = b.depth if length is None else length
    machine = monotonize_max(w.machine)
    meter = b.meter()
    prefix: list[Fraction] = []
    try:
        if direction == "forward":
            _forward_real(machine, a, length, meter, prefix)
        elif direction == "backward":
            _backward_real(machine, a, length, meter, prefix)
        else:
            raise ValueError(f"direction must be forward or backward, not {direction!r}")
    except FuelExhausted as exc:
        return Extraction(prefix, False, f"fuel exhausted after {len(prefix)} terms: {exc}", meter.used)
    return Extraction(prefix, True, "", meter.used)


def _query(machine, x, m, allowance, meter):
    """Tolerance-2^-m result at the constant oracle x, or None when not halting
    within the allowance. The fuel spent is charged to ``meter``."""
    local = Meter(allowance + machine.fuel_hint(m + 1))
    try:
        return machine.output(ConstantApprox(x), m + 1, local)
    except (FuelExhausted, MachineUndefined):
        return None
    finally:
        meter.tick(min(local.used, local.fuel))


def _forward_real(machine, a, length, meter, prefix):
    i_prev, m_prev = -1, 0
    cache: dict[tuple[int, int], Fraction | None] = {}

    def val(i, m, allowance):
        key = (i, m)
        if key not in cache or cache[key] is None:
            cache[key] = _query(machine, a[i], m, allowance, meter)
        return cache[key]

    while len(prefix) < length:
        found = None
        s = 0
        while found is None:
            allowance = 64 * (s + 1)
            for u in range(s + 1):
                m, j = m_prev + 1 + u, i_prev + 2 + (s - u)
                for i in range(i_prev + 1, j):
                    meter.tick()
                    fi, fj = val(i, m, allowance), val(j, m, allowance)
                    if fi is not None and fj is not None and fi + pow2(-m) < fj - pow2(-m):
                        found = (i, m, fi)
                        break
                if found:
                    break
            s += 1
        i_prev, m_prev, value = found
        _dedupe_push(prefix, value)


def _backward_real(machine, a, length, meter, prefix):
    b_prev, j_prev = ZERO, -1
    while len(prefix) < length:
        found = None
        s = 0
        while found is None:
            allowance = 64 * (s + 1)
            for u in range(s + 1):
                m, j = 1 + u, j_prev + 1 + (s - u)
                x = _bisect_candidate(machine, a, m, j, j_prev, b_prev, allowance, meter)
                if x is not None:
                    found = (x, j)
                    break
            s += 1
        b_prev, j_prev = found
        prefix.append(b_prev)


def _bisect_candidate(machine, a, m, j, j_prev, b_prev, allowance, meter):
    """Search b in (b_prev, 1) by bisection on the two margin inequalities."""
    lo, hi = b_prev, ONE
    tol, wide = pow2(-m), pow2(-(m - 2))
    floor = a[j_prev] if j_prev >= 0 else None
    for _ in range(m + 24):
        meter.tick()
        x = (lo + hi) / 2
        r = _query(machine, x, m, allowance, meter)
        if r is None:
            hi = x
        elif floor is not None and not floor + tol < r - tol:
            lo = x
        elif not r + wide < a[j] - wide:
            hi = x
        else:
            return x
    return None


# -- the separation instance ------------------------------------------------


def _covered(intervals, lo, hi):
    """Lebesgue measure of the union of ``intervals`` inside [lo, hi]."""
    parts = sorted((max(i.lo, lo), min(i.hi, hi)) for i in intervals if i.hi > lo and i.lo < hi)
    total, cur_lo, cur_hi = ZERO, None, None
    for x, y in parts:
        if cur_hi is None or x > cur_hi:
            if cur_hi is not None:
                total += cur_hi - cur_lo
            cur_lo, cur_hi = x, y
        else:
            cur_hi = max(cur_hi, y)
    if cur_hi is not None:
        total += cur_hi - cur_lo
    return total


def avoiding_bisection(intervals: list[Interval]) -> EffectiveApprox:
    """Nested bisection of [0,1] keeping the half with more uncovered measure;
    ties alternate right/left so the limit is interior to every stage."""
    stages = [Interval(ZERO, ONE)]

    def stage(k):
        while len(stages) <= k:
            J = stages[-1]
            mid = J.mid
            left, right = Interval(J.lo, mid), Interval(mid, J.hi)
            free_l = left.measure - _covered(intervals, left.lo, left.hi)
            free_r = right.measure - _covered(intervals, right.lo, right.hi)
            if free_l == free_r:
                pick = right if len(stages) % 2 else left
            else:
                pick = left if free_l > free_r else right
            stages.append(pick)
        return stages[k]

    approx = EffectiveApprox(lambda k: stage(k).mid, label="beta stand-in")
    approx.stage = stage
    return approx


@dataclass
class SeparationInstance:
    depth: int
    qs: list[Fraction]
    intervals: list[Interval]
    beta: RealName
    alpha: RealName
    witness: QWitness
    beta_depth: int
    certified: list[int] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    def interval(self, n: int) -> Interval:
        return self.intervals[n - 1]

    @property
    def partial_measure(self) -> Fraction:
        return sum((i.measure for i in self.intervals), ZERO)

    def g(self, n: int) -> Fraction:
        return 1 - pow2(-2 * n)


def build_prop4_instance(depth: int, beta_depth: int | None = None) -> SeparationInstance:
    """I_n = [q_n, q_n + 4^-n] over the canonical enumeration, g(q_n) = 1 - 4^-n,
    and a deterministic beta stand-in avoiding I_1..I_depth."""
    if depth < 1:
        raise PreconditionError("depth must be at least 1")
    beta_depth = beta_depth or 4 * depth + 8
    qs = [canonical_rational(n) for n in range(1, depth + 1)]
    intervals = [Interval(q, q + pow2(-2 * n)) for n, q in enumerate(qs, start=1)]
    approx = avoiding_bisection(intervals)
    approx[beta_depth]
    beta = RealName("beta", lower=approx,
                    lower_bounds=lambda k: approx.stage(k).lo,
                    upper_bounds=lambda k: approx.stage(k).hi)
    final = approx.stage(beta_depth)
    inst = SeparationInstance(
        depth, qs, intervals, beta, RealName.rational("alpha", ONE),
        table_witness({q: 1 - pow2(-2 * n) for n, q in enumerate(qs, start=1)}, c=1, name="separation-g"),
        beta_depth,
    )
    for n, I in enumerate(intervals, start=1):
        if not final.disjoint(I):
            inst.violations.append(f"beta stage {beta_depth} meets I_{n}; bisection budget exceeded")
    for n, q in enumerate(qs, start=1):
        if beta.below(q, beta_depth):
            inst.certified.append(n)
            if not pow2(-2 * n) < final.lo - q:
                inst.violations.append(f"1 - g(q_{n}) not below beta - q_{n}")
    if inst.violations:
        raise ConstructionError("; ".join(inst.violations))
    return inst


def extraction_is_leftce(e: Extraction) -> bool:
    return bool(e.prefix) and is_leftce_prefix(e.prefix)
