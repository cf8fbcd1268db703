"""Translation-function witnesses and finite-depth checkers.

Checkers can only falsify. Each one samples rationals, decides "q < beta"
three-valuedly from certified bounds, skips undecidable samples and reports
them, and checks every strict inequality over limits with additive slack
2^-(depth-2).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import islice
from typing import Callable, Iterable, Iterator, Sequence

from .kernel import (
    ONE,
    Budget,
    EffectiveApprox,
    FuelExhausted,
    LeftCEApprox,
    MachineUndefined,
    Meter,
    canonical_rationals,
    canonical_upto,
    dyadic_rationals,
    format_rational,
    pow2,
    rat,
)
from .type2 import ConstantMachine, RFunctionMachine, Status, evaluate


class Verdict(enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    INCONCLUSIVE = "inconclusive"


@dataclass
class CheckReport:
    name: str
    property: str
    samples: int = 0
    violations: list[str] = field(default_factory=list)
    unknowns: int = 0
    exhausted: int = 0
    notes: list[str] = field(default_factory=list)
    truncated: int = 0
    vacuous: bool = False

    @property
    def verdict(self) -> Verdict:
        if self.violations:
            return Verdict.FAIL
        if self.exhausted or not (self.samples or self.vacuous):
            return Verdict.INCONCLUSIVE
        return Verdict.PASS

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS

    def violation(self, text: str, keep: int = 20) -> None:
        if len(self.violations) < keep:
            self.violations.append(text)
        else:
            self.truncated += 1

    def line(self) -> str:
        first = f" first={self.violations[0]}" if self.violations else ""
        return (f"{self.name} {self.property}: samples={self.samples} "
                f"violations={len(self.violations) + self.truncated} unknowns={self.unknowns} "
                f"exhausted={self.exhausted} verdict={self.verdict.value}{first}")


def slack(depth: int) -> Fraction:
    return pow2(-(depth - 2))


# -- named reals -----------------------------------------------------------


@dataclass(eq=False)
class RealName:
    """A real given by certified approximations.

    ``lower`` is a left-c.e. stream (each term strictly below the real) or an
    effective approximation (Cauchy name). ``upper_bounds`` and
    ``lower_bounds`` are optional stage-indexed certified bounds.
    """

    label: str
    lower: LeftCEApprox | EffectiveApprox | None = None
    exact: Fraction | None = None
    upper_bounds: Callable[[int], Fraction] | None = None
    lower_bounds: Callable[[int], Fraction] | None = None

    def __post_init__(self):
        if self.exact is not None:
            self.exact = rat(self.exact)
            if not 0 <= self.exact <= 1:
                raise ValueError(f"{self.label}: exact value outside [0,1]")
        if self.lower is None and self.exact is None:
            raise ValueError(f"{self.label}: needs a stream or an exact value")

    @classmethod
    def rational(cls, label: str, value) -> "RealName":
        return cls(label, exact=rat(value))

    def enclosure(self, k: int) -> tuple[Fraction, Fraction | None]:
        """Certified (lo, hi) at stage k; hi is None when no upper bound is known."""
        if self.exact is not None:
            return self.exact, self.exact
        lo, hi = None, None
        if isinstance(self.lower, LeftCEApprox):
            lo = self.lower[k]
        else:
            box = self.lower.enclosure(k)
            lo, hi = box.lo, box.hi
        if self.lower_bounds is not None:
            lo = max(lo, self.lower_bounds(k))
        if self.upper_bounds is not None:
            u = self.upper_bounds(k)
            hi = u if hi is None else min(hi, u)
        return lo, hi

    def below(self, q: Fraction, k: int) -> bool | None:
        """Three-valued "q < x": True/False when certified, None otherwise."""
        if self.exact is not None:
            return q < self.exact
        lo, hi = self.enclosure(k)
        if q < lo:
            return True
        if hi is not None and q >= hi:
            return False
        return None

    def best(self, k: int) -> Fraction:
        if self.exact is not None:
            return self.exact
        if isinstance(self.lower, LeftCEApprox):
            return self.lower[k]
        return self.lower[k]

    def lower_point(self, k: int) -> Fraction:
        """A rational certified below the real, approaching it as k grows."""
        if self.exact is not None:
            return max(Fraction(0), self.exact - pow2(-(k + 1)))
        return max(Fraction(0), self.enclosure(k)[0])

    def upper(self, k: int) -> Fraction | None:
        return self.enclosure(k)[1]

    def prefix_samples(self, depth: int) -> list[Fraction]:
        if self.lower is None:
            return []
        try:
            return [q for q in self.lower.prefix(depth) if 0 <= q < 1]
        except FuelExhausted:
            return [q for q in self.lower.prefix(self.lower.produced)]


# -- Q-translation witnesses -----------------------------------------------


@dataclass(eq=False)
class QWitness:
    """A partial rational translation function with an enumerable domain.

    ``rule(q, meter)`` returns g(q) or raises FuelExhausted while searching.
    ``domain()`` returns a fresh iterator over dom(g) starting with 0.
    ``domain_bound`` is ONE for total witnesses and None when unknown.
    """

    rule: Callable[[Fraction, Meter], Fraction]
    c: Fraction
    domain: Callable[[], Iterator[Fraction]]
    domain_bound: Fraction | None = None
    monotone: bool = False
    total: bool = False
    name: str = "g"

    def __post_init__(self):
        self.c = rat(self.c)
        if self.c <= 0:
            raise ValueError("Solovay constant must be positive")
        if self.total:
            self.domain_bound = ONE

    def __call__(self, q, meter: Meter | None = None) -> Fraction:
        return self.rule(rat(q), meter or Meter(10**9))

    def try_eval(self, q: Fraction, fuel: int) -> tuple[Status, Fraction | None]:
        try:
            return Status.OK, self.rule(q, Meter(fuel))
        except FuelExhausted:
            return Status.FUEL_EXHAUSTED, None
        except MachineUndefined:
            return Status.UNDEFINED, None

    def domain_prefix(self, count: int) -> list[Fraction]:
        out = []
        it = self.domain()
        try:
            for q in islice(it, count):
                out.append(q)
        except FuelExhausted:
            pass
        return out


def table_witness(table: dict, c=1, name: str = "table") -> QWitness:
    """Finite table; the domain enumeration is the table order."""
    table = {rat(k): rat(v) for k, v in table.items()}

    def rule(q, meter):
        meter.tick()
        if q not in table:
            raise MachineUndefined(f"{name}: {q} outside the table")
        return table[q]

    return QWitness(rule, rat(c), lambda: iter(list(table)), name=name,
                    monotone=_table_monotone(table))


def _table_monotone(table):
    items = sorted(table.items())
    return all(a[1] <= b[1] for a, b in zip(items, items[1:]))


def affine_witness(p=0, s=1, c=1, domain: str = "canonical", name: str = "") -> QWitness:
    """Total witness q -> p + s*q, clipped to [0,1)."""
    p, s = rat(p), rat(s)

    def rule(q, meter):
        meter.tick()
        v = p + s * q
        if not 0 <= v < 1:
            raise MachineUndefined(f"value {v} outside [0,1)")
        return v

    enum_ = dyadic_rationals if domain == "dyadic" else canonical_rationals
    return QWitness(rule, rat(c), enum_, total=True, monotone=s >= 0,
                    name=name or f"q -> {format_rational(p)} + {format_rational(s)}q")


# -- R-translation witnesses -----------------------------------------------


KINDS = ("real", "cl-open", "cl-local")


@dataclass(eq=False)
class RWitness:
    machine: RFunctionMachine
    c: Fraction
    kind: str = "cl-open"
    bound: Fraction | None = None
    name: str = "f"

    def __post_init__(self):
        self.c = rat(self.c)
        if self.c <= 0:
            raise ValueError("Lipschitz constant must be positive")
        if self.kind not in KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")
        if self.kind == "cl-local" and self.bound is None:
            raise ValueError("cl-local witnesses need a domain bound b")


def make_constant_witness(alpha) -> RWitness:
    alpha = rat(alpha)
    if not 0 <= alpha < 1:
        raise ValueError("constant must lie in [0,1)")
    return RWitness(ConstantMachine(alpha), Fraction(1), kind="cl-local", bound=ONE,
                    name=f"constant {format_rational(alpha)}")


# -- sampling --------------------------------------------------------------


def sample_points(depth: int, *extra: Iterable[Fraction]) -> list[Fraction]:
    """Canonical rationals with denominator <= 2*depth plus extra points, sorted."""
    pts = set(canonical_upto(max(2, 2 * depth)))
    for group in extra:
        pts.update(q for q in group if 0 <= q < 1)
    return sorted(pts)


def _eval_samples(w: QWitness, points, fuel):
    values, exhausted = {}, []
    for q in points:
        status, v = w.try_eval(q, fuel)
        if status is Status.OK:
            values[q] = v
        elif status is Status.FUEL_EXHAUSTED:
            exhausted.append(q)
    return values, exhausted


def _fmt(*qs) -> str:
    return ",".join(format_rational(q) for q in qs)


# -- checkers --------------------------------------------------------------


def check_solovay_condition(w: QWitness, alpha: RealName, beta: RealName, b: Budget,
                            samples: Sequence[Fraction] | None = None,
                            slack_value: Fraction | None = None) -> CheckReport:
    """alpha - g(q) < c(beta - q) and g(q) < alpha on sampled q certified below beta."""
    k = b.depth
    eps = slack(k) if slack_value is None else slack_value
    if samples is None:
        samples = sample_points(k, w.domain_prefix(4 * k), beta.prefix_samples(k))
    rep = CheckReport(w.name, "solovay-condition")
    a_lo, a_hi = alpha.enclosure(k)
    b_best = beta.best(k)
    if beta.exact is None:
        # the certified lower bound is the conservative estimate of beta - q
        b_best = max(b_best, beta.enclosure(k)[0])
    for q in samples:
        inside = beta.below(q, k)
        if inside is None:
            rep.unknowns += 1
            continue
        if not inside:
            continue
        status, g = w.try_eval(q, b.fuel)
        if status is Status.FUEL_EXHAUSTED:
            rep.exhausted += 1
            rep.notes.append(f"witness-domain violation? g({_fmt(q)}) did not halt within fuel")
            continue
        if status is Status.UNDEFINED:
            rep.samples += 1
            rep.violation(f"witness-domain violation: g({_fmt(q)}) undefined below beta")
            continue
        rep.samples += 1
        if not a_lo - g < w.c * (b_best - q) + eps:
            rep.violation(f"q={_fmt(q)} g={_fmt(g)}: alpha-g={_fmt(a_lo - g)} >= "
                          f"c(beta-q)+slack={_fmt(w.c * (b_best - q) + eps)}")
        elif a_hi is not None and not g < a_hi:
            rep.violation(f"q={_fmt(q)}: g={_fmt(g)} not below alpha={_fmt(a_hi)}")
    return rep


def check_lipschitz_Q(w: QWitness, d, b: Budget,
                      samples: Sequence[Fraction] | None = None) -> CheckReport:
    """|g(q) - g(p)| < d|q - p| on all sampled pairs where both are defined."""
    d = rat(d)
    k = b.depth
    if samples is None:
        samples = sample_points(k, w.domain_prefix(4 * k))
    values, exhausted = _eval_samples(w, samples, b.fuel)
    rep = CheckReport(w.name, f"lipschitz<{format_rational(d)}", unknowns=len(exhausted))
    pts = sorted(values)
    for i, p in enumerate(pts):
        gp = values[p]
        for q in pts[i + 1:]:
            rep.samples += 1
            if not abs(values[q] - gp) < d * (q - p):
                rep.violation(f"p={_fmt(p)} q={_fmt(q)}: |g(q)-g(p)|={_fmt(abs(values[q] - gp))}")
    return rep


def check_monotone(w: QWitness, b: Budget, samples: Sequence[Fraction] | None = None,
                   strict: bool = False) -> CheckReport:
    """g(p) <= g(q) (or < when strict) for sampled p < q in the domain."""
    k = b.depth
    if samples is None:
        samples = sample_points(k, w.domain_prefix(4 * k))
    values, exhausted = _eval_samples(w, samples, b.fuel)
    rep = CheckReport(w.name, "strictly-increasing" if strict else "nondecreasing",
                      unknowns=len(exhausted))
    pts = sorted(values)
    rep.vacuous = not pts and not exhausted
    for i, p in enumerate(pts):
        gp = values[p]
        for q in pts[i + 1:]:
            rep.samples += 1
            bad = gp >= values[q] if strict else gp > values[q]
            if bad:
                rep.violation(f"p={_fmt(p)} < q={_fmt(q)} but g(p)={_fmt(gp)} "
                              f"{'>=' if strict else '>'} g(q)={_fmt(values[q])}")
    return rep


def check_left_of_limit(w: QWitness, alpha: RealName, beta: RealName, b: Budget,
                        samples: Sequence[Fraction] | None = None) -> CheckReport:
    """For monotone g: g(q) < alpha forces q < beta (checked where certified)."""
    k = b.depth
    if samples is None:
        samples = sample_points(k, w.domain_prefix(4 * k))
    values, exhausted = _eval_samples(w, samples, b.fuel)
    rep = CheckReport(w.name, "below-alpha-implies-below-beta", unknowns=len(exhausted))
    a_lo = alpha.enclosure(k)[0]
    for q, g in sorted(values.items()):
        if g < a_lo:
            rep.samples += 1
            if beta.below(q, k) is False:
                rep.violation(f"q={_fmt(q)} >= beta yet g(q)={_fmt(g)} < alpha")
    rep.vacuous = not rep.samples
    return rep


def check_R_witness(w: RWitness, alpha: RealName, beta: RealName, b: Budget,
                    samples: Sequence[Fraction] | None = None) -> CheckReport:
    """Lipschitz, limit and (per kind) value-below-alpha or local-domain checks."""
    k, n = b.depth, b.tolerance_index
    tol = pow2(-(n - 1))
    eps = slack(k)
    if samples is None:
        samples = sample_points(k, beta.prefix_samples(k))
    rep = CheckReport(w.name, f"R-witness[{w.kind}]")
    m = w.machine

    def query(x):
        return evaluate(m, x, n, b)

    region, values = [], {}
    for x in samples:
        inside = beta.below(x, k)
        if inside is None:
            rep.unknowns += 1
        elif inside:
            region.append(x)
    for x in region:
        r = query(x)
        if r.ok:
            values[x] = r.value
        elif r.status is Status.UNDEFINED:
            rep.violation(f"machine undefined at {_fmt(x)} below beta")
        else:
            rep.exhausted += 1

    pts = sorted(values)
    for i, p in enumerate(pts):
        for q in pts[i + 1:]:
            rep.samples += 1
            if not abs(values[q] - values[p]) < w.c * (q - p) + 2 * tol:
                rep.violation(f"lipschitz p={_fmt(p)} q={_fmt(q)}")

    a_best = alpha.best(k)
    b_best = beta.best(k)
    a_hi = alpha.upper(k)
    for stage in range(k):
        x = beta.lower_point(stage)
        if beta.below(x, k) is not True:
            continue
        r = query(x)
        if not r.ok:
            if r.status is Status.UNDEFINED:
                rep.violation(f"machine undefined at stage point {_fmt(x)}")
            else:
                rep.exhausted += 1
            continue
        rep.samples += 1
        bound = w.c * (b_best - x) + eps + tol
        if not abs(a_best - r.value) < bound:
            rep.violation(f"limit x={_fmt(x)}: |alpha-f(x)|={_fmt(abs(a_best - r.value))} >= {_fmt(bound)}")
        if w.kind == "real" and a_hi is not None and not r.value < a_hi + tol:
            rep.violation(f"value {_fmt(r.value)} at {_fmt(x)} not below alpha")

    if w.kind == "cl-local":
        hi = beta.upper(k)
        for x in samples:
            if x > w.bound or (hi is not None and x < hi) or (hi is None and beta.below(x, k) is not False):
                continue
            r = query(x)
            rep.samples += 1
            if r.status is Status.UNDEFINED:
                rep.violation(f"cl-local domain: undefined at {_fmt(x)} <= b={_fmt(w.bound)}")
            elif r.status is Status.FUEL_EXHAUSTED:
                rep.exhausted += 1
        for x in (w.bound,) if w.bound < 1 else ():
            r = query(x)
            if r.status is Status.UNDEFINED:
                rep.violation(f"cl-local domain: undefined at bound {_fmt(x)}")
    return rep


# -- diagnostics -----------------------------------------------------------


@dataclass
class TrendReport:
    consistent: bool
    g_converges: bool
    q_converges: bool
    nondecreasing: bool
    g_gaps: tuple[Fraction, Fraction]
    q_gaps: tuple[Fraction, Fraction]

    def line(self) -> str:
        return (f"trend consistent={self.consistent} g->alpha={self.g_converges} "
                f"q->beta={self.q_converges} nondecreasing={self.nondecreasing}")


def convergence_diagnostic(values: Sequence[tuple[Fraction, Fraction]], alpha_hint,
                           beta_hint) -> TrendReport:
    """Does evidence that g_n -> alpha come with q_n -> beta?

    "Converges" means the last gap is at most half the first gap.
    """
    if len(values) < 2:
        raise ValueError("need at least two (q, g) pairs")
    alpha_hint, beta_hint = rat(alpha_hint), rat(beta_hint)
    gs = [g for _, g in values]
    g_gap = (abs(alpha_hint - gs[0]), abs(alpha_hint - gs[-1]))
    q_gap = (abs(beta_hint - values[0][0]), abs(beta_hint - values[-1][0]))
    g_conv = g_gap[1] * 2 <= g_gap[0]
    q_conv = q_gap[1] * 2 <= q_gap[0]
    return TrendReport(
        consistent=(not g_conv) or q_conv,
        g_converges=g_conv,
        q_converges=q_conv,
        nondecreasing=all(a <= b for a, b in zip(gs, gs[1:])),
        g_gaps=g_gap,
        q_gaps=q_gap,
    )
