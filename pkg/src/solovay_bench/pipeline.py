"""Conversion of a rational Solovay witness into a Lipschitz real witness.

Stages, over a fixed enumeration q_0 = 0, q_1, ... of dom(g):

* g~(q_i): the max of g over the earlier-or-equal entries lying at or below q_i;
* P(q, n): the entries <= q among the first t, for the least t at which those
  entries chain from 0 to q with every gap below 2^-n;
* f(q, n) = min{g~(p) + d(q - p) : p in P(q, n)}, with d = 2^K > c;
* f~(q, n) = max of f over P(q, n) and q;
* h: output n on an oracle x_0, x_1, ... is f~(x_j, j) with j = n + K + 4.

The chain found at the least t is the union of all valid chains: once the
run of entries reachable from 0 by sub-2^-n steps ends within 2^-n of q,
every entry in [0, q] belongs to that run.
"""

from __future__ import annotations

import heapq
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterator, Sequence

from .kernel import (
    ONE,
    Budget,
    FuelExhausted,
    MachineUndefined,
    Meter,
    PreconditionError,
    format_rational,
    pow2,
    rat,
)
from .type2 import RFunctionMachine
from .witnesses import CheckReport, QWitness, RealName, RWitness, slack


def minimal_K(c) -> int:
    """Smallest K > 1 with 2^K > c."""
    c = rat(c)
    K = 2
    while pow2(K) <= c:
        K += 1
    return K


@dataclass(frozen=True)
class PipelineConfig:
    c: Fraction
    K: int | None = None
    domain_bound: Fraction | str | None = None

    def __post_init__(self):
        object.__setattr__(self, "c", rat(self.c))
        if self.K is None:
            object.__setattr__(self, "K", minimal_K(self.c))
        if self.K < 1:
            raise PreconditionError("K must be a positive natural")
        if not pow2(self.K) > self.c:
            raise PreconditionError(f"d = 2^{self.K} must exceed c = {self.c}")

    @property
    def d(self) -> Fraction:
        return pow2(self.K)

    @property
    def total(self) -> bool:
        return self.domain_bound == "one" or self.domain_bound == ONE


@dataclass(frozen=True)
class IndexChain:
    q: Fraction
    n: int
    t: int
    indices: tuple[int, ...]
    values: tuple[Fraction, ...]

    def __len__(self):
        return len(self.values)


class _Run:
    """For one gap bound: after each enumeration step t, the largest u such
    that the entries in [0, u] chain from 0 with gaps below the bound."""

    def __init__(self, delta: Fraction):
        self.delta = delta
        self.sorted: list[Fraction] = []
        self.u: Fraction | None = None
        self.history: list[Fraction] = []

    def push(self, v: Fraction) -> None:
        vals = self.sorted
        i = bisect_left(vals, v)
        if i == len(vals) or vals[i] != v:
            vals.insert(i, v)
        if self.u is None:
            if v == 0:
                self.u = v
                self._advance()
        elif self.u < v < self.u + self.delta:
            self.u = v
            self._advance()
        self.history.append(self.u if self.u is not None else Fraction(-1))

    def _advance(self):
        vals = self.sorted
        i = bisect_right(vals, self.u)
        while i < len(vals) and vals[i] - self.u < self.delta:
            self.u = vals[i]
            i += 1

    def first_cover(self, q: Fraction) -> int | None:
        """Least t with u(t) + delta > q, or None if not yet reached."""
        # history is nondecreasing, so a bisection on u + delta > q applies
        target = q - self.delta
        t = bisect_right(self.history, target)
        return t if t < len(self.history) else None


class _Level:
    """Shared query structure for one n over the first ``size`` entries.

    Entries are ranked by value. For each covered entry p, F(p) = f(p, n) is
    found by one sweep in value order: the regions {i <= t_p, q_i <= p} grow
    with p because t_p does, so a heap keyed by index releases entries as
    t_p passes them. A Fenwick tree over indices then answers, for any
    (t, x), min of g~_i - d*q_i and max of F_i over i <= t with q_i <= x,
    using per-node rank-sorted lists with prefix extremes.
    """

    def __init__(self, pipe: "Pipeline", n: int, size: int):
        run = pipe._run(n)
        d = pipe.cfg.d
        qs = pipe.entries[:size]
        ws = [g - d * q for g, q in zip(pipe.gt_values[:size], qs)]
        self.size = size
        self.distinct = sorted(set(qs))
        rank_of = {v: r for r, v in enumerate(self.distinct)}
        ranks = [rank_of[q] for q in qs]
        by_value = sorted(range(size), key=ranks.__getitem__)

        F: list[Fraction | None] = [None] * size
        heap: list[tuple[int, int]] = []
        best = None
        ptr = 0
        for i in by_value:
            t = run.first_cover(qs[i])
            if t is None or t >= size:
                break
            r = ranks[i]
            while ptr < size and ranks[by_value[ptr]] <= r:
                j = by_value[ptr]
                heapq.heappush(heap, (j, j))
                ptr += 1
            while heap and heap[0][0] <= t:
                j = heapq.heappop(heap)[1]
                if best is None or ws[j] < best:
                    best = ws[j]
            F[i] = best + d * qs[i]

        # node k (1-based) covers indices k - lowbit(k) .. k - 1
        self.node_ranks: list[list[int]] = [[]]
        self.node_wmin: list[list[Fraction]] = [[]]
        self.node_fmax: list[list[Fraction | None]] = [[]]
        for k in range(1, size + 1):
            idx = sorted(range(k - (k & -k), k), key=ranks.__getitem__)
            rs, wm, fm = [], [], []
            lo = hi = None
            known = True
            for i in idx:
                rs.append(ranks[i])
                lo = ws[i] if lo is None or ws[i] < lo else lo
                wm.append(lo)
                if known and F[i] is None:
                    known = False
                if known:
                    hi = F[i] if hi is None or F[i] > hi else hi
                    fm.append(hi)
                else:
                    fm.append(None)
            self.node_ranks.append(rs)
            self.node_wmin.append(wm)
            self.node_fmax.append(fm)

    def query(self, t: int, x: Fraction) -> tuple[Fraction, Fraction | None]:
        """(min w, max F) over indices <= t with value <= x."""
        r = bisect_right(self.distinct, x) - 1
        wmin = fmax = None
        k = t + 1
        while k > 0:
            pos = bisect_right(self.node_ranks[k], r)
            if pos:
                w = self.node_wmin[k][pos - 1]
                f = self.node_fmax[k][pos - 1]
                if f is None:
                    raise AssertionError("query region reaches an uncovered entry")
                wmin = w if wmin is None or w < wmin else wmin
                fmax = f if fmax is None or f > fmax else fmax
            k -= k & -k
        return wmin, fmax


class Pipeline:
    """Memoized stage evaluator for one witness and configuration."""

    def __init__(self, w: QWitness, cfg: PipelineConfig,
                 enumeration: Callable[[], Iterator[Fraction]] | None = None):
        self.w, self.cfg = w, cfg
        self._domain = (enumeration or w.domain)()
        self.entries: list[Fraction] = []
        self.g_values: list[Fraction] = []
        self.gt_values: list[Fraction] = []
        self._frontier_keys: list[Fraction] = []
        self._frontier_vals: list[Fraction] = []
        self._runs: dict[int, _Run] = {}
        self._levels: dict[int, _Level] = {}
        self._memo: dict[tuple, object] = {}
        self._lock = threading.RLock()
        self.fuel_used = 0
        self._domain_ended = False

    # -- enumeration and g~ --

    def _extend(self, t: int, meter: Meter) -> None:
        """Materialize entries 0..t."""
        while len(self.entries) <= t:
            meter.tick()
            self.fuel_used += 1
            try:
                q = next(self._domain)
            except StopIteration:
                self._domain_ended = True
                raise FuelExhausted("finite domain enumeration ended") from None
            if not self.entries and q != 0:
                raise PreconditionError("domain enumeration must start with q_0 = 0")
            try:
                g = self.w.rule(q, meter)
            except MachineUndefined as exc:
                raise PreconditionError(f"enumerated {q} outside dom(g): {exc}") from None
            self.entries.append(q)
            self.g_values.append(g)
            self.gt_values.append(self._frontier_insert(q, g))

    def _frontier_insert(self, q, g) -> Fraction:
        keys, vals = self._frontier_keys, self._frontier_vals
        i = bisect_right(keys, q)
        best_below = vals[i - 1] if i else None
        if best_below is not None and best_below >= g:
            return best_below
        keys.insert(i, q)
        vals.insert(i, g)
        j = i + 1
        while j < len(keys) and vals[j] <= g:
            del keys[j]
            del vals[j]
        return g

    def gtilde(self, index: int, meter: Meter | None = None) -> Fraction:
        with self._lock:
            self._extend(index, meter or Meter(10**9))
            return self.gt_values[index]

    # -- chains --

    def _run(self, n: int) -> _Run:
        run = self._runs.get(n)
        if run is None:
            run = self._runs[n] = _Run(pow2(-n))
        return run

    def _cover_time(self, q: Fraction, n: int, meter: Meter) -> int:
        run = self._run(n)
        while True:
            t = run.first_cover(q)
            if t is not None:
                return t
            k = len(run.history)
            self._extend(k, meter)
            run.push(self.entries[k])

    def search_P(self, q, n: int, meter: Meter | None = None) -> IndexChain:
        q = rat(q)
        if q < 0:
            raise PreconditionError("P(q, n) needs q >= 0")
        key = ("P", q, n)
        with self._lock:
            hit = self._memo.get(key)
            if hit is not None:
                return hit
            meter = meter or Meter(10**9)
            t = self._cover_time(q, n, meter)
            first: dict[Fraction, int] = {}
            for i in range(t + 1):
                v = self.entries[i]
                if v <= q and v not in first:
                    first[v] = i
            values = tuple(sorted(first))
            chain = IndexChain(q, n, t, tuple(first[v] for v in values), values)
            self._memo[key] = chain
            return chain

    # -- f and f~ --

    def _level(self, n: int, t: int, meter: Meter) -> _Level:
        """A query structure for n covering index t, rebuilt at doubled size."""
        level = self._levels.get(n)
        if level is not None and t < level.size:
            return level
        size = max(t + 1, 2 * level.size if level else 64)
        run = self._run(n)
        while len(run.history) < size:
            k = len(run.history)
            try:
                self._extend(k, meter)
            except FuelExhausted:
                if k <= t or not self._domain_ended:
                    raise
                size = k  # a finite enumeration ended past t
                break
            run.push(self.entries[k])
        meter.tick(size)
        level = self._levels[n] = _Level(self, n, size)
        return level

    def _both(self, q: Fraction, n: int, meter: Meter) -> tuple[Fraction, Fraction]:
        key = ("f", q, n)
        if key in self._memo and ("ft", q, n) in self._memo:
            return self._memo[key], self._memo[("ft", q, n)]
        t = self._cover_time(q, n, meter)
        meter.tick()
        wmin, fmax = self._level(n, t, meter).query(t, q)
        f = wmin + self.cfg.d * q
        ft = f if fmax is None or f > fmax else fmax
        self._memo[key] = f
        self._memo[("ft", q, n)] = ft
        return f, ft

    def f(self, q, n: int, meter: Meter | None = None) -> Fraction:
        """min{g~(p) + d(q - p) : p in P(q, n)}."""
        with self._lock:
            return self._both(rat(q), n, meter or Meter(10**9))[0]

    def ftilde(self, q, n: int, meter: Meter | None = None) -> Fraction:
        """max of f(p, n) over p in P(q, n) and f(q, n)."""
        with self._lock:
            return self._both(rat(q), n, meter or Meter(10**9))[1]

    def stage_row(self, q, n: int, meter: Meter | None = None) -> tuple:
        chain = self.search_P(q, n, meter)
        return (rat(q), n, len(chain), self.f(q, n, meter), self.ftilde(q, n, meter))


# -- module-level operations ------------------------------------------------


def gtilde(w: QWitness, n_index: int, b: Budget) -> Fraction:
    return Pipeline(w, PipelineConfig(w.c)).gtilde(n_index, b.meter())


def search_P(q, n: int, cfg: PipelineConfig, b: Budget, w: QWitness | None = None,
             enumeration: Sequence[Fraction] | None = None) -> IndexChain:
    """P(q, n) over a witness's domain or over an explicit enumeration prefix.

    With an explicit prefix no g values are needed; running past its end is
    fuel exhaustion."""
    if enumeration is not None:
        seq = [rat(v) for v in enumeration]
        w = QWitness(lambda q_, m: Fraction(0), cfg.c, lambda: iter(seq), name="enumeration")
    return Pipeline(w, cfg).search_P(q, n, b.meter())


def greatest_chain(prefix: Sequence[Fraction], q, n: int) -> tuple[Fraction, ...] | None:
    """Greatest valid chain within a fixed enumeration prefix, or None."""
    q = rat(q)
    delta = pow2(-n)
    vals = sorted({v for v in prefix if v <= q})
    if not vals or vals[0] != 0:
        return None
    if any(b - a >= delta for a, b in zip(vals, vals[1:])) or q - vals[-1] >= delta:
        return None
    return tuple(vals)


def brute_force_chain(prefix: Sequence[Fraction], q, n: int) -> tuple[int, tuple[Fraction, ...]] | None:
    """Exhaustive oracle: least t admitting a valid chain and the union of all
    valid chains within entries 0..t. Exponential; for short prefixes only."""
    q = rat(q)
    delta = pow2(-n)
    for t in range(len(prefix)):
        pool = sorted({v for v in prefix[: t + 1] if v != 0})
        if 0 not in prefix[: t + 1]:
            continue
        union: set[Fraction] = set()
        for r in range(len(pool) + 1):
            for combo in combinations(pool, r):
                chain = (Fraction(0),) + combo
                gaps_ok = all(0 < b - a < delta for a, b in zip(chain, chain[1:]))
                if gaps_ok and 0 <= q - chain[-1] < delta:
                    union.update(chain)
        if union:
            return t, tuple(sorted(union))
    return None


def f_two_arg(q, n: int, w: QWitness, cfg: PipelineConfig, b: Budget,
              pipeline: Pipeline | None = None) -> Fraction:
    return (pipeline or Pipeline(w, cfg)).f(q, n, b.meter())


def ftilde_two_arg(q, n: int, w: QWitness, cfg: PipelineConfig, b: Budget,
                   pipeline: Pipeline | None = None) -> Fraction:
    return (pipeline or Pipeline(w, cfg)).ftilde(q, n, b.meter())


class HMachine(RFunctionMachine):
    """Output n is f~(x_j, j) at j = n + K + 4, within 2^-(n+2) of h(x)."""

    def __init__(self, pipeline: Pipeline):
        self.pipeline = pipeline
        self.K = pipeline.cfg.K
        self.lipschitz = pipeline.cfg.d
        # for nondecreasing g, g~ = g and f~(q, N) lies within d*2^-N above
        # g(max P(q, N)), so h(x) is the left limit of g at x: nondecreasing
        self.nondecreasing = pipeline.w.monotone
        self.name = f"h[{pipeline.w.name}]"

    def stage(self, n: int) -> int:
        return n + self.K + 4

    def fuel_hint(self, n):
        # covering [0, x] with gaps below 2^-j takes on the order of 2^j entries
        return 16 << self.stage(n)

    def output(self, oracle, n, meter):
        j = self.stage(n)
        meter.tick()
        x = oracle[j]
        return self.pipeline.ftilde(max(x, Fraction(0)), j, meter)


def h_machine(w: QWitness, cfg: PipelineConfig | None = None,
              enumeration: Callable[[], Iterator[Fraction]] | None = None) -> RWitness:
    cfg = cfg or PipelineConfig(w.c, domain_bound="one" if w.total else None)
    if not w.c < cfg.d:
        raise PreconditionError("witness constant must be below d = 2^K")
    pipe = Pipeline(w, cfg, enumeration)
    machine = HMachine(pipe)
    if cfg.total or w.total:
        return RWitness(machine, cfg.d, kind="cl-local", bound=ONE, name=machine.name)
    return RWitness(machine, cfg.d, kind="cl-open", name=machine.name)


# -- claim checks -----------------------------------------------------------


CLAIMS = ("chain-nesting", "precision-step", "lipschitz-step", "left-cut", "upper-bound",
          "ftilde-above-f", "ftilde-upper-bound", "ftilde-precision-step", "ftilde-lipschitz",
          "ftilde-left-cut")
# non-strict companion of lipschitz-step: equality occurs when p is in
# P(q, n) and minimizes both f(p, n) and f(q, n)
DIAGNOSTICS = ("lipschitz-step-weak",)


def check_claims(pipe: Pipeline, alpha: RealName, beta: RealName,
                 tuples: Sequence[tuple[Fraction, Fraction, int, int]],
                 b: Budget) -> dict[str, CheckReport]:
    """Check the f and f~ properties on (q, p, m, n) tuples with p < q, m < n.

    Tuples whose searches exhaust fuel are counted as exhausted. Left-cut
    claims are only checked where q is certified below beta.
    """
    K, c, d = pipe.cfg.K, pipe.cfg.c, pipe.cfg.d
    reps = {k: CheckReport(pipe.w.name, f"claim-{k}") for k in CLAIMS + DIAGNOSTICS}
    k = b.depth
    a_lo, a_hi = alpha.enclosure(k)
    a_top = a_hi if a_hi is not None else alpha.best(k) + slack(k)
    b_lo, b_hi = beta.enclosure(k)
    b_top = b_hi if b_hi is not None else beta.best(k) + slack(k)

    def fmt(*xs):
        return " ".join(format_rational(x) if isinstance(x, Fraction) else str(x) for x in xs)

    for q, p, m, n in tuples:
        q, p = rat(q), rat(p)
        meter = b.meter()
        try:
            Pq, Pp, Pqm = pipe.search_P(q, n, meter), pipe.search_P(p, n, meter), pipe.search_P(q, m, meter)
            fq, fp, fqm = pipe.f(q, n, meter), pipe.f(p, n, meter), pipe.f(q, m, meter)
            tq, tp, tqm = pipe.ftilde(q, n, meter), pipe.ftilde(p, n, meter), pipe.ftilde(q, m, meter)
        except FuelExhausted:
            for r in reps.values():
                r.exhausted += 1
            continue
        tag = fmt("q", q, "p", p, "m", m, "n", n)

        def record(key, ok, detail=""):
            reps[key].samples += 1
            if not ok:
                reps[key].violation(f"{tag} {detail}".strip())

        record("chain-nesting", set(Pp.values) <= set(Pq.values), "P(p,n) not within P(q,n)")
        record("precision-step", set(Pqm.values) <= set(Pq.values) and 0 <= fqm - fq < pow2(-(m - K)),
               fmt("f(q,m)-f(q,n)=", fqm - fq))
        record("lipschitz-step", fq - fp < d * (q - p), fmt("f(q,n)-f(p,n)=", fq - fp, "d(q-p)=", d * (q - p)))
        record("lipschitz-step-weak", fq - fp <= d * (q - p), fmt("f(q,n)-f(p,n)=", fq - fp, "d(q-p)=", d * (q - p)))
        record("ftilde-above-f", tq >= fq and tp >= fp and tqm >= fqm, "f~ below f")
        record("ftilde-precision-step", abs(tq - tqm) < pow2(-(m - K - 1)), fmt("|f~(q,n)-f~(q,m)|=", abs(tq - tqm)))
        record("ftilde-lipschitz", abs(tq - tp) < pow2(-(n - K)) + d * (q - p), fmt("|f~(q,n)-f~(p,n)|=", abs(tq - tp)))
        # D_beta membership, certified: q < beta + 2^-n
        if q < b_lo + pow2(-n):
            record("upper-bound", fq < a_top + pow2(-(n - K - 1)), fmt("f=", fq))
            record("ftilde-upper-bound", tq < a_top + pow2(-(n - K - 1)), fmt("f~=", tq))
        if beta.below(q, k):
            record("left-cut", a_lo - fq < c * (b_top - q), fmt("alpha-f=", a_lo - fq))
            record("ftilde-left-cut", a_lo - tq < c * (b_top - q), fmt("alpha-f~=", a_lo - tq))
    return reps
